//! Running external commands with placeholders, captured output and timeouts.

use std::collections::BTreeMap;
use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

#[derive(Debug, thiserror::Error)]
pub enum ProcError {
    #[error("command template is empty")]
    EmptyTemplate,
    #[error("cannot split command template: {0}")]
    BadTemplate(String),
    #[error("command not found or not executable: {program}: {source}")]
    NotRunnable {
        program: String,
        #[source]
        source: io::Error,
    },
    #[error("i/o error running {program}: {source}")]
    Io {
        program: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Code(i32),
    Signal(i32),
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct ProcResult {
    pub status: ExitStatus,
    pub duration: Duration,
}

/// Splits `template` into argv and substitutes `{name}` placeholders per argument.
pub fn expand(template: &str, vars: &BTreeMap<&str, String>) -> Result<Vec<String>, ProcError> {
    let words = shlex::split(template).ok_or_else(|| ProcError::BadTemplate(template.to_string()))?;
    if words.is_empty() {
        return Err(ProcError::EmptyTemplate);
    }
    Ok(words
        .into_iter()
        .map(|w| {
            let mut out = w;
            for (k, v) in vars {
                out = out.replace(&format!("{{{k}}}"), v);
            }
            out
        })
        .collect())
}

/// Directory holding the harness binaries, used for `{bin_dir}`.
///
/// `ANNAFORGE_BIN_DIR` wins; otherwise the running executable's directory,
/// stepping out of cargo's `deps/` so test binaries find the real ones.
pub fn bin_dir() -> String {
    if let Some(d) = std::env::var_os("ANNAFORGE_BIN_DIR") {
        return PathBuf::from(d).display().to_string();
    }
    let Some(dir) = std::env::current_exe().ok().and_then(|p| p.parent().map(Path::to_path_buf)) else {
        return String::new();
    };
    let dir = match dir.file_name() {
        Some(n) if n == "deps" => dir.parent().map(Path::to_path_buf).unwrap_or(dir),
        _ => dir,
    };
    dir.display().to_string()
}

/// Whether `program` names an existing file or something on `PATH`.
pub fn resolvable(program: &str) -> bool {
    if program.contains('/') {
        return Path::new(program).is_file();
    }
    std::env::var_os("PATH").is_some_and(|paths| std::env::split_paths(&paths).any(|d| d.join(program).is_file()))
}

/// Runs `argv` in `cwd`, writing stdout/stderr to the given files.
pub fn run(
    argv: &[String],
    cwd: &Path,
    env: &[(String, String)],
    timeout: Option<Duration>,
    stdout_path: &Path,
    stderr_path: &Path,
) -> Result<ProcResult, ProcError> {
    let program = argv[0].clone();
    let io_err = |source| ProcError::Io {
        program: program.clone(),
        source,
    };
    let stdout = File::create(stdout_path).map_err(io_err)?;
    let stderr = File::create(stderr_path).map_err(io_err)?;
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(stdout)
        .stderr(stderr);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let started = Instant::now();
    let mut child = cmd.spawn().map_err(|source| match source.kind() {
        io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied => ProcError::NotRunnable {
            program: program.clone(),
            source,
        },
        _ => ProcError::Io {
            program: program.clone(),
            source,
        },
    })?;
    let status = match timeout {
        Some(t) => match child.wait_timeout(t).map_err(io_err)? {
            Some(s) => Some(s),
            None => {
                let _ = child.kill();
                let _ = child.wait();
                None
            }
        },
        None => Some(child.wait().map_err(io_err)?),
    };
    let duration = started.elapsed();
    let status = match status {
        None => ExitStatus::TimedOut,
        Some(s) => match s.code() {
            Some(c) => ExitStatus::Code(c),
            None => ExitStatus::Signal(signal_of(&s)),
        },
    };
    Ok(ProcResult { status, duration })
}

#[cfg(unix)]
fn signal_of(s: &std::process::ExitStatus) -> i32 {
    use std::os::unix::process::ExitStatusExt;
    s.signal().unwrap_or(-1)
}

#[cfg(not(unix))]
fn signal_of(_: &std::process::ExitStatus) -> i32 {
    -1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expands_placeholders_per_word() {
        let mut vars = BTreeMap::new();
        vars.insert("src_dir", "/tmp/a b".to_string());
        let argv = expand("tool --src={src_dir} '{src_dir}/x' {other}", &vars).unwrap();
        assert_eq!(argv, ["tool", "--src=/tmp/a b", "/tmp/a b/x", "{other}"]);
        assert!(matches!(expand("  ", &vars), Err(ProcError::EmptyTemplate)));
        assert!(expand("a 'open", &vars).is_err());
    }

    #[cfg(unix)]
    #[test]
    fn runs_with_timeout() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let err = dir.path().join("err");
        let argv: Vec<String> = ["sh", "-c", "echo hi; exit 3"].iter().map(|s| s.to_string()).collect();
        let r = run(&argv, dir.path(), &[], None, &out, &err).unwrap();
        assert_eq!(r.status, ExitStatus::Code(3));
        assert_eq!(std::fs::read_to_string(&out).unwrap(), "hi\n");
        let argv: Vec<String> = ["sleep", "30"].iter().map(|s| s.to_string()).collect();
        let r = run(&argv, dir.path(), &[], Some(Duration::from_millis(200)), &out, &err).unwrap();
        assert_eq!(r.status, ExitStatus::TimedOut);
        let argv = vec!["/nonexistent/tool".to_string()];
        assert!(matches!(
            run(&argv, dir.path(), &[], None, &out, &err),
            Err(ProcError::NotRunnable { .. })
        ));
    }
}
