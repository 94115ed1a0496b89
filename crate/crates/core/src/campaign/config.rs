//! Campaign configuration file.
//!
//! ```text
//! format campaign version=1
//! corpus path=<dir>
//! registry path=<file>                          # bundled registry if absent
//! profiles path=<file>                          # analyzer definitions, repeatable
//! analyzer <name> run="..." report=<format> ... # inline definition, profile-file keys
//! use <analyzer> [checkers=ISC,ASC,EAC] [allowlist=<rule_id,...>]
//! payloads [dummy=true] [source_level=<fq,...>] [source_limit=<n>] [tuples=<name,...>]
//! processor [mode=builtin|external] [template="... {src_dir} ... {out_dir}"]
//! rule <fq_name> transform=<erase|no-args-ctor|getter|cleanup> [description="..."]
//! validity [mode=compile|parse_only] [hook="..."] [classpath=<cp>]
//! run [work_dir=<dir>] [parallelism=<n>] [timeout=<secs>] [resume=false]
//! ```
//!
//! Relative paths resolve against the config file's directory. Without `use`
//! records every defined analyzer runs with its full checker policy. `rule`
//! records replace the built-in rule set.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::adapters::{self, AnalyzerProfile, DEFAULT_TIMEOUT};
use crate::metamorph::Checker;
use crate::mutagen::{CompileHook, ValidityMode};
use crate::processor::{ProcessingRule, ProcessorConfig, ProcessorMode};
use crate::textfmt::{self, FormatError, Record};

pub const DEFAULT_COMPILE_HOOK: &str = "{bin_dir}/minijavac --src {src_dir} --out {out_dir}";
pub const WORK_DIR_ENV: &str = "ANNAFORGE_WORK_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerUse {
    pub profile: AnalyzerProfile,
    pub checkers: BTreeSet<Checker>,
    pub allowlist: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceSelection {
    Named(Vec<String>),
    /// First `n` eligible registry entries in name order.
    Limit(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayloadSelection {
    pub dummy: bool,
    pub source_level: SourceSelection,
    /// `None` selects every verified tuple.
    pub tuples: Option<Vec<String>>,
}

impl Default for PayloadSelection {
    fn default() -> Self {
        PayloadSelection {
            dummy: true,
            source_level: SourceSelection::Limit(usize::MAX),
            tuples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub corpus_root: PathBuf,
    pub registry_path: Option<PathBuf>,
    pub analyzers: Vec<AnalyzerUse>,
    pub payloads: PayloadSelection,
    pub processor: ProcessorConfig,
    pub validity: ValidityMode,
    pub compile_hook: CompileHook,
    pub parallelism: usize,
    /// Limit for compile-hook and external-processor runs.
    pub timeout: Duration,
    pub work_dir: PathBuf,
    pub resume: bool,
}

impl CampaignConfig {
    /// A config with defaults for everything but the corpus and analyzers.
    pub fn new(corpus_root: &Path, analyzers: Vec<AnalyzerUse>, work_dir: &Path) -> CampaignConfig {
        CampaignConfig {
            corpus_root: corpus_root.to_path_buf(),
            registry_path: None,
            analyzers,
            payloads: PayloadSelection::default(),
            processor: ProcessorConfig::default(),
            validity: ValidityMode::Compile,
            compile_hook: CompileHook {
                template: DEFAULT_COMPILE_HOOK.to_string(),
                classpath: String::new(),
            },
            parallelism: default_parallelism(),
            timeout: DEFAULT_TIMEOUT,
            work_dir: work_dir.to_path_buf(),
            resume: false,
        }
    }
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("i/o error reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn checkers(rec: &Record, list: &[String]) -> Result<BTreeSet<Checker>, FormatError> {
    list.iter().map(|c| c.parse().map_err(|e: String| rec.error(e))).collect()
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a campaign file; `base` anchors relative paths.
pub fn parse_config(text: &str, base: &Path) -> Result<CampaignConfig, ConfigError> {
    let fmt_err = |source| ConfigError::Format {
        path: "campaign config".into(),
        source,
    };
    let mut corpus = None;
    let mut registry_path = None;
    let mut profiles: Vec<AnalyzerProfile> = Vec::new();
    // (record, analyzer name, checkers, allowlist)
    #[allow(clippy::type_complexity)]
    let mut uses: Vec<(Record, String, Option<Vec<String>>, Vec<String>)> = Vec::new();
    let mut payloads = PayloadSelection::default();
    let mut processor = ProcessorConfig::default();
    let mut rules: Vec<ProcessingRule> = Vec::new();
    let mut validity = ValidityMode::Compile;
    let mut hook = CompileHook {
        template: DEFAULT_COMPILE_HOOK.to_string(),
        classpath: String::new(),
    };
    let mut parallelism = default_parallelism();
    let mut timeout = DEFAULT_TIMEOUT;
    let mut work_dir = base.join("work");
    let mut resume = false;

    let add_profile = |profiles: &mut Vec<AnalyzerProfile>, p: AnalyzerProfile, rec: &Record| {
        if profiles.iter().any(|o| o.name == p.name) {
            return Err(rec.error(format!("duplicate analyzer `{}`", p.name)));
        }
        profiles.push(p);
        Ok(())
    };

    for mut rec in textfmt::parse(text, "campaign").map_err(fmt_err)? {
        let r = &mut rec;
        let result: Result<(), FormatError> = (|| {
            match r.keyword.as_str() {
                "corpus" => {
                    r.no_positional()?;
                    corpus = Some(base.join(r.require("path")?));
                }
                "registry" => {
                    r.no_positional()?;
                    registry_path = Some(base.join(r.require("path")?));
                }
                "profiles" => {
                    r.no_positional()?;
                    let path = base.join(r.require("path")?);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| r.error(format!("cannot read {}: {e}", path.display())))?;
                    let dir = path.parent().unwrap_or(base);
                    let loaded = adapters::parse_profiles(&text, dir)
                        .map_err(|e| r.error(format!("{}: {e}", path.display())))?;
                    for p in loaded {
                        add_profile(&mut profiles, p, r)?;
                    }
                }
                "analyzer" => {
                    let p = adapters::parse_profile(r, base)?;
                    add_profile(&mut profiles, p, r)?;
                }
                "use" => {
                    let name = r.single_positional()?;
                    let chk = r.take_list("checkers");
                    let allow = r.take_list("allowlist").unwrap_or_default();
                    uses.push((r.clone(), name, chk, allow));
                }
                "payloads" => {
                    r.no_positional()?;
                    payloads.dummy = r.take_bool("dummy", true)?;
                    let named = r.take_list("source_level");
                    let limit = r.take_parsed::<usize>("source_limit")?;
                    payloads.source_level = match (named, limit) {
                        (Some(_), Some(_)) => return Err(r.error("give source_level or source_limit, not both")),
                        (Some(n), None) => SourceSelection::Named(n),
                        (None, Some(l)) => SourceSelection::Limit(l),
                        (None, None) => SourceSelection::Limit(usize::MAX),
                    };
                    payloads.tuples = r.take_list("tuples");
                }
                "processor" => {
                    r.no_positional()?;
                    processor.mode = match r.take("mode").as_deref() {
                        None | Some("builtin") => ProcessorMode::Builtin,
                        Some("external") => ProcessorMode::External,
                        Some(m) => return Err(r.error(format!("unknown processor mode `{m}`"))),
                    };
                    processor.external_template = r.take("template");
                }
                "rule" => {
                    let annotation = r.single_positional()?;
                    let transform = r.require("transform")?.parse().map_err(|e: String| r.error(e))?;
                    let description = r.take("description").unwrap_or_default();
                    rules.push(ProcessingRule {
                        annotation,
                        transform,
                        description,
                    });
                }
                "validity" => {
                    r.no_positional()?;
                    validity = match r.take("mode").as_deref() {
                        None | Some("compile") => ValidityMode::Compile,
                        Some("parse_only") => ValidityMode::ParseOnly,
                        Some(m) => return Err(r.error(format!("unknown validity mode `{m}`"))),
                    };
                    if let Some(t) = r.take("hook") {
                        hook.template = t;
                    }
                    if let Some(cp) = r.take("classpath") {
                        hook.classpath = cp;
                    }
                }
                "run" => {
                    r.no_positional()?;
                    if let Some(w) = r.take("work_dir") {
                        work_dir = base.join(w);
                    }
                    if let Some(p) = r.take_parsed::<usize>("parallelism")? {
                        if p == 0 {
                            return Err(r.error("parallelism must be at least 1"));
                        }
                        parallelism = p;
                    }
                    if let Some(t) = r.take_parsed::<u64>("timeout")? {
                        if t == 0 {
                            return Err(r.error("timeout must be positive"));
                        }
                        timeout = Duration::from_secs(t);
                    }
                    resume = r.take_bool("resume", false)?;
                }
                other => return Err(r.error(format!("unknown record `{other}`"))),
            }
            r.finish()
        })();
        result.map_err(fmt_err)?;
    }

    let corpus_root = corpus.ok_or_else(|| fmt_err(textfmt::error(0, "missing `corpus` record")))?;
    let mut analyzers = Vec::new();
    if uses.is_empty() {
        for p in profiles {
            analyzers.push(AnalyzerUse {
                checkers: p.checker_policy.clone(),
                profile: p,
                allowlist: BTreeSet::new(),
            });
        }
    } else {
        for (rec, name, chk, allow) in uses {
            let profile = profiles
                .iter()
                .find(|p| p.name == name)
                .cloned()
                .ok_or_else(|| fmt_err(rec.error(format!("unknown analyzer `{name}`"))))?;
            let checkers = match chk {
                Some(list) => checkers(&rec, &list).map_err(fmt_err)?,
                None => profile.checker_policy.clone(),
            };
            if let Some(c) = checkers.iter().find(|c| !profile.checker_policy.contains(c)) {
                return Err(fmt_err(rec.error(format!("checker {c} is disabled by the policy of `{name}`"))));
            }
            if analyzers.iter().any(|a: &AnalyzerUse| a.profile.name == name) {
                return Err(fmt_err(rec.error(format!("analyzer `{name}` used twice"))));
            }
            analyzers.push(AnalyzerUse {
                profile,
                checkers,
                allowlist: allow.into_iter().collect(),
            });
        }
    }
    if !rules.is_empty() {
        processor.builtin_rules = rules;
    }
    processor.timeout = timeout;
    if let Some(w) = std::env::var_os(WORK_DIR_ENV) {
        work_dir = PathBuf::from(w);
    }
    Ok(CampaignConfig {
        corpus_root,
        registry_path,
        analyzers,
        payloads,
        processor,
        validity,
        compile_hook: hook,
        parallelism,
        timeout,
        work_dir,
        resume,
    })
}

pub fn load_config(path: &Path) -> Result<CampaignConfig, ConfigError> {
    let text = read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).map_err(|e| match e {
        ConfigError::Format { source, .. } => ConfigError::Format {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "analyzer toy run=\"toy --src {src_dir} --report {report_path}\" report=toy checkers=ASC,EAC\n";

    #[test]
    fn full_config() {
        let text = format!(
            "format campaign version=1\ncorpus path=corpus\n{TOY}use toy checkers=ASC allowlist=a,b\n\
             payloads dummy=false source_level=lombok.Getter tuples=inject\n\
             validity mode=parse_only\nrun work_dir=w parallelism=2 timeout=30 resume=true\n"
        );
        let c = parse_config(&text, Path::new("/base")).unwrap();
        assert_eq!(c.corpus_root, Path::new("/base/corpus"));
        assert_eq!(c.analyzers[0].checkers, [Checker::Asc].into());
        assert_eq!(c.analyzers[0].allowlist.len(), 2);
        assert!(!c.payloads.dummy);
        assert_eq!(c.payloads.source_level, SourceSelection::Named(vec!["lombok.Getter".into()]));
        assert_eq!(c.validity, ValidityMode::ParseOnly);
        assert_eq!(c.parallelism, 2);
        assert!(c.resume);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = format!("format campaign version=1\ncorpus path=c\n{TOY}use toy checkers=ISC\n");
        let e = parse_config(&text, Path::new("/")).unwrap_err().to_string();
        assert!(e.contains("line 4") && e.contains("disabled"), "{e}");
        let e = parse_config("format campaign version=1\ncorpus path=c bogus=1\n", Path::new("/"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 2") && e.contains("bogus"), "{e}");
        assert!(parse_config("format campaign version=1\n", Path::new("/")).is_err());
    }
}
