//! End-to-end campaigns: seeds to mutants to analyzer runs to violations.
//!
//! Work directory layout:
//!
//! ```text
//! campaign.json            resolved config, used by replay
//! mutants.jsonl            one record per generated mutant, valid or not
//! outcomes.jsonl           one record per analyzer run
//! violations.jsonl         one record per violation
//! skips.jsonl              work that could not be done (never a violation)
//! summary.txt, summary.json
//! baselines/<seed>/src, mutants/<id>/src, processed/<id>/src
//! runs/<analyzer>/<kind>-<id>/
//! ```
//!
//! Work is done in chunks: a chunk runs in parallel, then its records are
//! appended in a fixed order by the calling thread, so ledgers are identical
//! across runs and a killed campaign loses at most one chunk.

pub mod config;
pub mod ledger;
pub mod summary;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adapters::{run_analyzer, AdapterError, AnalysisOutcome, AnalyzerProfile};
use crate::metamorph::{self, analysis_equivalent, Checker, Side, Violation};
use crate::mutagen::{self, Mutant, MutagenError, Payload, PayloadKind, ValidityMode};
use crate::processor::{self, ProcessorMode};
use crate::proc;
use crate::registry::{load_registry, Registry};
use crate::source::sites::enumerate_sites;
use crate::source::ProgramSet;

pub use config::{load_config, parse_config, AnalyzerUse, CampaignConfig, ConfigError, PayloadSelection, SourceSelection};
use ledger::{Ledger, LedgerError, OutcomeRecord, ProgramKey, SkipRecord, SkipStage};
pub use summary::{CampaignSummary, Row};

const CHUNK: usize = 32;
const CONFIG_SNAPSHOT: &str = "campaign.json";

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    ConfigFile(#[from] ConfigError),
    #[error(transparent)]
    Mutagen(#[from] MutagenError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One seed per top-level `.java` file and one per top-level directory.
/// Unit paths stay relative to the corpus root.
pub fn load_seeds(corpus_root: &Path) -> std::io::Result<Vec<ProgramSet>> {
    let mut entries: Vec<_> = std::fs::read_dir(corpus_root)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    let mut seeds = Vec::new();
    for e in entries {
        let path = e.path();
        let name = e.file_name().to_string_lossy().into_owned();
        if path.is_dir() {
            let inner = ProgramSet::load(&name, &path)?;
            let mut ps = ProgramSet::new(&name, corpus_root);
            for mut u in inner.units {
                u.path = format!("{name}/{}", u.path);
                ps.put_unit(u);
            }
            for mut a in inner.aux_files {
                a.path = format!("{name}/{}", a.path);
                ps.aux_files.push(a);
            }
            if !ps.units.is_empty() {
                seeds.push(ps);
            }
        } else if let Some(stem) = name.strip_suffix(".java") {
            let mut ps = ProgramSet::load_file(stem, &path)?;
            ps.root = corpus_root.to_path_buf();
            seeds.push(ps);
        }
    }
    Ok(seeds)
}

/// Hash of a program's files, used to decide whether a ledgered outcome still applies.
pub fn program_digest(ps: &ProgramSet) -> String {
    let mut h = Sha256::new();
    for u in &ps.units {
        h.update(u.path.as_bytes());
        h.update([0]);
        h.update(u.text.as_bytes());
        h.update([0]);
    }
    for a in &ps.aux_files {
        h.update(a.path.as_bytes());
        h.update([0]);
        h.update(&a.bytes);
        h.update([0]);
    }
    hex::encode(&h.finalize()[..8])
}

fn uses_checker(cfg: &CampaignConfig, c: Checker) -> bool {
    cfg.analyzers.is_empty() || cfg.analyzers.iter().any(|a| a.checkers.contains(&c))
}

fn load_reg(cfg: &CampaignConfig) -> Result<Registry, CampaignError> {
    match &cfg.registry_path {
        None => Ok(Registry::curated()),
        Some(p) => load_registry(p).map_err(|e| CampaignError::Config(format!("{}: {e}", p.display()))),
    }
}

struct Payloads {
    singles: Vec<Payload>,
    tuples: Vec<(String, Vec<Payload>)>,
}

fn select_payloads(cfg: &CampaignConfig, reg: &Registry) -> Result<Payloads, CampaignError> {
    let mut singles = Vec::new();
    if cfg.payloads.dummy && uses_checker(cfg, Checker::Asc) {
        singles.push(mutagen::gen_dummy());
    }
    if uses_checker(cfg, Checker::Isc) {
        singles.extend(match &cfg.payloads.source_level {
            SourceSelection::Named(names) => mutagen::gen_source_named(reg, names)?,
            SourceSelection::Limit(n) => mutagen::gen_source_level(reg, *n),
        });
    }
    let mut tuples = Vec::new();
    if uses_checker(cfg, Checker::Eac) {
        tuples = mutagen::gen_equiv(reg, cfg.payloads.tuples.as_deref())?;
    }
    Ok(Payloads { singles, tuples })
}

fn check_launch(cfg: &CampaignConfig, payloads: &Payloads) -> Result<(), CampaignError> {
    if !cfg.corpus_root.is_dir() {
        return Err(CampaignError::Config(format!("corpus {} is not a directory", cfg.corpus_root.display())));
    }
    if cfg.parallelism == 0 {
        return Err(CampaignError::Config("parallelism must be at least 1".into()));
    }
    let mut names = HashSet::new();
    for a in &cfg.analyzers {
        if !names.insert(&a.profile.name) {
            return Err(CampaignError::Config(format!("analyzer {} listed twice", a.profile.name)));
        }
        a.profile.validate().map_err(CampaignError::Config)?;
        if let Some(c) = a.checkers.iter().find(|c| !a.profile.checker_policy.contains(c)) {
            return Err(CampaignError::Config(format!("checker {c} is disabled for {}", a.profile.name)));
        }
        check_program_exists(&a.profile.run_template, &a.profile.name)?;
    }
    if cfg.validity == ValidityMode::Compile {
        check_program_exists(&cfg.compile_hook.template, "compile hook")?;
    }
    if uses_checker(cfg, Checker::Isc) && !cfg.analyzers.is_empty() {
        let names: Vec<String> = payloads
            .singles
            .iter()
            .filter(|p| p.kind == PayloadKind::SourceLevel)
            .map(|p| p.spec.fq_name.clone())
            .collect();
        cfg.processor.validate(&names).map_err(|e| CampaignError::Config(e.to_string()))?;
        if cfg.processor.mode == ProcessorMode::External {
            check_program_exists(cfg.processor.external_template.as_deref().unwrap_or_default(), "processor")?;
        }
    }
    Ok(())
}

fn check_program_exists(template: &str, what: &str) -> Result<(), CampaignError> {
    let mut vars = BTreeMap::new();
    vars.insert("bin_dir", proc::bin_dir());
    let argv = proc::expand(template, &vars).map_err(|e| CampaignError::Config(format!("{what}: {e}")))?;
    match argv.first() {
        Some(p) if proc::resolvable(p) => Ok(()),
        Some(p) => Err(CampaignError::Config(format!("{what}: `{p}` is not an executable file"))),
        None => Err(CampaignError::Config(format!("{what}: empty command"))),
    }
}

/// Every mutant for every seed and payload, in a fixed order.
fn generate(seeds: &[ProgramSet], payloads: &Payloads) -> Result<Vec<Mutant>, CampaignError> {
    let mut out = Vec::new();
    for seed in seeds {
        for p in &payloads.singles {
            let sites: Vec<_> = seed.units.iter().flat_map(|u| enumerate_sites(u, &p.spec.targets)).collect();
            out.extend(mutagen::inject(seed, p, &sites)?);
        }
        for (_, group) in &payloads.tuples {
            let kinds = mutagen::shared_targets(group);
            let sites: Vec<_> = seed.units.iter().flat_map(|u| enumerate_sites(u, &kinds)).collect();
            for p in group {
                out.extend(mutagen::inject(seed, p, &sites)?);
            }
        }
    }
    Ok(out)
}

/// Analyzers report canonical paths, so masking needs a canonical work directory.
fn with_canonical_work_dir(cfg: &CampaignConfig) -> Result<CampaignConfig, CampaignError> {
    std::fs::create_dir_all(&cfg.work_dir)?;
    let mut out = cfg.clone();
    out.work_dir = cfg.work_dir.canonicalize()?;
    Ok(out)
}

fn pool(cfg: &CampaignConfig) -> Result<rayon::ThreadPool, CampaignError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| CampaignError::Config(format!("thread pool: {e}")))
}

fn reset_work_dir(work: &Path) -> std::io::Result<()> {
    for f in [ledger::MUTANTS, ledger::OUTCOMES, ledger::VIOLATIONS, ledger::SKIPS, "summary.txt", "summary.json", CONFIG_SNAPSHOT] {
        let p = work.join(f);
        if p.exists() {
            std::fs::remove_file(p)?;
        }
    }
    for d in ["baselines", "mutants", "processed", "runs", "compiled", "replay"] {
        let p = work.join(d);
        if p.exists() {
            std::fs::remove_dir_all(p)?;
        }
    }
    Ok(())
}

/// Generates mutants and applies the validity filter, ledgering each exactly once.
fn mutants_stage(
    cfg: &CampaignConfig,
    pool: &rayon::ThreadPool,
    seeds: &[ProgramSet],
    payloads: &Payloads,
) -> Result<Vec<Mutant>, CampaignError> {
    let mut mutants = generate(seeds, payloads)?;
    let path = cfg.work_dir.join(ledger::MUTANTS);
    let known: HashMap<String, Mutant> = ledger::read::<Mutant>(&path)?
        .into_iter()
        .map(|m| (m.mutant_id.clone(), m))
        .collect();
    let mut led = Ledger::open(&path)?;
    let hook = Some(&cfg.compile_hook);
    for chunk in mutants.chunks_mut(CHUNK) {
        let results: Vec<Result<bool, MutagenError>> = pool.install(|| {
            chunk
                .par_iter_mut()
                .map(|m| {
                    if let Some(k) = known.get(&m.mutant_id) {
                        m.valid = k.valid;
                        m.parse_valid = k.parse_valid;
                        m.compile_valid = k.compile_valid;
                        m.invalidity_reason = k.invalidity_reason.clone();
                        return Ok(false);
                    }
                    mutagen::validity_filter(m, cfg.validity, hook, &cfg.work_dir, cfg.timeout)?;
                    Ok(true)
                })
                .collect()
        });
        for (m, fresh) in chunk.iter().zip(results) {
            if fresh? {
                led.append(m)?;
            }
        }
    }
    Ok(mutants)
}

/// Mutants generated and validated without running any analyzer.
pub fn mutate(cfg: &CampaignConfig) -> Result<Vec<Mutant>, CampaignError> {
    let reg = load_reg(cfg)?;
    let payloads = select_payloads(cfg, &reg)?;
    if !cfg.corpus_root.is_dir() {
        return Err(CampaignError::Config(format!("corpus {} is not a directory", cfg.corpus_root.display())));
    }
    if cfg.validity == ValidityMode::Compile {
        check_program_exists(&cfg.compile_hook.template, "compile hook")?;
    }
    let cfg = &with_canonical_work_dir(cfg)?;
    if !cfg.resume {
        reset_work_dir(&cfg.work_dir)?;
    }
    let seeds = load_seeds(&cfg.corpus_root)?;
    mutants_stage(cfg, &pool(cfg)?, &seeds, &payloads)
}

struct SkipLog {
    ledger: Ledger,
    seen: HashSet<(String, String, Option<String>)>,
    count: usize,
}

impl SkipLog {
    fn open(work: &Path) -> Result<SkipLog, CampaignError> {
        let path = work.join(ledger::SKIPS);
        let seen = ledger::read::<SkipRecord>(&path)?
            .into_iter()
            .map(|s| (format!("{:?}", s.stage), s.subject, s.analyzer))
            .collect();
        Ok(SkipLog {
            ledger: Ledger::open(&path)?,
            seen,
            count: 0,
        })
    }

    fn record(&mut self, stage: SkipStage, subject: String, analyzer: Option<&str>, message: String) -> Result<(), CampaignError> {
        warn!("skipped {subject}: {message}");
        self.count += 1;
        let key = (format!("{stage:?}"), subject.clone(), analyzer.map(String::from));
        if self.seen.insert(key) {
            self.ledger.append(&SkipRecord {
                stage,
                subject,
                analyzer: analyzer.map(String::from),
                message,
            })?;
        }
        Ok(())
    }
}

fn relative(path: &str, work: &Path) -> String {
    Path::new(path)
        .strip_prefix(work)
        .map(|p| p.display().to_string())
        .unwrap_or_else(|_| path.to_string())
}

fn analyze_one(
    profile: &AnalyzerProfile,
    cfg: &CampaignConfig,
    key: &ProgramKey,
) -> Result<AnalysisOutcome, AdapterError> {
    let work = &cfg.work_dir;
    let src = work.join(key.src_dir());
    let run_dir = work.join(key.run_dir(&profile.name));
    let mut vars = BTreeMap::new();
    if profile.requires_compilation {
        let scratch = work.join("compiled").join(&profile.name).join(key.label().replace(':', "-"));
        let v = mutagen::compile_validity(&src, &cfg.compile_hook, &scratch, cfg.timeout)
            .map_err(|e| AdapterError::Config(format!("compile hook: {e}")))?;
        if !v.valid {
            return Err(AdapterError::Config(format!(
                "program does not compile: {}",
                v.reason.unwrap_or_default()
            )));
        }
        vars.insert("classes_dir", scratch.join("classes").display().to_string());
    }
    let mut o = run_analyzer(profile, &src, &run_dir, &vars)?;
    o.raw_artifacts = o.raw_artifacts.iter().map(|p| relative(p, work)).collect();
    Ok(o)
}

type OutcomeMap = HashMap<(String, ProgramKey), AnalysisOutcome>;

/// Runs every task whose outcome is not already ledgered for this profile and program.
fn outcomes_stage(
    cfg: &CampaignConfig,
    pool: &rayon::ThreadPool,
    tasks: &[(usize, ProgramKey)],
    digests: &HashMap<ProgramKey, String>,
    skips: &mut SkipLog,
) -> Result<OutcomeMap, CampaignError> {
    let path = cfg.work_dir.join(ledger::OUTCOMES);
    let mut known: HashMap<(String, String, ProgramKey), OutcomeRecord> = HashMap::new();
    for r in ledger::read::<OutcomeRecord>(&path)? {
        known.insert((r.analyzer.clone(), r.profile.clone(), r.program.clone()), r);
    }
    let mut out = OutcomeMap::new();
    let mut pending = Vec::new();
    for (ai, key) in tasks {
        let p = &cfg.analyzers[*ai].profile;
        let digest = &digests[key];
        match known.get(&(p.name.clone(), p.fingerprint(), key.clone())) {
            Some(r) if &r.digest == digest => {
                out.insert((p.name.clone(), key.clone()), r.outcome.clone());
            }
            _ => pending.push((*ai, key.clone())),
        }
    }
    info!("{} analyzer runs ({} reused from the ledger)", pending.len(), tasks.len() - pending.len());
    let mut led = Ledger::open(&path)?;
    for chunk in pending.chunks(CHUNK) {
        let results: Vec<_> = pool.install(|| {
            chunk
                .par_iter()
                .map(|(ai, key)| analyze_one(&cfg.analyzers[*ai].profile, cfg, key))
                .collect()
        });
        for ((ai, key), r) in chunk.iter().zip(results) {
            let p = &cfg.analyzers[*ai].profile;
            match r {
                Ok(outcome) => {
                    led.append(&OutcomeRecord {
                        analyzer: p.name.clone(),
                        profile: p.fingerprint(),
                        program: key.clone(),
                        digest: digests[key].clone(),
                        outcome: outcome.clone(),
                    })?;
                    out.insert((p.name.clone(), key.clone()), outcome);
                }
                Err(AdapterError::Io(e)) => return Err(CampaignError::Io(e)),
                Err(e) => skips.record(SkipStage::Analysis, key.label(), Some(&p.name), e.to_string())?,
            }
        }
    }
    Ok(out)
}

fn side<'a>(key: &'a ProgramKey, label: &'a str, outcome: &'a AnalysisOutcome) -> Side<'a> {
    let mut witness = vec![key.src_dir()];
    witness.extend(outcome.raw_artifacts.iter().cloned());
    Side {
        id: label,
        outcome,
        witness,
    }
}

type GroupKey = (String, String, String, usize, String, String);

fn group_key(m: &Mutant) -> Option<GroupKey> {
    Some((
        m.tuple_id.clone()?,
        m.seed_id.clone(),
        m.site.path.clone(),
        m.site.anchor,
        m.site.kind.name().to_string(),
        m.site.subkind_name().to_string(),
    ))
}

/// Runs the full pipeline and writes ledgers and summary into the work directory.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignSummary, CampaignError> {
    let reg = load_reg(cfg)?;
    let payloads = select_payloads(cfg, &reg)?;
    check_launch(cfg, &payloads)?;
    let cfg = &with_canonical_work_dir(cfg)?;
    let work = &cfg.work_dir;
    if !cfg.resume {
        reset_work_dir(work)?;
    }
    std::fs::write(
        work.join(CONFIG_SNAPSHOT),
        serde_json::to_string_pretty(cfg).expect("config serializes"),
    )?;
    let pool = pool(cfg)?;
    let seeds = load_seeds(&cfg.corpus_root)?;
    info!("{} seeds from {}", seeds.len(), cfg.corpus_root.display());
    let mut mutants = mutants_stage(cfg, &pool, &seeds, &payloads)?;
    info!(
        "{} mutants, {} valid",
        mutants.len(),
        mutants.iter().filter(|m| m.valid).count()
    );
    let mut skips = SkipLog::open(work)?;

    let any = |c: Checker| cfg.analyzers.iter().any(|a| a.checkers.contains(&c));
    let mut digests: HashMap<ProgramKey, String> = HashMap::new();

    // Materialize everything that will be analyzed.
    let seed_index: HashMap<&str, &ProgramSet> = seeds.iter().map(|s| (s.id.as_str(), s)).collect();
    let asc_seeds: BTreeSet<String> = mutants
        .iter()
        .filter(|m| m.valid && m.payload_kind == PayloadKind::Dummy)
        .map(|m| m.seed_id.clone())
        .collect();
    if any(Checker::Asc) {
        for s in &asc_seeds {
            let mut ps = seed_index[s.as_str()].clone();
            let key = ProgramKey::Baseline(s.clone());
            let dir = work.join(key.src_dir());
            if dir.exists() {
                std::fs::remove_dir_all(&dir)?;
            }
            ps.materialize(&dir)?;
            digests.insert(key, program_digest(&ps));
        }
    }
    let materialize = |m: &mut Mutant| -> Result<(), CampaignError> {
        let dir = work.join(&m.materialized_dir);
        if !dir.is_dir() {
            mutagen::materialize(m, work)?;
        }
        Ok(())
    };
    for m in mutants.iter_mut().filter(|m| m.valid) {
        let needed = match m.payload_kind {
            PayloadKind::Dummy => any(Checker::Asc),
            PayloadKind::SourceLevel => any(Checker::Isc),
            PayloadKind::EquivMember => any(Checker::Eac),
        };
        if needed {
            materialize(m)?;
            let ps = m.materialized.as_ref().expect("generated mutants carry their program");
            digests.insert(ProgramKey::Mutant(m.mutant_id.clone()), program_digest(ps));
        }
    }

    // Processing for MR1.
    let mut processed_ok: HashSet<String> = HashSet::new();
    if any(Checker::Isc) {
        let todo: Vec<&Mutant> = mutants
            .iter()
            .filter(|m| m.valid && m.payload_kind == PayloadKind::SourceLevel)
            .collect();
        let results: Vec<_> = pool.install(|| {
            todo.par_iter()
                .map(|m| {
                    let base = work.join("processed").join(&m.mutant_id);
                    let scratch = base.join("scratch");
                    let ps = m.materialized.as_ref().expect("generated mutants carry their program");
                    let mut out = processor::process(ps, &cfg.processor, &scratch)?;
                    let dir = work.join(ProgramKey::Processed(m.mutant_id.clone()).src_dir());
                    if dir.exists() {
                        std::fs::remove_dir_all(&dir)?;
                    }
                    out.materialize(&dir)?;
                    Ok::<_, processor::ProcessError>(program_digest(&out))
                })
                .collect()
        });
        for (m, r) in todo.iter().zip(results) {
            match r {
                Ok(d) => {
                    processed_ok.insert(m.mutant_id.clone());
                    digests.insert(ProgramKey::Processed(m.mutant_id.clone()), d);
                }
                Err(e) => skips.record(SkipStage::Processing, format!("mutant:{}", m.mutant_id), None, e.to_string())?,
            }
        }
    }

    // EAC groups in generation order.
    let mut groups: Vec<(GroupKey, Vec<usize>)> = Vec::new();
    let mut group_pos: HashMap<GroupKey, usize> = HashMap::new();
    for (i, m) in mutants.iter().enumerate() {
        if let Some(k) = group_key(m) {
            let pos = *group_pos.entry(k.clone()).or_insert_with(|| {
                groups.push((k, Vec::new()));
                groups.len() - 1
            });
            groups[pos].1.push(i);
        }
    }

    // Analyzer run tasks.
    let mut tasks: Vec<(usize, ProgramKey)> = Vec::new();
    for (ai, a) in cfg.analyzers.iter().enumerate() {
        if a.checkers.contains(&Checker::Asc) {
            tasks.extend(asc_seeds.iter().map(|s| (ai, ProgramKey::Baseline(s.clone()))));
            tasks.extend(
                mutants
                    .iter()
                    .filter(|m| m.valid && m.payload_kind == PayloadKind::Dummy)
                    .map(|m| (ai, ProgramKey::Mutant(m.mutant_id.clone()))),
            );
        }
        if a.checkers.contains(&Checker::Isc) {
            for m in mutants.iter().filter(|m| processed_ok.contains(&m.mutant_id)) {
                tasks.push((ai, ProgramKey::Mutant(m.mutant_id.clone())));
                tasks.push((ai, ProgramKey::Processed(m.mutant_id.clone())));
            }
        }
        if a.checkers.contains(&Checker::Eac) {
            for (_, members) in &groups {
                let valid: Vec<&Mutant> = members.iter().map(|i| &mutants[*i]).filter(|m| m.valid).collect();
                if valid.len() >= 2 {
                    tasks.extend(valid.iter().map(|m| (ai, ProgramKey::Mutant(m.mutant_id.clone()))));
                }
            }
        }
    }
    let outcomes = outcomes_stage(cfg, &pool, &tasks, &digests, &mut skips)?;

    // Checking.
    let mut summary = CampaignSummary::default();
    let mut violations: Vec<Violation> = Vec::new();
    let empty = BTreeSet::new();
    for a in &cfg.analyzers {
        let p = &a.profile;
        let get = |k: &ProgramKey| outcomes.get(&(p.name.clone(), k.clone()));
        for checker in Checker::ALL.into_iter().filter(|c| a.checkers.contains(c)) {
            let kind = match checker {
                Checker::Isc => PayloadKind::SourceLevel,
                Checker::Asc => PayloadKind::Dummy,
                Checker::Eac => PayloadKind::EquivMember,
            };
            let mut row = Row {
                analyzer: p.name.clone(),
                checker: Some(checker),
                generated: mutants.iter().filter(|m| m.payload_kind == kind).count(),
                valid: mutants.iter().filter(|m| m.payload_kind == kind && m.valid).count(),
                ..Row::default()
            };
            let before = violations.len();
            match checker {
                Checker::Asc => {
                    for m in mutants.iter().filter(|m| m.valid && m.payload_kind == kind) {
                        let bk = ProgramKey::Baseline(m.seed_id.clone());
                        let mk = ProgramKey::Mutant(m.mutant_id.clone());
                        let (Some(bo), Some(mo)) = (get(&bk), get(&mk)) else { continue };
                        let (bl, ml) = (bk.label(), mk.label());
                        let support: BTreeSet<String> = m.support_files.iter().cloned().collect();
                        row.analyzed += 1;
                        row.add_time(bo.duration_secs);
                        row.add_time(mo.duration_secs);
                        let v = metamorph::check_asc(p, &side(&bk, &bl, bo), &side(&mk, &ml, mo), &support, &empty)
                            .map_err(|e| CampaignError::Config(e.to_string()))?;
                        violations.extend(v);
                    }
                }
                Checker::Isc => {
                    for m in mutants.iter().filter(|m| processed_ok.contains(&m.mutant_id)) {
                        let mk = ProgramKey::Mutant(m.mutant_id.clone());
                        let pk = ProgramKey::Processed(m.mutant_id.clone());
                        let (Some(mo), Some(po)) = (get(&mk), get(&pk)) else { continue };
                        let (ml, pl) = (mk.label(), pk.label());
                        row.analyzed += 1;
                        row.add_time(mo.duration_secs);
                        row.add_time(po.duration_secs);
                        let v = metamorph::check_isc(p, &side(&mk, &ml, mo), &side(&pk, &pl, po), &a.allowlist)
                            .map_err(|e| CampaignError::Config(e.to_string()))?;
                        violations.extend(v);
                    }
                }
                Checker::Eac => {
                    for (gk, members) in &groups {
                        let keys: Vec<(ProgramKey, String)> = members
                            .iter()
                            .map(|i| &mutants[*i])
                            .filter(|m| m.valid)
                            .map(|m| {
                                let k = ProgramKey::Mutant(m.mutant_id.clone());
                                let l = k.label();
                                (k, l)
                            })
                            .collect();
                        let sides: Vec<Side> = keys
                            .iter()
                            .filter_map(|(k, l)| get(k).map(|o| side(k, l, o)))
                            .collect();
                        if sides.len() < 2 {
                            if members.len() >= 2 && keys.len() >= 2 {
                                let subject = format!("{}@{}:{}", gk.0, gk.2, gk.3);
                                skips.record(SkipStage::Grouping, subject, Some(&p.name), "fewer than two analyzed members".into())?;
                            }
                            continue;
                        }
                        row.analyzed += sides.len();
                        for s in &sides {
                            row.add_time(s.outcome.duration_secs);
                        }
                        let v = metamorph::check_eac(p, &sides, &empty).map_err(|e| CampaignError::Config(e.to_string()))?;
                        violations.extend(v);
                    }
                }
            }
            let mine = &violations[before..];
            row.violations = mine.len();
            row.clusters = metamorph::dedup(mine).len();
            summary.rows.push(row);
        }
    }

    let vpath = work.join(ledger::VIOLATIONS);
    let ledgered: HashSet<String> = ledger::read::<Violation>(&vpath)?
        .into_iter()
        .map(|v| v.violation_id)
        .collect();
    let mut vled = Ledger::open(&vpath)?;
    for v in violations.iter().filter(|v| !ledgered.contains(&v.violation_id)) {
        vled.append(v)?;
    }

    summary.generated = mutants.len();
    summary.valid = mutants.iter().filter(|m| m.valid).count();
    summary.invalid = summary.generated - summary.valid;
    summary.discard_rate = if summary.generated == 0 {
        0.0
    } else {
        summary.invalid as f64 / summary.generated as f64
    };
    for m in mutants.iter().filter(|m| !m.valid) {
        let reason = m.invalidity_reason.clone().unwrap_or_else(|| "unknown".into());
        *summary.invalid_reasons.entry(reason).or_insert(0) += 1;
    }
    summary.skipped = skips.count;
    summary.violations = violations.len();
    summary.clusters = metamorph::dedup(&violations);
    std::fs::write(work.join("summary.txt"), summary.to_text())?;
    std::fs::write(
        work.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(summary)
}

/// Ledger contents with run-to-run noise (durations) removed, for comparing campaigns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalLedgers {
    pub mutants: Vec<serde_json::Value>,
    pub outcomes: Vec<serde_json::Value>,
    pub violations: Vec<serde_json::Value>,
    pub skips: Vec<serde_json::Value>,
}

pub fn canonical_ledgers(work: &Path) -> Result<CanonicalLedgers, CampaignError> {
    let load = |name: &str, strip: &[&str]| -> Result<Vec<serde_json::Value>, CampaignError> {
        let mut v: Vec<serde_json::Value> = ledger::read(&work.join(name))?;
        for rec in v.iter_mut() {
            for pointer in strip {
                let (parent, key) = pointer.rsplit_once('/').unwrap_or(("", pointer));
                if let Some(obj) = rec.pointer_mut(parent).and_then(|p| p.as_object_mut()) {
                    obj.remove(key);
                }
            }
        }
        v.sort_by_key(|r| r.to_string());
        Ok(v)
    };
    Ok(CanonicalLedgers {
        mutants: load(ledger::MUTANTS, &[])?,
        outcomes: load(ledger::OUTCOMES, &["/outcome/duration_secs"])?,
        violations: load(ledger::VIOLATIONS, &[])?,
        skips: load(ledger::SKIPS, &[])?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub violation: Violation,
    pub verdict: metamorph::EquivalenceVerdict,
    /// Same equivalence, termination classes and finding diff as ledgered.
    pub reproduced: bool,
}

/// Finds a ledgered violation by id or unique id prefix.
pub fn find_violation(work: &Path, id: &str) -> Result<Violation, CampaignError> {
    let all: Vec<Violation> = ledger::read(&work.join(ledger::VIOLATIONS))?;
    let hits: Vec<Violation> = all.into_iter().filter(|v| v.violation_id.starts_with(id)).collect();
    match hits.len() {
        1 => Ok(hits.into_iter().next().expect("one hit")),
        0 => Err(CampaignError::Config(format!("no violation `{id}` in {}", work.display()))),
        n => Err(CampaignError::Config(format!("`{id}` matches {n} violations"))),
    }
}

/// Re-runs both sides of a violation from its witness programs.
pub fn replay(work: &Path, violation_id: &str) -> Result<Replay, CampaignError> {
    let work = &work.canonicalize()?;
    let snapshot = std::fs::read_to_string(work.join(CONFIG_SNAPSHOT))?;
    let cfg: CampaignConfig =
        serde_json::from_str(&snapshot).map_err(|e| CampaignError::Config(format!("{CONFIG_SNAPSHOT}: {e}")))?;
    let v = find_violation(work, violation_id)?;
    let a = cfg
        .analyzers
        .iter()
        .find(|a| a.profile.name == v.analyzer)
        .ok_or_else(|| CampaignError::Config(format!("analyzer {} not in campaign config", v.analyzer)))?;
    let mut outcomes = Vec::new();
    for (tag, label) in [("left", &v.left), ("right", &v.right)] {
        let key = ProgramKey::parse(label).ok_or_else(|| CampaignError::Config(format!("bad program label {label}")))?;
        let src = work.join(key.src_dir());
        let run_dir = work.join("replay").join(&v.violation_id).join(tag);
        let o = run_analyzer(&a.profile, &src, &run_dir, &BTreeMap::new())
            .map_err(|e| CampaignError::Config(format!("{label}: {e}")))?;
        outcomes.push(o);
    }
    let mut exclude = BTreeSet::new();
    let allowlist = if v.checker == Checker::Isc { a.allowlist.clone() } else { BTreeSet::new() };
    if v.checker == Checker::Asc {
        if let Some(ProgramKey::Mutant(id)) = ProgramKey::parse(&v.right) {
            let mutants: Vec<Mutant> = ledger::read(&work.join(ledger::MUTANTS))?;
            if let Some(m) = mutants.iter().find(|m| m.mutant_id == id) {
                exclude.extend(m.support_files.iter().cloned());
            }
        }
    }
    let strip = |o: &AnalysisOutcome| AnalysisOutcome {
        findings: o.findings.iter().filter(|f| !exclude.contains(&f.path)).cloned().collect(),
        ..o.clone()
    };
    let verdict = analysis_equivalent(&strip(&outcomes[0]), &strip(&outcomes[1]), &allowlist);
    let old = &v.verdict;
    let reproduced = verdict.equivalent == old.equivalent
        && verdict.left_termination == old.left_termination
        && verdict.right_termination == old.right_termination
        && verdict.only_in_left == old.only_in_left
        && verdict.only_in_right == old.only_in_right;
    Ok(Replay {
        violation: v,
        verdict,
        reproduced,
    })
}

/// Work directory from `ANNAFORGE_WORK_DIR`, else `fallback`.
pub fn work_dir_or(fallback: &Path) -> PathBuf {
    std::env::var_os(config::WORK_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| fallback.to_path_buf())
}
