//! Commands binding ingestion, profiling, curation, storage and
//! analytics into one batch flow. Each command writes into a
//! `run-<id>` directory and prints a short summary.

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use lodlog::analytics::{extract_md_pattern, group_patterns, md_report, md_summary, MDPattern, MdSummary};
use lodlog::curation::{
    run_pipeline, ConfigError, CuratedQuery, CurationContext, CurationError, PipelineConfig, PipelineRun,
};
use lodlog::ingest::{extract_queries, parse_log_file, ExtractStats, FileError, IngestError, LogFormat};
use lodlog::labels::{Analyzer, Label, QueryType};
use lodlog::profiling::{
    log_overlap, profile, DirectoryError, LexiconError, LogSummary, Overlap, ProfileReport, ProvenanceDirectory,
    ReportError, TopicLexicon,
};
use lodlog::sparql::{parse_query, Vocabulary, VocabularyError};
use lodlog::store::{self, ExportFormat, RunStore, StoreError, StoredQueryRecord, PROFILE_REPORT, TRUSTED, UNTRUSTED};
use lodlog::trust::{format_degree, partition, trust_statistics, Degree, PolicyError, TrustError, TrustPolicy};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input file {0} does not exist")]
    MissingInput(PathBuf),
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Directory(#[from] DirectoryError),
    #[error(transparent)]
    Pipeline(#[from] ConfigError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl From<CurationError> for CliError {
    fn from(e: CurationError) -> Self {
        match e {
            CurationError::Config(c) => CliError::Pipeline(c),
            CurationError::Store(s) => CliError::Store(s),
        }
    }
}

/// Inputs and lookup files of one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub format: LogFormat,
    pub vocab: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub provenance: Option<PathBuf>,
    pub pipeline: Option<PathBuf>,
    pub policy: Option<PathBuf>,
    pub out: PathBuf,
    pub run_id: Option<String>,
    pub csv: bool,
}

impl RunConfig {
    pub fn new(inputs: Vec<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            inputs,
            format: LogFormat::Clf,
            vocab: None,
            topics: None,
            provenance: None,
            pipeline: None,
            policy: None,
            out: out.into(),
            run_id: None,
            csv: false,
        }
    }

    /// Fails before anything is written if a referenced file is missing.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.inputs.is_empty() {
            return Err(CliError::Usage("at least one --input is required".into()));
        }
        let optional = [
            &self.vocab,
            &self.topics,
            &self.provenance,
            &self.pipeline,
            &self.policy,
        ];
        for p in self.inputs.iter().chain(optional.into_iter().flatten()) {
            if !p.is_file() {
                return Err(CliError::MissingInput(p.clone()));
            }
        }
        Ok(())
    }

    pub fn context(&self) -> Result<CurationContext, CliError> {
        Ok(CurationContext {
            vocabulary: self.vocab.as_deref().map(Vocabulary::load).transpose()?,
            lexicon: match &self.topics {
                Some(p) => TopicLexicon::load(p)?,
                None => TopicLexicon::default(),
            },
            directory: match &self.provenance {
                Some(p) => ProvenanceDirectory::load(p)?,
                None => ProvenanceDirectory::default(),
            },
        })
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig, CliError> {
        Ok(match &self.pipeline {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        })
    }

    pub fn trust_policy(&self) -> Result<TrustPolicy, CliError> {
        Ok(match &self.policy {
            Some(p) => TrustPolicy::load(p)?,
            None => TrustPolicy::default(),
        })
    }

    fn store(&self) -> Result<RunStore, CliError> {
        let id = self
            .run_id
            .clone()
            .unwrap_or_else(|| chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string());
        Ok(RunStore::create(&self.out, &id)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub lines: usize,
    pub records: usize,
    pub errors: usize,
    pub extract: ExtractStats,
}

impl IngestSummary {
    pub fn to_text(&self) -> String {
        let e = &self.extract;
        format!(
            "lines {}\nrecords {}\nerrors {}\nselect {}\nconstruct {}\nask {}\ndescribe {}\nupdate {}\nnon_sparql {}\nno_query {}\nkept {}\n",
            self.lines,
            self.records,
            self.errors,
            e.select,
            e.construct,
            e.ask,
            e.describe,
            e.update,
            e.non_sparql,
            e.no_query,
            e.kept()
        )
    }
}

/// Parsed and extracted contents of all inputs, in input order.
pub struct Ingested {
    pub summary: IngestSummary,
    pub queries: Vec<CuratedQuery>,
    /// Per-line failures with the file they came from.
    pub errors: Vec<(PathBuf, IngestError)>,
}

pub fn ingest(inputs: &[PathBuf], format: LogFormat) -> Result<Ingested, CliError> {
    let mut summary = IngestSummary::default();
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for path in inputs {
        for item in parse_log_file(path, format)? {
            summary.lines += 1;
            match item {
                Ok(r) => records.push(r),
                Err(e) => errors.push((path.clone(), e)),
            }
        }
    }
    summary.records = records.len();
    summary.errors = errors.len();
    let (extracted, stats) = extract_queries(records);
    summary.extract = stats;
    Ok(Ingested {
        summary,
        queries: extracted.iter().map(CuratedQuery::from_extracted).collect(),
        errors,
    })
}

fn warn_line_errors(errors: &[(PathBuf, IngestError)], err: &mut dyn Write) -> Result<(), CliError> {
    for (path, e) in errors {
        writeln!(err, "warning: {}: {e}", path.display())?;
    }
    Ok(())
}

pub const INGEST_SNAPSHOT: &str = "ingest";
pub const INGEST_SUMMARY: &str = "ingest.summary";
pub const PIPELINE_SUMMARY: &str = "pipeline.run";
pub const MD_REPORT: &str = "md.report";
pub const MD_SUMMARY: &str = "md.summary";

pub fn cmd_ingest(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<PathBuf, CliError> {
    cfg.validate()?;
    let ing = ingest(&cfg.inputs, cfg.format)?;
    warn_line_errors(&ing.errors, err)?;
    let store = cfg.store()?;
    let records: Vec<_> = ing.queries.iter().map(|q| q.to_stored(INGEST_SNAPSHOT, None)).collect();
    store.write_snapshot(INGEST_SNAPSHOT, &records)?;
    let text = ing.summary.to_text();
    store.write_file(INGEST_SUMMARY, &text)?;
    out.write_all(text.as_bytes())?;
    Ok(store.root().to_path_buf())
}

/// Every analyzer in annotate-only mode; nothing is dropped.
pub fn cmd_profile(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<ProfileReport, CliError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let ing = ingest(&cfg.inputs, cfg.format)?;
    warn_line_errors(&ing.errors, err)?;
    let store = cfg.store()?;
    let (annotated, _) = run_pipeline(ing.queries, &PipelineConfig::annotate_only(), &ctx, None)?;
    let records: Vec<_> = annotated.iter().map(|q| q.to_stored("profile", None)).collect();
    store.write_snapshot("profile", &records)?;
    let report = profile(annotated.iter().map(|q| &q.annotations), None)?;
    store.write_file(PROFILE_REPORT, &report.to_text())?;
    if cfg.csv {
        store.write_file("profile.csv", &report.to_csv())?;
    }
    out.write_all(report.to_text().as_bytes())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurateOutcome {
    pub run_dir: PathBuf,
    pub run: PipelineRun,
    pub trusted: usize,
    pub untrusted: usize,
    pub report: ProfileReport,
}

pub fn cmd_curate(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<CurateOutcome, CliError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let pipeline = cfg.pipeline_config()?;
    let policy = cfg.trust_policy()?;
    let ing = ingest(&cfg.inputs, cfg.format)?;
    warn_line_errors(&ing.errors, err)?;
    let store = cfg.store()?;
    let (curated, run) = run_pipeline(ing.queries, &pipeline, &ctx, Some(&store))?;
    let (trusted, untrusted) = partition(curated, |q| &q.annotations, &policy)?;
    let to_records = |set: &[(CuratedQuery, _)], stage: &str| -> Vec<StoredQueryRecord> {
        set.iter().map(|(q, v)| q.to_stored(stage, Some(v))).collect()
    };
    store.write_snapshot(TRUSTED, &to_records(&trusted, TRUSTED))?;
    store.write_snapshot(UNTRUSTED, &to_records(&untrusted, UNTRUSTED))?;
    let all = trusted.iter().chain(&untrusted);
    let stats = trust_statistics(all.clone().map(|(_, v)| v));
    let report = profile(all.map(|(q, _)| &q.annotations), stats)?;
    store.write_file(PROFILE_REPORT, &report.to_text())?;
    store.write_file(PIPELINE_SUMMARY, &run.summary())?;
    if cfg.csv {
        store.write_file("profile.csv", &report.to_csv())?;
    }
    out.write_all(run.summary().as_bytes())?;
    writeln!(out, "trusted {}", trusted.len())?;
    writeln!(out, "untrusted {}", untrusted.len())?;
    match stats {
        Some(s) => {
            let show = |d: Degree| format!("{}/{} ({})", d.numer(), d.denom(), format_degree(d));
            writeln!(out, "accepted_fraction {}", show(s.accepted_fraction))?;
            writeln!(out, "trust_mean {}", show(s.mean))?;
            writeln!(out, "trust_min {}", show(s.min))?;
            writeln!(out, "trust_max {}", show(s.max))?;
        }
        None => writeln!(out, "accepted_fraction n/a")?,
    }
    Ok(CurateOutcome {
        run_dir: store.root().to_path_buf(),
        run,
        trusted: trusted.len(),
        untrusted: untrusted.len(),
        report,
    })
}

/// Topics and IRI namespaces of a stored partition.
pub fn summarize_records(records: &[StoredQueryRecord]) -> LogSummary {
    let mut s = LogSummary::default();
    for r in records {
        if let Some(Label::Topic(t)) = r.annotations.get(Analyzer::Topic) {
            s.add_topic(t);
        }
        if let Ok(q) = parse_query(&r.text) {
            s.add_query(&q);
        }
    }
    s
}

pub fn compare_runs(a: &Path, b: &Path) -> Result<Overlap, CliError> {
    let load = |p: &Path| -> Result<LogSummary, CliError> {
        Ok(summarize_records(&RunStore::open(p)?.read_snapshot(TRUSTED)?))
    };
    Ok(log_overlap(&load(a)?, &load(b)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOutcome {
    pub patterns: Vec<MDPattern>,
    pub groups: Vec<Vec<usize>>,
    pub summary: MdSummary,
}

/// MD patterns of the trusted analytic queries of a run.
pub fn analyze_run(run: &Path, threshold: f64, err: &mut dyn Write) -> Result<AnalyzeOutcome, CliError> {
    let store = RunStore::open(run)?;
    let mut patterns = Vec::new();
    for r in store.read_snapshot(TRUSTED)? {
        if r.annotations.get(Analyzer::QueryType) == Some(Label::QueryType(QueryType::Standard)) {
            continue;
        }
        let Ok(q) = parse_query(&r.text) else { continue };
        match extract_md_pattern(&q, &r.id) {
            Ok(Some(p)) => patterns.push(p),
            Ok(None) => {}
            Err(e) => writeln!(err, "warning: query {}: {e}", r.id)?,
        }
    }
    let groups = group_patterns(&patterns, threshold);
    let summary = md_summary(&patterns, &groups);
    store.write_file(MD_REPORT, &md_report(&patterns, &groups))?;
    store.write_file(MD_SUMMARY, &summary.to_string())?;
    Ok(AnalyzeOutcome {
        patterns,
        groups,
        summary,
    })
}

pub fn cmd_analyze(
    run: Option<&Path>,
    compare: Option<(&Path, &Path)>,
    threshold: f64,
    csv: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    if run.is_none() && compare.is_none() {
        return Err(CliError::Usage("analyze needs --run or --compare".into()));
    }
    if let Some(run) = run {
        let outcome = analyze_run(run, threshold, err)?;
        write!(out, "{}", outcome.summary)?;
        if csv {
            let s = outcome.summary;
            let table = format!(
                "row,count\nFacts,{}\nDimensions,{}\nDimension Attributes,{}\nFact Attributes,{}\nMeasures,{}\n",
                s.facts, s.dimensions, s.dimension_attributes, s.fact_attributes, s.measures
            );
            RunStore::open(run)?.write_file("md.csv", &table)?;
        }
    }
    if let Some((a, b)) = compare {
        let o = compare_runs(a, b)?;
        writeln!(out, "semantic_overlap {:.4}", o.semantic_overlap)?;
        writeln!(out, "source_overlap {:.4}", o.source_overlap)?;
    }
    Ok(())
}

pub fn cmd_export(
    run: &Path,
    partition: &str,
    format: ExportFormat,
    dest: &Path,
    out: &mut dyn Write,
) -> Result<usize, CliError> {
    if partition != TRUSTED && partition != UNTRUSTED {
        return Err(CliError::Usage(format!(
            "partition must be `{TRUSTED}` or `{UNTRUSTED}`"
        )));
    }
    let records = RunStore::open(run)?.read_snapshot(partition)?;
    store::export(&records, format, dest)?;
    writeln!(
        out,
        "exported {} {partition} records to {}",
        records.len(),
        dest.display()
    )?;
    Ok(records.len())
}
