//! Operator framework and the trust-aware curation pipeline.
//!
//! Stages run in a fixed order: robot cleaner, business/academic
//! extractor, vulnerable-query eliminator, deduplicator, syntactic and
//! semantic correctors, topic clustering, schema ranking, complexity
//! filter, analytic/standard selector, and optionally the expertise
//! filter. Every stage labels the queries it sees; cleaners then drop
//! those whose label is outside the stage's keep-set.

mod config;
mod operator;

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::ExtractedQuery;
use crate::labels::*;
use crate::profiling::{
    analyze_behavior, assign_topic, classify_expertise, classify_provider, classify_query_type,
    classify_schema_informativeness, classify_shape, group_keys, ProvenanceDirectory, Request, TopicLexicon,
};
use crate::sparql::{
    canonicalize, correct_semantics, correct_syntax, parse_query, CorrectionStatus, ParsedQuery, Vocabulary,
};
use crate::store::{record_id, stage_snapshot_name, Provenance, RunStore, StoreError, StoredQueryRecord, StoredTrust};
use crate::trust::TrustVerdict;

pub use config::PipelineConfig;
pub use operator::{CurationOperator, Operator, OperatorKind, Scope};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("{0}")]
    UnknownLabel(String),
    #[error("{0}")]
    Invalid(String),
    #[error("pipeline line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<ConfigError>,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum CurationError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Whitespace runs collapsed to one space; the duplicate key of text
/// that does not parse.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Canonical form when the text parses, collapsed text otherwise.
pub fn canonical_key(text: &str, parsed: Option<&ParsedQuery>) -> String {
    parsed.map_or_else(|| collapse_whitespace(text), canonicalize)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuratedQuery {
    pub id: String,
    pub text: String,
    pub parsed: Option<ParsedQuery>,
    pub annotations: Annotations,
    pub provenance: Provenance,
}

impl CuratedQuery {
    pub fn new(text: impl Into<String>, provenance: Provenance) -> Self {
        let text = text.into();
        let parsed = parse_query(&text).ok();
        let id = record_id(&canonical_key(&text, parsed.as_ref()), &provenance.origin());
        Self {
            id,
            text,
            parsed,
            annotations: Annotations::new(),
            provenance,
        }
    }

    pub fn from_extracted(q: &ExtractedQuery) -> Self {
        let r = &q.record;
        Self::new(
            q.text.clone(),
            Provenance {
                source_path: r.origin.source_path.clone(),
                line_number: r.origin.line_number,
                client: r.client.clone(),
                timestamp: r.timestamp,
                user_agent: r.user_agent.clone(),
            },
        )
    }

    /// Restores a stored query, keeping its id and labels.
    pub fn from_stored(r: &StoredQueryRecord) -> Self {
        Self {
            id: r.id.clone(),
            text: r.text.clone(),
            parsed: parse_query(&r.text).ok(),
            annotations: r.annotations.clone(),
            provenance: r.provenance.clone(),
        }
    }

    pub fn canonical(&self) -> String {
        canonical_key(&self.text, self.parsed.as_ref())
    }

    pub fn to_stored(&self, stage: &str, trust: Option<&TrustVerdict>) -> StoredQueryRecord {
        StoredQueryRecord {
            id: self.id.clone(),
            text: self.text.clone(),
            canonical: self.canonical(),
            annotations: self.annotations.clone(),
            trust: trust.map(StoredTrust::from),
            provenance: self.provenance.clone(),
            stage: stage.to_string(),
        }
    }
}

/// Lookup data the analyzers need.
#[derive(Debug, Clone, Default)]
pub struct CurationContext {
    /// Without a vocabulary every parsed query is semantically correct.
    pub vocabulary: Option<Vocabulary>,
    pub lexicon: TopicLexicon,
    pub directory: ProvenanceDirectory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    /// 1-based position in the pipeline.
    pub index: usize,
    pub operator: String,
    pub kind: OperatorKind,
    pub scope: Scope,
    pub input_ids: Vec<String>,
    pub output_ids: Vec<String>,
    pub dropped_ids: Vec<String>,
    pub snapshot: Option<String>,
}

impl StageRecord {
    pub fn input_count(&self) -> usize {
        self.input_ids.len()
    }

    pub fn output_count(&self) -> usize {
        self.output_ids.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PipelineRun {
    pub stages: Vec<StageRecord>,
}

impl PipelineRun {
    /// One `stage <k> <operator> <kind> in <n> out <m> dropped <d>` line
    /// per stage.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            out.push_str(&format!(
                "stage {} {} {:?} in {} out {} dropped {}\n",
                s.index,
                s.operator,
                s.kind,
                s.input_count(),
                s.output_count(),
                s.dropped_ids.len()
            ));
        }
        out
    }
}

fn validity(status: CorrectionStatus) -> Validity {
    match status {
        CorrectionStatus::AlreadyCorrect => Validity::Correct,
        CorrectionStatus::Corrected => Validity::Corrected,
        CorrectionStatus::Uncorrectable => Validity::Wrong,
    }
}

/// Repairs syntax, then vocabulary terms, rewriting the text in place.
fn correct(q: &mut CuratedQuery, vocabulary: Option<&Vocabulary>) {
    let syntax = correct_syntax(&q.text);
    let syntax_label = validity(syntax.status);
    if syntax.status == CorrectionStatus::Corrected {
        q.text = syntax.text;
        q.parsed = parse_query(&q.text).ok();
    }
    if syntax.status == CorrectionStatus::Uncorrectable {
        q.parsed = None;
    }
    let semantics_label = match (&q.parsed, vocabulary) {
        (None, _) => Validity::Wrong,
        (Some(_), None) => Validity::Correct,
        (Some(p), Some(v)) => {
            let (res, fixed) = correct_semantics(p, v);
            if res.status == CorrectionStatus::Corrected {
                q.text = res.text;
                q.parsed = fixed;
            }
            validity(res.status)
        }
    };
    q.annotations.set(Label::Syntax(syntax_label));
    q.annotations.set(Label::Semantics(semantics_label));
}

/// Labels of a per-query annotator. Unparsed queries get the least
/// favorable reading of each analyzer.
fn annotate(op: &CurationOperator, q: &CuratedQuery, ctx: &CurationContext) -> Vec<Label> {
    let p = q.parsed.as_ref();
    match op.operator {
        Operator::OrganismExtractor => vec![Label::Organism(
            classify_provider(&q.provenance.client, &ctx.directory).1,
        )],
        Operator::VulnerableEliminator => {
            vec![Label::Vulnerability(
                classify_provider(&q.provenance.client, &ctx.directory).0,
            )]
        }
        Operator::TopicClustering => vec![Label::Topic(p.map_or(Topic::None, |p| assign_topic(p, &ctx.lexicon)))],
        Operator::SchemaRanking => vec![Label::Schema(
            p.map_or(Schema::NonInformative, classify_schema_informativeness),
        )],
        Operator::ComplexityFilter => {
            let mut out = vec![Label::Shape(p.map_or(Shape::Simple, classify_shape))];
            if op.attach_expertise {
                let cfg = op.expertise_config();
                out.push(Label::Expertise(
                    p.map_or(Expertise::Beginner, |p| classify_expertise(p, &cfg)),
                ));
            }
            out
        }
        Operator::QueryTypeSelector => {
            vec![Label::QueryType(p.map_or(QueryType::Standard, classify_query_type))]
        }
        Operator::ExpertiseFilter => {
            let cfg = op.expertise_config();
            vec![Label::Expertise(
                p.map_or(Expertise::Beginner, |p| classify_expertise(p, &cfg)),
            )]
        }
        Operator::RobotCleaner | Operator::Deduplicator | Operator::Correctors => {
            unreachable!("not a per-query annotator")
        }
    }
}

fn collection_labels(op: &CurationOperator, queries: &[CuratedQuery], ctx: &CurationContext) -> Vec<Label> {
    match op.operator {
        Operator::RobotCleaner => {
            let cfg = op.behavior_config();
            let mut histories: BTreeMap<_, Vec<Request>> = BTreeMap::new();
            for q in queries {
                histories
                    .entry(&q.provenance.client)
                    .or_default()
                    .push((q.provenance.timestamp, q.provenance.user_agent.clone()));
            }
            let verdicts: BTreeMap<_, Behavior> = histories
                .into_iter()
                .map(|(c, h)| (c, analyze_behavior(&h, &cfg, &ctx.directory.bot_agent_patterns)))
                .collect();
            queries
                .iter()
                .map(|q| Label::Behavior(verdicts[&q.provenance.client]))
                .collect()
        }
        Operator::Deduplicator => {
            let keys: Vec<String> = queries.par_iter().map(CuratedQuery::canonical).collect();
            group_keys(&keys)
                .into_iter()
                .map(|v| Label::Duplication(v.label))
                .collect()
        }
        _ => unreachable!("not a collection operator"),
    }
}

/// Runs one stage; returns the survivors and the ids dropped, both in
/// input order.
pub fn apply_operator(
    op: &CurationOperator,
    mut queries: Vec<CuratedQuery>,
    ctx: &CurationContext,
) -> (Vec<CuratedQuery>, Vec<String>) {
    match op.operator {
        Operator::Correctors => {
            let vocab = ctx.vocabulary.as_ref();
            queries.par_iter_mut().for_each(|q| correct(q, vocab));
            return (queries, Vec::new());
        }
        Operator::RobotCleaner | Operator::Deduplicator => {
            let labels = collection_labels(op, &queries, ctx);
            for (q, l) in queries.iter_mut().zip(labels) {
                q.annotations.set(l);
            }
        }
        _ => {
            let labels: Vec<Vec<Label>> = queries.par_iter().map(|q| annotate(op, q, ctx)).collect();
            for (q, ls) in queries.iter_mut().zip(labels) {
                ls.into_iter().for_each(|l| q.annotations.set(l));
            }
        }
    }
    let analyzer = op.operator.analyzers()[0];
    let (kept, dropped): (Vec<_>, Vec<_>) = queries
        .into_iter()
        .partition(|q| q.annotations.get(analyzer).is_none_or(|l| op.keeps(l)));
    (kept, dropped.into_iter().map(|q| q.id).collect())
}

/// Runs every configured stage in order, snapshotting each stage's
/// survivors when a store is given.
pub fn run_pipeline(
    queries: Vec<CuratedQuery>,
    config: &PipelineConfig,
    ctx: &CurationContext,
    store: Option<&RunStore>,
) -> Result<(Vec<CuratedQuery>, PipelineRun), CurationError> {
    let mut current = queries;
    let mut run = PipelineRun::default();
    for (i, op) in config.operators.iter().enumerate() {
        let index = i + 1;
        let input_ids: Vec<String> = current.iter().map(|q| q.id.clone()).collect();
        let (next, dropped_ids) = apply_operator(op, current, ctx);
        let output_ids: Vec<String> = next.iter().map(|q| q.id.clone()).collect();
        debug_assert_eq!(input_ids.len(), output_ids.len() + dropped_ids.len());
        let snapshot = match store {
            Some(s) => {
                let name = stage_snapshot_name(index, op.name());
                let records: Vec<_> = next.iter().map(|q| q.to_stored(&name, None)).collect();
                Some(s.write_snapshot(&name, &records)?)
            }
            None => None,
        };
        run.stages.push(StageRecord {
            index,
            operator: op.name().to_string(),
            kind: op.kind(),
            scope: op.scope(),
            input_ids,
            output_ids,
            dropped_ids,
            snapshot,
        });
        current = next;
    }
    Ok((current, run))
}

/// True when `output ∪ dropped = input` with no overlap, for every stage.
pub fn conserves(run: &PipelineRun) -> bool {
    run.stages.iter().all(|s| {
        let out: HashSet<&String> = s.output_ids.iter().collect();
        let dropped: HashSet<&String> = s.dropped_ids.iter().collect();
        let input: HashSet<&String> = s.input_ids.iter().collect();
        out.is_disjoint(&dropped)
            && out.len() + dropped.len() == input.len()
            && out.union(&dropped).all(|id| input.contains(id))
    }) && run.stages.windows(2).all(|w| w[0].output_ids == w[1].input_ids)
}

#[cfg(test)]
mod tests;
