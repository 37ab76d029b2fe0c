//! Curation of SPARQL endpoint query logs: ingestion, profiling,
//! trust-aware curation, storage and multidimensional analytics.

pub mod analytics;
pub mod curation;
pub mod ingest;
pub mod labels;
pub mod profiling;
pub mod sparql;
pub mod store;
pub mod text;
pub mod trust;

pub use curation::{CuratedQuery, CurationContext, PipelineConfig, PipelineRun};
pub use ingest::{ClientIdentity, LogFormat, LogRecord, Origin};
pub use labels::{Analyzer, Annotations, Label};
pub use sparql::{ParsedQuery, TriplePattern, Vocabulary};
pub use store::{Provenance, StoredQueryRecord};
pub use trust::{Degree, TrustPolicy, TrustVerdict};
