//! Provenance and quality analyzers. Each emits one closed-set label per
//! query; collection analyzers see the whole log at once.

mod behavior;
mod duplicates;
mod overlap;
mod provenance;
mod quality;
mod report;
mod shape;
mod topic;

pub use behavior::{
    analyze_behavior, behavior_by_client, is_bot_agent, longest_regular_run, max_window_count, BehaviorConfig, Request,
};
pub use duplicates::{find_duplicates, group_keys, DuplicateVerdict};
pub use overlap::{log_overlap, LogSummary, Overlap};
pub use provenance::{classify_provider, DirectoryError, ProvenanceDirectory};
pub use quality::{
    classify_expertise, classify_query_type, classify_schema_informativeness, expertise_score, ExpertiseConfig,
};
pub use report::{profile, ProfileReport, ReportError};
pub use shape::{classify_shape, JoinGraph};
pub use topic::{assign_topic, query_tokens, LexiconError, TopicLexicon};
