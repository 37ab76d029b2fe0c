use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::TimeDelta;
use serde::{Deserialize, Serialize};

use crate::labels::{Analyzer, Behavior, Duplication, Label, Organism, Vulnerability};
use crate::profiling::{BehaviorConfig, ExpertiseConfig};

use super::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    RobotCleaner,
    OrganismExtractor,
    VulnerableEliminator,
    Deduplicator,
    Correctors,
    TopicClustering,
    SchemaRanking,
    ComplexityFilter,
    QueryTypeSelector,
    ExpertiseFilter,
}

impl Operator {
    /// Canonical execution order; the expertise filter is optional.
    pub const ALL: [Operator; 10] = [
        Operator::RobotCleaner,
        Operator::OrganismExtractor,
        Operator::VulnerableEliminator,
        Operator::Deduplicator,
        Operator::Correctors,
        Operator::TopicClustering,
        Operator::SchemaRanking,
        Operator::ComplexityFilter,
        Operator::QueryTypeSelector,
        Operator::ExpertiseFilter,
    ];

    pub const DEFAULT_PIPELINE: [Operator; 9] = [
        Operator::RobotCleaner,
        Operator::OrganismExtractor,
        Operator::VulnerableEliminator,
        Operator::Deduplicator,
        Operator::Correctors,
        Operator::TopicClustering,
        Operator::SchemaRanking,
        Operator::ComplexityFilter,
        Operator::QueryTypeSelector,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Operator::RobotCleaner => "robot_cleaner",
            Operator::OrganismExtractor => "organism_extractor",
            Operator::VulnerableEliminator => "vulnerable_eliminator",
            Operator::Deduplicator => "deduplicator",
            Operator::Correctors => "correctors",
            Operator::TopicClustering => "topic_clustering",
            Operator::SchemaRanking => "schema_ranking",
            Operator::ComplexityFilter => "complexity_filter",
            Operator::QueryTypeSelector => "query_type_selector",
            Operator::ExpertiseFilter => "expertise_filter",
        }
    }

    /// Analyzers whose labels this operator attaches.
    pub fn analyzers(self) -> &'static [Analyzer] {
        match self {
            Operator::RobotCleaner => &[Analyzer::Behavior],
            Operator::OrganismExtractor => &[Analyzer::Organism],
            Operator::VulnerableEliminator => &[Analyzer::Vulnerability],
            Operator::Deduplicator => &[Analyzer::Duplication],
            Operator::Correctors => &[Analyzer::Syntax, Analyzer::Semantics],
            Operator::TopicClustering => &[Analyzer::Topic],
            Operator::SchemaRanking => &[Analyzer::Schema],
            Operator::ComplexityFilter => &[Analyzer::Shape],
            Operator::QueryTypeSelector => &[Analyzer::QueryType],
            Operator::ExpertiseFilter => &[Analyzer::Expertise],
        }
    }

    pub fn scope(self) -> Scope {
        match self {
            Operator::RobotCleaner | Operator::Deduplicator => Scope::WholeCollection,
            _ => Scope::PerQuery,
        }
    }

    fn default_keep(self) -> Option<BTreeSet<Label>> {
        let set = |ls: &[Label]| Some(ls.iter().copied().collect());
        match self {
            Operator::RobotCleaner => set(&[Label::Behavior(Behavior::Organic)]),
            Operator::OrganismExtractor => {
                set(&[Label::Organism(Organism::Academic), Label::Organism(Organism::Unknown)])
            }
            Operator::VulnerableEliminator => set(&[
                Label::Vulnerability(Vulnerability::Safe),
                Label::Vulnerability(Vulnerability::Unknown),
            ]),
            Operator::Deduplicator => set(&[Label::Duplication(Duplication::Unique)]),
            _ => None,
        }
    }

    fn param_keys(self) -> &'static [&'static str] {
        match self {
            Operator::RobotCleaner => &["window_secs", "rate_threshold", "gap_tolerance_ms", "regular_gaps"],
            Operator::ComplexityFilter | Operator::ExpertiseFilter => &[
                "pattern_weight",
                "clause_weight",
                "advanced_weight",
                "beginner_max",
                "expert_min",
            ],
            _ => &[],
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Operator {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Operator::ALL
            .iter()
            .copied()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownOperator(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// Drops queries; never edits text.
    Cleaner,
    /// Rewrites text; never drops.
    Transformer,
    /// Only attaches labels.
    Annotator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    PerQuery,
    WholeCollection,
}

/// A configured pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurationOperator {
    pub operator: Operator,
    /// Labels that survive the stage; `None` keeps everything.
    pub keep: Option<BTreeSet<Label>>,
    pub params: BTreeMap<String, String>,
    /// Set on the complexity filter when no expertise stage runs, so the
    /// expertise label is still attached.
    pub attach_expertise: bool,
}

impl CurationOperator {
    pub fn new(operator: Operator) -> Self {
        Self {
            operator,
            keep: operator.default_keep(),
            params: BTreeMap::new(),
            attach_expertise: false,
        }
    }

    pub fn name(&self) -> &'static str {
        self.operator.as_str()
    }

    /// The first four operators and any annotator given a keep-set are
    /// cleaners; the correctors transform; the rest annotate.
    pub fn kind(&self) -> OperatorKind {
        match self.operator {
            Operator::RobotCleaner
            | Operator::OrganismExtractor
            | Operator::VulnerableEliminator
            | Operator::Deduplicator => OperatorKind::Cleaner,
            Operator::Correctors => OperatorKind::Transformer,
            _ if self.keep.is_some() => OperatorKind::Cleaner,
            _ => OperatorKind::Annotator,
        }
    }

    pub fn scope(&self) -> Scope {
        self.operator.scope()
    }

    pub fn keeps(&self, label: Label) -> bool {
        self.keep.as_ref().is_none_or(|k| k.contains(&label))
    }

    pub(crate) fn set_keep(&mut self, labels: &str) -> Result<(), ConfigError> {
        if self.operator == Operator::Correctors {
            return Err(ConfigError::Invalid(
                "correctors never drop queries; keep-sets are not allowed".into(),
            ));
        }
        if labels == "*" {
            self.keep = None;
            return Ok(());
        }
        let analyzer = self.operator.analyzers()[0];
        let set = labels
            .split(',')
            .map(|l| {
                analyzer
                    .parse_label(l.trim())
                    .map_err(|e| ConfigError::UnknownLabel(e.to_string()))
            })
            .collect::<Result<BTreeSet<_>, _>>()?;
        self.keep = Some(set);
        Ok(())
    }

    pub(crate) fn set_param(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !self.operator.param_keys().contains(&key) {
            return Err(ConfigError::Invalid(format!(
                "`{}` has no parameter `{key}`",
                self.operator
            )));
        }
        value
            .parse::<u64>()
            .map_err(|_| ConfigError::Invalid(format!("parameter `{key}` must be a non-negative integer")))?;
        self.params.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn param(&self, key: &str) -> Option<u64> {
        self.params.get(key).and_then(|v| v.parse().ok())
    }

    pub fn behavior_config(&self) -> BehaviorConfig {
        let mut c = BehaviorConfig::default();
        if let Some(v) = self.param("window_secs") {
            c.window = TimeDelta::seconds(v as i64);
        }
        if let Some(v) = self.param("rate_threshold") {
            c.rate_threshold = v as usize;
        }
        if let Some(v) = self.param("gap_tolerance_ms") {
            c.gap_tolerance = TimeDelta::milliseconds(v as i64);
        }
        if let Some(v) = self.param("regular_gaps") {
            c.regular_gaps = v as usize;
        }
        c
    }

    pub fn expertise_config(&self) -> ExpertiseConfig {
        let mut c = ExpertiseConfig::default();
        let fields: [(&str, &mut usize); 5] = [
            ("pattern_weight", &mut c.pattern_weight),
            ("clause_weight", &mut c.clause_weight),
            ("advanced_weight", &mut c.advanced_weight),
            ("beginner_max", &mut c.beginner_max),
            ("expert_min", &mut c.expert_min),
        ];
        for (key, slot) in fields {
            if let Some(v) = self.params.get(key).and_then(|v| v.parse().ok()) {
                *slot = v;
            }
        }
        c
    }
}
