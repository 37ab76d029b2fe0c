//! Closed label vocabularies for every analyzer.
//!
//! Each analyzer emits exactly one label per query, drawn from its own
//! closed set. [`Label`] ties a label to its analyzer so an
//! [`Annotations`] map can never hold a label under the wrong key.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("unknown analyzer `{0}`")]
    UnknownAnalyzer(String),
    #[error("`{label}` is not a label of analyzer `{analyzer}`")]
    UnknownLabel { analyzer: Analyzer, label: String },
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str().eq_ignore_ascii_case(s))
                    .ok_or(())
            }
        }
    };
}

label_enum!(
    /// Human-issued versus automated traffic.
    Behavior { Robot, Organic }
);
label_enum!(
    /// Kind of organisation behind the client address.
    Organism { Business, Academic, Unknown }
);
label_enum!(Vulnerability {
    Vulnerable,
    Safe,
    Unknown
});
label_enum!(Duplication { Duplicate, Unique });
label_enum!(
    /// Outcome of the syntactic or semantic check.
    Validity { Wrong, Correct, Corrected }
);
label_enum!(Topic {
    None,
    AcademicEvent,
    Agent,
    CallFor,
    Document,
    Institute,
    NonAcademicEvent,
    Publication,
    Role,
    Site,
    Track,
    Topic,
});
label_enum!(Schema {
    Informative,
    NonInformative
});
label_enum!(
    /// BGP shape of a query's join graph.
    Shape { Simple, Chain, Star, Tree, Flower, Bouquet, Forrest }
);
label_enum!(Expertise {
    Beginner,
    Intermediate,
    Expert
});
label_enum!(QueryType { Analytic, Standard });

/// The eleven analyzers whose labels feed the trust degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analyzer {
    Behavior,
    Organism,
    Vulnerability,
    Duplication,
    Syntax,
    Semantics,
    Topic,
    Schema,
    Shape,
    Expertise,
    QueryType,
}

impl Analyzer {
    pub const ALL: [Analyzer; 11] = [
        Analyzer::Behavior,
        Analyzer::Organism,
        Analyzer::Vulnerability,
        Analyzer::Duplication,
        Analyzer::Syntax,
        Analyzer::Semantics,
        Analyzer::Topic,
        Analyzer::Schema,
        Analyzer::Shape,
        Analyzer::Expertise,
        Analyzer::QueryType,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Analyzer::Behavior => "behavior",
            Analyzer::Organism => "organism",
            Analyzer::Vulnerability => "vulnerability",
            Analyzer::Duplication => "duplication",
            Analyzer::Syntax => "syntax",
            Analyzer::Semantics => "semantics",
            Analyzer::Topic => "topic",
            Analyzer::Schema => "schema",
            Analyzer::Shape => "shape",
            Analyzer::Expertise => "expertise",
            Analyzer::QueryType => "query_type",
        }
    }

    /// Every label this analyzer may emit, in declaration order.
    pub fn labels(self) -> Vec<Label> {
        match self {
            Analyzer::Behavior => Behavior::ALL.iter().map(|&l| Label::Behavior(l)).collect(),
            Analyzer::Organism => Organism::ALL.iter().map(|&l| Label::Organism(l)).collect(),
            Analyzer::Vulnerability => Vulnerability::ALL.iter().map(|&l| Label::Vulnerability(l)).collect(),
            Analyzer::Duplication => Duplication::ALL.iter().map(|&l| Label::Duplication(l)).collect(),
            Analyzer::Syntax => Validity::ALL.iter().map(|&l| Label::Syntax(l)).collect(),
            Analyzer::Semantics => Validity::ALL.iter().map(|&l| Label::Semantics(l)).collect(),
            Analyzer::Topic => Topic::ALL.iter().map(|&l| Label::Topic(l)).collect(),
            Analyzer::Schema => Schema::ALL.iter().map(|&l| Label::Schema(l)).collect(),
            Analyzer::Shape => Shape::ALL.iter().map(|&l| Label::Shape(l)).collect(),
            Analyzer::Expertise => Expertise::ALL.iter().map(|&l| Label::Expertise(l)).collect(),
            Analyzer::QueryType => QueryType::ALL.iter().map(|&l| Label::QueryType(l)).collect(),
        }
    }

    pub fn parse_label(self, s: &str) -> Result<Label, LabelError> {
        self.labels()
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| LabelError::UnknownLabel {
                analyzer: self,
                label: s.to_string(),
            })
    }
}

impl fmt::Display for Analyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Analyzer {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, LabelError> {
        Analyzer::ALL
            .iter()
            .copied()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| LabelError::UnknownAnalyzer(s.to_string()))
    }
}

/// A label bound to the analyzer that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Behavior(Behavior),
    Organism(Organism),
    Vulnerability(Vulnerability),
    Duplication(Duplication),
    Syntax(Validity),
    Semantics(Validity),
    Topic(Topic),
    Schema(Schema),
    Shape(Shape),
    Expertise(Expertise),
    QueryType(QueryType),
}

impl Label {
    pub fn analyzer(self) -> Analyzer {
        match self {
            Label::Behavior(_) => Analyzer::Behavior,
            Label::Organism(_) => Analyzer::Organism,
            Label::Vulnerability(_) => Analyzer::Vulnerability,
            Label::Duplication(_) => Analyzer::Duplication,
            Label::Syntax(_) => Analyzer::Syntax,
            Label::Semantics(_) => Analyzer::Semantics,
            Label::Topic(_) => Analyzer::Topic,
            Label::Schema(_) => Analyzer::Schema,
            Label::Shape(_) => Analyzer::Shape,
            Label::Expertise(_) => Analyzer::Expertise,
            Label::QueryType(_) => Analyzer::QueryType,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Behavior(l) => l.as_str(),
            Label::Organism(l) => l.as_str(),
            Label::Vulnerability(l) => l.as_str(),
            Label::Duplication(l) => l.as_str(),
            Label::Syntax(l) | Label::Semantics(l) => l.as_str(),
            Label::Topic(l) => l.as_str(),
            Label::Schema(l) => l.as_str(),
            Label::Shape(l) => l.as_str(),
            Label::Expertise(l) => l.as_str(),
            Label::QueryType(l) => l.as_str(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.analyzer(), self.as_str())
    }
}

/// Analyzer → label map of a single query.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Annotations(BTreeMap<Analyzer, Label>);

impl Annotations {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `label` under its own analyzer, replacing any previous label.
    pub fn set(&mut self, label: Label) {
        self.0.insert(label.analyzer(), label);
    }

    pub fn get(&self, analyzer: Analyzer) -> Option<Label> {
        self.0.get(&analyzer).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Analyzer, Label)> + '_ {
        self.0.iter().map(|(&a, &l)| (a, l))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Renders as `analyzer=Label;analyzer=Label` in analyzer order.
    pub fn to_compact(&self) -> String {
        self.iter()
            .map(|(a, l)| format!("{}={}", a, l.as_str()))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn from_compact(s: &str) -> Result<Self, LabelError> {
        let mut out = Annotations::new();
        for part in s.split(';').filter(|p| !p.is_empty()) {
            let (a, l) = part
                .split_once('=')
                .ok_or_else(|| LabelError::UnknownAnalyzer(part.to_string()))?;
            let analyzer: Analyzer = a.parse()?;
            out.set(analyzer.parse_label(l)?);
        }
        Ok(out)
    }
}

impl FromIterator<Label> for Annotations {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        let mut out = Annotations::new();
        for l in iter {
            out.set(l);
        }
        out
    }
}

impl Serialize for Annotations {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (a, l) in self.iter() {
            map.serialize_entry(a.as_str(), l.as_str())?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Annotations {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, String>::deserialize(deserializer)?;
        let mut out = Annotations::new();
        for (a, l) in raw {
            let analyzer: Analyzer = a.parse().map_err(serde::de::Error::custom)?;
            out.set(analyzer.parse_label(&l).map_err(serde::de::Error::custom)?);
        }
        Ok(out)
    }
}
