//! SPARQL subset: parsing, canonical form, and syntactic/semantic repair.

mod ast;
mod correct;
mod lexer;
mod parser;
mod render;
mod semantics;
mod vocab;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::*;
pub use correct::{correct_syntax, CorrectionResult, CorrectionStatus, SYNTAX_RULES};
pub use parser::parse_query;
pub use render::canonicalize;
pub use semantics::{
    check_semantics, correct_semantics, nearest_term, normalized_distance, SemanticReport, SemanticStatus, Violation,
    ViolationKind, SEMANTIC_DISTANCE_THRESHOLD,
};
pub use vocab::{Vocabulary, VocabularyError};

/// Why a query text failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxDiagnosis {
    /// Byte offset into the query text.
    pub position: usize,
    pub expected: String,
    pub found: String,
}

impl SyntaxDiagnosis {
    pub fn new(position: usize, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Self {
            position,
            expected: expected.into(),
            found: found.into(),
        }
    }
}

impl fmt::Display for SyntaxDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at byte {}: expected {}, found {}",
            self.position, self.expected, self.found
        )
    }
}

impl std::error::Error for SyntaxDiagnosis {}
