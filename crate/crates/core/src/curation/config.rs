use std::path::Path;

use super::operator::{CurationOperator, Operator};
use super::ConfigError;

/// Ordered pipeline stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub operators: Vec<CurationOperator>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::from_stages(
            Operator::DEFAULT_PIPELINE
                .iter()
                .map(|&o| CurationOperator::new(o))
                .collect(),
        )
    }
}

impl PipelineConfig {
    fn from_stages(mut operators: Vec<CurationOperator>) -> Self {
        let has_expertise = operators.iter().any(|o| o.operator == Operator::ExpertiseFilter);
        for o in &mut operators {
            o.attach_expertise = o.operator == Operator::ComplexityFilter && !has_expertise;
        }
        Self { operators }
    }

    /// Every operator, expertise included, with nothing dropped.
    pub fn annotate_only() -> Self {
        Self::from_stages(
            Operator::ALL
                .iter()
                .map(|&o| CurationOperator {
                    keep: None,
                    ..CurationOperator::new(o)
                })
                .collect(),
        )
    }

    pub fn get(&self, op: Operator) -> Option<&CurationOperator> {
        self.operators.iter().find(|o| o.operator == op)
    }

    /// Reads `operator <name> [keep <label,…>|keep *]` and
    /// `param <name> <key> <value>` lines.
    ///
    /// The nine default stages always run, in canonical order; listing
    /// one only overrides its keep-set. `expertise_filter` runs only when
    /// listed. Operator lines must follow the canonical order.
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let mut stages: Vec<CurationOperator> = Operator::ALL.iter().map(|&o| CurationOperator::new(o)).collect();
        let mut listed: Vec<Operator> = Vec::new();
        let mut params: Vec<(usize, Operator, String, String)> = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |e: ConfigError| ConfigError::Line {
                line: i + 1,
                source: Box::new(e),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["operator", name, rest @ ..] => {
                    let op: Operator = name.parse().map_err(at)?;
                    if listed.contains(&op) {
                        return Err(at(ConfigError::Invalid(format!("`{op}` listed twice"))));
                    }
                    if listed.last().is_some_and(|&prev| prev > op) {
                        return Err(at(ConfigError::Invalid(format!(
                            "`{op}` must come before `{}`",
                            listed.last().unwrap()
                        ))));
                    }
                    listed.push(op);
                    let stage = stages.iter_mut().find(|s| s.operator == op).unwrap();
                    match rest {
                        [] => {}
                        ["keep", labels] => stage.set_keep(labels).map_err(at)?,
                        _ => return Err(at(ConfigError::Invalid(format!("unexpected `{}`", rest.join(" "))))),
                    }
                }
                ["param", name, key, value] => {
                    let op: Operator = name.parse().map_err(at)?;
                    params.push((i + 1, op, key.to_string(), value.to_string()));
                }
                _ => {
                    return Err(at(ConfigError::Invalid(format!("unrecognized line `{line}`"))));
                }
            }
        }
        for (line, op, key, value) in params {
            let stage = stages.iter_mut().find(|s| s.operator == op).unwrap();
            stage.set_param(&key, &value).map_err(|e| ConfigError::Line {
                line,
                source: Box::new(e),
            })?;
        }
        if !listed.contains(&Operator::ExpertiseFilter) {
            let expertise = &stages[stages.len() - 1];
            if !expertise.params.is_empty() {
                return Err(ConfigError::Invalid(
                    "parameters given for expertise_filter, which is not listed".into(),
                ));
            }
            stages.pop();
        }
        Ok(Self::from_stages(stages))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&src)
    }
}
