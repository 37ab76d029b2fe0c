//! Offline stand-in for WHOIS and IP blacklists.

use std::net::IpAddr;
use std::path::Path;

use ipnet::IpNet;
use thiserror::Error;

use crate::ingest::ClientIdentity;
use crate::labels::{Organism, Vulnerability};

#[derive(Debug, Error)]
pub enum DirectoryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("provenance line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProvenanceDirectory {
    pub blacklist: Vec<IpNet>,
    /// Most specific range first.
    pub organism_map: Vec<(IpNet, Organism)>,
    pub bot_agent_patterns: Vec<String>,
}

impl ProvenanceDirectory {
    pub fn parse(src: &str) -> Result<Self, DirectoryError> {
        let mut dir = ProvenanceDirectory::default();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| DirectoryError::Syntax { line: i + 1, reason };
            let net = |s: Option<&str>| -> Result<IpNet, DirectoryError> {
                let s = s.ok_or_else(|| err("missing CIDR".into()))?;
                s.parse().map_err(|_| err(format!("invalid CIDR `{s}`")))
            };
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("blacklist") => {
                    dir.blacklist.push(net(parts.next())?);
                }
                Some("organism") => {
                    let range = net(parts.next())?;
                    let org = match parts.next() {
                        Some(o) if o.eq_ignore_ascii_case("business") => Organism::Business,
                        Some(o) if o.eq_ignore_ascii_case("academic") => Organism::Academic,
                        other => return Err(err(format!("expected Business or Academic, got {other:?}"))),
                    };
                    dir.organism_map.push((range, org));
                }
                Some("botagent") => {
                    let pattern = line["botagent".len()..].trim();
                    if pattern.is_empty() {
                        return Err(err("missing agent pattern".into()));
                    }
                    dir.bot_agent_patterns.push(pattern.to_lowercase());
                    continue;
                }
                Some(other) => return Err(err(format!("unknown record kind `{other}`"))),
                None => unreachable!(),
            }
            if parts.next().is_some() {
                return Err(err("trailing text".into()));
            }
        }
        dir.organism_map.sort_by_key(|(n, _)| std::cmp::Reverse(n.prefix_len()));
        Ok(dir)
    }

    pub fn load(path: &Path) -> Result<Self, DirectoryError> {
        let src = std::fs::read_to_string(path).map_err(|source| DirectoryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&src)
    }
}

/// Session clients carry no address, so both labels are `Unknown`; so
/// are addresses that do not parse.
pub fn classify_provider(client: &ClientIdentity, dir: &ProvenanceDirectory) -> (Vulnerability, Organism) {
    let Some(ip) = client.ip().and_then(|s| s.parse::<IpAddr>().ok()) else {
        return (Vulnerability::Unknown, Organism::Unknown);
    };
    let vulnerability = if dir.blacklist.iter().any(|n| n.contains(&ip)) {
        Vulnerability::Vulnerable
    } else {
        Vulnerability::Safe
    };
    let organism = dir
        .organism_map
        .iter()
        .find(|(n, _)| n.contains(&ip))
        .map_or(Organism::Unknown, |(_, o)| *o);
    (vulnerability, organism)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIR: &str = "\
# fixture
blacklist 203.0.113.0/24
organism 10.0.0.0/8 Business
organism 10.1.0.0/16 Academic
botagent Googlebot
";

    fn ip(s: &str) -> ClientIdentity {
        ClientIdentity::Ip(s.into())
    }

    #[test]
    fn sessions_are_unknown() {
        let d = ProvenanceDirectory::parse(DIR).unwrap();
        let c = ClientIdentity::Session("u42".into());
        assert_eq!(classify_provider(&c, &d), (Vulnerability::Unknown, Organism::Unknown));
        assert_eq!(
            classify_provider(&ip("not-an-ip"), &d),
            (Vulnerability::Unknown, Organism::Unknown)
        );
    }

    #[test]
    fn most_specific_range_wins() {
        let d = ProvenanceDirectory::parse(DIR).unwrap();
        assert_eq!(
            classify_provider(&ip("10.1.2.3"), &d),
            (Vulnerability::Safe, Organism::Academic)
        );
        assert_eq!(
            classify_provider(&ip("10.2.2.3"), &d),
            (Vulnerability::Safe, Organism::Business)
        );
        assert_eq!(
            classify_provider(&ip("203.0.113.9"), &d),
            (Vulnerability::Vulnerable, Organism::Unknown)
        );
        assert_eq!(d.bot_agent_patterns, vec!["googlebot".to_string()]);
    }

    #[test]
    fn rejects_bad_cidr() {
        assert!(ProvenanceDirectory::parse("blacklist 300.0.0.0/8").is_err());
        assert!(ProvenanceDirectory::parse("organism 10.0.0.0/8 Government").is_err());
    }
}
