use std::collections::HashMap;

use crate::labels::Duplication;
use crate::sparql::{canonicalize, ParsedQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuplicateVerdict {
    pub label: Duplication,
    /// Input position of the group's first member.
    pub group: usize,
}

/// Groups equal keys; the first member of each group is `Unique`, every
/// later one `Duplicate`.
pub fn group_keys<K: AsRef<str>>(keys: &[K]) -> Vec<DuplicateVerdict> {
    let mut first: HashMap<&str, usize> = HashMap::new();
    keys.iter()
        .enumerate()
        .map(|(i, k)| {
            let group = *first.entry(k.as_ref()).or_insert(i);
            let label = if group == i {
                Duplication::Unique
            } else {
                Duplication::Duplicate
            };
            DuplicateVerdict { label, group }
        })
        .collect()
}

/// One verdict per input query, in input order, grouped by canonical form.
pub fn find_duplicates(queries: &[ParsedQuery]) -> Vec<DuplicateVerdict> {
    let keys: Vec<String> = queries.iter().map(canonicalize).collect();
    group_keys(&keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparql::parse_query;

    fn labels(src: &[&str]) -> Vec<Duplication> {
        let qs: Vec<_> = src.iter().map(|s| parse_query(s).unwrap()).collect();
        find_duplicates(&qs).into_iter().map(|v| v.label).collect()
    }

    #[test]
    fn whitespace_and_renaming_variants() {
        use Duplication::*;
        assert_eq!(
            labels(&[
                "SELECT ?x WHERE {?x <http://x/p> ?y}",
                "SELECT  ?x\nWHERE { ?x <http://x/p> ?y }"
            ]),
            vec![Unique, Duplicate]
        );
        assert_eq!(
            labels(&[
                "SELECT ?x WHERE {?x <http://x/p> ?y}",
                "SELECT ?a WHERE {?a <http://x/p> ?b}"
            ]),
            vec![Unique, Duplicate]
        );
        assert_eq!(
            labels(&[
                "SELECT ?x WHERE {?x <http://x/p> ?y}",
                "SELECT ?x WHERE {?x <http://x/q> ?y}"
            ]),
            vec![Unique, Unique]
        );
    }

    #[test]
    fn groups_point_at_first_member() {
        let v = group_keys(&["a", "b", "a", "b", "c"]);
        let groups: Vec<_> = v.iter().map(|v| v.group).collect();
        assert_eq!(groups, vec![0, 1, 0, 1, 4]);
    }
}
