//! Identifier tokenization shared by topic assignment and pattern grouping.

use std::collections::BTreeSet;

/// Splits one alphanumeric chunk at camelCase boundaries:
/// `InProceedings` → `in`, `proceedings`; `HTMLPage` → `html`, `page`.
pub fn camel_parts(chunk: &str) -> Vec<String> {
    let chars: Vec<char> = chunk.chars().collect();
    let mut parts = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let boundary = i > 0 && c.is_uppercase() && {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower)
        };
        if boundary && !current.is_empty() {
            parts.push(current.to_lowercase());
            current.clear();
        }
        current.push(c);
    }
    if !current.is_empty() {
        parts.push(current.to_lowercase());
    }
    parts
}

/// Lowercase tokens of `text`: each alphanumeric chunk as a whole plus
/// its camelCase parts.
pub fn tokens(text: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for chunk in text.split(|c: char| !c.is_alphanumeric()).filter(|c| !c.is_empty()) {
        out.insert(chunk.to_lowercase());
        out.extend(camel_parts(chunk));
    }
    out
}

/// Lowercase camelCase/underscore parts only, without whole chunks.
pub fn identifier_parts(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|c| !c.is_empty())
        .flat_map(camel_parts)
        .collect()
}

/// Jaccard index; two empty sets are identical.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}
