//! Synthetic inputs shared by the benchmarks.

/// `n` SELECT queries with chains of 1–6 patterns over a small predicate
/// pool, every tenth one repeated with renamed variables.
pub fn synthetic_queries(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let len = 1 + i % 6;
            let var = if i % 10 == 9 { "w" } else { "v" };
            let body: Vec<String> = (0..len)
                .map(|k| format!("?{var}{k} <http://ex.org/p{}> ?{var}{}", (i / 10 + k) % 7, k + 1))
                .collect();
            format!("SELECT * WHERE {{ {} }}", body.join(" . "))
        })
        .collect()
}
