//! Robot versus organic traffic, per client.

use std::collections::BTreeMap;

use chrono::{DateTime, FixedOffset, TimeDelta};

use crate::ingest::{ClientIdentity, LogRecord};
use crate::labels::Behavior;

/// Thresholds of the bot heuristics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorConfig {
    pub window: TimeDelta,
    /// Requests inside one window that mark a client as a robot.
    pub rate_threshold: usize,
    pub gap_tolerance: TimeDelta,
    /// Consecutive near-equal inter-arrival gaps that mark a robot.
    pub regular_gaps: usize,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        Self {
            window: TimeDelta::seconds(60),
            rate_threshold: 30,
            gap_tolerance: TimeDelta::milliseconds(100),
            regular_gaps: 10,
        }
    }
}

/// One request of a client: when, and with which user agent.
pub type Request = (DateTime<FixedOffset>, Option<String>);

/// True if `agent` contains any pattern, case-insensitively.
pub fn is_bot_agent(agent: &str, patterns: &[String]) -> bool {
    let agent = agent.to_lowercase();
    patterns
        .iter()
        .any(|p| !p.is_empty() && agent.contains(&p.to_lowercase()))
}

/// Largest number of requests falling in any half-open window
/// `[t, t + window)`.
pub fn max_window_count(times: &[DateTime<FixedOffset>], window: TimeDelta) -> usize {
    let mut best = 0;
    let mut start = 0;
    for end in 0..times.len() {
        while times[end] - times[start] >= window {
            start += 1;
        }
        best = best.max(end - start + 1);
    }
    best
}

/// Longest run of consecutive gaps whose spread stays within `tolerance`.
pub fn longest_regular_run(times: &[DateTime<FixedOffset>], tolerance: TimeDelta) -> usize {
    let gaps: Vec<TimeDelta> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let mut best = 0;
    for start in 0..gaps.len() {
        let (mut lo, mut hi) = (gaps[start], gaps[start]);
        let mut len = 0;
        for g in &gaps[start..] {
            lo = lo.min(*g);
            hi = hi.max(*g);
            if hi - lo > tolerance {
                break;
            }
            len += 1;
        }
        best = best.max(len);
        if best >= gaps.len() - start {
            break;
        }
    }
    best
}

pub fn analyze_behavior(history: &[Request], config: &BehaviorConfig, bot_patterns: &[String]) -> Behavior {
    if history
        .iter()
        .any(|(_, ua)| ua.as_deref().is_some_and(|ua| is_bot_agent(ua, bot_patterns)))
    {
        return Behavior::Robot;
    }
    let mut times: Vec<_> = history.iter().map(|(t, _)| *t).collect();
    times.sort();
    if times.len() >= config.rate_threshold.max(1) && max_window_count(&times, config.window) >= config.rate_threshold {
        return Behavior::Robot;
    }
    if config.regular_gaps > 0 && longest_regular_run(&times, config.gap_tolerance) >= config.regular_gaps {
        return Behavior::Robot;
    }
    Behavior::Organic
}

/// Groups records by client and labels each client once.
pub fn behavior_by_client<'a, I>(
    records: I,
    config: &BehaviorConfig,
    bot_patterns: &[String],
) -> BTreeMap<ClientIdentity, Behavior>
where
    I: IntoIterator<Item = &'a LogRecord>,
{
    let mut histories: BTreeMap<ClientIdentity, Vec<Request>> = BTreeMap::new();
    for r in records {
        histories
            .entry(r.client.clone())
            .or_default()
            .push((r.timestamp, r.user_agent.clone()));
    }
    histories
        .into_iter()
        .map(|(client, h)| {
            let label = analyze_behavior(&h, config, bot_patterns);
            (client, label)
        })
        .collect()
}
