//! Seeded multi-run harness and the statistical gates.

use crate::analysis::{detect_bad_events, BadKind};
use crate::error::Result;
use crate::params::ProcessParams;
use crate::runner::sample;
use fraisse_core::structure::Structure;

/// Per-run digest kept by the harness; artifacts are dropped run by run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub seed: u64,
    /// Stage -> did at least one bad event fire there (index 1..).
    pub bad_at_stage: Vec<bool>,
    pub bad_total: usize,
    pub cycles_after: Vec<usize>,
    pub paths_after: Vec<usize>,
    /// New finite orbits per stage exactly match completion events.
    pub orbit_event_match: bool,
}

/// Runs `count` seeded samples (seed = base_seed + index) and summarizes
/// each against h = id.
pub fn run_summaries(
    st: &Structure,
    make_params: impl Fn(u64) -> ProcessParams,
    base_seed: u64,
    count: u64,
) -> Result<Vec<RunSummary>> {
    let mut out = Vec::with_capacity(count as usize);
    for i in 0..count {
        let seed = base_seed + i;
        let params = make_params(seed);
        let stages = params.stages;
        let artifact = sample(st, &params)?;
        let replay = detect_bad_events(&artifact, None)?;
        let mut bad_at_stage = vec![false; stages as usize + 1];
        for e in &replay.bad_events {
            bad_at_stage[e.stage as usize] = true;
        }
        // exact implication: per stage, the cycle-count delta equals the
        // number of completion-kind bad events
        let mut orbit_event_match = true;
        for s in 1..=stages as usize {
            let delta = replay.cycles_after[s] - replay.cycles_after[s - 1];
            let completions = replay
                .bad_events
                .iter()
                .filter(|e| {
                    e.stage as usize == s
                        && matches!(e.kind, BadKind::OrbitCompleted | BadKind::FixedPoint)
                })
                .count();
            if delta != completions {
                orbit_event_match = false;
            }
        }
        out.push(RunSummary {
            seed,
            bad_at_stage,
            bad_total: replay.bad_events.len(),
            cycles_after: replay.cycles_after,
            paths_after: replay.paths_after,
            orbit_event_match,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct BadFreqGate {
    pub stage: u32,
    pub hits: usize,
    pub runs: usize,
    pub freq: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Empirical per-stage frequency of "at least one bad event" against the
/// tail bound 2^-i plus three binomial standard errors.
pub fn bad_event_gates(summaries: &[RunSummary], lo: u32, hi: u32) -> Vec<BadFreqGate> {
    let runs = summaries.len();
    (lo..=hi)
        .map(|stage| {
            let hits = summaries
                .iter()
                .filter(|s| *s.bad_at_stage.get(stage as usize).unwrap_or(&false))
                .count();
            let freq = hits as f64 / runs as f64;
            let p = (0.5f64).powi(stage as i32);
            let threshold = p + 3.0 * (p / runs as f64).sqrt();
            BadFreqGate { stage, hits, runs, freq, threshold, pass: freq <= threshold }
        })
        .collect()
}

/// Fraction of runs whose completed-finite-orbit count is identical at
/// the two stages.
pub fn stabilization_fraction(summaries: &[RunSummary], early: u32, late: u32) -> f64 {
    let stable = summaries
        .iter()
        .filter(|s| s.cycles_after[early as usize] == s.cycles_after[late as usize])
        .count();
    stable as f64 / summaries.len() as f64
}

/// Median over runs of paths + cycles at a stage (the intersection count
/// with the full-domain orbit).
pub fn median_intersection(summaries: &[RunSummary], stage: u32) -> usize {
    let mut counts: Vec<usize> = summaries
        .iter()
        .map(|s| s.paths_after[stage as usize] + s.cycles_after[stage as usize])
        .collect();
    counts.sort_unstable();
    counts[counts.len() / 2]
}
