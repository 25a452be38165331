//! Orbit, partial-path, bad-event, orbital and witness analysis of runs.

use crate::error::{ProcessError, Result};
use crate::runner::RunArtifact;
use crate::trace::Event;
use fraisse_core::pauto::PartialAutomorphism;
use fraisse_core::point::Point;
use fraisse_core::sbnode::SbNode;
use fraisse_core::structure::{RunContext, Structure};
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

// ---------------------------------------------------------------------------
// Partial paths and cycles
// ---------------------------------------------------------------------------

/// Exact partition of the touched points of a partial permutation into
/// completed cycles (including fixed points) and partial paths.
#[derive(Debug, Clone, Default)]
pub struct OrbitDecomposition {
    pub cycles: Vec<Vec<u32>>,
    pub paths: Vec<Vec<u32>>,
}

pub fn decompose(pairs: &[(u32, u32)]) -> OrbitDecomposition {
    let fwd: HashMap<u32, u32> = pairs.iter().copied().collect();
    let ran: HashSet<u32> = pairs.iter().map(|p| p.1).collect();
    debug_assert_eq!(fwd.len(), pairs.len(), "not injective on the domain");
    let mut out = OrbitDecomposition::default();
    let mut seen: HashSet<u32> = HashSet::new();
    // paths start outside the range
    for &(a, _) in pairs {
        if ran.contains(&a) || seen.contains(&a) {
            continue;
        }
        let mut path = vec![a];
        seen.insert(a);
        let mut cur = a;
        while let Some(&next) = fwd.get(&cur) {
            path.push(next);
            seen.insert(next);
            cur = next;
        }
        out.paths.push(path);
    }
    // the rest of the domain lies on cycles
    for &(a, _) in pairs {
        if seen.contains(&a) {
            continue;
        }
        let mut cycle = vec![a];
        seen.insert(a);
        let mut cur = fwd[&a];
        while cur != a {
            cycle.push(cur);
            seen.insert(cur);
            cur = fwd[&cur];
        }
        out.cycles.push(cycle);
    }
    out
}

// ---------------------------------------------------------------------------
// Bad events
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BadKind {
    PathsMerged,
    OrbitCompleted,
    FixedPoint,
}

#[derive(Debug, Clone, Copy)]
pub struct BadEventRecord {
    pub stage: u32,
    pub substep: u32,
    pub kind: BadKind,
    pub pre_paths: usize,
    pub post_paths: usize,
}

/// Incremental path/cycle bookkeeping for a growing partial permutation.
#[derive(Debug, Default)]
pub struct PathTracker {
    dom: HashSet<u32>,
    ran: HashSet<u32>,
    start_of: HashMap<u32, u32>, // current path end -> start
    end_of: HashMap<u32, u32>,   // current path start -> end
    pub path_count: usize,
    pub cycle_count: usize,
}

impl PathTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the pair a -> b; returns the bad-event kind if the extension
    /// merged paths or completed an orbit.
    pub fn add(&mut self, a: u32, b: u32) -> Option<BadKind> {
        debug_assert!(!self.dom.contains(&a) && !self.ran.contains(&b));
        let kind = if a == b {
            self.cycle_count += 1;
            Some(BadKind::FixedPoint)
        } else {
            let a_end = self.ran.contains(&a);
            let b_start = self.dom.contains(&b);
            match (a_end, b_start) {
                (true, true) => {
                    let s = self.start_of[&a];
                    if s == b {
                        // closed the path into a cycle
                        self.start_of.remove(&a);
                        self.end_of.remove(&b);
                        self.path_count -= 1;
                        self.cycle_count += 1;
                        Some(BadKind::OrbitCompleted)
                    } else {
                        let e = self.end_of[&b];
                        self.start_of.remove(&a);
                        self.end_of.remove(&b);
                        self.start_of.insert(e, s);
                        self.end_of.insert(s, e);
                        self.path_count -= 1;
                        Some(BadKind::PathsMerged)
                    }
                }
                (true, false) => {
                    let s = self.start_of.remove(&a).unwrap();
                    self.start_of.insert(b, s);
                    self.end_of.insert(s, b);
                    None
                }
                (false, true) => {
                    let e = self.end_of.remove(&b).unwrap();
                    self.end_of.insert(a, e);
                    self.start_of.insert(e, a);
                    None
                }
                (false, false) => {
                    self.start_of.insert(b, a);
                    self.end_of.insert(a, b);
                    self.path_count += 1;
                    None
                }
            }
        };
        self.dom.insert(a);
        self.ran.insert(b);
        kind
    }
}

/// Per-stage view of a replayed run.
#[derive(Debug, Clone, Default)]
pub struct ReplaySummary {
    pub bad_events: Vec<BadEventRecord>,
    /// Completed cycle count after each stage; index 0 is p_0.
    pub cycles_after: Vec<usize>,
    pub paths_after: Vec<usize>,
}

/// Replays a run's trace against the composition with `h` (given as a
/// token map; identity when absent) and records every bad event: a path
/// merge, an orbit completion, or a fixed point of p h.
pub fn detect_bad_events(
    artifact: &RunArtifact,
    h: Option<&HashMap<u32, u32>>,
) -> Result<ReplaySummary> {
    let h_inv: Option<HashMap<u32, u32>> =
        h.map(|m| m.iter().map(|(k, v)| (*v, *k)).collect());
    let compose = |d: u32| -> Result<u32> {
        match &h_inv {
            None => Ok(d),
            Some(inv) => inv.get(&d).copied().ok_or_else(|| {
                ProcessError::Invariant(format!("h does not cover domain point {d}"))
            }),
        }
    };
    let mut tracker = PathTracker::new();
    let mut summary = ReplaySummary::default();
    for &(d, r) in &artifact.base_pairs {
        tracker.add(compose(d)?, r);
    }
    summary.cycles_after.push(tracker.cycle_count);
    summary.paths_after.push(tracker.path_count);
    let stages = artifact.trace.stage_start.len() - 1;
    for stage in 1..=stages {
        for e in artifact.trace.events_of_stage(stage as u32) {
            let (d, r) = e.pair();
            let pre = tracker.path_count;
            if let Some(kind) = tracker.add(compose(d)?, r) {
                summary.bad_events.push(BadEventRecord {
                    stage: e.stage,
                    substep: e.substep,
                    kind,
                    pre_paths: pre,
                    post_paths: tracker.path_count,
                });
            }
        }
        summary.cycles_after.push(tracker.cycle_count);
        summary.paths_after.push(tracker.path_count);
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Orbit intersections
// ---------------------------------------------------------------------------

/// Number of distinct paths and cycles of p_(stage) that meet the orbit
/// of `rep` over `f`, restricted to materialized points.
pub fn orbit_intersection_count(
    st: &Structure,
    artifact: &mut RunArtifact,
    stage: u32,
    f: &BTreeSet<Point>,
    rep: &Point,
) -> Result<usize> {
    let pairs = artifact.token_pairs_through(stage);
    let dec = decompose(&pairs);
    let mut memo: HashMap<u32, bool> = HashMap::new();
    let mut count = 0usize;
    for orbit in dec.paths.iter().chain(dec.cycles.iter()) {
        let mut hit = false;
        for &t in orbit {
            let member = match memo.get(&t) {
                Some(&m) => m,
                None => {
                    let p = artifact.point_of(t);
                    let m = st.same_type_over(&mut artifact.ctx, f, rep, &p)?;
                    memo.insert(t, m);
                    m
                }
            };
            if member {
                hit = true;
                break;
            }
        }
        if hit {
            count += 1;
        }
    }
    Ok(count)
}

// ---------------------------------------------------------------------------
// Orbitals of the rational order
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Orbital {
    pub lo: SbNode,
    pub hi: SbNode,
    /// +1 increasing, -1 decreasing, 0 fixed point.
    pub parity: i8,
    /// Set when the underlying orbit is still open (or merged), so the
    /// hull is only a lower bound for the limit orbital.
    pub truncated: bool,
}

#[derive(Debug, Clone, Default)]
pub struct OrbitalDecomposition {
    pub orbitals: Vec<Orbital>,
}

/// Groups the materialized points of an order partial automorphism into
/// convex-hull orbital candidates.
pub fn orbitals(map: &PartialAutomorphism) -> OrbitalDecomposition {
    // decompose over points directly
    let mut token_of: HashMap<Point, u32> = HashMap::new();
    let mut points: Vec<Point> = Vec::new();
    let tok = |p: &Point, points: &mut Vec<Point>, token_of: &mut HashMap<Point, u32>| -> u32 {
        if let Some(&t) = token_of.get(p) {
            return t;
        }
        let t = points.len() as u32;
        points.push(p.clone());
        token_of.insert(p.clone(), t);
        t
    };
    let pairs: Vec<(u32, u32)> = map
        .pairs()
        .map(|(a, b)| {
            let ta = tok(a, &mut points, &mut token_of);
            let tb = tok(b, &mut points, &mut token_of);
            (ta, tb)
        })
        .collect();
    let dec = decompose(&pairs);
    let mut hulls: Vec<Orbital> = Vec::new();
    for (orbit, closed) in dec
        .paths
        .iter()
        .map(|p| (p, false))
        .chain(dec.cycles.iter().map(|c| (c, true)))
    {
        let vals: Vec<&SbNode> = orbit.iter().map(|&t| points[t as usize].rat()).collect();
        let lo = vals
            .iter()
            .min_by(|a, b| a.cmp_value(b))
            .unwrap();
        let hi = vals
            .iter()
            .max_by(|a, b| a.cmp_value(b))
            .unwrap();
        let parity = if orbit.len() == 1 && closed {
            0
        } else {
            // direction of motion; constant along a valid orbit
            let first = &points[orbit[0] as usize];
            let img = map.get(first).unwrap_or(first);
            match first.rat().cmp_value(img.rat()) {
                Ordering::Less => 1,
                Ordering::Greater => -1,
                Ordering::Equal => 0,
            }
        };
        hulls.push(Orbital {
            lo: (*lo).clone(),
            hi: (*hi).clone(),
            parity,
            truncated: !closed,
        });
    }
    hulls.sort_by(|a, b| a.lo.cmp_value(&b.lo));
    // merge hulls without a convex separation
    let mut merged: Vec<Orbital> = Vec::new();
    for h in hulls {
        if let Some(last) = merged.last_mut() {
            if h.lo.cmp_value(&last.hi) != Ordering::Greater {
                if h.hi.cmp_value(&last.hi) == Ordering::Greater {
                    last.hi = h.hi.clone();
                }
                debug_assert!(
                    last.parity == h.parity || last.parity == 0 || h.parity == 0,
                    "opposite parities cannot share a hull in a valid map"
                );
                if last.parity == 0 {
                    last.parity = h.parity;
                }
                last.truncated = true;
                continue;
            }
        }
        merged.push(h);
    }
    OrbitalDecomposition { orbitals: merged }
}

#[derive(Debug, Clone, Copy)]
pub struct AlternationViolation {
    pub first: usize,
    pub second: usize,
    pub parity: i8,
    /// On truncated data the counterexample is only "so far".
    pub truncated: bool,
}

/// Pairs of equal nonzero parity with no opposite-or-zero parity orbital
/// strictly between them.
pub fn alternation_check(dec: &OrbitalDecomposition) -> Vec<AlternationViolation> {
    let mut out = Vec::new();
    let n = dec.orbitals.len();
    for i in 0..n {
        let pi = dec.orbitals[i].parity;
        if pi == 0 {
            continue;
        }
        for j in (i + 1)..n {
            let pj = dec.orbitals[j].parity;
            if pj != pi {
                continue;
            }
            let separated = (i + 1..j).any(|k| dec.orbitals[k].parity != pi);
            if !separated {
                out.push(AlternationViolation {
                    first: i,
                    second: j,
                    parity: pi,
                    truncated: dec.orbitals[i].truncated || dec.orbitals[j].truncated,
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random graph witnesses
// ---------------------------------------------------------------------------

/// Least vertex below `bound` joined to all of `a`, to none of `b`, and
/// outside the materialized orbits of `a` and `b` under the map.
pub fn random_graph_witness(
    st: &Structure,
    ctx: &mut RunContext,
    map: &PartialAutomorphism,
    a: &BTreeSet<Point>,
    b: &BTreeSet<Point>,
    bound: u64,
) -> Option<Point> {
    debug_assert!(a.intersection(b).next().is_none());
    // materialized orbits of a u b
    let mut excluded: BTreeSet<Point> = BTreeSet::new();
    for p in a.iter().chain(b.iter()) {
        excluded.insert(p.clone());
        let mut cur = p.clone();
        while let Some(next) = map.get(&cur) {
            if excluded.contains(next) {
                break;
            }
            excluded.insert(next.clone());
            cur = next.clone();
        }
        let mut cur = p.clone();
        while let Some(prev) = map.get_inv(&cur) {
            if excluded.contains(prev) {
                break;
            }
            excluded.insert(prev.clone());
            cur = prev.clone();
        }
    }
    for v in 0..bound {
        let vp = Point::Nat(v);
        if excluded.contains(&vp) {
            continue;
        }
        if a.iter().all(|x| st.adjacent(ctx, x, &vp))
            && b.iter().all(|y| !st.adjacent(ctx, y, &vp))
        {
            return Some(vp);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Event-level helpers
// ---------------------------------------------------------------------------

/// Events of a trace grouped per stage (stage index, events).
pub fn stage_events(artifact: &RunArtifact) -> Vec<(u32, Vec<Event>)> {
    let stages = artifact.trace.stage_start.len() - 1;
    (1..=stages as u32)
        .map(|s| (s, artifact.trace.events_of_stage(s).to_vec()))
        .collect()
}
