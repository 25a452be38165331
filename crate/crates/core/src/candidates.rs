//! Candidate streams: the possible images or preimages of a point under a
//! partial automorphism, and pointwise-stabilizer orbits.
//!
//! A stream is either finite with an exhaustive list, or infinite with a
//! structure-specific query that supports selecting the k-th member in
//! enumeration order. Infinite streams on the random graph consult the
//! run session (see `rado`): deep draws materialize fresh vertices there.

use crate::clopen::ClopenQuery;
use crate::error::{CoreError, Result};
use crate::point::Point;
use crate::rado::Side;
use crate::sbnode::SbInterval;
use crate::structure::RunContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Finite,
    Infinite,
}

#[derive(Debug, Clone)]
pub enum Query {
    /// All naturals outside a sorted exclusion list.
    NatAbsent { excluded: Vec<u64> },
    /// Random-graph vertices realizing an adjacency pattern. `matchers`
    /// are the already-materialized solutions in index order; deeper
    /// draws create fresh vertices mirroring `target` on `side`.
    Graph { matchers: Vec<u64>, target: u64, side: Side },
    /// Rational-order interval in tree coordinates.
    Rat(SbInterval),
    /// Per-atom status constraints in the Boolean algebra.
    Bool(ClopenQuery),
    /// Bounded scan with a membership test (user structures, orbit scans).
    Scan { members: Vec<Point> },
}

#[derive(Debug, Clone)]
pub struct Candidates {
    pub verdict: Verdict,
    finite: Vec<Point>,
    query: Option<Query>,
}

impl Candidates {
    pub fn finite(mut members: Vec<Point>) -> Self {
        members.sort();
        members.dedup();
        Candidates { verdict: Verdict::Finite, finite: members, query: None }
    }

    pub fn infinite(query: Query) -> Self {
        Candidates { verdict: Verdict::Infinite, finite: Vec::new(), query: None }.with(query)
    }

    fn with(mut self, query: Query) -> Self {
        self.query = Some(query);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.verdict == Verdict::Finite
    }

    /// Exhaustive member list of a finite stream.
    pub fn members(&self) -> &[Point] {
        debug_assert!(self.is_finite());
        &self.finite
    }

    pub fn query(&self) -> Option<&Query> {
        self.query.as_ref()
    }

    /// Number of candidates of a finite stream.
    pub fn count(&self) -> usize {
        self.finite.len()
    }

    /// The k-th candidate in enumeration order. Infinite graph streams
    /// may materialize a fresh vertex in the session.
    pub fn nth(&self, k: u128, ctx: &mut RunContext) -> Result<Point> {
        match self.verdict {
            Verdict::Finite => self
                .finite
                .get(k as usize)
                .cloned()
                .ok_or_else(|| CoreError::ForeignPoint(format!("finite stream exhausted at {k}"))),
            Verdict::Infinite => match self.query.as_ref().expect("infinite stream without query") {
                Query::NatAbsent { excluded } => Ok(Point::Nat(nth_absent_sorted(excluded, k))),
                Query::Graph { matchers, target, side } => {
                    if (k as usize) < matchers.len() {
                        return Ok(Point::Nat(matchers[k as usize]));
                    }
                    match ctx {
                        RunContext::Graph(session) => Ok(Point::Nat(session.alloc_fresh(*target, *side))),
                        RunContext::Pure => Err(CoreError::Unsupported {
                            kind: "deep random-graph draw without a run session",
                        }),
                    }
                }
                Query::Rat(interval) => Ok(Point::Rat(interval.nth(k))),
                Query::Bool(q) => Ok(Point::Clopen(q.nth(k)?)),
                Query::Scan { members } => members
                    .get(k as usize)
                    .cloned()
                    .ok_or_else(|| CoreError::ForeignPoint(format!("scan exhausted at {k}"))),
            },
        }
    }

    /// First `n` members (used by tests and the orbit schedule).
    pub fn prefix(&self, n: usize, ctx: &mut RunContext) -> Result<Vec<Point>> {
        let mut out = Vec::with_capacity(n);
        let limit = if self.is_finite() { n.min(self.finite.len()) } else { n };
        for k in 0..limit {
            out.push(self.nth(k as u128, ctx)?);
        }
        Ok(out)
    }
}

/// k-th natural absent from a sorted list.
pub fn nth_absent_sorted(excluded: &[u64], k: u128) -> u64 {
    let k = k as u64;
    let mut x = k;
    loop {
        let below = excluded.partition_point(|&e| e <= x) as u64;
        let next = k + below;
        if next == x {
            return x;
        }
        x = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_selection() {
        let ex = vec![0u64, 1, 2, 5, 6, 40];
        let mut want = Vec::new();
        let mut v = 0u64;
        while want.len() < 40 {
            if !ex.contains(&v) {
                want.push(v);
            }
            v += 1;
        }
        for (k, w) in want.iter().enumerate() {
            assert_eq!(nth_absent_sorted(&ex, k as u128), *w);
        }
        assert_eq!(nth_absent_sorted(&[], 7), 7);
    }
}
