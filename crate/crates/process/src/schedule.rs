//! The fair orbit schedule.
//!
//! Entries are pairs (F, x) of a finite point set and a representative of
//! an infinite orbit of the pointwise stabilizer of F. Candidate pairs
//! are enumerated canonically: finite sets F by increasing set code
//! (bitmask over the domain enumeration), representatives by increasing
//! enumeration index, skipping stabilized points and duplicate orbits.
//! The published sequence is the triangular dovetail over candidates
//! 0, 0 1, 0 1 2, ... so every entry recurs within one round: the entry
//! at position n reappears at a position at most 2n + 2.

use crate::error::{ProcessError, Result};
use fraisse_core::point::Point;
use fraisse_core::structure::{RunContext, Structure};
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
pub struct ScheduleEntry {
    pub f: BTreeSet<Point>,
    pub rep: Point,
}

pub struct OrbitSchedule<'a> {
    st: &'a Structure,
    candidates: Vec<ScheduleEntry>,
    /// Diagonal cursor over (set code, orbit rank) pairs.
    diag: u64,
    pos: u64,
}

const REP_SCAN: usize = 256;

impl<'a> OrbitSchedule<'a> {
    pub fn new(st: &'a Structure) -> Result<Self> {
        if !st.has_exact_finite_acl() {
            return Err(ProcessError::NonExactAcl(st.kind().name()));
        }
        Ok(OrbitSchedule { st, candidates: Vec::new(), diag: 0, pos: 0 })
    }

    /// The schedule value O_m.
    pub fn entry(&mut self, m: u64, ctx: &mut RunContext) -> Result<ScheduleEntry> {
        // triangular position -> candidate index, so candidate a first
        // appears at position a(a+1)/2 + a and recurs every round
        let mut r = 0u64;
        let mut base = 0u64;
        while base + r + 1 <= m {
            base += r + 1;
            r += 1;
        }
        let a = (m - base) as usize;
        while self.candidates.len() <= a {
            self.extend_candidates(ctx)?;
        }
        Ok(self.candidates[a].clone())
    }

    /// Walks the (set code, orbit rank) diagonal until one more valid
    /// candidate is produced.
    fn extend_candidates(&mut self, ctx: &mut RunContext) -> Result<()> {
        let mut guard = 0u32;
        loop {
            let (code, rank) = (self.pos, self.diag - self.pos);
            if self.pos == self.diag {
                self.diag += 1;
                self.pos = 0;
            } else {
                self.pos += 1;
            }
            guard += 1;
            if guard > 1 << 16 {
                return Err(ProcessError::Invariant("schedule enumeration ran away".into()));
            }
            let f: BTreeSet<Point> = (0..16)
                .filter(|b| (code >> b) & 1 == 1)
                .map(|b| self.st.point_at(b))
                .collect();
            let acl = self.st.acl(ctx, &f, 64)?;
            // distinct infinite orbits over F by least representative
            let mut reps: Vec<Point> = Vec::new();
            for cand in self.st.points_iter().take(REP_SCAN) {
                if acl.points.contains(&cand) {
                    continue;
                }
                let mut dup = false;
                for r in &reps {
                    if self.st.same_type_over(ctx, &f, r, &cand)? {
                        dup = true;
                        break;
                    }
                }
                if !dup {
                    reps.push(cand);
                    if reps.len() > rank as usize {
                        break;
                    }
                }
            }
            if let Some(rep) = reps.get(rank as usize) {
                self.candidates.push(ScheduleEntry { f: f.clone(), rep: rep.clone() });
                return Ok(());
            }
        }
    }
}
