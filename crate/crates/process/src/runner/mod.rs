//! Stage execution: the construction of p = U p_i.

mod boolean;
mod explicit;

use crate::error::{ProcessError, Result};
use crate::params::ProcessParams;
use crate::trace::{BoolTokens, TokenStore, Trace};
use fraisse_core::pauto::PartialAutomorphism;
use fraisse_core::point::Point;
use fraisse_core::rado::Side;
use fraisse_core::structure::{RunContext, Structure, StructureKind};
use std::collections::BTreeSet;

/// Token identity store of a finished run.
#[derive(Debug)]
pub enum Tokens {
    Points(TokenStore),
    Bool(BoolTokens),
}

/// Everything a finished run exposes: the trace (which covers every pair
/// beyond p_0), the p_0 pairs, token identities, and the run context.
#[derive(Debug)]
pub struct RunArtifact {
    pub kind: StructureKind,
    pub trace: Trace,
    pub base_pairs: Vec<(u32, u32)>,
    pub tokens: Tokens,
    /// |p_i| after each stage, index 0 = |p_0|.
    pub stage_sizes: Vec<usize>,
    pub ctx: RunContext,
}

/// The materialized final map, when affordable.
pub enum PairStore {
    Explicit(PartialAutomorphism),
}

impl RunArtifact {
    /// All pairs of p_T as tokens, in construction order.
    pub fn token_pairs(&self) -> Vec<(u32, u32)> {
        let mut out = self.base_pairs.clone();
        out.extend(self.trace.events.iter().map(|e| e.pair()));
        out
    }

    /// Pairs of p_i (the first i stages).
    pub fn token_pairs_through(&self, stage: u32) -> Vec<(u32, u32)> {
        let mut out = self.base_pairs.clone();
        let hi = self.trace.stage_start[stage as usize];
        out.extend(self.trace.events[..hi].iter().map(|e| e.pair()));
        out
    }

    pub fn point_of(&self, token: u32) -> Point {
        match &self.tokens {
            Tokens::Points(ts) => ts.point(token).clone(),
            Tokens::Bool(bt) => Point::Clopen(boolean::materialize(bt, token)),
        }
    }

    /// The final map with explicit points. Boolean runs materialize every
    /// element, so keep this to desk-scale stage counts.
    pub fn final_map(&self) -> PartialAutomorphism {
        let mut p = PartialAutomorphism::new();
        for (a, b) in self.token_pairs() {
            p.insert(self.point_of(a), self.point_of(b));
        }
        p
    }
}

/// Runs the staged construction. Starts from p_0 = id on ACL(empty),
/// then applies `params.stages` stages; deterministic in the seed.
pub fn sample(st: &Structure, params: &ProcessParams) -> Result<RunArtifact> {
    if !st.has_exact_finite_acl() {
        return Err(ProcessError::NonExactAcl(st.kind().name()));
    }
    match st.kind() {
        StructureKind::AtomlessBoolean => boolean::run(st, params),
        _ => explicit::run(st, params),
    }
}

/// Orbit size of `block_start` under the pointwise stabilizer of
/// ran(p_prev) plus `x_m`, computed by exhausting the closure. This is
/// the preimage-count constant of the tail bound; exact structures with
/// no algebraicity give 1, and in the Boolean algebra the type over the
/// closure determines the element, so the count is 1 there as well.
pub fn compute_k(
    st: &Structure,
    ctx: &mut RunContext,
    base: &BTreeSet<Point>,
    block_start: &Point,
    x_m: &Point,
) -> Result<u64> {
    let mut with_m = base.clone();
    with_m.insert(x_m.clone());
    let closure = st.acl(ctx, &with_m, 64)?;
    if !closure.exact {
        return Err(ProcessError::Invariant("compute_k needs exact closure".into()));
    }
    if !closure.points.contains(block_start) {
        return Err(ProcessError::Invariant(
            "block start escapes the closure; precondition violated".into(),
        ));
    }
    let mut count = 0u64;
    for y in &closure.points {
        if st.same_type_over(ctx, &with_m, block_start, y)? {
            count += 1;
        }
    }
    debug_assert!(count >= 1);
    Ok(count)
}

/// Stage side: even stages extend the range, odd ones the domain.
pub(crate) fn stage_side(stage: u32) -> Side {
    if stage % 2 == 0 {
        Side::Ran
    } else {
        Side::Dom
    }
}

/// Schedule slot used by stages 2, 3 mod 4, if any.
pub(crate) fn schedule_slot(stage: u32) -> Option<u64> {
    match stage % 4 {
        2 => Some(((stage - 2) / 4) as u64),
        3 => Some(((stage - 3) / 4) as u64),
        _ => None,
    }
}
