//! Runner for the structures whose closure operator is the identity
//! (pure set, random graph, rational order). Every substep has an
//! infinite candidate stream, so every draw is a mode-(b) draw among the
//! N_i least candidates.

use super::{schedule_slot, stage_side, RunArtifact, Tokens};
use crate::error::{ProcessError, Result};
use crate::params::{CheckLevel, ProcessParams};
use crate::schedule::OrbitSchedule;
use crate::trace::{CandidateCount, Event, Mode, TokenStore, Trace, TraceHeader};
use fraisse_core::pauto::PartialAutomorphism;
use fraisse_core::point::Point;
use fraisse_core::rado::Side;
use fraisse_core::sbnode::{SbInterval, SbNode};
use fraisse_core::structure::{RunContext, Structure, StructureKind};
use fraisse_core::util::RankSet;
use rand::Rng;
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Value-ordered wrapper for rational points.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ValOrd(SbNode);

impl PartialOrd for ValOrd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValOrd {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_value(&other.0)
    }
}

struct Runner<'a> {
    st: &'a Structure,
    params: &'a ProcessParams,
    ctx: RunContext,
    p: PartialAutomorphism,
    // pure set selection state
    dom_nat: RankSet,
    ran_nat: RankSet,
    // rational order selection state
    dom_vals: BTreeSet<ValOrd>,
    ran_vals: BTreeSet<ValOrd>,
    tokens: TokenStore,
    events: Vec<Event>,
    stage_start: Vec<usize>,
    n_used: Vec<u128>,
    stage_sizes: Vec<usize>,
}

pub(super) fn run(st: &Structure, params: &ProcessParams) -> Result<RunArtifact> {
    let mut r = Runner {
        st,
        params,
        ctx: st.run_context(params.seed),
        p: PartialAutomorphism::new(),
        dom_nat: RankSet::new(),
        ran_nat: RankSet::new(),
        dom_vals: BTreeSet::new(),
        ran_vals: BTreeSet::new(),
        tokens: TokenStore::new(),
        events: Vec::new(),
        stage_start: vec![0],
        n_used: Vec::new(),
        stage_sizes: vec![0],
    };
    let mut schedule = OrbitSchedule::new(st)?;
    for stage in 1..=params.stages {
        r.run_stage(stage, &mut schedule)?;
        r.stage_start.push(r.events.len());
        r.stage_sizes.push(r.p.len());
        if params.check == CheckLevel::Stage {
            r.validate_stage(stage)?;
        }
    }
    let header = TraceHeader {
        format: "fraisse-trace v1",
        structure: st.kind().name().to_string(),
        stages: params.stages,
        seed: params.seed,
        m_desc: format!("{:?}", params.m),
        n_desc: format!("{:?}", params.n),
    };
    Ok(RunArtifact {
        kind: st.kind(),
        trace: Trace {
            header,
            events: r.events,
            stage_start: r.stage_start,
            n_used: r.n_used,
        },
        base_pairs: Vec::new(),
        tokens: Tokens::Points(r.tokens),
        stage_sizes: r.stage_sizes,
        ctx: r.ctx,
    })
}

impl<'a> Runner<'a> {
    fn side_contains(&self, side: Side, p: &Point) -> bool {
        match side {
            Side::Ran => self.p.in_ran(p),
            Side::Dom => self.p.in_dom(p),
        }
    }

    /// The least `count` points outside the given side, in enumeration
    /// order, optionally restricted to an orbit (F, rep).
    fn select_s(
        &mut self,
        side: Side,
        count: u64,
        orbit: Option<(&BTreeSet<Point>, &Point)>,
    ) -> Result<Vec<Point>> {
        let mut out = Vec::with_capacity(count as usize);
        let mut scanned = 0u64;
        for cand in self.st.points_iter() {
            scanned += 1;
            if scanned > (1 << 24) {
                return Err(ProcessError::OrbitExhausted);
            }
            if self.side_contains(side, &cand) {
                continue;
            }
            if let Some((f, rep)) = orbit {
                if !self.st.same_type_over(&mut self.ctx, f, rep, &cand)? {
                    continue;
                }
            }
            out.push(cand);
            if out.len() as u64 == count {
                break;
            }
        }
        Ok(out)
    }

    /// Mode-(b) draw: the u-th least candidate pairable with `x` as the
    /// opposite-side point.
    fn select_candidate(&mut self, stage: u32, x: &Point, u: u128) -> Result<Point> {
        let even = stage % 2 == 0;
        match self.st.kind() {
            StructureKind::PureSet => {
                let rank = if even { &self.dom_nat } else { &self.ran_nat };
                Ok(Point::Nat(rank.nth_absent(u as u64)))
            }
            StructureKind::RandomGraph => {
                let session = self.ctx.session().expect("graph run has a session");
                let side = if even { Side::Dom } else { Side::Ran };
                let matchers = session.matchers(x.nat(), side);
                if (u as usize) < matchers.len() {
                    Ok(Point::Nat(matchers[u as usize]))
                } else {
                    Ok(Point::Nat(session.alloc_fresh(x.nat(), side)))
                }
            }
            StructureKind::RationalOrder => {
                // candidate sits among one side's values as x sits among
                // the other side's
                let (own_vals, translate_inv) = if even {
                    (&self.ran_vals, true)
                } else {
                    (&self.dom_vals, false)
                };
                let xr = ValOrd(x.rat().clone());
                let pred = own_vals.range(..&xr).next_back().map(|v| Point::Rat(v.0.clone()));
                let succ = own_vals.range(&xr..).next().map(|v| Point::Rat(v.0.clone()));
                let map = |q: Point| -> SbNode {
                    let other = if translate_inv {
                        self.p.get_inv(&q).expect("neighbor is mapped")
                    } else {
                        self.p.get(&q).expect("neighbor is mapped")
                    };
                    other.rat().clone()
                };
                let interval = SbInterval { lo: pred.map(&map), hi: succ.map(&map) };
                Ok(Point::Rat(interval.nth(u)))
            }
            _ => unreachable!("explicit runner"),
        }
    }

    fn push_pair(&mut self, stage: u32, dom_pt: Point, ran_pt: Point) {
        if let Some(session) = self.ctx.session() {
            session.push_pair(dom_pt.nat(), ran_pt.nat());
        }
        match self.st.kind() {
            StructureKind::PureSet => {
                self.dom_nat.insert(dom_pt.nat());
                self.ran_nat.insert(ran_pt.nat());
            }
            StructureKind::RationalOrder => {
                self.dom_vals.insert(ValOrd(dom_pt.rat().clone()));
                self.ran_vals.insert(ValOrd(ran_pt.rat().clone()));
            }
            _ => {}
        }
        let _ = stage;
        self.p.insert(dom_pt, ran_pt);
    }

    fn run_stage(&mut self, stage: u32, schedule: &mut OrbitSchedule) -> Result<()> {
        let side = stage_side(stage);
        let m_i = self.params.m.at(stage);
        let s_i = match schedule_slot(stage) {
            None => self.select_s(side, m_i, None)?,
            Some(slot) => {
                let entry = schedule.entry(slot, &mut self.ctx)?;
                // materialize the scheduled points for the graph session
                if let Some(session) = self.ctx.session() {
                    for f in &entry.f {
                        session.register(f.nat());
                    }
                    session.register(entry.rep.nat());
                }
                self.select_s(side, m_i, Some((&entry.f, &entry.rep)))?
            }
        };
        // trivial closure: the new points are S_i in enumeration order
        let mut xs = s_i;
        xs.sort();
        if let Some(session) = self.ctx.session() {
            for x in &xs {
                session.register(x.nat());
            }
        }
        let j = xs.len() as u128;
        let big_k = (self.p.len() as u128) + j;
        let n_i = self.params.n_at(stage, 1, big_k, j);
        self.n_used.push(n_i);
        let mut rng = self.params.stage_rng(stage);
        for (k, x) in xs.into_iter().enumerate() {
            let u: u128 = rng.gen_range(0..n_i);
            let chosen = self.select_candidate(stage, &x, u)?;
            let xt = self.tokens.token(&x);
            let ct = self.tokens.token(&chosen);
            if side == Side::Ran {
                self.push_pair(stage, chosen, x);
            } else {
                self.push_pair(stage, x, chosen);
            }
            self.events.push(Event {
                stage,
                substep: k as u32,
                x: xt,
                chosen: ct,
                mode: Mode::B,
                candidates: CandidateCount::TruncatedTo(n_i),
            });
        }
        Ok(())
    }

    /// Re-verifies the stage invariants: monotone growth, closure-closed
    /// sides (trivial here), and validity of all pairs added this stage
    /// against the whole map.
    fn validate_stage(&mut self, stage: u32) -> Result<()> {
        let lo = self.stage_start[stage as usize - 1];
        let hi = self.stage_start[stage as usize];
        let new_events: Vec<Event> = self.events[lo..hi].to_vec();
        let all_pairs: Vec<(Point, Point)> = self
            .p
            .pairs()
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        match self.st.kind() {
            StructureKind::RandomGraph => {
                for e in &new_events {
                    let (d1, r1) = e.pair();
                    let d1 = self.tokens.point(d1).clone();
                    let r1 = self.tokens.point(r1).clone();
                    for (d2, r2) in &all_pairs {
                        let lhs = self.st.adjacent(&mut self.ctx, &d1, d2);
                        let rhs = self.st.adjacent(&mut self.ctx, &r1, r2);
                        if lhs != rhs {
                            return Err(ProcessError::Invariant(format!(
                                "adjacency mismatch at stage {stage}"
                            )));
                        }
                    }
                }
            }
            StructureKind::RationalOrder => {
                let mut sorted = all_pairs.clone();
                sorted.sort_by(|x, y| x.0.rat().cmp_value(y.0.rat()));
                for w in sorted.windows(2) {
                    if w[0].1.rat().cmp_value(w[1].1.rat()) != Ordering::Less {
                        return Err(ProcessError::Invariant(format!(
                            "order violated at stage {stage}"
                        )));
                    }
                }
            }
            StructureKind::PureSet => {}
            _ => unreachable!(),
        }
        Ok(())
    }
}
