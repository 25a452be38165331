//! Runner for the atomless Boolean algebra.
//!
//! Closure-closed sides are finite subalgebras, so the partial map after
//! each stage is a full isomorphism between two finite subalgebras. The
//! run keeps it as paired atom bases: `cells` on each side plus a
//! pairing. A stage refines the primary side's atoms by the selected
//! points, enumerates the fresh algebra elements closure-minimally, and
//! draws a preimage (or image) for each: forced with a single candidate
//! when the point lies in the closure of the part built so far, a
//! mode-(b) draw among the `N_i` least candidates otherwise.
//!
//! Elements are bitmask codes over the current atom cells; splitting a
//! cell rewrites the recorded event codes, so at the end every event is
//! expressed over the final bases.

use super::{schedule_slot, RunArtifact, Tokens};
use crate::error::{ProcessError, Result};
use crate::params::{CheckLevel, ProcessParams};
use crate::schedule::OrbitSchedule;
use crate::trace::{BoolTokens, CandidateCount, Event, Mode, Trace, TraceHeader};
use fraisse_core::clopen::{Clopen, ClopenQuery, Status};
use fraisse_core::point::Point;
use fraisse_core::rado::Side;
use fraisse_core::structure::{boolean_atoms, RunContext, Structure};
use rand::Rng;


#[derive(Debug, Clone, Copy)]
struct RawEvent {
    stage: u32,
    substep: u32,
    dom_code: u64,
    ran_code: u64,
    mode: Mode,
    candidates: CandidateCount,
}

/// One paired coarse cell of the in-flight algebras.
#[derive(Debug, Clone)]
struct KCell {
    dom_mask: u64,
    ran_mask: u64,
}

struct BoolRunner<'a> {
    st: &'a Structure,
    params: &'a ProcessParams,
    dom_cells: Vec<Clopen>,
    ran_cells: Vec<Clopen>,
    /// Index pairing of the finished stages' atom bases.
    pairing: Vec<(usize, usize)>,
    raw: Vec<RawEvent>,
    stage_start: Vec<usize>,
    n_used: Vec<u128>,
    stage_sizes: Vec<usize>,
}

fn code_status(code: u64, group: u64) -> Status {
    let meet = code & group;
    if meet == 0 {
        Status::Zero
    } else if meet == group {
        Status::Full
    } else {
        Status::Proper
    }
}

pub(super) fn run(st: &Structure, params: &ProcessParams) -> Result<RunArtifact> {
    let mut r = BoolRunner {
        st,
        params,
        dom_cells: vec![Clopen::full()],
        ran_cells: vec![Clopen::full()],
        pairing: vec![(0, 0)],
        raw: Vec::new(),
        stage_start: vec![0],
        n_used: Vec::new(),
        stage_sizes: vec![2],
    };
    let mut schedule = OrbitSchedule::new(st)?;
    let mut ctx = RunContext::Pure;
    for stage in 1..=params.stages {
        r.run_stage(stage, &mut schedule, &mut ctx)?;
        r.stage_start.push(r.raw.len());
        r.stage_sizes.push(1usize << r.pairing.len().min(62));
        if params.check == CheckLevel::Stage {
            r.validate_stage(stage)?;
        }
    }
    // tokenize against the final bases
    let dom_atoms = r.dom_cells.clone();
    let ran_atoms = r.ran_cells.clone();
    let mut tokens = BoolTokens::new(dom_atoms, ran_atoms);
    let full_dom = mask_of(r.dom_cells.len());
    let full_ran = mask_of(r.ran_cells.len());
    let t_zero = tokens.token(0, Side::Dom);
    debug_assert_eq!(t_zero, tokens.token(0, Side::Ran));
    let t_one = tokens.token(full_dom, Side::Dom);
    debug_assert_eq!(t_one, tokens.token(full_ran, Side::Ran));
    let base_pairs = vec![(t_zero, t_zero), (t_one, t_one)];
    let events: Vec<Event> = r
        .raw
        .iter()
        .map(|e| {
            let (x, chosen) = if e.stage % 2 == 0 {
                (tokens.token(e.ran_code, Side::Ran), tokens.token(e.dom_code, Side::Dom))
            } else {
                (tokens.token(e.dom_code, Side::Dom), tokens.token(e.ran_code, Side::Ran))
            };
            Event {
                stage: e.stage,
                substep: e.substep,
                x,
                chosen,
                mode: e.mode,
                candidates: e.candidates,
            }
        })
        .collect();
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
        trace: Trace { header, events, stage_start: r.stage_start, n_used: r.n_used },
        base_pairs,
        tokens: Tokens::Bool(tokens),
        stage_sizes: r.stage_sizes,
        ctx: RunContext::Pure,
    })
}

fn mask_of(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Union of the final cells selected by a token's code (for display and
/// small-scale materialization).
pub(super) fn materialize(bt: &BoolTokens, token: u32) -> Clopen {
    let (side, code) = bt.repr(token);
    let cells = match side {
        Side::Dom => bt.dom_atoms(),
        Side::Ran => bt.ran_atoms(),
    };
    let mut out = Clopen::empty();
    for (i, c) in cells.iter().enumerate() {
        if (code >> i) & 1 == 1 {
            out = out.union(c);
        }
    }
    out
}

impl<'a> BoolRunner<'a> {
    /// Cells of one side.
    fn cells(&self, side: Side) -> &Vec<Clopen> {
        match side {
            Side::Dom => &self.dom_cells,
            Side::Ran => &self.ran_cells,
        }
    }

    /// Splits cell `idx` of `side` into `keep` (stays at idx) and `rest`
    /// (appended), rewriting recorded event codes.
    fn split_cell(&mut self, side: Side, idx: usize, keep: Clopen, rest: Clopen) -> usize {
        let cells = match side {
            Side::Dom => &mut self.dom_cells,
            Side::Ran => &mut self.ran_cells,
        };
        cells[idx] = keep;
        cells.push(rest);
        let new_idx = cells.len() - 1;
        assert!(new_idx < 63, "atom budget exceeded");
        for e in self.raw.iter_mut() {
            let code = match side {
                Side::Dom => &mut e.dom_code,
                Side::Ran => &mut e.ran_code,
            };
            if (*code >> idx) & 1 == 1 {
                *code |= 1 << new_idx;
            }
        }
        new_idx
    }

    /// Depth-7 footprints of the groups, for fast membership scans.
    fn group_footprints(&self, side: Side, groups: &[u64]) -> Vec<u128> {
        groups
            .iter()
            .map(|g| {
                let mut touched = 0u128;
                for (i, c) in self.cells(side).iter().enumerate() {
                    if (g >> i) & 1 == 1 {
                        touched |= depth7_touched(c);
                    }
                }
                touched
            })
            .collect()
    }

    /// Full-precision membership (deep candidates from orbit streams).
    fn algebra_member_deep(&self, side: Side, groups: &[u64], x: &Clopen) -> bool {
        for g in groups {
            let mut piece = Clopen::empty();
            for (i, c) in self.cells(side).iter().enumerate() {
                if (g >> i) & 1 == 1 {
                    piece = piece.union(c);
                }
            }
            if x.status_in(&piece) == Status::Proper {
                return false;
            }
        }
        true
    }

    fn run_stage(
        &mut self,
        stage: u32,
        schedule: &mut OrbitSchedule,
        ctx: &mut RunContext,
    ) -> Result<()> {
        let primary = if stage % 2 == 0 { Side::Ran } else { Side::Dom };
        let secondary = if primary == Side::Ran { Side::Dom } else { Side::Ran };
        let m_i = self.params.m.at(stage);

        // pre-stage atom groups of the primary side (= atoms of the
        // closed side being extended)
        let old_groups: Vec<u64> = self
            .pairing
            .iter()
            .map(|&(d, r)| 1u64 << (if primary == Side::Ran { r } else { d }))
            .collect();

        // ---- select S_i ------------------------------------------------
        let s_i: Vec<Clopen> = match schedule_slot(stage) {
            None => {
                let footprints = self.group_footprints(primary, &old_groups);
                let mut out = Vec::new();
                for p in self.st.points_iter() {
                    let c = match p {
                        Point::Clopen(c) => c,
                        _ => unreachable!(),
                    };
                    let xmask = depth7_mask(&c);
                    let member = footprints
                        .iter()
                        .all(|&t| t & xmask == 0 || t & xmask == t);
                    if member {
                        continue;
                    }
                    out.push(c);
                    if out.len() as u64 == m_i {
                        break;
                    }
                }
                if (out.len() as u64) < m_i {
                    return Err(ProcessError::OrbitExhausted);
                }
                out
            }
            Some(slot) => {
                let entry = schedule.entry(slot, ctx)?;
                let gens: Vec<Clopen> =
                    entry.f.iter().map(|p| p.clopen().clone()).collect();
                let atoms = boolean_atoms(&gens);
                let statuses: Vec<Status> =
                    atoms.iter().map(|a| entry.rep.clopen().status_in(a)).collect();
                if statuses.iter().all(|s| *s != Status::Proper) {
                    return Err(ProcessError::Invariant(
                        "scheduled representative has a finite orbit".into(),
                    ));
                }
                let query = ClopenQuery::new(atoms, statuses);
                let mut out = Vec::new();
                let mut k = 0u128;
                while (out.len() as u64) < m_i {
                    if k > 1 << 24 {
                        return Err(ProcessError::OrbitExhausted);
                    }
                    let cand = query.nth(k)?;
                    k += 1;
                    if self.algebra_member_deep(primary, &old_groups, &cand) {
                        continue;
                    }
                    out.push(cand);
                }
                out
            }
        };

        // ---- refine the primary side by S_i ----------------------------
        // K starts as the old pairing with primary masks expanded by the
        // stage-start splits.
        let mut kcells: Vec<KCell> = self
            .pairing
            .iter()
            .map(|&(d, r)| KCell { dom_mask: 1u64 << d, ran_mask: 1u64 << r })
            .collect();
        for s in &s_i {
            let n = self.cells(primary).len();
            for idx in 0..n {
                let cell = self.cells(primary)[idx].clone();
                if s.status_in(&cell) != Status::Proper {
                    continue;
                }
                let keep = cell.intersect(s);
                let rest = cell.minus(s);
                let new_idx = self.split_cell(primary, idx, keep, rest);
                for kc in kcells.iter_mut() {
                    let mask = if primary == Side::Ran { &mut kc.ran_mask } else { &mut kc.dom_mask };
                    if (*mask >> idx) & 1 == 1 {
                        *mask |= 1 << new_idx;
                    }
                }
            }
        }

        // ---- fresh points, closure-minimally ordered -------------------
        let prim_len = self.cells(primary).len();
        assert!(prim_len < 63, "atom budget exceeded");
        let groups_now: Vec<u64> = kcells
            .iter()
            .map(|kc| if primary == Side::Ran { kc.ran_mask } else { kc.dom_mask })
            .collect();
        let full = mask_of(prim_len);
        let mut fresh: Vec<u64> = Vec::new();
        for code in 0..=full {
            if code_is_old(code, &groups_now) {
                continue;
            }
            fresh.push(code);
        }
        let xs = acl_minimal_order(&groups_now, fresh);
        let j = xs.len() as u128;
        let big_k = 1u128 << prim_len;

        // closure determines elements uniquely here, so the
        // preimage-count constant of the tail bound is 1
        let n_i = self.params.n_at(stage, 1, big_k, j);
        self.n_used.push(n_i);
        let mut rng = self.params.stage_rng(stage);

        // ---- substeps ---------------------------------------------------
        for (step, x) in xs.into_iter().enumerate() {
            let forced = kcells
                .iter()
                .all(|kc| {
                    let pm = if primary == Side::Ran { kc.ran_mask } else { kc.dom_mask };
                    code_status(x, pm) != Status::Proper
                });
            let (chosen_code, mode, count) = if forced {
                let mut v = 0u64;
                for kc in &kcells {
                    let (pm, sm) = if primary == Side::Ran {
                        (kc.ran_mask, kc.dom_mask)
                    } else {
                        (kc.dom_mask, kc.ran_mask)
                    };
                    if code_status(x, pm) == Status::Full {
                        v |= sm;
                    }
                }
                (v, Mode::A, CandidateCount::Exact(1))
            } else {
                // mode (b): draw among the N_i least candidates of the
                // per-atom status query over the secondary side
                let atoms: Vec<Clopen> = kcells
                    .iter()
                    .map(|kc| {
                        let sm = if primary == Side::Ran { kc.dom_mask } else { kc.ran_mask };
                        self.union_of(secondary, sm)
                    })
                    .collect();
                let statuses: Vec<Status> = kcells
                    .iter()
                    .map(|kc| {
                        let pm = if primary == Side::Ran { kc.ran_mask } else { kc.dom_mask };
                        code_status(x, pm)
                    })
                    .collect();
                let query = ClopenQuery::new(atoms, statuses);
                let u: u128 = rng.gen_range(0..n_i);
                let v = query.nth(u)?;
                let v_code = self.refine_by_choice(primary, secondary, &mut kcells, x, &v);
                (v_code, Mode::B, CandidateCount::TruncatedTo(n_i))
            };
            let (dom_code, ran_code) = if primary == Side::Ran {
                (chosen_code, x)
            } else {
                (x, chosen_code)
            };
            self.raw.push(RawEvent {
                stage,
                substep: step as u32,
                dom_code,
                ran_code,
                mode,
                candidates: count,
            });
        }

        // ---- stage end: K must have become the new pairing --------------
        let mut new_pairing = Vec::with_capacity(kcells.len());
        for kc in &kcells {
            if kc.dom_mask.count_ones() != 1 || kc.ran_mask.count_ones() != 1 {
                return Err(ProcessError::Invariant(format!(
                    "stage {stage}: paired refinement incomplete"
                )));
            }
            new_pairing
                .push((kc.dom_mask.trailing_zeros() as usize, kc.ran_mask.trailing_zeros() as usize));
        }
        if new_pairing.len() != self.dom_cells.len() || new_pairing.len() != self.ran_cells.len() {
            return Err(ProcessError::Invariant(format!(
                "stage {stage}: pairing does not cover the bases"
            )));
        }
        self.pairing = new_pairing;
        Ok(())
    }

    fn union_of(&self, side: Side, mask: u64) -> Clopen {
        let mut out = Clopen::empty();
        for (i, c) in self.cells(side).iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                out = out.union(c);
            }
        }
        out
    }

    /// Applies a mode-(b) choice: splits the secondary cells by `v` and
    /// the K cells by (x, v) in tandem; returns v's code.
    fn refine_by_choice(
        &mut self,
        primary: Side,
        secondary: Side,
        kcells: &mut Vec<KCell>,
        x: u64,
        v: &Clopen,
    ) -> u64 {
        let mut v_code = 0u64;
        let mut next: Vec<KCell> = Vec::with_capacity(kcells.len() + 4);
        for kc in kcells.drain(..) {
            let (pm, sm) = if primary == Side::Ran {
                (kc.ran_mask, kc.dom_mask)
            } else {
                (kc.dom_mask, kc.ran_mask)
            };
            match code_status(x, pm) {
                Status::Zero => next.push(kc),
                Status::Full => {
                    v_code |= sm;
                    next.push(kc);
                }
                Status::Proper => {
                    // split each secondary cell of this K cell by v
                    let mut in_mask = 0u64;
                    let mut out_mask = 0u64;
                    let idxs: Vec<usize> =
                        (0..63).filter(|i| (sm >> i) & 1 == 1).collect();
                    for idx in idxs {
                        let cell = self.cells(secondary)[idx].clone();
                        match v.status_in(&cell) {
                            Status::Zero => out_mask |= 1 << idx,
                            Status::Full => in_mask |= 1 << idx,
                            Status::Proper => {
                                let keep = cell.intersect(v);
                                let rest = cell.minus(v);
                                let new_idx = self.split_cell(secondary, idx, keep, rest);
                                in_mask |= 1 << idx;
                                out_mask |= 1 << new_idx;
                            }
                        }
                    }
                    debug_assert!(in_mask != 0 && out_mask != 0);
                    v_code |= in_mask;
                    let (in_p, out_p) = (x & pm, pm & !x);
                    if primary == Side::Ran {
                        next.push(KCell { dom_mask: in_mask, ran_mask: in_p });
                        next.push(KCell { dom_mask: out_mask, ran_mask: out_p });
                    } else {
                        next.push(KCell { dom_mask: in_p, ran_mask: in_mask });
                        next.push(KCell { dom_mask: out_p, ran_mask: out_mask });
                    }
                }
            }
        }
        *kcells = next;
        v_code
    }

    /// Stage re-verification: the pairing is a bijection of atom bases
    /// and every traced pair respects it.
    fn validate_stage(&self, stage: u32) -> Result<()> {
        let mut seen_d = 0u64;
        let mut seen_r = 0u64;
        for &(d, r) in &self.pairing {
            seen_d |= 1 << d;
            seen_r |= 1 << r;
        }
        if seen_d != mask_of(self.dom_cells.len()) || seen_r != mask_of(self.ran_cells.len()) {
            return Err(ProcessError::Invariant(format!(
                "stage {stage}: pairing is not a bijection"
            )));
        }
        // spot-check: every event pair maps dom code to ran code under
        // the pairing (codes are maintained under splits, so this is an
        // exact check of the growing-map property)
        for e in &self.raw {
            let mut expect = 0u64;
            for &(d, r) in &self.pairing {
                if (e.dom_code >> d) & 1 == 1 {
                    expect |= 1 << r;
                }
            }
            if expect != e.ran_code {
                return Err(ProcessError::Invariant(format!(
                    "stage {stage}: event pair violates the atom pairing"
                )));
            }
        }
        Ok(())
    }
}

fn code_is_old(code: u64, groups: &[u64]) -> bool {
    groups.iter().all(|&g| {
        let m = code & g;
        m == 0 || m == g
    })
}

/// Greedy closure-minimal order: each next point is chosen so the closure
/// of the part enumerated so far plus the point is minimal under
/// inclusion; ties go to the least code. Once the partition is discrete
/// every closure is equal and the order is plain code order.
fn acl_minimal_order(groups: &[u64], mut remaining: Vec<u64>) -> Vec<u64> {
    let mut partition: Vec<u64> = groups.to_vec();
    let mut out = Vec::with_capacity(remaining.len());
    remaining.sort_unstable();
    while !remaining.is_empty() {
        if partition.iter().all(|m| m.count_ones() == 1) {
            out.append(&mut remaining);
            break;
        }
        // distinct refinements
        let mut options: Vec<(Vec<u64>, u64)> = Vec::new();
        for &c in &remaining {
            let q = refine(&partition, c);
            match options.iter_mut().find(|(p, _)| *p == q) {
                Some((_, least)) => *least = (*least).min(c),
                None => options.push((q, c)),
            }
        }
        // keep refinements with no strictly coarser alternative present
        let minimal: Vec<usize> = (0..options.len())
            .filter(|&i| {
                !(0..options.len()).any(|k| {
                    k != i
                        && refines(&options[i].0, &options[k].0)
                        && options[i].0 != options[k].0
                })
            })
            .collect();
        let &(ref best_q, best_c) = minimal
            .iter()
            .map(|&i| &options[i])
            .min_by_key(|(_, c)| *c)
            .expect("nonempty options");
        partition = best_q.clone();
        let pos = remaining.iter().position(|&c| c == best_c).unwrap();
        remaining.remove(pos);
        out.push(best_c);
    }
    out
}

fn refine(partition: &[u64], code: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(partition.len() + 2);
    for &m in partition {
        let a = m & code;
        let b = m & !code;
        if a != 0 {
            out.push(a);
        }
        if b != 0 {
            out.push(b);
        }
    }
    out.sort_unstable();
    out
}

/// Is `a` a refinement of `b` (every cell of `a` inside a cell of `b`)?
fn refines(a: &[u64], b: &[u64]) -> bool {
    a.iter().all(|&ca| b.iter().any(|&cb| ca & !cb == 0))
}

fn depth7_mask(x: &Clopen) -> u128 {
    let mut m = 0u128;
    for (lo, hi) in x.runs_at(7) {
        for p in lo..hi {
            m |= 1 << p;
        }
    }
    m
}

/// Depth-7 positions an arbitrary-depth clopen touches.
fn depth7_touched(c: &Clopen) -> u128 {
    if c.depth() <= 7 {
        return depth7_mask(c);
    }
    let shift = c.depth() - 7;
    let mut m = 0u128;
    for &(lo, hi) in c.runs() {
        let plo = lo >> shift;
        let phi = (hi - 1) >> shift;
        for p in plo..=phi {
            m |= 1 << p;
        }
    }
    m
}
