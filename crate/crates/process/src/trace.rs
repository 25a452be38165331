//! Run traces: one record per extension event, tokenized for analysis.

use fraisse_core::clopen::Clopen;
use fraisse_core::point::Point;
use fraisse_core::rado::Side;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Finite candidate set, uniform choice over all of it.
    A,
    /// Infinite candidate set, uniform choice over the N_i least.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateCount {
    Exact(u128),
    TruncatedTo(u128),
}

/// One extension: the pair (chosen -> x) on even stages (a preimage was
/// drawn), (x -> chosen) on odd stages. Points are run-local tokens.
#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub stage: u32,
    pub substep: u32,
    pub x: u32,
    pub chosen: u32,
    pub mode: Mode,
    pub candidates: CandidateCount,
}

impl Event {
    /// The pair (dom point, ran point) this event added.
    pub fn pair(&self) -> (u32, u32) {
        if self.stage % 2 == 0 {
            (self.chosen, self.x)
        } else {
            (self.x, self.chosen)
        }
    }
}

/// Token registry: run-local dense ids with printable encodings.
#[derive(Debug, Default)]
pub struct TokenStore {
    by_point: HashMap<Point, u32>,
    points: Vec<Point>,
}

impl TokenStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn token(&mut self, p: &Point) -> u32 {
        if let Some(&t) = self.by_point.get(p) {
            return t;
        }
        let t = self.points.len() as u32;
        self.points.push(p.clone());
        self.by_point.insert(p.clone(), t);
        t
    }

    pub fn point(&self, t: u32) -> &Point {
        &self.points[t as usize]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Identity store for Boolean runs: tokens are joint-refinement masks, so
/// a clopen appearing as both a domain and a range element gets one token.
#[derive(Debug)]
pub struct BoolTokens {
    /// joint mask (over dom x ran atom intersections) -> token
    by_mask: HashMap<Vec<u64>, u32>,
    /// token -> a (side, final code) witness for display
    repr: Vec<(Side, u64)>,
    dom_atoms: Vec<Clopen>,
    ran_atoms: Vec<Clopen>,
    /// joint masks of dom atoms and ran atoms
    dom_joint: Vec<Vec<u64>>,
    ran_joint: Vec<Vec<u64>>,
}

impl BoolTokens {
    /// Builds joint masks from the final paired atom bases.
    pub fn new(dom_atoms: Vec<Clopen>, ran_atoms: Vec<Clopen>) -> Self {
        // joint cells: nonzero intersections dom_i ^ ran_j
        let mut dom_joint = vec![Vec::new(); dom_atoms.len()];
        let mut ran_joint = vec![Vec::new(); ran_atoms.len()];
        let mut cell_list: Vec<(usize, usize)> = Vec::new();
        for (i, d) in dom_atoms.iter().enumerate() {
            for (j, r) in ran_atoms.iter().enumerate() {
                if !d.intersect(r).is_empty() {
                    cell_list.push((i, j));
                }
            }
        }
        let w = cell_list.len() / 64 + 1;
        for m in dom_joint.iter_mut().chain(ran_joint.iter_mut()) {
            m.resize(w, 0);
        }
        for (c, (i, j)) in cell_list.iter().enumerate() {
            dom_joint[*i][c / 64] |= 1 << (c % 64);
            ran_joint[*j][c / 64] |= 1 << (c % 64);
        }
        BoolTokens {
            by_mask: HashMap::new(),
            repr: Vec::new(),
            dom_atoms,
            ran_atoms,
            dom_joint,
            ran_joint,
        }
    }

    pub fn dom_atoms(&self) -> &[Clopen] {
        &self.dom_atoms
    }

    pub fn ran_atoms(&self) -> &[Clopen] {
        &self.ran_atoms
    }

    fn joint_mask(&self, code: u64, side: Side) -> Vec<u64> {
        let atoms = match side {
            Side::Dom => &self.dom_joint,
            Side::Ran => &self.ran_joint,
        };
        let w = atoms.first().map_or(1, Vec::len);
        let mut out = vec![0u64; w];
        for (i, m) in atoms.iter().enumerate() {
            if (code >> i) & 1 == 1 {
                for (o, x) in out.iter_mut().zip(m) {
                    *o |= x;
                }
            }
        }
        out
    }

    pub fn token(&mut self, code: u64, side: Side) -> u32 {
        let mask = self.joint_mask(code, side);
        if let Some(&t) = self.by_mask.get(&mask) {
            return t;
        }
        let t = self.repr.len() as u32;
        self.by_mask.insert(mask, t);
        self.repr.push((side, code));
        t
    }

    pub fn repr(&self, t: u32) -> (Side, u64) {
        self.repr[t as usize]
    }

    pub fn len(&self) -> usize {
        self.repr.len()
    }
}

#[derive(Debug, Clone)]
pub struct TraceHeader {
    pub format: &'static str,
    pub structure: String,
    pub stages: u32,
    pub seed: u64,
    pub m_desc: String,
    pub n_desc: String,
}

/// A full event log with enough identity information to replay it.
#[derive(Debug)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<Event>,
    /// Stage boundaries: events of stage i occupy
    /// `stage_start[i-1]..stage_start[i]`.
    pub stage_start: Vec<usize>,
    /// N_i actually used per stage (1-indexed by position).
    pub n_used: Vec<u128>,
}

impl Trace {
    pub fn events_of_stage(&self, stage: u32) -> &[Event] {
        let i = stage as usize;
        let lo = self.stage_start[i - 1];
        let hi = self.stage_start[i];
        &self.events[lo..hi]
    }
}
