//! The built-in countable structures and their operations.

use crate::candidates::{Candidates, Query};
use crate::clopen::{Clopen, ClopenQuery, Status};
use crate::error::{CoreError, Result};
use crate::pauto::PartialAutomorphism;
use crate::point::Point;
use crate::rado::{self, GraphSession, Side};
use crate::sbnode::{SbInterval, SbNode};
use crate::userdef::UserStructure;
use std::cmp::Ordering;
use std::collections::BTreeSet;

pub const DEFAULT_GEN_CAP: usize = 4096;
pub const DEFAULT_ACL_BOUND: u64 = 64;
pub const SCAN_FACTOR: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    PureSet,
    RandomGraph,
    RationalOrder,
    AtomlessBoolean,
    IntegerDistance,
    UserRelational,
}

impl StructureKind {
    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::PureSet => "pure-set",
            StructureKind::RandomGraph => "random-graph",
            StructureKind::RationalOrder => "rational-order",
            StructureKind::AtomlessBoolean => "atomless-boolean",
            StructureKind::IntegerDistance => "integer-distance",
            StructureKind::UserRelational => "user",
        }
    }
}

/// Run-local state; only the random graph needs one.
#[derive(Debug)]
pub enum RunContext {
    Pure,
    Graph(GraphSession),
}

impl RunContext {
    pub fn session(&mut self) -> Option<&mut GraphSession> {
        match self {
            RunContext::Graph(s) => Some(s),
            RunContext::Pure => None,
        }
    }
}

/// Result of the algebraic closure operator.
#[derive(Debug, Clone)]
pub struct AclResult {
    pub points: BTreeSet<Point>,
    pub exact: bool,
    pub bound_used: Option<u64>,
}

#[derive(Debug)]
pub struct Structure {
    kind: StructureKind,
    pub gen_cap: usize,
    user: Option<UserStructure>,
}

impl Structure {
    pub fn new(kind: StructureKind) -> Self {
        assert!(kind != StructureKind::UserRelational, "use Structure::user");
        Structure { kind, gen_cap: DEFAULT_GEN_CAP, user: None }
    }

    pub fn user(u: UserStructure) -> Self {
        Structure { kind: StructureKind::UserRelational, gen_cap: DEFAULT_GEN_CAP, user: Some(u) }
    }

    pub fn pure_set() -> Self {
        Self::new(StructureKind::PureSet)
    }

    pub fn random_graph() -> Self {
        Self::new(StructureKind::RandomGraph)
    }

    pub fn rational_order() -> Self {
        Self::new(StructureKind::RationalOrder)
    }

    pub fn atomless_boolean() -> Self {
        Self::new(StructureKind::AtomlessBoolean)
    }

    pub fn integer_distance() -> Self {
        Self::new(StructureKind::IntegerDistance)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "pure-set" => Some(Self::pure_set()),
            "random-graph" => Some(Self::random_graph()),
            "rational-order" => Some(Self::rational_order()),
            "atomless-boolean" => Some(Self::atomless_boolean()),
            "integer-distance" => Some(Self::integer_distance()),
            _ => None,
        }
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn user_def(&self) -> Option<&UserStructure> {
        self.user.as_ref()
    }

    /// Structures whose algebraic closure operator has an exact rule and
    /// is finite on finite sets; the staged process requires this.
    pub fn has_exact_finite_acl(&self) -> bool {
        matches!(
            self.kind,
            StructureKind::PureSet
                | StructureKind::RandomGraph
                | StructureKind::RationalOrder
                | StructureKind::AtomlessBoolean
        )
    }

    /// Fresh run context for this structure, split from a seed.
    pub fn run_context(&self, seed: u64) -> RunContext {
        match self.kind {
            StructureKind::RandomGraph => RunContext::Graph(GraphSession::new(seed)),
            _ => RunContext::Pure,
        }
    }

    // -- enumeration --------------------------------------------------

    /// Points in enumeration order (for scans; not meant to be exhausted).
    pub fn points_iter(&self) -> Box<dyn Iterator<Item = Point> + '_> {
        match self.kind {
            StructureKind::RationalOrder => {
                Box::new((0u64..).map(|i| Point::Rat(SbNode::from_index(i))))
            }
            StructureKind::AtomlessBoolean => Box::new(ClopenEnum::new().map(Point::Clopen)),
            _ => Box::new((0u64..).map(Point::Nat)),
        }
    }

    pub fn point_at(&self, index: u64) -> Point {
        match self.kind {
            StructureKind::RationalOrder => Point::Rat(SbNode::from_index(index)),
            StructureKind::AtomlessBoolean => self
                .points_iter()
                .nth(index as usize)
                .expect("enumeration is total"),
            _ => Point::Nat(index),
        }
    }

    /// Integer value behind an integer-line point.
    pub fn int_value(&self, p: &Point) -> i64 {
        debug_assert_eq!(self.kind, StructureKind::IntegerDistance);
        let i = p.nat();
        if i % 2 == 1 {
            ((i + 1) / 2) as i64
        } else {
            -((i / 2) as i64)
        }
    }

    pub fn int_point(&self, v: i64) -> Point {
        debug_assert_eq!(self.kind, StructureKind::IntegerDistance);
        if v > 0 {
            Point::Nat((2 * v - 1) as u64)
        } else {
            Point::Nat((-2 * v) as u64)
        }
    }

    // -- generated substructures and closure ---------------------------

    /// Closure of `s` under the structure's functions; for relational
    /// structures this is `s` itself.
    pub fn generated_substructure(&self, s: &BTreeSet<Point>) -> Result<BTreeSet<Point>> {
        match self.kind {
            StructureKind::AtomlessBoolean => {
                let gens: Vec<Clopen> = s.iter().map(|p| p.clopen().clone()).collect();
                let atoms = boolean_atoms(&gens);
                if atoms.len() >= 63 || (1usize << atoms.len()) > self.gen_cap {
                    return Err(CoreError::CapExceeded { cap: self.gen_cap });
                }
                Ok(boolean_algebra_elements(&atoms).into_iter().map(Point::Clopen).collect())
            }
            _ => Ok(s.clone()),
        }
    }

    // -- validity ------------------------------------------------------

    /// Is the pair list a partial automorphism? For the built-in
    /// ultrahomogeneous structures this is the induced-isomorphism check
    /// on generated substructures, which is equivalent to extendability.
    pub fn is_partial_automorphism(
        &self,
        ctx: &mut RunContext,
        pairs: &[(Point, Point)],
    ) -> bool {
        // injectivity on both sides
        let mut dom = BTreeSet::new();
        let mut ran = BTreeSet::new();
        for (a, b) in pairs {
            if !dom.insert(a.clone()) || !ran.insert(b.clone()) {
                return false;
            }
        }
        match self.kind {
            StructureKind::PureSet => true,
            StructureKind::RandomGraph => {
                for i in 0..pairs.len() {
                    for j in (i + 1)..pairs.len() {
                        let (a1, b1) = (&pairs[i].0, &pairs[i].1);
                        let (a2, b2) = (&pairs[j].0, &pairs[j].1);
                        if self.adjacent(ctx, a1, a2) != self.adjacent(ctx, b1, b2) {
                            return false;
                        }
                    }
                }
                true
            }
            StructureKind::RationalOrder => {
                let mut sorted: Vec<&(Point, Point)> = pairs.iter().collect();
                sorted.sort_by(|x, y| x.0.rat().cmp_value(y.0.rat()));
                sorted
                    .windows(2)
                    .all(|w| w[0].1.rat().cmp_value(w[1].1.rat()) == Ordering::Less)
            }
            StructureKind::IntegerDistance => {
                for i in 0..pairs.len() {
                    for j in (i + 1)..pairs.len() {
                        let d1 = self.int_value(&pairs[i].0) - self.int_value(&pairs[j].0);
                        let d2 = self.int_value(&pairs[i].1) - self.int_value(&pairs[j].1);
                        if d1.abs() != d2.abs() {
                            return false;
                        }
                    }
                }
                true
            }
            StructureKind::AtomlessBoolean => boolean_pairs_valid(pairs),
            StructureKind::UserRelational => {
                let u = self.user.as_ref().unwrap();
                let dom_pts: Vec<u64> = pairs.iter().map(|p| p.0.nat()).collect();
                let ran_pts: Vec<u64> = pairs.iter().map(|p| p.1.nat()).collect();
                u.tuples_agree(&dom_pts, &ran_pts)
            }
        }
    }

    pub fn adjacent(&self, ctx: &mut RunContext, a: &Point, b: &Point) -> bool {
        debug_assert_eq!(self.kind, StructureKind::RandomGraph);
        match ctx {
            RunContext::Graph(s) => s.adjacent(a.nat(), b.nat()),
            RunContext::Pure => rado::base_adjacent(a.nat(), b.nat()),
        }
    }

    // -- types and orbits ----------------------------------------------

    /// Do `b` and `b2` realize the same quantifier-free type over the
    /// substructure generated by `s`?
    pub fn same_type_over(
        &self,
        ctx: &mut RunContext,
        s: &BTreeSet<Point>,
        b: &Point,
        b2: &Point,
    ) -> Result<bool> {
        if b == b2 {
            return Ok(true);
        }
        if s.contains(b) || s.contains(b2) {
            return Ok(false);
        }
        match self.kind {
            StructureKind::PureSet => Ok(true),
            StructureKind::RandomGraph => Ok(s
                .iter()
                .all(|v| self.adjacent(ctx, b, v) == self.adjacent(ctx, b2, v))),
            StructureKind::RationalOrder => Ok(s.iter().all(|v| {
                b.rat().cmp_value(v.rat()) == b2.rat().cmp_value(v.rat())
            })),
            StructureKind::IntegerDistance => Ok(s.iter().all(|v| {
                (self.int_value(b) - self.int_value(v)).abs()
                    == (self.int_value(b2) - self.int_value(v)).abs()
            })),
            StructureKind::AtomlessBoolean => {
                let gens: Vec<Clopen> = s.iter().map(|p| p.clopen().clone()).collect();
                let atoms = boolean_atoms(&gens);
                Ok(atoms
                    .iter()
                    .all(|a| b.clopen().status_in(a) == b2.clopen().status_in(a)))
            }
            StructureKind::UserRelational => {
                let mut dom: Vec<u64> = s.iter().map(|p| p.nat()).collect();
                let mut ran = dom.clone();
                dom.push(b.nat());
                ran.push(b2.nat());
                Ok(self.user.as_ref().unwrap().tuples_agree(&dom, &ran))
            }
        }
    }

    /// Group-theoretic algebraic closure with per-structure exact rules
    /// and a bounded generic fallback.
    pub fn acl(&self, ctx: &mut RunContext, s: &BTreeSet<Point>, bound: u64) -> Result<AclResult> {
        match self.kind {
            StructureKind::PureSet | StructureKind::RandomGraph | StructureKind::RationalOrder => {
                Ok(AclResult { points: s.clone(), exact: true, bound_used: None })
            }
            StructureKind::AtomlessBoolean => Ok(AclResult {
                points: self.generated_substructure(s)?,
                exact: true,
                bound_used: None,
            }),
            StructureKind::IntegerDistance => {
                if s.is_empty() {
                    return Ok(AclResult { points: BTreeSet::new(), exact: true, bound_used: None });
                }
                // the closure of any nonempty set is the whole line;
                // report a bound-truncated superset, flagged inexact
                let mut points = s.clone();
                for i in 0..bound {
                    points.insert(Point::Nat(i));
                }
                Ok(AclResult { points, exact: false, bound_used: Some(bound) })
            }
            StructureKind::UserRelational => self.acl_fallback(ctx, s, bound),
        }
    }

    /// Generic fallback: a point is kept when fewer than `bound`
    /// same-type witnesses exist among the first `10 * bound` points.
    /// Never exact; the verdict is advisory.
    fn acl_fallback(&self, ctx: &mut RunContext, s: &BTreeSet<Point>, bound: u64) -> Result<AclResult> {
        let scan = bound * SCAN_FACTOR;
        let universe: Vec<Point> = self.points_iter().take(scan as usize).collect();
        let mut points: BTreeSet<Point> = self.generated_substructure(s)?;
        for x in &universe {
            if points.contains(x) {
                continue;
            }
            let mut witnesses = 0u64;
            for b2 in &universe {
                if self.same_type_over(ctx, s, x, b2)? {
                    witnesses += 1;
                    if witnesses >= bound {
                        break;
                    }
                }
            }
            if witnesses < bound {
                points.insert(x.clone());
            }
        }
        Ok(AclResult { points, exact: false, bound_used: Some(bound) })
    }

    /// Stream of the orbit of `x` under the pointwise stabilizer of `f`,
    /// in enumeration order, with a finiteness verdict.
    pub fn stabilizer_orbit_stream(
        &self,
        ctx: &mut RunContext,
        f: &BTreeSet<Point>,
        x: &Point,
    ) -> Result<Candidates> {
        match self.kind {
            StructureKind::PureSet => {
                if f.contains(x) {
                    Ok(Candidates::finite(vec![x.clone()]))
                } else {
                    let excluded: Vec<u64> = f.iter().map(|p| p.nat()).collect();
                    Ok(Candidates::infinite(Query::NatAbsent { excluded }))
                }
            }
            StructureKind::RandomGraph => {
                if f.contains(x) {
                    return Ok(Candidates::finite(vec![x.clone()]));
                }
                let fs: Vec<u64> = f.iter().map(|p| p.nat()).collect();
                let members = self.scan_graph_type(ctx, &fs, x.nat(), 1 << 22)?;
                Ok(Candidates::infinite(Query::Scan { members }))
            }
            StructureKind::RationalOrder => {
                if f.contains(x) {
                    return Ok(Candidates::finite(vec![x.clone()]));
                }
                Ok(Candidates::infinite(Query::Rat(neighbors_interval(f, x))))
            }
            StructureKind::AtomlessBoolean => {
                let algebra = self.generated_substructure(f)?;
                if algebra.contains(x) {
                    return Ok(Candidates::finite(vec![x.clone()]));
                }
                let gens: Vec<Clopen> = f.iter().map(|p| p.clopen().clone()).collect();
                let atoms = boolean_atoms(&gens);
                let statuses: Vec<Status> =
                    atoms.iter().map(|a| x.clopen().status_in(a)).collect();
                Ok(Candidates::infinite(Query::Bool(ClopenQuery::new(atoms, statuses))))
            }
            StructureKind::IntegerDistance => {
                if f.is_empty() {
                    return Ok(Candidates::infinite(Query::NatAbsent { excluded: vec![] }));
                }
                // stabilizer of a single point s is {id, reflection at s}
                let mut orbit = vec![x.clone()];
                if f.len() == 1 {
                    let s = self.int_value(f.iter().next().unwrap());
                    let reflected = 2 * s - self.int_value(x);
                    orbit.push(self.int_point(reflected));
                }
                Ok(Candidates::finite(orbit))
            }
            StructureKind::UserRelational => {
                // bounded scan; verdict stays "infinite" only as a stream
                // of scanned members, never trusted as exact
                let scan = DEFAULT_ACL_BOUND * SCAN_FACTOR;
                let mut members = Vec::new();
                for cand in self.points_iter().take(scan as usize) {
                    if self.same_type_over(ctx, f, x, &cand)? {
                        members.push(cand);
                    }
                }
                Ok(Candidates::infinite(Query::Scan { members }))
            }
        }
    }

    /// Materialized random-graph vertices realizing the type of `x`
    /// over `f` (base prefix scan plus session vertices).
    fn scan_graph_type(
        &self,
        ctx: &mut RunContext,
        f: &[u64],
        x: u64,
        base_scan: u64,
    ) -> Result<Vec<Point>> {
        let pattern: Vec<bool> = match ctx {
            RunContext::Graph(s) => f.iter().map(|&v| s.adjacent(x, v)).collect(),
            RunContext::Pure => f.iter().map(|&v| rado::base_adjacent(x, v)).collect(),
        };
        let mut members = Vec::new();
        for v in 0..base_scan {
            if f.contains(&v) {
                continue;
            }
            let ok = match ctx {
                RunContext::Graph(s) => f.iter().zip(&pattern).all(|(&w, &b)| s.adjacent(v, w) == b),
                RunContext::Pure => {
                    f.iter().zip(&pattern).all(|(&w, &b)| rado::base_adjacent(v, w) == b)
                }
            };
            if ok {
                members.push(Point::Nat(v));
            }
        }
        Ok(members)
    }

    /// Possible images of `x` under extensions of `p`, with verdict.
    pub fn possible_images(
        &self,
        ctx: &mut RunContext,
        p: &PartialAutomorphism,
        x: &Point,
    ) -> Result<Candidates> {
        debug_assert!(!p.in_dom(x));
        match self.kind {
            StructureKind::PureSet => {
                let excluded: Vec<u64> = p.ran().map(|q| q.nat()).collect();
                Ok(Candidates::infinite(Query::NatAbsent { excluded }))
            }
            StructureKind::RandomGraph => {
                let (matchers, target) = match ctx {
                    RunContext::Graph(s) => {
                        let m = s.matchers(x.nat(), Side::Ran);
                        (m, x.nat())
                    }
                    RunContext::Pure => {
                        let m = self.graph_matchers_scan(ctx, p, x, false, 1 << 22)?;
                        (m, x.nat())
                    }
                };
                Ok(Candidates::infinite(Query::Graph { matchers, target, side: Side::Ran }))
            }
            StructureKind::RationalOrder => {
                let interval = image_interval(p, x);
                Ok(Candidates::infinite(Query::Rat(interval)))
            }
            StructureKind::AtomlessBoolean => self.boolean_images(p, x),
            StructureKind::IntegerDistance => Ok(self.integer_images(p, x)),
            StructureKind::UserRelational => {
                let scan = DEFAULT_ACL_BOUND * SCAN_FACTOR;
                let mut members = Vec::new();
                for cand in self.points_iter().take(scan as usize) {
                    if p.in_ran(&cand) {
                        continue;
                    }
                    let mut pairs: Vec<(Point, Point)> =
                        p.pairs().map(|(a, b)| (a.clone(), b.clone())).collect();
                    pairs.push((x.clone(), cand.clone()));
                    if self.is_partial_automorphism(ctx, &pairs) {
                        members.push(cand);
                    }
                }
                Ok(Candidates::infinite(Query::Scan { members }))
            }
        }
    }

    /// Possible preimages of `y`: the mirror of `possible_images`.
    pub fn possible_preimages(
        &self,
        ctx: &mut RunContext,
        p: &PartialAutomorphism,
        y: &Point,
    ) -> Result<Candidates> {
        debug_assert!(!p.in_ran(y));
        match self.kind {
            StructureKind::RandomGraph => {
                let matchers = match ctx {
                    RunContext::Graph(s) => s.matchers(y.nat(), Side::Dom),
                    RunContext::Pure => self.graph_matchers_scan(ctx, p, y, true, 1 << 22)?,
                };
                Ok(Candidates::infinite(Query::Graph {
                    matchers,
                    target: y.nat(),
                    side: Side::Dom,
                }))
            }
            _ => self.possible_images(ctx, &p.inverse(), y),
        }
    }

    /// Scan-based matcher computation for sessionless graph queries.
    fn graph_matchers_scan(
        &self,
        ctx: &mut RunContext,
        p: &PartialAutomorphism,
        target: &Point,
        preimage: bool,
        scan: u64,
    ) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        let pairs: Vec<(u64, u64)> = p.pairs().map(|(a, b)| (a.nat(), b.nat())).collect();
        'outer: for v in 0..scan {
            for &(d, r) in &pairs {
                if preimage {
                    if v == d {
                        continue 'outer;
                    }
                    if self.adjacent(ctx, &Point::Nat(v), &Point::Nat(d))
                        != self.adjacent(ctx, &Point::Nat(target.nat()), &Point::Nat(r))
                    {
                        continue 'outer;
                    }
                } else {
                    if v == r {
                        continue 'outer;
                    }
                    if self.adjacent(ctx, &Point::Nat(v), &Point::Nat(r))
                        != self.adjacent(ctx, &Point::Nat(target.nat()), &Point::Nat(d))
                    {
                        continue 'outer;
                    }
                }
            }
            out.push(v);
        }
        Ok(out)
    }

    fn boolean_images(&self, p: &PartialAutomorphism, x: &Point) -> Result<Candidates> {
        let (dom_atoms, ran_atoms) = boolean_paired_atoms(p)?;
        let xc = x.clopen();
        let statuses: Vec<Status> = dom_atoms.iter().map(|a| xc.status_in(a)).collect();
        if statuses.iter().all(|s| *s != Status::Proper) {
            // x lies in the generated subalgebra: image forced
            let mut img = Clopen::empty();
            for (a, s) in ran_atoms.iter().zip(&statuses) {
                if *s == Status::Full {
                    img = img.union(a);
                }
            }
            return Ok(Candidates::finite(vec![Point::Clopen(img)]));
        }
        Ok(Candidates::infinite(Query::Bool(ClopenQuery::new(ran_atoms, statuses))))
    }

    fn integer_images(&self, p: &PartialAutomorphism, x: &Point) -> Candidates {
        if p.is_empty() {
            return Candidates::infinite(Query::NatAbsent { excluded: vec![] });
        }
        let pairs: Vec<(i64, i64)> =
            p.pairs().map(|(a, b)| (self.int_value(a), self.int_value(b))).collect();
        let (d0, r0) = pairs[0];
        let xv = self.int_value(x);
        let mut out: Vec<Point> = Vec::new();
        // translation candidate
        let t = r0 - d0;
        if pairs.iter().all(|&(d, r)| r == d + t) {
            out.push(self.int_point(xv + t));
        }
        // reflection candidate
        let c = r0 + d0;
        if pairs.iter().all(|&(d, r)| r == c - d) {
            let y = c - xv;
            let yp = self.int_point(y);
            if !out.contains(&yp) {
                out.push(yp);
            }
        }
        out.retain(|y| !p.in_ran(y));
        Candidates::finite(out)
    }

    /// Extends `p` with a new fixed point.
    pub fn extend_with_fixed_point(
        &self,
        ctx: &mut RunContext,
        p: &PartialAutomorphism,
    ) -> Result<PartialAutomorphism> {
        let mut q = p.clone();
        match self.kind {
            StructureKind::PureSet => {
                let mut excluded: Vec<u64> =
                    p.dom().chain(p.ran()).map(|v| v.nat()).collect();
                excluded.sort_unstable();
                excluded.dedup();
                let x = Point::Nat(crate::candidates::nth_absent_sorted(&excluded, 0));
                q.insert(x.clone(), x);
                Ok(q)
            }
            StructureKind::RationalOrder => {
                // least enumeration point greater than everything touched
                let max = p
                    .dom()
                    .chain(p.ran())
                    .max_by(|a, b| a.rat().cmp_value(b.rat()))
                    .cloned();
                let interval = SbInterval { lo: max.map(|m| m.rat().clone()), hi: None };
                let x = Point::Rat(interval.nth(0));
                q.insert(x.clone(), x);
                Ok(q)
            }
            StructureKind::RandomGraph => {
                let touched: Vec<u64> = {
                    let mut v: Vec<u64> = p.dom().chain(p.ran()).map(|w| w.nat()).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                };
                let x = match ctx {
                    RunContext::Pure => rado::base_common_neighbor(&touched, &touched, 1 << 22)
                        .ok_or(CoreError::Unsupported { kind: "no common neighbor in scan range" })?,
                    RunContext::Graph(s) => {
                        let mut found = None;
                        for v in 0..(1u64 << 22) {
                            if touched.contains(&v) {
                                continue;
                            }
                            if touched.iter().all(|&w| s.adjacent(v, w)) {
                                found = Some(v);
                                break;
                            }
                        }
                        found.ok_or(CoreError::Unsupported {
                            kind: "no common neighbor in scan range",
                        })?
                    }
                };
                let x = Point::Nat(x);
                q.insert(x.clone(), x);
                Ok(q)
            }
            StructureKind::AtomlessBoolean => {
                // split every atom of the touched subalgebra; the union of
                // lower halves has proper status everywhere, so adding it
                // as a fixed point stays an isomorphism
                let touched: BTreeSet<Point> = p.dom().chain(p.ran()).cloned().collect();
                let gens: Vec<Clopen> = touched.iter().map(|t| t.clopen().clone()).collect();
                let atoms = boolean_atoms(&gens);
                let mut x = Clopen::empty();
                for a in &atoms {
                    x = x.union(&a.split_piece()?);
                }
                let x = Point::Clopen(x);
                debug_assert!(!p.in_dom(&x) && !p.in_ran(&x));
                q.insert(x.clone(), x);
                debug_assert!({
                    let pairs: Vec<(Point, Point)> =
                        q.pairs().map(|(a, b)| (a.clone(), b.clone())).collect();
                    self.is_partial_automorphism(&mut RunContext::Pure, &pairs)
                });
                Ok(q)
            }
            _ => Err(CoreError::Unsupported { kind: self.kind.name() }),
        }
    }
}

// ---------------------------------------------------------------------------
// Boolean algebra helpers
// ---------------------------------------------------------------------------

/// Atoms of the subalgebra generated by `gens` (with 0 and 1).
pub fn boolean_atoms(gens: &[Clopen]) -> Vec<Clopen> {
    let mut cells = vec![Clopen::full()];
    for g in gens {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for c in cells {
            let a = c.intersect(g);
            let b = c.minus(g);
            if !a.is_empty() {
                next.push(a);
            }
            if !b.is_empty() {
                next.push(b);
            }
        }
        cells = next;
    }
    cells.sort_by(|a, b| a.cmp_enum(b));
    cells
}

/// All unions of atoms (the full finite subalgebra).
pub fn boolean_algebra_elements(atoms: &[Clopen]) -> Vec<Clopen> {
    let n = atoms.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u64..(1u64 << n) {
        let mut e = Clopen::empty();
        for (i, a) in atoms.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                e = e.union(a);
            }
        }
        out.push(e);
    }
    out.sort_by(|a, b| a.cmp_enum(b));
    out.dedup();
    out
}

/// Simultaneous refinement of dom- and ran-side partitions along the
/// pairs; `None` when the map is not an isomorphism of the generated
/// subalgebras.
fn boolean_paired_refinement(pairs: &[(Point, Point)]) -> Option<(Vec<Clopen>, Vec<Clopen>)> {
    let mut cells = vec![(Clopen::full(), Clopen::full())];
    for (u, v) in pairs {
        let (uc, vc) = (u.clopen(), v.clopen());
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (cd, cr) in cells {
            let din = cd.intersect(uc);
            let rin = cr.intersect(vc);
            if din.is_empty() != rin.is_empty() {
                return None;
            }
            let dout = cd.minus(uc);
            let rout = cr.minus(vc);
            if dout.is_empty() != rout.is_empty() {
                return None;
            }
            if !din.is_empty() {
                next.push((din, rin));
            }
            if !dout.is_empty() {
                next.push((dout, rout));
            }
        }
        cells = next;
    }
    Some(cells.into_iter().unzip())
}

fn boolean_pairs_valid(pairs: &[(Point, Point)]) -> bool {
    boolean_paired_refinement(pairs).is_some()
}

/// Paired atom bases of dom- and ran-side generated subalgebras of a
/// valid partial automorphism.
pub fn boolean_paired_atoms(p: &PartialAutomorphism) -> Result<(Vec<Clopen>, Vec<Clopen>)> {
    let pairs: Vec<(Point, Point)> = p.pairs().map(|(a, b)| (a.clone(), b.clone())).collect();
    boolean_paired_refinement(&pairs)
        .ok_or(CoreError::ForeignPoint("pairs are not a partial automorphism".into()))
}

// ---------------------------------------------------------------------------
// Rational order helpers
// ---------------------------------------------------------------------------

/// The open interval between the value-neighbors of `x` within `f`.
fn neighbors_interval(f: &BTreeSet<Point>, x: &Point) -> SbInterval {
    let xr = x.rat();
    let mut lo: Option<SbNode> = None;
    let mut hi: Option<SbNode> = None;
    for s in f {
        let sr = s.rat();
        match sr.cmp_value(xr) {
            Ordering::Less => {
                if lo.as_ref().map_or(true, |l| l.cmp_value(sr) == Ordering::Less) {
                    lo = Some(sr.clone());
                }
            }
            Ordering::Greater => {
                if hi.as_ref().map_or(true, |h| sr.cmp_value(h) == Ordering::Less) {
                    hi = Some(sr.clone());
                }
            }
            Ordering::Equal => {}
        }
    }
    SbInterval { lo, hi }
}

/// Interval of valid images of `x` under extensions of order-preserving `p`.
fn image_interval(p: &PartialAutomorphism, x: &Point) -> SbInterval {
    let xr = x.rat();
    let mut lo: Option<&Point> = None;
    let mut hi: Option<&Point> = None;
    for (a, _) in p.pairs() {
        match a.rat().cmp_value(xr) {
            Ordering::Less => {
                if lo.map_or(true, |l| l.rat().cmp_value(a.rat()) == Ordering::Less) {
                    lo = Some(a);
                }
            }
            Ordering::Greater => {
                if hi.map_or(true, |h| a.rat().cmp_value(h.rat()) == Ordering::Less) {
                    hi = Some(a);
                }
            }
            Ordering::Equal => unreachable!("x in dom"),
        }
    }
    SbInterval {
        lo: lo.map(|a| p.get(a).unwrap().rat().clone()),
        hi: hi.map(|a| p.get(a).unwrap().rat().clone()),
    }
}

// ---------------------------------------------------------------------------
// Boolean element enumeration
// ---------------------------------------------------------------------------

/// Elements in (canonical depth, mask) order. Yields the two depth-0
/// elements, then for each depth the masks of exactly that canonical
/// depth in ascending integer order. Practical scans never leave depth 7.
pub struct ClopenEnum {
    depth: u32,
    mask: u128,
}

impl ClopenEnum {
    pub fn new() -> Self {
        ClopenEnum { depth: 0, mask: 0 }
    }

    fn mask_to_clopen(depth: u32, mask: u128) -> Clopen {
        let mut runs = Vec::new();
        let n = 1u32 << depth;
        let mut p = 0u32;
        while p < n {
            if (mask >> p) & 1 == 1 {
                let start = p;
                while p < n && (mask >> p) & 1 == 1 {
                    p += 1;
                }
                runs.push((start as u128, p as u128));
            } else {
                p += 1;
            }
        }
        Clopen::from_runs(depth, runs).expect("depth bounded by iteration")
    }

    fn reducible(depth: u32, mask: u128) -> bool {
        if depth == 0 {
            return false;
        }
        let n = 1u32 << depth;
        (0..n / 2).all(|i| ((mask >> (2 * i)) & 1) == ((mask >> (2 * i + 1)) & 1))
    }
}

impl Default for ClopenEnum {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for ClopenEnum {
    type Item = Clopen;

    fn next(&mut self) -> Option<Clopen> {
        loop {
            if self.depth == 0 {
                let out = if self.mask == 0 { Clopen::empty() } else { Clopen::full() };
                if self.mask == 1 {
                    self.depth = 1;
                    self.mask = 0;
                } else {
                    self.mask = 1;
                }
                return Some(out);
            }
            if self.depth >= 7 {
                return None; // 2^128 elements of depth 7 remain; not scanned
            }
            let n = 1u32 << self.depth;
            let limit = if n >= 128 { u128::MAX } else { (1u128 << n) - 1 };
            while self.mask <= limit {
                let m = self.mask;
                self.mask += 1;
                if !Self::reducible(self.depth, m) {
                    return Some(Self::mask_to_clopen(self.depth, m));
                }
                if self.mask == 0 {
                    break; // overflow guard
                }
            }
            self.depth += 1;
            self.mask = 0;
        }
    }
}
