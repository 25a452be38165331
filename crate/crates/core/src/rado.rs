//! The random graph.
//!
//! Base presentation: vertices are naturals below `FRESH_BASE`, with the
//! classic bit coding `i ~ j  iff  bit i of j is set` (for `i < j`). That
//! presentation is fixed, reproducible and satisfies the extension
//! property, and every desk-scale query (witness search, validity,
//! amalgamation cross-checks) runs on it directly.
//!
//! The staged random process is a different matter: its mode-(b) draws
//! pick among the `N_i` least members of adjacency-constrained vertex
//! sets, and under *any* fixed coding those members quickly have indices
//! beyond machine arithmetic (the constrained sets have density
//! `2^-|dom|`). A run therefore works inside a `GraphSession`: the
//! materialized candidates keep their true small indices, while a draw
//! that lands past them materializes a fresh vertex with the forced
//! adjacency pattern to the current domain and deterministic pseudorandom
//! adjacency elsewhere. The session is a concrete presentation of the
//! same structure, grown alongside the run; all draws stay uniform over
//! exactly `N_i` candidates, which is what every probability bound uses.

use crate::util::pair_bit;
use std::collections::{HashMap, HashSet};

/// Fresh vertices are allocated from here; base scans never reach it.
pub const FRESH_BASE: u64 = 1 << 48;

/// Adjacency in the base presentation.
pub fn base_adjacent(a: u64, b: u64) -> bool {
    debug_assert!(a < FRESH_BASE && b < FRESH_BASE);
    if a == b {
        return false;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo >= 64 {
        return false;
    }
    (hi >> lo) & 1 == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Dom,
    Ran,
}

#[derive(Debug, Clone)]
struct FreshInfo {
    /// The point whose pattern this vertex was forced to mirror.
    target: u64,
    /// How much of the side order existed at creation time.
    snapshot: u32,
    side: Side,
}

/// Number of leading side points used as the fingerprint basis.
const FP_BASIS: usize = 64;

/// Run-local presentation of the random graph.
#[derive(Debug, Default)]
pub struct GraphSession {
    seed: u64,
    fresh: HashMap<u64, FreshInfo>,
    next_fresh: u64,
    /// Pairs in insertion order; `dom_pos`/`ran_pos` index into them.
    dom_order: Vec<u64>,
    ran_order: Vec<u64>,
    images: Vec<u64>,
    preimages: Vec<u64>,
    dom_pos: HashMap<u64, u32>,
    ran_pos: HashMap<u64, u32>,
    memo: HashMap<(u64, u64), bool>,
    /// Every vertex the run has touched, in observation order.
    known: Vec<u64>,
    known_set: HashSet<u64>,
    /// Fingerprint buckets over the frozen 64-point side prefixes.
    frozen: bool,
    dom_buckets: HashMap<u64, Vec<u64>>,
    ran_buckets: HashMap<u64, Vec<u64>>,
}

impl GraphSession {
    pub fn new(seed: u64) -> Self {
        GraphSession { seed, next_fresh: FRESH_BASE, ..Default::default() }
    }

    pub fn dom_len(&self) -> u32 {
        self.dom_order.len() as u32
    }

    pub fn ran_len(&self) -> u32 {
        self.ran_order.len() as u32
    }

    /// Makes a vertex visible to matcher queries.
    pub fn register(&mut self, v: u64) {
        if self.known_set.insert(v) {
            self.known.push(v);
            if self.frozen {
                let dk = self.fingerprint(v, Side::Dom);
                self.dom_buckets.entry(dk).or_default().push(v);
                let rk = self.fingerprint(v, Side::Ran);
                self.ran_buckets.entry(rk).or_default().push(v);
            }
        }
    }

    /// Records a new pair of the partial map being built.
    pub fn push_pair(&mut self, dom: u64, ran: u64) {
        self.register(dom);
        self.register(ran);
        let dp = self.dom_order.len() as u32;
        self.dom_order.push(dom);
        self.images.push(ran);
        self.dom_pos.insert(dom, dp);
        let rp = self.ran_order.len() as u32;
        self.ran_order.push(ran);
        self.preimages.push(dom);
        self.ran_pos.insert(ran, rp);
        if !self.frozen && self.dom_order.len() >= FP_BASIS {
            self.freeze();
        }
    }

    /// Adjacency bits of `v` against the first up-to-64 side points.
    fn fingerprint(&mut self, v: u64, side: Side) -> u64 {
        let order = match side {
            Side::Dom => &self.dom_order,
            Side::Ran => &self.ran_order,
        };
        let prefix: Vec<u64> = order.iter().take(FP_BASIS).copied().collect();
        let mut key = 0u64;
        for (t, w) in prefix.into_iter().enumerate() {
            if self.adjacent(v, w) {
                key |= 1 << t;
            }
        }
        key
    }

    fn freeze(&mut self) {
        let all = self.known.clone();
        for v in all {
            let dk = self.fingerprint(v, Side::Dom);
            self.dom_buckets.entry(dk).or_default().push(v);
            let rk = self.fingerprint(v, Side::Ran);
            self.ran_buckets.entry(rk).or_default().push(v);
        }
        self.frozen = true;
    }

    /// The adjacency pattern a candidate on `side` must realize so that
    /// pairing it with `target` stays a partial isomorphism: bit `t`
    /// is target's adjacency to the counterpart of side point `t`.
    fn target_fingerprint(&mut self, target: u64, side: Side) -> u64 {
        let counterparts: Vec<u64> = match side {
            Side::Dom => self.images.iter().take(FP_BASIS).copied().collect(),
            Side::Ran => self.preimages.iter().take(FP_BASIS).copied().collect(),
        };
        let mut key = 0u64;
        for (t, w) in counterparts.into_iter().enumerate() {
            if self.adjacent(target, w) {
                key |= 1 << t;
            }
        }
        key
    }

    /// Does pairing candidate `v` with `target` respect every pair?
    fn full_match(&mut self, v: u64, target: u64, side: Side) -> bool {
        let n = match side {
            Side::Dom => self.dom_order.len(),
            Side::Ran => self.ran_order.len(),
        };
        for t in 0..n {
            let (own, other) = match side {
                Side::Dom => (self.dom_order[t], self.images[t]),
                Side::Ran => (self.ran_order[t], self.preimages[t]),
            };
            if self.adjacent(v, own) != self.adjacent(target, other) {
                return false;
            }
        }
        true
    }

    /// Materialized candidates (ascending) that can be paired with
    /// `target` as a new `side`-side point.
    pub fn matchers(&mut self, target: u64, side: Side) -> Vec<u64> {
        let candidates: Vec<u64> = if self.frozen {
            let key = self.target_fingerprint(target, side);
            let buckets = match side {
                Side::Dom => &self.dom_buckets,
                Side::Ran => &self.ran_buckets,
            };
            buckets.get(&key).cloned().unwrap_or_default()
        } else {
            self.known.clone()
        };
        let mut out = Vec::new();
        for v in candidates {
            let occupied = match side {
                Side::Dom => self.dom_pos.contains_key(&v),
                Side::Ran => self.ran_pos.contains_key(&v),
            };
            if occupied {
                continue;
            }
            if self.full_match(v, target, side) {
                out.push(v);
            }
        }
        out.sort_unstable();
        out
    }

    /// Allocates a fresh vertex mirroring `target`'s pattern over the
    /// current prefix of the given side.
    pub fn alloc_fresh(&mut self, target: u64, side: Side) -> u64 {
        let v = self.next_fresh;
        self.next_fresh += 1;
        let snapshot = match side {
            Side::Dom => self.dom_len(),
            Side::Ran => self.ran_len(),
        };
        self.fresh.insert(v, FreshInfo { target, snapshot, side });
        v
    }

    /// Adjacency in the session presentation.
    pub fn adjacent(&mut self, a: u64, b: u64) -> bool {
        if a == b {
            return false;
        }
        if a < FRESH_BASE && b < FRESH_BASE {
            return base_adjacent(a, b);
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = self.resolve(a, b);
        self.memo.insert(key, v);
        v
    }

    fn resolve(&mut self, a: u64, b: u64) -> bool {
        // Prefer resolving through the later-created fresh vertex so the
        // recursion walks strictly back in time.
        let (f, w) = if a >= FRESH_BASE && (b < FRESH_BASE || a > b) {
            (a, b)
        } else {
            (b, a)
        };
        let info = self.fresh.get(&f).cloned().expect("fresh vertex unknown to session");
        match info.side {
            Side::Dom => {
                if let Some(&p) = self.dom_pos.get(&w) {
                    if p < info.snapshot {
                        let img = self.images[p as usize];
                        return self.adjacent(info.target, img);
                    }
                }
            }
            Side::Ran => {
                if let Some(&p) = self.ran_pos.get(&w) {
                    if p < info.snapshot {
                        let pre = self.preimages[p as usize];
                        return self.adjacent(info.target, pre);
                    }
                }
            }
        }
        pair_bit(self.seed, f, w)
    }
}

/// A vertex adjacent to everything in `need` and distinct from all of
/// `avoid`, in the base presentation. Prefers the closed-form witness
/// (needed bits set plus one bit above the maximum); falls back to a
/// bounded scan when the constraint bits do not fit.
pub fn base_common_neighbor(need: &[u64], avoid: &[u64], bound: u64) -> Option<u64> {
    if need.iter().all(|&v| v < 46) {
        let mut w = 0u64;
        for &v in need {
            w |= 1 << v;
        }
        let top = need.iter().chain(avoid.iter()).copied().max().unwrap_or(0);
        if top < 46 {
            let candidate = w | (1 << (top + 1));
            debug_assert!(candidate < FRESH_BASE);
            debug_assert!(need.iter().all(|&v| base_adjacent(candidate, v)));
            return Some(candidate);
        }
    }
    (0..bound).find(|&v| {
        !avoid.contains(&v) && !need.contains(&v) && need.iter().all(|&n| base_adjacent(v, n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_coding_examples() {
        // 1 ~ 0 (bit 0 of 1), 2 !~ 0, 3 ~ 0 and 3 ~ 1
        assert!(base_adjacent(0, 1));
        assert!(!base_adjacent(0, 2));
        assert!(base_adjacent(0, 3));
        assert!(base_adjacent(1, 3));
        assert!(base_adjacent(2, 4));
        assert!(!base_adjacent(1, 4));
        // symmetric, irreflexive
        assert_eq!(base_adjacent(5, 9), base_adjacent(9, 5));
        assert!(!base_adjacent(7, 7));
    }

    #[test]
    fn extension_property_small() {
        // for all disjoint A, B within 0..8 there is a joint witness
        for mask_a in 0u32..64 {
            for mask_b in 0u32..64 {
                if mask_a & mask_b != 0 {
                    continue;
                }
                let a: Vec<u64> = (0..6).filter(|i| (mask_a >> i) & 1 == 1).collect();
                let b: Vec<u64> = (0..6).filter(|i| (mask_b >> i) & 1 == 1).collect();
                let found = (0..100_000u64).any(|v| {
                    !a.contains(&v)
                        && !b.contains(&v)
                        && a.iter().all(|&x| base_adjacent(x, v))
                        && b.iter().all(|&y| !base_adjacent(y, v))
                });
                assert!(found, "A={a:?} B={b:?}");
            }
        }
    }

    #[test]
    fn session_chains_are_consistent() {
        let mut s = GraphSession::new(7);
        // simulate: pair (0 -> 5), then fresh preimage for target 3 over dom
        s.push_pair(0, 5);
        let f = s.alloc_fresh(3, Side::Dom);
        s.push_pair(f, 3);
        // f's adjacency to 0 must mirror target 3 vs image 5
        assert_eq!(s.adjacent(f, 0), base_adjacent(3, 5));
        // symmetric and stable
        assert_eq!(s.adjacent(0, f), s.adjacent(f, 0));
        // unrelated vertex gets the pseudorandom bit, deterministically
        let x1 = s.adjacent(f, 40);
        let x2 = s.adjacent(f, 40);
        assert_eq!(x1, x2);
    }

    #[test]
    fn common_neighbor_is_adjacent_to_all() {
        let need = vec![0u64, 1, 4];
        let avoid = vec![2u64, 3];
        let v = base_common_neighbor(&need, &avoid, 1 << 20).unwrap();
        for &n in &need {
            assert!(base_adjacent(v, n));
        }
        assert!(!avoid.contains(&v));
    }
}
