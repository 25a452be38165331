//! Nodes of the extended Stern-Brocot tree, which enumerates all of Q.
//!
//! The tree has root 0/1 with virtual boundaries -1/0 and 1/0; the left
//! and right subtrees cover the negative and positive rationals. A node
//! is its root path (most significant bit first; 0 = left). The domain
//! enumeration is level order: node index = 2^depth - 1 + path. Because
//! the tree is a binary search tree over Q, counting and selecting nodes
//! of a value interval at a given depth is integer arithmetic on paths.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SbNode {
    depth: u32,
    path: BigUint,
}

impl SbNode {
    pub fn root() -> Self {
        SbNode { depth: 0, path: BigUint::zero() }
    }

    pub fn new(depth: u32, path: BigUint) -> Self {
        debug_assert!(path.bits() <= depth as u64);
        SbNode { depth, path }
    }

    /// Node at position `i` of the level-order enumeration (small indices).
    pub fn from_index(i: u64) -> Self {
        let n = i + 1;
        let depth = 63 - n.leading_zeros();
        let path = n - (1u64 << depth);
        SbNode { depth, path: BigUint::from(path) }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn path(&self) -> &BigUint {
        &self.path
    }

    /// Level-order index.
    pub fn index(&self) -> BigUint {
        (BigUint::one() << self.depth) - 1u32 + &self.path
    }

    /// Enumeration order (level order) comparison.
    pub fn cmp_enum(&self, other: &Self) -> Ordering {
        self.depth
            .cmp(&other.depth)
            .then_with(|| self.path.cmp(&other.path))
    }

    /// Order of the rational values (binary search tree order).
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let d = self.depth.min(other.depth);
        let pa = &self.path >> (self.depth - d);
        let pb = &other.path >> (other.depth - d);
        match pa.cmp(&pb) {
            Ordering::Equal => {
                if self.depth == other.depth {
                    Ordering::Equal
                } else if self.depth > other.depth {
                    // self descends from other
                    if self.path.bit((self.depth - d - 1) as u64) {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    }
                } else if other.path.bit((other.depth - d - 1) as u64) {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            o => o,
        }
    }

    /// Exact value as a reduced fraction.
    pub fn fraction(&self) -> (BigInt, BigInt) {
        let mut lo = (BigInt::from(-1), BigInt::zero());
        let mut hi = (BigInt::one(), BigInt::zero());
        let mut cur = (BigInt::zero(), BigInt::one());
        for i in (0..self.depth).rev() {
            if self.path.bit(i as u64) {
                lo = cur.clone();
                cur = (&lo.0 + &hi.0, &lo.1 + &hi.1);
            } else {
                hi = cur.clone();
                cur = (&lo.0 + &hi.0, &lo.1 + &hi.1);
            }
        }
        cur
    }
}

/// Count of depth-`d` nodes with value strictly below `x`.
fn lt_at(x: &SbNode, d: u32) -> BigUint {
    let dx = x.depth;
    if d < dx {
        let mut c = &x.path >> (dx - d);
        if x.path.bit((dx - d - 1) as u64) {
            c += 1u32;
        }
        c
    } else if d == dx {
        x.path.clone()
    } else {
        (&x.path << (d - dx)) + (BigUint::one() << (d - dx - 1))
    }
}

/// Count of depth-`d` nodes with value at most `x`.
fn le_at(x: &SbNode, d: u32) -> BigUint {
    let mut c = lt_at(x, d);
    if d == x.depth {
        c += 1u32;
    }
    c
}

/// Sum of `lt_at(x, d)` for d = 0..=d0.
fn cum_lt(x: &SbNode, d0: u32) -> BigUint {
    let dx = x.depth;
    if d0 >= dx {
        // closed form: 2*path for the first dx+1 levels, then the
        // left-subtree geometric part
        let base = &x.path * 2u32;
        if d0 == dx {
            return base;
        }
        let k = d0 - dx;
        base + (&x.path * ((BigUint::one() << (k + 1)) - 2u32)) + ((BigUint::one() << k) - 1u32)
    } else {
        let mut acc = BigUint::zero();
        for d in 0..=d0 {
            acc += lt_at(x, d);
        }
        acc
    }
}

fn cum_le(x: &SbNode, d0: u32) -> BigUint {
    let mut c = cum_lt(x, d0);
    if d0 >= x.depth {
        c += 1u32;
    }
    c
}

fn sat(b: &BigUint) -> u128 {
    b.to_u128().unwrap_or(u128::MAX)
}

/// An open interval of rational values with tree-node endpoints;
/// `None` stands for the corresponding infinity.
#[derive(Debug, Clone)]
pub struct SbInterval {
    pub lo: Option<SbNode>,
    pub hi: Option<SbNode>,
}

impl SbInterval {
    pub fn all() -> Self {
        SbInterval { lo: None, hi: None }
    }

    pub fn contains(&self, x: &SbNode) -> bool {
        if let Some(lo) = &self.lo {
            if lo.cmp_value(x) != Ordering::Less {
                return false;
            }
        }
        if let Some(hi) = &self.hi {
            if x.cmp_value(hi) != Ordering::Less {
                return false;
            }
        }
        true
    }

    fn below_hi(&self, d: u32) -> BigUint {
        match &self.hi {
            Some(h) => lt_at(h, d),
            None => BigUint::one() << d,
        }
    }

    fn at_most_lo(&self, d: u32) -> BigUint {
        match &self.lo {
            Some(l) => le_at(l, d),
            None => BigUint::zero(),
        }
    }

    /// Number of interval members at depth exactly `d`.
    pub fn count_at(&self, d: u32) -> BigUint {
        self.below_hi(d) - self.at_most_lo(d)
    }

    /// Cumulative member count through depth `d0` (saturating).
    pub fn count_through(&self, d0: u32) -> u128 {
        let hi = match &self.hi {
            Some(h) => cum_lt(h, d0),
            None => (BigUint::one() << (d0 + 1)) - 1u32,
        };
        let lo = match &self.lo {
            Some(l) => cum_le(l, d0),
            None => BigUint::zero(),
        };
        sat(&(hi - lo))
    }

    /// The k-th member (0-based) in level-order enumeration.
    pub fn nth(&self, k: u128) -> SbNode {
        let d0 = self
            .lo
            .as_ref()
            .map(|n| n.depth)
            .unwrap_or(0)
            .max(self.hi.as_ref().map(|n| n.depth).unwrap_or(0));
        let c0 = self.count_through(d0);
        let (depth, r) = if k < c0 {
            // shallow hit: binary search the smallest level covering k
            let mut lo_d = 0u32;
            let mut hi_d = d0;
            while lo_d < hi_d {
                let mid = (lo_d + hi_d) / 2;
                if self.count_through(mid) > k {
                    hi_d = mid;
                } else {
                    lo_d = mid + 1;
                }
            }
            let before = if lo_d == 0 { 0 } else { self.count_through(lo_d - 1) };
            (lo_d, k - before)
        } else {
            // walk deeper; counts double once past both boundary depths
            let mut cum = c0;
            let mut d = d0 + 1;
            let mut cnt = sat(&self.count_at(d));
            loop {
                let next = cum.saturating_add(cnt);
                if next > k {
                    break (d, k - cum);
                }
                cum = next;
                d += 1;
                cnt = cnt.saturating_mul(2);
            }
        };
        // r-th node at `depth` inside the interval, in path order
        let first = self.at_most_lo(depth);
        let path = first + BigUint::from(r);
        debug_assert!(&path < &self.below_hi(depth));
        SbNode::new(depth, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn val(n: &SbNode) -> f64 {
        let (p, q) = n.fraction();
        let p = p.to_string().parse::<f64>().unwrap();
        let q = q.to_string().parse::<f64>().unwrap();
        p / q
    }

    #[test]
    fn first_values() {
        let want = [
            (0, 1),
            (-1, 1),
            (1, 1),
            (-2, 1),
            (-1, 2),
            (1, 2),
            (2, 1),
            (-3, 1),
            (-3, 2),
            (-2, 3),
            (-1, 3),
            (1, 3),
            (2, 3),
            (3, 2),
            (3, 1),
        ];
        for (i, (p, q)) in want.iter().enumerate() {
            let n = SbNode::from_index(i as u64);
            let (np, nq) = n.fraction();
            assert_eq!((np, nq), (BigInt::from(*p), BigInt::from(*q)), "index {i}");
            assert_eq!(n.index(), BigUint::from(i), "{i}");
        }
    }

    #[test]
    fn value_order_matches_fractions() {
        let nodes: Vec<SbNode> = (0..127).map(SbNode::from_index).collect();
        for a in &nodes {
            for b in &nodes {
                let by_tree = a.cmp_value(b);
                let by_frac = val(a).partial_cmp(&val(b)).unwrap();
                assert_eq!(by_tree, by_frac, "{:?} vs {:?}", a, b);
            }
        }
    }

    #[test]
    fn interval_counts_match_scan() {
        let nodes: Vec<SbNode> = (0..1023).map(SbNode::from_index).collect();
        let cases = [
            SbInterval { lo: None, hi: None },
            SbInterval { lo: Some(SbNode::from_index(0)), hi: None },
            SbInterval { lo: None, hi: Some(SbNode::from_index(4)) },
            SbInterval {
                lo: Some(SbNode::from_index(4)),
                hi: Some(SbNode::from_index(5)),
            },
            SbInterval {
                lo: Some(SbNode::from_index(1)),
                hi: Some(SbNode::from_index(14)),
            },
        ];
        for iv in &cases {
            let members: Vec<&SbNode> = nodes.iter().filter(|n| iv.contains(n)).collect();
            // counts per depth
            for d in 0..=9u32 {
                let want = members.iter().filter(|n| n.depth() == d).count();
                assert_eq!(iv.count_at(d), BigUint::from(want), "depth {d}, {:?}", iv);
            }
            // nth agrees with the scan order (level order)
            for (k, want) in members.iter().enumerate() {
                let got = iv.nth(k as u128);
                assert_eq!(&&got, want, "k={k}, {:?}", iv);
            }
        }
    }

    #[test]
    fn nth_deep_is_inside_and_monotone() {
        let iv = SbInterval {
            lo: Some(SbNode::from_index(4)),
            hi: Some(SbNode::from_index(5)),
        };
        let mut prev: Option<SbNode> = None;
        for k in [0u128, 1, 2, 1000, 1_000_000, 1 << 40, (1 << 40) + 1] {
            let n = iv.nth(k);
            assert!(iv.contains(&n), "k={k}");
            if let Some(p) = &prev {
                assert_eq!(p.cmp_enum(&n), Ordering::Less);
            }
            prev = Some(n);
        }
    }
}
