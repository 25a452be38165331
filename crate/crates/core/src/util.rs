//! Small numeric helpers shared across the crate.

/// SplitMix64 step; used as a deterministic pair hash and stream splitter.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic boolean derived from a seed and an unordered pair.
pub fn pair_bit(seed: u64, a: u64, b: u64) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    splitmix64(seed ^ splitmix64(lo ^ splitmix64(hi))) & 1 == 1
}

/// 2^e with saturation; `u128::MAX` doubles as "astronomically many".
pub fn pow2_sat(e: u128) -> u128 {
    if e >= 127 {
        u128::MAX
    } else {
        1u128 << e
    }
}

pub fn mul_sat(a: u128, b: u128) -> u128 {
    a.saturating_mul(b)
}

/// Order-statistic set over u64 keys (a treap with deterministic
/// priorities). Supports rank queries, which `BTreeSet` does not.
#[derive(Debug, Default, Clone)]
pub struct RankSet {
    nodes: Vec<RsNode>,
    root: usize,
}

#[derive(Debug, Clone)]
struct RsNode {
    key: u64,
    prio: u64,
    left: usize,
    right: usize,
    count: u32,
}

const NIL: usize = usize::MAX;

impl RankSet {
    pub fn new() -> Self {
        RankSet { nodes: Vec::new(), root: NIL }
    }

    pub fn len(&self) -> usize {
        if self.root == NIL { 0 } else { self.nodes[self.root].count as usize }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cnt(&self, n: usize) -> u32 {
        if n == NIL { 0 } else { self.nodes[n].count }
    }

    fn fix(&mut self, n: usize) {
        let c = 1 + self.cnt(self.nodes[n].left) + self.cnt(self.nodes[n].right);
        self.nodes[n].count = c;
    }

    /// Splits into keys < key and keys >= key.
    fn split(&mut self, n: usize, key: u64) -> (usize, usize) {
        if n == NIL {
            return (NIL, NIL);
        }
        if self.nodes[n].key < key {
            let (a, b) = self.split(self.nodes[n].right, key);
            self.nodes[n].right = a;
            self.fix(n);
            (n, b)
        } else {
            let (a, b) = self.split(self.nodes[n].left, key);
            self.nodes[n].left = b;
            self.fix(n);
            (a, n)
        }
    }

    fn merge(&mut self, a: usize, b: usize) -> usize {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a].prio > self.nodes[b].prio {
            let m = self.merge(self.nodes[a].right, b);
            self.nodes[a].right = m;
            self.fix(a);
            a
        } else {
            let m = self.merge(a, self.nodes[b].left);
            self.nodes[b].left = m;
            self.fix(b);
            b
        }
    }

    pub fn contains(&self, key: u64) -> bool {
        let mut n = self.root;
        while n != NIL {
            let node = &self.nodes[n];
            if key == node.key {
                return true;
            }
            n = if key < node.key { node.left } else { node.right };
        }
        false
    }

    pub fn insert(&mut self, key: u64) -> bool {
        if self.contains(key) {
            return false;
        }
        let prio = splitmix64(key ^ 0xa076_1d64_78bd_642f);
        let idx = self.nodes.len();
        self.nodes.push(RsNode { key, prio, left: NIL, right: NIL, count: 1 });
        let (a, b) = self.split(self.root, key);
        let m = self.merge(a, idx);
        self.root = self.merge(m, b);
        true
    }

    /// Number of members strictly below `key`.
    pub fn rank(&self, key: u64) -> u64 {
        let mut n = self.root;
        let mut acc = 0u64;
        while n != NIL {
            let node = &self.nodes[n];
            if key <= node.key {
                n = node.left;
            } else {
                acc += 1 + self.cnt(node.left) as u64;
                n = node.right;
            }
        }
        acc
    }

    /// The k-th (0-based) natural number NOT in the set.
    ///
    /// Iterates x -> k + |{members <= x}|; the least fixed point is the
    /// answer and is never itself a member.
    pub fn nth_absent(&self, k: u64) -> u64 {
        let mut x = k;
        loop {
            let next = k + self.rank(x.saturating_add(1));
            if next == x {
                return x;
            }
            x = next;
        }
    }
}
