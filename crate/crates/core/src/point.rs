//! Domain points of the built-in structures.
//!
//! Each structure fixes a total enumeration of its domain; `Ord` on
//! `Point` is that enumeration order. Points of different variants never
//! meet inside one structure.

use crate::clopen::Clopen;
use crate::sbnode::SbNode;
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point {
    /// Pure set, Rado graph, integer line and user structures.
    Nat(u64),
    /// Rational order: Stern-Brocot tree node.
    Rat(SbNode),
    /// Atomless Boolean algebra: clopen subset of Cantor space.
    Clopen(Clopen),
}

impl Point {
    pub fn nat(&self) -> u64 {
        match self {
            Point::Nat(n) => *n,
            _ => panic!("not a Nat point"),
        }
    }

    pub fn rat(&self) -> &SbNode {
        match self {
            Point::Rat(n) => n,
            _ => panic!("not a Rat point"),
        }
    }

    pub fn clopen(&self) -> &Clopen {
        match self {
            Point::Clopen(c) => c,
            _ => panic!("not a Clopen point"),
        }
    }

    /// Stable textual encoding used in traces and reports.
    pub fn encode(&self) -> String {
        match self {
            Point::Nat(n) => n.to_string(),
            Point::Rat(n) => {
                if n.depth() <= 62 {
                    format!("q{}", n.index())
                } else {
                    format!("qd{}p{:x}", n.depth(), n.path())
                }
            }
            Point::Clopen(c) => format!("b{}", c.antichain()),
        }
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Nat(a), Point::Nat(b)) => a.cmp(b),
            (Point::Rat(a), Point::Rat(b)) => a.cmp_enum(b),
            (Point::Clopen(a), Point::Clopen(b)) => a.cmp_enum(b),
            _ => self.tag().cmp(&other.tag()),
        }
    }
}

impl Point {
    fn tag(&self) -> u8 {
        match self {
            Point::Nat(_) => 0,
            Point::Rat(_) => 1,
            Point::Clopen(_) => 2,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}
