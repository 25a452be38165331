//! Finite injective point maps.

use crate::point::Point;
use std::collections::BTreeMap;

/// A finite injective map between points, kept with its inverse.
/// Validity relative to a structure is checked by
/// `Structure::is_partial_automorphism`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialAutomorphism {
    fwd: BTreeMap<Point, Point>,
    bwd: BTreeMap<Point, Point>,
}

impl PartialAutomorphism {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Point, Point)>>(pairs: I) -> Self {
        let mut p = Self::new();
        for (a, b) in pairs {
            p.insert(a, b);
        }
        p
    }

    /// Inserts a pair; panics on injectivity violations in debug builds.
    pub fn insert(&mut self, a: Point, b: Point) {
        debug_assert!(!self.fwd.contains_key(&a), "domain collision");
        debug_assert!(!self.bwd.contains_key(&b), "range collision");
        self.fwd.insert(a.clone(), b.clone());
        self.bwd.insert(b, a);
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn get(&self, a: &Point) -> Option<&Point> {
        self.fwd.get(a)
    }

    pub fn get_inv(&self, b: &Point) -> Option<&Point> {
        self.bwd.get(b)
    }

    pub fn in_dom(&self, a: &Point) -> bool {
        self.fwd.contains_key(a)
    }

    pub fn in_ran(&self, b: &Point) -> bool {
        self.bwd.contains_key(b)
    }

    pub fn dom(&self) -> impl Iterator<Item = &Point> {
        self.fwd.keys()
    }

    pub fn ran(&self) -> impl Iterator<Item = &Point> {
        self.bwd.keys()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Point, &Point)> {
        self.fwd.iter()
    }

    /// The inverse map.
    pub fn inverse(&self) -> PartialAutomorphism {
        PartialAutomorphism { fwd: self.bwd.clone(), bwd: self.fwd.clone() }
    }

    /// Is `other` an extension of `self`?
    pub fn extends(&self, other: &PartialAutomorphism) -> bool {
        other.fwd.iter().all(|(a, b)| self.get(a) == Some(b))
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = &Point> {
        self.fwd.iter().filter(|(a, b)| a == b).map(|(a, _)| a)
    }
}
