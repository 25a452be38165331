//! Operation-level checks for the built-in structures, with independent
//! oracles where the expected values are not immediate.

use fraisse_core::clopen::Clopen;
use fraisse_core::pauto::PartialAutomorphism;
use fraisse_core::point::Point;
use fraisse_core::sbnode::SbNode;
use fraisse_core::structure::{RunContext, Structure};
use std::collections::BTreeSet;

fn nat(n: u64) -> Point {
    Point::Nat(n)
}

fn rat(i: u64) -> Point {
    Point::Rat(SbNode::from_index(i))
}

fn clop(depth: u32, runs: &[(u128, u128)]) -> Point {
    Point::Clopen(Clopen::from_runs(depth, runs.to_vec()).unwrap())
}

fn set(points: &[Point]) -> BTreeSet<Point> {
    points.iter().cloned().collect()
}

/// Independent oracle: close a set of clopens under meet, join and
/// complement by iteration.
fn brute_boolean_closure(gens: &[Clopen]) -> BTreeSet<String> {
    let mut elems: Vec<Clopen> = vec![Clopen::empty(), Clopen::full()];
    elems.extend(gens.iter().cloned());
    loop {
        let mut added = false;
        let snapshot = elems.clone();
        for a in &snapshot {
            let c = a.complement();
            if !elems.contains(&c) {
                elems.push(c);
                added = true;
            }
            for b in &snapshot {
                for e in [a.intersect(b), a.union(b)] {
                    if !elems.contains(&e) {
                        elems.push(e);
                        added = true;
                    }
                }
            }
        }
        if !added {
            break;
        }
    }
    elems.iter().map(|e| e.antichain()).collect()
}

#[test]
fn generated_substructure_examples() {
    let mut _ctx = RunContext::Pure;
    // relational: identity
    let g = Structure::random_graph();
    let s = set(&[nat(3), nat(7)]);
    assert_eq!(g.generated_substructure(&s).unwrap(), s);

    // boolean: a single non-extremal element generates a 4-element algebra
    let b = Structure::atomless_boolean();
    let a = clop(1, &[(0, 1)]);
    let got = b.generated_substructure(&set(&[a.clone()])).unwrap();
    assert_eq!(got.len(), 4);
    let brute = brute_boolean_closure(&[a.clopen().clone()]);
    let got_names: BTreeSet<String> =
        got.iter().map(|p| p.clopen().antichain()).collect();
    assert_eq!(got_names, brute);

    // empty set generates the two constants
    let empty = b.generated_substructure(&BTreeSet::new()).unwrap();
    assert_eq!(empty.len(), 2);
    assert!(empty.contains(&Point::Clopen(Clopen::empty())));
    assert!(empty.contains(&Point::Clopen(Clopen::full())));
}

#[test]
fn is_partial_automorphism_examples() {
    let mut ctx = RunContext::Pure;
    let q = Structure::rational_order();
    // any single pair is order-preserving
    assert!(q.is_partial_automorphism(&mut ctx, &[(rat(0), rat(5))]));
    // order violated: values 0 < 1 must map to increasing values
    let bad = [(rat(0), rat(2)), (rat(2), rat(6))];
    // rat(0)=0, rat(2)=1: domain 0 < 1; images rat(2)=1, rat(6)=2 fine
    assert!(q.is_partial_automorphism(&mut ctx, &bad));
    let worse = [(rat(0), rat(6)), (rat(2), rat(2))];
    // 0 < 1 but images 2 > 1
    assert!(!q.is_partial_automorphism(&mut ctx, &worse));

    // random graph: single edge to single edge, pattern must match
    let g = Structure::random_graph();
    // 0 ~ 1 and 0 ~ 3 in the base coding
    assert!(g.is_partial_automorphism(&mut ctx, &[(nat(0), nat(0)), (nat(1), nat(3))]));
    // 0 ~ 1 but 0 !~ 2
    assert!(!g.is_partial_automorphism(&mut ctx, &[(nat(0), nat(0)), (nat(1), nat(2))]));

    // boolean: map must respect the algebra
    let b = Structure::atomless_boolean();
    let a01 = clop(1, &[(0, 1)]);
    let a10 = clop(1, &[(1, 2)]);
    // complement pair mapped to complement pair
    assert!(b.is_partial_automorphism(&mut ctx, &[(a01.clone(), a10.clone()), (a10.clone(), a01.clone())]));
    // an element and its complement cannot both map to the same side
    assert!(!b.is_partial_automorphism(
        &mut ctx,
        &[(a01.clone(), a10.clone()), (a10.clone(), clop(2, &[(2, 3)]))]
    ));
}

#[test]
fn same_type_over_examples() {
    let mut ctx = RunContext::Pure;
    let g = Structure::random_graph();
    // 1 and 3 have the same adjacency to {0}: both adjacent
    let s = set(&[nat(0)]);
    assert!(g.same_type_over(&mut ctx, &s, &nat(1), &nat(3)).unwrap());
    // 1 adjacent to 0, 2 not
    assert!(!g.same_type_over(&mut ctx, &s, &nat(1), &nat(2)).unwrap());

    let q = Structure::rational_order();
    // points on opposite sides of s have different types
    let s = set(&[rat(0)]); // value 0
    assert!(!q.same_type_over(&mut ctx, &s, &rat(1), &rat(2)).unwrap()); // -1 vs 1
    assert!(q.same_type_over(&mut ctx, &s, &rat(2), &rat(6)).unwrap()); // 1 vs 2

    // boolean: two proper pieces of the same atom
    let b = Structure::atomless_boolean();
    let s = set(&[clop(1, &[(0, 1)])]);
    assert!(b
        .same_type_over(&mut ctx, &s, &clop(2, &[(0, 1)]), &clop(3, &[(1, 2)]))
        .unwrap());
    // a piece of [0] vs a piece of [1]
    assert!(!b
        .same_type_over(&mut ctx, &s, &clop(2, &[(0, 1)]), &clop(2, &[(2, 3)]))
        .unwrap());
}

#[test]
fn acl_examples_and_witness_oracle() {
    let mut ctx = RunContext::Pure;
    let g = Structure::random_graph();
    let s = set(&[nat(2), nat(5)]);
    let r = g.acl(&mut ctx, &s, 64).unwrap();
    assert!(r.exact);
    assert_eq!(r.points, s);
    // oracle: every point outside S has at least 64 same-type witnesses
    // among a bounded scan, confirming no algebraicity
    for x in [0u64, 1, 3, 9] {
        let mut witnesses = 0;
        for b2 in 0..100_000u64 {
            if b2 == 2 || b2 == 5 {
                continue;
            }
            if g.same_type_over(&mut ctx, &s, &nat(x), &nat(b2)).unwrap() {
                witnesses += 1;
                if witnesses >= 64 {
                    break;
                }
            }
        }
        assert!(witnesses >= 64, "x={x}");
    }

    // boolean: acl of one element is its generated algebra
    let b = Structure::atomless_boolean();
    let sb = set(&[clop(1, &[(0, 1)])]);
    let rb = b.acl(&mut ctx, &sb, 64).unwrap();
    assert!(rb.exact);
    assert_eq!(rb.points.len(), 4);

    // integer line: any two points close to the whole line
    let z = Structure::integer_distance();
    let sz = set(&[nat(0), nat(1)]);
    let rz = z.acl(&mut ctx, &sz, 100).unwrap();
    assert!(!rz.exact);
    assert!(rz.points.len() >= 100);
    assert_eq!(rz.bound_used, Some(100));
}

#[test]
fn stabilizer_orbit_examples() {
    let mut ctx = RunContext::Pure;
    let g = Structure::random_graph();
    // orbit over F = {0} of a neighbor of 0: all neighbors of 0
    let f = set(&[nat(0)]);
    let stream = g.stabilizer_orbit_stream(&mut ctx, &f, &nat(1)).unwrap();
    assert!(!stream.is_finite());
    let members = stream.prefix(10, &mut ctx).unwrap();
    assert!(members.len() == 10);
    for m in &members {
        assert!(g.same_type_over(&mut ctx, &f, &nat(1), m).unwrap());
    }

    // rational order: orbit between two stabilized points is the interval
    let q = Structure::rational_order();
    let f = set(&[rat(1), rat(2)]); // values -1 and 1
    let x = rat(0); // 0 sits between them
    let stream = q.stabilizer_orbit_stream(&mut ctx, &f, &x).unwrap();
    assert!(!stream.is_finite());
    for m in stream.prefix(25, &mut ctx).unwrap() {
        assert!(q.same_type_over(&mut ctx, &f, &x, &m).unwrap());
    }

    // boolean: a stabilized point has a singleton stream
    let b = Structure::atomless_boolean();
    let fb = set(&[clop(1, &[(0, 1)])]);
    let fixed = clop(1, &[(0, 1)]);
    let stream = b.stabilizer_orbit_stream(&mut ctx, &fb, &fixed).unwrap();
    assert!(stream.is_finite());
    assert_eq!(stream.members(), &[fixed]);
}

#[test]
fn possible_images_examples() {
    let mut ctx = RunContext::Pure;
    // pure set: everything outside the range
    let p = Structure::pure_set();
    let map = PartialAutomorphism::from_pairs([(nat(0), nat(1))]);
    let c = p.possible_images(&mut ctx, &map, &nat(5)).unwrap();
    assert!(!c.is_finite());
    assert_eq!(c.nth(0, &mut ctx).unwrap(), nat(0));
    assert_eq!(c.nth(1, &mut ctx).unwrap(), nat(2));

    // rational order: strictly between the images of the dom-neighbors
    let q = Structure::rational_order();
    let map = PartialAutomorphism::from_pairs([(rat(1), rat(1)), (rat(2), rat(2))]);
    let c = q.possible_images(&mut ctx, &map, &rat(0)).unwrap();
    assert!(!c.is_finite());
    for y in c.prefix(30, &mut ctx).unwrap() {
        // all candidates strictly between -1 and 1
        assert!(rat(1).rat().cmp_value(y.rat()) == std::cmp::Ordering::Less);
        assert!(y.rat().cmp_value(rat(2).rat()) == std::cmp::Ordering::Less);
    }

    // boolean: a point of the generated subalgebra has a forced image,
    // cross-checked by exhausting a small enumeration prefix
    let b = Structure::atomless_boolean();
    let a0 = clop(1, &[(0, 1)]);
    let a1 = clop(1, &[(1, 2)]);
    let map = PartialAutomorphism::from_pairs([(a0.clone(), a1.clone())]);
    let forced = b.possible_images(&mut ctx, &map, &a1).unwrap();
    assert!(forced.is_finite());
    assert_eq!(forced.members(), &[a0.clone()]);
    let mut brute = Vec::new();
    for cand in b.points_iter().take(300) {
        let mut pairs = vec![(a0.clone(), a1.clone()), (a1.clone(), cand.clone())];
        pairs.dedup();
        if !map.in_ran(&cand) && b.is_partial_automorphism(&mut ctx, &pairs) {
            brute.push(cand);
        }
    }
    assert_eq!(brute, vec![a0.clone()]);
}

#[test]
fn possible_images_integer_line() {
    let mut ctx = RunContext::Pure;
    let z = Structure::integer_distance();
    // empty map: everything is possible
    let c = z
        .possible_images(&mut ctx, &PartialAutomorphism::new(), &nat(0))
        .unwrap();
    assert!(!c.is_finite());
    // one pair 0 -> 1 (values 0 -> 1): image of value 2 is 3 or -1
    let map = PartialAutomorphism::from_pairs([(z.int_point(0), z.int_point(1))]);
    let c = z.possible_images(&mut ctx, &map, &z.int_point(2)).unwrap();
    assert!(c.is_finite());
    let vals: BTreeSet<i64> = c.members().iter().map(|p| z.int_value(p)).collect();
    assert_eq!(vals, [3i64, -1].into_iter().collect());
    // two pairs force the image
    let map =
        PartialAutomorphism::from_pairs([(z.int_point(0), z.int_point(1)), (z.int_point(1), z.int_point(2))]);
    let c = z.possible_images(&mut ctx, &map, &z.int_point(5)).unwrap();
    assert!(c.is_finite());
    let vals: Vec<i64> = c.members().iter().map(|p| z.int_value(p)).collect();
    assert_eq!(vals, vec![6]);
}

#[test]
fn possible_preimages_mirror() {
    let mut ctx = RunContext::Pure;
    let q = Structure::rational_order();
    let map = PartialAutomorphism::from_pairs([(rat(1), rat(1)), (rat(2), rat(2))]);
    let imgs = q.possible_images(&mut ctx, &map, &rat(0)).unwrap();
    let pres = q.possible_preimages(&mut ctx, &map, &rat(0)).unwrap();
    // symmetric situation: identical streams
    for k in 0..10u128 {
        assert_eq!(imgs.nth(k, &mut ctx).unwrap(), pres.nth(k, &mut ctx).unwrap());
    }
}

#[test]
fn fixed_point_extension_per_structure() {
    let mut ctx = RunContext::Pure;
    // rational order: new fixed point above everything
    let q = Structure::rational_order();
    let p = PartialAutomorphism::from_pairs([(rat(0), rat(2))]); // 0 -> 1
    let p2 = q.extend_with_fixed_point(&mut ctx, &p).unwrap();
    assert_eq!(p2.len(), p.len() + 1);
    assert!(p.extends(&p) && p2.fixed_points().count() == 1);
    let new_fix = p2.fixed_points().next().unwrap().clone();
    for old in p.dom().chain(p.ran()) {
        assert_eq!(old.rat().cmp_value(new_fix.rat()), std::cmp::Ordering::Less);
    }

    // random graph: new fixed point adjacent to everything touched
    let g = Structure::random_graph();
    let p = PartialAutomorphism::from_pairs([(nat(0), nat(1)), (nat(1), nat(3))]);
    let p2 = g.extend_with_fixed_point(&mut ctx, &p).unwrap();
    let fix = p2.fixed_points().next().unwrap().clone();
    for old in p.dom().chain(p.ran()) {
        assert!(g.adjacent(&mut ctx, &fix, old));
    }
    let pairs: Vec<(Point, Point)> = p2.pairs().map(|(a, b)| (a.clone(), b.clone())).collect();
    assert!(g.is_partial_automorphism(&mut ctx, &pairs));

    // boolean: split construction, validated exhaustively
    let b = Structure::atomless_boolean();
    let a0 = clop(1, &[(0, 1)]);
    let a1 = clop(1, &[(1, 2)]);
    let p = PartialAutomorphism::from_pairs([(a0.clone(), a1.clone())]);
    let p2 = b.extend_with_fixed_point(&mut ctx, &p).unwrap();
    assert_eq!(p2.len(), 2);
    assert_eq!(p2.fixed_points().count(), 1);
    let pairs: Vec<(Point, Point)> = p2.pairs().map(|(a, b)| (a.clone(), b.clone())).collect();
    assert!(b.is_partial_automorphism(&mut ctx, &pairs));

    // unsupported kinds report an error
    let z = Structure::integer_distance();
    let pz = PartialAutomorphism::from_pairs([(z.int_point(0), z.int_point(1))]);
    assert!(z.extend_with_fixed_point(&mut ctx, &pz).is_err());
}

#[test]
fn acl_laws_sampled() {
    // idempotence and monotonicity on sampled sets
    let mut ctx = RunContext::Pure;
    let b = Structure::atomless_boolean();
    let universe: Vec<Point> = b.points_iter().take(40).collect();
    let mut pick = 1u64;
    for trial in 0..60u64 {
        pick = pick.wrapping_mul(6364136223846793005).wrapping_add(trial);
        let size = (pick % 5) as usize;
        let s: BTreeSet<Point> = (0..size)
            .map(|i| universe[((pick >> (8 + i)) % 40) as usize].clone())
            .collect();
        let once = b.acl(&mut ctx, &s, 64).unwrap();
        if once.points.len() > 64 {
            continue;
        }
        let twice = b.acl(&mut ctx, &once.points, 64).unwrap();
        assert_eq!(once.points, twice.points, "idempotence failed for {s:?}");
        // closure contains the generated substructure contains S
        let gen = b.generated_substructure(&s).unwrap();
        assert!(once.points.is_superset(&gen));
        assert!(gen.is_superset(&s));
    }
}

#[test]
fn stream_members_are_valid_and_complete() {
    // every stream member validates; no valid point below a prefix bound
    // is missing from the stream prefix
    let mut ctx = RunContext::Pure;
    let q = Structure::rational_order();
    let map = PartialAutomorphism::from_pairs([(rat(3), rat(1)), (rat(0), rat(2))]);
    let x = rat(12); // some point outside dom
    assert!(!map.in_dom(&x));
    let c = q.possible_images(&mut ctx, &map, &x).unwrap();
    let prefix = c.prefix(40, &mut ctx).unwrap();
    let prefix_set: BTreeSet<Point> = prefix.iter().cloned().collect();
    let horizon = prefix.last().unwrap().clone();
    for cand in (0..4000u64).map(rat) {
        if cand.cmp(&horizon) != std::cmp::Ordering::Less {
            continue;
        }
        let mut pairs: Vec<(Point, Point)> =
            map.pairs().map(|(a, b)| (a.clone(), b.clone())).collect();
        pairs.push((x.clone(), cand.clone()));
        let valid = q.is_partial_automorphism(&mut ctx, &pairs) && !map.in_ran(&cand);
        assert_eq!(valid, prefix_set.contains(&cand), "candidate {cand}");
    }
}
