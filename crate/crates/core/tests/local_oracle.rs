//! Local solvability against two independent oracles on every m = 6 coset:
//! the image of E(Q_ℓ) under x ↦ ([x − e1], [x − e2]) built from sampled
//! points, and a plain search over integer points of P¹.

mod common;

use common::{integer_point, kummer_image, local_class, PRIMES_TO_50};
use emrank::descent::{candidate_pairs, required_depth, LocalSolver, Place};
use emrank::family::build_curve;
use num_traits::Signed;

#[test]
fn local_solver_matches_kummer_image_for_small_places() {
    let c = build_curve(6).unwrap();
    let pairs = candidate_pairs(&c).unwrap();
    let solver = LocalSolver::new();
    for l in PRIMES_TO_50 {
        let image = kummer_image(&c, l);
        let mut agree = 0;
        for d in &pairs {
            let (b1, b2) = d.values();
            let k = required_depth(&c, &b1, &b2, l);
            let got = solver.solve(&c, &b1, &b2, Place::Prime(l), k).unwrap().is_solvable();
            let want = image.contains(&(local_class(&b1, l), local_class(&b2, l)));
            assert_eq!(got, want, "pair {d} at {l}");
            agree += 1;
        }
        assert_eq!(agree, 4096);
    }
}

#[test]
fn local_solver_matches_integer_point_search() {
    let c = build_curve(6).unwrap();
    let solver = LocalSolver::new();
    for (l, k) in [(2u64, 7u32), (3, 4), (5, 3), (7, 3)] {
        for d in candidate_pairs(&c).unwrap() {
            let (b1, b2) = d.values();
            if b2.is_negative() {
                continue;
            }
            let depth = required_depth(&c, &b1, &b2, l);
            let got = solver.solve(&c, &b1, &b2, Place::Prime(l), depth).unwrap().is_solvable();
            assert_eq!(got, integer_point(&c, &b1, &b2, l, k), "pair {d} at {l}");
        }
    }
}

#[test]
fn good_places_are_always_solvable() {
    // Above 3 and away from the bad primes every pair has a local point.
    let c = build_curve(6).unwrap();
    let solver = LocalSolver::new();
    for d in candidate_pairs(&c).unwrap().iter().step_by(7) {
        let (b1, b2) = d.values();
        for l in [11u64, 13, 101, 1009] {
            let k = required_depth(&c, &b1, &b2, l);
            assert!(solver.solve(&c, &b1, &b2, Place::Prime(l), k).unwrap().is_solvable());
        }
    }
}
