//! Assembly of the 2-Selmer group from per-coset local tests, and the
//! closed-form lower bounds.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rayon::prelude::*;

use super::candidates::{canonical_pair, torsion_masks, CosetEnumerator, MaskPair};
use super::filters::{lemma_exclusion_filter, necessary_conditions, real_solvable};
use super::local::{required_depth, LocalSolver, LocalVerdict, DEFAULT_ENUM_LIMIT};
use super::square_class::{Basis, SquareClass};
use super::{DescentError, DescentPair, PairStatus, Place};
use crate::family::CurveParams;
use crate::numtheory::{is_prime, legendre};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelmerOptions {
    /// Run the cheap exclusion rules and necessary conditions before the
    /// local searches. Turning this off checks every coset locally.
    pub use_lemma_filters: bool,
    /// Fixed search depth; None uses the required depth per place and pair.
    pub depth: Option<u32>,
    pub enum_limit: u64,
    pub seed: u64,
    /// Keep every classified coset, not only members.
    pub keep_all: bool,
}

impl Default for SelmerOptions {
    fn default() -> Self {
        SelmerOptions { use_lemma_filters: true, depth: None, enum_limit: DEFAULT_ENUM_LIMIT, seed: 0, keep_all: false }
    }
}

#[derive(Debug, Clone)]
pub struct SelmerResult {
    pub curve: CurveParams,
    /// Member cosets in canonical order, with local evidence.
    pub members: Vec<DescentPair>,
    /// Every coset with its status, when requested.
    pub all_pairs: Option<Vec<DescentPair>>,
    pub coset_count: u64,
    pub size_log2: u32,
    pub s2: u32,
    pub theorem_w: u32,
    pub corollary_value: Option<u32>,
    pub rank_upper_bound: u32,
    /// Most refinement levels any local search needed.
    pub max_levels: u32,
    basis: Basis,
    torsion: [MaskPair; 3],
    member_masks: BTreeSet<MaskPair>,
}

impl SelmerResult {
    /// Whether ([b1], [b2]) lies in the Selmer group.
    pub fn contains(&self, b1: &SquareClass, b2: &SquareClass) -> bool {
        match (self.basis.mask_of(b1), self.basis.mask_of(b2)) {
            (Ok(x), Ok(y)) => self.member_masks.contains(&canonical_pair((x, y), &self.torsion)),
            _ => false,
        }
    }

    /// Every element of the group (members times the torsion image).
    pub fn elements(&self) -> Vec<(SquareClass, SquareClass)> {
        let t = [(0, 0), self.torsion[0], self.torsion[1], self.torsion[2]];
        let mut out: Vec<(SquareClass, SquareClass)> = self
            .member_masks
            .iter()
            .flat_map(|m| t.iter().map(move |s| (m.0 ^ s.0, m.1 ^ s.1)))
            .map(|(a, b)| (self.basis.class_of(a), self.basis.class_of(b)))
            .collect();
        out.sort();
        out
    }

    /// Closure under componentwise multiplication.
    pub fn is_closed(&self) -> bool {
        is_closed(&self.member_masks, &self.torsion)
    }
}

fn is_closed(members: &BTreeSet<MaskPair>, t: &[MaskPair; 3]) -> bool {
    members.iter().all(|x| {
        members
            .iter()
            .all(|y| members.contains(&canonical_pair((x.0 ^ y.0, x.1 ^ y.1), t)))
    })
}

pub fn selmer_group(c: &CurveParams) -> Result<SelmerResult, DescentError> {
    selmer_group_with(c, &SelmerOptions::default())
}

pub fn selmer_group_with(c: &CurveParams, opts: &SelmerOptions) -> Result<SelmerResult, DescentError> {
    if !c.q_squarefree {
        return Err(DescentError::NotSquarefree { which: "m^4-1-4m^2", value: c.q.clone() });
    }
    if !c.r_squarefree {
        return Err(DescentError::NotSquarefree { which: "m^4-1+4m^2", value: c.r.clone() });
    }
    let basis = Basis::for_curve(c)?;
    let torsion = torsion_masks(c, &basis)?;
    let masks: Vec<MaskPair> = CosetEnumerator::new(&basis, torsion).collect();
    let places: Vec<u64> = c
        .descent_places()
        .iter()
        .map(|p| u64::try_from(p).map_err(|_| DescentError::UnsupportedPlace(p.clone())))
        .collect::<Result<_, _>>()?;
    let solver = LocalSolver::new().with_enum_limit(opts.enum_limit).with_seed(opts.seed);

    let classified: Vec<(DescentPair, u32)> = masks
        .par_iter()
        .map(|&(x, y)| {
            let d = DescentPair::new(basis.class_of(x), basis.class_of(y));
            classify(c, d, &places, &solver, opts)
        })
        .collect::<Result<_, _>>()?;

    let max_levels = classified.iter().map(|(_, l)| *l).max().unwrap_or(0);
    let mut member_masks = BTreeSet::new();
    let mut members = Vec::new();
    for (mask, (d, _)) in masks.iter().zip(&classified) {
        if d.is_member() {
            member_masks.insert(*mask);
            members.push(d.clone());
        }
    }
    let size = 4 * members.len() as u64;
    if !size.is_power_of_two() {
        return Err(DescentError::GroupStructure(format!("{size} elements is not a power of two")));
    }
    if !is_closed(&member_masks, &torsion) {
        return Err(DescentError::GroupStructure("members are not closed under multiplication".into()));
    }
    let size_log2 = size.trailing_zeros();
    let s2 = size_log2 - 2;
    Ok(SelmerResult {
        curve: c.clone(),
        members,
        all_pairs: opts.keep_all.then(|| classified.into_iter().map(|(d, _)| d).collect()),
        coset_count: masks.len() as u64,
        size_log2,
        s2,
        theorem_w: theorem_lower_bound(c),
        corollary_value: corollary_rank(c),
        rank_upper_bound: s2,
        max_levels,
        basis,
        torsion,
        member_masks,
    })
}

fn classify(
    c: &CurveParams,
    mut d: DescentPair,
    places: &[u64],
    solver: &LocalSolver,
    opts: &SelmerOptions,
) -> Result<(DescentPair, u32), DescentError> {
    let real = real_solvable(&d);
    let real_ok = real.is_solvable();
    d.evidence.push((Place::Real, real));
    if !real_ok {
        d.status = PairStatus::LocallyUnsolvable(Place::Real);
        return Ok((d, 0));
    }
    if opts.use_lemma_filters {
        if let Some(reason) = lemma_exclusion_filter(c, &d) {
            d.status = PairStatus::Excluded(reason);
            return Ok((d, 0));
        }
        if let Some(fail) = necessary_conditions(c, &d).into_iter().next() {
            d.status = PairStatus::NecessaryFail(fail);
            return Ok((d, 0));
        }
    }
    let (b1, b2) = d.values();
    let mut levels = 0;
    for &l in places {
        let depth = opts.depth.unwrap_or_else(|| required_depth(c, &b1, &b2, l));
        let verdict = solver.solve(c, &b1, &b2, Place::Prime(l), depth)?;
        levels = levels.max(match &verdict {
            LocalVerdict::Solvable(w) => w.levels,
            LocalVerdict::Unsolvable { depth } => *depth,
            _ => 0,
        });
        let ok = verdict.is_solvable();
        d.evidence.push((Place::Prime(l), verdict));
        if !ok {
            d.status = PairStatus::LocallyUnsolvable(Place::Prime(l));
            return Ok((d, levels));
        }
    }
    d.status = PairStatus::Member;
    Ok((d, levels))
}

fn sym(a: &BigInt, p: &num_bigint::BigUint) -> i8 {
    legendre(a, p).expect("curve primes are odd primes")
}

/// Number of primes p | m⁴ − 1 whose symbols against every q- and r-prime
/// meet the residue conditions of the lower bound.
pub fn theorem_lower_bound(c: &CurveParams) -> u32 {
    let qs = c.q_primes();
    let rs = c.r_primes();
    let four = num_bigint::BigUint::from(4u32);
    c.p_primes()
        .into_iter()
        .filter(|p| {
            let pi = BigInt::from(p.clone());
            let r_arg = if p % &four == 1u32.into() { pi.clone() } else { -pi.clone() };
            qs.iter().all(|q| sym(&pi, q) == 1) && rs.iter().all(|r| sym(&r_arg, r) == 1)
        })
        .count() as u32
}

/// ω(m⁴ − 1) + 1 when both cofactors m⁴ − 1 ∓ 4m² are prime.
pub fn corollary_rank(c: &CurveParams) -> Option<u32> {
    let prime = |n: &BigInt| n.sign() == num_bigint::Sign::Plus && is_prime(n.magnitude());
    (prime(&c.q) && prime(&c.r)).then(|| c.p_primes().len() as u32 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{p1, p2, p3};
    use crate::descent::{phi_image, phi_torsion_images, square_class};
    use crate::family::build_curve;

    fn cls(n: i64) -> SquareClass {
        square_class(&n.into()).unwrap()
    }

    #[test]
    fn m6_selmer_group() {
        let c = build_curve(6).unwrap();
        let s = selmer_group(&c).unwrap();
        assert_eq!(s.coset_count, 4096);
        assert_eq!(s.s2, 4);
        assert_eq!(s.size_log2, 6);
        assert_eq!(s.members.len(), 16);
        assert_eq!(s.rank_upper_bound, 4);
        assert!(s.is_closed());
        for (b1, b2) in [(5, 5), (37, 37), (-7, 7), (-1151, 1), (1, 1)] {
            assert!(s.contains(&cls(b1), &cls(b2)), "({b1},{b2})");
        }
        assert!(!s.contains(&cls(5), &cls(1)));
        assert_eq!(s.elements().len(), 64);
        for d in &s.members {
            assert!(d.evidence.iter().all(|(_, v)| v.is_solvable()));
            assert_eq!(d.evidence.len(), 1 + c.descent_places().len());
        }
    }

    #[test]
    fn image_of_known_points_is_contained() {
        for m in [6, 12] {
            let c = build_curve(m).unwrap();
            let s = selmer_group(&c).unwrap();
            for p in [p1(&c), p2(&c), p3(&c)] {
                let d = phi_image(&c, &p).unwrap();
                assert!(s.contains(&d.b1, &d.b2), "m={m} {d}");
            }
            for d in phi_torsion_images(&c).unwrap() {
                assert!(s.contains(&d.b1, &d.b2));
            }
        }
    }

    #[test]
    fn filters_do_not_change_the_group() {
        let c = build_curve(6).unwrap();
        let with = selmer_group_with(&c, &SelmerOptions { keep_all: true, ..Default::default() }).unwrap();
        let without =
            selmer_group_with(&c, &SelmerOptions { use_lemma_filters: false, keep_all: true, ..Default::default() })
                .unwrap();
        assert_eq!(with.elements(), without.elements());
        // Nothing a filter rejects is solvable at every place.
        for (a, b) in with.all_pairs.unwrap().iter().zip(without.all_pairs.unwrap()) {
            if matches!(a.status, PairStatus::Excluded(_) | PairStatus::NecessaryFail(_)) {
                assert!(!b.is_member(), "{a}");
            }
        }
    }

    #[test]
    fn bounds() {
        let c = build_curve(6).unwrap();
        assert_eq!(theorem_lower_bound(&c), 3);
        assert_eq!(corollary_rank(&c), Some(4));
        let c = build_curve(12).unwrap();
        assert_eq!(corollary_rank(&c), None);
        let c = build_curve(462).unwrap();
        assert_eq!(corollary_rank(&c), Some(5));
        assert_eq!(theorem_lower_bound(&c), 4);
    }

    #[test]
    fn refuses_non_squarefree_cofactors() {
        let c = build_curve(228).unwrap();
        assert!(!c.q_squarefree);
        assert!(matches!(selmer_group(&c), Err(DescentError::NotSquarefree { .. })));
        let c = build_curve(600).unwrap();
        assert!(!c.r_squarefree);
        assert!(matches!(selmer_group(&c), Err(DescentError::NotSquarefree { .. })));
    }

    #[test]
    fn fixed_depth_override() {
        let c = build_curve(6).unwrap();
        let r = selmer_group_with(&c, &SelmerOptions { depth: Some(2), ..Default::default() });
        assert!(matches!(r, Err(DescentError::DepthExceeded { .. })));
        let r = selmer_group_with(&c, &SelmerOptions { depth: Some(40), ..Default::default() }).unwrap();
        assert_eq!(r.s2, 4);
    }
}
