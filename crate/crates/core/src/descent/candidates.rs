//! Enumeration of Q(S,2)² modulo the image of the torsion subgroup.

use super::phi::phi_torsion_images;
use super::square_class::Basis;
use super::{DescentError, DescentPair};
use crate::family::CurveParams;

pub type MaskPair = (u64, u64);

/// Masks of the three nontrivial torsion images.
pub fn torsion_masks(c: &CurveParams, basis: &Basis) -> Result<[MaskPair; 3], DescentError> {
    let imgs = phi_torsion_images(c)?;
    let mut out = [(0, 0); 3];
    for (o, d) in out.iter_mut().zip(imgs.iter()) {
        *o = (basis.mask_of(&d.b1)?, basis.mask_of(&d.b2)?);
    }
    Ok(out)
}

const TWO: u64 = 2;

fn both_even(p: MaskPair) -> bool {
    p.0 & TWO != 0 && p.1 & TWO != 0
}

/// The representative of the torsion coset of `x`: the smallest element,
/// in (b1, b2) order, among those with b1·b2 ≢ 0 (mod 4).
pub fn canonical_pair(x: MaskPair, t: &[MaskPair; 3]) -> MaskPair {
    let coset = [x, (x.0 ^ t[0].0, x.1 ^ t[0].1), (x.0 ^ t[1].0, x.1 ^ t[1].1), (x.0 ^ t[2].0, x.1 ^ t[2].1)];
    coset
        .iter()
        .copied()
        .filter(|&p| !both_even(p))
        .min()
        .unwrap_or_else(|| coset.iter().copied().min().unwrap())
}

/// Number of torsion cosets in Q(S,2)².
pub fn coset_count(basis: &Basis) -> u64 {
    1u64 << (2 * basis.len() - 2)
}

/// Canonical coset representatives in increasing (b1, b2) order.
pub struct CosetEnumerator {
    n: usize,
    torsion: [MaskPair; 3],
    next: u64,
    end: u64,
}

impl CosetEnumerator {
    pub fn new(basis: &Basis, torsion: [MaskPair; 3]) -> Self {
        let n = basis.len();
        CosetEnumerator { n, torsion, next: 0, end: 1u64 << (2 * n) }
    }
}

impl Iterator for CosetEnumerator {
    type Item = MaskPair;

    fn next(&mut self) -> Option<MaskPair> {
        while self.next < self.end {
            let idx = self.next;
            self.next += 1;
            let x = (idx >> self.n, idx & ((1u64 << self.n) - 1));
            if canonical_pair(x, &self.torsion) == x {
                return Some(x);
            }
        }
        None
    }
}

/// Every torsion coset of Q(S,2)², once, as an undecided pair.
pub fn candidate_pairs(c: &CurveParams) -> Result<Vec<DescentPair>, DescentError> {
    let basis = Basis::for_curve(c)?;
    let t = torsion_masks(c, &basis)?;
    Ok(CosetEnumerator::new(&basis, t)
        .map(|(a, b)| DescentPair::new(basis.class_of(a), basis.class_of(b)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::SquareClass;
    use crate::family::build_curve;
    use std::collections::HashSet;

    #[test]
    fn m6_has_4096_cosets() {
        let c = build_curve(6).unwrap();
        let basis = Basis::for_curve(&c).unwrap();
        let pairs = candidate_pairs(&c).unwrap();
        assert_eq!(pairs.len(), 4096);
        assert_eq!(coset_count(&basis) as usize, pairs.len());
        assert_eq!(2u64.pow(2 * 7) / 4, 4096);
        assert!(pairs.iter().any(|p| p.b1.is_one() && p.b2.is_one()));
        for p in &pairs {
            let prod = p.b1.value() * p.b2.value();
            assert!(&prod % 4 != 0.into());
        }
    }

    #[test]
    fn cosets_partition_the_group() {
        let c = build_curve(6).unwrap();
        let basis = Basis::for_curve(&c).unwrap();
        let t = torsion_masks(&c, &basis).unwrap();
        let reps: HashSet<MaskPair> = CosetEnumerator::new(&basis, t).collect();
        let n = basis.len();
        let mut seen = HashSet::new();
        for a in 0..1u64 << n {
            for b in 0..1u64 << n {
                let r = canonical_pair((a, b), &t);
                assert!(reps.contains(&r));
                seen.insert(r);
            }
        }
        assert_eq!(seen.len(), reps.len());
    }

    #[test]
    fn torsion_images_form_a_group_of_order_four() {
        let c = build_curve(12).unwrap();
        let basis = Basis::for_curve(&c).unwrap();
        let t = torsion_masks(&c, &basis).unwrap();
        assert_eq!((t[0].0 ^ t[1].0, t[0].1 ^ t[1].1), t[2]);
        assert!(t.iter().all(|&x| x != (0, 0)));
        let one = basis.mask_of(&SquareClass::one()).unwrap();
        assert_eq!(canonical_pair(t[2], &t), (one, one));
    }
}
