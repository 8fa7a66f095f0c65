//! The parameter family: admissibility of m and the curve data attached to it.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed};
use thiserror::Error;

use crate::numtheory::{is_prime_u64, Factorization, Factorizer, NumTheoryError};

/// Largest parameter accepted; keeps m² + 1 inside a machine word.
pub const MAX_M: u64 = u32::MAX as u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("m = {0} is outside the supported range [2, {MAX_M}]")]
    OutOfRange(u64),
    #[error("m = {} is not admissible ({})", .0.m, .0.reason())]
    Inadmissible(AdmissibilityReport),
    #[error(transparent)]
    NumTheory(#[from] NumTheoryError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub m: u64,
    pub is_even: bool,
    /// m − 1 and m + 1 are both prime.
    pub twin_primes: bool,
    /// m² + 1 is squarefree.
    pub squarefree_check: bool,
    pub admissible: bool,
}

impl AdmissibilityReport {
    pub fn reason(&self) -> String {
        if self.admissible {
            return "admissible".into();
        }
        let mut why = Vec::new();
        if !self.is_even {
            why.push("m is odd".to_string());
        }
        if !self.twin_primes {
            why.push(format!("{} and {} are not both prime", self.m - 1, self.m + 1));
        }
        if !self.squarefree_check {
            why.push(format!("m^2+1 = {} is not squarefree", self.m as u128 * self.m as u128 + 1));
        }
        why.join("; ")
    }
}

/// Admissibility of `m`: even, m ± 1 twin primes, m² + 1 squarefree.
pub fn is_admissible(m: u64) -> Result<AdmissibilityReport, FamilyError> {
    is_admissible_with(m, &Factorizer::new())
}

pub fn is_admissible_with(m: u64, fz: &Factorizer) -> Result<AdmissibilityReport, FamilyError> {
    if !(2..=MAX_M).contains(&m) {
        return Err(FamilyError::OutOfRange(m));
    }
    let is_even = m % 2 == 0;
    let twin_primes = is_prime_u64(m - 1) && is_prime_u64(m + 1);
    // Only factor m² + 1 when it can matter.
    let squarefree_check = if is_even && twin_primes {
        fz.is_squarefree(&BigUint::from(m * m + 1))?
    } else {
        squarefree_u64_small(m * m + 1)
    };
    Ok(AdmissibilityReport {
        m,
        is_even,
        twin_primes,
        squarefree_check,
        admissible: is_even && twin_primes && squarefree_check,
    })
}

// Cheap exact answer for reporting purposes on rejected m: trial division is
// only used up to the cube root, after which the cofactor is squarefree
// unless it is a perfect square.
fn squarefree_u64_small(mut n: u64) -> bool {
    let mut p = 2u64;
    while p.saturating_mul(p).saturating_mul(p) <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let s = (n as f64).sqrt() as u64;
    !(s.saturating_sub(1)..=s + 1).any(|r| r > 1 && r * r == n)
}

/// The curve E_m: y² = (x − e1)(x − e2)(x − e3), with its bad-prime data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveParams {
    pub m: u64,
    /// m⁴ − 1.
    pub a: BigInt,
    /// m⁴ − 1 − 4m².
    pub q: BigInt,
    /// m⁴ − 1 + 4m².
    pub r: BigInt,
    pub n1: BigInt,
    pub n2: BigInt,
    pub t: BigInt,
    pub e1: BigInt,
    pub e2: BigInt,
    pub e3: BigInt,
    pub a_factors: Factorization,
    pub q_factors: Factorization,
    pub r_factors: Factorization,
    pub q_squarefree: bool,
    pub r_squarefree: bool,
    pub report: AdmissibilityReport,
}

impl CurveParams {
    /// Primes dividing m⁴ − 1.
    pub fn p_primes(&self) -> Vec<BigUint> {
        self.a_factors.primes().cloned().collect()
    }

    /// Primes dividing m⁴ − 1 − 4m².
    pub fn q_primes(&self) -> Vec<BigUint> {
        self.q_factors.primes().cloned().collect()
    }

    /// Primes dividing m⁴ − 1 + 4m².
    pub fn r_primes(&self) -> Vec<BigUint> {
        self.r_factors.primes().cloned().collect()
    }

    /// Bad places {2} ∪ P ∪ Q ∪ R, ascending.
    pub fn bad_primes(&self) -> Vec<BigUint> {
        let mut s = vec![BigUint::from(2u32)];
        s.extend(self.p_primes());
        s.extend(self.q_primes());
        s.extend(self.r_primes());
        s.sort();
        s.dedup();
        s
    }

    /// Finite places examined by the descent: the bad primes together with 3.
    pub fn descent_places(&self) -> Vec<BigUint> {
        let mut s = self.bad_primes();
        s.push(BigUint::from(3u32));
        s.sort();
        s.dedup();
        s
    }

    /// Coefficients (a2, a4, a6) of the monic cubic x³ + a2x² + a4x + a6.
    pub fn cubic(&self) -> [BigInt; 3] {
        let a2 = -(&self.e1 + &self.e2 + &self.e3);
        let a4 = &self.e1 * &self.e2 + &self.e1 * &self.e3 + &self.e2 * &self.e3;
        let a6 = -(&self.e1 * &self.e2 * &self.e3);
        [a2, a4, a6]
    }

    /// 2⁶ (m⁴−1)² (m⁴−1−4m²)² (m⁴−1+4m²)², a multiple of the discriminant.
    pub fn discriminant_divisor(&self) -> BigInt {
        let base = &self.a * &self.q * &self.r;
        BigInt::from(64) * &base * &base
    }

    /// Coefficients, constant term first, of x(x − n1)(x − n2) + t².
    pub fn shifted_form(&self) -> [BigInt; 4] {
        let (n1, n2) = (&self.n1, &self.n2);
        [&self.t * &self.t, n1 * n2, -(n1 + n2), BigInt::one()]
    }

    /// Coefficients, constant term first, of (x − e1)(x − e2)(x − e3).
    pub fn root_form(&self) -> [BigInt; 4] {
        let [a2, a4, a6] = self.cubic();
        [a6, a4, a2, BigInt::one()]
    }

    pub fn forms_agree(&self) -> bool {
        self.shifted_form() == self.root_form()
    }
}

impl fmt::Display for CurveParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "E_{}: y^2 = (x - {})(x + {})(x - {})",
            self.m, self.e1, self.a, self.e3
        )
    }
}

/// Builds E_m with the default factorizer.
pub fn build_curve(m: u64) -> Result<CurveParams, FamilyError> {
    build_curve_with(m, &Factorizer::new())
}

pub fn build_curve_with(m: u64, fz: &Factorizer) -> Result<CurveParams, FamilyError> {
    let report = is_admissible_with(m, fz)?;
    if !report.admissible {
        return Err(FamilyError::Inadmissible(report));
    }
    let mb = BigInt::from(m);
    let m2 = &mb * &mb;
    let m4 = &m2 * &m2;
    let a: BigInt = &m4 - 1u32;
    let four_m2: BigInt = &m2 * 4u32;
    let q = &a - &four_m2;
    let r = &a + &four_m2;
    let n1 = (&m2 + 1u32) * (&m2 + 1u32);
    let n2 = -((&m2 - 1u32) * (&m2 - 1u32));
    let t: BigInt = &mb * 2u32 * &a;
    let a_factors = fz.factorize(a.magnitude())?;
    let q_factors = fz.factorize(q.magnitude())?;
    let r_factors = fz.factorize(r.magnitude())?;
    debug_assert!(q.is_positive());
    Ok(CurveParams {
        m,
        e1: a.clone(),
        e2: -a.clone(),
        e3: four_m2,
        q_squarefree: q_factors.is_squarefree(),
        r_squarefree: r_factors.is_squarefree(),
        a,
        q,
        r,
        n1,
        n2,
        t,
        a_factors,
        q_factors,
        r_factors,
        report,
    })
}

/// Lazily yields admissible m in `[lo, hi]`, ascending.
pub struct AdmissibleIter {
    next: u64,
    hi: u64,
    fz: Factorizer,
}

impl Iterator for AdmissibleIter {
    type Item = Result<u64, FamilyError>;

    fn next(&mut self) -> Option<Self::Item> {
        while self.next <= self.hi {
            let m = self.next;
            self.next += 2;
            match is_admissible_with(m, &self.fz) {
                Ok(rep) if rep.admissible => return Some(Ok(m)),
                Ok(_) => {}
                Err(e) => return Some(Err(e)),
            }
        }
        None
    }
}

pub fn admissible_iter(lo: u64, hi: u64, fz: Factorizer) -> AdmissibleIter {
    let lo = lo.max(2);
    AdmissibleIter {
        next: lo + lo % 2,
        hi: hi.min(MAX_M),
        fz,
    }
}

/// All admissible m in `[lo, hi]`, ascending.
pub fn scan_admissible(lo: u64, hi: u64) -> Result<Vec<u64>, FamilyError> {
    admissible_iter(lo, hi, Factorizer::new()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    fn primes_of(f: &Factorization) -> Vec<u64> {
        f.primes().map(|p| p.try_into().unwrap()).collect()
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(6).unwrap().admissible);
        assert!(is_admissible(462).unwrap().admissible);
        let r = is_admissible(8).unwrap();
        assert!(!r.admissible && !r.twin_primes && r.is_even);
        assert!(is_admissible(1).is_err());
        // 18 ± 1 are prime but 325 = 5²·13.
        let r = is_admissible(18).unwrap();
        assert!(r.twin_primes && !r.squarefree_check && !r.admissible);
    }

    #[test]
    fn curve_m6() {
        let c = build_curve(6).unwrap();
        assert_eq!((c.e1.clone(), c.e2.clone(), c.e3.clone()), (1295.into(), (-1295).into(), 144.into()));
        assert_eq!(primes_of(&c.a_factors), [5, 7, 37]);
        assert_eq!(primes_of(&c.q_factors), [1151]);
        assert_eq!(primes_of(&c.r_factors), [1439]);
        assert!(c.forms_agree());
        assert_eq!(c.descent_places().len(), 7);
    }

    #[test]
    fn curve_m12_and_m30() {
        let c = build_curve(12).unwrap();
        assert_eq!(primes_of(&c.a_factors), [5, 11, 13, 29]);
        assert_eq!(primes_of(&c.q_factors), [19, 1061]);
        assert_eq!(primes_of(&c.r_factors), [101, 211]);
        let c = build_curve(30).unwrap();
        assert_eq!(primes_of(&c.a_factors), [17, 29, 31, 53]);
    }

    #[test]
    fn inadmissible_curve_rejected() {
        assert!(matches!(build_curve(8), Err(FamilyError::Inadmissible(_))));
    }

    #[test]
    fn scan_examples() {
        let v = scan_admissible(2, 100).unwrap();
        for m in [6, 12, 30, 42, 60, 72] {
            assert!(v.contains(&m), "{m}");
        }
        // Independent recomputation by trial division.
        let naive = |n: u64| n > 1 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        let sqfree = |n: u64| (2..n).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0);
        let expect: Vec<u64> = (2..=100)
            .filter(|m| m % 2 == 0 && naive(m - 1) && naive(m + 1) && sqfree(m * m + 1))
            .collect();
        assert_eq!(v, expect);
        assert!(scan_admissible(7, 11).unwrap().is_empty());
        assert!(scan_admissible(400, 500).unwrap().contains(&462));
    }

    #[test]
    fn family_invariants_up_to_1000() {
        for m in scan_admissible(2, 1000).unwrap() {
            let c = build_curve(m).unwrap();
            assert!(c.forms_agree());
            assert_eq!(&c.e1 + &c.e2 + &c.e3, BigInt::from(4 * m * m));
            let a2 = c.a.clone() * &c.a;
            assert_eq!(&c.e1 * &c.e2 * &c.e3, -BigInt::from(4 * m * m) * a2);
            let two_a: BigInt = &c.a * 2u32;
            assert!(two_a.gcd(&c.q) == BigInt::one());
            assert!(c.a.gcd(&c.r) == BigInt::one());
            if m >= 6 {
                assert_eq!(m % 3, 0);
                assert!(!c.discriminant_divisor().is_multiple_of(&BigInt::from(3)));
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn forms_agree_for_any_even_m(half in 1u64..5000) {
            let m = 2 * half;
            let rep = is_admissible(m).unwrap();
            let twins = is_prime_u64(m - 1) && is_prime_u64(m + 1);
            proptest::prop_assert_eq!(rep.twin_primes, twins);
            if rep.admissible {
                proptest::prop_assert!(build_curve(m).unwrap().forms_agree());
            } else {
                proptest::prop_assert!(build_curve(m).is_err());
            }
        }

        #[test]
        fn odd_m_is_never_admissible(half in 0u64..100_000) {
            proptest::prop_assert!(!is_admissible(2 * half + 1).unwrap().admissible);
        }
    }
}
