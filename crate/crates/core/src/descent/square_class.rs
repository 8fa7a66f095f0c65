//! Square classes in Q*/Q*² and the finite group Q(S,2).

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::DescentError;
use crate::family::CurveParams;
use crate::numtheory::factorize;

/// sign · ∏ primes, a squarefree representative of a class in Q*/Q*².
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    sign: i8,
    primes: Vec<BigUint>,
}

impl SquareClass {
    pub fn one() -> Self {
        SquareClass { sign: 1, primes: Vec::new() }
    }

    /// Canonicalizes: repeated primes cancel in pairs.
    pub fn new(sign: i8, mut primes: Vec<BigUint>) -> Self {
        primes.sort();
        let mut out: Vec<BigUint> = Vec::with_capacity(primes.len());
        for p in primes {
            if out.last() == Some(&p) {
                out.pop();
            } else {
                out.push(p);
            }
        }
        SquareClass { sign: if sign < 0 { -1 } else { 1 }, primes: out }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn primes(&self) -> &[BigUint] {
        &self.primes
    }

    pub fn is_one(&self) -> bool {
        self.sign == 1 && self.primes.is_empty()
    }

    /// The squarefree integer representing the class.
    pub fn value(&self) -> BigInt {
        let mag: BigUint = self.primes.iter().product();
        BigInt::from_biguint(if self.sign < 0 { Sign::Minus } else { Sign::Plus }, mag)
    }

    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        let mut primes = self.primes.clone();
        primes.extend(other.primes.iter().cloned());
        SquareClass::new(self.sign * other.sign, primes)
    }

    pub fn contains_prime(&self, p: &BigUint) -> bool {
        self.primes.binary_search(p).is_ok()
    }

    pub fn is_supported_on(&self, support: &[BigUint]) -> bool {
        self.primes.iter().all(|p| support.contains(p))
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Squarefree kernel of a nonzero integer, by full factorization.
pub fn square_class(n: &BigInt) -> Result<SquareClass, DescentError> {
    if n.is_zero() {
        return Err(DescentError::ZeroClass);
    }
    let f = factorize(n.magnitude())?;
    let primes = f
        .factors()
        .iter()
        .filter(|(_, e)| e % 2 == 1)
        .map(|(p, _)| p.clone())
        .collect();
    Ok(SquareClass::new(if n.is_negative() { -1 } else { 1 }, primes))
}

/// Square class of `n` when every prime occurring to an odd power lies in
/// `support`; an error otherwise.
pub fn square_class_in(n: &BigInt, support: &[BigUint]) -> Result<SquareClass, DescentError> {
    if n.is_zero() {
        return Err(DescentError::ZeroClass);
    }
    let mut rest = n.magnitude().clone();
    let mut primes = Vec::new();
    for p in support {
        let mut odd = false;
        while (&rest % p).is_zero() {
            rest /= p;
            odd = !odd;
        }
        if odd {
            primes.push(p.clone());
        }
    }
    let root = rest.sqrt();
    if &root * &root != rest {
        return Err(DescentError::OutsideSupport(n.clone()));
    }
    Ok(SquareClass::new(if n.is_negative() { -1 } else { 1 }, primes))
}

/// Square class of a nonzero rational a/b, which equals that of a·b.
pub fn square_class_of_rational_in(x: &BigRational, support: &[BigUint]) -> Result<SquareClass, DescentError> {
    square_class_in(&(x.numer() * x.denom()), support)
}

/// Generators −1, 2 and the odd bad primes; classes are bit masks over them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    gens: Vec<SquareClass>,
    values: Vec<BigInt>,
    support: Vec<BigUint>,
}

/// Masks are stored in a u64.
pub const MAX_GENERATORS: usize = 32;

impl Basis {
    pub fn for_curve(c: &CurveParams) -> Result<Self, DescentError> {
        let support = c.bad_primes();
        let mut gens = vec![SquareClass::new(-1, vec![])];
        gens.extend(support.iter().map(|p| SquareClass::new(1, vec![p.clone()])));
        if gens.len() > MAX_GENERATORS {
            return Err(DescentError::TooManyGenerators(gens.len()));
        }
        let values = gens.iter().map(SquareClass::value).collect();
        Ok(Basis { gens, values, support })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generators(&self) -> &[SquareClass] {
        &self.gens
    }

    /// The primes {2} ∪ S.
    pub fn support(&self) -> &[BigUint] {
        &self.support
    }

    pub fn mask_of(&self, cls: &SquareClass) -> Result<u64, DescentError> {
        let mut mask = u64::from(cls.sign < 0);
        for p in cls.primes() {
            let i = self
                .support
                .binary_search(p)
                .map_err(|_| DescentError::OutsideSupport(cls.value()))?;
            mask |= 1 << (i + 1);
        }
        Ok(mask)
    }

    pub fn mask_of_int(&self, n: &BigInt) -> Result<u64, DescentError> {
        self.mask_of(&square_class_in(n, &self.support)?)
    }

    pub fn class_of(&self, mask: u64) -> SquareClass {
        let sign = if mask & 1 == 1 { -1 } else { 1 };
        let primes = (1..self.gens.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.support[i - 1].clone())
            .collect();
        SquareClass::new(sign, primes)
    }

    pub fn value_of(&self, mask: u64) -> BigInt {
        let mut v = BigInt::one();
        for (i, g) in self.values.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v *= g;
            }
        }
        v
    }
}

/// Generators of Q(S,2): [−1], [2] and [p] for every odd bad prime.
pub fn q_s_2(c: &CurveParams) -> Result<Vec<SquareClass>, DescentError> {
    Ok(Basis::for_curve(c)?.generators().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::build_curve;

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn square_class_examples() {
        assert_eq!(square_class(&int(18)).unwrap().value(), int(2));
        let c = square_class(&int(-1295)).unwrap();
        assert_eq!(c.sign(), -1);
        assert_eq!(c.value(), int(-1295));
        assert!(square_class(&int(1)).unwrap().is_one());
        assert!(square_class(&int(0)).is_err());
        assert_eq!(square_class(&int(-72)).unwrap().value(), int(-2));
    }

    #[test]
    fn support_is_enforced() {
        let c = build_curve(6).unwrap();
        let s = c.bad_primes();
        assert_eq!(square_class_in(&int(5 * 7 * 9), &s).unwrap().value(), int(35));
        assert!(matches!(square_class_in(&int(11), &s), Err(DescentError::OutsideSupport(_))));
    }

    #[test]
    fn generators_of_q_s_2() {
        let c = build_curve(6).unwrap();
        let g: Vec<BigInt> = q_s_2(&c).unwrap().iter().map(|x| x.value()).collect();
        assert_eq!(g, [-1, 2, 5, 7, 37, 1151, 1439].map(int));
        assert_eq!(q_s_2(&build_curve(12).unwrap()).unwrap().len(), 10);
        let b = Basis::for_curve(&c).unwrap();
        assert_eq!(b.mask_of(&SquareClass::one()).unwrap(), 0);
        for mask in 0..(1u64 << b.len()) {
            let cls = b.class_of(mask);
            assert_eq!(b.mask_of(&cls).unwrap(), mask);
            assert_eq!(b.value_of(mask), cls.value());
        }
    }

    #[test]
    fn multiplication_cancels_squares() {
        let a = SquareClass::new(-1, vec![5u32.into(), 7u32.into()]);
        let b = SquareClass::new(-1, vec![7u32.into(), 37u32.into()]);
        assert_eq!(a.mul(&b).value(), int(185));
        assert!(a.mul(&a).is_one());
    }
}
