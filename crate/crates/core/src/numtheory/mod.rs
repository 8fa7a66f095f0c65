//! Exact integer and rational arithmetic services: primality, factorization,
//! quadratic residues, p-adic valuations and modular square roots.

mod factor;
pub mod modular;
mod primes;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

pub use factor::{
    factorize, is_squarefree, FactorCache, Factorization, Factorizer, PartialFactorization,
    DEFAULT_RHO_BUDGET,
};
pub use primes::{
    deterministic_limit, is_prime, is_prime_seeded, is_prime_u64, small_primes, MR_BASES,
    RANDOM_ROUNDS, TRIAL_LIMIT,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumTheoryError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(BigUint),
    #[error("valuation of zero is infinite")]
    ZeroValuation,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("factorization budget exhausted; unfactored cofactors {:?}", .0.unfactored)]
    FactorizationTimeout(PartialFactorization),
}

fn check_odd_prime(p: &BigUint) -> Result<(), NumTheoryError> {
    if p.is_even() || !is_prime(p) {
        return Err(NumTheoryError::NotOddPrime(p.clone()));
    }
    Ok(())
}

/// Legendre symbol (a/p) for an odd prime `p`.
pub fn legendre(a: &BigInt, p: &BigUint) -> Result<i8, NumTheoryError> {
    check_odd_prime(p)?;
    let pb = BigInt::from(p.clone());
    let r = a.mod_floor(&pb);
    if r.is_zero() {
        return Ok(0);
    }
    if let Some(p64) = p.to_u64() {
        return Ok(modular::legendre_u64(r.to_u64().unwrap(), p64));
    }
    let e = (&pb - 1u32) / 2u32;
    Ok(if r.modpow(&e, &pb) == BigInt::from(1) { 1 } else { -1 })
}

/// A square root of `a` modulo the odd prime `p`, or `None` for non-residues.
pub fn sqrt_mod(a: &BigInt, p: &BigUint) -> Result<Option<BigUint>, NumTheoryError> {
    check_odd_prime(p)?;
    let p64 = p
        .to_u64()
        .ok_or_else(|| NumTheoryError::InvalidInput("modulus exceeds 64 bits".into()))?;
    let a = modular::reduce_big(a, p64);
    Ok(modular::sqrt_mod_u64(a, p64).map(BigUint::from))
}

/// Exponent of `p` in the nonzero integer `n`.
pub fn valuation_int(n: &BigInt, p: &BigUint) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let mut m = n.magnitude().clone();
    let mut v = 0;
    while (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    Some(v)
}

/// Word-sized variant of [`valuation_int`].
pub fn valuation_u64(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let mut m = n.magnitude().clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&BigUint::from(p));
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn valuation(x: &BigRational, p: &BigUint) -> Result<i64, NumTheoryError> {
    if x.is_zero() {
        return Err(NumTheoryError::ZeroValuation);
    }
    if *p < BigUint::from(2u32) {
        return Err(NumTheoryError::InvalidInput(format!("{p} is not a prime")));
    }
    let num = valuation_int(x.numer(), p).unwrap() as i64;
    let den = valuation_int(x.denom(), p).unwrap() as i64;
    Ok(num - den)
}
