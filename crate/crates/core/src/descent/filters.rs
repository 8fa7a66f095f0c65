//! Cheap exclusion rules and necessary conditions on descent pairs, and the
//! real place.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::local::LocalVerdict;
use super::DescentPair;
use crate::family::CurveParams;
use crate::numtheory::legendre;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExclusionReason {
    /// b2 < 0: no real point.
    NegativeB2,
    QPrimeDividesB2(BigUint),
    RPrimeDividesB1(BigUint),
    /// p divides exactly one of b1, b2.
    PValuationOne(BigUint),
    /// Exactly one of b1, b2 is even.
    ProductTwoMod4,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExclusionReason::NegativeB2 => write!(f, "b2 < 0 (real place)"),
            ExclusionReason::QPrimeDividesB2(p) => write!(f, "q-prime {p} divides b2"),
            ExclusionReason::RPrimeDividesB1(p) => write!(f, "r-prime {p} divides b1"),
            ExclusionReason::PValuationOne(p) => write!(f, "v_{p}(b1 b2) = 1"),
            ExclusionReason::ProductTwoMod4 => write!(f, "b1 b2 = 2 mod 4"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NecessaryFailure {
    PCondition(BigUint),
    QCondition(BigUint),
    RCondition(BigUint),
    B1NotOneMod4,
}

impl fmt::Display for NecessaryFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NecessaryFailure::PCondition(p) => write!(f, "symbol condition at p = {p}"),
            NecessaryFailure::QCondition(p) => write!(f, "symbol condition at q = {p}"),
            NecessaryFailure::RCondition(p) => write!(f, "symbol condition at r = {p}"),
            NecessaryFailure::B1NotOneMod4 => write!(f, "b1 is not 1 mod 4"),
        }
    }
}

fn divides(p: &BigUint, n: &BigInt) -> bool {
    (n.magnitude() % p).is_zero()
}

// Primes from the curve factorizations are odd.
fn sym(a: &BigInt, p: &BigUint) -> i8 {
    legendre(a, p).expect("curve primes are odd primes")
}

/// The first rule that rules the pair out, in the fixed order
/// sign, q-primes, r-primes, p-valuations, parity.
pub fn lemma_exclusion_filter(c: &CurveParams, d: &DescentPair) -> Option<ExclusionReason> {
    let (b1, b2) = d.values();
    if b2.is_negative() {
        return Some(ExclusionReason::NegativeB2);
    }
    if let Some(q) = c.q_primes().into_iter().find(|q| divides(q, &b2)) {
        return Some(ExclusionReason::QPrimeDividesB2(q));
    }
    if let Some(r) = c.r_primes().into_iter().find(|r| divides(r, &b1)) {
        return Some(ExclusionReason::RPrimeDividesB1(r));
    }
    if let Some(p) = c.p_primes().into_iter().find(|p| divides(p, &b1) != divides(p, &b2)) {
        return Some(ExclusionReason::PValuationOne(p));
    }
    if b1.is_even() != b2.is_even() {
        return Some(ExclusionReason::ProductTwoMod4);
    }
    None
}

/// Every failed necessary condition (empty when the pair passes). Intended
/// for pairs that survive [`lemma_exclusion_filter`].
pub fn necessary_conditions(c: &CurveParams, d: &DescentPair) -> Vec<NecessaryFailure> {
    let (b1, b2) = d.values();
    let prod = &b1 * &b2;
    let two = BigInt::from(2);
    let mut out = Vec::new();
    for p in c.p_primes() {
        let (in1, in2) = (divides(&p, &b1), divides(&p, &b2));
        let ok = if in1 && in2 {
            let pp = BigInt::from(&p * &p);
            sym(&(-(&prod / pp)), &p) == 1
        } else if !in1 && !in2 {
            sym(&b1, &p) == sym(&b2, &p)
        } else {
            true
        };
        if !ok {
            out.push(NecessaryFailure::PCondition(p));
        }
    }
    for q in c.q_primes() {
        let want = if divides(&q, &b1) { sym(&two, &q) } else { 1 };
        if sym(&b2, &q) != want {
            out.push(NecessaryFailure::QCondition(q));
        }
    }
    for r in c.r_primes() {
        let want = if divides(&r, &b2) { sym(&two, &r) } else { 1 };
        if sym(&b1, &r) != want {
            out.push(NecessaryFailure::RCondition(r));
        }
    }
    if b1.mod_floor(&BigInt::from(4)) != BigInt::from(1) {
        out.push(NecessaryFailure::B1NotOneMod4);
    }
    out
}

/// Solvable over R exactly when b2 > 0.
pub fn real_solvable(d: &DescentPair) -> LocalVerdict {
    if d.b2.sign() > 0 {
        LocalVerdict::RealSolvable
    } else {
        LocalVerdict::RealUnsolvable
    }
}
