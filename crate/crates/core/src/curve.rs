//! Exact group law on E_m over Q, reduction at good primes, point counting
//! and the torsion subgroup.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::family::CurveParams;
use crate::numtheory::{is_prime_u64, modular::reduce_big};

/// Default ceiling on the field size for exhaustive point counts.
pub const COUNT_BOUND: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("point {0} is not on the curve")]
    NotOnCurve(RationalPoint),
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("field size {size} exceeds the point-counting bound {bound}")]
    FieldTooLarge { size: u64, bound: u64 },
    #[error("torsion consistency check failed: {0}")]
    Inconsistent(String),
}

/// A point of E(Q): the identity or an affine point with reduced fractions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RationalPoint {
    Infinity,
    Affine { x: BigRational, y: BigRational },
}

impl RationalPoint {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        RationalPoint::Affine { x, y }
    }

    pub fn from_ints(x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        RationalPoint::Affine {
            x: BigRational::from_integer(x.into()),
            y: BigRational::from_integer(y.into()),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RationalPoint::Infinity)
    }

    pub fn x(&self) -> Option<&BigRational> {
        match self {
            RationalPoint::Infinity => None,
            RationalPoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&BigRational> {
        match self {
            RationalPoint::Infinity => None,
            RationalPoint::Affine { y, .. } => Some(y),
        }
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalPoint::Infinity => write!(f, "O"),
            RationalPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

/// f(x) = x³ + a2x² + a4x + a6 evaluated exactly.
pub fn cubic_at(c: &CurveParams, x: &BigRational) -> BigRational {
    let [a2, a4, a6] = c.cubic();
    ((x + rat(&a2)) * x + rat(&a4)) * x + rat(&a6)
}

pub fn contains(c: &CurveParams, p: &RationalPoint) -> bool {
    match p {
        RationalPoint::Infinity => true,
        RationalPoint::Affine { x, y } => y * y == cubic_at(c, x),
    }
}

fn check(c: &CurveParams, p: &RationalPoint) -> Result<(), CurveError> {
    if contains(c, p) {
        Ok(())
    } else {
        Err(CurveError::NotOnCurve(p.clone()))
    }
}

pub fn neg(p: &RationalPoint) -> RationalPoint {
    match p {
        RationalPoint::Infinity => RationalPoint::Infinity,
        RationalPoint::Affine { x, y } => RationalPoint::new(x.clone(), -y),
    }
}

// Chord-tangent law without membership checks.
fn add_unchecked(c: &CurveParams, p: &RationalPoint, q: &RationalPoint) -> RationalPoint {
    let (x1, y1, x2, y2) = match (p, q) {
        (RationalPoint::Infinity, _) => return q.clone(),
        (_, RationalPoint::Infinity) => return p.clone(),
        (RationalPoint::Affine { x: x1, y: y1 }, RationalPoint::Affine { x: x2, y: y2 }) => {
            (x1, y1, x2, y2)
        }
    };
    let [a2, a4, _] = c.cubic();
    let a2 = rat(&a2);
    let lambda = if x1 != x2 {
        (y2 - y1) / (x2 - x1)
    } else if y1 == y2 && !y1.is_zero() {
        let three = BigRational::from_integer(3.into());
        let two = BigRational::from_integer(2.into());
        (three * x1 * x1 + &two * &a2 * x1 + rat(&a4)) / (two * y1)
    } else {
        return RationalPoint::Infinity;
    };
    let x3 = &lambda * &lambda - &a2 - x1 - x2;
    let y3 = -(y1 + &lambda * (&x3 - x1));
    RationalPoint::new(x3, y3)
}

pub fn add(c: &CurveParams, p: &RationalPoint, q: &RationalPoint) -> Result<RationalPoint, CurveError> {
    check(c, p)?;
    check(c, q)?;
    Ok(add_unchecked(c, p, q))
}

pub fn sub(c: &CurveParams, p: &RationalPoint, q: &RationalPoint) -> Result<RationalPoint, CurveError> {
    add(c, p, &neg(q))
}

pub fn double(c: &CurveParams, p: &RationalPoint) -> Result<RationalPoint, CurveError> {
    add(c, p, p)
}

/// [n]P by double-and-add; negative n negates.
pub fn mul(c: &CurveParams, p: &RationalPoint, n: i64) -> Result<RationalPoint, CurveError> {
    check(c, p)?;
    let mut base = if n < 0 { neg(p) } else { p.clone() };
    let mut k = n.unsigned_abs();
    let mut acc = RationalPoint::Infinity;
    while k > 0 {
        if k & 1 == 1 {
            acc = add_unchecked(c, &acc, &base);
        }
        base = add_unchecked(c, &base, &base);
        k >>= 1;
    }
    Ok(acc)
}

/// P1 = (0, t).
pub fn p1(c: &CurveParams) -> RationalPoint {
    RationalPoint::from_ints(0, c.t.clone())
}

/// P2 = (n1, t).
pub fn p2(c: &CurveParams) -> RationalPoint {
    RationalPoint::from_ints(c.n1.clone(), c.t.clone())
}

/// P3 = (n2, t).
pub fn p3(c: &CurveParams) -> RationalPoint {
    RationalPoint::from_ints(c.n2.clone(), c.t.clone())
}

/// The three points of order two.
pub fn two_torsion(c: &CurveParams) -> [RationalPoint; 3] {
    [
        RationalPoint::from_ints(c.e1.clone(), 0),
        RationalPoint::from_ints(c.e2.clone(), 0),
        RationalPoint::from_ints(c.e3.clone(), 0),
    ]
}

/// E_m reduced modulo an odd prime of good reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedCurve {
    pub p: u64,
    pub a2: u64,
    pub a4: u64,
    pub a6: u64,
}

impl ReducedCurve {
    pub fn rhs(&self, x: u64) -> u64 {
        let p = self.p as u128;
        let x = x as u128;
        let v = (((x + self.a2 as u128) % p * x + self.a4 as u128) % p * x + self.a6 as u128) % p;
        v as u64
    }

    pub fn contains(&self, pt: &ReducedPoint) -> bool {
        match *pt {
            ReducedPoint::Infinity => true,
            ReducedPoint::Affine(x, y) => (y as u128 * y as u128 % self.p as u128) as u64 == self.rhs(x),
        }
    }

    pub fn add(&self, a: &ReducedPoint, b: &ReducedPoint) -> ReducedPoint {
        let p = self.p;
        let (x1, y1, x2, y2) = match (*a, *b) {
            (ReducedPoint::Infinity, _) => return *b,
            (_, ReducedPoint::Infinity) => return *a,
            (ReducedPoint::Affine(x1, y1), ReducedPoint::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let mm = |u: u64, v: u64| (u as u128 * v as u128 % p as u128) as u64;
        let sub = |u: u64, v: u64| (u + p - v) % p;
        let inv = |u: u64| crate::numtheory::modular::pow_mod(u, p - 2, p);
        let lambda = if x1 != x2 {
            mm(sub(y2, y1), inv(sub(x2, x1)))
        } else if y1 == y2 && y1 != 0 {
            let num = (mm(3, mm(x1, x1)) + mm(2, mm(self.a2, x1)) + self.a4) % p;
            mm(num, inv(mm(2, y1)))
        } else {
            return ReducedPoint::Infinity;
        };
        let x3 = sub(sub(sub(mm(lambda, lambda), self.a2), x1), x2);
        let y3 = sub(0, (y1 + mm(lambda, sub(x3, x1))) % p);
        ReducedPoint::Affine(x3, y3)
    }
}

impl fmt::Display for ReducedCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3")?;
        for (c, mono) in [(self.a2, "x^2"), (self.a4, "x"), (self.a6, "")] {
            if c == 0 {
                continue;
            }
            // Print residues as signed representatives.
            let (sign, mag) = if c > self.p / 2 { ("-", self.p - c) } else { ("+", c) };
            if mag == 1 && !mono.is_empty() {
                write!(f, " {sign} {mono}")?;
            } else {
                write!(f, " {sign} {mag}{mono}")?;
            }
        }
        write!(f, " over F_{}", self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReducedPoint {
    Infinity,
    Affine(u64, u64),
}

pub fn reduce_mod(c: &CurveParams, p: u64) -> Result<ReducedCurve, CurveError> {
    if p < 3 || !is_prime_u64(p) {
        return Err(CurveError::NotOddPrime(p));
    }
    if c.discriminant_divisor().is_multiple_of(&BigInt::from(p)) {
        return Err(CurveError::BadReduction(p));
    }
    let [a2, a4, a6] = c.cubic();
    Ok(ReducedCurve {
        p,
        a2: reduce_big(&a2, p),
        a4: reduce_big(&a4, p),
        a6: reduce_big(&a6, p),
    })
}

/// Image of a rational point in E(F_p); points with p in the denominator
/// of x go to infinity.
pub fn reduce_point(rc: &ReducedCurve, pt: &RationalPoint) -> ReducedPoint {
    match pt {
        RationalPoint::Infinity => ReducedPoint::Infinity,
        RationalPoint::Affine { x, y } => {
            let pb = BigInt::from(rc.p);
            if x.denom().is_multiple_of(&pb) {
                return ReducedPoint::Infinity;
            }
            let red = |r: &BigRational| {
                let d = reduce_big(r.denom(), rc.p);
                let dinv = crate::numtheory::modular::pow_mod(d, rc.p - 2, rc.p);
                (reduce_big(r.numer(), rc.p) as u128 * dinv as u128 % rc.p as u128) as u64
            };
            ReducedPoint::Affine(red(x), red(y))
        }
    }
}

/// #E(F_p) including the point at infinity, bounded by [`COUNT_BOUND`].
pub fn count_points_mod(rc: &ReducedCurve) -> Result<u64, CurveError> {
    count_points_mod_bounded(rc, COUNT_BOUND)
}

/// Exhaustive count: tallies y² over F_p once, then sums over every x.
pub fn count_points_mod_bounded(rc: &ReducedCurve, bound: u64) -> Result<u64, CurveError> {
    if rc.p > bound {
        return Err(CurveError::FieldTooLarge { size: rc.p, bound });
    }
    let p = rc.p as usize;
    let mut sq = vec![0u64; p];
    for y in 0..p {
        sq[y * y % p] += 1;
    }
    Ok(1 + (0..rc.p).map(|x| sq[rc.rhs(x) as usize]).sum::<u64>())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsionGroup {
    /// Invariant factors, e.g. `[2, 2]`.
    pub invariants: Vec<u64>,
    /// All torsion points, identity first.
    pub points: Vec<RationalPoint>,
    /// Odd primes of good reduction used for the point-count bound.
    pub primes_used: Vec<u64>,
    /// gcd of #E(F_p) over `primes_used`.
    pub count_gcd: u64,
}

impl TorsionGroup {
    pub fn structure(&self) -> String {
        self.invariants
            .iter()
            .map(|n| format!("Z/{n}"))
            .collect::<Vec<_>>()
            .join(" x ")
    }

    pub fn order(&self) -> u64 {
        self.invariants.iter().product()
    }

    pub fn generators(&self) -> &[RationalPoint] {
        &self.points[1..3]
    }
}

/// Upper bound on #E(Q)_tors: gcd of #E(F_p) over the first `count` odd
/// primes of good reduction.
pub fn torsion_bound(c: &CurveParams, count: usize) -> Result<(u64, Vec<u64>), CurveError> {
    let mut g = 0u64;
    let mut used = Vec::new();
    let mut p = 3u64;
    while used.len() < count && p <= COUNT_BOUND {
        if is_prime_u64(p) {
            match reduce_mod(c, p) {
                Ok(rc) => {
                    g = g.gcd(&count_points_mod(&rc)?);
                    used.push(p);
                }
                Err(CurveError::BadReduction(_)) => {}
                Err(e) => return Err(e),
            }
        }
        p += 2;
    }
    Ok((g, used))
}

// (e_i, 0) lies in 2E(Q) iff e_i − e_j and e_i − e_k are both squares.
fn halvable(e: &BigInt, others: [&BigInt; 2]) -> bool {
    others.iter().all(|o| {
        let d = e - *o;
        !d.is_negative() && {
            let s = d.sqrt();
            &s * &s == d
        }
    })
}

/// The torsion subgroup. At p = 3 the reduction has exactly four points,
/// which pins the group to the rational 2-torsion; this is cross-checked by
/// the gcd of point counts over several good primes together with a
/// 2-divisibility test on the 2-torsion points.
pub fn torsion_group(c: &CurveParams) -> Result<TorsionGroup, CurveError> {
    let tors = two_torsion(c);
    for t in &tors {
        if !contains(c, t) || !mul(c, t, 2)?.is_infinity() {
            return Err(CurveError::Inconsistent(format!("{t} is not a 2-torsion point")));
        }
    }
    let (g, used) = torsion_bound(c, 8)?;
    if g % 4 != 0 {
        return Err(CurveError::Inconsistent(format!("gcd of point counts {g} not divisible by 4")));
    }
    if used.first() == Some(&3) {
        let n3 = count_points_mod(&reduce_mod(c, 3)?)?;
        if n3 != 4 {
            return Err(CurveError::Inconsistent(format!("#E(F_3) = {n3}, expected 4")));
        }
    } else {
        // 3 is a bad prime: rely on the generic bound alone.
        let odd = g >> g.trailing_zeros();
        if odd != 1 {
            return Err(CurveError::Inconsistent(format!("odd part of point-count gcd is {odd}")));
        }
        let (e1, e2, e3) = (&c.e1, &c.e2, &c.e3);
        if g % 8 == 0 && (halvable(e1, [e2, e3]) || halvable(e2, [e1, e3]) || halvable(e3, [e1, e2])) {
            return Err(CurveError::Inconsistent("a 2-torsion point is divisible by 2".into()));
        }
    }
    let mut points = vec![RationalPoint::Infinity];
    points.extend(tors);
    Ok(TorsionGroup {
        invariants: vec![2, 2],
        points,
        primes_used: used,
        count_gcd: g,
    })
}

/// Torsion test by bounded multiples: true when [n]P = O for some n ≤ 12.
pub fn is_torsion(c: &CurveParams, p: &RationalPoint) -> Result<bool, CurveError> {
    check(c, p)?;
    let mut acc = p.clone();
    for _ in 1..=12 {
        if acc.is_infinity() {
            return Ok(true);
        }
        acc = add_unchecked(c, &acc, p);
    }
    Ok(false)
}

/// ℓ-integrality of both coordinates.
pub fn is_integral_at(p: &RationalPoint, l: u64) -> bool {
    match p {
        RationalPoint::Infinity => true,
        RationalPoint::Affine { x, y } => {
            let lb = BigInt::from(l);
            !x.denom().is_multiple_of(&lb) && !y.denom().is_multiple_of(&lb)
        }
    }
}
