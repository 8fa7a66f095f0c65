//! Naive and canonical heights, the height pairing, and a numerical rank
//! certificate for a list of points.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::curve::{self, CurveError, RationalPoint};
use crate::family::CurveParams;

pub const DEFAULT_TOL: f64 = 1e-3;
/// Coordinate size ceiling for the doubling iteration.
pub const DEFAULT_BIT_CAP: u64 = 1_000_000;
/// Pivots at most this multiple of the tolerance count as zero.
pub const RANK_THRESHOLD_FACTOR: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeightError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("naive height of the point at infinity is undefined")]
    Infinity,
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("bit-length cap reached after {} doublings; last estimate {} (gap {})", .0.iterations, .0.value, .0.error_bound)]
    BudgetExceeded(HeightEstimate),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightEstimate {
    pub value: f64,
    /// Number of doublings N behind `value`.
    pub iterations: u32,
    /// Larger of the last two gaps between normalized estimates.
    pub error_bound: f64,
}

/// Natural log of |n| from its leading 64 bits.
pub fn ln_abs(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return (n.magnitude().to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (n.magnitude() >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_max(x: &BigInt, z: &BigInt) -> f64 {
    let big = if x.magnitude() > z.magnitude() { x } else { z };
    if big.bits() <= 64 {
        (big.magnitude().to_u64().unwrap() as f64).max(1.0).ln()
    } else {
        ln_abs(big)
    }
}

/// h(x) = log max(|num|, |den|) of x(P) in lowest terms.
pub fn naive_height(p: &RationalPoint) -> Result<f64, HeightError> {
    let x = p.x().ok_or(HeightError::Infinity)?;
    Ok(ln_max(x.numer(), x.denom()))
}

/// Integer doubling map on x = X/Z for y² = x³ + a2x² + a4x + a6.
struct Doubler {
    a2: BigInt,
    a4: BigInt,
    a6: BigInt,
    /// Resultant of the two quartic forms; every common factor divides it.
    resultant: BigInt,
}

impl Doubler {
    fn new(c: &CurveParams) -> Self {
        let [a2, a4, a6] = c.cubic();
        let (num, den) = Self::forms(&a2, &a4, &a6);
        let resultant = resultant_4x4(&num, &den).abs();
        Doubler { a2, a4, a6, resultant }
    }

    // Coefficients of X⁴, X³Z, X²Z², XZ³, Z⁴.
    fn forms(a2: &BigInt, a4: &BigInt, a6: &BigInt) -> ([BigInt; 5], [BigInt; 5]) {
        let num = [
            BigInt::one(),
            BigInt::zero(),
            -(a4 * 2u32),
            -(a6 * 8u32),
            a4 * a4 - a2 * a6 * 4u32,
        ];
        let den = [BigInt::zero(), BigInt::from(4), a2 * 4u32, a4 * 4u32, a6 * 4u32];
        (num, den)
    }

    /// Returns `None` when the doubled point is the identity.
    fn double(&self, x: &BigInt, z: &BigInt) -> Option<(BigInt, BigInt)> {
        let x2 = x * x;
        let z2 = z * z;
        let xz = x * z;
        let num: BigInt = &x2 * &x2 - &self.a4 * 2u32 * &x2 * &z2 - &self.a6 * 8u32 * &xz * &z2
            + (&self.a4 * &self.a4 - &self.a2 * &self.a6 * 4u32) * &z2 * &z2;
        let den: BigInt = (&x2 * x + &self.a2 * &x2 * z + &self.a4 * &xz * z + &self.a6 * &z2 * z) * z * 4u32;
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some((num, BigInt::one()));
        }
        let g = self
            .resultant
            .gcd(&num.mod_floor(&self.resultant))
            .gcd(&den.mod_floor(&self.resultant));
        let (mut num, mut den) = if g.is_one() { (num, den) } else { (num / &g, den / &g) };
        if den.sign() == Sign::Minus {
            num = -num;
            den = -den;
        }
        Some((num, den))
    }
}

// Sylvester resultant of two binary quartics via fraction-free elimination.
fn resultant_4x4(f: &[BigInt; 5], g: &[BigInt; 5]) -> BigInt {
    let n = 8;
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for i in 0..4 {
        for j in 0..5 {
            m[i][i + j] = f[j].clone();
            m[i + 4][i + j] = g[j].clone();
        }
    }
    bareiss_det(m)
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// ĥ(P) with the default bit cap.
pub fn canonical_height(c: &CurveParams, p: &RationalPoint, tol: f64) -> Result<HeightEstimate, HeightError> {
    canonical_height_capped(c, p, tol, DEFAULT_BIT_CAP)
}

/// ĥ(P) = ½ lim H(2ᴺP)/4ᴺ, iterated until two consecutive gaps between
/// normalized estimates fall below `tol`. Torsion points give exactly zero.
pub fn canonical_height_capped(
    c: &CurveParams,
    p: &RationalPoint,
    tol: f64,
    bit_cap: u64,
) -> Result<HeightEstimate, HeightError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(HeightError::BadTolerance(tol));
    }
    let zero = HeightEstimate { value: 0.0, iterations: 0, error_bound: 0.0 };
    if curve::is_torsion(c, p)? {
        return Ok(zero);
    }
    let x = p.x().expect("non-torsion point is affine");
    let dbl = Doubler::new(c);
    let (mut xn, mut zn) = (x.numer().clone(), x.denom().clone());
    let mut prev = 0.5 * ln_max(&xn, &zn);
    let mut scale = 1.0f64;
    // Bad-prime contributions make the sequence stall and then jump, so one
    // small gap is not enough; two consecutive ones are required.
    let mut last_gap = f64::INFINITY;
    for n in 1u32.. {
        let Some((x2, z2)) = dbl.double(&xn, &zn) else {
            return Ok(zero);
        };
        xn = x2;
        zn = z2;
        scale *= 4.0;
        let est = 0.5 * ln_max(&xn, &zn) / scale;
        let gap = (est - prev).abs();
        if gap < tol && last_gap < tol {
            return Ok(HeightEstimate { value: est, iterations: n, error_bound: gap.max(last_gap) });
        }
        prev = est;
        last_gap = gap;
        if xn.bits().max(zn.bits()) > bit_cap {
            return Err(HeightError::BudgetExceeded(HeightEstimate {
                value: est,
                iterations: n,
                error_bound: gap,
            }));
        }
    }
    unreachable!()
}

/// ⟨P, Q⟩ = ĥ(P + Q) − ĥ(P) − ĥ(Q), each term to `tol / 3`.
pub fn height_pairing(c: &CurveParams, p: &RationalPoint, q: &RationalPoint, tol: f64) -> Result<f64, HeightError> {
    let sum = curve::add(c, p, q)?;
    let t = tol / 3.0;
    let (hs, (hp, hq)) = rayon::join(
        || canonical_height(c, &sum, t),
        || rayon::join(|| canonical_height(c, p, t), || canonical_height(c, q, t)),
    );
    Ok(hs?.value - hp?.value - hq?.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingMatrix {
    pub points: Vec<RationalPoint>,
    pub entries: Vec<Vec<f64>>,
    pub determinant: f64,
}

/// Gram matrix of the height pairing; the diagonal is 2ĥ(Rᵢ).
pub fn pairing_matrix(c: &CurveParams, pts: &[RationalPoint], tol: f64) -> Result<PairingMatrix, HeightError> {
    let k = pts.len();
    let mut entries = vec![vec![0.0; k]; k];
    for i in 0..k {
        entries[i][i] = 2.0 * canonical_height(c, &pts[i], tol)?.value;
        for j in 0..i {
            let v = height_pairing(c, &pts[i], &pts[j], tol)?;
            entries[i][j] = v;
            entries[j][i] = v;
        }
    }
    let (determinant, _) = eliminate(&entries, 0.0);
    Ok(PairingMatrix { points: pts.to_vec(), entries, determinant })
}

// Gaussian elimination with partial pivoting. Returns the determinant and
// the number of pivots whose magnitude exceeds `threshold`.
fn eliminate(a: &[Vec<f64>], threshold: f64) -> (f64, usize) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut det = 1.0;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..n {
        let Some(piv) = (row..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())) else {
            break;
        };
        if m[piv][col].abs() <= threshold {
            det = 0.0;
            continue;
        }
        if piv != row {
            m.swap(piv, row);
            det = -det;
        }
        det *= m[row][col];
        for i in row + 1..n {
            let f = m[i][col] / m[row][col];
            for j in col..n {
                m[i][j] -= f * m[row][j];
            }
        }
        rank += 1;
        row += 1;
    }
    if n == 0 {
        det = 1.0;
    }
    (det, rank)
}

/// Numerical rank of the height-pairing matrix, a lower bound for the
/// Mordell–Weil rank. Pivots at or below 50·tol count as zero.
pub fn independence_rank(c: &CurveParams, pts: &[RationalPoint], tol: f64) -> Result<usize, HeightError> {
    let pm = pairing_matrix(c, pts, tol)?;
    Ok(rank_of(&pm.entries, tol))
}

pub fn rank_of(entries: &[Vec<f64>], tol: f64) -> usize {
    eliminate(entries, RANK_THRESHOLD_FACTOR * tol).1
}
