//! Exact solvability of the descent quartic over Q_ℓ.
//!
//! The pair (b1, b2) gives the intersection of two quadrics in P³,
//!
//!   F1 = b1 Z1² − b2 Z2² + 2A W²,    F2 = b1 Z1² − b1 b2 Z3² + q W²,
//!
//! with A = m⁴ − 1 and q = A − 4m². Eliminating Z2 and Z3, a Q_ℓ-point exists
//! iff some (Z1 : W) ∈ P¹(Q_ℓ) makes both g1 = b2(b1 Z1² + 2A W²) and
//! g2 = b1 b2 (b1 Z1² + q W²) squares. P¹(Q_ℓ) is covered by the two disks
//! (s : 1) and (1 : ℓ s) with s ∈ Z_ℓ, and each disk is refined ℓ-adically
//! until both quadratics have constant square class on a subdisk.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::filters::real_solvable;
use super::{DescentError, DescentPair, Place};
use crate::family::CurveParams;
use crate::numtheory::modular::{legendre_u64, mul_mod, pow_mod, reduce_big, sqrt_mod_prime_power, sqrt_mod_u64};
use crate::numtheory::{is_prime_u64, valuation_u64};

/// Odd places above this are refined through residue-class analysis instead
/// of enumerating all ℓ children.
pub const DEFAULT_ENUM_LIMIT: u64 = 1000;
/// The character-sum argument for the residue-class analysis needs ℓ ≥ 37,
/// the first prime above this.
pub const MIN_ENUM_LIMIT: u64 = 31;
pub const DEFAULT_WIDTH_CAP: usize = 1 << 16;
const SAMPLE_TRIES: u32 = 10_000;
const MAX_PLACE: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalVerdict {
    Solvable(Box<LocalWitness>),
    /// Every subdisk died within `depth` refinement levels.
    Unsolvable { depth: u32 },
    RealSolvable,
    RealUnsolvable,
}

impl LocalVerdict {
    pub fn is_solvable(&self) -> bool {
        matches!(self, LocalVerdict::Solvable(_) | LocalVerdict::RealSolvable)
    }

    pub fn witness(&self) -> Option<&LocalWitness> {
        match self {
            LocalVerdict::Solvable(w) => Some(w),
            _ => None,
        }
    }
}

/// A primitive quadruple (Z1, Z2, Z3, W) satisfying both quadrics modulo
/// ℓ^precision, together with the data of a Hensel lift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalWitness {
    pub place: u64,
    /// Z1, Z2, Z3, W reduced into [0, ℓ^precision).
    pub coords: [BigInt; 4],
    pub precision: u32,
    /// Index of the unit coordinate fixing the affine chart.
    pub chart: usize,
    /// Columns of the Jacobian minor of smallest valuation.
    pub minor: (usize, usize),
    pub tau: u32,
    /// Exact ℓ-adic valuations of the lifted point (None for zero).
    pub valuations: [Option<u32>; 4],
    /// b1, b2, 2A, q.
    pub coefficients: [BigInt; 4],
    /// Refinement levels used by the search.
    pub levels: u32,
}

impl LocalWitness {
    fn forms(&self) -> (BigInt, BigInt) {
        let [b1, b2, two_a, q] = &self.coefficients;
        let [z1, z2, z3, w] = &self.coords;
        let z1s = z1 * z1;
        let ws = w * w;
        let f1 = b1 * &z1s - b2 * z2 * z2 + two_a * &ws;
        let f2 = b1 * &z1s - b1 * b2 * z3 * z3 + q * &ws;
        (f1, f2)
    }

    fn jacobian(&self) -> [[BigInt; 4]; 2] {
        let [b1, b2, two_a, q] = &self.coefficients;
        let [z1, z2, z3, w] = &self.coords;
        let d1: BigInt = b1 * z1 * 2u32;
        [
            [d1.clone(), -(b2 * z2 * 2u32), BigInt::zero(), two_a * w * 2u32],
            [d1, BigInt::zero(), -(b1 * b2 * z3 * 2u32), q * w * 2u32],
        ]
    }

    /// Checks the certificate from the stored data alone: both forms vanish
    /// modulo ℓ^precision, the point is primitive with a unit in the chart
    /// coordinate, and a Jacobian minor avoiding the chart column has
    /// valuation at most τ with precision ≥ 2τ + 1.
    pub fn check(&self) -> Result<(), String> {
        let l = self.place;
        let lb = BigInt::from(l);
        let modulus = lb.pow(self.precision);
        if self.precision < 2 * self.tau + 1 {
            return Err(format!("precision {} below 2τ+1 = {}", self.precision, 2 * self.tau + 1));
        }
        let (f1, f2) = self.forms();
        if !f1.mod_floor(&modulus).is_zero() || !f2.mod_floor(&modulus).is_zero() {
            return Err("forms do not vanish".into());
        }
        if reduce_big(&self.coords[self.chart], l) == 0 {
            return Err("chart coordinate is not a unit".into());
        }
        let j = self.jacobian();
        let mut best = u32::MAX;
        for a in 0..4 {
            for b in a + 1..4 {
                if a == self.chart || b == self.chart {
                    continue;
                }
                let det = (&j[0][a] * &j[1][b] - &j[0][b] * &j[1][a]).mod_floor(&modulus);
                let v = valuation_u64(&det, l).unwrap_or(self.precision).min(self.precision);
                best = best.min(v);
            }
        }
        if best > self.tau {
            return Err(format!("smallest minor valuation {best} exceeds τ = {}", self.tau));
        }
        Ok(())
    }

    pub fn verify(&self) -> bool {
        self.check().is_ok()
    }
}

/// The exhaustion depth that suffices for an unsolvability verdict at ℓ.
pub fn required_depth(c: &CurveParams, b1: &BigInt, b2: &BigInt, l: u64) -> u32 {
    let r: BigInt = &c.a + &c.e3;
    let n: BigInt = b1 * b2 * &c.a * &c.q * r * 2;
    2 * valuation_u64(&n, l).unwrap_or(0) + 3
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSolver {
    pub enum_limit: u64,
    pub seed: u64,
    pub width_cap: usize,
}

impl Default for LocalSolver {
    fn default() -> Self {
        LocalSolver { enum_limit: DEFAULT_ENUM_LIMIT, seed: 0, width_cap: DEFAULT_WIDTH_CAP }
    }
}

impl LocalSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Values below [`MIN_ENUM_LIMIT`] are raised to it.
    pub fn with_enum_limit(mut self, limit: u64) -> Self {
        self.enum_limit = limit.max(MIN_ENUM_LIMIT);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_width_cap(mut self, cap: usize) -> Self {
        self.width_cap = cap;
        self
    }

    pub fn solve_pair(&self, c: &CurveParams, d: &DescentPair, place: Place, depth: u32) -> Result<LocalVerdict, DescentError> {
        if place == Place::Real {
            return Ok(real_solvable(d));
        }
        let (b1, b2) = d.values();
        self.solve(c, &b1, &b2, place, depth)
    }

    pub fn solve(&self, c: &CurveParams, b1: &BigInt, b2: &BigInt, place: Place, depth: u32) -> Result<LocalVerdict, DescentError> {
        let l = match place {
            Place::Real => {
                return Ok(if b2.is_positive() { LocalVerdict::RealSolvable } else { LocalVerdict::RealUnsolvable });
            }
            Place::Prime(l) => l,
        };
        if b1.is_zero() || b2.is_zero() {
            return Err(DescentError::ZeroClass);
        }
        if l >= MAX_PLACE || !is_prime_u64(l) {
            return Err(DescentError::UnsupportedPlace(BigUint::from(l)));
        }
        let required = required_depth(c, b1, b2, l);
        if depth < required {
            return Err(DescentError::DepthExceeded { place: l, required, given: depth });
        }
        let eq = Quadrics::new(c, b1, b2);
        let search = Search::new(l, self);
        let lb = BigInt::from(l);
        let l2 = &lb * &lb;

        // disk (s : 1)
        let root_a = Node::root(
            [b2 * &eq.two_a, BigInt::zero(), b1 * b2],
            [b1 * b2 * &eq.q, BigInt::zero(), b1 * b1 * b2],
        );
        let levels_a = match search.run(root_a, depth)? {
            Outcome::Found(node, levels) => return eq.witness(l, node.offset, BigInt::one(), levels).map(Into::into),
            Outcome::Exhausted(levels) => levels,
        };
        // disk (1 : ℓ s)
        let root_b = Node::root(
            [b1 * b2, BigInt::zero(), b2 * &eq.two_a * &l2],
            [b1 * b1 * b2, BigInt::zero(), b1 * b2 * &eq.q * &l2],
        );
        match search.run(root_b, depth)? {
            Outcome::Found(node, levels) => eq.witness(l, BigInt::one(), &lb * node.offset, levels).map(Into::into),
            Outcome::Exhausted(levels) => Ok(LocalVerdict::Unsolvable { depth: levels.max(levels_a) }),
        }
    }
}

impl From<LocalWitness> for LocalVerdict {
    fn from(w: LocalWitness) -> Self {
        LocalVerdict::Solvable(Box::new(w))
    }
}

/// Local solvability of the pair at `place` with the default solver.
pub fn local_solvable(c: &CurveParams, d: &DescentPair, place: Place, depth: u32) -> Result<LocalVerdict, DescentError> {
    LocalSolver::default().solve_pair(c, d, place, depth)
}

struct Quadrics {
    b1: BigInt,
    b2: BigInt,
    two_a: BigInt,
    q: BigInt,
}

impl Quadrics {
    fn new(c: &CurveParams, b1: &BigInt, b2: &BigInt) -> Self {
        Quadrics { b1: b1.clone(), b2: b2.clone(), two_a: &c.a * 2u32, q: c.q.clone() }
    }

    /// Completes (Z1 : W) to a certified quadruple.
    fn witness(&self, l: u64, z1: BigInt, w: BigInt, levels: u32) -> Result<LocalWitness, DescentError> {
        let fail = |detail: String| DescentError::WitnessFailure { place: l, detail };
        let lb = BigInt::from(l);
        let (b1, b2) = (&self.b1, &self.b2);
        let inner1 = b1 * &z1 * &z1 + &self.two_a * &w * &w;
        let inner2 = b1 * &z1 * &z1 + &self.q * &w * &w;
        let g1 = b2 * &inner1;
        let g2 = b1 * b2 * &inner2;
        let b12 = b1 * b2;

        // Z2 = sqrt(g1)/b2 and Z3 = sqrt(g2)/(b1 b2) as ℓ^e · unit.
        let split = |g: &BigInt, d: &BigInt| -> Result<(i64, BigInt, BigInt), DescentError> {
            let vg = valuation_u64(g, l).ok_or_else(|| fail("zero value".into()))?;
            if vg % 2 == 1 {
                return Err(fail("odd valuation".into()));
            }
            let vd = valuation_u64(d, l).unwrap();
            let ug = g / lb.pow(vg);
            let ud = d / lb.pow(vd);
            Ok((vg as i64 / 2 - vd as i64, ug, ud))
        };
        let (e2, u1, d2) = split(&g1, b2)?;
        let (e3, u2, d3) = split(&g2, &b12)?;
        let v1 = valuation_u64(&z1, l).map(i64::from);
        let vw = valuation_u64(&w, l).map(i64::from);
        let exps = [v1, Some(e2), Some(e3), vw];
        let mu = exps.iter().flatten().copied().min().unwrap();
        let vals: [Option<u32>; 4] = exps.map(|e| e.map(|e| (e - mu) as u32));

        let chart = [3usize, 0, 1, 2]
            .into_iter()
            .find(|&i| vals[i] == Some(0))
            .ok_or_else(|| fail("no unit coordinate".into()))?;
        let a: BigInt = &self.two_a / 2u32;
        let r: BigInt = &self.two_a - &self.q;
        let consts = [
            ((0, 1), &b12 * 4u32),
            ((0, 2), -(b1 * &b12 * 4u32)),
            ((0, 3), -(b1 * &r * 4u32)),
            ((1, 2), &b12 * b2 * 4u32),
            ((1, 3), -(b2 * &self.q * 4u32)),
            ((2, 3), &a * &b12 * 8u32),
        ];
        let (minor, tau) = consts
            .iter()
            .filter(|((i, j), _)| *i != chart && *j != chart)
            .filter_map(|((i, j), k)| {
                let v = valuation_u64(k, l)? + vals[*i]? + vals[*j]?;
                Some(((*i, *j), v))
            })
            .min_by_key(|&(_, v)| v)
            .ok_or_else(|| fail("singular point".into()))?;
        let precision = 2 * tau + 1;

        let scale_exact = |z: &BigInt| -> BigInt {
            if mu >= 0 {
                z / lb.pow(mu as u32)
            } else {
                z * lb.pow((-mu) as u32)
            }
        };
        let mut last = String::new();
        for slack in [2u32, 8, 32] {
            let p = precision + slack;
            let modulus = lb.pow(p);
            let root = |u: &BigInt, d: &BigInt, e: i64| -> Result<BigInt, DescentError> {
                let s = sqrt_mod_prime_power(u, l, p).ok_or_else(|| fail("unit is not a square".into()))?;
                let inv = inv_mod(d, &modulus).ok_or_else(|| fail("non-invertible unit".into()))?;
                let shift = (e - mu) as u32;
                if shift >= p {
                    return Ok(BigInt::zero());
                }
                Ok((s * inv * lb.pow(shift)).mod_floor(&modulus))
            };
            let coords_p = [scale_exact(&z1), root(&u1, &d2, e2)?, root(&u2, &d3, e3)?, scale_exact(&w)];
            let top = lb.pow(precision);
            let wit = LocalWitness {
                place: l,
                coords: coords_p.map(|z| z.mod_floor(&top)),
                precision,
                chart,
                minor,
                tau,
                valuations: vals,
                coefficients: [b1.clone(), b2.clone(), self.two_a.clone(), self.q.clone()],
                levels,
            };
            match wit.check() {
                Ok(()) => return Ok(wit),
                Err(e) => last = e,
            }
        }
        Err(fail(last))
    }
}

fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// A subdisk s = offset + scale·t, t ∈ Z_ℓ, with both quadratics in t.
#[derive(Debug, Clone)]
struct Node {
    a: [BigInt; 3],
    b: [BigInt; 3],
    offset: BigInt,
    scale: BigInt,
}

impl Node {
    fn root(a: [BigInt; 3], b: [BigInt; 3]) -> Self {
        Node { a, b, offset: BigInt::zero(), scale: BigInt::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Square,
    Dead,
    Pending,
}

enum Outcome {
    Found(Node, u32),
    Exhausted(u32),
}

/// Shape of a primitive quadratic modulo ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    /// Constant square class σ away from its roots.
    Flat(i8),
    Varying,
}

struct Search<'a> {
    l: u64,
    lb: BigInt,
    /// Precision at which a unit's square class is fixed: 1, or 3 at ℓ = 2.
    e: u32,
    solver: &'a LocalSolver,
}

impl<'a> Search<'a> {
    fn new(l: u64, solver: &'a LocalSolver) -> Self {
        Search { l, lb: BigInt::from(l), e: if l == 2 { 3 } else { 1 }, solver }
    }

    fn val(&self, n: &BigInt) -> Option<u32> {
        valuation_u64(n, self.l)
    }

    fn is_square(&self, n: &BigInt) -> bool {
        let Some(v) = self.val(n) else { return true };
        if v % 2 == 1 {
            return false;
        }
        let u = n / self.lb.pow(v);
        if self.l == 2 {
            reduce_big(&u, 8) == 1
        } else {
            legendre_u64(reduce_big(&u, self.l), self.l) == 1
        }
    }

    /// True when the square class of c0 + c1 t + c2 t² is constant on Z_ℓ.
    fn determined(&self, c: &[BigInt; 3]) -> bool {
        let Some(v0) = self.val(&c[0]) else { return false };
        let bound = v0 + self.e;
        c[1..].iter().all(|x| self.val(x).map_or(true, |v| v >= bound))
    }

    fn classify(&self, node: &Node) -> Class {
        let da = self.determined(&node.a);
        let db = self.determined(&node.b);
        let sa = da && self.is_square(&node.a[0]);
        let sb = db && self.is_square(&node.b[0]);
        if (da && !sa) || (db && !sb) {
            Class::Dead
        } else if da && db {
            Class::Square
        } else {
            Class::Pending
        }
    }

    fn child(&self, node: &Node, s0: &BigInt) -> Node {
        let shift = |c: &[BigInt; 3]| {
            let v = &c[0] + &c[1] * s0 + &c[2] * s0 * s0;
            let d = (&c[1] + &c[2] * s0 * 2u32) * &self.lb;
            [v, d, &c[2] * &self.lb * &self.lb]
        };
        Node {
            a: shift(&node.a),
            b: shift(&node.b),
            offset: &node.offset + &node.scale * s0,
            scale: &node.scale * &self.lb,
        }
    }

    fn run(&self, root: Node, depth: u32) -> Result<Outcome, DescentError> {
        match self.classify(&root) {
            Class::Square => return Ok(Outcome::Found(root, 0)),
            Class::Dead => return Ok(Outcome::Exhausted(0)),
            Class::Pending => {}
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.solver.seed ^ self.l.rotate_left(17));
        // A level-d node reads its values modulo ℓ^(d + e − 1).
        let limit = depth + self.e - 1;
        let mut level = vec![root];
        let mut d = 0u32;
        loop {
            if d >= limit {
                return Err(DescentError::Unresolved { place: self.l, depth });
            }
            d += 1;
            let mut next = Vec::new();
            for node in &level {
                if let Some(found) = self.expand(node, &mut next, &mut rng)? {
                    return Ok(Outcome::Found(found, d));
                }
            }
            if next.is_empty() {
                return Ok(Outcome::Exhausted(d));
            }
            if next.len() > self.solver.width_cap {
                return Err(DescentError::Unresolved { place: self.l, depth: d });
            }
            level = next;
        }
    }

    /// Pushes pending children of `node`; returns a square child if one is found.
    fn expand(&self, node: &Node, pending: &mut Vec<Node>, rng: &mut ChaCha8Rng) -> Result<Option<Node>, DescentError> {
        if self.l == 2 || self.l <= self.solver.enum_limit {
            for s0 in 0..self.l {
                let ch = self.child(node, &BigInt::from(s0));
                match self.classify(&ch) {
                    Class::Square => return Ok(Some(ch)),
                    Class::Pending => pending.push(ch),
                    Class::Dead => {}
                }
            }
            return Ok(None);
        }
        let (ca, fa) = self.primitive(&node.a);
        let (cb, fb) = self.primitive(&node.b);
        if ca % 2 == 0 && cb % 2 == 0 && self.generic_square_exists(&fa, &fb) {
            for _ in 0..SAMPLE_TRIES {
                let s0 = rng.gen_range(0..self.l);
                let (ya, yb) = (self.eval(&fa, s0), self.eval(&fb, s0));
                if legendre_u64(ya, self.l) == 1 && legendre_u64(yb, self.l) == 1 {
                    let ch = self.child(node, &BigInt::from(s0));
                    if self.classify(&ch) != Class::Square {
                        return Err(DescentError::WitnessFailure {
                            place: self.l,
                            detail: "residue analysis disagrees with child".into(),
                        });
                    }
                    return Ok(Some(ch));
                }
            }
            return Err(DescentError::WitnessFailure { place: self.l, detail: "no residue sample found".into() });
        }
        // Away from the roots every child is determined and not a square pair.
        let mut roots: BTreeSet<u64> = self.roots(&fa).into_iter().collect();
        roots.extend(self.roots(&fb));
        for s0 in roots {
            let ch = self.child(node, &BigInt::from(s0));
            match self.classify(&ch) {
                Class::Square => return Ok(Some(ch)),
                Class::Pending => pending.push(ch),
                Class::Dead => {}
            }
        }
        Ok(None)
    }

    /// Content valuation and primitive part modulo ℓ.
    fn primitive(&self, c: &[BigInt; 3]) -> (u32, [u64; 3]) {
        let v = c.iter().filter_map(|x| self.val(x)).min().expect("nonzero quadratic");
        let d = self.lb.pow(v);
        (v, [0, 1, 2].map(|i| reduce_big(&(&c[i] / &d), self.l)))
    }

    fn eval(&self, f: &[u64; 3], s: u64) -> u64 {
        let l = self.l;
        (f[0] + mul_mod(f[1], s, l) % l + mul_mod(f[2], mul_mod(s, s, l), l)) % l
    }

    fn inv(&self, x: u64) -> u64 {
        pow_mod(x, self.l - 2, self.l)
    }

    fn discriminant(&self, f: &[u64; 3]) -> u64 {
        let l = self.l;
        (mul_mod(f[1], f[1], l) + l - mul_mod(4 % l, mul_mod(f[0], f[2], l), l)) % l
    }

    fn shape(&self, f: &[u64; 3]) -> Shape {
        if f[2] != 0 {
            if self.discriminant(f) == 0 {
                Shape::Flat(legendre_u64(f[2], self.l))
            } else {
                Shape::Varying
            }
        } else if f[1] != 0 {
            Shape::Varying
        } else {
            Shape::Flat(legendre_u64(f[0], self.l))
        }
    }

    /// Whether some s mod ℓ, not a root of either, makes both residues squares.
    fn generic_square_exists(&self, fa: &[u64; 3], fb: &[u64; 3]) -> bool {
        match (self.shape(fa), self.shape(fb)) {
            (Shape::Flat(x), Shape::Flat(y)) => x == 1 && y == 1,
            (Shape::Flat(x), Shape::Varying) | (Shape::Varying, Shape::Flat(x)) => x == 1,
            (Shape::Varying, Shape::Varying) => {
                let l = self.l;
                let proportional =
                    (0..3).all(|i| (0..3).all(|j| mul_mod(fa[i], fb[j], l) == mul_mod(fa[j], fb[i], l)));
                if !proportional {
                    // Weil: 4N ≥ ℓ − 11 − 3√ℓ > 0 for ℓ ≥ 37.
                    return true;
                }
                let k = (0..3).find(|&k| fb[k] != 0).unwrap();
                let lambda = mul_mod(fa[k], self.inv(fb[k]), l);
                legendre_u64(lambda, l) == 1
            }
        }
    }

    fn roots(&self, f: &[u64; 3]) -> Vec<u64> {
        let l = self.l;
        if f[2] != 0 {
            let disc = self.discriminant(f);
            let Some(sq) = sqrt_mod_u64(disc, l) else { return vec![] };
            let inv2a = self.inv(mul_mod(2, f[2], l));
            let neg_b = (l - f[1]) % l;
            vec![mul_mod((neg_b + sq) % l, inv2a, l), mul_mod((neg_b + l - sq) % l, inv2a, l)]
        } else if f[1] != 0 {
            vec![mul_mod((l - f[0]) % l, self.inv(f[1]), l)]
        } else {
            vec![]
        }
    }
}
