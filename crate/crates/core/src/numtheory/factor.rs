//! Integer factorization: trial division by the primes below 10⁶, then
//! Pollard's rho with Brent's cycle detection on whatever is left.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::modular::mul_mod;
use super::primes::{is_prime_seeded, small_primes, TRIAL_LIMIT};
use super::NumTheoryError;

/// Complete factorization of a positive integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factorization {
    value: BigUint,
    factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    /// Builds a factorization from prime powers; primes are sorted and merged.
    /// Callers vouch for primality.
    pub fn from_prime_powers(factors: impl IntoIterator<Item = (BigUint, u32)>) -> Self {
        let mut merged: BTreeMap<BigUint, u32> = BTreeMap::new();
        for (p, e) in factors {
            if e > 0 {
                *merged.entry(p).or_insert(0) += e;
            }
        }
        let factors: Vec<_> = merged.into_iter().collect();
        let value = factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
        Factorization { value, factors }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    pub fn recompose(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" · "))
    }
}

/// What was found before the rho budget ran out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialFactorization {
    pub primes: Vec<(BigUint, u32)>,
    pub unfactored: Vec<BigUint>,
}

/// Shared factorization memo. Reads are concurrent-safe; writes serialize on the lock.
#[derive(Debug, Default)]
pub struct FactorCache {
    entries: Mutex<HashMap<BigUint, Factorization>>,
    fresh: Mutex<Vec<BigUint>>,
}

impl FactorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: &BigUint) -> Option<Factorization> {
        self.entries.lock().unwrap().get(n).cloned()
    }

    /// Inserts a known factorization (e.g. loaded from disk); not marked fresh.
    pub fn preload(&self, f: Factorization) {
        self.entries.lock().unwrap().insert(f.value().clone(), f);
    }

    fn record(&self, f: &Factorization) {
        let mut entries = self.entries.lock().unwrap();
        if !entries.contains_key(f.value()) {
            entries.insert(f.value().clone(), f.clone());
            self.fresh.lock().unwrap().push(f.value().clone());
        }
    }

    /// Entries added by computation since creation (or the last drain), oldest first.
    pub fn drain_fresh(&self) -> Vec<Factorization> {
        let keys: Vec<BigUint> = std::mem::take(&mut *self.fresh.lock().unwrap());
        let entries = self.entries.lock().unwrap();
        keys.iter().filter_map(|k| entries.get(k).cloned()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub const DEFAULT_RHO_BUDGET: u64 = 100_000_000;

/// Factorization engine with a rho iteration budget, a seed for the rho
/// starting values, and an optional shared cache.
#[derive(Clone, Debug)]
pub struct Factorizer {
    rho_budget: u64,
    seed: u64,
    cache: Option<Arc<FactorCache>>,
}

impl Default for Factorizer {
    fn default() -> Self {
        Factorizer {
            rho_budget: DEFAULT_RHO_BUDGET,
            seed: 0,
            cache: None,
        }
    }
}

impl Factorizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rho_budget(mut self, budget: u64) -> Self {
        self.rho_budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cache(mut self, cache: Arc<FactorCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cache(&self) -> Option<&Arc<FactorCache>> {
        self.cache.as_ref()
    }

    pub fn is_prime(&self, n: &BigUint) -> bool {
        is_prime_seeded(n, self.seed)
    }

    pub fn factorize(&self, n: &BigUint) -> Result<Factorization, NumTheoryError> {
        if n.is_zero() {
            return Err(NumTheoryError::InvalidInput("cannot factor 0".into()));
        }
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(n)) {
            return Ok(hit);
        }
        let mut found: Vec<(BigUint, u32)> = Vec::new();
        let mut rest = n.clone();
        for &p in small_primes() {
            let p_big = BigUint::from(p);
            if &p_big * &p_big > rest {
                break;
            }
            let mut e = 0;
            while (&rest % p).is_zero() {
                rest /= p;
                e += 1;
            }
            if e > 0 {
                found.push((p_big, e));
            }
        }
        let limit_sq = BigUint::from(TRIAL_LIMIT as u64 * TRIAL_LIMIT as u64);
        let mut unfactored = Vec::new();
        if !rest.is_one() {
            if rest < limit_sq || self.is_prime(&rest) {
                found.push((rest, 1));
            } else {
                let mut stack = vec![rest];
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                while let Some(c) = stack.pop() {
                    if self.is_prime(&c) {
                        found.push((c, 1));
                        continue;
                    }
                    if let Some(root) = exact_sqrt(&c) {
                        stack.push(root.clone());
                        stack.push(root);
                        continue;
                    }
                    match pollard_brent(&c, self.rho_budget, &mut rng) {
                        Some(d) => {
                            let other = &c / &d;
                            stack.push(d);
                            stack.push(other);
                        }
                        None => unfactored.push(c),
                    }
                }
            }
        }
        if !unfactored.is_empty() {
            let partial = Factorization::from_prime_powers(found);
            return Err(NumTheoryError::FactorizationTimeout(PartialFactorization {
                primes: partial.factors,
                unfactored,
            }));
        }
        let result = Factorization::from_prime_powers(found);
        debug_assert_eq!(result.value(), n);
        if let Some(cache) = &self.cache {
            cache.record(&result);
        }
        Ok(result)
    }

    pub fn is_squarefree(&self, n: &BigUint) -> Result<bool, NumTheoryError> {
        if n.is_zero() {
            return Err(NumTheoryError::InvalidInput("0 is not squarefree".into()));
        }
        Ok(self.factorize(n)?.is_squarefree())
    }
}

/// Factorization with default settings.
pub fn factorize(n: &BigUint) -> Result<Factorization, NumTheoryError> {
    Factorizer::default().factorize(n)
}

pub fn is_squarefree(n: &BigUint) -> Result<bool, NumTheoryError> {
    Factorizer::default().is_squarefree(n)
}

fn exact_sqrt(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// One nontrivial factor of the composite `n`, or `None` once `budget`
/// sequence steps are spent.
fn pollard_brent(n: &BigUint, budget: u64, rng: &mut ChaCha8Rng) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    if let Some(small) = n.to_u64() {
        return pollard_brent_u64(small, budget, rng).map(BigUint::from);
    }
    let mut spent = 0u64;
    let one = BigUint::one();
    while spent < budget {
        let c = rng.gen_biguint_range(&one, n);
        let mut y = rng.gen_biguint_range(&one, n);
        let m = 128u64;
        let mut g = one.clone();
        let mut r = 1u64;
        let mut q = one.clone();
        let mut x = y.clone();
        let mut ys = y.clone();
        let f = |v: &BigUint| (v * v + &c) % n;
        while g.is_one() && spent < budget {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            spent += r;
            let mut k = 0u64;
            while k < r && g.is_one() {
                ys = y.clone();
                let steps = m.min(r - k);
                for _ in 0..steps {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                spent += steps;
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                spent += 1;
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() || spent >= budget {
                    break;
                }
            }
        }
        if !g.is_one() && g != *n {
            return Some(g);
        }
    }
    None
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pollard_brent_u64(n: u64, budget: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let mut spent = 0u64;
    while spent < budget {
        let c = rng.gen_range(1..n);
        let mut y = rng.gen_range(1..n);
        let f = |v: u64| (mul_mod(v, v, n) + c) % n;
        let m = 128u64;
        let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
        let (mut x, mut ys) = (y, y);
        while g == 1 && spent < budget {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            spent += r;
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let steps = m.min(r - k);
                for _ in 0..steps {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                spent += steps;
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                spent += 1;
                g = gcd_u64(x.abs_diff(ys), n);
                if g != 1 || spent >= budget {
                    break;
                }
            }
        }
        if g != 1 && g != n {
            return Some(g);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn primes_of(n: u64) -> Vec<(u64, u32)> {
        factorize(&big(n))
            .unwrap()
            .factors()
            .iter()
            .map(|(p, e)| (p.to_u64().unwrap(), *e))
            .collect()
    }

    #[test]
    fn table_rows() {
        assert_eq!(primes_of(1295), vec![(5, 1), (7, 1), (37, 1)]);
        assert_eq!(primes_of(20735), vec![(5, 1), (11, 1), (13, 1), (29, 1)]);
        assert!(factorize(&BigUint::one()).unwrap().factors().is_empty());
        // 462^4 - 1
        assert_eq!(
            primes_of(45558341135),
            vec![(5, 1), (461, 1), (463, 1), (42689, 1)]
        );
        // 42^4 - 1: the printed "1765" is 5 · 353
        assert_eq!(
            primes_of(3111695),
            vec![(5, 1), (41, 1), (43, 1), (353, 1)]
        );
    }

    #[test]
    fn rho_splits_products_of_large_primes() {
        // both factors exceed the trial-division bound
        let n = 1_000_003u64 * 1_000_033;
        assert_eq!(primes_of(n), vec![(1_000_003, 1), (1_000_033, 1)]);
        let p: BigUint = "1000000000039".parse().unwrap();
        let q: BigUint = "1000000000061".parse().unwrap();
        let f = factorize(&(&p * &q * &q)).unwrap();
        assert_eq!(f.factors(), &[(p, 1), (q, 2)]);
    }

    #[test]
    fn budget_exhaustion_reports_partial() {
        let n = BigUint::from(6u32) * big(1_000_003) * big(1_000_033);
        let err = Factorizer::new().with_rho_budget(0).factorize(&n).unwrap_err();
        match err {
            NumTheoryError::FactorizationTimeout(partial) => {
                assert_eq!(partial.primes, vec![(big(2), 1), (big(3), 1)]);
                assert_eq!(partial.unfactored, vec![big(1_000_003 * 1_000_033)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn squarefree() {
        assert!(is_squarefree(&big(37)).unwrap());
        assert!(!is_squarefree(&big(4)).unwrap());
        assert!(is_squarefree(&big(213445)).unwrap());
    }

    #[test]
    fn cache_records_fresh_entries_once() {
        let cache = Arc::new(FactorCache::new());
        let f = Factorizer::new().with_cache(cache.clone());
        f.factorize(&big(1295)).unwrap();
        f.factorize(&big(1295)).unwrap();
        let fresh = cache.drain_fresh();
        assert_eq!(fresh.len(), 1);
        assert_eq!(fresh[0].value(), &big(1295));
        assert!(cache.drain_fresh().is_empty());
    }
}
