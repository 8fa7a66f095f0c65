//! Primality testing.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::modular::{mul_mod, pow_mod};

/// Miller–Rabin bases; the first thirteen primes decide every n < 3.317·10²⁴.
pub const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Upper end of the range on which [`MR_BASES`] is a proof of primality.
pub fn deterministic_limit() -> BigUint {
    "3317044064679887385961981".parse().unwrap()
}

/// Extra random rounds applied above [`deterministic_limit`].
pub const RANDOM_ROUNDS: usize = 64;

pub const TRIAL_LIMIT: u32 = 1_000_000;

/// Primes below [`TRIAL_LIMIT`], sieved once.
pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut composite = vec![false; n + 1];
        let mut out = Vec::new();
        for i in 2..=n {
            if !composite[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

fn mr_round_u64(n: u64, d: u64, s: u32, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    MR_BASES.iter().all(|&a| mr_round_u64(n, d, s, a))
}

fn mr_round_big(n: &BigUint, d: &BigUint, s: u32, a: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let mut x = a.modpow(d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Primality with the default seed.
pub fn is_prime(n: &BigUint) -> bool {
    is_prime_seeded(n, 0)
}

/// Primality test: deterministic below [`deterministic_limit`], otherwise
/// the fixed bases plus [`RANDOM_ROUNDS`] bases drawn from a seeded stream.
pub fn is_prime_seeded(n: &BigUint, seed: u64) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &MR_BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0) as u32;
    let d = &n_minus_1 >> s;
    if !MR_BASES
        .iter()
        .all(|&a| mr_round_big(n, &d, s, &BigUint::from(a)))
    {
        return false;
    }
    if *n < deterministic_limit() {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d72_5f72_6f75_6e64);
    let two = BigUint::from(2u32);
    (0..RANDOM_ROUNDS).all(|_| {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        mr_round_big(n, &d, s, &a)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn agrees_with_trial_division_up_to_a_million() {
        let sieve = small_primes();
        let mut idx = 0;
        for n in 0..=1_000_000u64 {
            let expected = idx < sieve.len() && sieve[idx] as u64 == n;
            if expected {
                idx += 1;
            }
            assert_eq!(is_prime_u64(n), expected, "n = {n}");
        }
        // the sieve itself against naive trial division on a prefix
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), trial(n));
        }
    }

    #[test]
    fn table_values() {
        assert!(is_prime(&BigUint::from(461u32)));
        assert!(!is_prime(&BigUint::one()));
        assert!(is_prime(&BigUint::from(45557487359u64)));
        assert!(is_prime(&BigUint::from(45559194911u64)));
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // 3825123056546413051 is a strong pseudoprime to bases 2..23.
        assert!(!is_prime_u64(3825123056546413051));
        let big: BigUint = "318665857834031151167461".parse().unwrap();
        assert!(!is_prime(&big));
    }

    #[test]
    fn large_primes_beyond_u64() {
        // 2^89 - 1 and 2^127 - 1 are Mersenne primes.
        let m89 = (BigUint::one() << 89) - 1u32;
        let m127 = (BigUint::one() << 127) - 1u32;
        assert!(is_prime(&m89));
        assert!(is_prime(&m127));
        assert!(!is_prime(&(&m89 * &m127)));
    }
}
