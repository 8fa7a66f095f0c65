//! Word-sized modular arithmetic and square roots modulo primes and prime powers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Reduces a signed big integer into `[0, m)`.
pub fn reduce_big(a: &BigInt, m: u64) -> u64 {
    let r = a.mod_floor(&BigInt::from(m));
    r.to_u64().expect("residue fits in u64")
}

/// Euler's criterion for an odd prime `p`; the caller guarantees primality.
pub fn legendre_u64(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Tonelli–Shanks for an odd prime `p`. Returns the smaller of the two roots.
pub fn sqrt_mod_u64(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre_u64(a, p) != 1 {
        return None;
    }
    let root = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        let mut q = p - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while legendre_u64(z, p) != -1 {
            z += 1;
        }
        let mut c = pow_mod(z, q, p);
        let mut x = pow_mod(a, (q + 1) / 2, p);
        let mut t = pow_mod(a, q, p);
        let mut m = s;
        while t != 1 {
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != 1 {
                t2 = mul_mod(t2, t2, p);
                i += 1;
            }
            let b = pow_mod(c, 1u64 << (m - i - 1), p);
            x = mul_mod(x, b, p);
            c = mul_mod(b, b, p);
            t = mul_mod(t, c, p);
            m = i;
        }
        x
    };
    Some(root.min(p - root))
}

/// Modular inverse of `a` modulo `m` when it exists.
pub fn inv_mod_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// A square root of the unit `a` modulo `p^k`, lifted from a root modulo `p`
/// (odd `p`) or modulo 8 (`p = 2`). `None` when `a` is not a square unit.
pub fn sqrt_mod_prime_power(a: &BigInt, p: u64, k: u32) -> Option<BigInt> {
    let pb = BigInt::from(p);
    let modulus = pb.pow(k);
    let a = a.mod_floor(&modulus);
    if p == 2 {
        // An odd a is a square mod 2^k iff a ≡ 1 mod 2^min(k,3) (k ≥ 1).
        let check = BigInt::from(1u32 << k.min(3));
        if k == 0 {
            return Some(BigInt::zero());
        }
        if !a.mod_floor(&check).is_one() {
            return None;
        }
        // Bit-by-bit lift: r^2 ≡ a (mod 2^j) implies (r or r + 2^(j-1))^2 ≡ a (mod 2^(j+1)).
        let mut r = BigInt::one();
        for j in 3..k {
            let next = BigInt::one() << (j + 1);
            if (&r * &r - &a).mod_floor(&next) != BigInt::zero() {
                r += BigInt::one() << (j - 1);
            }
        }
        return Some(r.mod_floor(&modulus));
    }
    let a0 = reduce_big(&a, p);
    if a0 == 0 {
        return None;
    }
    let r0 = sqrt_mod_u64(a0, p)?;
    let mut r = BigInt::from(r0);
    let mut prec = 1u32;
    while prec < k {
        prec = (prec * 2).min(k);
        let m = pb.pow(prec);
        let two_r_inv = inv_mod_big(&(&r * 2), &m)?;
        r = (&r - (&r * &r - &a) * two_r_inv).mod_floor(&m);
    }
    Some(r.mod_floor(&modulus))
}
