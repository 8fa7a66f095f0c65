//! Independent local oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use emrank::descent::phi_torsion_images;
use emrank::family::CurveParams;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (valuation mod 2, unit class): Legendre bit for odd ℓ, residue mod 8 at 2.
pub type Local = (u8, u64);

pub fn local_class(n: &BigInt, l: u64) -> Local {
    let lb = BigInt::from(l);
    let mut u = n.clone();
    let mut v = 0u8;
    while (&u % &lb).is_zero() {
        u /= &lb;
        v ^= 1;
    }
    if l == 2 {
        (v, u.mod_floor(&BigInt::from(8)).try_into().unwrap())
    } else {
        let r = u.mod_floor(&lb);
        let e = r.modpow(&BigInt::from((l - 1) / 2), &lb);
        (v, u64::from(e != BigInt::from(1)))
    }
}

pub fn mul(a: Local, b: Local, l: u64) -> Local {
    if l == 2 {
        (a.0 ^ b.0, a.1 * b.1 % 8)
    } else {
        (a.0 ^ b.0, a.1 ^ b.1)
    }
}

pub fn is_square(n: &BigInt, l: u64) -> bool {
    !n.is_zero() && local_class(n, l) == (0, if l == 2 { 1 } else { 0 })
}

pub type Pair = (Local, Local);

pub fn close(group: &mut BTreeSet<Pair>, g: Pair, l: u64) {
    if group.contains(&g) {
        return;
    }
    let old: Vec<Pair> = group.iter().copied().collect();
    for h in old {
        group.insert((mul(h.0, g.0, l), mul(h.1, g.1, l)));
    }
}

/// The local image, grown from sampled points until it reaches its known
/// order: 4 at odd ℓ, 8 at ℓ = 2.
pub fn kummer_image(c: &CurveParams, l: u64) -> BTreeSet<Pair> {
    let target = if l == 2 { 8 } else { 4 };
    let unit: Local = (0, if l == 2 { 1 } else { 0 });
    let mut group = BTreeSet::from([(unit, unit)]);
    for d in phi_torsion_images(c).unwrap() {
        let (b1, b2) = d.values();
        close(&mut group, (local_class(&b1, l), local_class(&b2, l)), l);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(l);
    let lb = BigInt::from(l);
    for _ in 0..200_000 {
        if group.len() == target {
            return group;
        }
        // x = a / ℓ^(2k)
        let k = rng.gen_range(0..3u32);
        let den = lb.pow(2 * k);
        let a = BigInt::from(rng.gen_range(-1_000_000_000i64..1_000_000_000));
        let u1 = &a - &c.e1 * &den;
        let u2 = &a - &c.e2 * &den;
        let u3 = &a - &c.e3 * &den;
        let f = &u1 * &u2 * &u3;
        if is_square(&f, l) {
            close(&mut group, (local_class(&u1, l), local_class(&u2, l)), l);
        }
    }
    panic!("local image at {l} stuck at {} elements", group.len());
}

/// Searches (s : 1) and (1 : ℓ s) for 0 ≤ s < ℓ^k with both eliminated
/// quadratics exact ℓ-adic squares.
pub fn integer_point(c: &CurveParams, b1: &BigInt, b2: &BigInt, l: u64, k: u32) -> bool {
    let two_a = &c.a * 2;
    let lb = BigInt::from(l);
    let ok = |z1: &BigInt, w: &BigInt| {
        let g1 = b2 * (b1 * z1 * z1 + &two_a * w * w);
        let g2 = b1 * b2 * (b1 * z1 * z1 + &c.q * w * w);
        is_square(&g1, l) && is_square(&g2, l)
    };
    let one = BigInt::from(1);
    (0..l.pow(k)).any(|s| {
        let s = BigInt::from(s);
        ok(&s, &one) || ok(&one, &(&lb * &s))
    })
}

pub const PRIMES_TO_50: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
