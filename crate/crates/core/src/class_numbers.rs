//! Class numbers of imaginary quadratic orders, Hurwitz class numbers and
//! sums of three squares.
//!
//! Arguments are discriminant-valued (negative) for `class_number` and
//! positive for `hurwitz_H`: H(n) collects h_w(−n/f²).

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::arithmetic::{fac, gcd, is_square, isqrt, kronecker, mobius, sigma1};
use crate::error::{invalid, Error, Result};

pub const MAX_ABS_DISCRIMINANT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassNumberRecord {
    pub discriminant: i64,
    pub h: u64,
    pub w: u32,
    pub h_w: BigRational,
}

fn cache() -> &'static RwLock<HashMap<i64, u64>> {
    static CACHE: OnceLock<RwLock<HashMap<i64, u64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Entries currently memoized in this process, sorted by discriminant.
pub fn cache_snapshot() -> Vec<(i64, u64)> {
    let mut v: Vec<_> = cache().read().unwrap().iter().map(|(&d, &h)| (d, h)).collect();
    v.sort_unstable();
    v
}

/// Seeds the memo table, e.g. from a persisted cache.
pub fn cache_preload(entries: impl IntoIterator<Item = (i64, u64)>) {
    let mut map = cache().write().unwrap();
    for (d, h) in entries {
        map.insert(d, h);
    }
}

pub fn cache_clear() {
    cache().write().unwrap().clear();
}

fn check_discriminant(d: i64) -> Result<()> {
    if d >= 0 {
        return invalid(format!("class_number: D = {d} must be negative"));
    }
    if d.rem_euclid(4) > 1 {
        return invalid(format!("class_number: D = {d} is not 0 or 1 mod 4"));
    }
    if d.unsigned_abs() > MAX_ABS_DISCRIMINANT {
        return invalid(format!("class_number: |D| = {} exceeds 10^7", d.unsigned_abs()));
    }
    Ok(())
}

pub fn unit_weight(d: i64) -> u32 {
    match d {
        -3 => 3,
        -4 => 2,
        _ => 1,
    }
}

/// Number of reduced primitive forms (a, b, c) with b² − 4ac = D.
fn count_reduced_forms(d: i64) -> u64 {
    let nd = d.unsigned_abs();
    let parity = nd % 2;
    let mut h = 0u64;
    let mut a = 1u64;
    while 3 * a * a <= nd {
        let four_a = 4 * a;
        let mut b = parity;
        while b <= a {
            let num = b * b + nd;
            if num % four_a == 0 {
                let c = num / four_a;
                if c >= a && gcd(gcd(a, b), c) == 1 {
                    h += if b == 0 || b == a || a == c { 1 } else { 2 };
                }
            }
            b += 2;
        }
        a += 1;
    }
    h
}

fn class_number_h(d: i64) -> u64 {
    if let Some(&h) = cache().read().unwrap().get(&d) {
        return h;
    }
    let h = count_reduced_forms(d);
    cache().write().unwrap().insert(d, h);
    h
}

pub fn class_number(d: i64) -> Result<ClassNumberRecord> {
    check_discriminant(d)?;
    let h = class_number_h(d);
    let w = unit_weight(d);
    Ok(ClassNumberRecord {
        discriminant: d,
        h,
        w,
        h_w: BigRational::new(BigInt::from(h), BigInt::from(w)),
    })
}

/// h(D)·(6/w(D)), an integer: 6·h_w.
pub(crate) fn six_h_w(d: i64) -> i64 {
    (class_number_h(d) * (6 / unit_weight(d) as u64)) as i64
}

fn is_discriminant(d: i64) -> bool {
    d.rem_euclid(4) <= 1
}

/// Fundamental discriminant D₀ and conductor f with −n = D₀ f².
fn fundamental_part(n: u64) -> (i64, u64) {
    let fm = fac(n);
    let s: u64 = fm.factors.iter().filter(|&&(_, e)| e % 2 == 1).map(|&(p, _)| p).product();
    let d0 = if (s as i64).wrapping_neg().rem_euclid(4) == 1 {
        -(s as i64)
    } else {
        -4 * s as i64
    };
    let f2 = n / d0.unsigned_abs();
    (d0, isqrt(f2))
}

fn hurwitz_direct(n: u64) -> BigRational {
    let mut total = BigRational::zero();
    let mut f = 1u64;
    while f * f <= n {
        if n % (f * f) == 0 {
            let d = -((n / (f * f)) as i64);
            if is_discriminant(d) {
                total += class_number(d).expect("valid discriminant").h_w;
            }
        }
        f += 1;
    }
    total
}

fn hurwitz_cohen(n: u64) -> BigRational {
    let (d0, f) = fundamental_part(n);
    let inner: i64 = fac(f)
        .divisors()
        .into_iter()
        .map(|d| mobius(&fac(d)) * kronecker(d0, d) * sigma1(&fac(f / d)) as i64)
        .sum();
    class_number(d0).expect("fundamental discriminant").h_w * BigRational::from_integer(BigInt::from(inner))
}

/// Hurwitz class number H(n) = Σ_{f² | n} h_w(−n/f²), cross-checked against
/// the fundamental-discriminant formula.
#[allow(non_snake_case)]
pub fn hurwitz_H(n: u64) -> Result<BigRational> {
    if n == 0 || n % 4 == 1 || n % 4 == 2 {
        return invalid(format!("hurwitz_H: n = {n} is not 0 or 3 mod 4"));
    }
    if n > MAX_ABS_DISCRIMINANT {
        return invalid(format!("hurwitz_H: n = {n} exceeds 10^7"));
    }
    let a = hurwitz_direct(n);
    let b = hurwitz_cohen(n);
    if a != b {
        return Err(Error::Inconsistent(format!("H({n}): direct {a} vs Cohen {b}")));
    }
    Ok(a)
}

/// #{(x, y, z) ∈ ℤ³ : x² + y² + z² = n} by direct enumeration.
pub fn r3(n: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    let r = isqrt(n);
    let mut count = 0u64;
    for x in 0..=r {
        let rest = n - x * x;
        let ry = isqrt(rest);
        for y in 0..=ry {
            let z2 = rest - y * y;
            if is_square(z2) {
                let z = isqrt(z2);
                let signs = [x, y, z].iter().filter(|&&v| v != 0).count() as u32;
                count += 1 << signs;
            }
        }
    }
    count
}

/// r₃ for every m ≤ limit, by enumerating lattice points once.
pub fn r3_table(limit: usize) -> Vec<u64> {
    let mut table = vec![0u64; limit + 1];
    let r = isqrt(limit as u64) as usize;
    for x in 0..=r {
        for y in 0..=r {
            let s = x * x + y * y;
            if s > limit {
                break;
            }
            for z in 0..=r {
                let t = s + z * z;
                if t > limit {
                    break;
                }
                let signs = [x, y, z].iter().filter(|&&v| v != 0).count() as u32;
                table[t] += 1 << signs;
            }
        }
    }
    table
}

/// r₃(n) from Gauss's formula in terms of Hurwitz class numbers.
pub fn r3_from_hurwitz(n: u64) -> Result<u64> {
    if n == 0 {
        return Ok(1);
    }
    let to_int = |q: BigRational| -> Result<u64> {
        if !q.is_integer() {
            return Err(Error::Inconsistent(format!("r3_from_hurwitz({n}): non-integer {q}")));
        }
        Ok(q.to_integer().to_u64().expect("non-negative"))
    };
    match n % 8 {
        7 => Ok(0),
        3 => to_int(hurwitz_H(n)? * BigRational::from_integer(24.into())),
        0 | 4 => r3_from_hurwitz(n / 4),
        _ => to_int(hurwitz_H(4 * n)? * BigRational::from_integer(12.into())),
    }
}

/// #{(x, y, z, t) : 4n = t² + x² + y² + z², t ≡ n₀ (mod 2N)}.
#[allow(non_snake_case)]
pub fn count_A(N: u64, n: u64, n0: i64) -> Result<u64> {
    let table = r3_table(4 * n as usize);
    count_A_with_table(N, n, n0, &table)
}

/// As [`count_A`], reading r₃ from a precomputed table covering 4n.
#[allow(non_snake_case)]
pub fn count_A_with_table(N: u64, n: u64, n0: i64, table: &[u64]) -> Result<u64> {
    let modulus = 2 * N as i64;
    if !(0 < n0 && n0 < modulus && n0 % 2 == 1) {
        return invalid(format!("count_A: n0 = {n0} must be odd in (0, {modulus})"));
    }
    if table.len() <= 4 * n as usize {
        return invalid("count_A: r3 table too short");
    }
    let four_n = 4 * n as i64;
    let tmax = isqrt(four_n as u64) as i64;
    let mut total = 0u64;
    for t in -tmax..=tmax {
        if (t - n0).rem_euclid(modulus) == 0 {
            total += table[(four_n - t * t) as usize];
        }
    }
    Ok(total)
}

/// Smallest odd 0 < n₀ < 2N with ((n₀² − 4n) / p) = −1 for every odd p | N.
#[allow(non_snake_case)]
pub fn admissible_n0(N: u64, n: u64) -> Option<i64> {
    let odd_primes: Vec<u64> = fac(N).primes().filter(|&p| p != 2).collect();
    (1..2 * N as i64).step_by(2).find(|&n0| {
        let d = n0 * n0 - 4 * n as i64;
        odd_primes.iter().all(|&p| kronecker(d, p) == -1)
    })
}
