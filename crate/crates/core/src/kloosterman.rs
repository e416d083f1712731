//! Kloosterman sums S(m, n; c) = Σ_{x mod c, (x,c)=1} e((m x + n x̄)/c).

use std::f64::consts::TAU;

use crate::arithmetic::{fac, gcd, mobius, sigma0};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KloostermanValue {
    pub m: i64,
    pub n: i64,
    pub c: u64,
    pub value: f64,
    pub imaginary_residual: f64,
}

/// Units modulo `c` with their inverses and a table of e(r/c).
///
/// Building the table costs O(c); each subsequent sum is O(φ(c)) lookups,
/// which pays off when many (m, n) pairs share a modulus.
#[derive(Debug, Clone)]
pub struct KloostermanModulus {
    c: u64,
    units: Vec<(u32, u32)>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl KloostermanModulus {
    pub fn new(c: u64) -> Self {
        assert!(c >= 1 && c < (1 << 31), "modulus out of range");
        let units = unit_inverses(c);
        let n = c as usize;
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for r in 0..=n / 2 {
            let (s, co) = (TAU * r as f64 / c as f64).sin_cos();
            cos[r] = co;
            sin[r] = s;
            if r > 0 {
                cos[n - r] = co;
                sin[n - r] = -s;
            }
        }
        Self { c, units, cos, sin }
    }

    pub fn modulus(&self) -> u64 {
        self.c
    }

    pub fn sum(&self, m: i64, n: i64) -> KloostermanValue {
        let c = self.c;
        let mr = (m as i128).rem_euclid(c as i128) as u64;
        let nr = (n as i128).rem_euclid(c as i128) as u64;
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for &(x, xi) in &self.units {
            let r = ((mr * x as u64) % c + (nr * xi as u64) % c) % c;
            re.add(self.cos[r as usize]);
            im.add(self.sin[r as usize]);
        }
        KloostermanValue {
            m,
            n,
            c,
            value: re.value(),
            imaginary_residual: im.value().abs(),
        }
    }
}

impl KloostermanModulus {
    /// Real part of S(m, n; c) with plain summation; the rounding error is
    /// below φ(c)²·ε.
    pub fn real_sum(&self, m: i64, n: i64) -> f64 {
        let c = self.c;
        let mr = (m as i128).rem_euclid(c as i128) as u64;
        let nr = (n as i128).rem_euclid(c as i128) as u64;
        let mut acc = 0.0;
        for &(x, xi) in &self.units {
            // Both products are below c² < 2⁶², so their sum cannot overflow.
            let r = (mr * x as u64 + nr * xi as u64) % c;
            acc += self.cos[r as usize];
        }
        acc
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    /// Real parts of S(a, b; c) for every a in `a_list` and one fixed b.
    ///
    /// Units pair as x ↔ c − x with equal cosines, so only x < c/2 is visited;
    /// a·x mod c is carried incrementally and b·x̄ is shared across the list.
    /// Partial sums are flushed every 256 terms; see [`shared_sum_error`].
    pub fn real_sums_shared_b(&self, a_list: &[i64], b: i64) -> Vec<f64> {
        let c = self.c;
        if c <= 2 {
            return a_list.iter().map(|&a| self.real_sum(a, b)).collect();
        }
        let half = ((c - 1) / 2) as usize;
        let br = (b as i128).rem_euclid(c as i128) as u64;
        let mut w = vec![u32::MAX; half + 1];
        for &(x, xi) in &self.units {
            if (x as usize) <= half {
                w[x as usize] = ((br * xi as u64) % c) as u32;
            }
        }
        let c32 = c as u32;
        a_list
            .iter()
            .map(|&a| {
                let ar = (a as i128).rem_euclid(c as i128) as u32;
                let mut t = 0u32;
                let mut total = 0.0;
                let mut block = 0.0;
                for (x, &wx) in w.iter().enumerate().skip(1) {
                    t += ar;
                    if t >= c32 {
                        t -= c32;
                    }
                    if wx != u32::MAX {
                        let mut r = t + wx;
                        if r >= c32 {
                            r -= c32;
                        }
                        block += self.cos[r as usize];
                    }
                    if x % 256 == 0 {
                        total += block;
                        block = 0.0;
                    }
                }
                2.0 * (total + block)
            })
            .collect()
    }
}

/// Rounding bound for [`KloostermanModulus::real_sums_shared_b`] over `units`
/// terms of modulus at most one.
pub fn shared_sum_error(units: usize) -> f64 {
    let n = units as f64;
    (258.0 + n / 256.0) * f64::EPSILON * n
}

/// Pairs (x, x̄) for all units x mod c, computed by a single batch inversion.
fn unit_inverses(c: u64) -> Vec<(u32, u32)> {
    if c == 1 {
        return vec![(0, 0)];
    }
    let mut coprime = vec![true; c as usize];
    for p in fac(c).primes() {
        for x in (0..c).step_by(p as usize) {
            coprime[x as usize] = false;
        }
    }
    let units: Vec<u64> = (1..c).filter(|&x| coprime[x as usize]).collect();
    // Montgomery's trick: one extended gcd for the whole batch.
    let mut prefix = Vec::with_capacity(units.len());
    let mut acc = 1u64;
    for &x in &units {
        acc = mulmod(acc, x, c);
        prefix.push(acc);
    }
    let mut inv = crate::arithmetic::mod_inverse(acc as i64, c).expect("product of units");
    let mut out = vec![(0u32, 0u32); units.len()];
    for i in (0..units.len()).rev() {
        let before = if i == 0 { 1 } else { prefix[i - 1] };
        out[i] = (units[i] as u32, mulmod(inv, before, c) as u32);
        inv = mulmod(inv, units[i], c);
    }
    out
}

#[inline]
fn mulmod(a: u64, b: u64, c: u64) -> u64 {
    if c <= u32::MAX as u64 {
        (a * b) % c
    } else {
        ((a as u128 * b as u128) % c as u128) as u64
    }
}

/// Direct O(c) evaluation with compensated accumulation.
pub fn kloosterman_sum(m: i64, n: i64, c: u64) -> KloostermanValue {
    assert!(c >= 1, "kloosterman_sum: c must be positive");
    let cm = c as i128;
    let mr = (m as i128).rem_euclid(cm);
    let nr = (n as i128).rem_euclid(cm);
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (x, xi) in unit_inverses(c) {
        let r = (mr * x as i128 + nr * xi as i128).rem_euclid(cm);
        let (s, co) = (TAU * r as f64 / c as f64).sin_cos();
        re.add(co);
        im.add(s);
    }
    KloostermanValue {
        m,
        n,
        c,
        value: re.value(),
        imaginary_residual: im.value().abs(),
    }
}

/// c_c(n) = Σ_{d | gcd(c, n)} μ(c/d) d.
pub fn ramanujan_sum(n: i64, c: u64) -> i64 {
    assert!(c >= 1, "ramanujan_sum: c must be positive");
    let g = gcd(n.unsigned_abs(), c);
    let g = if n == 0 { c } else { g };
    fac(g)
        .divisors()
        .into_iter()
        .map(|d| mobius(&fac(c / d)) * d as i64)
        .sum()
}

/// σ₀(c)·√gcd(m, n, c)·√c.
pub fn weil_bound(m: i64, n: i64, c: u64) -> f64 {
    assert!(c >= 1, "weil_bound: c must be positive");
    let g = gcd(gcd(m.unsigned_abs(), n.unsigned_abs()), c);
    let g = if g == 0 { c } else { g };
    sigma0(&fac(c)) as f64 * (g as f64).sqrt() * (c as f64).sqrt()
}
