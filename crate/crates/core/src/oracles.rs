//! Independent ground truth: q-expansions of level-one eigenforms, dimension
//! and genus formulas.
//!
//! Eisenstein series are normalized as E₄ = 1 + 240 Σ σ₃(n)qⁿ and
//! E₆ = 1 − 504 Σ σ₅(n)qⁿ.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arithmetic::{fac, kronecker, nu_index, sigma0};
use crate::error::{invalid, Result};

pub const MAX_TERMS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QExpansion {
    pub weight: u32,
    /// a(1), …, a(n_max); index 0 holds a(1).
    pub coefficients: Vec<BigInt>,
    pub normalized: bool,
}

impl QExpansion {
    /// The coefficient a(n) for 1 ≤ n ≤ n_max.
    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coefficients[n - 1]
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Coefficients of ∏(1 − q^m)^24 up to q^len, as η³ = Σ (−1)^j (2j+1) q^{j(j+1)/2}
/// applied eight times.
fn eta24(len: usize) -> Vec<i128> {
    let mut eta3 = Vec::new();
    let mut j = 0i128;
    loop {
        let e = (j * (j + 1) / 2) as usize;
        if e > len {
            break;
        }
        eta3.push((e, if j % 2 == 0 { 2 * j + 1 } else { -(2 * j + 1) }));
        j += 1;
    }
    let mut series = vec![0i128; len + 1];
    series[0] = 1;
    for _ in 0..8 {
        let mut next = vec![0i128; len + 1];
        for (i, &a) in series.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(e, c) in &eta3 {
                if i + e > len {
                    break;
                }
                next[i + e] += a * c;
            }
        }
        series = next;
    }
    series
}

/// Ramanujan's τ(1..=n_max) from q∏(1 − q^m)^24.
pub fn delta_tau(n_max: usize) -> Result<QExpansion> {
    if n_max == 0 || n_max > MAX_TERMS {
        return invalid(format!("delta_tau: n_max = {n_max} outside [1, 10^5]"));
    }
    let s = eta24(n_max - 1);
    Ok(QExpansion {
        weight: 12,
        coefficients: s.into_iter().map(BigInt::from).collect(),
        normalized: true,
    })
}

fn divisor_power_sums(len: usize, power: u32) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); len + 1];
    for d in 1..=len {
        let dp = BigInt::from(d).pow(power);
        for m in (d..=len).step_by(d) {
            s[m] += &dp;
        }
    }
    s
}

fn eisenstein(len: usize, weight: u32) -> Vec<BigInt> {
    let (c, power) = match weight {
        4 => (240, 3),
        6 => (-504, 5),
        _ => unreachable!("only E4 and E6 are used"),
    };
    let mut e = divisor_power_sums(len, power);
    for v in e.iter_mut() {
        *v *= c;
    }
    e[0] = BigInt::one();
    e
}

/// Truncated product of two power series with constant terms at index 0.
fn mul_series(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let len = a.len().min(b.len());
    let mut out = vec![BigInt::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// The normalized eigenform E₄^a E₆^b Δ spanning S_k(1) for the one-dimensional
/// weights k ∈ {12, 16, 18, 20, 22, 26}.
pub fn level_one_eigenform(k: u32, n_max: usize) -> Result<QExpansion> {
    let (a, b) = match k {
        12 => (0, 0),
        16 => (1, 0),
        18 => (0, 1),
        20 => (2, 0),
        22 => (1, 1),
        26 => (2, 1),
        _ => return invalid(format!("level_one_eigenform: weight {k} not supported")),
    };
    let delta = delta_tau(n_max)?;
    if a == 0 && b == 0 {
        return Ok(delta);
    }
    // Work with f/q so that index i is the coefficient of q^{i+1}.
    let len = n_max;
    let mut series = delta.coefficients;
    for _ in 0..a {
        series = mul_series(&eisenstein(len, 4), &series);
    }
    for _ in 0..b {
        series = mul_series(&eisenstein(len, 6), &series);
    }
    Ok(QExpansion { weight: k, coefficients: series, normalized: true })
}

/// dim S_k(SL₂(ℤ)) for even k ≥ 4.
pub fn dim_level_one(k: u32) -> Result<u32> {
    if k < 4 || k % 2 == 1 {
        return invalid(format!("dim_level_one: weight {k} must be even and at least 4"));
    }
    Ok(if k % 12 == 2 { k / 12 - 1 } else { k / 12 })
}

/// Genus of X₀(N) for squarefree N.
#[allow(non_snake_case)]
pub fn genus_X0(N: u64) -> Result<u64> {
    if N == 0 || N > 100 {
        return invalid(format!("genus_X0: N = {N} outside [1, 100]"));
    }
    let f = fac(N);
    if !f.is_squarefree() {
        return invalid(format!("genus_X0: N = {N} is not squarefree"));
    }
    let mu = nu_index(&f) as i64;
    let nu2: i64 = f.primes().map(|p| 1 + kronecker(-4, p)).product();
    let nu3: i64 = f.primes().map(|p| 1 + kronecker(-3, p)).product();
    let cusps = sigma0(&f) as i64;
    // 12g = 12 + μ − 3ν₂ − 4ν₃ − 6ν∞.
    let twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps;
    debug_assert!(twelve_g % 12 == 0 && twelve_g >= 0);
    Ok((twelve_g / 12) as u64)
}
