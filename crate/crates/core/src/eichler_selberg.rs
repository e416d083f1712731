//! Traces of Hecke operators on S_k(N) and on the new subspace S_k(N)*, in the
//! normalization Tr T_n / n^{(k−1)/2}.
//!
//! The hyperbolic/elliptic term is evaluated as
//! −Σ_t sin((k−1)θ_{t,n}) (4n − t²)^{−1/2} Σ_f h_w((t² − 4n)/f²) μ(t, f, n, N),
//! which never forms n^{(k−1)/2}. The remaining terms are exact rational
//! multiples of n^{−1/2}.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arithmetic::{
    euler_phi, fac, gcd, is_square, isqrt, mobius, nu_index, sigma0, sigma1,
};
use crate::class_numbers::six_h_w;
use crate::error::{invalid, Error, Result};
use crate::numeric::CompensatedSum;
use crate::special_functions::{bessel_j, phi_k_cutoff, phi_progression, phi_tail_bound, psi_eval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    /// The full space S_k(N).
    Full,
    /// The new subspace S_k(N)*.
    New,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Full => "full",
            TraceKind::New => "new",
        }
    }
}

/// An exact value r/√n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtScaled {
    pub coefficient: BigRational,
    pub n: u64,
}

impl SqrtScaled {
    fn new(coefficient: BigRational, n: u64) -> Self {
        SqrtScaled { coefficient, n }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    pub fn value(&self) -> f64 {
        self.coefficient.to_f64().unwrap_or(f64::NAN) / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct TraceBreakdown {
    pub n: u64,
    pub k: u32,
    pub N: u64,
    pub kind: TraceKind,
    pub term1: SqrtScaled,
    pub term2: f64,
    pub term3: SqrtScaled,
    pub term4: SqrtScaled,
    pub total: f64,
}

impl TraceBreakdown {
    fn assemble(n: u64, k: u32, level: u64, kind: TraceKind, t1: BigRational, term2: f64, t3: BigRational, t4: BigRational) -> Self {
        let term1 = SqrtScaled::new(t1, n);
        let term3 = SqrtScaled::new(t3, n);
        let term4 = SqrtScaled::new(t4, n);
        // The exact terms share the 1/√n scale, so add them before converting.
        let exact = (&term1.coefficient + &term3.coefficient + &term4.coefficient).to_f64().unwrap_or(f64::NAN)
            / (n as f64).sqrt();
        TraceBreakdown { n, k, N: level, kind, term1, term2, term3, term4, total: exact + term2 }
    }
}

/// θ_{t,n} ∈ (0, π) with √n e^{iθ} = (t + i√(4n − t²))/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleData {
    pub t: i64,
    pub n: u64,
    pub theta: f64,
}

impl AngleData {
    pub fn new(t: i64, n: u64) -> Result<Self> {
        let disc = 4 * n as i128 - (t as i128) * (t as i128);
        if n == 0 || disc <= 0 {
            return invalid(format!("AngleData: t² < 4n fails for t = {t}, n = {n}"));
        }
        Ok(AngleData { t, n, theta: (disc as f64).sqrt().atan2(t as f64) })
    }
}

/// Admissible window around a weight K: ψ((k − K)/K^δ) restricts k to
/// |k − K| < K^δ.
#[derive(Debug, Clone, Copy, PartialEq)]
#[allow(non_snake_case)]
pub struct WindowSpec {
    pub K: f64,
    pub delta: f64,
    pub radius: f64,
}

impl WindowSpec {
    #[allow(non_snake_case)]
    pub fn new(K: f64, delta: f64) -> Result<Self> {
        if !(K > 0.0 && K.is_finite()) {
            return invalid(format!("WindowSpec: K = {K} must be positive"));
        }
        if !(delta > 0.2 && delta < 1.0 / 3.0) {
            return invalid(format!("WindowSpec: δ = {delta} outside (1/5, 1/3)"));
        }
        Ok(WindowSpec { K, delta, radius: K.powf(delta) })
    }

    /// Even weights k with ψ((k − K)/K^δ) ≠ 0, paired with that weight.
    pub fn weights(&self) -> Vec<(u32, f64)> {
        let lo = (self.K - self.radius).ceil().max(2.0) as u32;
        let hi = (self.K + self.radius).floor() as u32;
        (lo..=hi)
            .filter(|k| k % 2 == 0)
            .map(|k| (k, psi_eval((k as f64 - self.K) / self.radius)))
            .filter(|&(_, w)| w > 0.0)
            .collect()
    }
}

fn check_common(n: u64, k: u32, level: u64) -> Result<()> {
    if n == 0 || level == 0 {
        return invalid("trace: n and N must be positive");
    }
    if k < 2 || k % 2 == 1 {
        return invalid(format!("trace: weight {k} must be even and at least 2"));
    }
    if gcd(n, level) != 1 {
        return invalid(format!("trace: gcd(n, N) = gcd({n}, {level}) > 1"));
    }
    if n > (1 << 40) {
        return invalid(format!("trace: n = {n} too large"));
    }
    Ok(())
}

fn check_squarefree(level: u64) -> Result<()> {
    if !fac(level).is_squarefree() {
        return invalid(format!("N = {level} is not squarefree"));
    }
    Ok(())
}

/// μ(t, f, n, N) = ν(N)/ν(N/N_f) · M(t, n, N·N_f), N_f = gcd(N, f), where M
/// counts roots of x² − tx + n modulo its last argument.
pub fn mu_classical(t: i64, f: u64, n: u64, level: u64) -> i64 {
    let nf = gcd(level, f);
    let ratio = nu_index(&fac(level)) / nu_index(&fac(level / nf));
    ratio as i64 * roots_mod_level(t, n, level, level * nf) as i64
}

/// #{x mod N : x² − tx + n ≡ 0 (mod K)} for N | K.
fn roots_mod_level(t: i64, n: u64, level: u64, modulus: u64) -> u64 {
    let m = modulus as i128;
    (0..level as i128)
        .filter(|&x| (x * x - t as i128 * x + n as i128).rem_euclid(m) == 0)
        .count() as u64
}

/// μ̃(t, f, n, N) = Σ_{d | N} σ₀(N/d) μ(N/d) μ(t, f, n, d).
pub fn mu_tilde(t: i64, f: u64, n: u64, level: u64) -> Result<i64> {
    check_squarefree(level)?;
    Ok(mu_tilde_unchecked(t, f, n, level))
}

fn mu_tilde_unchecked(t: i64, f: u64, n: u64, level: u64) -> i64 {
    fac(level)
        .divisors()
        .into_iter()
        .map(|d| {
            let e = fac(level / d);
            sigma0(&e) as i64 * mobius(&e) * mu_classical(t, f, n, d)
        })
        .sum()
}

/// Conductors f with f² | 4n − t² and (t² − 4n)/f² a discriminant.
fn conductors(t: i64, n: u64) -> Vec<(u64, i64)> {
    let m = 4 * n - (t * t) as u64;
    let mut out = Vec::new();
    let mut f = 1u64;
    while f * f <= m {
        if m % (f * f) == 0 {
            let d = -((m / (f * f)) as i64);
            if d.rem_euclid(4) <= 1 {
                out.push((f, d));
            }
        }
        f += 1;
    }
    out
}

/// 6·Σ_f h_w((t² − 4n)/f²)·μ, an integer, with μ the classical (full) or
/// new-space weight.
fn class_sum6(t: i64, n: u64, level: u64, kind: TraceKind) -> i64 {
    conductors(t, n)
        .into_iter()
        .map(|(f, d)| {
            let mu = match kind {
                TraceKind::Full => mu_classical(t, f, n, level),
                TraceKind::New => mu_tilde_unchecked(t, f, n, level),
            };
            six_h_w(d) * mu
        })
        .sum()
}

/// Σ_f h_w((t² − 4n)/f²)·μ as an exact rational.
pub fn class_sum(t: i64, n: u64, level: u64, kind: TraceKind) -> Result<BigRational> {
    AngleData::new(t, n)?;
    if kind == TraceKind::New {
        check_squarefree(level)?;
    }
    Ok(BigRational::new(class_sum6(t, n, level, kind).into(), 6.into()))
}

/// D_N(t, n) = (1/(2√(4n − t²))) Σ_f h_w((t² − 4n)/f²) μ̃(t, f, n, N), without
/// the leading factor i. Even in t.
pub fn d_coefficient(t: i64, n: u64, level: u64) -> Result<f64> {
    AngleData::new(t, n)?;
    check_squarefree(level)?;
    let s = class_sum6(t, n, level, TraceKind::New) as f64 / 6.0;
    Ok(s / (2.0 * ((4 * n) as f64 - (t * t) as f64).sqrt()))
}

/// D_N(t, n) with the sign of t attached, so that the coefficient paired with
/// angle θ_{t,n} is odd in t. The t = 0 coefficient has no signed counterpart
/// and is returned as 0.
pub fn d_coefficient_signed(t: i64, n: u64, level: u64) -> Result<f64> {
    Ok(t.signum() as f64 * d_coefficient(t, n, level)?)
}

/// The ± t-paired terms of the elliptic sum: (t, θ_t, weight) for t ≥ 0 with
/// term2(k) = −Σ weight · sin((k − 1)θ_t).
fn elliptic_terms(n: u64, level: u64, kind: TraceKind) -> Vec<(i64, f64, f64)> {
    let tmax = isqrt(4 * n - 1) as i64;
    (0..=tmax)
        .into_par_iter()
        .filter_map(|t| {
            let s6 = class_sum6(t, n, level, kind);
            if s6 == 0 {
                return None;
            }
            let angle = AngleData::new(t, n).expect("t² < 4n");
            let mult = if t == 0 { 1.0 } else { 2.0 };
            let w = mult * s6 as f64 / 6.0 / ((4 * n) as f64 - (t * t) as f64).sqrt();
            Some((t, angle.theta, w))
        })
        .collect()
}

fn sin_odd_multiple(k: u32, theta: f64) -> f64 {
    ((k - 1) as f64 * theta).sin()
}

fn term2_from(terms: &[(i64, f64, f64)], k: u32) -> f64 {
    let mut s = CompensatedSum::new();
    for &(_, theta, w) in terms {
        s.add(-w * sin_odd_multiple(k, theta));
    }
    s.value()
}

/// Σ_{c | N, gcd(c, N/c) | gcd(N, g)} φ(gcd(c, N/c)).
fn a3_inner(level: u64, g: i64) -> u64 {
    let gg = gcd(level, g.unsigned_abs());
    fac(level)
        .divisors()
        .into_iter()
        .filter_map(|c| {
            let e = gcd(c, level / c);
            (gg % e == 0).then(|| euler_phi(&fac(e)))
        })
        .sum()
}

fn pow_big(base: u64, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

fn frac(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// Coefficient of n^{−1/2} in the A₃ term: −Σ_{d | n, d ≤ √n} d^{k−1}·inner / n^{(k−2)/2},
/// with the d = √n term halved.
fn a3_coefficient(n: u64, k: u32, level: u64) -> BigRational {
    let mut num = BigRational::zero();
    for d in fac(n).divisors() {
        if d * d > n {
            break;
        }
        let inner = a3_inner(level, (n / d) as i64 - d as i64);
        let mut term = BigRational::from_integer(pow_big(d, k - 1) * BigInt::from(inner));
        if d * d == n {
            term /= BigRational::from_integer(2.into());
        }
        num -= term;
    }
    num / BigRational::from_integer(pow_big(n, (k - 2) / 2))
}

fn full_breakdown(n: u64, k: u32, level: u64) -> TraceBreakdown {
    let nu = nu_index(&fac(level)) as i64;
    let t1 = if is_square(n) { frac((k as i64 - 1) * nu, 12) } else { BigRational::zero() };
    let term2 = term2_from(&elliptic_terms(n, level, TraceKind::Full), k);
    let t3 = a3_coefficient(n, k, level);
    let t4 = if k == 2 { frac(sigma1(&fac(n)) as i64, 1) } else { BigRational::zero() };
    TraceBreakdown::assemble(n, k, level, TraceKind::Full, t1, term2, t3, t4)
}

/// Tr T_n on S_k(N), normalized by n^{(k−1)/2}.
#[allow(non_snake_case)]
pub fn trace_full(n: u64, k: u32, N: u64) -> Result<TraceBreakdown> {
    check_common(n, k, N)?;
    Ok(full_breakdown(n, k, N))
}

fn new_breakdown_direct(n: u64, k: u32, level: u64) -> TraceBreakdown {
    let fl = fac(level);
    let t1 = if is_square(n) {
        frac((k as i64 - 1) * euler_phi(&fl) as i64, 12)
    } else {
        BigRational::zero()
    };
    let term2 = term2_from(&elliptic_terms(n, level, TraceKind::New), k);
    let t3 = if level == 1 { a3_coefficient(n, k, 1) } else { BigRational::zero() };
    let t4 = if k == 2 { frac(mobius(&fl) * sigma1(&fac(n)) as i64, 1) } else { BigRational::zero() };
    TraceBreakdown::assemble(n, k, level, TraceKind::New, t1, term2, t3, t4)
}

fn new_breakdown_mobius(n: u64, k: u32, level: u64) -> TraceBreakdown {
    let mut t1 = BigRational::zero();
    let mut t3 = BigRational::zero();
    let mut t4 = BigRational::zero();
    let mut term2 = CompensatedSum::new();
    for d in fac(level).divisors() {
        let e = fac(level / d);
        let c = sigma0(&e) as i64 * mobius(&e);
        if c == 0 {
            continue;
        }
        let full = full_breakdown(n, k, d);
        let cr = frac(c, 1);
        t1 += &cr * full.term1.coefficient;
        t3 += &cr * full.term3.coefficient;
        t4 += &cr * full.term4.coefficient;
        term2.add(c as f64 * full.term2);
    }
    TraceBreakdown::assemble(n, k, level, TraceKind::New, t1, term2.value(), t3, t4)
}

/// Tr T_n on S_k(N)*, normalized by n^{(k−1)/2}, computed from the new-space
/// terms and cross-checked against the Möbius combination of full traces.
#[allow(non_snake_case)]
pub fn trace_new(n: u64, k: u32, N: u64) -> Result<TraceBreakdown> {
    check_common(n, k, N)?;
    check_squarefree(N)?;
    let direct = new_breakdown_direct(n, k, N);
    let combo = new_breakdown_mobius(n, k, N);
    if direct.term1 != combo.term1 || direct.term3 != combo.term3 || direct.term4 != combo.term4 {
        return Err(Error::Inconsistent(format!(
            "trace_new({n}, {k}, {N}): exact terms disagree between routes"
        )));
    }
    let tol = 1e-9 * (1.0 + direct.term2.abs());
    if (direct.term2 - combo.term2).abs() > tol {
        return Err(Error::Inconsistent(format!(
            "trace_new({n}, {k}, {N}): term2 {} vs {}",
            direct.term2, combo.term2
        )));
    }
    Ok(direct)
}

/// Precomputed data for evaluating the normalized trace at many weights for a
/// fixed (n, N): the D_N(t, n) coefficients are computed once and shared.
#[derive(Debug, Clone)]
pub struct TraceKernel {
    pub n: u64,
    pub level: u64,
    pub kind: TraceKind,
    elliptic: Vec<(i64, f64, f64)>,
    /// Coefficient of (k − 1)/√n in the identity term.
    identity: f64,
    /// (d/√n, weight) with term3(k) = Σ weight·(d/√n)^{k−1}.
    hyperbolic: Vec<(f64, f64)>,
    /// Weight-two term.
    weight_two: f64,
}

impl TraceKernel {
    #[allow(non_snake_case)]
    pub fn new(n: u64, N: u64, kind: TraceKind) -> Result<Self> {
        check_common(n, 2, N)?;
        if kind == TraceKind::New {
            check_squarefree(N)?;
        }
        let fl = fac(N);
        let sqrt_n = (n as f64).sqrt();
        let square = is_square(n);
        let (identity, with_hyperbolic, weight_two) = match kind {
            TraceKind::Full => (nu_index(&fl) as f64, true, sigma1(&fac(n)) as f64),
            TraceKind::New => (euler_phi(&fl) as f64, N == 1, (mobius(&fl) * sigma1(&fac(n)) as i64) as f64),
        };
        let mut hyperbolic = Vec::new();
        if with_hyperbolic {
            for d in fac(n).divisors() {
                if d * d > n {
                    break;
                }
                let mut w = -(a3_inner(N, (n / d) as i64 - d as i64) as f64);
                if d * d == n {
                    w *= 0.5;
                }
                hyperbolic.push((d as f64 / sqrt_n, w));
            }
        }
        Ok(TraceKernel {
            n,
            level: N,
            kind,
            elliptic: elliptic_terms(n, N, kind),
            identity: if square { identity / 12.0 / sqrt_n } else { 0.0 },
            hyperbolic,
            weight_two: weight_two / sqrt_n,
        })
    }

    pub fn term2(&self, k: u32) -> f64 {
        term2_from(&self.elliptic, k)
    }

    pub fn term1(&self, k: u32) -> f64 {
        (k - 1) as f64 * self.identity
    }

    pub fn term3(&self, k: u32) -> f64 {
        self.hyperbolic.iter().map(|&(r, w)| w * r.powi(k as i32 - 1)).sum()
    }

    pub fn term4(&self, k: u32) -> f64 {
        if k == 2 {
            self.weight_two
        } else {
            0.0
        }
    }

    pub fn total(&self, k: u32) -> f64 {
        self.term1(k) + self.term2(k) + self.term3(k) + self.term4(k)
    }

    /// Upper bound on |term2(k)| uniform in k.
    pub fn term2_envelope(&self) -> f64 {
        self.elliptic.iter().map(|&(_, _, w)| w.abs()).sum()
    }

    /// Σ_{t² < 4n} D(t, n)², from the paired elliptic weights.
    pub fn d_square_sum(&self) -> f64 {
        // The paired weight is 2D at t = 0 and 4D otherwise, covering ±t.
        self.elliptic
            .iter()
            .map(|&(t, _, w)| if t == 0 { w * w / 4.0 } else { w * w / 8.0 })
            .sum()
    }
}

/// Normalized trace as a float for every even k in `weights`, in order.
pub fn traces_at(kernel: &TraceKernel, weights: &[u32]) -> Vec<f64> {
    weights.par_iter().map(|&k| kernel.total(k)).collect()
}

fn check_window_center(n: u64, spec: &WindowSpec) -> Result<()> {
    let target = 4.0 * PI * (n as f64).sqrt();
    if (spec.K - target).abs() > (n as f64).powf(1.0 / 6.0) {
        return invalid(format!(
            "window: K = {} differs from 4π√n = {target:.3} by more than n^(1/6)",
            spec.K
        ));
    }
    Ok(())
}

/// (1/K^δ) Σ_{k even} ψ((k − K)/K^δ) (−1)^{k/2} Tr T_n*(k, N).
#[allow(non_snake_case)]
pub fn averaged_trace_window(n: u64, N: u64, spec: &WindowSpec) -> Result<f64> {
    check_window_center(n, spec)?;
    let kernel = TraceKernel::new(n, N, TraceKind::New)?;
    Ok(averaged_trace_window_with(&kernel, spec))
}

/// As [`averaged_trace_window`] with a precomputed kernel.
pub fn averaged_trace_window_with(kernel: &TraceKernel, spec: &WindowSpec) -> f64 {
    let terms: Vec<f64> = spec
        .weights()
        .par_iter()
        .map(|&(k, w)| {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            w * sign * kernel.total(k)
        })
        .collect();
    terms.into_iter().collect::<CompensatedSum>().value() / spec.radius
}

/// (μ(N) K / 2π) (σ₁(n)/n) J_K(4π√n).
#[allow(non_snake_case)]
pub fn noweight_main_term(n: u64, N: u64, K: u32) -> Result<f64> {
    check_squarefree(N)?;
    if n == 0 || gcd(n, N) != 1 {
        return invalid("noweight_main_term: need n ≥ 1 coprime to N");
    }
    let x = 4.0 * PI * (n as f64).sqrt();
    if (K as f64 - x).abs() > (n as f64).powf(1.0 / 6.0) + 1.0 {
        return invalid(format!("noweight_main_term: K = {K} outside the admissible band around {x:.3}"));
    }
    let j = bessel_j(K, x)?;
    Ok(mobius(&fac(N)) as f64 * K as f64 / (2.0 * PI) * sigma1(&fac(n)) as f64 / n as f64 * j.value)
}

/// A truncated φ-weighted sum over even k with its certified tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSum {
    pub value: f64,
    /// Terms with k ≥ k_cutoff were discarded.
    pub k_cutoff: u64,
    pub tail_bound: f64,
}

const PHI_TAIL_RELATIVE: f64 = 1e-10;

/// φ((k − 1)/T) for even k = 2, 4, …, below k_end.
fn phi_weights(t_scale: f64, k_end: u64) -> Vec<f64> {
    let count = (k_end / 2).saturating_sub(1) as usize;
    phi_progression(1.0 / t_scale, 2.0 / t_scale, count)
}

/// Σ_{k ≥ 2 even} φ((k−1)/T) f(k) with |f| ≤ envelope, truncated once the tail
/// is below 10⁻¹⁰ of the accumulated sum.
fn phi_weighted_sum(t_scale: f64, envelope: f64, f: impl Fn(u32) -> f64 + Sync) -> WindowSum {
    let evaluate = |k_end: u64| -> f64 {
        let phis = phi_weights(t_scale, k_end);
        let terms: Vec<f64> = phis
            .par_iter()
            .enumerate()
            .map(|(i, &p)| p * f(2 * (i as u32 + 1)))
            .collect();
        terms.into_iter().collect::<CompensatedSum>().value()
    };
    // A first pass over the bulk of φ fixes the scale of the sum.
    let bulk_end = (400.0 * t_scale).ceil() as u64 + 4;
    let bulk = evaluate(bulk_end);
    let target = PHI_TAIL_RELATIVE * bulk.abs().max(f64::MIN_POSITIVE);
    let k_cutoff = phi_k_cutoff(t_scale, envelope, target).max(bulk_end);
    let value = if k_cutoff == bulk_end { bulk } else { evaluate(k_cutoff) };
    WindowSum { value, k_cutoff, tail_bound: phi_tail_bound(t_scale, k_cutoff, envelope) }
}

fn check_variance(n: u64, level: u64, t_scale: f64) -> Result<()> {
    if level <= 1 {
        return invalid("variance: N must exceed 1");
    }
    check_squarefree(level)?;
    if gcd(n, level) != 1 {
        return invalid(format!("variance: gcd({n}, {level}) > 1"));
    }
    if !(t_scale >= (n as f64).sqrt()) {
        return invalid(format!("variance: T = {t_scale} below √n"));
    }
    Ok(())
}

/// Σ_{k > 0 even} φ((k−1)/T) |Tr T_n* − (k−1)/12 φ(N) δ(n, □)/√n|².
#[allow(non_snake_case)]
pub fn variance_window(n: u64, N: u64, T: f64) -> Result<WindowSum> {
    check_variance(n, N, T)?;
    let kernel = TraceKernel::new(n, N, TraceKind::New)?;
    Ok(variance_window_with(&kernel, T))
}

pub fn variance_window_with(kernel: &TraceKernel, t_scale: f64) -> WindowSum {
    let env = kernel.term2_envelope() + kernel.weight_two.abs();
    phi_weighted_sum(t_scale, env * env, |k| {
        // For N > 1 the identity term is exactly what is subtracted.
        let r = kernel.term2(k) + kernel.term3(k) + kernel.term4(k);
        r * r
    })
}

/// 2 Σ_{k ∈ 2ℤ} φ((k−1)/T) Σ_{t² < 4n} D_N(t, n)² − φ(1/T) σ₁(n)²/n.
#[allow(non_snake_case)]
pub fn diagonal_side(n: u64, N: u64, T: f64) -> Result<WindowSum> {
    check_variance(n, N, T)?;
    let kernel = TraceKernel::new(n, N, TraceKind::New)?;
    Ok(diagonal_side_with(&kernel, T))
}

pub fn diagonal_side_with(kernel: &TraceKernel, t_scale: f64) -> WindowSum {
    let one_sided = phi_weighted_sum(t_scale, 1.0, |_| 1.0);
    let d2 = kernel.d_square_sum();
    let s1 = sigma1(&fac(kernel.n)) as f64;
    let phi1 = phi_progression(1.0 / t_scale, 0.0, 1)[0];
    // Σ_{k ∈ 2ℤ} φ((k−1)/T) = 2 Σ_{k ≥ 2} by k ↔ 2 − k.
    WindowSum {
        value: 4.0 * one_sided.value * d2 - phi1 * s1 * s1 / kernel.n as f64,
        k_cutoff: one_sided.k_cutoff,
        tail_bound: 4.0 * one_sided.tail_bound * d2,
    }
}

/// Σ_{k ∈ 2ℤ} φ((k−1)/T) e^{i(k−1)θ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSum {
    pub value: f64,
    pub imaginary_residual: f64,
    pub k_cutoff: u64,
    pub tail_bound: f64,
}

#[allow(non_snake_case)]
pub fn poisson_character_sum(T: f64, theta: f64) -> Result<PoissonSum> {
    Ok(poisson_character_sums(T, &[theta])?.remove(0))
}

/// θ_{t,n} for t² < 4n, kept only at distance ≥ 1/(2√n) from 0 and π.
pub fn band_angles(n: u64) -> Vec<f64> {
    let edge = 1.0 / (2.0 * (n as f64).sqrt());
    let tmax = 2 * isqrt(n) as i64 + 1;
    (-tmax..=tmax)
        .filter_map(|t| AngleData::new(t, n).ok())
        .map(|a| a.theta)
        .filter(|&th| th >= edge && th <= PI - edge)
        .collect()
}

/// poisson_character_sum at several angles sharing one table of φ weights.
#[allow(non_snake_case)]
pub fn poisson_character_sums(T: f64, thetas: &[f64]) -> Result<Vec<PoissonSum>> {
    if !(T >= 1.0) {
        return invalid(format!("poisson_character_sum: need T ≥ 1, got {T}"));
    }
    if let Some(theta) = thetas.iter().find(|&&t| !(t > 0.0 && t < PI)) {
        return invalid(format!("poisson_character_sum: need θ ∈ (0, π), got {theta}"));
    }
    let k_cutoff = phi_k_cutoff(T, 1.0, 1e-15);
    let phis = phi_weights(T, k_cutoff);
    let tail_bound = 2.0 * phi_tail_bound(T, k_cutoff, 1.0);
    Ok(thetas
        .par_iter()
        .map(|&theta| {
            let mut re = CompensatedSum::new();
            let mut im_pos = CompensatedSum::new();
            let mut im_neg = CompensatedSum::new();
            for (i, &p) in phis.iter().enumerate() {
                // k = 2i + 2 and its mirror 2 − k = −2i, with k − 1 = ±(2i + 1).
                let (s, c) = ((2 * i + 1) as f64 * theta).sin_cos();
                re.add(2.0 * p * c);
                im_pos.add(p * s);
                im_neg.add(-p * s);
            }
            PoissonSum { value: re.value(), imaginary_residual: im_pos.value() + im_neg.value(), k_cutoff, tail_bound }
        })
        .collect())
}

/// U_{j}(t, n) with U₀ = 0, U₁ = 1, U_{j+1} = t U_j − n U_{j−1}: the
/// unnormalized elliptic factor (ρ^j − ρ̄^j)/(ρ − ρ̄).
fn lucas_u(t: i64, n: u64, j: u32) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    if j == 0 {
        return a;
    }
    let tb = BigInt::from(t);
    let nb = BigInt::from(n);
    for _ in 1..j {
        let next = &tb * &b - &nb * &a;
        a = b;
        b = next;
    }
    b
}

/// The classical (unnormalized) trace of T_n on S_k(N) or S_k(N)*, an
/// integer, by exact arithmetic throughout.
#[allow(non_snake_case)]
pub fn classical_trace(n: u64, k: u32, N: u64, kind: TraceKind) -> Result<BigInt> {
    check_common(n, k, N)?;
    if kind == TraceKind::New {
        check_squarefree(N)?;
    }
    let fl = fac(N);
    let half = pow_big(n, (k - 2) / 2);
    let mut total = BigRational::zero();
    if is_square(n) {
        let idx = match kind {
            TraceKind::Full => nu_index(&fl),
            TraceKind::New => euler_phi(&fl),
        };
        let root_pow = pow_big(isqrt(n), k - 2);
        total += BigRational::new(BigInt::from((k - 1) as u64 * idx) * root_pow, 12.into());
    }
    let tmax = isqrt(4 * n - 1) as i64;
    let elliptic: BigInt = (-tmax..=tmax)
        .into_par_iter()
        .map(|t| BigInt::from(class_sum6(t, n, N, kind)) * lucas_u(t, n, k - 1))
        .reduce(BigInt::zero, |a, b| a + b);
    total -= BigRational::new(elliptic, 12.into());
    if kind == TraceKind::Full || N == 1 {
        total += a3_coefficient(n, k, N) * BigRational::from_integer(half);
    }
    if k == 2 {
        let s = sigma1(&fac(n)) as i64;
        total += frac(if kind == TraceKind::Full { s } else { mobius(&fl) * s }, 1);
    }
    if !total.is_integer() {
        return Err(Error::Inconsistent(format!("classical trace ({n}, {k}, {N}) = {total} is not integral")));
    }
    Ok(total.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{delta_tau, dim_level_one, genus_X0, level_one_eigenform};

    fn big_to_f64(b: &BigInt) -> f64 {
        b.to_f64().unwrap()
    }

    #[test]
    fn trace_examples() {
        assert!((trace_full(1, 12, 1).unwrap().total - 1.0).abs() < 1e-12);
        assert!(trace_full(1, 10, 1).unwrap().total.abs() < 1e-12);
        let t = trace_full(2, 12, 1).unwrap().total;
        assert!((t + 24.0 / 2f64.powf(5.5)).abs() < 1e-10);
        assert!((t + 0.5303300859).abs() < 1e-9);
        assert!((trace_new(1, 26, 1).unwrap().total - 1.0).abs() < 1e-12);
        assert!(trace_full(2, 12, 4).is_err());
        assert!(trace_new(1, 12, 4).is_err());
        assert!(trace_full(1, 3, 1).is_err());
    }

    #[test]
    fn breakdown_invariants() {
        for (n, k, level) in [(1u64, 12u32, 1u64), (4, 2, 11), (9, 24, 5), (25, 14, 6), (7, 2, 1)] {
            for tr in [trace_full(n, k, level).unwrap(), trace_new(n, k, level).unwrap()] {
                let sum = tr.term1.value() + tr.term2 + tr.term3.value() + tr.term4.value();
                assert!((sum - tr.total).abs() <= 1e-12 * (1.0 + tr.total.abs()));
                if k != 2 {
                    assert!(tr.term4.is_zero());
                }
                if tr.kind == TraceKind::New && level > 1 {
                    assert!(tr.term3.is_zero());
                }
            }
        }
    }

    #[test]
    fn tau_small() {
        let tau = delta_tau(200).unwrap();
        for n in 1..=200u64 {
            let expect = big_to_f64(tau.coeff(n as usize)) / (n as f64).powf(5.5);
            let got = trace_new(n, 12, 1).unwrap().total;
            assert!((got - expect).abs() < 1e-10, "n = {n}: {got} vs {expect}");
        }
    }

    #[test]
    fn other_level_one_weights() {
        for k in [16u32, 18, 22] {
            let f = level_one_eigenform(k, 60).unwrap();
            for n in 1..=60u64 {
                let expect = big_to_f64(f.coeff(n as usize)) / (n as f64).powf((k as f64 - 1.0) / 2.0);
                assert!((trace_new(n, k, 1).unwrap().total - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dimensions() {
        for k in (4..=40u32).step_by(2) {
            let d = trace_full(1, k, 1).unwrap().total;
            assert!((d - dim_level_one(k).unwrap() as f64).abs() < 1e-9, "k = {k}");
        }
        for (level, dim) in [(11u64, 1.0), (15, 1.0), (23, 2.0)] {
            assert!((trace_new(1, 2, level).unwrap().total - dim).abs() < 1e-9);
        }
        for level in [2u64, 3, 5, 6, 7, 10, 11, 13, 14, 15, 21, 22, 23, 30, 37] {
            let g = genus_X0(level).unwrap() as f64;
            assert!((trace_full(1, 2, level).unwrap().total - g).abs() < 1e-9, "N = {level}");
        }
    }

    #[test]
    fn new_dimension_trend() {
        for level in [2u64, 3, 5, 6, 7] {
            let phi = euler_phi(&fac(level)) as f64;
            for k in [100u32, 200, 400] {
                let dim = trace_new(1, k, level).unwrap().total;
                assert!((dim - (k as f64 - 1.0) / 12.0 * phi).abs() < 3.0 * level as f64);
                assert!((dim - dim.round()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn dual_route_and_deligne() {
        for level in [1u64, 2, 3, 5, 6, 7, 10, 15] {
            for k in (2..=60u32).step_by(6) {
                let dim = trace_new(1, k, level).unwrap().total.round();
                for n in (1..=500u64).step_by(37) {
                    if gcd(n, level) != 1 {
                        continue;
                    }
                    // trace_new itself raises on route disagreement.
                    let tr = trace_new(n, k, level).unwrap();
                    let bound = sigma0(&fac(n)) as f64 * dim + 1.0;
                    assert!(tr.total.abs() <= bound, "({n},{k},{level}) {} > {bound}", tr.total);
                }
            }
        }
    }

    #[test]
    fn classical_matches_normalized() {
        for (n, k, level) in [(2u64, 12u32, 1u64), (3, 24, 1), (7, 14, 5), (9, 12, 2), (5, 2, 11), (13, 30, 6)] {
            for kind in [TraceKind::Full, TraceKind::New] {
                let c = big_to_f64(&classical_trace(n, k, level, kind).unwrap());
                let t = match kind {
                    TraceKind::Full => trace_full(n, k, level).unwrap().total,
                    TraceKind::New => trace_new(n, k, level).unwrap().total,
                };
                let scale = (n as f64).powf((k as f64 - 1.0) / 2.0);
                assert!((c / scale - t).abs() < 1e-9, "({n},{k},{level},{kind:?})");
            }
        }
        let tau = delta_tau(30).unwrap();
        for n in 1..=30u64 {
            assert_eq!(classical_trace(n, 12, 1, TraceKind::New).unwrap(), *tau.coeff(n as usize));
        }
    }

    #[test]
    fn kernel_matches_breakdown() {
        for (n, level) in [(15u64, 2u64), (105, 1), (49, 6), (2280, 1)] {
            for kind in [TraceKind::Full, TraceKind::New] {
                let kernel = TraceKernel::new(n, level, kind).unwrap();
                for k in [2u32, 4, 12, 38, 120] {
                    let exact = match kind {
                        TraceKind::Full => trace_full(n, k, level).unwrap(),
                        TraceKind::New => trace_new(n, k, level).unwrap(),
                    };
                    assert!((kernel.total(k) - exact.total).abs() < 1e-9 * (1.0 + exact.total.abs()));
                }
            }
        }
    }

    #[test]
    fn angle_invariants() {
        for n in 1..=10_000u64 {
            let tmax = isqrt(4 * n - 1) as i64;
            let mut prev: Option<AngleData> = None;
            for t in -tmax..=tmax {
                let a = AngleData::new(t, n).unwrap();
                let sn = (n as f64).sqrt();
                let re = sn * a.theta.cos() - t as f64 / 2.0;
                let im = sn * a.theta.sin() - ((4 * n) as f64 - (t * t) as f64).sqrt() / 2.0;
                assert!(re.abs() < 1e-12 * (1.0 + sn) && im.abs() < 1e-12 * (1.0 + sn));
                assert!(a.theta.sin() >= 1.0 / (2.0 * sn) - 1e-15);
                if let Some(p) = prev {
                    if (t * t) as u64 <= 4 * n {
                        assert!(p.theta - a.theta >= 1.0 / (2.0 * sn) - 1e-12, "n={n} t={t}");
                    }
                }
                prev = Some(a);
            }
        }
        assert!(AngleData::new(2, 1).is_err());
    }

    #[test]
    fn d_coefficient_examples() {
        let d = d_coefficient(1, 1, 1).unwrap();
        assert!((d - 1.0 / (2.0 * 3f64.sqrt()) / 3.0).abs() < 1e-15);
        assert!((d - 0.09623).abs() < 1e-5);
        for (n, level) in [(15u64, 2u64), (27, 5), (105, 1)] {
            let tmax = isqrt(4 * n - 1) as i64;
            for t in 1..=tmax {
                let a = d_coefficient_signed(t, n, level).unwrap();
                let b = d_coefficient_signed(-t, n, level).unwrap();
                assert_eq!(a, -b);
                assert_eq!(d_coefficient(t, n, level).unwrap(), d_coefficient(-t, n, level).unwrap());
            }
        }
        // B₂ = −2 Σ_t D(t) sin((k−1)θ_t).
        let (n, level, k) = (27u64, 5u64, 18u32);
        let tmax = isqrt(4 * n - 1) as i64;
        let via_d: f64 = (-tmax..=tmax)
            .map(|t| -2.0 * d_coefficient(t, n, level).unwrap() * sin_odd_multiple(k, AngleData::new(t, n).unwrap().theta))
            .sum();
        assert!((via_d - trace_new(n, k, level).unwrap().term2).abs() < 1e-12);
        let kernel = TraceKernel::new(n, level, TraceKind::New).unwrap();
        let d2: f64 = (-tmax..=tmax).map(|t| d_coefficient(t, n, level).unwrap().powi(2)).sum();
        assert!((kernel.d_square_sum() - d2).abs() < 1e-12 * d2);
    }

    #[test]
    fn mu_tilde_properties() {
        assert_eq!(mu_classical(3, 1, 7, 1), 1);
        for level in [2u64, 3, 5, 6, 15] {
            let fl = fac(level);
            let envelope: i64 = fl
                .divisors()
                .into_iter()
                .map(|d| (sigma0(&fac(level / d)) * nu_index(&fac(d)) * d * d) as i64)
                .sum();
            for n in (1..200u64).step_by(2) {
                if gcd(n, level) != 1 {
                    continue;
                }
                let tmax = isqrt(4 * n - 1) as i64;
                for t in -tmax..=tmax {
                    for (f, _) in conductors(t, n) {
                        assert!(mu_tilde(t, f, n, level).unwrap().abs() <= envelope);
                    }
                }
                if let Some(n0) = crate::class_numbers::admissible_n0(level, n) {
                    let expect = sigma0(&fl) as i64 * mobius(&fl);
                    for t in -tmax..=tmax {
                        if (t - n0).rem_euclid(2 * level as i64) == 0 {
                            for (f, _) in conductors(t, n) {
                                assert_eq!(mu_tilde(t, f, n, level).unwrap(), expect, "N={level} n={n} t={t}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn poisson_sums_vanish() {
        let p = poisson_character_sum(100.0, PI / 2.0).unwrap();
        assert!(p.value.abs() <= 1e-9 && p.imaginary_residual.abs() <= 1e-9);
        let p = poisson_character_sum(50.0, 0.07).unwrap();
        assert!(p.value.abs() <= 1e-9);
        let near = poisson_character_sum(50.0, 1e-4).unwrap();
        let mass = 2.0 * phi_weights(50.0, near.k_cutoff).iter().sum::<f64>();
        assert!(near.value > 0.9 * mass);
    }

    #[test]
    fn window_examples() {
        let n = 2280u64;
        let kc = (4.0 * PI * (n as f64).sqrt()).floor();
        let spec = WindowSpec::new(kc, 0.25).unwrap();
        for (k, _) in spec.weights() {
            assert!((k as f64 - kc).abs() < spec.radius);
        }
        let kernel = TraceKernel::new(n, 1, TraceKind::New).unwrap();
        let a = averaged_trace_window(n, 1, &spec).unwrap();
        assert_eq!(a, averaged_trace_window_with(&kernel, &spec));
        assert!(WindowSpec::new(kc, 0.4).is_err());
        assert!(averaged_trace_window(n, 1, &WindowSpec::new(kc + 20.0, 0.25).unwrap()).is_err());
        let main = noweight_main_term(n, 1, kc as u32).unwrap();
        let ratio = a / main;
        assert!(ratio > 0.5 && ratio < 1.5, "ratio {ratio}");
    }

    #[test]
    fn variance_against_diagonal() {
        for (n, level) in [(15u64, 2u64), (27, 5)] {
            let t = 2.0 * (n as f64).sqrt().ceil();
            let v = variance_window(n, level, t).unwrap();
            let d = diagonal_side(n, level, t).unwrap();
            assert!(v.tail_bound <= 1e-9 * v.value.abs());
            assert!((v.value - d.value).abs() <= 10.0 * (n as f64).powf(0.6), "{} vs {}", v.value, d.value);
        }
        assert!(variance_window(15, 1, 10.0).is_err());
    }
}
