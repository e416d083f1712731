//! Bessel functions J_ν(x) of integer order with a-posteriori error bounds.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use crate::error::{invalid, Result};
use crate::numeric::CompensatedSum;

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BesselMethod {
    Series,
    Quadrature,
    /// Hankel expansion for J₀, J₁ followed by forward recurrence; only used
    /// in the oscillatory regime x ≥ 1.02·order.
    Recurrence,
}

impl BesselMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BesselMethod::Series => "series",
            BesselMethod::Quadrature => "quadrature",
            BesselMethod::Recurrence => "recurrence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: u32,
    pub argument: f64,
    pub value: f64,
    pub abs_error_bound: f64,
    pub method: BesselMethod,
}

pub const MAX_ORDER: u32 = 100_000;
const RECURRENCE_MIN_RATIO: f64 = 1.02;
const CONTOUR_MAX_RATIO: f64 = 0.999;
pub const MAX_ARGUMENT: f64 = 1.0e6;

/// J_order(x) by periodic trapezoidal quadrature of the Bessel integral,
/// with a power-series path for small arguments.
pub fn bessel_j(order: u32, x: f64) -> Result<BesselEval> {
    if order > MAX_ORDER {
        return invalid(format!("bessel_j: order {order} exceeds {MAX_ORDER}"));
    }
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return invalid(format!("bessel_j: argument {x} outside [0, {MAX_ARGUMENT}]"));
    }
    Ok(eval_certified(order, x))
}

fn eval_certified(order: u32, x: f64) -> BesselEval {
    if x == 0.0 {
        return BesselEval {
            order,
            argument: x,
            value: if order == 0 { 1.0 } else { 0.0 },
            abs_error_bound: 0.0,
            method: BesselMethod::Series,
        };
    }
    if x <= 30.0 {
        if let Some(ev) = series(order, x) {
            return ev;
        }
    }
    let nu = order as f64;
    if x >= 40.0 && x >= RECURRENCE_MIN_RATIO * nu {
        return recurrence(order, x);
    }
    if order >= 20 && x < CONTOUR_MAX_RATIO * nu {
        if let Some(ev) = contour(order, x) {
            return ev;
        }
    }
    quadrature(order, x, node_count(order, x))
}

/// Same evaluation as [`bessel_j`] without the argument cap, for sweeps whose
/// arguments run far into the oscillatory regime.
pub fn bessel_j_fast(order: u32, x: f64) -> BesselEval {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j_fast: bad argument {x}");
    eval_certified(order, x)
}

/// M = 2·⌈x + order⌉ + 64.
pub fn node_count(order: u32, x: f64) -> usize {
    2 * (x + order as f64).ceil() as usize + 64
}

fn series(order: u32, x: f64) -> Option<BesselEval> {
    let nu = order as f64;
    let h = 0.5 * x;
    let h2 = h * h;
    // Leading term (x/2)^ν / ν! in log space.
    let log_t0 = nu * h.ln() - libm::lgamma(nu + 1.0);
    let mut term = log_t0.exp();
    let mut sum = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut j = 0u32;
    loop {
        sum.add(term);
        abs_sum += term.abs();
        max_term = max_term.max(term.abs());
        j += 1;
        let ratio = -h2 / (j as f64 * (j as f64 + nu));
        let next = term * ratio;
        // Alternating with decreasing magnitude: the first omitted term bounds the tail.
        if ratio.abs() < 1.0 && next.abs() <= 1e-17 * abs_sum.max(1e-300) {
            let bound = next.abs() + 4.0 * EPS * abs_sum + EPS * (j as f64) * max_term;
            if bound > 1e-13 {
                return None;
            }
            return Some(BesselEval {
                order,
                argument: x,
                value: sum.value(),
                abs_error_bound: bound,
                method: BesselMethod::Series,
            });
        }
        if j > 500 {
            return None;
        }
        term = next;
    }
}

/// (1/M) Σ_j cos(order·τ_j − x sin τ_j), τ_j = 2πj/M, folded by τ ↦ 2π − τ.
pub(crate) fn quadrature(order: u32, x: f64, m: usize) -> BesselEval {
    let m = m + (m % 2);
    let mm = m as u64;
    let nu = order as u64;
    let mut acc = CompensatedSum::new();
    acc.add(0.5);
    acc.add(0.5 * if order % 2 == 0 { 1.0 } else { -1.0 });
    // Σ|sin φ_j| weights the per-node phase errors in the first-order error term.
    let mut sin_mass = 1.0;
    for j in 1..(m / 2) as u64 {
        let phase = TAU * ((nu * j) % mm) as f64 / m as f64;
        let (s, c) = x.mul_add(-sincos_2pi_frac(j, mm).0, phase).sin_cos();
        acc.add(c);
        sin_mass += 2.0 * s.abs();
    }
    let value = 2.0 * acc.value() / m as f64;
    // Phase error per node: x·|δ sin τ_j| (≤ 2.2ε) plus rounding of the fused
    // multiply-add and of the reduced phase.
    let phase_err = 2.2 * EPS * x + 0.5 * EPS * (x + TAU) + 2.0 * EPS;
    let weight = sin_mass / m as f64;
    let rounding = phase_err * weight + 0.5 * phase_err * phase_err + 4.0 * EPS;
    let bound = alias_bound(order, x, m) + rounding;
    BesselEval {
        order,
        argument: x,
        value: value.clamp(-1.0, 1.0),
        abs_error_bound: bound,
        method: BesselMethod::Quadrature,
    }
}

/// (sin, cos) of 2π j / m with the argument reduced to the first octant exactly.
fn sincos_2pi_frac(j: u64, m: u64) -> (f64, f64) {
    // Work in units of 1/(8m) of a full turn.
    let r = (8 * j) % (8 * m);
    let quarter = 2 * m;
    let (q, rem) = (r / quarter, r % quarter);
    let ang = |num: u64| TAU * num as f64 / (8 * m) as f64;
    let s = if rem <= m {
        ang(rem).sin()
    } else {
        ang(quarter - rem).cos()
    };
    let c = if rem <= m {
        ang(rem).cos()
    } else {
        ang(quarter - rem).sin()
    };
    match q {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Σ_{r≥1} |J_{order+rM}(x)| + |J_{rM−order}(x)| via |J_μ(x)| ≤ (x/2)^μ / Γ(μ+1).
fn alias_bound(order: u32, x: f64, m: usize) -> f64 {
    let mut total = 0.0;
    for r in 1..=64u64 {
        for mu in [r as f64 * m as f64 + order as f64, r as f64 * m as f64 - order as f64] {
            if mu <= 0.0 {
                total += 1.0;
                continue;
            }
            total += (mu * (0.5 * x).ln() - libm::lgamma(mu + 1.0)).exp();
        }
        if total > 0.0 && (r as f64 * m as f64 - order as f64) > 4.0 * x + 64.0 {
            break;
        }
    }
    total
}

/// Hankel asymptotic expansion of J₀ and J₁, valid for x ≥ 25.
fn hankel_j01(x: f64) -> (f64, f64, f64) {
    let (sx, cx) = x.sin_cos();
    let mut out = [0.0; 2];
    let mut err: f64 = 0.0;
    for (nu, slot) in out.iter_mut().enumerate() {
        let mu = 4.0 * (nu * nu) as f64;
        let (mut p, mut q) = (0.0f64, 0.0f64);
        let mut a: f64 = 1.0; // a_k(ν) / x^k
        let mut k = 0u32;
        let mut last = f64::INFINITY;
        loop {
            let contrib = a;
            if contrib.abs() > last {
                break;
            }
            match k % 4 {
                0 => p += contrib,
                1 => q += contrib,
                2 => p -= contrib,
                _ => q -= contrib,
            }
            last = contrib.abs();
            if last < 1e-18 {
                break;
            }
            k += 1;
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        err = err.max(last);
        // cos χ, sin χ with χ = x − (ν/2 + 1/4)π.
        let (cchi, schi) = if nu == 0 {
            ((cx + sx) * FRAC_1_SQRT_2, (sx - cx) * FRAC_1_SQRT_2)
        } else {
            ((sx - cx) * FRAC_1_SQRT_2, (-sx - cx) * FRAC_1_SQRT_2)
        };
        *slot = (2.0 / (PI * x)).sqrt() * (p * cchi - q * schi);
    }
    (out[0], out[1], err * (2.0 / (PI * x)).sqrt() + 4.0 * EPS)
}

/// |J_μ(x)| ≤ exp(μ(√(1−z²) + ln z − ln(1 + √(1−z²)))), z = x/μ ≤ 1, as a log.
pub fn log_kapteyn_bound(mu: f64, x: f64) -> f64 {
    let z = x / mu;
    let s = (1.0 - z * z).max(0.0).sqrt();
    mu * (s + z.ln() - s.ln_1p())
}

/// Trapezoid rule for (1/2π)∫ e^{i(ντ − x sin τ)} dτ on the line Im τ = β with
/// cosh β = ν/x, where the integrand no longer oscillates near the saddle.
///
/// The M-point rule equals Σ_r J_{ν−rM}(x) e^{−rMβ} exactly, which gives the
/// aliasing bound.
fn contour(order: u32, x: f64) -> Option<BesselEval> {
    let nu = order as f64;
    let beta = (nu / x).acosh();
    let (sh, ch) = (beta.sinh(), beta.cosh());
    let alias = |m: usize| -> f64 {
        let mf = m as f64;
        let mut total = 0.0;
        for r in 1..=64u32 {
            let rf = r as f64;
            // r > 0 terms: |J_{ν−rM}| ≤ 1.
            total += (-rf * mf * beta).exp();
            let mu = nu + rf * mf;
            total += (rf * mf * beta + log_kapteyn_bound(mu, x)).exp();
        }
        total
    };
    let mut m = ((45.0 / beta).ceil() as usize).max(64);
    m += m % 2;
    let limit = node_count(order, x);
    let mut alias_err = alias(m);
    while alias_err > 1e-17 {
        m *= 2;
        if m >= limit {
            return None;
        }
        alias_err = alias(m);
    }
    let mm = m as u64;
    let nu_u = order as u64;
    let log_peak = x * sh - nu * beta;
    // Fold θ ↦ 2π − θ: the imaginary parts cancel.
    let node = |j: u64| -> f64 {
        let (s, c) = sincos_2pi_frac(j, mm);
        let phase = TAU * ((nu_u * j) % mm) as f64 / m as f64;
        (x * sh * c - nu * beta).exp() * (x * ch).mul_add(-s, phase).cos()
    };
    let mut acc = CompensatedSum::new();
    acc.add(0.5 * node(0));
    acc.add(0.5 * node(mm / 2));
    for j in 1..mm / 2 {
        acc.add(node(j));
    }
    let value = 2.0 * acc.value() / m as f64;
    let peak = log_peak.exp();
    let phase_err = 2.2 * EPS * x * ch + 0.5 * EPS * (x * ch + TAU) + 2.0 * EPS;
    let exp_err = EPS * (x * sh + nu * beta + 4.0);
    let bound = alias_err + peak * (phase_err + exp_err + 4.0 * EPS);
    Some(BesselEval {
        order,
        argument: x,
        value,
        abs_error_bound: bound,
        method: BesselMethod::Quadrature,
    })
}

fn recurrence(order: u32, x: f64) -> BesselEval {
    let (j0, j1, e0) = hankel_j01(x);
    let (mut prev, mut cur) = (j0, j1);
    if order == 0 {
        cur = j0;
    }
    for m in 1..order {
        let next = (2.0 * m as f64 / x) * cur - prev;
        prev = cur;
        cur = next;
    }
    let nu = order as f64;
    // J_m² + Y_m² ≤ 2/(π√(x² − m²)) along the path; with the Casoratian
    // 2/(πx) this caps the discrete Green's function by G = 2x/√(x² − ν²),
    // so each step's rounding reaches the output amplified at most that much.
    let amp = (2.0 / (PI * (x * x - nu * nu).sqrt())).sqrt();
    let green = 2.0 * x / (x * x - nu * nu).sqrt();
    let bound = green * (0.9 * e0 + 6.0 * EPS * (nu + 2.0) * amp);
    BesselEval {
        order,
        argument: x,
        value: cur,
        abs_error_bound: bound,
        method: BesselMethod::Recurrence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_oracle(order: u32, x: f64) -> f64 {
        // Plain power series, adequate for small arguments.
        let mut t = (0.5 * x).powi(order as i32) / (1..=order).map(f64::from).product::<f64>();
        let mut s = 0.0;
        for j in 0..60 {
            s += t;
            t *= -(0.25 * x * x) / ((j + 1) as f64 * (j + 1 + order) as f64);
        }
        s
    }

    #[test]
    fn examples() {
        let e = bessel_j(0, 0.0).unwrap();
        assert_eq!(e.value, 1.0);
        let e = bessel_j(1, 1.0).unwrap();
        assert!((e.value - 0.4400505857449335).abs() < 1e-14);
        assert!((e.value - series_oracle(1, 1.0)).abs() < 1e-14);
        let e = bessel_j(1000, 1000.0).unwrap();
        assert!((e.value - 0.044_730_672_947_964_04).abs() < 1e-13, "{}", e.value);
        assert!(e.abs_error_bound < 1e-12);
        assert!(bessel_j(100_001, 1.0).is_err());
        assert!(bessel_j(1, -1.0).is_err());
        assert!(bessel_j(1, 2.0e6).is_err());
    }

    #[test]
    fn series_and_quadrature_agree() {
        for order in [0u32, 1, 2, 5, 11, 20] {
            for x in [0.1, 0.5, 1.0, 3.0, 7.5, 12.0, 25.0, 29.0] {
                let q = quadrature(order, x, node_count(order, x));
                let e = eval_certified(order, x);
                assert!((q.value - e.value).abs() < 1e-13, "J_{order}({x})");
                if x < 8.0 {
                    assert!((series_oracle(order, x) - q.value).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn doubling_test() {
        for &(order, x) in &[(10u32, 37.0), (500, 480.0), (4000, 4100.0), (99_999, 120_000.0), (3, 900.0)] {
            let a = quadrature(order, x, node_count(order, x));
            let b = quadrature(order, x, 2 * node_count(order, x));
            assert!((a.value - b.value).abs() <= a.abs_error_bound, "J_{order}({x})");
            assert!(a.abs_error_bound <= 1e-10);
        }
    }

    #[test]
    fn bound_envelope_over_precondition() {
        for &order in &[10u32, 1000, 20_000, 100_000] {
            for frac in [0.1, 0.5, 0.9, 1.0, 1.1, 1.5, 3.0, 4.0] {
                let e = bessel_j(order, frac * order as f64).unwrap();
                assert!(e.abs_error_bound <= 1e-10, "J_{order}({})", frac * order as f64);
                assert!(e.value.abs() <= 1.0);
            }
        }
    }

    #[test]
    fn recurrence_matches_quadrature() {
        for &(order, x) in &[
            (0u32, 40.0),
            (1, 55.5),
            (11, 400.0),
            (999, 1300.0),
            (3999, 5100.0),
            (3999, 40_000.0),
            (3999, 400_000.0),
            (1999, 2500.0),
        ] {
            let r = recurrence(order, x);
            let q = quadrature(order, x, node_count(order, x));
            let diff = (r.value - q.value).abs();
            assert!(diff <= r.abs_error_bound + q.abs_error_bound, "J_{order}({x}): {diff:e} vs {:e}", r.abs_error_bound);
        }
    }

    #[test]
    fn contour_matches_quadrature() {
        for &(order, x) in &[
            (20u32, 5.0),
            (20, 19.9),
            (99, 70.0),
            (499, 350.0),
            (499, 498.0),
            (999, 990.0),
            (3999, 2800.0),
            (3999, 3990.0),
            (3999, 3998.9),
            (3999, 3000.0),
            (20_000, 19_900.0),
        ] {
            let c = contour(order, x).unwrap();
            let q = quadrature(order, x, node_count(order, x));
            let diff = (c.value - q.value).abs();
            assert!(diff <= c.abs_error_bound + q.abs_error_bound, "J_{order}({x}): {diff:e}");
            assert!(c.abs_error_bound <= 1e-10);
            if x > 30.0 && x < CONTOUR_MAX_RATIO * order as f64 {
                assert_eq!(eval_certified(order, x).value, c.value);
            }
        }
    }

    #[test]
    fn recurrence_near_turning_point() {
        for &(order, x) in &[(499u32, 510.0), (999, 1020.0), (3999, 4080.0), (3999, 4500.0)] {
            let r = recurrence(order, x);
            let q = quadrature(order, x, node_count(order, x));
            assert!((r.value - q.value).abs() <= r.abs_error_bound + q.abs_error_bound, "J_{order}({x})");
            assert!(r.abs_error_bound <= 1e-10);
        }
    }

    #[test]
    fn wronskian_style_identity() {
        // J_{ν−1}(x) + J_{ν+1}(x) = (2ν/x) J_ν(x).
        for &(nu, x) in &[(50u32, 60.0), (300, 250.0), (2000, 2050.0)] {
            let a = bessel_j(nu - 1, x).unwrap().value;
            let b = bessel_j(nu + 1, x).unwrap().value;
            let c = bessel_j(nu, x).unwrap().value;
            assert!((a + b - 2.0 * nu as f64 / x * c).abs() < 1e-12);
        }
    }
}
