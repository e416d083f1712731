//! The bump ψ and the band-limited weight φ used in the averaging arguments.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use super::quad::integrate;

/// Half-width of the seed bump g; φ̂ = g⋆g is supported in [−2a, 2a].
pub const PHI_SEED_HALFWIDTH: f64 = 1.0 / 200.0;

/// Trapezoid nodes per unit length of the bump variable for ǧ.
const PHI_HALF_NODES: usize = 1024;

fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn psi_norm() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let q = integrate(bump, -1.0, 1.0, 1e-16, 1e-15, 1000).expect("bump integral converges");
        1.0 / q.value
    })
}

/// ψ(t) = c·exp(−1/(1−t²)) on (−1, 1), normalized to unit mass.
pub fn psi_eval(t: f64) -> f64 {
    psi_norm() * bump(t)
}

/// Normalization constant c of ψ.
pub fn psi_constant() -> f64 {
    psi_norm()
}

/// Trapezoid nodes u_j ∈ [0, 1) with weights for ∫_{−1}^{1} ψ(u) cos(ω u) du.
fn phi_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| {
        let h = 1.0 / PHI_HALF_NODES as f64;
        let mut u = Vec::with_capacity(PHI_HALF_NODES);
        let mut w = Vec::with_capacity(PHI_HALF_NODES);
        for j in 0..PHI_HALF_NODES {
            let x = j as f64 * h;
            u.push(x);
            let fold = if j == 0 { 1.0 } else { 2.0 };
            w.push(fold * h * psi_eval(x));
        }
        (u, w)
    })
}

/// ǧ(x) = ∫ g(ξ) e(xξ) dξ with g(ξ) = ψ(ξ/a)/a, so ǧ(0) = 1.
pub fn g_check(x: f64) -> f64 {
    let (u, w) = phi_nodes();
    let omega = TAU * PHI_SEED_HALFWIDTH * x;
    u.iter()
        .zip(w)
        .map(|(&uj, &wj)| wj * (omega * uj).cos())
        .sum()
}

/// φ(x) = ǧ(x)²: non-negative, even, rapidly decaying, with φ̂ supported in
/// [−1/100, 1/100].
pub fn phi_eval(x: f64) -> f64 {
    let g = g_check(x);
    g * g
}

/// φ̂(ξ) = (g⋆g)(ξ) by direct convolution quadrature.
pub fn phi_hat_eval(xi: f64) -> f64 {
    let a = PHI_SEED_HALFWIDTH;
    let lo = (-a).max(xi - a);
    let hi = a.min(xi + a);
    if lo >= hi {
        return 0.0;
    }
    let g = |eta: f64| psi_eval(eta / a) / a;
    integrate(|eta| g(eta) * g(xi - eta), lo, hi, 1e-14, 1e-13, 4000)
        .map(|q| q.value)
        .unwrap_or(f64::NAN)
}

/// φ on the arithmetic progression x₀ + jΔ, j = 0..count, by phasor rotation
/// with periodic exact re-seeding.
pub fn phi_progression(x0: f64, step: f64, count: usize) -> Vec<f64> {
    const RESEED: usize = 256;
    let (u, w) = phi_nodes();
    let omega: Vec<f64> = u.iter().map(|&uj| TAU * PHI_SEED_HALFWIDTH * uj).collect();
    let rot: Vec<(f64, f64)> = omega.iter().map(|&o| ((o * step).cos(), (o * step).sin())).collect();
    let mut z: Vec<(f64, f64)> = vec![(0.0, 0.0); u.len()];
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        if j % RESEED == 0 {
            let x = x0 + j as f64 * step;
            for (zi, &o) in z.iter_mut().zip(&omega) {
                let (s, c) = (o * x).sin_cos();
                *zi = (c, s);
            }
        }
        let mut g = 0.0;
        for ((zi, &wi), &(rc, rs)) in z.iter_mut().zip(w).zip(&rot) {
            g += wi * zi.0;
            *zi = (zi.0 * rc - zi.1 * rs, zi.0 * rs + zi.1 * rc);
        }
        out.push(g * g);
    }
    out
}

/// Coefficients (ascending) of P_p with ψ^{(p)}(t) = ψ(t)·P_p(t)/(1 − t²)^{2p}.
fn psi_derivative_poly(p: u32) -> Vec<f64> {
    let mut poly = vec![1.0];
    for q in 0..p {
        let deriv: Vec<f64> = poly.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
        // P' (1 − t²)² + (4q t (1 − t²) − 2t) P
        let mut next = vec![0.0; poly.len() + 4];
        for (i, &c) in deriv.iter().enumerate() {
            next[i] += c;
            next[i + 2] -= 2.0 * c;
            next[i + 4] += c;
        }
        let q = q as f64;
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] += (4.0 * q - 2.0) * c;
            next[i + 3] -= 4.0 * q * c;
        }
        while next.last() == Some(&0.0) {
            next.pop();
        }
        poly = next;
    }
    poly
}

/// ‖ψ^{(p)}‖₁.
fn psi_derivative_l1(p: u32) -> f64 {
    let poly = psi_derivative_poly(p);
    let f = |t: f64| {
        let s = 1.0 - t * t;
        if s <= 0.0 {
            return 0.0;
        }
        let val = psi_eval(t);
        if val == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for &c in poly.iter().rev() {
            acc = acc * t + c;
        }
        (val * acc / s.powi(2 * p as i32)).abs()
    };
    2.0 * integrate(f, 0.0, 1.0, 1e-300, 1e-9, 20_000)
        .expect("ψ derivative integral converges")
        .value
}

pub const PHI_MAX_ENVELOPE_ORDER: u32 = 16;

/// C with φ(x) ≤ C·|x|^{−order} for all x ≠ 0, for even order in [2, 16].
///
/// Integrating by parts p = order/2 times gives
/// |ǧ(x)| ≤ ‖g^{(p)}‖₁ / (2π|x|)^p with ‖g^{(p)}‖₁ = ‖ψ^{(p)}‖₁ / a^p.
pub fn phi_envelope(order: u32) -> f64 {
    assert!(order >= 2 && order % 2 == 0 && order <= PHI_MAX_ENVELOPE_ORDER);
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (1..=PHI_MAX_ENVELOPE_ORDER / 2)
            .map(|p| {
                let c = psi_derivative_l1(p) / (TAU * PHI_SEED_HALFWIDTH).powi(p as i32);
                // Margin for the quadrature of ‖ψ^{(p)}‖₁.
                let c = 1.001 * c;
                c * c
            })
            .collect()
    });
    table[(order / 2 - 1) as usize]
}

/// C₄ with φ(x) ≤ C₄ x⁻⁴ for all x > 0.
pub fn phi_envelope_c4() -> f64 {
    phi_envelope(4)
}

/// Upper bound on Σ_{k even, k ≥ k0} φ((k−1)/T)·weight, minimized over the
/// available envelopes.
pub fn phi_tail_bound(t: f64, k0: u64, weight: f64) -> f64 {
    let k0 = k0 + k0 % 2;
    if k0 < 4 {
        return f64::INFINITY;
    }
    let x = (k0 - 1) as f64;
    (2..=PHI_MAX_ENVELOPE_ORDER / 2)
        .map(|p| {
            let q = 2.0 * p as f64;
            // Σ_{j ≥ 0} (x + 2j)^{−q} ≤ x^{−q} + x^{1−q}/(2(q − 1)).
            let log_sum = (-q * x.ln()).exp() + (x.ln() * (1.0 - q)).exp() / (2.0 * (q - 1.0));
            phi_envelope(2 * p) * t.powf(q) * log_sum * weight
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest even k₀ with phi_tail_bound(T, k₀, weight) ≤ target.
pub fn phi_k_cutoff(t: f64, weight: f64, target: f64) -> u64 {
    let mut hi = 4u64;
    while phi_tail_bound(t, hi, weight) > target {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 2 {
        let mid = (lo + hi) / 2;
        let mid = mid + mid % 2;
        if phi_tail_bound(t, mid, weight) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_examples() {
        assert_eq!(psi_eval(1.5), 0.0);
        assert_eq!(psi_eval(1.0), 0.0);
        assert!((psi_eval(0.0) - psi_constant() * (-1f64).exp()).abs() < 1e-16);
        let mass = integrate(psi_eval, -1.0, 1.0, 1e-15, 1e-14, 1000).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-10);
        assert!(psi_eval(0.3) >= 0.0 && psi_eval(-0.3) == psi_eval(0.3));
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_hat_eval(0.02), 0.0);
        assert_eq!(phi_hat_eval(-0.0101), 0.0);
        assert!(phi_eval(0.0) > 0.0);
        assert!((phi_eval(0.0) - 1.0).abs() < 1e-12);
        let mut seed = 12345u64;
        for _ in 0..200 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (seed >> 11) as f64 / (1u64 << 53) as f64 * 4000.0;
            assert_eq!(phi_eval(x), phi_eval(-x));
            assert!(phi_eval(x) >= 0.0);
        }
    }

    #[test]
    fn transform_is_band_limited() {
        // φ is band-limited to |ξ| ≤ 1/100, so unit-step sampling is alias-free:
        // Σ_x φ(x) e(−xξ) = φ̂(ξ) for |ξ| < 1/2.
        let samples = phi_progression(0.0, 1.0, 60_000);
        let transform = |xi: f64| {
            let mut s = samples[0];
            for (j, v) in samples.iter().enumerate().skip(1) {
                s += 2.0 * v * (TAU * j as f64 * xi).cos();
            }
            s
        };
        let at0 = transform(0.0);
        assert!((at0 - phi_hat_eval(0.0)).abs() < 1e-9 * at0);
        for xi in [0.0105, 0.012, 0.02, 0.1, 0.3] {
            assert!(transform(xi).abs() < 1e-9 * at0, "ξ = {xi}");
        }
        let inside = transform(0.005);
        assert!((inside - phi_hat_eval(0.005)).abs() < 1e-9 * at0);
    }

    #[test]
    fn progression_matches_direct() {
        let v = phi_progression(0.5, 2.0 / 37.0, 5000);
        for j in [0usize, 1, 255, 256, 1000, 4999] {
            let x = 0.5 + j as f64 * 2.0 / 37.0;
            assert!((v[j] - phi_eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn envelope_dominates_grid() {
        let c4 = phi_envelope_c4();
        for j in 1..4000 {
            let x = j as f64 * 2.5;
            assert!(phi_eval(x) * x.powi(4) <= c4);
        }
        for order in (2..=PHI_MAX_ENVELOPE_ORDER).step_by(2) {
            let c = phi_envelope(order);
            for j in 1..400 {
                let x = j as f64 * 25.0;
                assert!(phi_eval(x) <= c * x.powi(-(order as i32)), "order {order} x {x}");
            }
        }
    }

    #[test]
    fn derivative_polynomials_match_differences() {
        // ψ^{(p)} against central differences of ψ^{(p−1)} at interior points.
        for p in 1..=4u32 {
            let eval = |q: u32, t: f64| {
                let poly = psi_derivative_poly(q);
                let s = 1.0 - t * t;
                let mut acc = 0.0;
                for &c in poly.iter().rev() {
                    acc = acc * t + c;
                }
                psi_eval(t) * acc / s.powi(2 * q as i32)
            };
            for &t in &[-0.5, 0.1, 0.4] {
                let h = 1e-5;
                let fd = (eval(p - 1, t + h) - eval(p - 1, t - h)) / (2.0 * h);
                assert!((fd - eval(p, t)).abs() < 1e-5 * (1.0 + eval(p, t).abs()));
            }
        }
    }

    #[test]
    fn cutoff_controls_tail() {
        let t = 98.0;
        let k0 = phi_k_cutoff(t, 1e4, 1e-8);
        assert!(k0 % 2 == 0);
        assert!(phi_tail_bound(t, k0, 1e4) <= 1e-8);
        assert!(phi_tail_bound(t, k0 - 2, 1e4) > 1e-8);
        let direct: f64 = phi_progression((k0 - 1) as f64 / t, 2.0 / t, 20_000).iter().sum::<f64>() * 1e4;
        assert!(direct <= 1e-8);
    }
}
