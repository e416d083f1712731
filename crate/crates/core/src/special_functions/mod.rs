//! Bessel and Airy functions, the test functions ψ and φ, and adaptive
//! quadrature.

mod airy;
mod bessel;
pub mod quad;
mod testfn;

pub use airy::airy_ai;
pub use bessel::{bessel_j, bessel_j_fast, log_kapteyn_bound, node_count, BesselEval, BesselMethod, MAX_ARGUMENT, MAX_ORDER};
pub use testfn::{
    g_check, phi_envelope, phi_envelope_c4, phi_k_cutoff, phi_tail_bound, phi_eval, phi_hat_eval, phi_progression, psi_constant,
    psi_eval, PHI_SEED_HALFWIDTH,
};

use crate::error::{invalid, Result};

/// 2^{1/3} α^{-1/3} Ai(−2^{1/3} a), the transition-range main term for
/// J_α(α + a α^{1/3}).
pub fn bessel_transition_approx(alpha: f64, a: f64) -> Result<f64> {
    if a.abs() > 2.0 || alpha < 100.0 {
        return invalid(format!("bessel_transition_approx: need |a| ≤ 2, α ≥ 100 (got a={a}, α={alpha})"));
    }
    let c = 2f64.cbrt();
    Ok(c / alpha.cbrt() * airy_ai(-c * a)?)
}

/// (1/K^δ) Σ_{l odd, |l−K| ≤ K^δ} ψ((l−K)/K^δ) J_l(x).
pub fn weighted_bessel_order_sum(k: f64, delta: f64, x: f64) -> Result<f64> {
    if k < 100.0 {
        return invalid(format!("weighted_bessel_order_sum: K = {k} < 100"));
    }
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return invalid(format!("weighted_bessel_order_sum: δ = {delta} outside (0, 1/3)"));
    }
    let w = k.powf(delta);
    let lo = (k - w).ceil() as i64;
    let hi = (k + w).floor() as i64;
    let mut acc = crate::numeric::CompensatedSum::new();
    for l in lo..=hi {
        if l.rem_euclid(2) != 1 {
            continue;
        }
        let weight = psi_eval((l as f64 - k) / w);
        if weight == 0.0 {
            continue;
        }
        acc.add(weight * bessel_j(l as u32, x)?.value);
    }
    Ok(acc.value() / w)
}
