//! Airy function Ai on |x| ≤ 20 from its Maclaurin series.
//!
//! Ai(x) = c₁ f(x) − c₂ g(x) with
//! f = Σ 3^k (1/3)_k x^{3k}/(3k)!, g = Σ 3^k (2/3)_k x^{3k+1}/(3k+1)!.
//! The two series cancel catastrophically for |x| ≳ 5, so they are summed in
//! binary fixed point with enough guard bits to absorb the cancellation.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{invalid, Result};

const FRAC_BITS: u64 = 320;
/// Ai(0) = 3^{-2/3}/Γ(2/3).
const AI0: &str = "0.35502805388781723926006318600418317639797917419917724058332651030081004245012671295717424605404027168842044873";
/// −Ai'(0) = 3^{-1/3}/Γ(1/3).
const AIP0: &str = "0.25881940379280679840518356018920396347909113835493458221000181385610277267679028065419640582727538431337119321";

fn decimal_to_fixed(s: &str) -> BigInt {
    let digits = s.trim_start_matches("0.");
    let num: BigInt = digits.parse().expect("decimal literal");
    let den = BigInt::from(10u32).pow(digits.len() as u32);
    (num << FRAC_BITS) / den
}

fn f64_to_fixed(x: f64) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let mut v = BigInt::from(mant);
    let shift = e + FRAC_BITS as i64;
    v = if shift >= 0 { v << shift as u64 } else { v >> (-shift) as u64 };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    // Keep 64 significant bits before the conversion.
    let bits = v.bits();
    if bits <= 64 {
        return v.to_f64().unwrap() / 2f64.powi(FRAC_BITS as i32);
    }
    let drop = bits - 64;
    let top = (v >> drop).to_f64().unwrap();
    top * 2f64.powi(drop as i32 - FRAC_BITS as i32)
}

pub fn airy_ai(x: f64) -> Result<f64> {
    if !(-20.0..=20.0).contains(&x) {
        return invalid(format!("airy_ai: |x| = {} exceeds 20", x.abs()));
    }
    let xf = f64_to_fixed(x);
    let x3 = (&xf * &xf * &xf) >> (2 * FRAC_BITS);
    let one = BigInt::from(1u8) << FRAC_BITS;
    let mut f = BigInt::zero();
    let mut g = BigInt::zero();
    let mut tf = one;
    let mut tg = xf;
    let mut k: u64 = 0;
    while !(tf.is_zero() && tg.is_zero()) {
        f += &tf;
        g += &tg;
        tf = ((&tf * &x3) >> FRAC_BITS) / BigInt::from((3 * k + 2) * (3 * k + 3));
        tg = ((&tg * &x3) >> FRAC_BITS) / BigInt::from((3 * k + 3) * (3 * k + 4));
        k += 1;
    }
    let ai = (decimal_to_fixed(AI0) * f - decimal_to_fixed(AIP0) * g) >> FRAC_BITS;
    Ok(fixed_to_f64(&ai))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((airy_ai(0.0).unwrap() - 0.3550280538878172).abs() < 1e-15);
        let gamma_2_3 = libm::tgamma(2.0 / 3.0);
        assert!((airy_ai(0.0).unwrap() - 3f64.powf(-2.0 / 3.0) / gamma_2_3).abs() < 1e-14);
        let v5 = airy_ai(5.0).unwrap();
        assert!(v5 > 0.0 && v5 < 1e-3);
        assert!((v5 - 1.0834442813607442e-4).abs() < 1e-17);
        assert!(airy_ai(-2.3382).unwrap() * airy_ai(-2.3381).unwrap() < 0.0);
        assert!(airy_ai(21.0).is_err());
    }

    #[test]
    fn extreme_arguments_keep_precision() {
        let v = airy_ai(20.0).unwrap();
        assert!((v / 1.6916728686705403e-27 - 1.0).abs() < 1e-12);
        let w = airy_ai(-20.0).unwrap();
        assert!((w + 0.17640612707798469).abs() < 1e-14);
    }

    #[test]
    fn satisfies_airy_equation() {
        // Ai'' = x Ai via a central difference.
        for &x in &[-7.0, -2.0, 0.5, 3.0] {
            let h = 1e-3;
            let d2 = (airy_ai(x + h).unwrap() - 2.0 * airy_ai(x).unwrap() + airy_ai(x - h).unwrap()) / (h * h);
            assert!((d2 - x * airy_ai(x).unwrap()).abs() < 1e-6);
        }
    }
}
