//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration: value and estimated absolute error.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: f64,
}

/// Values that can be integrated: reals and (re, im) pairs.
pub trait Integrand: Copy + Default {
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn norm(self) -> f64;
}

impl Integrand for f64 {
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl Integrand for (f64, f64) {
    fn add(self, o: Self) -> Self {
        (self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: Self) -> Self {
        (self.0 - o.0, self.1 - o.1)
    }
    fn scale(self, s: f64) -> Self {
        (self.0 * s, self.1 * s)
    }
    fn norm(self) -> f64 {
        self.0.hypot(self.1)
    }
}

fn gk15<T: Integrand>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx).add(f(c + dx));
        kron = kron.add(s.scale(WGK[j]));
        if j % 2 == 1 {
            gauss = gauss.add(s.scale(WG[j / 2]));
        }
    }
    let kron = kron.scale(h);
    let gauss = gauss.scale(h);
    (kron, kron.sub(gauss).norm())
}

/// Integrates `f` over `[a, b]` until the summed error estimate is below
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<T: Integrand>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature<T>> {
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let (mut total, mut err) = (T::default(), 0.0);
        for iv in &intervals {
            total = total.add(iv.2);
            err += iv.3;
        }
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(Quadrature { value: total, error: err });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::NonConvergence(format!(
                "{} subintervals on [{a}, {b}], error estimate {err:e}",
                intervals.len()
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let q = integrate(|x| x.powi(20), 0.0, 1.0, 1e-14, 1e-14, 100).unwrap();
        assert!((q.value - 1.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_complex() {
        let q = integrate(|x: f64| (x.cos(), x.sin()), 0.0, 50.0, 1e-12, 1e-12, 1000).unwrap();
        assert!((q.value.0 - 50f64.sin()).abs() < 1e-11);
        assert!((q.value.1 - (1.0 - 50f64.cos())).abs() < 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-15, 0.0, 10);
        assert!(r.is_err());
    }
}
