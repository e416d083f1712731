//! Spectral measures on [−2, 2]: Plancherel and semicircle laws, empirical
//! Hecke spectra, Chebyshev moments and interval discrepancy.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arithmetic::{fac, gcd};
use crate::class_numbers::MAX_ABS_DISCRIMINANT;
use crate::eichler_selberg::{classical_trace, trace_new, TraceKind};
use crate::error::{invalid, Error, Result};
use crate::petersson::{delta_new, PeterssonResult};
use crate::special_functions::quad::integrate;

pub const MAX_MOMENT: u32 = 200;
pub const MAX_EMPIRICAL_DIM: usize = 40;
/// Recovered spectra above this dimension are returned but flagged.
pub const FLAG_DIM: usize = 20;
const ATOM_SLACK: f64 = 1e-6;

/// U_m(x/2) by the three-term recurrence.
pub fn chebyshev_u_half(m: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..m {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// d/dx U_m(x/2).
fn chebyshev_u_half_derivative(m: u32, x: f64) -> f64 {
    let (mut u_prev, mut u) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for _ in 0..m {
        let d_next = u + x * d - d_prev;
        let u_next = x * u - u_prev;
        u_prev = u;
        u = u_next;
        d_prev = d;
        d = d_next;
    }
    d
}

pub trait Measure {
    /// ∫ U_m(x/2) dμ.
    fn chebyshev_moment_unchecked(&self, m: u32) -> f64;
}

pub fn chebyshev_moment(measure: &impl Measure, m: u32) -> Result<f64> {
    if m > MAX_MOMENT {
        return invalid(format!("chebyshev_moment: m = {m} exceeds {MAX_MOMENT}"));
    }
    Ok(measure.chebyshev_moment_unchecked(m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    pub total: f64,
}

impl DiscreteMeasure {
    pub fn new(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return invalid("DiscreteMeasure: no atoms");
        }
        for &(x, w) in &pairs {
            if !(x.abs() <= 2.0 + ATOM_SLACK) {
                return invalid(format!("DiscreteMeasure: atom {x} outside [−2, 2]"));
            }
            if !(w > 0.0) {
                return invalid(format!("DiscreteMeasure: weight {w} is not positive"));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = pairs.iter().map(|p| p.1).sum();
        let (atoms, weights) = pairs.into_iter().unzip();
        Ok(DiscreteMeasure { atoms, weights, total })
    }

    /// Equal weights 1/A.
    pub fn uniform(atoms: Vec<f64>) -> Result<Self> {
        let w = 1.0 / atoms.len().max(1) as f64;
        Self::new(atoms.into_iter().map(|x| (x, w)).collect())
    }

    pub fn is_probability(&self) -> bool {
        (self.total - 1.0).abs() <= 1e-9
    }
}

impl Measure for DiscreteMeasure {
    fn chebyshev_moment_unchecked(&self, m: u32) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(&x, &w)| w * chebyshev_u_half(m, x)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuousKind {
    Plancherel(u64),
    Semicircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContinuousMeasure {
    pub kind: ContinuousKind,
}

impl ContinuousMeasure {
    pub fn plancherel(p: u64) -> Result<Self> {
        let f = fac(p.max(1));
        if p < 2 || f.factors.len() != 1 || f.factors[0].1 != 1 {
            return invalid(format!("plancherel: {p} is not prime"));
        }
        Ok(ContinuousMeasure { kind: ContinuousKind::Plancherel(p) })
    }

    pub fn semicircle() -> Self {
        ContinuousMeasure { kind: ContinuousKind::Semicircle }
    }

    /// μ([−2, x]) for x clamped to [−2, 2].
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(-2.0, 2.0);
        match self.kind {
            ContinuousKind::Semicircle => {
                let v = 0.5 + (0.5 * x * (4.0 - x * x).sqrt() + 2.0 * (0.5 * x).asin()) / (2.0 * PI);
                v.clamp(0.0, 1.0)
            }
            ContinuousKind::Plancherel(p) => plancherel_cdf_raw(p, x),
        }
    }
}

impl Measure for ContinuousMeasure {
    fn chebyshev_moment_unchecked(&self, m: u32) -> f64 {
        match self.kind {
            ContinuousKind::Semicircle => f64::from(m == 0),
            ContinuousKind::Plancherel(p) => {
                if m % 2 == 1 {
                    0.0
                } else {
                    (p as f64).powf(-(m as f64) / 2.0)
                }
            }
        }
    }
}

/// In x = 2cos θ the Plancherel density becomes
/// (p+1)/π · 2 sin²θ / ((√p + 1/√p)² − 4cos²θ) dθ, smooth on [0, π].
fn plancherel_cdf_raw(p: u64, x: f64) -> f64 {
    let pf = p as f64;
    let a = pf.sqrt() + 1.0 / pf.sqrt();
    let a2 = a * a;
    let theta = (0.5 * x).clamp(-1.0, 1.0).acos();
    if theta <= 0.0 {
        return 1.0;
    }
    let density = |th: f64| {
        let (s, c) = th.sin_cos();
        (pf + 1.0) / PI * 2.0 * s * s / (a2 - 4.0 * c * c)
    };
    let q = integrate(density, theta, PI, 1e-13, 1e-13, 2000).expect("smooth integrand");
    q.value.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfValue {
    pub value: f64,
    /// The argument lay outside [−2, 2] and was clamped.
    pub clamped: bool,
}

/// μ_p([−2, x]).
pub fn plancherel_cdf(p: u64, x: f64) -> Result<CdfValue> {
    let m = ContinuousMeasure::plancherel(p)?;
    if x.is_nan() {
        return invalid("plancherel_cdf: x is NaN");
    }
    Ok(CdfValue { value: m.cdf(x), clamped: !(-2.0..=2.0).contains(&x) })
}

/// sup over closed intervals [a, b] of |d([a, b]) − c([a, b])|.
///
/// The excess of d is maximized on intervals whose endpoints are atoms; the
/// excess of c is approached by open gaps between consecutive candidate points
/// (atoms and ±2).
pub fn discrepancy(d: &DiscreteMeasure, c: &ContinuousMeasure) -> Result<f64> {
    if !d.is_probability() {
        return invalid(format!("discrepancy: discrete total {} is not 1", d.total));
    }
    let xs: Vec<f64> = d.atoms.iter().map(|x| x.clamp(-2.0, 2.0)).collect();
    let f: Vec<f64> = xs.iter().map(|&x| c.cdf(x)).collect();
    let a = xs.len();
    let mut prefix = vec![0.0; a + 1];
    for i in 0..a {
        prefix[i + 1] = prefix[i] + d.weights[i];
    }
    let mut best: f64 = 0.0;
    // d-excess: [x_i, x_j] including both atoms.
    for i in 0..a {
        for j in i..a {
            let dm = prefix[j + 1] - prefix[i];
            best = best.max(dm - (f[j] - f[i]));
        }
    }
    // c-excess: (p_i, p_j) with p_0 = −2, p_{a+1} = 2, atoms strictly inside.
    let mut pf = Vec::with_capacity(a + 2);
    pf.push(0.0);
    pf.extend_from_slice(&f);
    pf.push(1.0);
    for i in 0..a + 2 {
        for j in i + 1..a + 2 {
            // atoms with indices i..j−2 (0-based) lie strictly between p_i and p_j
            let dm = if j >= i + 2 { prefix[j - 1] - prefix[i] } else { 0.0 };
            best = best.max(pf[j] - pf[i] - dm);
        }
    }
    Ok(best)
}

/// Total variation of U_m(x/2) on [−2, 2], from its critical points.
pub fn chebyshev_total_variation(m: u32) -> f64 {
    if m == 0 {
        return 0.0;
    }
    // Critical points lie in θ-cells of width ~π/(m+1); sample finer than that.
    let samples = 64 * (m as usize + 1);
    let grid: Vec<f64> = (0..=samples).map(|i| -2.0 * (PI * i as f64 / samples as f64).cos()).collect();
    let mut points = vec![-2.0];
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (dlo, dhi) = (chebyshev_u_half_derivative(m, lo), chebyshev_u_half_derivative(m, hi));
        if dlo == 0.0 {
            points.push(lo);
            continue;
        }
        if dlo.signum() == dhi.signum() {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if chebyshev_u_half_derivative(m, mid).signum() == dlo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        points.push(0.5 * (lo + hi));
    }
    points.push(2.0);
    points
        .windows(2)
        .map(|w| (chebyshev_u_half(m, w[1]) - chebyshev_u_half(m, w[0])).abs())
        .sum::<f64>()
        * (1.0 + 1e-12)
}

/// |Δ_m| / (2·max|U_m(x/2)| + TV(U_m(x/2))), a lower bound on the discrepancy of
/// two probability measures on [−2, 2] whose m-th Chebyshev moments differ by Δ_m.
pub fn discrepancy_lower_bound_moments(moment_diffs: &[f64], m: usize) -> Result<f64> {
    if m == 0 {
        return invalid("discrepancy_lower_bound_moments: m must be at least 1");
    }
    let Some(&delta) = moment_diffs.get(m) else {
        return invalid(format!("discrepancy_lower_bound_moments: no moment difference at index {m}"));
    };
    let mm = m as u32;
    Ok(delta.abs() / (2.0 * (m as f64 + 1.0) + chebyshev_total_variation(mm)))
}

fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = fac(n);
    (f.factors.len() == 1).then(|| f.factors[0])
}

/// |Tr T*_n − dim·δ(n = □)/√n| / (2 m² dim) for n = p^m, a lower bound for
/// D(μ*_{k,N}, μ_p); `None` when the new space is empty.
#[allow(non_snake_case)]
pub fn trace_discrepancy_bound(n: u64, k: u32, N: u64) -> Result<Option<f64>> {
    let Some((_, m)) = prime_power(n) else {
        return invalid(format!("trace_discrepancy_bound: n = {n} is not a prime power"));
    };
    if gcd(n, N) != 1 {
        return invalid("trace_discrepancy_bound: n must be coprime to N");
    }
    let dim = trace_new(1, k, N)?.total.round();
    if dim <= 0.0 {
        return Ok(None);
    }
    let tr = trace_new(n, k, N)?.total;
    let main = if m % 2 == 0 { dim / (n as f64).sqrt() } else { 0.0 };
    Ok(Some((tr - main).abs() / (2.0 * (m * m) as f64 * dim)))
}

/// ∫ U_m(x/2) dν*_{k,N} = Δ*_{k,N}(1, p^m).
#[allow(non_snake_case)]
pub fn nu_moment(k: u32, N: u64, p: u64, m: u32) -> Result<PeterssonResult> {
    if gcd(p, N) != 1 {
        return invalid("nu_moment: p must be coprime to N");
    }
    let pm = p.checked_pow(m).ok_or_else(|| Error::InvalidInput(format!("nu_moment: {p}^{m} overflows")))?;
    delta_new(k, N, 1, pm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    pub measure: DiscreteMeasure,
    pub dim: usize,
    /// Normalized traces c_m = Tr T*_{p^m} for m = 0..=dim.
    pub moments: Vec<f64>,
    /// max_m |dim·∫U_m dμ − c_m|.
    pub round_trip_error: f64,
    /// dim exceeds the range where round trips are tested.
    pub flagged: bool,
}

/// Eigenvalue distribution of T*_p on S_k(N)*, recovered from exact traces.
///
/// Power sums of the integral eigenvalues a_f(p) come from
/// a^j = Σ_r (C(j,r) − C(j,r−1)) p^{(k−1)r} a(p^{j−2r}); Newton's identities
/// give the integer characteristic polynomial, whose real roots are isolated
/// by Sturm sequences and refined by exact bisection.
#[allow(non_snake_case)]
pub fn empirical_mu_star(k: u32, N: u64, p: u64) -> Result<EmpiricalSpectrum> {
    ContinuousMeasure::plancherel(p)?;
    if gcd(p, N) != 1 {
        return invalid("empirical_mu_star: p must be coprime to N");
    }
    let dim_big = classical_trace(1, k, N, TraceKind::New)?;
    let dim = dim_big.to_usize().unwrap_or(usize::MAX);
    if dim == 0 {
        return invalid(format!("empirical_mu_star: S_{k}({N})* is empty"));
    }
    if dim > MAX_EMPIRICAL_DIM {
        return invalid(format!("empirical_mu_star: dimension {dim} exceeds {MAX_EMPIRICAL_DIM}"));
    }
    let top = (p as f64).powi(dim as i32);
    if 4.0 * top > MAX_ABS_DISCRIMINANT as f64 {
        return invalid(format!("empirical_mu_star: {p}^{dim} needs class numbers beyond 10^7"));
    }
    let traces: Vec<BigInt> = (0..=dim as u32)
        .map(|j| classical_trace(p.pow(j), k, N, TraceKind::New))
        .collect::<Result<_>>()?;
    let pk = BigInt::from(p).pow(k - 1);
    let mut power_sums = vec![BigInt::from(dim)];
    for j in 1..=dim {
        let mut s = BigInt::zero();
        let mut binom_prev = BigInt::zero();
        let mut binom = BigInt::one();
        let mut pk_r = BigInt::one();
        for r in 0..=j / 2 {
            s += (&binom - &binom_prev) * &pk_r * &traces[j - 2 * r];
            binom_prev = binom.clone();
            binom = binom * BigInt::from(j - r) / BigInt::from(r + 1);
            pk_r *= &pk;
        }
        power_sums.push(s);
    }
    // e_i with i·e_i = Σ_{j=1}^{i} (−1)^{j−1} e_{i−j} P_j.
    let mut e = vec![BigInt::one()];
    for i in 1..=dim {
        let mut acc = BigInt::zero();
        for j in 1..=i {
            let term = &e[i - j] * &power_sums[j];
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let (q, r) = acc.div_rem(&BigInt::from(i));
        if !r.is_zero() {
            return Err(Error::Inconsistent(format!("empirical_mu_star: Newton identity {i} is not integral")));
        }
        e.push(q);
    }
    // Coefficients in ascending powers: χ(X) = Σ_i (−1)^i e_i X^{dim−i}.
    let mut chi = vec![BigInt::zero(); dim + 1];
    for (i, ei) in e.iter().enumerate() {
        chi[dim - i] = if i % 2 == 0 { ei.clone() } else { -ei.clone() };
    }
    let scale = (p as f64).powf((k as f64 - 1.0) / 2.0);
    // Deligne: |a| ≤ 2p^{(k−1)/2} < bound.
    let bound = BigInt::from((2.0 * scale).ceil() as u128 + 1);
    let roots = real_roots(&chi, &bound)?;
    let count: usize = roots.iter().map(|r| r.1).sum();
    if count != dim {
        return Err(Error::Conditioning(format!(
            "empirical_mu_star: {count} of {dim} eigenvalues in the Deligne interval"
        )));
    }
    let w = 1.0 / dim as f64;
    let mut pairs = Vec::with_capacity(dim);
    for (x, mult) in roots {
        let atom = x / scale;
        if atom.abs() > 2.0 + 1e-4 {
            return Err(Error::Conditioning(format!("empirical_mu_star: atom {atom} violates Deligne")));
        }
        for _ in 0..mult {
            pairs.push((atom.clamp(-2.0, 2.0), w));
        }
    }
    let measure = DiscreteMeasure::new(pairs)?;
    let moments: Vec<f64> = traces
        .iter()
        .enumerate()
        .map(|(j, t)| big_ratio(t, &BigInt::from(p).pow(j as u32 * (k - 1)), j as u32 * (k - 1) % 2 == 1, p))
        .collect();
    let round_trip_error = moments
        .iter()
        .enumerate()
        .map(|(m, &c)| (dim as f64 * measure.chebyshev_moment_unchecked(m as u32) - c).abs())
        .fold(0.0, f64::max);
    Ok(EmpiricalSpectrum { measure, dim, moments, round_trip_error, flagged: dim > FLAG_DIM })
}

/// t / √q, with q = p^e and `odd` = e odd, computed without overflow.
fn big_ratio(t: &BigInt, q: &BigInt, odd: bool, p: u64) -> f64 {
    let (q_half, extra) = if odd {
        (num_integer::Roots::sqrt(&(q / BigInt::from(p))), (p as f64).sqrt())
    } else {
        (num_integer::Roots::sqrt(q), 1.0)
    };
    big_div(t, &q_half) / extra
}

fn big_div(a: &BigInt, b: &BigInt) -> f64 {
    let shift = (b.bits() as i64 - 60).max(0) as u64;
    let a_bits = a.bits() as i64;
    let a_shift = (a_bits - 60).max(0) as u64;
    let af = (a >> a_shift).to_f64().unwrap_or(0.0);
    let bf = (b >> shift).to_f64().unwrap_or(1.0);
    af / bf * 2f64.powi(a_shift as i32 - shift as i32)
}

/// Integer polynomials in ascending coefficient order.
type Poly = Vec<BigInt>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn degree(p: &Poly) -> usize {
    p.len() - 1
}

fn is_zero_poly(p: &Poly) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn derivative(p: &Poly) -> Poly {
    if p.len() <= 1 {
        return vec![BigInt::zero()];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

fn primitive(p: Poly) -> Poly {
    let g = p.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() || g.is_one() {
        return p;
    }
    p.into_iter().map(|c| c / &g).collect()
}

/// lc(b)^{deg a − deg b + 1}·a mod b.
fn pseudo_rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = degree(b);
    let lb = b[db].clone();
    while r.len() > db && !is_zero_poly(&r) {
        let dr = degree(&r);
        let lr = r[dr].clone();
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[dr - db + i] -= &lr * bc;
        }
        r = trim(r);
        if degree(&r) == dr {
            break;
        }
    }
    r
}

/// Sign of remainder of a by b up to a positive factor.
fn signed_rem(a: &Poly, b: &Poly) -> Poly {
    let r = pseudo_rem(a, b);
    let db = degree(b);
    let exponent = degree(a) + 1 - db;
    if b[db].is_negative() && exponent % 2 == 1 {
        r.into_iter().map(|c| -c).collect()
    } else {
        r
    }
}

fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut x, mut y) = (primitive(a.clone()), primitive(b.clone()));
    while !is_zero_poly(&y) {
        let r = trim(pseudo_rem(&x, &y));
        x = y;
        y = if is_zero_poly(&r) { vec![BigInt::zero()] } else { primitive(r) };
    }
    x
}

fn exact_div(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = degree(b);
    let mut q = vec![BigInt::zero(); degree(a) - db + 1];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &b[db];
        for (j, bc) in b.iter().enumerate() {
            r[i + j] -= &c * bc;
        }
        q[i] = c;
    }
    q
}

/// Sign of p(num / 2^e), from Σ c_i num^i 2^{e(d−i)}.
fn sign_at(p: &Poly, num: &BigInt, e: u32) -> i32 {
    let pow = BigInt::one() << e as usize;
    let mut acc = BigInt::zero();
    let mut num_i = BigInt::one();
    for c in p.iter() {
        acc = acc * &pow + c * &num_i;
        num_i *= num;
    }
    if acc.is_positive() {
        1
    } else if acc.is_negative() {
        -1
    } else {
        0
    }
}

struct Sturm {
    chain: Vec<Poly>,
}

impl Sturm {
    fn new(q: &Poly) -> Self {
        let mut chain = vec![q.clone(), derivative(q)];
        loop {
            let n = chain.len();
            if degree(&chain[n - 1]) == 0 {
                break;
            }
            let r = trim(signed_rem(&chain[n - 2], &chain[n - 1]));
            if is_zero_poly(&r) {
                break;
            }
            chain.push(primitive(r.into_iter().map(|c| -c).collect()));
        }
        Sturm { chain }
    }

    fn variations(&self, num: &BigInt, e: u32) -> usize {
        let signs: Vec<i32> = self.chain.iter().map(|p| sign_at(p, num, e)).filter(|&s| s != 0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Distinct roots in (a, b].
    fn count(&self, a: &BigInt, b: &BigInt, e: u32) -> usize {
        self.variations(a, e) - self.variations(b, e)
    }
}

/// Distinct real roots in (−bound, bound] with multiplicities, as f64 values.
fn real_roots(p: &Poly, bound: &BigInt) -> Result<Vec<(f64, usize)>> {
    let p = trim(p.clone());
    let g = poly_gcd(&p, &derivative(&p));
    let q = primitive(if degree(&g) == 0 { p.clone() } else { exact_div(&p, &g) });
    let sturm = Sturm::new(&q);
    // Work on the dyadic grid num / 2^e.
    let e = 64u32;
    let lo0: BigInt = -(bound << e as usize);
    let hi0: BigInt = bound << e as usize;
    let mut stack = vec![(lo0, hi0)];
    let mut isolated = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = sturm.count(&lo, &hi, e);
        if n == 0 {
            continue;
        }
        if n == 1 {
            isolated.push((lo, hi));
            continue;
        }
        let mid: BigInt = (&lo + &hi) >> 1usize;
        if &hi - &lo <= BigInt::one() {
            return Err(Error::Conditioning("real_roots: roots closer than 2^-64".into()));
        }
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    let mut out = Vec::new();
    for (mut lo, mut hi) in isolated {
        // Refine by bisection to 60 bits below the bound.
        let width_goal = ((bound << e as usize) >> 60usize).max(BigInt::one());
        while &hi - &lo > width_goal {
            let mid: BigInt = (&lo + &hi) >> 1usize;
            if sturm.count(&lo, &mid, e) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mult = multiplicity(&p, &lo, &hi, e);
        let x = big_div(&((&lo + &hi) >> 1usize), &(BigInt::one() << e as usize));
        out.push((x, mult));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Multiplicity of the single root of p in (lo, hi].
fn multiplicity(p: &Poly, lo: &BigInt, hi: &BigInt, e: u32) -> usize {
    let mut m = 0;
    let mut cur = p.clone();
    loop {
        if degree(&cur) == 0 {
            return m;
        }
        let g = poly_gcd(&cur, &derivative(&cur));
        let sf = primitive(if degree(&g) == 0 { cur.clone() } else { exact_div(&cur, &g) });
        if Sturm::new(&sf).count(lo, hi, e) == 0 {
            return m;
        }
        m += 1;
        cur = g;
    }
}
