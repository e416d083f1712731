//! Experiment sweeps. Every sweep expands its configuration into cells,
//! evaluates the cells on the rayon pool and returns records in cell order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::Instant;

use hecke_core::arithmetic::gcd;
use hecke_core::class_numbers::{admissible_n0, count_A_with_table, r3, r3_table};
use hecke_core::eichler_selberg::{
    averaged_trace_window, band_angles, diagonal_side, noweight_main_term, poisson_character_sums, trace_full, trace_new,
    variance_window, WindowSpec,
};
use hecke_core::petersson::{delta_full_with, delta_new_with, maint_residual_with, orbital_integral_a, PeterssonOptions};
use hecke_core::special_functions::weighted_bessel_order_sum;
use hecke_core::spectral::{
    discrepancy, empirical_mu_star, nu_moment, trace_discrepancy_bound, ContinuousMeasure,
};
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::acceptance::{self, Profile, Status};
use crate::cache::Cache;
use crate::config::Config;
use crate::error::{config_err, HarnessError, Result};
use crate::record::ExperimentRecord;

pub const EXPERIMENTS: [&str; 9] =
    ["trace", "petersson", "bessel-sum", "noweight", "variance", "arith-sum", "discrepancy", "orbital", "verify"];

/// The records of a run and whether a verification failed.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub verification_failed: bool,
}

pub fn run_experiment(name: &str, config: &Config, cache: &Cache) -> Result<RunOutput> {
    if let Some(tag) = config.string("experiment") {
        if tag != name {
            return config_err(format!("config is for experiment `{tag}`, not `{name}`"));
        }
    }
    let records = match name {
        "trace" => trace(config)?,
        "petersson" => petersson(config)?,
        "bessel-sum" => bessel_sum(config, cache)?,
        "noweight" => noweight(config, cache)?,
        "variance" => variance(config)?,
        "arith-sum" => arith_sum(config, cache)?,
        "discrepancy" => discrepancy_sweep(config)?,
        "orbital" => orbital(config)?,
        "verify" => return verify(config, cache),
        other => return config_err(format!("unknown experiment `{other}`; expected one of {EXPERIMENTS:?}")),
    };
    Ok(RunOutput { records, verification_failed: false })
}

/// Evaluates cells in parallel, keeping cell order.
fn sweep<C: Sync>(cells: &[C], f: impl Fn(&C) -> Result<ExperimentRecord> + Sync) -> Result<Vec<ExperimentRecord>> {
    cells
        .par_iter()
        .map(|c| {
            let start = Instant::now();
            f(c).map(|r| r.elapsed(start.elapsed().as_secs_f64()))
        })
        .collect()
}

fn product2<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn product3<A: Copy, B: Copy, C: Copy>(a: &[A], b: &[B], c: &[C]) -> Vec<(A, B, C)> {
    product2(a, b).into_iter().flat_map(|(x, y)| c.iter().map(move |&z| (x, y, z))).collect()
}

fn weight(key: &str, k: u64) -> Result<u32> {
    u32::try_from(k).map_err(|_| HarnessError::Config(format!("`{key}` = {k} is too large")))
}

fn weights(config: &Config, key: &str) -> Result<Vec<u32>> {
    config.u64_list(key)?.into_iter().map(|k| weight(key, k)).collect()
}

fn petersson_options(config: &Config) -> Result<PeterssonOptions> {
    let d = PeterssonOptions::default();
    Ok(PeterssonOptions {
        c_cap: config.u64_or("c_cap", d.c_cap)?,
        l_limit: config.u64_or("l_limit", d.l_limit)?,
        tail_relative: config.f64_or("tail_relative", d.tail_relative)?,
    })
}

#[allow(non_snake_case)]
fn trace(config: &Config) -> Result<Vec<ExperimentRecord>> {
    config.check_keys("trace", &["n", "k", "N", "kind"])?;
    let kind = config.choice("kind", &["new", "full"])?;
    let cells = product3(&config.u64_list("n")?, &weights(config, "k")?, &config.u64_list_or("N", &[1])?);
    sweep(&cells, |&(n, k, N)| {
        let t = if kind == "new" { trace_new(n, k, N)? } else { trace_full(n, k, N)? };
        Ok(ExperimentRecord::new("trace")
            .param("n", n)
            .param("k", k)
            .param("N", N)
            .param("kind", kind)
            .output("total", t.total)
            .output("term1", t.term1.value())
            .output("term2", t.term2)
            .output("term3", t.term3.value())
            .output("term4", t.term4.value()))
    })
}

#[allow(non_snake_case)]
fn petersson(config: &Config) -> Result<Vec<ExperimentRecord>> {
    config.check_keys("petersson", &["k", "N", "m", "n", "space", "c_cap", "l_limit", "tail_relative"])?;
    let space = config.choice("space", &["new", "full", "maint"])?;
    let opts = petersson_options(config)?;
    let cells: Vec<(u32, u64, u64, u64)> = product2(
        &product2(&weights(config, "k")?, &config.u64_list_or("N", &[1])?),
        &product2(&config.u64_list_or("m", &[1])?, &config.u64_list("n")?),
    )
    .into_iter()
    .map(|((k, N), (m, n))| (k, N, m, n))
    .collect();
    sweep(&cells, |&(k, N, m, n)| {
        let mut rec = ExperimentRecord::new("petersson").param("k", k).param("N", N).param("m", m).param("n", n).param("space", space);
        let d = match space {
            "full" => delta_full_with(k, N, m, n, &opts)?,
            "new" => delta_new_with(k, N, m, n, &opts)?,
            _ => {
                let r = maint_residual_with(k, N, m, n, &opts)?;
                rec = rec
                    .output("main_terms", r.main_terms)
                    .output("s1_term", r.s1_term)
                    .output("residual", r.residual)
                    .output("residual_scaled", r.residual * (k as f64).sqrt())
                    .output("residual_over_s1", r.residual / r.s1_term);
                r.delta
            }
        };
        Ok(rec
            .output("value", d.value)
            .truncation("truncation_bound", d.truncation_bound)
            .truncation("c_max", d.c_max as f64)
            .truncation("l_max", d.l_max as f64)
            .truncation("c_cap", opts.c_cap as f64)
            .truncation("l_limit", opts.l_limit as f64)
            .truncation("tail_relative", opts.tail_relative))
    })
}

/// Arguments from `x`, or from `a` as x = K + a K^{1/3}.
fn bessel_arguments(config: &Config, k: f64) -> Result<Vec<f64>> {
    match (config.f64_list_opt("x")?, config.f64_list_opt("a")?) {
        (Some(_), Some(_)) => config_err("give either `x` or `a`, not both"),
        (Some(xs), None) => Ok(xs),
        (None, Some(as_)) => Ok(as_.iter().map(|a| k + a * k.cbrt()).collect()),
        (None, None) => Ok(vec![k]),
    }
}

#[allow(non_snake_case)]
fn bessel_sum(config: &Config, cache: &Cache) -> Result<Vec<ExperimentRecord>> {
    config.check_keys("bessel-sum", &["K", "delta", "x", "a"])?;
    let delta = config.f64_or("delta", 0.3)?;
    let mut cells = Vec::new();
    for K in weights(config, "K")? {
        for x in bessel_arguments(config, K as f64)? {
            cells.push((K, x));
        }
    }
    sweep(&cells, |&(K, x)| {
        let sum = weighted_bessel_order_sum(K as f64, delta, x)?;
        let (j, j_err) = cache.bessel_j(K, x)?;
        let kf = K as f64;
        Ok(ExperimentRecord::new("bessel-sum")
            .param("K", K)
            .param("delta", delta)
            .param("x", x)
            .output("sum", sum)
            .output("bessel_j_K", j)
            .output("ratio_to_half_j", sum / (0.5 * j))
            .output("sum_scaled", sum * kf.cbrt())
            .output("transition_offset", (x - kf) / kf.cbrt())
            .truncation("bessel_j_error", j_err)
            .truncation("order_radius", kf.powf(delta)))
    })
}

#[allow(non_snake_case)]
fn noweight(config: &Config, cache: &Cache) -> Result<Vec<ExperimentRecord>> {
    config.check_keys("noweight", &["n", "N", "delta", "K"])?;
    let delta = config.f64_or("delta", 0.25)?;
    let N = config.u64_or("N", 1)?;
    let fixed_k = config.u64_opt("K")?.map(|k| weight("K", k)).transpose()?;
    let ns = config.u64_list("n")?;
    // Cells run one at a time; the trace kernel parallelizes internally.
    let mut out = Vec::with_capacity(ns.len());
    for n in ns {
        let start = Instant::now();
        let K = fixed_k.unwrap_or((4.0 * PI * (n as f64).sqrt()).floor() as u32);
        let spec = WindowSpec::new(K as f64, delta)?;
        let lhs = averaged_trace_window(n, N, &spec)?;
        let main = noweight_main_term(n, N, K)?;
        let (_, j_err) = cache.bessel_j(K, 4.0 * PI * (n as f64).sqrt())?;
        out.push(
            ExperimentRecord::new("noweight")
                .param("n", n)
                .param("N", N)
                .param("K", K)
                .param("delta", delta)
                .output("lhs", lhs)
                .output("main_term", main)
                .output("ratio", lhs / main)
                .truncation("window_radius", spec.radius)
                .truncation("window_weights", spec.weights().len() as f64)
                .truncation("bessel_j_error", j_err)
                .elapsed(start.elapsed().as_secs_f64()),
        );
    }
    Ok(out)
}

#[allow(non_snake_case)]
fn variance(config: &Config) -> Result<Vec<ExperimentRecord>> {
    config.check_keys("variance", &["n", "N", "T"])?;
    let fixed_t = config.f64_opt("T")?;
    let cells = product2(&config.u64_list("n")?, &config.u64_list_or("N", &[1])?);
    let mut out = Vec::with_capacity(cells.len());
    // The character sums depend only on n and T.
    let mut character_sums: HashMap<(u64, u64), f64> = HashMap::new();
    for (n, N) in cells {
        let start = Instant::now();
        let t = fixed_t.unwrap_or(2.0 * (n as f64).sqrt().ceil());
        let v = variance_window(n, N, t)?;
        let d = diagonal_side(n, N, t)?;
        let key = (n, t.to_bits());
        let max_sum = match character_sums.get(&key) {
            Some(&m) => m,
            None => {
                let m = poisson_character_sums(t, &band_angles(n))?
                    .iter()
                    .map(|p| p.value.abs())
                    .fold(0.0, f64::max);
                character_sums.insert(key, m);
                m
            }
        };
        out.push(
            ExperimentRecord::new("variance")
                .param("n", n)
                .param("N", N)
                .param("T", t)
                .output("variance", v.value)
                .output("diagonal", d.value)
                .output("difference", v.value - d.value)
                .output("difference_scaled", (v.value - d.value).abs() / (n as f64).powf(0.6))
                .output("max_character_sum", max_sum)
                .truncation("variance_k_cutoff", v.k_cutoff as f64)
                .truncation("variance_tail_bound", v.tail_bound)
                .truncation("diagonal_k_cutoff", d.k_cutoff as f64)
                .truncation("diagonal_tail_bound", d.tail_bound)
                .elapsed(start.elapsed().as_secs_f64()),
        );
    }
    Ok(out)
}

#[allow(non_snake_case)]
fn arith_sum(config: &Config, cache: &Cache) -> Result<Vec<ExperimentRecord>> {
    config.check_keys("arith-sum", &["n", "N"])?;
    let cells = product2(&config.u64_list("n")?, &config.u64_list_or("N", &[2])?);
    let top = cells.iter().map(|c| c.0).max().unwrap_or(0);
    let table = r3_table(4 * top as usize);
    let mut out = Vec::with_capacity(cells.len());
    for (n, N) in cells {
        let start = Instant::now();
        if n % 2 == 0 || gcd(n, N) != 1 {
            return config_err(format!("arith-sum: n = {n} must be odd and coprime to N = {N}"));
        }
        let tmax = (2.0 * (n as f64).sqrt()).ceil() as i64;
        let ts: Vec<i64> = (-tmax..=tmax).filter(|&t| t * t < 4 * n as i64).collect();
        let squares = ts.par_iter().map(|&t| cache.d_coefficient(t, n, N).map(|d| d * d)).collect::<Result<Vec<f64>>>()?;
        let s: f64 = squares.iter().sum();
        let root = (n as f64).sqrt();
        let ln = (n as f64).ln();
        let h = cache.hurwitz_h(4 * n)?;
        let mut rec = ExperimentRecord::new("arith-sum")
            .param("n", n)
            .param("N", N)
            .output("d_square_sum", s)
            .output("d_square_sum_normalized", s / root)
            .output("d_square_sum_over_upper_shape", s / (root * ln * ln * ln.ln().powi(4)))
            .output("hurwitz_H_4n", h.to_f64().unwrap_or(f64::NAN))
            .output("r3", r3(n) as f64);
        if let Some(n0) = admissible_n0(N, n) {
            let a = count_A_with_table(N, n, n0, &table)?;
            rec = rec.param("n0", n0).output("count_A", a as f64).output("count_A_over_n", a as f64 / n as f64);
        }
        out.push(rec.elapsed(start.elapsed().as_secs_f64()));
    }
    Ok(out)
}

#[allow(non_snake_case)]
fn discrepancy_sweep(config: &Config) -> Result<Vec<ExperimentRecord>> {
    config.check_keys("discrepancy", &["k", "N", "p", "m"])?;
    let p = config.u64_or("p", 2)?;
    let moments: Vec<u32> = config
        .u64_list_or("m", &[])?
        .into_iter()
        .map(|m| u32::try_from(m).map_err(|_| HarnessError::Config(format!("`m` = {m} is too large"))))
        .collect::<Result<_>>()?;
    let plancherel = ContinuousMeasure::plancherel(p)?;
    let semicircle = ContinuousMeasure::semicircle();
    let cells = product2(&weights(config, "k")?, &config.u64_list_or("N", &[1])?);
    sweep(&cells, |&(k, N)| {
        let spec = empirical_mu_star(k, N, p)?;
        let mut rec = ExperimentRecord::new("discrepancy")
            .param("k", k)
            .param("N", N)
            .param("p", p)
            .output("dim", spec.dim as f64)
            .output("discrepancy_plancherel", discrepancy(&spec.measure, &plancherel)?)
            .output("discrepancy_semicircle", discrepancy(&spec.measure, &semicircle)?)
            .output("round_trip_error", spec.round_trip_error)
            .output("flagged", if spec.flagged { 1.0 } else { 0.0 });
        if let Some(bound) = trace_discrepancy_bound(p, k, N)? {
            rec = rec.output("trace_lower_bound", bound);
        }
        let mut worst: f64 = 0.0;
        for &m in &moments {
            let r = nu_moment(k, N, p, m)?;
            rec = rec.output(&format!("harmonic_moment_{m}"), r.value);
            worst = worst.max(r.truncation_bound);
        }
        if !moments.is_empty() {
            rec = rec.truncation("moment_truncation_bound", worst);
        }
        Ok(rec)
    })
}

fn orbital(config: &Config) -> Result<Vec<ExperimentRecord>> {
    config.check_keys("orbital", &["k", "t"])?;
    let cells = product2(&weights(config, "k")?, &config.f64_list_or("t", &[1.0])?);
    sweep(&cells, |&(k, t)| {
        let a = orbital_integral_a(t, k)?;
        let (q, c) = (a.quadrature, a.closed_form);
        Ok(ExperimentRecord::new("orbital")
            .param("k", k)
            .param("t", t)
            .output("quadrature_re", q.0)
            .output("quadrature_im", q.1)
            .output("closed_form_re", c.0)
            .output("closed_form_im", c.1)
            .output("relative_error", (q.0 - c.0).hypot(q.1 - c.1) / c.0.hypot(c.1))
            .truncation("quadrature_error", a.quadrature_error))
    })
}

fn verify(config: &Config, cache: &Cache) -> Result<RunOutput> {
    config.check_keys("verify", &["profile", "criteria"])?;
    let profile = match config.choice("profile", &["full", "quick"])? {
        "full" => Profile::Full,
        _ => Profile::Quick,
    };
    let ids: Vec<u32> = config
        .u64_list_or("criteria", &(1..=11).collect::<Vec<_>>())?
        .into_iter()
        .map(|id| {
            if (1..=11).contains(&id) {
                Ok(id as u32)
            } else {
                config_err(format!("`criteria`: no criterion {id}"))
            }
        })
        .collect::<Result<_>>()?;
    let outcomes = acceptance::run_all(profile, cache, &ids, |o| eprintln!("{}", o.line()))?;
    let failed = outcomes.iter().any(|o| o.status == Status::Fail);
    Ok(RunOutput { records: outcomes.iter().map(|o| o.to_record(profile)).collect(), verification_failed: failed })
}
