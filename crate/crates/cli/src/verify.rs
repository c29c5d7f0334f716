//! Fast invariant suite: exact engine checks and closed-form identities.

use lpplab::analytic::{
    exp_quadratic_expansion, exp_quadratic_recursion, factorial, mean_fn, rains_log_mgf, regularized_gamma_upper,
    shape_fn, stretched_exp_bounds, stretched_exp_head, stretched_exp_tail, zeta_fn, BoundaryParam,
};
use lpplab::experiments::{derive_seed, poisson_staircase};
use lpplab::invariants::{coupling_checks, dp_matches_bruteforce, Check};
use lpplab::lpp::{hor_params, lpp_full, lpp_rolling, ver_params, Variant};
use lpplab::randfield::{sample_field, SeedSpec};
use lpplab::Result;

const SEED: u64 = 0x5eed;

fn check(name: &str, cases: u64, failures: u64, detail: String) -> Check {
    Check { name: name.to_string(), cases, failures, detail }
}

/// Counts the cases where `close(got, want)` fails.
fn tally(name: &str, pairs: &[(f64, f64)], tol: f64) -> Check {
    let bad: Vec<&(f64, f64)> =
        pairs.iter().filter(|(g, w)| !((g - w).abs() <= tol * (1.0 + w.abs()))).collect();
    let detail = bad.first().map(|(g, w)| format!("{g} vs {w}")).unwrap_or_default();
    check(name, pairs.len() as u64, bad.len() as u64, detail)
}

fn rolling_matches_full() -> Result<Check> {
    let mut cases = 0;
    let mut failures = 0;
    for k in 0..40 {
        let f = sample_field(&SeedSpec::new(SEED, "verify/rolling", k), 3 + (k as usize % 9), 2 + (k as usize % 7))?;
        for (variant, p) in [
            (Variant::Bulk, BoundaryParam::bulk()),
            (Variant::Hor, hor_params(0.4)?),
            (Variant::Ver, ver_params(0.6)?),
            (Variant::TwoSided, BoundaryParam::new(0.45, 0.3)?),
        ] {
            let full = lpp_full(&f, variant, p)?;
            let roll = lpp_rolling(&f, variant, p, &[], true)?;
            for i in variant.start().0..=f.m {
                cases += 1;
                if roll.top_row[i].to_bits() != full.value(i, f.n).to_bits() {
                    failures += 1;
                }
            }
        }
    }
    Ok(check("rolling-equals-full", cases, failures, String::new()))
}

fn analytic_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    out.push(tally("rains-closed-form", &[(rains_log_mgf(8, 8, 0.55, 0.45)?.exp(), (11.0f64 / 9.0).powi(16))], 1e-12));
    let mut means = vec![(mean_fn(20.0, 20.0, 0.5)?, 80.0)];
    for n in [1.0, 7.0, 128.0] {
        means.push((shape_fn(n, n)?, 4.0 * n));
        means.push((zeta_fn(n, n)?, 0.5));
    }
    out.push(tally("mean-and-shape", &means, 1e-12));

    let mut gam = Vec::new();
    for n in 1..=20u32 {
        for x in [0.1f64, 1.0, 5.0, 20.0] {
            let series: f64 = (0..n).map(|k| x.powi(k as i32) / factorial(k)).sum::<f64>() * (-x).exp();
            gam.push((regularized_gamma_upper(n, x)?, series));
        }
    }
    out.push(tally("gamma-tail-series", &gam, 1e-10));

    let mut failures = 0;
    let mut cases = 0;
    for p in [1.0, 2.0, 3.5, 6.0] {
        for q in [0.5, 1.0, 2.0] {
            if q > p {
                continue;
            }
            for x in [0.0, 0.5, 2.0, 5.0] {
                let (tail, head) = (stretched_exp_tail(p, q, x)?, stretched_exp_head(p, q, x)?);
                let (tb, hb) = stretched_exp_bounds(p, q, x)?;
                // Simpson is only accurate for a smooth integrand at 0.
                let quad = simpson(|t| t.powf(p - 1.0) * (-t.powf(q)).exp(), 0.0, x, 4000);
                cases += 1;
                if !(tail <= tb * (1.0 + 1e-12) && head <= hb * (1.0 + 1e-12) && (q < 1.0 || (head - quad).abs() < 1e-8)) {
                    failures += 1;
                }
            }
        }
    }
    out.push(check("stretched-exp-bounds", cases, failures, String::new()));

    let mut failures = 0;
    for p in 1..=6 {
        if exp_quadratic_expansion(p)? != exp_quadratic_recursion(p) {
            failures += 1;
        }
    }
    out.push(check("partition-expansion", 6, failures, String::new()));

    let r = 0.7;
    let (a, b) = (0.8, 2.1);
    out.push(tally(
        "poisson-staircase",
        &[
            (poisson_staircase(r, &[1.3])?, 1.0 - (-r * 1.3f64).exp()),
            (poisson_staircase(r, &[a, b])?, 1.0 - (-r * a).exp() - r * a * (-r * b).exp()),
        ],
        1e-13,
    ));

    let keys: Vec<u64> = (0..1000).map(|k| derive_seed(SEED, "verify/seeds", k)).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let low_distance = u64::from((keys[0] ^ keys[1]).count_ones() < 16);
    let stable = derive_seed(SEED, "verify/seeds", 0) == keys[0];
    out.push(check(
        "seed-derivation",
        keys.len() as u64,
        (keys.len() - sorted.len()) as u64 + low_distance + u64::from(!stable),
        String::new(),
    ));
    Ok(out)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

pub fn run_suite() -> Result<Vec<Check>> {
    let mut out = vec![dp_matches_bruteforce(SEED, 100)?];
    out.extend(coupling_checks(SEED, 50)?);
    out.push(rolling_matches_full()?);
    out.extend(analytic_checks()?);
    Ok(out)
}
