//! Exit points of stationary geodesics off the characteristic direction.
//!
//! `P{Z^{z,hor}_v > 0}` for `z > zeta_v` is far too small for direct
//! sampling at moderate `|v|`. Conditionally on the bulk and the horizontal
//! boundary the event says that the vertical boundary walk
//! `S_l = sum_{j<=l} omega_{0,j}` stays below `t_l = G^{z,hor}_v - G_{(1,l),v}`
//! for every `l`, and for `Exp(1-z)` steps that is a Poisson-process
//! barrier probability computed exactly by [`poisson_staircase`]. Averaging
//! it over replicas gives an unbiased estimate with far smaller variance.

use statrs::function::gamma::ln_gamma;

use crate::analytic::zeta_fn;
use crate::error::{domain, Result};
use crate::estimators::{linear_fit, mean, mean_se};
use crate::lpp::{hor_params, sweep, ver_params, Lane, Variant};
use crate::pool::replica_map;
use crate::randfield::{boundary_weights, LazyField, SeedSpec, WeightSource};

use super::config::ExperimentConfig;
use super::ladder::LadderData;
use super::result::{min_margin, Report};

/// Poisson probabilities `P{J = d}` for `d` up to where the rest is
/// negligible.
fn poisson_kernel(lambda: f64) -> Vec<f64> {
    if lambda <= 0.0 {
        return vec![1.0];
    }
    let stop = lambda + 12.0 * lambda.sqrt() + 40.0;
    let ln_l = lambda.ln();
    let mut out = Vec::new();
    let mut k = 0usize;
    while (k as f64) <= stop {
        out.push((-lambda + k as f64 * ln_l - ln_gamma(k as f64 + 1.0)).exp());
        k += 1;
    }
    out
}

/// `P{N(t_l) >= l for l = 1..=t.len()}` for a Poisson process `N` of the
/// given rate, with `t` nondecreasing. Equivalently the probability that
/// partial sums of i.i.d. `Exp(rate)` satisfy `S_l < t_l` for every `l`.
pub fn poisson_staircase(rate: f64, t: &[f64]) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(domain(format!("rate {rate} must be positive")));
    }
    let n = t.len();
    if n == 0 {
        return Ok(1.0);
    }
    if t.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("barrier times must be nondecreasing"));
    }
    if t[0] <= 0.0 {
        return Ok(0.0);
    }
    // p[k] = P{N(t_l) = k, constraints so far}; counts >= n are absorbed.
    let mut p = vec![0.0; n];
    let mut next = vec![0.0; n];
    p[0] = 1.0;
    let mut done = 0.0;
    let mut prev = 0.0;
    let mut lo = 0;
    for l in 1..=n {
        let kernel = poisson_kernel(rate * (t[l - 1] - prev));
        prev = t[l - 1];
        // Suffix sums give the mass that jumps past n - 1.
        let mut tail = vec![0.0; kernel.len() + 1];
        for d in (0..kernel.len()).rev() {
            tail[d] = tail[d + 1] + kernel[d];
        }
        next[lo..].iter_mut().for_each(|x| *x = 0.0);
        for k in lo..n {
            let mass = p[k];
            if mass == 0.0 {
                continue;
            }
            let room = n - k;
            for (d, &q) in kernel.iter().enumerate().take(room) {
                next[k + d] += mass * q;
            }
            if room < kernel.len() {
                done += mass * tail[room];
            }
        }
        // Constraint N(t_l) >= l.
        for x in next[lo..l.min(n)].iter_mut() {
            *x = 0.0;
        }
        lo = l.min(n);
        std::mem::swap(&mut p, &mut next);
    }
    Ok(done)
}

/// `G_{(1,l),(m,n)}` for `l = 1..=n` over the bulk of `field`.
pub fn bulk_left_column<S: WeightSource + ?Sized>(field: &S) -> Vec<f64> {
    let (m, n) = field.extents();
    let mut above = vec![f64::NEG_INFINITY; m + 2];
    let mut cur = vec![f64::NEG_INFINITY; m + 2];
    let mut row = vec![0.0; m + 1];
    let mut col = vec![0.0; n + 1];
    for j in (1..=n).rev() {
        field.fill_row(j, &mut row);
        cur[m + 1] = f64::NEG_INFINITY;
        for i in (1..=m).rev() {
            let best = if j == n && i == m { 0.0 } else { cur[i + 1].max(above[i]) };
            cur[i] = row[i] + best;
        }
        col[j] = cur[1];
        std::mem::swap(&mut above, &mut cur);
    }
    col
}

/// Per-replica output of [`exit_replica`]: conditional probabilities and
/// direct indicators, one per `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitSample {
    pub conditional: Vec<f64>,
    pub direct: Vec<bool>,
}

/// Conditional and direct estimates of `P{Z^{z,hor}_{(m,n)} > 0}` on one field.
pub fn exit_replica<S: WeightSource + ?Sized>(field: &S, zs: &[f64]) -> Result<ExitSample> {
    let (m, n) = field.extents();
    let mut lanes = Vec::with_capacity(2 * zs.len());
    for &z in zs {
        lanes.push(Lane::new(Variant::Hor, m, boundary_weights(field, hor_params(z)?)?, false)?);
        lanes.push(Lane::new(Variant::Ver, m, boundary_weights(field, ver_params(z)?)?, false)?);
    }
    let out = sweep(field, lanes, &[])?;
    let column = bulk_left_column(field);
    let mut conditional = Vec::with_capacity(zs.len());
    let mut direct = Vec::with_capacity(zs.len());
    let mut t = vec![0.0; n];
    for (k, &z) in zs.iter().enumerate() {
        let (hor, ver) = (out[2 * k].corner(), out[2 * k + 1].corner());
        for l in 1..=n {
            t[l - 1] = hor - column[l];
        }
        // t is nondecreasing up to rounding in the column sums.
        for l in 1..n {
            if t[l] < t[l - 1] {
                t[l] = t[l - 1];
            }
        }
        conditional.push(poisson_staircase(1.0 - z, &t)?);
        direct.push(hor > ver);
    }
    Ok(ExitSample { conditional, direct })
}

pub fn off_characteristic(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let (m, n) = (cfg.m, cfg.n);
    let zeta = zeta_fn(m as f64, n as f64)?;
    let zs: Vec<f64> = cfg.deltas.iter().map(|d| zeta + d).collect();
    let spec = SeedSpec::new(cfg.master_seed, "exit/off-characteristic", 0);
    let samples = replica_map(cfg.workers, cfg.aux_replicas, |r| {
        let field = LazyField::new(&spec.with_replica(r), m, n)?;
        exit_replica(&field, &zs)
    })?;
    rep.replicas += cfg.aux_replicas;
    let r = cfg.aux_replicas;
    let mut estimates = Vec::new();
    for (k, &d) in cfg.deltas.iter().enumerate() {
        let cond: Vec<f64> = samples.iter().map(|s| s.conditional[k]).collect();
        let hits = samples.iter().filter(|s| s.direct[k]).count() as f64;
        let param = format!("delta={d}");
        let (p, se) = (mean(&cond)?, mean_se(&cond)?);
        rep.stat_se(m, &param, "exit_prob_conditional", p, se, r);
        let f = hits / r as f64;
        rep.stat_se(m, &param, "exit_prob_direct", f, (f * (1.0 - f) / r as f64).sqrt(), r);
        rep.stat(m, &param, "N_delta_cubed", m as f64 * d.powi(3), r);
        estimates.push(p);
    }
    if cfg.deltas.len() < 3 {
        rep.skipped("C10", "decay fit needs at least three deltas");
        return Ok(());
    }
    if estimates.iter().any(|&p| p <= 0.0) {
        rep.verdict("C10", f64::NEG_INFINITY, format!("zero estimate in {estimates:?}"));
        return Ok(());
    }
    let xs: Vec<f64> = cfg.deltas.iter().map(|d| m as f64 * d.powi(3)).collect();
    let ys: Vec<f64> = estimates.iter().map(|p| p.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    rep.slope("ln P{Z>0} vs N delta^3", fit);
    let decrease = ys.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let strict = if decrease > 0.0 { decrease } else { -1.0 };
    rep.verdict(
        "C10",
        min_margin(&[strict, -fit.slope, fit.r2 - 0.8]),
        format!("estimates {estimates:?}, slope {:.4}, R2 {:.4}", fit.slope, fit.r2),
    );
    Ok(())
}

pub fn exit(cfg: &ExperimentConfig, data: &LadderData) -> Result<Report> {
    let mut rep = Report::default();
    super::scaling::exit_scaling(cfg, data, &mut rep)?;
    off_characteristic(cfg, &mut rep)?;
    Ok(rep)
}
