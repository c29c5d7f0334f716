//! Evaluators over diagonal ladder samples.

use crate::analytic::{mean_fn, shape_fn, zeta_fn};
use crate::error::Result;
use crate::estimators::{linear_fit, loglog_slope, mc_summary, mean, mean_se, median, normal_ks, variance, variance_se, LineFit};
use crate::tilt::{importance_tail, ImportanceTail};
use crate::randfield::SeedSpec;

use super::config::ExperimentConfig;
use super::ladder::{LadderData, LaneKind};
use super::result::{min_margin, Report};

const VAR_SLOPE: f64 = 2.0 / 3.0;
const VAR_TOL: f64 = 0.1;
const ABS_SLOPE: f64 = 1.0 / 3.0;
const ABS_TOL: f64 = 0.08;

fn gamma_n(n: usize) -> Result<f64> {
    shape_fn(n as f64, n as f64)
}

fn cube_root(n: usize) -> f64 {
    (n as f64).cbrt()
}

fn window_margin(fit: &LineFit, target: f64, tol: f64) -> f64 {
    tol - (fit.slope - target).abs()
}

/// Moment slopes of one lane centred at `gamma_N`; returns the variance and
/// first absolute moment fits.
fn kpz_slopes(cfg: &ExperimentConfig, data: &LadderData, kind: LaneKind, rep: &mut Report) -> Result<(LineFit, Option<LineFit>)> {
    let tag = kind.label();
    let mut var_pts = Vec::new();
    let mut mom_pts: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.powers.len()];
    for &n in &cfg.ladder {
        let lane = data.at(n)?.lane(kind)?;
        let r = lane.values.len() as u64;
        let gamma = gamma_n(n)?;
        let mut summary = mc_summary(&lane.values, gamma, &cfg.powers, &[])?;
        summary.seed = Some(SeedSpec::new(cfg.master_seed, super::ladder::ladder_id(n), 0));
        let var = variance(&lane.values)?;
        rep.stat_se(n, &tag, "variance", var, variance_se(&lane.values)?, r);
        rep.stat_se(n, &tag, "mean", summary.mean, mean_se(&lane.values)?, r);
        var_pts.push((n as f64, var));
        for (k, &p) in cfg.powers.iter().enumerate() {
            let terms: Vec<f64> = lane.values.iter().map(|x| (x - gamma).abs().powi(p as i32)).collect();
            rep.stat_se(n, &tag, format!("abs_moment_{p}"), summary.central_moments[&p], mean_se(&terms)?, r);
            mom_pts[k].push((n as f64, summary.central_moments[&p]));
        }
        rep.point(n, &tag, summary);
    }
    let var_fit = loglog_slope(&var_pts)?;
    rep.slope(format!("{tag} ln Var vs ln N"), var_fit);
    let mut first = None;
    for (k, &p) in cfg.powers.iter().enumerate() {
        let fit = loglog_slope(&mom_pts[k])?;
        rep.slope(format!("{tag} ln E|G-gamma|^{p} vs ln N"), fit);
        if p == 1 {
            first = Some(fit);
        }
    }
    Ok((var_fit, first))
}

fn need_three(cfg: &ExperimentConfig, rep: &mut Report, id: &str) -> bool {
    if cfg.ladder.len() < 3 {
        rep.skipped(id, "slope fits need at least three ladder points");
        return false;
    }
    true
}

pub fn bulk_moments(cfg: &ExperimentConfig, data: &LadderData) -> Result<Report> {
    let mut rep = Report::default();
    if !need_three(cfg, &mut rep, "C7") {
        return Ok(rep);
    }
    let (var_fit, first) = kpz_slopes(cfg, data, LaneKind::Bulk, &mut rep)?;
    match first {
        Some(abs_fit) => rep.verdict(
            "C7",
            window_margin(&var_fit, VAR_SLOPE, VAR_TOL).min(window_margin(&abs_fit, ABS_SLOPE, ABS_TOL)),
            format!("var slope {:.4}, first-moment slope {:.4}", var_fit.slope, abs_fit.slope),
        ),
        None => rep.skipped("C7", "powers must include 1"),
    }
    Ok(rep)
}

pub fn boundary_kpz(cfg: &ExperimentConfig, data: &LadderData) -> Result<Report> {
    let mut rep = Report::default();
    for &k in &cfg.kpz_offsets {
        let id = format!("boundary-kpz[K={k}]");
        if !need_three(cfg, &mut rep, &id) {
            continue;
        }
        let (var_fit, first) = kpz_slopes(cfg, data, LaneKind::HorKpz(k), &mut rep)?;
        match first {
            Some(abs_fit) => rep.verdict(
                id,
                window_margin(&var_fit, VAR_SLOPE, VAR_TOL).min(window_margin(&abs_fit, ABS_SLOPE, ABS_TOL)),
                format!("var slope {:.4}, first-moment slope {:.4}", var_fit.slope, abs_fit.slope),
            ),
            None => rep.skipped(id, "powers must include 1"),
        }
    }
    Ok(rep)
}

pub fn gauss(cfg: &ExperimentConfig, data: &LadderData) -> Result<Report> {
    let mut rep = Report::default();
    if !need_three(cfg, &mut rep, "C8") {
        return Ok(rep);
    }
    let kind = LaneKind::Hor(cfg.w);
    let tag = kind.label();
    let mut var_pts = Vec::new();
    let mut exit_ratio = Vec::new();
    for &n in &cfg.ladder {
        let lane = data.at(n)?.lane(kind)?;
        let r = lane.values.len() as u64;
        let (x, zeta) = (n as f64, zeta_fn(n as f64, n as f64)?);
        let centering = mean_fn(x, x, cfg.w)?;
        let summary = mc_summary(&lane.values, centering, &cfg.powers, &[])?;
        let var = variance(&lane.values)?;
        rep.stat_se(n, &tag, "variance", var, variance_se(&lane.values)?, r);
        rep.stat_se(n, &tag, "mean_minus_M", summary.mean - centering, mean_se(&lane.values)?, r);
        rep.point(n, &tag, summary);
        var_pts.push((x, var));
        let exits: Vec<f64> = lane.exits.as_ref().expect("boundary lane").iter().map(|&e| e as f64).collect();
        let scaled = mean(&exits)? / ((zeta - cfg.w) * x);
        rep.stat_se(n, &tag, "exit_mean_over_drift_N", scaled, mean_se(&exits)? / ((zeta - cfg.w) * x), r);
        exit_ratio.push(scaled);
    }
    let var_fit = loglog_slope(&var_pts)?;
    rep.slope(format!("{tag} ln Var vs ln N"), var_fit);
    let top = *cfg.ladder.last().expect("nonempty ladder");
    let (d, p) = normal_ks(&data.at(top)?.lane(kind)?.values)?;
    rep.stat(top, &tag, "normal_ks_d", d, data.at(top)?.replicas);
    rep.stat(top, &tag, "normal_ks_p", p, data.at(top)?.replicas);
    let ratio = exit_ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / exit_ratio.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.stat(0, &tag, "exit_ratio_max_over_min", ratio, 0);
    let margin = min_margin(&[0.1 - (var_fit.slope - 1.0).abs(), 0.03 - d, 2.0 - ratio]);
    rep.verdict("C8", margin, format!("var slope {:.4}, KS D {:.4} at N = {top}, exit ratio {:.3}", var_fit.slope, d, ratio));
    Ok(rep)
}

/// `ln freq` against `x` with a negative-slope and `R^2` requirement.
fn tail_fit(rep: &mut Report, name: &str, xs: &[f64], freqs: &[f64], r2_min: f64) -> Result<f64> {
    if freqs.iter().any(|&f| f <= 0.0) {
        rep.stat(0, name, "zero_frequency", 1.0, 0);
        return Ok(f64::NEG_INFINITY);
    }
    let ys: Vec<f64> = freqs.iter().map(|f| f.ln()).collect();
    let fit = linear_fit(xs, &ys)?;
    rep.slope(name, fit);
    Ok((fit.r2 - r2_min).min(-fit.slope))
}

pub fn tails(cfg: &ExperimentConfig, data: &LadderData) -> Result<Report> {
    let mut rep = Report::default();
    let n = *cfg.ladder.last().expect("nonempty ladder");
    let values = &data.at(n)?.lane(LaneKind::Bulk)?.values;
    let r = values.len() as f64;
    let (gamma, scale) = (gamma_n(n)?, cube_root(n));
    let mut right = Vec::new();
    let mut left = Vec::new();
    for &s in &cfg.s_grid {
        let up = values.iter().filter(|&&x| x >= gamma + s * scale).count() as f64 / r;
        let down = values.iter().filter(|&&x| x <= gamma - s * scale).count() as f64 / r;
        let param = format!("s={s}");
        rep.stat_se(n, &param, "right_tail_freq", up, (up * (1.0 - up) / r).sqrt(), r as u64);
        rep.stat_se(n, &param, "left_tail_freq", down, (down * (1.0 - down) / r).sqrt(), r as u64);
        right.push(up);
        left.push(down);
    }
    if cfg.s_grid.len() < 3 {
        rep.skipped("C11", "tail fits need at least three s values");
        return Ok(rep);
    }
    let x32: Vec<f64> = cfg.s_grid.iter().map(|s| s.powf(1.5)).collect();
    let x3: Vec<f64> = cfg.s_grid.iter().map(|s| s.powi(3)).collect();
    let m_right = tail_fit(&mut rep, "right tail ln P vs s^{3/2}", &x32, &right, 0.9)?;
    let m_left = tail_fit(&mut rep, "left tail ln P vs s^{3/2}", &x32, &left, 0.85)?;
    // The sharper left exponent is reported only.
    tail_fit(&mut rep, "left tail ln P vs s^3", &x3, &left, 0.0)?;
    rep.verdict("C11", m_right.min(m_left), format!("right {right:?}, left {left:?}"));

    // Boundary-model right tail by importance sampling, reported.
    let zeta = zeta_fn(n as f64, n as f64)?;
    let norm_cbrt = ((2 * n) as f64).cbrt();
    for &s in cfg.s_grid.iter().filter(|&&s| s >= 3.0) {
        let is = ImportanceTail {
            seed: SeedSpec::new(cfg.master_seed, format!("tails/importance/s={s}"), 0),
            v: (n, n),
            w: zeta,
            theta: 0.5 * s.sqrt() / norm_cbrt,
            sites: None,
            s: s * scale / norm_cbrt,
            replicas: (r as u64).min(1000),
            workers: cfg.workers,
        };
        let est = importance_tail(&is)?;
        rep.stat_se(n, format!("s={s}"), "boundary_right_tail_importance", est.estimate, est.se, est.replicas);
        rep.replicas += est.replicas;
    }
    Ok(rep)
}

pub fn inc_tail(cfg: &ExperimentConfig, data: &LadderData) -> Result<Report> {
    let mut rep = Report::default();
    let n = *cfg.ladder.last().expect("nonempty ladder");
    let point = data.at(n)?;
    let zeta = zeta_fn(n as f64, n as f64)?;
    let bulk = &point.lane(LaneKind::Bulk)?.values;
    let hor = &point.lane(LaneKind::Hor(zeta))?.values;
    let diff: Vec<f64> = hor.iter().zip(bulk).map(|(h, b)| h - b).collect();
    let r = diff.len() as f64;
    let scale = cube_root(n);
    rep.stat_se(n, "w=zeta", "mean_increment_over_cbrt_N", mean(&diff)? / scale, mean_se(&diff)? / scale, r as u64);
    let mut freqs = Vec::new();
    for &s in &cfg.s_grid {
        let f = diff.iter().filter(|&&d| d >= s * scale).count() as f64 / r;
        rep.stat_se(n, format!("s={s}"), "increment_tail_freq", f, (f * (1.0 - f) / r).sqrt(), r as u64);
        freqs.push(f);
    }
    if cfg.s_grid.len() < 3 {
        rep.skipped("C12", "tail fit needs at least three s values");
        return Ok(rep);
    }
    let decrease = freqs.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let x32: Vec<f64> = cfg.s_grid.iter().map(|s| s.powf(1.5)).collect();
    let fit_margin = tail_fit(&mut rep, "increment tail ln P vs s^{3/2}", &x32, &freqs, 0.8)?;
    // Strict decrease: a tie gives a negative margin.
    let strict = if decrease > 0.0 { decrease } else { -1.0 };
    rep.verdict("C12", fit_margin.min(strict), format!("frequencies {freqs:?}"));
    Ok(rep)
}

pub fn mean_gap(cfg: &ExperimentConfig, data: &LadderData) -> Result<Report> {
    let mut rep = Report::default();
    let mut gaps = Vec::new();
    let mut margins = Vec::new();
    for &n in &cfg.ladder {
        let values = &data.at(n)?.lane(LaneKind::Bulk)?.values;
        let scale = cube_root(n);
        let gamma = gamma_n(n)?;
        let (m, se) = (mean(values)?, mean_se(values)?);
        let gap = (gamma - m) / scale;
        rep.stat_se(n, "bulk", "mean_gap_over_cbrt_N", gap, se / scale, values.len() as u64);
        margins.push(gap - 3.0 * se / scale);
        margins.push((gamma - m + 3.0 * se) / scale);
        gaps.push(gap);
    }
    let ratio = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.stat(0, "bulk", "gap_ratio_max_over_min", ratio, 0);
    margins.push(if ratio > 0.0 { 2.0 - ratio } else { f64::NEG_INFINITY });
    rep.verdict("C13", min_margin(&margins), format!("gaps {gaps:?}"));
    Ok(rep)
}

/// Median of `Z^{zeta,hor}_N / N^{2/3}` over the ladder.
pub fn exit_scaling(cfg: &ExperimentConfig, data: &LadderData, rep: &mut Report) -> Result<()> {
    let mut medians = Vec::new();
    for &n in &cfg.ladder {
        let zeta = zeta_fn(n as f64, n as f64)?;
        let lane = data.at(n)?.lane(LaneKind::Hor(zeta))?;
        let scaled: Vec<f64> =
            lane.exits.as_ref().expect("boundary lane").iter().map(|&e| e as f64 / (n as f64).powf(2.0 / 3.0)).collect();
        let med = median(&scaled)?;
        rep.stat(n, "w=zeta", "median_exit_over_N23", med, scaled.len() as u64);
        rep.stat_se(n, "w=zeta", "mean_exit_over_N23", mean(&scaled)?, mean_se(&scaled)?, scaled.len() as u64);
        medians.push(med);
    }
    let hi = medians.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = medians.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = hi / lo;
    rep.stat(0, "w=zeta", "median_ratio_max_over_min", ratio, 0);
    let margin = min_margin(&[lo - 0.1, 10.0 - hi, if lo > 0.0 { 2.0 - ratio } else { f64::NEG_INFINITY }]);
    rep.verdict("C9", margin, format!("medians {medians:?}"));
    Ok(())
}
