//! Exact distributional identities of the increment-stationary model, each
//! checked by Monte Carlo against its closed form or a second estimator.

use crate::analytic::{
    exp_quadratic_expansion, exp_quadratic_recursion, mean_deriv, mean_fn, moment_identity_rhs, rains_log_mgf,
    regularized_gamma_upper, BoundaryParam,
};
use crate::error::Result;
use crate::estimators::{bootstrap_se, ks_test, ks_two_sample, mc_summary, mean, mean_se, variance, variance_se};
use crate::lpp::{northeast_values, sweep, Lane, Variant};
use crate::pool::replica_map;
use crate::randfield::{boundary_weights, LazyField, SeedSpec};

use super::config::ExperimentConfig;
use super::result::{min_margin, Report};

fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

/// Corner values of `G^{w,z}` at `(m, n)`, one per replica.
fn two_sided_corners(cfg: &ExperimentConfig, id: &str, m: usize, n: usize, w: f64, z: f64, replicas: u64) -> Result<Vec<f64>> {
    let spec = SeedSpec::new(cfg.master_seed, id, 0);
    let params = BoundaryParam::new(w, z)?;
    replica_map(cfg.workers, replicas, |r| {
        let field = LazyField::new(&spec.with_replica(r), m, n)?;
        let lane = Lane::new(Variant::TwoSided, m, boundary_weights(&field, params)?, false)?;
        Ok(sweep(&field, vec![lane], &[])?[0].corner())
    })
}

pub fn rains(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::default();
    let (m, n, w, z) = (cfg.m, cfg.n, cfg.w, cfg.z);
    let r = cfg.replicas[0];
    let g = two_sided_corners(cfg, "rains", m, n, w, z, r)?;
    rep.replicas += r;
    let terms: Vec<f64> = g.iter().map(|x| ((w - z) * x).exp()).collect();
    let est = mean(&terms)?;
    let se = bootstrap_se(&terms, |s| s.iter().sum::<f64>() / s.len() as f64, cfg.bootstrap, &SeedSpec::new(cfg.master_seed, "rains/bootstrap", 0))?;
    let closed = rains_log_mgf(m as u64, n as u64, w, z)?.exp();
    let param = format!("w={w},z={z}");
    rep.stat(m, &param, "closed_form", closed, 0);
    rep.stat_se(m, &param, "mc_estimate", est, se, r);
    rep.stat(m, &param, "bootstrap_se", se, r);
    rep.point(m, &param, mc_summary(&g, mean_fn(m as f64, n as f64, z)?, &[1, 2], &[])?);
    rep.verdict("C2", 3.0 * se - (est - closed).abs(), format!("mc {est:.4} +- {se:.4} vs {closed:.4}"));
    Ok(rep)
}

pub fn stationarity(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::default();
    let z = cfg.z;
    let (m, n) = (cfg.m, cfg.n);

    // Mean identity on the auxiliary vertex.
    let [am, an] = cfg.aux_vertex;
    let g = two_sided_corners(cfg, "stationarity/mean", am, an, z, z, cfg.aux_replicas)?;
    rep.replicas += cfg.aux_replicas;
    let (mu, se) = (mean(&g)?, mean_se(&g)?);
    let want = mean_fn(am as f64, an as f64, z)?;
    rep.stat(am, format!("z={z}"), "mean_closed_form", want, 0);
    rep.stat_se(am, format!("z={z}"), "mean_mc", mu, se, cfg.aux_replicas);
    rep.verdict("C3", 3.0 * se - (mu - want).abs(), format!("mean {mu:.4} +- {se:.4} vs {want}"));

    // Interior increments on row n/2 and column m/2.
    let (row, colm) = (n / 2, m / 2);
    let probes: Vec<(usize, usize)> =
        (0..=m).map(|i| (i, row)).chain((0..=n).map(|j| (colm, j))).collect();
    let params = BoundaryParam::stationary(z)?;
    let spec = SeedSpec::new(cfg.master_seed, "stationarity/increments", 0);
    let r = cfg.replicas[0];
    let rows = replica_map(cfg.workers, r, |k| {
        let field = LazyField::new(&spec.with_replica(k), m, n)?;
        let lane = Lane::new(Variant::TwoSided, m, boundary_weights(&field, params)?, false)?;
        let out = sweep(&field, vec![lane], &probes)?.pop().expect("one lane");
        let v: Vec<f64> = out.probes.iter().map(|p| p.value).collect();
        let hor: Vec<f64> = (1..=m).map(|i| v[i] - v[i - 1]).collect();
        let ver: Vec<f64> = (1..=n).map(|j| v[m + 1 + j] - v[m + j]).collect();
        Ok((hor, ver))
    })?;
    rep.replicas += r;
    let hor: Vec<f64> = rows.iter().flat_map(|x| x.0.iter().copied()).collect();
    let ver: Vec<f64> = rows.iter().flat_map(|x| x.1.iter().copied()).collect();
    let (dh, ph) = ks_test(&hor, exp_cdf(z))?;
    let (dv, pv) = ks_test(&ver, exp_cdf(1.0 - z))?;
    rep.stat(m, format!("row={row}"), "ks_p_horizontal", ph, r);
    rep.stat(m, format!("row={row}"), "ks_d_horizontal", dh, r);
    rep.stat(m, format!("column={colm}"), "ks_p_vertical", pv, r);
    rep.stat(m, format!("column={colm}"), "ks_d_vertical", dv, r);
    rep.verdict("C4", ph.min(pv) - 0.01, format!("p-values {ph:.4} (horizontal), {pv:.4} (vertical)"));

    // Northeast reversal: G~_{(1,1)} has the law of G^z_{(m,n)}, and the
    // bottom-row increments of G~ are i.i.d. Exp(z).
    let k = (m / 2).max(2);
    let ne_spec = SeedSpec::new(cfg.master_seed, "stationarity/northeast", 0);
    let st_spec = SeedSpec::new(cfg.master_seed, "stationarity/reference", 0);
    let pairs = replica_map(cfg.workers, r, |q| {
        let field = LazyField::new(&ne_spec.with_replica(q), m, n)?;
        let ne = northeast_values(&field, z)?;
        let reference = LazyField::new(&st_spec.with_replica(q), m, n)?;
        let lane = Lane::new(Variant::TwoSided, m, boundary_weights(&reference, params)?, false)?;
        let g = sweep(&reference, vec![lane], &[])?[0].corner();
        Ok((ne.from_origin(), ne.value(1, 1) - ne.value(k, 1), g))
    })?;
    rep.replicas += 2 * r;
    let tilde: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let incr: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let reference: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let (_, p_law) = ks_two_sample(&tilde, &reference)?;
    let shape = (k - 1) as u32;
    let (_, p_inc) = ks_test(&incr, |x| if x <= 0.0 { 0.0 } else { 1.0 - regularized_gamma_upper(shape, z * x).unwrap_or(1.0) })?;
    rep.stat(m, format!("u={z}"), "northeast_two_sample_ks_p", p_law, r);
    rep.stat(m, format!("u={z},k={k}"), "northeast_increment_ks_p", p_inc, r);
    rep.verdict("stationarity.northeast", p_law.min(p_inc) - 0.01, format!("p-values {p_law:.4}, {p_inc:.4}"));
    Ok(rep)
}

/// Sum of the horizontal boundary weights up to the exit, zero for a
/// vertical exit.
fn boundary_sum_at_exit(hor: &[f64], exit: (u32, u32)) -> f64 {
    hor[1..=exit.0 as usize].iter().sum()
}

pub fn variance_identity(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::default();
    let (m, n, z) = (cfg.m, cfg.n, cfg.z);
    let params = BoundaryParam::stationary(z)?;
    let spec = SeedSpec::new(cfg.master_seed, "variance-identity", 0);
    let r = cfg.replicas[0];
    let pairs = replica_map(cfg.workers, r, |k| {
        let field = LazyField::new(&spec.with_replica(k), m, n)?;
        let weights = boundary_weights(&field, params)?;
        let hor = weights.hor.clone();
        let lane = Lane::new(Variant::TwoSided, m, weights, true)?;
        let out = sweep(&field, vec![lane], &[])?.pop().expect("one lane");
        Ok((out.corner(), boundary_sum_at_exit(&hor, out.corner_exit().expect("labels tracked"))))
    })?;
    rep.replicas += r;
    let g: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let s: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (x, y) = (m as f64, n as f64);
    let lhs = variance(&g)?;
    let rhs = -x / (z * z) + y / ((1.0 - z) * (1.0 - z)) + 2.0 / z * mean(&s)?;
    // Paired influence functions of both sides give the SE of the difference.
    let gbar = mean(&g)?;
    let infl: Vec<f64> = pairs.iter().map(|(gi, si)| (gi - gbar).powi(2) - 2.0 / z * si).collect();
    let se = mean_se(&infl)?;
    let naive = (variance_se(&g)?.powi(2) + (2.0 / z * mean_se(&s)?).powi(2)).sqrt();
    let param = format!("z={z}");
    rep.stat_se(m, &param, "variance_mc", lhs, variance_se(&g)?, r);
    rep.stat_se(m, &param, "variance_identity_rhs", rhs, 2.0 / z * mean_se(&s)?, r);
    rep.stat(m, &param, "paired_se", se, r);
    rep.stat(m, &param, "independent_se", naive, r);
    rep.verdict("C5", 3.0 * se - (lhs - rhs).abs(), format!("Var {lhs:.4} vs rhs {rhs:.4}, paired SE {se:.4}"));
    Ok(rep)
}

pub fn moment_identity(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::default();
    let (m, n, z, h) = (cfg.m, cfg.n, cfg.z, cfg.h);
    let (x, y) = (m as f64, n as f64);
    let centre = mean_fn(x, y, z)?;
    let spec = SeedSpec::new(cfg.master_seed, "moment-identity", 0);
    let r = cfg.replicas[0];
    // G^{w,z} at w = z - h, z, z + h on common fields.
    let rows = replica_map(cfg.workers, r, |k| {
        let field = LazyField::new(&spec.with_replica(k), m, n)?;
        let lanes = [z - h, z, z + h]
            .iter()
            .map(|&w| Lane::new(Variant::TwoSided, m, boundary_weights(&field, BoundaryParam::new(w, z)?)?, false))
            .collect::<Result<Vec<_>>>()?;
        let out = sweep(&field, lanes, &[])?;
        Ok([out[0].corner() - centre, out[1].corner() - centre, out[2].corner() - centre])
    })?;
    rep.replicas += r;
    let col = |k: usize, p: i32| -> Vec<f64> { rows.iter().map(|row| row[k].powi(p)).collect() };
    let fd1 = |p: i32| -> Vec<f64> { rows.iter().map(|row| (row[2].powi(p) - row[0].powi(p)) / (2.0 * h)).collect() };
    let fd2 = |p: i32| -> Vec<f64> {
        rows.iter().map(|row| (row[2].powi(p) - 2.0 * row[1].powi(p) + row[0].powi(p)) / (h * h)).collect()
    };

    // p = 2: E[(G - M)^2] = dM/dz - 2 d/dw E[G^{w,z} - M].
    let d1 = fd1(1);
    let rhs2 = moment_identity_rhs(m as u64, n as u64, z, 2, |order, k| match (order, k) {
        (1, 1) => mean(&d1),
        _ => unreachable!("p = 2 needs only the first derivative"),
    })?;
    let sq = col(1, 2);
    let lhs2 = mean(&sq)?;
    let infl: Vec<f64> = sq.iter().zip(&d1).map(|(a, b)| a + 2.0 * b).collect();
    let se2 = mean_se(&infl)?;
    let param = format!("z={z},h={h}");
    rep.stat(m, &param, "dM_dz", mean_deriv(x, y, z, 1)?, 0);
    rep.stat_se(m, &param, "second_moment_mc", lhs2, mean_se(&sq)?, r);
    rep.stat_se(m, &param, "second_moment_identity_rhs", rhs2, 2.0 * mean_se(&d1)?, r);
    rep.stat(m, &param, "paired_se", se2, r);
    rep.verdict("C6", 3.0 * se2 - (lhs2 - rhs2).abs(), format!("E(G-M)^2 {lhs2:.4} vs rhs {rhs2:.4}, SE {se2:.4}"));

    if cfg.powers.contains(&3) {
        let (d2, d1sq) = (fd2(1), fd1(2));
        let rhs3 = moment_identity_rhs(m as u64, n as u64, z, 3, |order, k| match (order, k) {
            (2, 1) => mean(&d2),
            (1, 2) => mean(&d1sq),
            _ => unreachable!("p = 3 needs orders (2,1) and (1,2)"),
        })?;
        let cube = col(1, 3);
        rep.stat_se(m, &param, "third_moment_mc", mean(&cube)?, mean_se(&cube)?, r);
        rep.stat_se(m, &param, "third_moment_identity_rhs", rhs3, 3.0 * mean_se(&d2)? + 3.0 * mean_se(&d1sq)?, r);
    }

    // Exact expansion against nested derivatives of exp(x + x^2).
    let mut agree = 0;
    for p in 1..=5 {
        if exp_quadratic_expansion(p)? == exp_quadratic_recursion(p) {
            agree += 1;
        }
    }
    rep.stat(0, "p<=5", "faa_di_bruno_orders_agreeing", agree as f64, 0);
    rep.verdict("C18", if agree == 5 { 0.0 } else { -1.0 }, format!("{agree} of 5 orders agree exactly"));
    Ok(rep)
}

/// Corner values of `G^z` at `(m, n)` for every `z` of the grid, on common fields.
fn stationary_grid(cfg: &ExperimentConfig, id: &str, m: usize, n: usize, replicas: u64) -> Result<Vec<Vec<f64>>> {
    let spec = SeedSpec::new(cfg.master_seed, id, 0);
    replica_map(cfg.workers, replicas, |k| {
        let field = LazyField::new(&spec.with_replica(k), m, n)?;
        let lanes = cfg
            .z_grid
            .iter()
            .map(|&z| Lane::new(Variant::TwoSided, m, boundary_weights(&field, BoundaryParam::stationary(z)?)?, false))
            .collect::<Result<Vec<_>>>()?;
        Ok(sweep(&field, lanes, &[])?.iter().map(|o| o.corner()).collect())
    })
}

/// Variance difference of adjacent grid columns with its paired SE.
fn variance_steps(rows: &[Vec<f64>], lanes: usize) -> Result<Vec<(f64, f64)>> {
    let cols: Vec<Vec<f64>> = (0..lanes).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    let means = cols.iter().map(|c| mean(c)).collect::<Result<Vec<_>>>()?;
    (1..lanes)
        .map(|k| {
            let infl: Vec<f64> =
                rows.iter().map(|r| (r[k] - means[k]).powi(2) - (r[k - 1] - means[k - 1]).powi(2)).collect();
            Ok((variance(&cols[k])? - variance(&cols[k - 1])?, mean_se(&infl)?))
        })
        .collect()
}

pub fn var_lipschitz(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::default();
    if cfg.z_grid.len() < 2 {
        rep.skipped("var-lipschitz", "needs at least two rates");
        return Ok(rep);
    }
    let lanes = cfg.z_grid.len();
    let [am, an] = cfg.aux_vertex;
    let small = stationary_grid(cfg, "var-lipschitz/calibration", am, an, cfg.aux_replicas)?;
    rep.replicas += cfg.aux_replicas;
    let mut c_hat: f64 = 0.0;
    for (k, (dv, se)) in variance_steps(&small, lanes)?.into_iter().enumerate() {
        let dz = cfg.z_grid[k + 1] - cfg.z_grid[k];
        rep.stat_se(am, format!("z={},{}", cfg.z_grid[k], cfg.z_grid[k + 1]), "variance_step", dv, se, cfg.aux_replicas);
        c_hat = c_hat.max(dv.abs() / (am as f64 * dz.abs()));
    }
    rep.stat(am, "calibration", "lipschitz_constant", c_hat, cfg.aux_replicas);

    let r = cfg.replicas[0];
    let large = stationary_grid(cfg, "var-lipschitz/gate", cfg.m, cfg.n, r)?;
    rep.replicas += r;
    let mut margins = Vec::new();
    for (k, (dv, se)) in variance_steps(&large, lanes)?.into_iter().enumerate() {
        let dz = cfg.z_grid[k + 1] - cfg.z_grid[k];
        let bound = 2.0 * c_hat * cfg.m as f64 * dz.abs();
        let param = format!("z={},{}", cfg.z_grid[k], cfg.z_grid[k + 1]);
        rep.stat_se(cfg.m, &param, "variance_step", dv, se, r);
        rep.stat(cfg.m, &param, "lipschitz_bound", bound, 0);
        margins.push(bound + 3.0 * se - dv.abs());
    }
    rep.verdict("var-lipschitz", min_margin(&margins), format!("calibrated constant {c_hat:.4} at N = {am}"));
    Ok(rep)
}
