//! Named Monte Carlo experiments, their verdicts and result persistence.
//!
//! Every experiment is deterministic in its [`ExperimentConfig`]: replica
//! `r` of a sub-experiment with id `id` draws from
//! `derive_seed(master_seed, id, r)` and results are merged in replica
//! order, so the worker count never changes a statistic.

mod config;
mod exit;
mod identities;
mod ladder;
mod result;
mod scaling;
mod sums;

use std::time::Instant;

use crate::analytic::zeta_fn;
use crate::error::{Error, Result};

pub use crate::randfield::derive_seed;
pub use config::{ExperimentConfig, OnExisting, DEFAULT_SEED};
pub use exit::{bulk_left_column, exit_replica, poisson_staircase, ExitSample};
pub use ladder::{ladder_id, sample_ladder, LadderData, LadderPoint, LadderRequest, LaneKind, LanePoint};
pub use result::{
    csv_path, export_long_csv, json_path, load_result, min_margin, persist, render_csv, render_json, timing_path,
    ExperimentResult, PointRecord, Report, SlopeRecord, Statistic, Timing, Verdict, CSV_HEADER, LONG_HEADER, SCHEMA,
};

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Verdict ids the entry always emits.
    pub criteria: &'static [&'static str],
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "rains",
        description: "m.g.f. E exp((w - z) G^{w,z}) against its closed form",
        criteria: &["C2"],
    },
    CatalogEntry {
        name: "stationarity",
        description: "mean identity, exponential increments and the northeast reversal of G^z",
        criteria: &["C3", "C4", "stationarity.northeast"],
    },
    CatalogEntry {
        name: "variance-identity",
        description: "Var G^z against the boundary sum up to the exit",
        criteria: &["C5"],
    },
    CatalogEntry {
        name: "moment-identity",
        description: "second central moment against finite differences in w; exact partition expansion",
        criteria: &["C6", "C18"],
    },
    CatalogEntry {
        name: "bulk-moments",
        description: "log-log slopes of E|G_N - gamma_N|^p on the diagonal",
        criteria: &["C7"],
    },
    CatalogEntry {
        name: "boundary-kpz",
        description: "moment slopes of G^{w,hor} with w = zeta + K N^{-1/3}",
        criteria: &["boundary-kpz[K=-1]", "boundary-kpz[K=0]", "boundary-kpz[K=1]"],
    },
    CatalogEntry {
        name: "gauss",
        description: "linear variance growth and normality of G^{w,hor} below the characteristic rate",
        criteria: &["C8"],
    },
    CatalogEntry {
        name: "tails",
        description: "right and left tails of G_N on the s^{3/2} scale",
        criteria: &["C11"],
    },
    CatalogEntry {
        name: "exit",
        description: "exit point scale on the characteristic and its decay off it",
        criteria: &["C9", "C10"],
    },
    CatalogEntry {
        name: "inc-tail",
        description: "tail of G^{zeta,hor} - G on the s^{3/2} scale",
        criteria: &["C12"],
    },
    CatalogEntry {
        name: "mean-gap",
        description: "(gamma_N - E G_N) / N^{1/3} positive and stable",
        criteria: &["C13"],
    },
    CatalogEntry {
        name: "var-lipschitz",
        description: "|Var G^w - Var G^z| <= C N |z - w| with C calibrated at a small vertex",
        criteria: &["var-lipschitz"],
    },
    CatalogEntry {
        name: "sums-tails",
        description: "tilted streams, Chernoff and gamma tails, maximal inequality, stretched-exponential integrals",
        criteria: &["C15", "C16", "C17", "sums-tails.maxineq-derived", "sums-tails.intbd"],
    },
];

pub fn catalog_entry(name: &str) -> Result<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

/// Lanes an experiment reads from the diagonal ladder.
pub fn ladder_lanes(cfg: &ExperimentConfig) -> Result<Vec<LaneKind>> {
    let zeta = zeta_fn(1.0, 1.0)?;
    Ok(match cfg.name.as_str() {
        "bulk-moments" | "mean-gap" | "tails" => vec![LaneKind::Bulk],
        "boundary-kpz" => cfg.kpz_offsets.iter().map(|&k| LaneKind::HorKpz(k)).collect(),
        "gauss" => vec![LaneKind::Hor(cfg.w)],
        "exit" => vec![LaneKind::Hor(zeta)],
        "inc-tail" => vec![LaneKind::Bulk, LaneKind::Hor(zeta)],
        _ => vec![],
    })
}

pub fn ladder_request(cfg: &ExperimentConfig) -> Result<LadderRequest> {
    Ok(LadderRequest {
        master_seed: cfg.master_seed,
        workers: cfg.workers,
        points: cfg.ladder.iter().enumerate().map(|(k, &n)| (n, cfg.replicas_at(k))).collect(),
        lanes: ladder_lanes(cfg)?,
    })
}

/// Runs the evaluator of `cfg.name`. Ladder experiments read `data` when
/// given, which must cover the configured sizes and lanes, and sample their
/// own ladder otherwise.
pub fn evaluate(cfg: &ExperimentConfig, data: Option<&LadderData>) -> Result<Report> {
    cfg.validate()?;
    let owned;
    let data = match (cfg.uses_ladder(), data) {
        (false, _) => None,
        (true, Some(d)) => Some(d),
        (true, None) => {
            owned = sample_ladder(&ladder_request(cfg)?)?;
            Some(&owned)
        }
    };
    let mut rep = match (cfg.name.as_str(), data) {
        ("rains", _) => identities::rains(cfg)?,
        ("stationarity", _) => identities::stationarity(cfg)?,
        ("variance-identity", _) => identities::variance_identity(cfg)?,
        ("moment-identity", _) => identities::moment_identity(cfg)?,
        ("var-lipschitz", _) => identities::var_lipschitz(cfg)?,
        ("sums-tails", _) => sums::sums_tails(cfg)?,
        ("bulk-moments", Some(d)) => scaling::bulk_moments(cfg, d)?,
        ("boundary-kpz", Some(d)) => scaling::boundary_kpz(cfg, d)?,
        ("gauss", Some(d)) => scaling::gauss(cfg, d)?,
        ("tails", Some(d)) => scaling::tails(cfg, d)?,
        ("exit", Some(d)) => exit::exit(cfg, d)?,
        ("inc-tail", Some(d)) => scaling::inc_tail(cfg, d)?,
        ("mean-gap", Some(d)) => scaling::mean_gap(cfg, d)?,
        (other, _) => return Err(Error::UnknownExperiment(other.to_string())),
    };
    if let Some(d) = data {
        rep.replicas += d.replicas();
    }
    Ok(rep)
}

/// Runs one experiment and persists it when `config.output` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let rep = evaluate(config, None)?;
    let result = rep.into_result(config.clone(), start.elapsed().as_secs_f64());
    if let Some(dir) = &config.output {
        persist(&result, dir)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::default_for(name).unwrap();
        c.replicas = vec![200];
        c.aux_replicas = 200;
        c.m = c.m.min(10);
        c.n = c.n.min(10);
        c.aux_vertex = [c.aux_vertex[0].min(6), c.aux_vertex[1].min(6)];
        if c.uses_ladder() {
            c.ladder = vec![16, 32, 64];
        }
        c
    }

    #[test]
    fn every_entry_emits_its_criteria() {
        for e in CATALOG {
            if e.name == "sums-tails" {
                continue;
            }
            let res = run_experiment(&small(e.name)).unwrap();
            for id in e.criteria {
                let n = res.verdicts.iter().filter(|v| v.id == *id).count();
                assert_eq!(n, 1, "{} emits {id} {n} times", e.name);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        for name in ["rains", "exit", "var-lipschitz"] {
            let mut a = small(name);
            a.workers = 1;
            let mut b = a.clone();
            b.workers = 4;
            let (ra, rb) = (run_experiment(&a).unwrap(), run_experiment(&b).unwrap());
            assert_eq!(render_csv(&ra).unwrap(), render_csv(&rb).unwrap(), "{name}");
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(catalog_entry("bogus"), Err(Error::UnknownExperiment(_))));
        assert!(matches!(ExperimentConfig::default_for("bogus"), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn rerun_errors_or_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small("rains");
        c.output = Some(dir.path().to_path_buf());
        run_experiment(&c).unwrap();
        assert!(run_experiment(&c).is_err());
        c.on_existing = OnExisting::Verify;
        run_experiment(&c).unwrap();
        c.master_seed += 1;
        assert!(run_experiment(&c).is_err());
    }
}
