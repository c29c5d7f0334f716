use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::CATALOG;

/// What to do when the output files already exist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnExisting {
    #[default]
    Error,
    /// Recompute and require byte-identical files.
    Verify,
}

/// Flat parameter set shared by every catalog entry. Each experiment reads
/// the fields listed for it in [`CATALOG`]; the rest are echoed unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub master_seed: u64,
    // Run-control fields are left out of the echo so that reruns with other
    // workers or another resume policy produce identical files.
    #[serde(default = "one", skip_serializing)]
    pub workers: usize,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub on_existing: OnExisting,
    /// Diagonal sizes `N`, strictly increasing.
    pub ladder: Vec<usize>,
    /// Replicas per ladder point, or a single entry used everywhere.
    pub replicas: Vec<u64>,
    pub m: usize,
    pub n: usize,
    /// Secondary vertex, see the catalog for its role.
    pub aux_vertex: [usize; 2],
    pub aux_replicas: u64,
    pub w: f64,
    pub z: f64,
    /// Finite-difference step in `w`.
    pub h: f64,
    pub deltas: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub powers: Vec<u32>,
    pub kpz_offsets: Vec<f64>,
    pub thetas: Vec<f64>,
    pub z_grid: Vec<f64>,
    pub sizes: Vec<u64>,
    pub mus: Vec<f64>,
    pub bootstrap: usize,
}

fn one() -> usize {
    1
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    fn base(name: &str) -> Self {
        Self {
            name: name.to_string(),
            master_seed: DEFAULT_SEED,
            workers: 1,
            output: None,
            on_existing: OnExisting::Error,
            ladder: vec![128, 256, 512, 1024],
            replicas: vec![5000, 5000, 2000, 1000],
            m: 0,
            n: 0,
            aux_vertex: [0, 0],
            aux_replicas: 0,
            w: 0.5,
            z: 0.5,
            h: 0.01,
            deltas: vec![],
            s_grid: vec![],
            powers: vec![1, 2, 3],
            kpz_offsets: vec![],
            thetas: vec![],
            z_grid: vec![],
            sizes: vec![],
            mus: vec![],
            bootstrap: 1000,
        }
    }

    /// Defaults for a catalog entry, sized to decide its criteria.
    pub fn default_for(name: &str) -> Result<Self> {
        if !CATALOG.iter().any(|e| e.name == name) {
            return Err(Error::UnknownExperiment(name.to_string()));
        }
        let mut c = Self::base(name);
        match name {
            "rains" => {
                (c.m, c.n, c.w, c.z) = (8, 8, 0.55, 0.45);
                c.replicas = vec![200_000];
            }
            "stationarity" => {
                (c.m, c.n, c.z) = (50, 50, 0.5);
                c.replicas = vec![10_000];
                c.aux_vertex = [20, 20];
                c.aux_replicas = 100_000;
            }
            "variance-identity" => {
                (c.m, c.n, c.z) = (10, 10, 0.5);
                c.replicas = vec![100_000];
            }
            "moment-identity" => {
                (c.m, c.n, c.z) = (6, 6, 0.5);
                c.replicas = vec![100_000];
                c.powers = vec![2, 3];
            }
            "bulk-moments" | "mean-gap" => {}
            "boundary-kpz" => c.kpz_offsets = vec![-1.0, 0.0, 1.0],
            "gauss" => {
                c.w = 0.3;
                c.replicas = vec![5000, 5000, 5000, 10_000];
            }
            "tails" => {
                c.ladder = vec![512];
                c.replicas = vec![20_000];
                c.s_grid = vec![1.0, 2.0, 3.0, 4.0];
            }
            "exit" => {
                c.ladder = vec![256, 512, 1024];
                c.replicas = vec![2000, 2000, 1000];
                (c.m, c.n) = (512, 512);
                c.aux_replicas = 1000;
                c.deltas = vec![0.10, 0.15, 0.20];
            }
            "inc-tail" => {
                c.ladder = vec![512];
                c.replicas = vec![20_000];
                c.s_grid = (1..=8).map(f64::from).collect();
            }
            "var-lipschitz" => {
                (c.m, c.n) = (128, 128);
                c.replicas = vec![4000];
                c.aux_vertex = [32, 32];
                c.aux_replicas = 4000;
                c.z_grid = vec![0.4, 0.45, 0.5, 0.55, 0.6];
            }
            "sums-tails" => {
                c.replicas = vec![100_000];
                (c.m, c.n, c.w) = (32, 32, 0.5);
                c.thetas = vec![0.0, 0.1, 0.2];
                c.s_grid = vec![0.5, 1.0, 2.0];
                c.sizes = vec![4, 16, 64];
                c.mus = vec![-1.0, 0.0, 0.5, 0.9];
            }
            _ => unreachable!("catalog entry without defaults"),
        }
        Ok(c)
    }

    /// Defaults for `table["name"]` with every other key of `table` laid
    /// over them. Unknown keys and ill-typed values are reported by key.
    pub fn resolve(table: &Map<String, Value>) -> Result<Self> {
        let name = match table.get("name") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(config_err("name", "expected a string")),
            None => return Err(config_err("name", "missing experiment name")),
        };
        let defaults = Self::default_for(&name)?;
        let mut merged = match serde_json::to_value(&defaults)? {
            Value::Object(map) => map,
            _ => unreachable!("config serializes to a map"),
        };
        let known: Vec<String> = merged.keys().cloned().chain(["workers", "output", "on_existing"].map(String::from)).collect();
        for (key, value) in table {
            if !known.contains(key) {
                return Err(config_err(key, "unknown key"));
            }
            let mut probe = merged.clone();
            probe.insert(key.clone(), value.clone());
            if let Err(e) = serde_json::from_value::<Self>(Value::Object(probe)) {
                return Err(config_err(key, &e.to_string()));
            }
            merged.insert(key.clone(), value.clone());
        }
        let config: Self = serde_json::from_value(Value::Object(merged))?;
        config.validate()?;
        Ok(config)
    }

    /// Replica count at ladder index `k`.
    pub fn replicas_at(&self, k: usize) -> u64 {
        if self.replicas.len() == 1 {
            self.replicas[0]
        } else {
            self.replicas[k]
        }
    }

    pub fn uses_ladder(&self) -> bool {
        matches!(
            self.name.as_str(),
            "bulk-moments" | "boundary-kpz" | "gauss" | "tails" | "exit" | "inc-tail" | "mean-gap"
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !CATALOG.iter().any(|e| e.name == self.name) {
            return Err(Error::UnknownExperiment(self.name.clone()));
        }
        if self.workers == 0 {
            return Err(config_err("workers", "must be at least 1"));
        }
        if self.replicas.is_empty() {
            return Err(config_err("replicas", "must not be empty"));
        }
        for (k, &r) in self.replicas.iter().enumerate() {
            if r < 100 {
                return Err(config_err(&format!("replicas[{k}]"), "at least 100 replicas are needed for the gates"));
            }
        }
        if self.uses_ladder() {
            if self.ladder.is_empty() {
                return Err(config_err("ladder", "must not be empty"));
            }
            for (k, pair) in self.ladder.windows(2).enumerate() {
                if pair[1] <= pair[0] {
                    return Err(config_err(&format!("ladder[{}]", k + 1), "ladder must be strictly increasing"));
                }
            }
            if self.ladder[0] == 0 {
                return Err(config_err("ladder[0]", "sizes must be positive"));
            }
            if self.replicas.len() != 1 && self.replicas.len() != self.ladder.len() {
                return Err(config_err("replicas", "needs one entry or one per ladder point"));
            }
        } else if self.m == 0 && self.n == 0 && self.name != "sums-tails" {
            return Err(config_err("m", "vertex must be positive"));
        }
        if matches!(self.name.as_str(), "stationarity" | "exit" | "var-lipschitz") && self.aux_replicas < 100 {
            return Err(config_err("aux_replicas", "at least 100 replicas are needed for the gates"));
        }
        for (key, v) in [("w", self.w), ("z", self.z)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(config_err(key, "must lie in (0,1)"));
            }
        }
        if !(self.h > 0.0 && self.h < self.z.min(1.0 - self.z)) {
            return Err(config_err("h", "step must be positive and keep z +- h inside (0,1)"));
        }
        for (k, &z) in self.z_grid.iter().enumerate() {
            if !(z > 0.0 && z < 1.0) {
                return Err(config_err(&format!("z_grid[{k}]"), "must lie in (0,1)"));
            }
        }
        for (k, &d) in self.deltas.iter().enumerate() {
            if !(d > 0.0 && 0.5 + d < 1.0) {
                return Err(config_err(&format!("deltas[{k}]"), "need 0 < delta < 1/2"));
            }
        }
        for (k, &mu) in self.mus.iter().enumerate() {
            if !(mu < 1.0) {
                return Err(config_err(&format!("mus[{k}]"), "tilt must be below 1"));
            }
        }
        for (k, &t) in self.thetas.iter().enumerate() {
            if !(t >= 0.0 && t < self.w) {
                return Err(config_err(&format!("thetas[{k}]"), "need 0 <= theta < w"));
            }
        }
        if self.name == "boundary-kpz" {
            for (k, &off) in self.kpz_offsets.iter().enumerate() {
                for &n in &self.ladder {
                    let w = 0.5 + off * (n as f64).powf(-1.0 / 3.0);
                    if !(w > 0.0 && w < 1.0) {
                        return Err(config_err(&format!("kpz_offsets[{k}]"), &format!("rate {w} at N = {n} leaves (0,1)")));
                    }
                }
            }
        }
        if self.powers.contains(&0) {
            return Err(config_err("powers", "moment powers start at 1"));
        }
        if self.bootstrap < 100 {
            return Err(config_err("bootstrap", "at least 100 resamples"));
        }
        Ok(())
    }
}

pub(crate) fn config_err(path: &str, msg: &str) -> Error {
    Error::Config { path: path.to_string(), msg: msg.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn table(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn defaults_validate_for_every_entry() {
        for e in CATALOG {
            ExperimentConfig::default_for(e.name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn overrides_apply_and_unknown_keys_fail() {
        let c = ExperimentConfig::resolve(&table(json!({"name": "rains", "m": 4, "w": 0.6}))).unwrap();
        assert_eq!((c.m, c.n, c.w), (4, 8, 0.6));
        match ExperimentConfig::resolve(&table(json!({"name": "rains", "bogus": 1}))) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "bogus"),
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::resolve(&table(json!({"name": "rains", "m": "eight"}))) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "m"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ExperimentConfig::resolve(&table(json!({"name": "nope"}))),
            Err(Error::UnknownExperiment(_))
        ));
    }

    #[test]
    fn validation_reports_field_paths() {
        let bad = |v: Value| match ExperimentConfig::resolve(&table(v)) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("{other:?}"),
        };
        assert_eq!(bad(json!({"name": "bulk-moments", "ladder": [128, 64]})), "ladder[1]");
        assert_eq!(bad(json!({"name": "rains", "replicas": [99]})), "replicas[0]");
        assert_eq!(bad(json!({"name": "gauss", "replicas": [200, 200]})), "replicas");
        assert_eq!(bad(json!({"name": "rains", "workers": 0})), "workers");
        assert_eq!(bad(json!({"name": "rains", "z": 1.5})), "z");
    }
}
