//! Last-passage values, geodesics, exit points and increments.
//!
//! Coordinates follow the lattice convention `(i, j)`: `i` horizontal, `j`
//! vertical, bulk sites `[1,m] x [1,n]`, the horizontal axis at `j = 0` and
//! the vertical axis at `i = 0`. Paths start at
//!
//! | variant    | start    |
//! |------------|----------|
//! | bulk       | `(1, 1)` |
//! | hor        | `(1, 0)` |
//! | ver        | `(0, 1)` |
//! | two-sided  | `(0, 0)` |
//!
//! Exact float ties in the argmax go to the left predecessor `(i-1, j)`.

mod bruteforce;
mod engine;
mod northeast;

use serde::{Deserialize, Serialize};

use crate::analytic::BoundaryParam;
use crate::error::{Error, Result};
use crate::randfield::{boundary_weights, BoundaryWeights, WeightSource, DEFAULT_BUDGET_BYTES};

pub use bruteforce::{lpp_bruteforce, lpp_bruteforce_counted, BRUTEFORCE_CAP};
pub use engine::{exit_from_label, sweep, ExitLabel, Lane, Probe, RollingResult, Step};
pub use northeast::{northeast_values, NortheastGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Bulk,
    Hor,
    Ver,
    TwoSided,
    Northeast,
}

impl Variant {
    pub fn start(self) -> (usize, usize) {
        match self {
            Variant::Bulk | Variant::Northeast => (1, 1),
            Variant::Hor => (1, 0),
            Variant::Ver => (0, 1),
            Variant::TwoSided => (0, 0),
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, Variant::Hor | Variant::Ver | Variant::TwoSided)
    }

    /// Checks that `params` carries exactly the sides this variant uses.
    pub fn check_params(self, params: BoundaryParam) -> Result<()> {
        let (hor, ver) = match self {
            Variant::Bulk => (false, false),
            Variant::Hor => (true, false),
            Variant::Ver => (false, true),
            Variant::TwoSided => (true, true),
            Variant::Northeast => {
                return Err(Error::InconsistentParams("northeast grids take u, not (w, z)".into()))
            }
        };
        if params.has_hor() != hor || params.has_ver() != ver {
            return Err(Error::InconsistentParams(format!("{self:?} with w = {}, z = {}", params.w, params.z)));
        }
        BoundaryParam::new(params.w, params.z).map(|_| ())
    }
}

/// Params for a one-sided horizontal model.
pub fn hor_params(w: f64) -> Result<BoundaryParam> {
    BoundaryParam::new(w, f64::NEG_INFINITY)
}

/// Params for a one-sided vertical model.
pub fn ver_params(z: f64) -> Result<BoundaryParam> {
    BoundaryParam::new(f64::INFINITY, z)
}

#[derive(Clone, Debug)]
pub enum Mode {
    Full,
    Rolling { probes: Vec<(usize, usize)>, track_exits: bool },
}

#[derive(Clone, Debug)]
pub enum LppOutput {
    Full(LppGrid),
    Rolling(RollingResult),
}

/// Full table of last-passage values, `values[j * (m + 1) + i] = G(i, j)`.
/// Entries outside the variant's domain are `-inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct LppGrid {
    pub variant: Variant,
    pub params: BoundaryParam,
    pub m: usize,
    pub n: usize,
    pub values: Vec<f64>,
    pub steps: Option<Vec<Step>>,
    pub ties: u64,
}

impl LppGrid {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.m + 1) + i
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        if i > self.m || j > self.n {
            return Err(Error::OutOfRange(format!("({i}, {j}) outside {}x{}", self.m, self.n)));
        }
        Ok(self.values[self.idx(i, j)])
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    pub fn without_backpointers(mut self) -> Self {
        self.steps = None;
        self
    }

    /// `i, j, G` lines for debugging.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "G"])?;
        for j in 0..=self.n {
            for i in 0..=self.m {
                let v = self.value(i, j);
                if v.is_finite() {
                    w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the DP for one variant.
pub fn lpp_values<S: WeightSource + ?Sized>(
    field: &S,
    variant: Variant,
    params: BoundaryParam,
    mode: &Mode,
) -> Result<LppOutput> {
    variant.check_params(params)?;
    let weights = boundary_weights(field, params)?;
    match mode {
        Mode::Full => lpp_full_with(field, variant, params, weights, DEFAULT_BUDGET_BYTES).map(LppOutput::Full),
        Mode::Rolling { probes, track_exits } => {
            let lane = Lane::new(variant, field.extents().0, weights, *track_exits)?;
            let mut out = sweep(field, vec![lane], probes)?;
            Ok(LppOutput::Rolling(out.pop().expect("one lane")))
        }
    }
}

pub fn lpp_full<S: WeightSource + ?Sized>(field: &S, variant: Variant, params: BoundaryParam) -> Result<LppGrid> {
    variant.check_params(params)?;
    let weights = boundary_weights(field, params)?;
    lpp_full_with(field, variant, params, weights, DEFAULT_BUDGET_BYTES)
}

pub fn lpp_rolling<S: WeightSource + ?Sized>(
    field: &S,
    variant: Variant,
    params: BoundaryParam,
    probes: &[(usize, usize)],
    track_exits: bool,
) -> Result<RollingResult> {
    match lpp_values(field, variant, params, &Mode::Rolling { probes: probes.to_vec(), track_exits })? {
        LppOutput::Rolling(r) => Ok(r),
        LppOutput::Full(_) => unreachable!(),
    }
}

/// Full-mode DP with explicit boundary weights.
pub fn lpp_full_with<S: WeightSource + ?Sized>(
    field: &S,
    variant: Variant,
    params: BoundaryParam,
    weights: BoundaryWeights,
    budget: u64,
) -> Result<LppGrid> {
    let (m, n) = field.extents();
    let cells = (m as u64 + 1) * (n as u64 + 1);
    let required = cells * (std::mem::size_of::<f64>() + std::mem::size_of::<Step>()) as u64;
    if required > budget {
        return Err(Error::BudgetExceeded { required, allowed: budget });
    }
    let width = m + 1;
    let mut values = vec![f64::NEG_INFINITY; cells as usize];
    let mut steps = vec![Step::Start; cells as usize];
    let mut lane = Lane::new(variant, m, weights, false)?;

    // Row 0 and column 0 belong to the boundary variants only.
    if matches!(variant, Variant::Hor | Variant::TwoSided) {
        values[..width].copy_from_slice(lane.values());
        for s in steps.iter_mut().take(width).skip(2) {
            *s = Step::Left;
        }
        if variant == Variant::TwoSided {
            steps[1] = Step::Left;
        }
    }

    let mut row = vec![0.0; width];
    for j in 1..=n {
        field.fill_row(j, &mut row);
        let span = j * width..(j + 1) * width;
        lane.advance(j, &row, Some(&mut steps[span.clone()]))?;
        values[span.clone()].copy_from_slice(lane.values());
        let col0 = &mut steps[span.start];
        *col0 = match variant {
            Variant::TwoSided => Step::Below,
            Variant::Ver if j > 1 => Step::Below,
            _ => Step::Start,
        };
    }
    if variant == Variant::Bulk {
        steps[width + 1] = Step::Start;
    }
    Ok(LppGrid { variant, params, m, n, values, steps: Some(steps), ties: lane.ties() })
}

/// Up-right lattice path, listed from its start.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geodesic {
    pub variant: Variant,
    pub vertices: Vec<(usize, usize)>,
}

impl Geodesic {
    /// Sum of the weights along the path.
    pub fn weight<S: WeightSource + ?Sized>(&self, field: &S, weights: &BoundaryWeights) -> f64 {
        self.vertices
            .iter()
            .map(|&(i, j)| match (i, j) {
                (0, 0) => 0.0,
                (i, 0) => weights.hor[i],
                (0, j) => weights.ver[j],
                (i, j) => field.bulk(i, j),
            })
            .sum()
    }
}

pub fn geodesic_backtrack(grid: &LppGrid, target: (usize, usize)) -> Result<Geodesic> {
    let steps = grid.steps.as_ref().ok_or(Error::MissingBackpointers)?;
    let (mut i, mut j) = target;
    if i > grid.m || j > grid.n || !grid.value(i, j).is_finite() {
        return Err(Error::OutOfRange(format!("target ({i}, {j}) not reachable in {:?}", grid.variant)));
    }
    let mut path = vec![(i, j)];
    loop {
        match steps[grid.idx(i, j)] {
            Step::Start => break,
            Step::Left => i -= 1,
            Step::Below => j -= 1,
        }
        path.push((i, j));
    }
    path.reverse();
    Ok(Geodesic { variant: grid.variant, vertices: path })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitPoints {
    pub z_hor: u32,
    pub z_ver: u32,
}

impl From<ExitLabel> for ExitPoints {
    fn from(label: ExitLabel) -> Self {
        let (z_hor, z_ver) = exit_from_label(label);
        Self { z_hor, z_ver }
    }
}

pub fn exit_points(geodesic: &Geodesic) -> Result<ExitPoints> {
    if !geodesic.variant.is_boundary() {
        return Err(Error::WrongVariant(format!("{:?} geodesics have no exit points", geodesic.variant)));
    }
    let mut out = ExitPoints::default();
    for &(i, j) in &geodesic.vertices {
        if j == 0 {
            out.z_hor = out.z_hor.max(i as u32);
        }
        if i == 0 {
            out.z_ver = out.z_ver.max(j as u32);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// `G(base + k e) - G(base + (k-1) e)` for `k = 1..=count`.
pub fn increment_profile(grid: &LppGrid, base: (usize, usize), axis: Axis, count: usize) -> Result<Vec<f64>> {
    let at = |k: usize| match axis {
        Axis::Horizontal => (base.0 + k, base.1),
        Axis::Vertical => (base.0, base.1 + k),
    };
    let end = at(count);
    if end.0 > grid.m || end.1 > grid.n {
        return Err(Error::OutOfRange(format!("increments reach {end:?} outside {}x{}", grid.m, grid.n)));
    }
    let vals: Vec<f64> = (0..=count).map(|k| grid.value(at(k).0, at(k).1)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::OutOfRange(format!("increments from {base:?} leave the {:?} domain", grid.variant)));
    }
    Ok(vals.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Bulk last-passage time `G_{u,v}` over paths from `u` to `v`, both
/// endpoints included; `-inf` unless `u <= v` coordinatewise.
pub fn point_to_point<S: WeightSource + ?Sized>(field: &S, u: (usize, usize), v: (usize, usize)) -> f64 {
    if u.0 > v.0 || u.1 > v.1 {
        return f64::NEG_INFINITY;
    }
    let w = v.0 - u.0 + 1;
    let mut cur = vec![f64::NEG_INFINITY; w];
    for j in u.1..=v.1 {
        let mut left = f64::NEG_INFINITY;
        for (k, slot) in cur.iter_mut().enumerate() {
            let best = if k == 0 && j == u.1 { 0.0 } else if left >= *slot { left } else { *slot };
            left = field.bulk(u.0 + k, j) + best;
            *slot = left;
        }
    }
    cur[w - 1]
}

#[cfg(test)]
mod tests;
