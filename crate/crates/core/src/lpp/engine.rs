//! Row-by-row last-passage sweep shared by every variant.
//!
//! Storage convention, used everywhere in this module: a row buffer `cur` has
//! length `m + 1` and holds `G(i, j)` for `i = 0..=m` after row `j` has been
//! processed. Column `i = 0` is the vertical axis, row `j = 0` the horizontal
//! axis. Several lanes (variants or boundary parameters) can share one pass
//! over the bulk, so each bulk row is generated once.

use crate::error::{Error, Result};
use crate::randfield::{BoundaryWeights, WeightSource};

use super::Variant;

/// Argmax record for full-mode grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Step {
    /// Predecessor `(i-1, j)`.
    Left,
    /// Predecessor `(i, j-1)`.
    Below,
    /// First vertex of the variant's paths.
    Start,
}

/// Exit label: `+k` for a horizontal exit at `(k, 0)`, `-l` for a vertical
/// exit at `(0, l)`, `0` for the bulk.
pub type ExitLabel = i32;

pub fn exit_from_label(label: ExitLabel) -> (u32, u32) {
    if label >= 0 {
        (label as u32, 0)
    } else {
        (0, label.unsigned_abs())
    }
}

/// One variant advanced through a sweep.
#[derive(Clone, Debug)]
pub struct Lane {
    pub variant: Variant,
    weights: BoundaryWeights,
    cur: Vec<f64>,
    labels: Option<Vec<ExitLabel>>,
    ties: u64,
}

impl Lane {
    pub fn new(variant: Variant, m: usize, weights: BoundaryWeights, track_exits: bool) -> Result<Self> {
        if variant == Variant::Northeast {
            return Err(Error::WrongVariant("northeast grids are built by northeast_values".into()));
        }
        if weights.hor.len() < m + 1 {
            return Err(Error::InconsistentParams(format!(
                "horizontal boundary has {} entries, need {}",
                weights.hor.len(),
                m + 1
            )));
        }
        let mut cur = vec![f64::NEG_INFINITY; m + 1];
        let mut labels = vec![0; m + 1];
        match variant {
            Variant::Bulk => cur[1] = 0.0,
            Variant::Hor | Variant::TwoSided => {
                if variant == Variant::TwoSided {
                    cur[0] = 0.0;
                }
                let mut acc = 0.0;
                for i in 1..=m {
                    acc += weights.hor[i];
                    cur[i] = acc;
                    labels[i] = i as ExitLabel;
                }
            }
            Variant::Ver => cur[0] = 0.0,
            Variant::Northeast => unreachable!(),
        }
        let labels = (track_exits && variant != Variant::Bulk).then_some(labels);
        Ok(Self { variant, weights, cur, labels, ties: 0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.cur
    }

    pub fn labels(&self) -> Option<&[ExitLabel]> {
        self.labels.as_deref()
    }

    pub fn ties(&self) -> u64 {
        self.ties
    }

    pub fn weights(&self) -> &BoundaryWeights {
        &self.weights
    }

    fn enter_row(&mut self, j: usize) -> Result<()> {
        match self.variant {
            Variant::Ver | Variant::TwoSided => {
                let w = *self.weights.ver.get(j).ok_or_else(|| {
                    Error::InconsistentParams(format!("vertical boundary too short for row {j}"))
                })?;
                self.cur[0] += w;
                if let Some(l) = self.labels.as_mut() {
                    l[0] = -(j as ExitLabel);
                }
            }
            _ => self.cur[0] = f64::NEG_INFINITY,
        }
        Ok(())
    }

    /// Advances to row `j` given `row[i] = bulk(i, j)` for `i >= 1`.
    pub fn advance(&mut self, j: usize, row: &[f64], steps: Option<&mut [Step]>) -> Result<()> {
        self.enter_row(j)?;
        let m = self.cur.len() - 1;
        let row = &row[..=m];
        match (self.labels.as_mut(), steps) {
            (None, None) => {
                let cur = &mut self.cur;
                let mut left = cur[0];
                let mut ties = 0u64;
                for i in 1..=m {
                    let below = cur[i];
                    ties += u64::from(left == below);
                    let best = if left >= below { left } else { below };
                    left = row[i] + best;
                    cur[i] = left;
                }
                self.ties += ties;
            }
            (labels, steps) => {
                let cur = &mut self.cur;
                let mut left = cur[0];
                let mut dummy = Vec::new();
                let labels = match labels {
                    Some(l) => l.as_mut_slice(),
                    None => {
                        dummy.resize(m + 1, 0);
                        dummy.as_mut_slice()
                    }
                };
                let mut left_label = labels[0];
                let mut steps = steps;
                for i in 1..=m {
                    let below = cur[i];
                    self.ties += u64::from(left == below);
                    let take_left = left >= below;
                    let (best, label) = if take_left { (left, left_label) } else { (below, labels[i]) };
                    left = row[i] + best;
                    left_label = label;
                    cur[i] = left;
                    labels[i] = label;
                    if let Some(s) = steps.as_deref_mut() {
                        s[i] = if take_left { Step::Left } else { Step::Below };
                    }
                }
            }
        }
        Ok(())
    }
}

/// Vertex value captured during a rolling sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub vertex: (usize, usize),
    pub value: f64,
    pub label: Option<ExitLabel>,
}

/// Output of a rolling sweep for one lane.
#[derive(Clone, Debug, PartialEq)]
pub struct RollingResult {
    pub variant: Variant,
    /// `G(i, n)` for `i = 0..=m`.
    pub top_row: Vec<f64>,
    pub top_labels: Option<Vec<ExitLabel>>,
    pub probes: Vec<Probe>,
    pub ties: u64,
}

impl RollingResult {
    /// Value at `(m, n)`.
    pub fn corner(&self) -> f64 {
        *self.top_row.last().expect("nonempty row")
    }

    pub fn corner_exit(&self) -> Option<(u32, u32)> {
        self.top_labels.as_ref().map(|l| exit_from_label(*l.last().expect("nonempty row")))
    }
}

/// Runs every lane over rows `1..=n` of `field`, capturing `probes`.
pub fn sweep<S: WeightSource + ?Sized>(
    field: &S,
    mut lanes: Vec<Lane>,
    probes: &[(usize, usize)],
) -> Result<Vec<RollingResult>> {
    let (m, n) = field.extents();
    for &(i, j) in probes {
        if i > m || j > n {
            return Err(Error::OutOfRange(format!("probe ({i}, {j}) outside {m}x{n}")));
        }
    }
    for lane in &lanes {
        if lane.cur.len() != m + 1 {
            return Err(Error::InconsistentParams("lane width differs from field".into()));
        }
    }
    let mut captured: Vec<Vec<(usize, Probe)>> = vec![Vec::with_capacity(probes.len()); lanes.len()];
    let capture = |j: usize, lanes: &[Lane], captured: &mut [Vec<(usize, Probe)>]| {
        for (k, &(pi, pj)) in probes.iter().enumerate().filter(|(_, p)| p.1 == j) {
            for (lane, out) in lanes.iter().zip(captured.iter_mut()) {
                let mut value = lane.cur[pi];
                if j == 0 && matches!(lane.variant, Variant::Bulk | Variant::Ver) {
                    value = f64::NEG_INFINITY;
                }
                let label = lane.labels.as_ref().map(|l| l[pi]);
                out.push((k, Probe { vertex: (pi, pj), value, label }));
            }
        }
    };
    capture(0, &lanes, &mut captured);
    let mut row = vec![0.0; m + 1];
    for j in 1..=n {
        field.fill_row(j, &mut row);
        for lane in lanes.iter_mut() {
            lane.advance(j, &row, None)?;
        }
        capture(j, &lanes, &mut captured);
    }
    Ok(lanes
        .into_iter()
        .zip(captured)
        .map(|(lane, mut probes)| {
            probes.sort_by_key(|p| p.0);
            RollingResult {
                variant: lane.variant,
                top_row: lane.cur,
                top_labels: lane.labels,
                probes: probes.into_iter().map(|p| p.1).collect(),
                ties: lane.ties,
            }
        })
        .collect())
}
