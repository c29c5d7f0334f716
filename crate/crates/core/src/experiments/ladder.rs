//! Diagonal ladder sweeps shared by the scaling experiments.
//!
//! Replica `r` at size `N` always sees the field keyed by
//! `derive_seed(master_seed, "ladder/N=<N>", r)`, whatever lanes are
//! requested, so experiments that read different lanes of one sweep agree
//! with their standalone runs.

use crate::analytic::zeta_fn;
use crate::error::{Error, Result};
use crate::lpp::{hor_params, sweep, Lane, Variant};
use crate::pool::replica_map;
use crate::randfield::{boundary_weights, BoundaryWeights, LazyField, SeedSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LaneKind {
    Bulk,
    /// `G^{w,hor}` with fixed `w`.
    Hor(f64),
    /// `G^{w,hor}` with `w = zeta + K N^{-1/3}`.
    HorKpz(f64),
}

impl LaneKind {
    pub fn rate(&self, n: usize) -> Result<Option<f64>> {
        let zeta = zeta_fn(n as f64, n as f64)?;
        Ok(match *self {
            LaneKind::Bulk => None,
            LaneKind::Hor(w) => Some(w),
            LaneKind::HorKpz(k) => Some(zeta + k * (n as f64).powf(-1.0 / 3.0)),
        })
    }

    pub fn label(&self) -> String {
        match self {
            LaneKind::Bulk => "bulk".into(),
            LaneKind::Hor(w) => format!("hor(w={w})"),
            LaneKind::HorKpz(k) => format!("hor(K={k})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LanePoint {
    pub kind: LaneKind,
    pub rate: Option<f64>,
    /// `G_{(N,N)}` per replica.
    pub values: Vec<f64>,
    /// Horizontal exit index per replica, boundary lanes only.
    pub exits: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderPoint {
    pub size: usize,
    pub replicas: u64,
    pub lanes: Vec<LanePoint>,
}

impl LadderPoint {
    pub fn lane(&self, kind: LaneKind) -> Result<&LanePoint> {
        self.lanes
            .iter()
            .find(|l| l.kind == kind)
            .ok_or_else(|| Error::InconsistentParams(format!("lane {} not sampled at N = {}", kind.label(), self.size)))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LadderData {
    pub points: Vec<LadderPoint>,
}

impl LadderData {
    pub fn at(&self, size: usize) -> Result<&LadderPoint> {
        self.points
            .iter()
            .find(|p| p.size == size)
            .ok_or_else(|| Error::InconsistentParams(format!("ladder has no point N = {size}")))
    }

    pub fn replicas(&self) -> u64 {
        self.points.iter().map(|p| p.replicas).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderRequest {
    pub master_seed: u64,
    pub workers: usize,
    /// `(N, replicas)`.
    pub points: Vec<(usize, u64)>,
    pub lanes: Vec<LaneKind>,
}

pub fn ladder_id(size: usize) -> String {
    format!("ladder/N={size}")
}

pub fn sample_ladder(req: &LadderRequest) -> Result<LadderData> {
    let mut points = Vec::with_capacity(req.points.len());
    for &(size, replicas) in &req.points {
        let rates: Vec<Option<f64>> = req.lanes.iter().map(|k| k.rate(size)).collect::<Result<_>>()?;
        let spec = SeedSpec::new(req.master_seed, ladder_id(size), 0);
        let rows = replica_map(req.workers, replicas, |r| {
            let field = LazyField::new(&spec.with_replica(r), size, size)?;
            let lanes = req
                .lanes
                .iter()
                .zip(&rates)
                .map(|(_, rate)| match rate {
                    None => Lane::new(Variant::Bulk, size, BoundaryWeights::zero(size, size), false),
                    Some(w) => Lane::new(Variant::Hor, size, boundary_weights(&field, hor_params(*w)?)?, true),
                })
                .collect::<Result<Vec<_>>>()?;
            let out = sweep(&field, lanes, &[])?;
            Ok(out.iter().map(|o| (o.corner(), o.corner_exit().map(|e| e.0))).collect::<Vec<_>>())
        })?;
        let lanes = req
            .lanes
            .iter()
            .enumerate()
            .map(|(k, &kind)| LanePoint {
                kind,
                rate: rates[k],
                values: rows.iter().map(|row| row[k].0).collect(),
                exits: rates[k].map(|_| rows.iter().map(|row| row[k].1.unwrap_or(0)).collect()),
            })
            .collect();
        points.push(LadderPoint { size, replicas, lanes });
    }
    Ok(LadderData { points })
}
