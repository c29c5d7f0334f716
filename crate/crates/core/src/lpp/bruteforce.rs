//! Exhaustive path enumeration, the reference for the DP.

use crate::analytic::BoundaryParam;
use crate::error::{Error, Result};
use crate::randfield::{boundary_weights, BoundaryWeights, WeightSource};

use super::Variant;

/// Largest `a + b` accepted for a target `(a, b)`.
pub const BRUTEFORCE_CAP: usize = 14;

pub fn lpp_bruteforce<S: WeightSource + ?Sized>(
    field: &S,
    variant: Variant,
    params: BoundaryParam,
    target: (usize, usize),
) -> Result<f64> {
    lpp_bruteforce_counted(field, variant, params, target).map(|(v, _)| v)
}

/// Maximum path weight together with the number of paths enumerated.
pub fn lpp_bruteforce_counted<S: WeightSource + ?Sized>(
    field: &S,
    variant: Variant,
    params: BoundaryParam,
    target: (usize, usize),
) -> Result<(f64, u64)> {
    variant.check_params(params)?;
    let (m, n) = field.extents();
    let (a, b) = target;
    if a + b > BRUTEFORCE_CAP {
        return Err(Error::SizeCap(format!("target ({a}, {b}) exceeds a + b <= {BRUTEFORCE_CAP}")));
    }
    if a > m || b > n {
        return Err(Error::OutOfRange(format!("target ({a}, {b}) outside {m}x{n}")));
    }
    let start = variant.start();
    if start.0 > a || start.1 > b {
        return Err(Error::OutOfRange(format!("target ({a}, {b}) precedes the {variant:?} start")));
    }
    let weights = boundary_weights(field, params)?;
    let mut best = f64::NEG_INFINITY;
    let mut count = 0;
    walk(field, &weights, start, target, 0.0, &mut best, &mut count);
    Ok((best, count))
}

fn site<S: WeightSource + ?Sized>(field: &S, weights: &BoundaryWeights, (i, j): (usize, usize)) -> f64 {
    match (i, j) {
        (0, 0) => 0.0,
        (i, 0) => weights.hor[i],
        (0, j) => weights.ver[j],
        (i, j) => field.bulk(i, j),
    }
}

fn walk<S: WeightSource + ?Sized>(
    field: &S,
    weights: &BoundaryWeights,
    at: (usize, usize),
    target: (usize, usize),
    acc: f64,
    best: &mut f64,
    count: &mut u64,
) {
    let acc = acc + site(field, weights, at);
    if at == target {
        *count += 1;
        if acc > *best {
            *best = acc;
        }
        return;
    }
    if at.0 < target.0 {
        walk(field, weights, (at.0 + 1, at.1), target, acc, best, count);
    }
    if at.1 < target.1 {
        walk(field, weights, (at.0, at.1 + 1), target, acc, best, count);
    }
}
