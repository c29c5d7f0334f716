//! Closed-form quantities of exponential last-passage percolation.
//!
//! Everything here is a pure function of its arguments. The stationary mean
//! `M^z(x, y) = x/z + y/(1-z)` is the central object: the shape function is
//! its minimum over `z`, the characteristic parameter `zeta` is the minimizer,
//! and the curvature coefficient `sigma` is the cube root of half its second
//! derivative at the minimizer.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Exact rational type used for the Faà di Bruno coefficients.
pub type Coefficient = Ratio<i128>;

/// A point of the open positive quadrant, either a lattice vertex promoted to
/// reals or a direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(domain(format!("point ({x}, {y}) outside the open quadrant")));
        }
        Ok(Self { x, y })
    }

    pub fn l1(&self) -> f64 {
        self.x.abs() + self.y.abs()
    }

    /// Membership in the cone `x >= delta*y, y >= delta*x`.
    pub fn in_cone(&self, delta: f64) -> bool {
        self.x >= delta * self.y && self.y >= delta * self.x
    }

    /// Swap of the coordinates.
    pub fn transpose(&self) -> Self {
        Self { x: self.y, y: self.x }
    }
}

/// Boundary rates of the two-sided model. The horizontal axis carries
/// `Exp(w)` weights and the vertical axis `Exp(1 - z)` weights. `w = +inf`
/// and `z = -inf` encode an absent boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParam {
    pub w: f64,
    pub z: f64,
}

impl BoundaryParam {
    pub fn new(w: f64, z: f64) -> Result<Self> {
        if w.is_nan() || w <= 0.0 {
            return Err(domain(format!("horizontal rate w = {w} must be positive")));
        }
        if z.is_nan() || z >= 1.0 {
            return Err(domain(format!("vertical parameter z = {z} must be below 1")));
        }
        Ok(Self { w, z })
    }

    /// Both boundaries absent.
    pub fn bulk() -> Self {
        Self { w: f64::INFINITY, z: f64::NEG_INFINITY }
    }

    /// The increment-stationary choice `w = z`.
    pub fn stationary(z: f64) -> Result<Self> {
        if !(z > 0.0 && z < 1.0) {
            return Err(domain(format!("stationary parameter {z} outside (0,1)")));
        }
        Self::new(z, z)
    }

    pub fn has_hor(&self) -> bool {
        self.w.is_finite()
    }

    pub fn has_ver(&self) -> bool {
        self.z.is_finite()
    }

    /// Rate of the vertical boundary weights.
    pub fn ver_rate(&self) -> f64 {
        1.0 - self.z
    }
}

/// An integer partition stored with nonincreasing parts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Partition {
    pub parts: Vec<u32>,
    pub multiplicities: BTreeMap<u32, u32>,
}

impl Partition {
    pub fn from_parts(mut parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(domain("partition parts must be positive"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let mut multiplicities = BTreeMap::new();
        for &p in &parts {
            *multiplicities.entry(p).or_insert(0) += 1;
        }
        Ok(Self { parts, multiplicities })
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn min_part(&self) -> Option<u32> {
        self.parts.last().copied()
    }
}

fn check_open_unit(name: &str, z: f64) -> Result<()> {
    if z > 0.0 && z < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} = {z} outside (0,1)")))
    }
}

fn check_positive(x: f64, y: f64) -> Result<()> {
    if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("({x}, {y}) must have positive finite coordinates")))
    }
}

/// Stationary mean `x/z + y/(1-z)`.
pub fn mean_fn(x: f64, y: f64, z: f64) -> Result<f64> {
    check_open_unit("z", z)?;
    if !(x >= 0.0 && y >= 0.0) {
        return Err(domain(format!("({x}, {y}) must be nonnegative")));
    }
    Ok(x / z + y / (1.0 - z))
}

/// `k`-th derivative of the stationary mean in `z`.
pub fn mean_deriv(x: f64, y: f64, z: f64, k: u32) -> Result<f64> {
    check_open_unit("z", z)?;
    if !(x >= 0.0 && y >= 0.0) {
        return Err(domain(format!("({x}, {y}) must be nonnegative")));
    }
    let fact = factorial(k);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let e = -(k as i32 + 1);
    Ok(sign * fact * x * z.powi(e) + fact * y * (1.0 - z).powi(e))
}

/// Shape function `(sqrt x + sqrt y)^2`.
pub fn shape_fn(x: f64, y: f64) -> Result<f64> {
    check_positive(x, y)?;
    let s = x.sqrt() + y.sqrt();
    Ok(s * s)
}

/// Minimizer of `z -> mean_fn(x, y, z)`.
pub fn zeta_fn(x: f64, y: f64) -> Result<f64> {
    check_positive(x, y)?;
    let (sx, sy) = (x.sqrt(), y.sqrt());
    Ok(sx / (sx + sy))
}

/// Curvature coefficient; `sigma^3` is half the second `z`-derivative of the
/// mean at the minimizer.
pub fn sigma_fn(x: f64, y: f64) -> Result<f64> {
    check_positive(x, y)?;
    let s = x.sqrt() + y.sqrt();
    Ok(s.powf(4.0 / 3.0) / (x * y).powf(1.0 / 6.0))
}

/// Unit-L1 direction `(z^2, (1-z)^2) / norm`, the inverse of `zeta_fn` on the
/// unit simplex.
pub fn char_direction(z: f64) -> Result<PlanePoint> {
    check_open_unit("z", z)?;
    let a = z * z;
    let b = (1.0 - z) * (1.0 - z);
    let s = a + b;
    Ok(PlanePoint { x: a / s, y: b / s })
}

/// Logarithm of `E[exp((w - z) G^{w,z}_{m,n})]`.
pub fn rains_log_mgf(m: u64, n: u64, w: f64, z: f64) -> Result<f64> {
    check_open_unit("w", w)?;
    check_open_unit("z", z)?;
    Ok(m as f64 * (w / z).ln() + n as f64 * ((1.0 - z) / (1.0 - w)).ln())
}

/// Cramér rate function of `Exp(1)`.
pub fn cramer_rate(x: f64) -> f64 {
    if x > 0.0 {
        // ln_1p keeps precision near the minimum at x = 1.
        let d = x - 1.0;
        d - d.ln_1p()
    } else {
        f64::INFINITY
    }
}

/// `n!` as a float; exact up to `n = 22`.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized upper incomplete gamma `Q(a, x)` for real `a > 0`.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(domain(format!("gamma_q needs a > 0 and x >= 0, got ({a}, {x})")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_p_series(a, x))
    } else {
        Ok(gamma_q_continued_fraction(a, x))
    }
}

fn ln_prefactor(a: f64, x: f64) -> f64 {
    a * x.ln() - x - statrs::function::gamma::ln_gamma(a)
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum.ln() + ln_prefactor(a, x)).exp()
}

// Modified Lentz evaluation of the continued fraction for Q.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (h.ln() + ln_prefactor(a, x)).exp()
}

/// `P{S_n >= x}` for `S_n` a sum of `n` i.i.d. `Exp(1)`.
pub fn regularized_gamma_upper(n: u32, x: f64) -> Result<f64> {
    if n < 1 {
        return Err(domain("regularized_gamma_upper needs n >= 1"));
    }
    if !(x >= 0.0) {
        return Err(domain(format!("regularized_gamma_upper needs x >= 0, got {x}")));
    }
    gamma_q(n as f64, x)
}

/// `int_x^inf t^{p-1} exp(-t^q) dt = Gamma(r) Q(r, x^q) / q` with `r = p/q`.
pub fn stretched_exp_tail(p: f64, q: f64, x: f64) -> Result<f64> {
    check_stretched(p, q, x)?;
    let r = p / q;
    Ok(statrs::function::gamma::gamma(r) * gamma_q(r, x.powf(q))? / q)
}

/// `int_0^x t^{p-1} exp(-t^q) dt`.
pub fn stretched_exp_head(p: f64, q: f64, x: f64) -> Result<f64> {
    check_stretched(p, q, x)?;
    let r = p / q;
    Ok(statrs::function::gamma::gamma(r) * (1.0 - gamma_q(r, x.powf(q))?) / q)
}

/// Gamma-function majorants of the two stretched-exponential integrals:
/// `Gamma(k, x^q) / q` for the tail and `(k-1)! P(l, x^q) / q` for the head,
/// where `k = ceil(p/q)` and `l = floor(p/q)`.
pub fn stretched_exp_bounds(p: f64, q: f64, x: f64) -> Result<(f64, f64)> {
    check_stretched(p, q, x)?;
    let r = p / q;
    let k = r.ceil();
    let l = r.floor().max(1.0);
    let y = x.powf(q);
    let fk = statrs::function::gamma::gamma(k);
    Ok((fk * gamma_q(k, y)? / q, fk * (1.0 - gamma_q(l, y)?) / q))
}

fn check_stretched(p: f64, q: f64, x: f64) -> Result<()> {
    if !(p >= 1.0 && q > 0.0 && q <= p && x >= 0.0) {
        return Err(domain(format!("need p >= 1, 0 < q <= p, x >= 0; got ({p}, {q}, {x})")));
    }
    Ok(())
}

/// Largest `p` accepted by [`partition_coeffs`].
pub const PARTITION_CAP: u32 = 20;

/// All partitions of `p` in reverse-lexicographic order, starting at `(p)`.
pub fn partitions(p: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    if p == 0 {
        return out;
    }
    let mut cur: Vec<u32> = vec![p];
    loop {
        out.push(Partition::from_parts(cur.clone()).expect("positive parts"));
        // Strip trailing ones, decrement the last part > 1, refill greedily.
        let mut ones = 0;
        while cur.last() == Some(&1) {
            cur.pop();
            ones += 1;
        }
        let Some(last) = cur.pop() else { break };
        let k = last - 1;
        let mut rest = ones + 1;
        cur.push(k);
        while rest > 0 {
            let part = rest.min(k);
            cur.push(part);
            rest -= part;
        }
    }
    out
}

/// Faà di Bruno coefficients `prod_j 1 / ((j!)^{#_j} #_j!)` for every
/// partition of `p`; `p! * c` is the Bell-polynomial monomial coefficient.
pub fn partition_coeffs(p: u32) -> Result<Vec<(Partition, Coefficient)>> {
    if !(1..=PARTITION_CAP).contains(&p) {
        return Err(domain(format!("partition_coeffs needs 1 <= p <= {PARTITION_CAP}, got {p}")));
    }
    Ok(partitions(p)
        .into_iter()
        .map(|lambda| {
            let denom = lambda.multiplicities.iter().fold(1i128, |acc, (&j, &cnt)| {
                acc * int_factorial(j).pow(cnt) * int_factorial(cnt)
            });
            (lambda, Coefficient::new(1, denom))
        })
        .collect())
}

fn int_factorial(n: u32) -> i128 {
    (1..=n as i128).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Right-hand side of the central-moment identity for `G^z_{m,n}`.
///
/// `boundary_deriv(order, k)` must return
/// `d^order/dw^order E[(G^{w,z}_{m,n} - M^z_{m,n})^k]` at `w = z`.
pub fn moment_identity_rhs<F>(m: u64, n: u64, z: f64, p: u32, mut boundary_deriv: F) -> Result<f64>
where
    F: FnMut(u32, u32) -> Result<f64>,
{
    if p < 2 {
        return Err(domain(format!("moment identity needs p >= 2, got {p}")));
    }
    let (x, y) = (m as f64, n as f64);
    let mut leading = 0.0;
    for (lambda, c) in partition_coeffs(p)? {
        if lambda.min_part().is_some_and(|s| s > 1) {
            let mut prod = 1.0;
            for &part in &lambda.parts {
                prod *= mean_deriv(x, y, z, part - 1)?;
            }
            leading += (*c.numer() as f64 / *c.denom() as f64) * prod;
        }
    }
    leading *= factorial(p);
    let mut correction = 0.0;
    for k in 1..p {
        correction += binomial(p, k) * boundary_deriv(p - k, k)?;
    }
    Ok(leading - correction)
}

type Poly = Vec<Coefficient>;

fn poly_mul(a: &[Coefficient], b: &[Coefficient]) -> Poly {
    let mut out = vec![Coefficient::from_integer(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[Coefficient], b: &[Coefficient]) -> Poly {
    let mut out = vec![Coefficient::from_integer(0); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    trim(out)
}

fn trim(mut a: Poly) -> Poly {
    while a.len() > 1 && a.last() == Some(&Coefficient::from_integer(0)) {
        a.pop();
    }
    a
}

/// Derivatives of `f(x) = x + x^2` as coefficient lists.
fn quad_deriv(k: u32) -> Poly {
    let int = Coefficient::from_integer;
    match k {
        0 => vec![int(0), int(1), int(1)],
        1 => vec![int(1), int(2)],
        2 => vec![int(2)],
        _ => vec![int(0)],
    }
}

/// `P` with `(d/dx)^p e^{x+x^2} = P(x) e^{x+x^2}`, summed over partitions of
/// `p` with the coefficients of [`partition_coeffs`].
pub fn exp_quadratic_expansion(p: u32) -> Result<Vec<Coefficient>> {
    let mut out = vec![Coefficient::from_integer(0)];
    for (lambda, c) in partition_coeffs(p)? {
        let mut term = vec![c * Coefficient::from_integer(int_factorial(p))];
        for &part in &lambda.parts {
            term = poly_mul(&term, &quad_deriv(part));
        }
        out = poly_add(&out, &term);
    }
    Ok(out)
}

/// The same polynomial from `P_0 = 1`, `P_{k+1} = P_k' + (1 + 2x) P_k`.
pub fn exp_quadratic_recursion(p: u32) -> Vec<Coefficient> {
    let mut poly = vec![Coefficient::from_integer(1)];
    for _ in 0..p {
        let deriv: Poly = if poly.len() == 1 {
            vec![Coefficient::from_integer(0)]
        } else {
            poly.iter().enumerate().skip(1).map(|(k, c)| c * Coefficient::from_integer(k as i128)).collect()
        };
        poly = poly_add(&deriv, &poly_mul(&poly, &quad_deriv(1)));
    }
    poly
}

/// The unique `k` in `[1, m-1]` with `zeta(m-k, n) < w <= zeta(m-k+1, n)`.
pub fn shift_index(m: u64, n: u64, w: f64) -> Result<u64> {
    if m < 2 || n < 1 {
        return Err(Error::NoSolution(format!("no shift index for (m, n) = ({m}, {n})")));
    }
    let zeta = |a: u64| zeta_fn(a as f64, n as f64).expect("positive arguments");
    if !(zeta(1) < w && w <= zeta(m)) {
        return Err(Error::NoSolution(format!(
            "w = {w} outside (zeta(1,{n}), zeta({m},{n})] = ({}, {}]",
            zeta(1),
            zeta(m)
        )));
    }
    // zeta(m - k, n) decreases in k; find the smallest k with zeta(m - k, n) < w.
    let (mut lo, mut hi) = (1u64, m - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if zeta(m - mid) < w {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Leading Chernoff exponent `-(y^3 - x^3)/3 - (y - x) s` of the left-tail
/// bound for the two-sided model at tilts `x <= y` (in curvature units).
pub fn left_tail_exponent(s: f64, x: f64, y: f64) -> Result<f64> {
    if x > y {
        return Err(domain(format!("left_tail_exponent needs x <= y, got x = {x}, y = {y}")));
    }
    Ok(-(y.powi(3) - x.powi(3)) / 3.0 - (y - x) * s)
}

/// `(n^n e^{-n}, n!, (2n+1) n^n e^{-n})`.
pub fn factorial_sandwich(n: u32) -> (f64, f64, f64) {
    let nf = n as f64;
    let base = if n == 0 { 1.0 } else { (nf * nf.ln() - nf).exp() };
    (base, factorial(n), (2.0 * nf + 1.0) * base)
}
