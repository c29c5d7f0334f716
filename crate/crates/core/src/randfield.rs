//! Reproducible random environments.
//!
//! Every draw is a pure function of `(stream key, counter)`: a stream key is
//! derived from the seed triple plus a layer tag, and the counter is the site
//! index. Nothing depends on the order in which sites or replicas are visited,
//! so a materialized [`WeightField`] and an on-the-fly [`LazyField`] built
//! from the same [`SeedSpec`] produce bitwise-identical weights.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytic::BoundaryParam;
use crate::error::{domain, Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Default cap on materialized field memory.
pub const DEFAULT_BUDGET_BYTES: u64 = 1 << 30;

/// Splitmix64 finalizer.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Stream key for `(master_seed, experiment_id, replica_index)`.
///
/// The experiment id is folded in with FNV-1a, then the three words are
/// chained through the splitmix finalizer. The construction only uses
/// wrapping integer arithmetic, so it is identical on every platform.
pub fn derive_seed(master_seed: u64, experiment_id: &str, replica_index: u64) -> u64 {
    let mut h = mix64(master_seed ^ 0x6A09_E667_F3BC_C909);
    h = mix64(h ^ fnv1a64(experiment_id.as_bytes()));
    mix64(h.wrapping_add(replica_index.wrapping_mul(GOLDEN)) ^ 0xA54F_F53A_5F1D_36F1)
}

/// Maps 64 random bits into the open interval (0,1).
#[inline(always)]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub experiment_id: String,
    pub replica_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, experiment_id: impl Into<String>, replica_index: u64) -> Self {
        Self { master_seed, experiment_id: experiment_id.into(), replica_index }
    }

    pub fn key(&self) -> u64 {
        derive_seed(self.master_seed, &self.experiment_id, self.replica_index)
    }

    pub fn with_replica(&self, replica_index: u64) -> Self {
        Self { replica_index, ..self.clone() }
    }

    pub fn stream(&self, layer: Layer) -> Stream {
        Stream::new(self.key(), layer)
    }
}

/// Substream tags. Draws in different layers are independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    Bulk,
    Horizontal,
    Vertical,
    NortheastTop,
    NortheastRight,
    Tilted,
    Bootstrap,
    Auxiliary(u32),
}

impl Layer {
    fn tag(self) -> u64 {
        match self {
            Layer::Bulk => 1,
            Layer::Horizontal => 2,
            Layer::Vertical => 3,
            Layer::NortheastTop => 4,
            Layer::NortheastRight => 5,
            Layer::Tilted => 6,
            Layer::Bootstrap => 7,
            Layer::Auxiliary(k) => 0x100 + u64::from(k),
        }
    }
}

/// Counter-based generator: `uniform(c)` depends only on the key and `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn new(base: u64, layer: Layer) -> Self {
        Self { key: mix64(base ^ mix64(layer.tag().wrapping_mul(GOLDEN))) }
    }

    pub fn from_key(key: u64) -> Self {
        Self { key }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    #[inline(always)]
    pub fn bits(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    #[inline(always)]
    pub fn uniform(&self, counter: u64) -> f64 {
        unit_open(self.bits(counter))
    }

    /// `Exp(1)` draw by inversion.
    #[inline(always)]
    pub fn exp1(&self, counter: u64) -> f64 {
        -self.uniform(counter).ln()
    }

    /// Lattice-site counter.
    #[inline(always)]
    pub fn site(i: usize, j: usize) -> u64 {
        ((i as u64) << 32) | j as u64
    }

    pub fn cursor(self) -> Cursor {
        Cursor { stream: self, counter: 0 }
    }
}

/// Sequential view of a [`Stream`].
#[derive(Clone, Debug)]
pub struct Cursor {
    stream: Stream,
    counter: u64,
}

impl Cursor {
    pub fn next_u64(&mut self) -> u64 {
        let b = self.stream.bits(self.counter);
        self.counter += 1;
        b
    }

    pub fn next_f64(&mut self) -> f64 {
        unit_open(self.next_u64())
    }

    pub fn next_exp(&mut self, rate: f64) -> f64 {
        -self.next_f64().ln() / rate
    }

    /// Uniform index in `0..n` by multiply-shift.
    pub fn next_index(&mut self, n: usize) -> usize {
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }
}

/// Read access to a coupled environment on `[1,m] x [1,n]`.
///
/// Boundary accessors return uniforms; the weights follow from
/// [`boundary_weights`] or [`northeast_weights`].
pub trait WeightSource: Sync {
    fn extents(&self) -> (usize, usize);
    fn bulk(&self, i: usize, j: usize) -> f64;
    fn hor_uniform(&self, i: usize) -> f64;
    fn ver_uniform(&self, j: usize) -> f64;
    fn ne_top_uniform(&self, i: usize) -> f64;
    fn ne_right_uniform(&self, j: usize) -> f64;

    /// Writes `bulk(i, j)` into `out[i]` for `i` in `1..=m`.
    fn fill_row(&self, j: usize, out: &mut [f64]) {
        let (m, _) = self.extents();
        for (i, slot) in out.iter_mut().enumerate().take(m + 1).skip(1) {
            *slot = self.bulk(i, j);
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Keys {
    bulk: Stream,
    hor: Stream,
    ver: Stream,
    ne_top: Stream,
    ne_right: Stream,
}

impl Keys {
    fn new(spec: &SeedSpec) -> Self {
        let base = spec.key();
        Self {
            bulk: Stream::new(base, Layer::Bulk),
            hor: Stream::new(base, Layer::Horizontal),
            ver: Stream::new(base, Layer::Vertical),
            ne_top: Stream::new(base, Layer::NortheastTop),
            ne_right: Stream::new(base, Layer::NortheastRight),
        }
    }
}

/// Generates weights on demand; nothing is stored.
#[derive(Clone, Debug)]
pub struct LazyField {
    m: usize,
    n: usize,
    keys: Keys,
}

impl LazyField {
    pub fn new(spec: &SeedSpec, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(domain(format!("field extents must be positive, got {m}x{n}")));
        }
        Ok(Self { m, n, keys: Keys::new(spec) })
    }
}

impl WeightSource for LazyField {
    fn extents(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    #[inline(always)]
    fn bulk(&self, i: usize, j: usize) -> f64 {
        self.keys.bulk.exp1(Stream::site(i, j))
    }

    fn hor_uniform(&self, i: usize) -> f64 {
        self.keys.hor.uniform(i as u64)
    }

    fn ver_uniform(&self, j: usize) -> f64 {
        self.keys.ver.uniform(j as u64)
    }

    fn ne_top_uniform(&self, i: usize) -> f64 {
        self.keys.ne_top.uniform(i as u64)
    }

    fn ne_right_uniform(&self, j: usize) -> f64 {
        self.keys.ne_right.uniform(j as u64)
    }

    fn fill_row(&self, j: usize, out: &mut [f64]) {
        let stream = self.keys.bulk;
        for (i, slot) in out.iter_mut().enumerate().take(self.m + 1).skip(1) {
            *slot = stream.exp1(Stream::site(i, j));
        }
    }
}

/// Materialized environment. Bulk is stored row-major in `j`, so row `j`
/// occupies `bulk[(j-1)*m .. j*m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    pub m: usize,
    pub n: usize,
    pub bulk: Vec<f64>,
    pub hor_uniforms: Vec<f64>,
    pub ver_uniforms: Vec<f64>,
    pub ne_top_uniforms: Vec<f64>,
    pub ne_right_uniforms: Vec<f64>,
}

impl WeightField {
    pub fn required_bytes(m: usize, n: usize) -> u64 {
        8 * (m as u64 * n as u64 + 2 * (m as u64 + n as u64))
    }

    /// Explicit construction, mainly for hand-built test environments.
    /// Boundary and northeast vectors are indexed from 1 and so have
    /// lengths `m` and `n`.
    pub fn from_parts(
        m: usize,
        n: usize,
        bulk: Vec<f64>,
        hor_uniforms: Vec<f64>,
        ver_uniforms: Vec<f64>,
    ) -> Result<Self> {
        if m == 0 || n == 0 || bulk.len() != m * n || hor_uniforms.len() != m || ver_uniforms.len() != n {
            return Err(domain("field parts have inconsistent lengths"));
        }
        if bulk.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(domain("bulk weights must be finite and nonnegative"));
        }
        let open = |u: &f64| *u > 0.0 && *u < 1.0;
        if !hor_uniforms.iter().all(open) || !ver_uniforms.iter().all(open) {
            return Err(domain("boundary uniforms must lie in (0,1)"));
        }
        Ok(Self {
            m,
            n,
            bulk,
            hor_uniforms,
            ver_uniforms,
            ne_top_uniforms: vec![0.5; m],
            ne_right_uniforms: vec![0.5; n],
        })
    }

    /// Bulk-only field from a `[i][j]`-indexed table, boundaries at `U = 1/2`.
    pub fn from_bulk(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(domain("ragged bulk table"));
        }
        let mut bulk = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                bulk[j * m + i] = x;
            }
        }
        Self::from_parts(m, n, bulk, vec![0.5; m], vec![0.5; n])
    }

    pub fn dump<W: Write>(&self, spec: &SeedSpec, mut out: W) -> Result<()> {
        out.write_all(b"LPPFIELD")?;
        out.write_all(&(self.m as u64).to_le_bytes())?;
        out.write_all(&(self.n as u64).to_le_bytes())?;
        out.write_all(&spec.master_seed.to_le_bytes())?;
        out.write_all(&spec.replica_index.to_le_bytes())?;
        out.write_all(&(spec.experiment_id.len() as u64).to_le_bytes())?;
        out.write_all(spec.experiment_id.as_bytes())?;
        for part in [&self.bulk, &self.hor_uniforms, &self.ver_uniforms, &self.ne_top_uniforms, &self.ne_right_uniforms] {
            for x in part.iter() {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

impl WeightSource for WeightField {
    fn extents(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    #[inline(always)]
    fn bulk(&self, i: usize, j: usize) -> f64 {
        self.bulk[(j - 1) * self.m + (i - 1)]
    }

    fn hor_uniform(&self, i: usize) -> f64 {
        self.hor_uniforms[i - 1]
    }

    fn ver_uniform(&self, j: usize) -> f64 {
        self.ver_uniforms[j - 1]
    }

    fn ne_top_uniform(&self, i: usize) -> f64 {
        self.ne_top_uniforms[i - 1]
    }

    fn ne_right_uniform(&self, j: usize) -> f64 {
        self.ne_right_uniforms[j - 1]
    }

    fn fill_row(&self, j: usize, out: &mut [f64]) {
        out[1..=self.m].copy_from_slice(&self.bulk[(j - 1) * self.m..j * self.m]);
    }
}

pub fn sample_field(spec: &SeedSpec, m: usize, n: usize) -> Result<WeightField> {
    sample_field_with_budget(spec, m, n, DEFAULT_BUDGET_BYTES)
}

pub fn sample_field_with_budget(spec: &SeedSpec, m: usize, n: usize, budget: u64) -> Result<WeightField> {
    let lazy = LazyField::new(spec, m, n)?;
    let required = WeightField::required_bytes(m, n);
    if required > budget {
        return Err(Error::BudgetExceeded { required, allowed: budget });
    }
    let mut bulk = vec![0.0; m * n];
    let mut row = vec![0.0; m + 1];
    for j in 1..=n {
        lazy.fill_row(j, &mut row);
        bulk[(j - 1) * m..j * m].copy_from_slice(&row[1..]);
    }
    Ok(WeightField {
        m,
        n,
        bulk,
        hor_uniforms: (1..=m).map(|i| lazy.hor_uniform(i)).collect(),
        ver_uniforms: (1..=n).map(|j| lazy.ver_uniform(j)).collect(),
        ne_top_uniforms: (1..=m).map(|i| lazy.ne_top_uniform(i)).collect(),
        ne_right_uniforms: (1..=n).map(|j| lazy.ne_right_uniform(j)).collect(),
    })
}

/// Boundary weights indexed from 0; entry 0 is the (zero) origin weight.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryWeights {
    pub hor: Vec<f64>,
    pub ver: Vec<f64>,
}

impl BoundaryWeights {
    pub fn zero(m: usize, n: usize) -> Self {
        Self { hor: vec![0.0; m + 1], ver: vec![0.0; n + 1] }
    }
}

/// `hor_i = -ln U_i / w`, `ver_j = -ln U_j / (1 - z)`; absent sides are zero.
pub fn boundary_weights<S: WeightSource + ?Sized>(field: &S, params: BoundaryParam) -> Result<BoundaryWeights> {
    let params = BoundaryParam::new(params.w, params.z)?;
    let (m, n) = field.extents();
    let mut out = BoundaryWeights::zero(m, n);
    if params.has_hor() {
        for i in 1..=m {
            out.hor[i] = -field.hor_uniform(i).ln() / params.w;
        }
    }
    if params.has_ver() {
        let rate = params.ver_rate();
        for j in 1..=n {
            out.ver[j] = -field.ver_uniform(j).ln() / rate;
        }
    }
    Ok(out)
}

/// Weights of the northeast layers: `top[i]` sits at `(i, n+1)` and
/// `right[j]` at `(m+1, j)`, both indexed from 1; the corner is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct NortheastWeights {
    pub u: f64,
    pub top: Vec<f64>,
    pub right: Vec<f64>,
    pub corner: f64,
}

pub fn northeast_weights<S: WeightSource + ?Sized>(field: &S, u: f64) -> Result<NortheastWeights> {
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("northeast parameter u = {u} outside (0,1)")));
    }
    let (m, n) = field.extents();
    let mut top = vec![0.0; m + 1];
    let mut right = vec![0.0; n + 1];
    for (i, t) in top.iter_mut().enumerate().skip(1) {
        *t = -field.ne_top_uniform(i).ln() / u;
    }
    for (j, r) in right.iter_mut().enumerate().skip(1) {
        *r = -field.ne_right_uniform(j).ln() / (1.0 - u);
    }
    Ok(NortheastWeights { u, top, right, corner: 0.0 })
}

/// `n` i.i.d. `Exp(1 - mu)` draws from the tilted substream of `spec`.
pub fn tilted_exp_stream(spec: &SeedSpec, n: usize, mu: f64) -> Result<Vec<f64>> {
    if !(mu < 1.0) {
        return Err(domain(format!("tilt mu = {mu} must be below 1")));
    }
    let stream = spec.stream(Layer::Tilted);
    let rate = 1.0 - mu;
    Ok((0..n as u64).map(|k| stream.exp1(k) / rate).collect())
}

/// The untilted `Exp(1)` stream; equal to `tilted_exp_stream(spec, n, 0)`.
pub fn exp_stream(spec: &SeedSpec, n: usize) -> Vec<f64> {
    let stream = spec.stream(Layer::Tilted);
    (0..n as u64).map(|k| stream.exp1(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::ks_test;

    fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
        move |x| if x <= 0.0 { 0.0 } else { 1.0 - (-rate * x).exp() }
    }

    #[test]
    fn same_spec_same_field() {
        let spec = SeedSpec::new(7, "unit", 3);
        let a = sample_field(&spec, 13, 9).unwrap();
        let b = sample_field(&spec, 13, 9).unwrap();
        assert_eq!(a, b);
        let lazy = LazyField::new(&spec, 13, 9).unwrap();
        for j in 1..=9 {
            for i in 1..=13 {
                assert_eq!(a.bulk(i, j).to_bits(), lazy.bulk(i, j).to_bits());
            }
            assert_eq!(a.ver_uniform(j), lazy.ver_uniform(j));
        }
        let mut r1 = vec![0.0; 14];
        let mut r2 = vec![0.0; 14];
        a.fill_row(4, &mut r1);
        lazy.fill_row(4, &mut r2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn field_prefix_is_extent_independent() {
        let spec = SeedSpec::new(1, "prefix", 0);
        let small = sample_field(&spec, 4, 5).unwrap();
        let big = sample_field(&spec, 10, 11).unwrap();
        for j in 1..=5 {
            for i in 1..=4 {
                assert_eq!(small.bulk(i, j), big.bulk(i, j));
            }
        }
    }

    #[test]
    fn bulk_is_exp1() {
        let spec = SeedSpec::new(11, "ks-bulk", 0);
        let f = sample_field(&spec, 400, 250).unwrap();
        assert!(f.bulk.iter().all(|&x| x > 0.0));
        let (_, p) = ks_test(&f.bulk, exp_cdf(1.0)).unwrap();
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn replicas_differ() {
        let a = sample_field(&SeedSpec::new(5, "rep", 0), 50, 50).unwrap();
        let b = sample_field(&SeedSpec::new(5, "rep", 1), 50, 50).unwrap();
        let same = a.bulk.iter().zip(&b.bulk).filter(|(x, y)| x == y).count();
        assert!(same * 100 <= a.bulk.len());
    }

    #[test]
    fn budget_is_enforced() {
        let spec = SeedSpec::new(0, "budget", 0);
        match sample_field_with_budget(&spec, 100, 100, 1000) {
            Err(Error::BudgetExceeded { required, allowed }) => {
                assert_eq!(allowed, 1000);
                assert!(required > 80_000);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(sample_field(&spec, 0, 3).is_err());
    }

    #[test]
    fn boundary_coupling_and_sentinels() {
        let f = sample_field(&SeedSpec::new(2, "bd", 0), 30, 20).unwrap();
        let a = boundary_weights(&f, BoundaryParam::new(0.3, 0.2).unwrap()).unwrap();
        let b = boundary_weights(&f, BoundaryParam::new(0.6, 0.5).unwrap()).unwrap();
        for i in 1..=30 {
            assert!(b.hor[i] <= a.hor[i]);
        }
        // Vertical rate 1 - z falls as z grows, so weights grow.
        for j in 1..=20 {
            assert!(b.ver[j] >= a.ver[j]);
        }
        let bulk = boundary_weights(&f, BoundaryParam::bulk()).unwrap();
        assert!(bulk.hor.iter().chain(&bulk.ver).all(|&x| x == 0.0));
        assert!(boundary_weights(&f, BoundaryParam { w: 0.0, z: 0.5 }).is_err());
        assert!(boundary_weights(&f, BoundaryParam { w: 0.5, z: 1.0 }).is_err());
    }

    #[test]
    fn boundary_law() {
        let f = sample_field(&SeedSpec::new(3, "bd-law", 0), 20_000, 1).unwrap();
        let bw = boundary_weights(&f, BoundaryParam::new(0.5, 0.0).unwrap()).unwrap();
        let (_, p) = ks_test(&bw.hor[1..], exp_cdf(0.5)).unwrap();
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn northeast_layers() {
        let f = sample_field(&SeedSpec::new(4, "ne", 0), 10_000, 3).unwrap();
        let ne = northeast_weights(&f, 0.3).unwrap();
        assert_eq!(ne.corner, 0.0);
        assert_eq!(f.bulk(2, 2), f.bulk[f.m + 1]);
        let (_, p) = ks_test(&ne.top[1..], exp_cdf(0.3)).unwrap();
        assert!(p > 0.01, "p = {p}");
        assert!(northeast_weights(&f, 1.0).is_err());
    }

    #[test]
    fn tilted_stream_examples() {
        let spec = SeedSpec::new(9, "tilt", 0);
        assert_eq!(tilted_exp_stream(&spec, 100, 0.0).unwrap(), exp_stream(&spec, 100));
        let xs = tilted_exp_stream(&spec, 1_000_000, 0.5).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 2.0).abs() <= 3.0 * (var / n).sqrt(), "mean = {mean}");
        let ys = tilted_exp_stream(&spec, 10_000, -1.0).unwrap();
        let (_, p) = ks_test(&ys, exp_cdf(2.0)).unwrap();
        assert!(p > 0.01);
        assert!(tilted_exp_stream(&spec, 1, 1.0).is_err());
    }

    #[test]
    fn layers_uncorrelated() {
        let f = sample_field(&SeedSpec::new(6, "corr", 0), 100_000, 1).unwrap();
        let n = f.m;
        let xs = &f.bulk;
        let ys: Vec<f64> = f.hor_uniforms.iter().map(|u| -u.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for k in 0..n {
            sxy += (xs[k] - mx) * (ys[k] - my);
            sxx += (xs[k] - mx).powi(2);
            syy += (ys[k] - my).powi(2);
        }
        assert!((sxy / (sxx * syy).sqrt()).abs() < 0.01);
    }

    #[test]
    fn derive_seed_examples() {
        assert_eq!(derive_seed(1, "rains", 0), derive_seed(1, "rains", 0));
        let d = (derive_seed(42, "exit", 0) ^ derive_seed(42, "exit", 1)).count_ones();
        assert!(d >= 16, "hamming distance {d}");
        assert_ne!(derive_seed(42, "exit", 0), derive_seed(42, "tails", 0));
        assert_ne!(derive_seed(42, "exit", 0), derive_seed(43, "exit", 0));
    }

    #[test]
    fn derive_seed_no_collisions() {
        let mut keys = Vec::with_capacity(1_000_000);
        for e in 0..10 {
            let id = format!("experiment-{e}");
            for r in 0..100_000u64 {
                keys.push(derive_seed(2024, &id, r));
            }
        }
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), 1_000_000);
    }

    #[test]
    fn unit_open_bounds() {
        assert!(unit_open(0) > 0.0);
        assert!(unit_open(u64::MAX) < 1.0);
        let mut c = Stream::new(1, Layer::Bootstrap).cursor();
        for _ in 0..1000 {
            assert!(c.next_index(7) < 7);
        }
    }

    #[test]
    fn dump_header() {
        let spec = SeedSpec::new(1, "dump", 2);
        let f = sample_field(&spec, 3, 2).unwrap();
        let mut buf = Vec::new();
        f.dump(&spec, &mut buf).unwrap();
        assert_eq!(&buf[..8], b"LPPFIELD");
        assert_eq!(buf.len(), 8 + 5 * 8 + 4 + 8 * (6 + 3 + 2 + 3 + 2));
    }
}
