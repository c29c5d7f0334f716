//! Exact pathwise checks on seeded random fields.

use crate::analytic::BoundaryParam;
use crate::error::Result;
use crate::lpp::{hor_params, lpp_bruteforce, lpp_full, point_to_point, ver_params, Variant};
use crate::randfield::{sample_field, Layer, SeedSpec, WeightField};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub detail: String,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Two path differences that may be the same path sums added in another
/// order are compared with this slack.
pub const COMPARISON_SLACK: f64 = 1e-12;

fn params_for(variant: Variant, w: f64, z: f64) -> Result<BoundaryParam> {
    match variant {
        Variant::Bulk => Ok(BoundaryParam::bulk()),
        Variant::Hor => hor_params(w),
        Variant::Ver => ver_params(z),
        _ => BoundaryParam::new(w, z),
    }
}

/// Field `k` of a check with random shape up to `max_side` and rates
/// `w` in [0.05, 0.95), `z` in [0.05, 0.95).
fn case(master_seed: u64, id: &str, k: u64, max_side: usize) -> Result<(WeightField, f64, f64)> {
    let spec = SeedSpec::new(master_seed, id, k);
    let mut c = spec.stream(Layer::Auxiliary(0)).cursor();
    let m = 1 + c.next_index(max_side);
    let n = 1 + c.next_index(max_side);
    let w = 0.05 + 0.9 * c.next_f64();
    let z = 0.05 + 0.9 * c.next_f64();
    Ok((sample_field(&spec, m, n)?, w, z))
}

/// DP values equal exhaustive path enumeration at every vertex, for all
/// four variants, on `fields` random fields with `m + n <= 12`.
pub fn dp_matches_bruteforce(master_seed: u64, fields: u64) -> Result<Check> {
    let mut cases = 0;
    let mut failures = 0;
    let mut first = String::new();
    for k in 0..fields {
        let (f, w, z) = case(master_seed, "invariants/bruteforce", k, 6)?;
        for variant in [Variant::Bulk, Variant::Hor, Variant::Ver, Variant::TwoSided] {
            let p = params_for(variant, w, z)?;
            let g = lpp_full(&f, variant, p)?;
            let start = variant.start();
            for i in start.0..=f.m {
                for j in start.1..=f.n {
                    if i + j == 0 {
                        continue;
                    }
                    cases += 1;
                    let b = lpp_bruteforce(&f, variant, p, (i, j))?;
                    if g.value(i, j) != b {
                        failures += 1;
                        if first.is_empty() {
                            first = format!("field {k} {variant:?} ({i},{j}): dp {} vs {b}", g.value(i, j));
                        }
                    }
                }
            }
        }
    }
    Ok(Check { name: "dp-bruteforce".into(), cases, failures, detail: first })
}

/// Domination `G <= G^{w,hor} <= G^{w,z}`, monotonicity of `G^{w,hor}` in
/// `w`, and the four comparison inequalities for point-to-point values,
/// on `grids` random grids of side up to 12.
pub fn coupling_checks(master_seed: u64, grids: u64) -> Result<Vec<Check>> {
    let mut dom = (0u64, 0u64, String::new());
    let mut mono = (0u64, 0u64, String::new());
    let mut comp = (0u64, 0u64, String::new());
    let note = |acc: &mut (u64, u64, String), ok: bool, what: &dyn Fn() -> String| {
        acc.0 += 1;
        if !ok {
            acc.1 += 1;
            if acc.2.is_empty() {
                acc.2 = what();
            }
        }
    };
    for k in 0..grids {
        let (f, w, z) = case(master_seed, "invariants/couplings", k, 12)?;
        let w2 = w + 0.5 * (1.0 - w);
        let bulk = lpp_full(&f, Variant::Bulk, BoundaryParam::bulk())?;
        let hor = lpp_full(&f, Variant::Hor, hor_params(w)?)?;
        let hor2 = lpp_full(&f, Variant::Hor, hor_params(w2)?)?;
        let two = lpp_full(&f, Variant::TwoSided, BoundaryParam::new(w, z)?)?;
        for i in 1..=f.m {
            for j in 1..=f.n {
                let (b, h, h2, t) = (bulk.value(i, j), hor.value(i, j), hor2.value(i, j), two.value(i, j));
                note(&mut dom, b <= h && h <= t, &|| format!("grid {k} ({i},{j}): {b} {h} {t}"));
                note(&mut mono, h2 <= h, &|| format!("grid {k} ({i},{j}): w {w} -> {h}, w {w2} -> {h2}"));
            }
        }
        // Comparison inequalities on the bulk, for u <= v strictly inside.
        let (m, n) = (f.m.min(7), f.n.min(7));
        let g = |u: (usize, usize), v: (usize, usize)| point_to_point(&f, u, v);
        let e1 = |p: (usize, usize)| (p.0 + 1, p.1);
        let e2 = |p: (usize, usize)| (p.0, p.1 + 1);
        for u in (1..=m).flat_map(|a| (1..=n).map(move |b| (a, b))) {
            for v in (u.0..m).flat_map(|a| (u.1..n).map(move |b| (a, b))) {
                let s = COMPARISON_SLACK;
                let at = || format!("grid {k} u {u:?} v {v:?}");
                if u.0 < v.0 {
                    let d = g(u, v) - g(e1(u), v);
                    note(&mut comp, d <= g(u, e2(v)) - g(e1(u), e2(v)) + s, &at);
                    note(&mut comp, d >= g(u, e1(v)) - g(e1(u), e1(v)) - s, &at);
                }
                if u.1 < v.1 {
                    let d = g(u, v) - g(e2(u), v);
                    note(&mut comp, d <= g(u, e1(v)) - g(e2(u), e1(v)) + s, &at);
                    note(&mut comp, d >= g(u, e2(v)) - g(e2(u), e2(v)) - s, &at);
                }
            }
        }
    }
    Ok([("domination", dom), ("monotone-in-w", mono), ("comparison", comp)]
        .into_iter()
        .map(|(name, (cases, failures, detail))| Check { name: name.into(), cases, failures, detail })
        .collect())
}
