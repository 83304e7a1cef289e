//! The acceptance suite behind `caloron selftest`, one function per
//! criterion. Oracles are computed independently of the code under test
//! wherever one exists: literal tables, analytic derivatives of
//! band-limited samples, plaquette windings and integer twists.

use std::collections::BTreeMap;
use std::time::Instant;

use caloron_core::chern_weil::{
    caloron_class, string_class, ClassData, ClassPath, ClassRequest, Cycle, InvariantPolynomial, PolyKind,
};
use caloron_core::lattice::{
    sample, BandLimited, BundleTwist, Family, FormField, Grid, Group, LinkField, ModeOptions,
};
use caloron_core::symbolic::{
    abelian_closed_form, caloron_integrand, canonicalize, low_degree_formula, string_class_integrand, table_fixture,
    TABLE_CELLS,
};
use caloron_core::transform::{
    curvature, curvature_split, forward_transform, inverse_transform, link_forward, link_inverse, nabla_phi, CaloronPair,
    ProductConnection,
};
use caloron_core::universal::{property_suite, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{CheckRecord, RunReport};
use crate::CliResult;

pub const CRITERIA: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: String,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    /// Wall-clock limit in seconds, if the criterion has one.
    #[serde(skip)]
    pub limit_s: Option<f64>,
    #[serde(skip)]
    pub elapsed_s: f64,
}

impl CriterionResult {
    fn new(id: usize, title: &str, limit_s: Option<f64>) -> CriterionResult {
        CriterionResult { id, title: title.into(), checks: Vec::new(), notes: Vec::new(), limit_s, elapsed_s: 0.0 }
    }

    pub fn checks_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn within_time(&self) -> bool {
        self.limit_s.is_none_or(|l| self.elapsed_s < l)
    }

    pub fn pass(&self) -> bool {
        self.checks_pass() && self.within_time()
    }

    /// One summary line.
    pub fn line(&self) -> String {
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} = {:.4e} vs {:.1e}", c.name, c.value, c.threshold))
            .collect();
        let time = match self.limit_s {
            Some(l) => format!("{:.2} s (limit {l} s)", self.elapsed_s),
            None => format!("{:.2} s", self.elapsed_s),
        };
        let detail = if failed.is_empty() {
            format!("{} checks", self.checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        };
        format!(
            "criterion {} {}: {} ({detail}; {time})",
            self.id,
            self.title,
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

fn sub_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i)
}

/// Every populated cell of the integrand table equals the expansion.
pub fn criterion_1() -> CliResult<CriterionResult> {
    let mut res = CriterionResult::new(1, "integrand table", Some(1.0));
    for &(d, k) in TABLE_CELLS.iter() {
        let lit = canonicalize(&table_fixture(d, k)?);
        let gen = caloron_integrand(d, k)?;
        res.checks.push(CheckRecord::holds(format!("cell(d={d},k={k})"), lit == gen));
    }
    res.notes.push(format!("{} populated cells", TABLE_CELLS.len()));
    Ok(res)
}

/// Closed formulas against the generic expansion.
pub fn criterion_2() -> CliResult<CriterionResult> {
    let mut res = CriterionResult::new(2, "closed formulas", Some(5.0));
    let mut compared = 0usize;
    let mut bad = 0usize;
    for r in 0..=4 {
        for d in 1..=8usize {
            if (r + d) % 2 != 0 {
                continue;
            }
            compared += 1;
            if canonicalize(&low_degree_formula(r, d)?) != caloron_integrand(d, (d + r) / 2)? {
                bad += 1;
                res.notes.push(format!("low-degree formula r={r} d={d} differs"));
            }
        }
    }
    res.checks.push(CheckRecord::exactly("low_degree_mismatches", bad as f64, 0.0));
    res.notes.push(format!("{compared} low-degree cases"));

    let (mut compared, mut bad) = (0usize, 0usize);
    for d in 1..=8usize {
        for k in 1..=6usize {
            if d > 2 * k {
                continue;
            }
            compared += 1;
            if abelian_closed_form(d, k)? != caloron_integrand(d, k)? {
                bad += 1;
                res.notes.push(format!("abelian formula d={d} k={k} differs"));
            }
        }
    }
    res.checks.push(CheckRecord::exactly("abelian_mismatches", bad as f64, 0.0));
    res.notes.push(format!("{compared} abelian cases"));

    let mut bad = 0usize;
    for k in 1..=6 {
        if canonicalize(&string_class_integrand(k)?) != caloron_integrand(1, k)? {
            bad += 1;
        }
    }
    res.checks.push(CheckRecord::exactly("string_mismatches", bad as f64, 0.0));
    Ok(res)
}

fn random_config(i: usize, seed: u64) -> CliResult<ProductConnection> {
    const SHAPES: [(&[usize], &[usize]); 10] = [
        (&[4], &[4]),
        (&[8], &[8]),
        (&[16], &[16]),
        (&[32], &[32]),
        (&[6], &[10]),
        (&[4, 5], &[6]),
        (&[5], &[4, 6]),
        (&[8], &[8, 8]),
        (&[4, 4], &[4, 4]),
        (&[12], &[32]),
    ];
    let (base, fiber) = SHAPES[i % SHAPES.len()];
    let grid = Grid::product(base, fiber)?;
    let s = sub_seed(seed, i as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(s);
    let (family, group) = if i.is_multiple_of(2) {
        (Family::Su2BandLimited { max_mode: 2 }, Group::SU2)
    } else {
        (Family::U1Harmonic { max_mode: 2 }, Group::U1)
    };
    let mut smp = sample(&family, &grid, group, s)?;
    if group == Group::U1 {
        let a = rng.gen_range(0..grid.dim() - 1);
        let b = rng.gen_range(a + 1..grid.dim());
        smp.twist = Some(BundleTwist::new(rng.gen_range(-3..=3), a, b)?);
    }
    Ok(ProductConnection::new(smp.connection, smp.twist)?)
}

/// Forward and inverse transforms compose to the identity, bit for bit.
pub fn criterion_3(seed: u64) -> CliResult<CriterionResult> {
    let mut res = CriterionResult::new(3, "transform round trip", Some(10.0));
    let (mut form_bad, mut pair_bad, mut link_bad, mut json_bad) = (0, 0, 0, 0);
    const CONFIGS: usize = 20;
    for i in 0..CONFIGS {
        let w = random_config(i, seed)?;
        let (a, phi) = forward_transform(&w)?;
        let back = inverse_transform(&a, &phi)?;
        if !back.bit_eq(&w) {
            form_bad += 1;
        }
        let (a2, phi2) = forward_transform(&back)?;
        let pair = CaloronPair { a, phi };
        if !(CaloronPair { a: a2, phi: phi2 }).bit_eq(&pair) {
            pair_bad += 1;
        }
        let text = serde_json::to_string(&pair).expect("pair serializes");
        match serde_json::from_str::<CaloronPair>(&text) {
            Ok(p) if p.bit_eq(&pair) => {}
            _ => json_bad += 1,
        }
        let u = LinkField::from_connection(w.form(), w.twist())?;
        let lp = link_forward(&u)?;
        let u2 = link_inverse(&lp)?;
        if !u2.bit_eq(&u) || !link_forward(&u2)?.bit_eq(&lp) {
            link_bad += 1;
        }
    }
    res.checks.push(CheckRecord::exactly("form_roundtrip_mismatches", form_bad as f64, 0.0));
    res.checks.push(CheckRecord::exactly("pair_roundtrip_mismatches", pair_bad as f64, 0.0));
    res.checks.push(CheckRecord::exactly("link_roundtrip_mismatches", link_bad as f64, 0.0));
    res.checks.push(CheckRecord::exactly("json_roundtrip_mismatches", json_bad as f64, 0.0));
    res.notes.push(format!("{CONFIGS} seeded configurations, alternating su2 and twisted u1, grids up to 32x32"));
    Ok(res)
}

/// Exact curvature of a band-limited connection: analytic `dA` plus the
/// pointwise bracket.
fn analytic_curvature(field: &BandLimited, grid: &Grid) -> CliResult<FormField> {
    let a = field.sample(grid)?;
    Ok(field.sample_ext_deriv(grid)?.add(&a.bracket(&a)?.scale(0.5))?)
}

/// Bidegree split, two `NablaPhi` paths and second-order convergence.
pub fn criterion_4(seed: u64) -> CliResult<CriterionResult> {
    let mut res = CriterionResult::new(4, "curvature decomposition", None);

    let mut partition = 0.0f64;
    for i in 0..6 {
        let w = random_config(i, seed)?;
        let f = curvature(&w)?;
        partition = partition.max(curvature_split(&w)?.total().max_abs_diff(&f)?);
    }
    res.checks.push(CheckRecord::exactly("partition_identity", partition, 0.0));

    let mut paths = 0.0f64;
    for (base, fiber, group) in [(&[32usize][..], &[32usize][..], Group::SU2), (&[32], &[32], Group::U1), (&[16, 16], &[16], Group::SU2)] {
        let grid = Grid::product(base, fiber)?;
        let family = if group == Group::SU2 { Family::Su2BandLimited { max_mode: 2 } } else { Family::U1Harmonic { max_mode: 2 } };
        let s = sample(&family, &grid, group, sub_seed(seed, 40))?;
        let w = ProductConnection::new(s.connection, s.twist)?;
        let (a, phi) = forward_transform(&w)?;
        paths = paths.max(nabla_phi(&a, &phi)?.max_abs_diff(&curvature_split(&w)?.nabla_phi)?);
    }
    res.checks.push(CheckRecord::at_most("nabla_phi_paths_n32", paths, 1e-10));

    // Mode 2 has four points per wavelength at n = 8, short of the
    // asymptotic regime, so refinement starts at 16.
    let levels = [16usize, 32, 64, 128];
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 41));
    let coarse = Grid::product(&[levels[0]], &[levels[0]])?;
    let field = BandLimited::random(&coarse, Group::SU2, 1, ModeOptions::default(), &mut rng);
    let mut err_f = Vec::new();
    let mut err_n = Vec::new();
    for &n in &levels {
        let grid = Grid::product(&[n], &[n])?;
        let exact = analytic_curvature(&field, &grid)?;
        let w = ProductConnection::new(field.sample(&grid)?, None)?;
        err_f.push(curvature(&w)?.max_abs_diff(&exact)?);
        let (a, phi) = forward_transform(&w)?;
        err_n.push(nabla_phi(&a, &phi)?.max_abs_diff(&exact.filter_bidegree(1, 1))?);
    }
    for (name, errs) in [("curvature", &err_f), ("nabla_phi", &err_n)] {
        for j in 1..errs.len() {
            let ratio = errs[j - 1] / errs[j];
            res.checks.push(CheckRecord::at_least(format!("{name}_ratio_{}_to_{}", levels[j - 1], levels[j]), ratio, 3.5));
        }
        res.notes.push(format!("{name} errors {}", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")));
    }
    Ok(res)
}

fn class_pairings(w: &ProductConnection, r: usize, k: usize, cycles: Vec<Cycle>) -> CliResult<Vec<(String, f64, f64)>> {
    let mut req = ClassRequest::new(InvariantPolynomial::new(k, PolyKind::ChernNormalized)?, r);
    req.cycles = cycles;
    let rep = caloron_class(ClassData::Product(w), &req)?;
    Ok(rep.pairings.into_iter().map(|p| (p.cycle, p.value, p.imag)).collect())
}

fn deformation(grid: &Grid, group: Group, seed: u64, amplitude: f64) -> CliResult<FormField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = ModeOptions { amplitude, ..ModeOptions::default() };
    Ok(BandLimited::random(grid, group, 1, opts, &mut rng).sample(grid)?)
}

/// Twisted U(1) scenes pair to their twist, independent of deformations.
pub fn criterion_5(seed: u64) -> CliResult<CriterionResult> {
    let mut res = CriterionResult::new(5, "chern integrality", Some(30.0));
    let grid = Grid::product(&[4], &[64, 64])?;
    let points: Vec<Cycle> = (0..4).map(|m| Cycle::point(vec![m])).collect();
    let mut integral = 0.0f64;
    let mut imag = 0.0f64;
    let mut invariance = 0.0f64;
    for c in -2i64..=2 {
        let twist = BundleTwist::new(c, 1, 2)?;
        let zero = FormField::zeros(&grid, 1, caloron_core::lattice::Target::Algebra(Group::U1));
        let w = ProductConnection::new(zero, Some(twist))?;
        let base = class_pairings(&w, 0, 1, points.clone())?;
        for (_, v, im) in &base {
            integral = integral.max((v - c as f64).abs());
            imag = imag.max(im.abs());
        }
        for j in 0..2u64 {
            let eta = deformation(&grid, Group::U1, sub_seed(seed, 50 + 10 * (c + 2) as u64 + j), 0.5)?;
            let wd = ProductConnection::new(eta, Some(twist))?;
            for ((_, v0, _), (_, v1, _)) in base.iter().zip(class_pairings(&wd, 0, 1, points.clone())?) {
                integral = integral.max((v1 - c as f64).abs());
                invariance = invariance.max((v1 - v0).abs());
            }
        }
    }
    res.checks.push(CheckRecord::at_most("pairing_minus_twist", integral, 1e-8));
    res.checks.push(CheckRecord::at_most("pairing_imaginary_part", imag, 1e-8));
    res.checks.push(CheckRecord::at_most("deformation_change", invariance, 1e-6));
    res.notes.push("M = S^1 (4 points), X = T^2 (64x64), c in -2..2, two deformations each".into());
    Ok(res)
}

/// Circle fibers: the degree-1 class against plaquette windings, and the
/// string class against the generic path.
pub fn criterion_6(seed: u64) -> CliResult<CriterionResult> {
    let mut res = CriterionResult::new(6, "string class", None);
    let grid = Grid::product(&[32], &[32])?;
    let mut chern = 0.0f64;
    let mut integer = 0.0f64;
    for c in -2i64..=2 {
        let twist = BundleTwist::new(c, 0, 1)?;
        let eta = deformation(&grid, Group::U1, sub_seed(seed, 60 + (c + 2) as u64), 0.4)?;
        let w = ProductConnection::new(eta, Some(twist))?;
        let v = class_pairings(&w, 1, 1, vec![Cycle { axes: vec![0], anchor: vec![0] }])?[0].1;
        let winding = LinkField::from_connection(w.form(), w.twist())?.plaquette_winding(0, 1)?;
        chern = chern.max((v - winding).abs());
        integer = integer.max((winding - winding.round()).abs()).max((winding - c as f64).abs());
    }
    res.checks.push(CheckRecord::at_most("sigma1_minus_plaquette_chern", chern, 1e-8));
    res.checks.push(CheckRecord::at_most("plaquette_chern_integrality", integer, 1e-8));

    let mut agree = 0.0f64;
    let cases: [(&[usize], Group, usize); 3] = [(&[32], Group::U1, 1), (&[8, 8, 8], Group::SU2, 2), (&[6, 6, 6], Group::U1, 2)];
    for (i, (base, group, k)) in cases.into_iter().enumerate() {
        let grid = Grid::product(base, &[8])?;
        let mut form = deformation(&grid, group, sub_seed(seed, 70 + i as u64), 0.5)?;
        let twist = (group == Group::U1).then(|| BundleTwist::new(1, 0, grid.dim() - 1)).transpose()?;
        if group == Group::SU2 {
            form = form.add(&deformation(&grid, group, sub_seed(seed, 80), 0.3)?)?;
        }
        let w = ProductConnection::new(form, twist)?;
        let poly = InvariantPolynomial::new(k, PolyKind::SymTrace)?;
        let r = 2 * k - 1;
        let s = string_class(ClassData::Product(&w), &poly, &[])?;
        for path in [ClassPath::Numeric, ClassPath::Symbolic] {
            let mut req = ClassRequest::new(poly, r);
            req.path = path;
            let g = caloron_class(ClassData::Product(&w), &req)?;
            agree = agree.max(s.class_form.max_abs_diff(&g.class_form)?);
            for (p, q) in s.pairings.iter().zip(&g.pairings) {
                agree = agree.max((p.value - q.value).abs());
            }
        }
    }
    res.checks.push(CheckRecord::at_most("string_vs_generic", agree, 1e-9));
    res.notes.push("M = S^1 and X = S^1 at 32x32 for the winding check; k = 2 string classes on T^3 x S^1".into());
    Ok(res)
}

/// Closedness of the degree-2 class under refinement.
pub fn criterion_7(seed: u64) -> CliResult<CriterionResult> {
    let mut res = CriterionResult::new(7, "closedness", None);
    let poly = InvariantPolynomial::new(2, PolyKind::SymTrace)?;

    // On M = T^2 the class has top degree, so d of it vanishes identically.
    let grid = Grid::product(&[8, 8], &[8, 8])?;
    let s = sample(&Family::Su2BandLimited { max_mode: 2 }, &grid, Group::SU2, sub_seed(seed, 90))?;
    let w = ProductConnection::new(s.connection, None)?;
    let t2 = caloron_class(ClassData::Product(&w), &ClassRequest::new(poly, 2))?.closedness_residual;
    res.checks.push(CheckRecord::exactly("t2_residual", t2, 0.0));

    // M = T^3, X = T^2: base components constant along the fiber, fiber
    // kept at 4x4, base refined.
    let levels = [8usize, 16, 32, 64];
    let coarse = Grid::product(&[levels[0]; 3], &[4, 4])?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 91));
    let opts = ModeOptions { max_mode: 1, modes: 6, base_fiber_constant: true, ..ModeOptions::default() };
    let field = BandLimited::random(&coarse, Group::U1, 1, opts, &mut rng);
    let mut residuals = Vec::new();
    for &n in &levels {
        let grid = Grid::product(&[n; 3], &[4, 4])?;
        let w = ProductConnection::new(field.sample(&grid)?, None)?;
        residuals.push(caloron_class(ClassData::Product(&w), &ClassRequest::new(poly, 2))?.closedness_residual);
    }
    for j in 1..levels.len() {
        let ratio = residuals[j - 1] / residuals[j];
        res.checks.push(CheckRecord::at_least(format!("t3_ratio_{}_to_{}", levels[j - 1], levels[j]), ratio, 3.5));
    }
    res.notes.push(format!(
        "T^3 x T^2 residuals {}",
        residuals.iter().map(|e| format!("{e:.4e}")).collect::<Vec<_>>().join(", ")
    ));
    Ok(res)
}

/// The universal-module property suite on ring:8 with SU(2).
pub fn criterion_8(seed: u64) -> CliResult<CriterionResult> {
    let mut res = CriterionResult::new(8, "universal module", Some(5.0));
    for c in property_suite(&Graph::ring(8)?, Group::SU2, seed)? {
        res.checks.push(CheckRecord::at_most(c.name, c.residual, c.tolerance));
    }
    Ok(res)
}

/// Runs one criterion (1 to 8) and times it.
pub fn run_criterion(id: usize, seed: u64) -> CliResult<CriterionResult> {
    let start = Instant::now();
    let mut r = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(seed),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(seed),
        8 => criterion_8(seed),
        other => Err(crate::CliError::Validation(format!("criterion {other} does not exist (1..={CRITERIA})"))),
    }?;
    r.elapsed_s = start.elapsed().as_secs_f64();
    Ok(r)
}

fn body(results: &[CriterionResult]) -> String {
    serde_json::to_string(results).expect("results serialize")
}

/// Determinism: the listed criteria rerun in-process give byte-identical
/// results. Criterion 7 is left out of the repeat for time; two full runs
/// of the binary are compared by the acceptance test.
pub fn criterion_9(seed: u64, first: &[CriterionResult]) -> CliResult<CriterionResult> {
    let start = Instant::now();
    let mut res = CriterionResult::new(9, "determinism", None);
    let ids: Vec<usize> = first.iter().map(|r| r.id).filter(|&i| i != 7).collect();
    let again = ids.iter().map(|&i| run_criterion(i, seed)).collect::<CliResult<Vec<_>>>()?;
    let before: Vec<CriterionResult> = first.iter().filter(|r| r.id != 7).cloned().collect();
    res.checks.push(CheckRecord::holds("rerun_identical", !ids.is_empty() && body(&before) == body(&again)));
    res.notes.push(format!("reran criteria {ids:?}"));
    res.elapsed_s = start.elapsed().as_secs_f64();
    Ok(res)
}

pub struct SelftestOutcome {
    pub results: Vec<CriterionResult>,
    pub report: RunReport,
}

impl SelftestOutcome {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(CriterionResult::pass)
    }
}

/// Runs the requested criteria (all when `only` is empty).
pub fn selftest(seed: u64, only: &[usize]) -> CliResult<SelftestOutcome> {
    let ids: Vec<usize> = if only.is_empty() { (1..=CRITERIA).collect() } else { only.to_vec() };
    if let Some(&bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA) {
        return Err(crate::CliError::Validation(format!("criterion {bad} does not exist (1..={CRITERIA})")));
    }
    let mut results = Vec::new();
    for &id in ids.iter().filter(|&&i| i != 9) {
        results.push(run_criterion(id, seed)?);
    }
    if ids.contains(&9) {
        let r = criterion_9(seed, &results)?;
        results.push(r);
    }
    let checks = results
        .iter()
        .flat_map(|r| r.checks.iter().map(move |c| CheckRecord { name: format!("c{}.{}", r.id, c.name), ..c.clone() }))
        .collect();
    let summary: Vec<Value> = results
        .iter()
        .map(|r| json!({ "id": r.id, "title": r.title, "checks_pass": r.checks_pass(), "notes": r.notes }))
        .collect();
    let args = BTreeMap::from([("seed".to_string(), json!(seed)), ("criteria".to_string(), json!(ids))]);
    let mut timings = BTreeMap::new();
    for r in &results {
        timings.insert(format!("criterion_{}_s", r.id), r.elapsed_s);
        if let Some(l) = r.limit_s {
            timings.insert(format!("criterion_{}_limit_s", r.id), l);
        }
    }
    let report = RunReport::new("selftest", args, Value::Null, checks, json!({ "criteria": summary }))?.with_timings(timings);
    Ok(SelftestOutcome { results, report })
}
