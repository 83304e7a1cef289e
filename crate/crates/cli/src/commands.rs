use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use caloron_core::chern_weil::{caloron_class, CaloronClassReport, ClassData, ClassRequest, InvariantPolynomial};
use caloron_core::lattice::{Group, LinkField};
use caloron_core::symbolic::{
    abelian_closed_form, caloron_integrand, canonicalize, low_degree_formula, render, string_class_integrand, Expression,
    RenderStyle,
};
use caloron_core::transform::{
    forward_transform, inverse_transform, link_forward, link_inverse, CaloronPair, LinkPair, ProductConnection,
};
use caloron_core::universal::{property_suite, Graph, CHECK_NAMES};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Representation, Scene};
use crate::report::{CheckRecord, RunReport};
use crate::{read_file, write_file, CliError, CliResult, EXIT_OK, EXIT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandVariant {
    Generic,
    Abelian,
    String,
    /// The low-degree nested-sum formula, printed as written.
    Closed,
}

/// Rendered caloron integrand for fiber dimension `d` and degree `k`.
pub fn expand(d: usize, k: usize, variant: ExpandVariant, style: RenderStyle) -> CliResult<String> {
    let e: Expression = match variant {
        ExpandVariant::Generic => caloron_integrand(d, k)?.into_expression(),
        ExpandVariant::Abelian => abelian_closed_form(d, k)?.into_expression(),
        ExpandVariant::String => {
            if d != 1 {
                return Err(CliError::Validation(format!("string classes live over a circle fiber, got --fiber-dim {d}")));
            }
            caloron_integrand(d, k)?;
            string_class_integrand(k)?
        }
        ExpandVariant::Closed => {
            caloron_integrand(d, k)?;
            low_degree_formula(2 * k - d, d)?
        }
    };
    let e = if variant == ExpandVariant::Closed { e } else { canonicalize(&e).into_expression() };
    Ok(render(&e, style))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Validation(format!("bad {what}: {e}")))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("values serialize");
    s.push('\n');
    s
}

/// Runs one direction of the correspondence on a JSON document; with
/// `roundtrip`, also runs the other direction and demands bit-exact
/// agreement with the input.
pub fn transform(input: &Path, direction: Direction, output: Option<&Path>, links: bool, roundtrip: bool) -> CliResult<i32> {
    let text = read_file(input)?;
    let (out, exact) = match (links, direction) {
        (false, Direction::Forward) => {
            let w: ProductConnection = parse_json(&text, "product connection")?;
            let (a, phi) = forward_transform(&w)?;
            let back = roundtrip.then(|| inverse_transform(&a, &phi)).transpose()?;
            (to_json(&CaloronPair { a, phi }), back.map(|b| b.bit_eq(&w)))
        }
        (false, Direction::Inverse) => {
            let p: CaloronPair = parse_json(&text, "caloron pair")?;
            let w = inverse_transform(&p.a, &p.phi)?;
            let back = roundtrip.then(|| forward_transform(&w)).transpose()?;
            let exact = back.map(|(a, phi)| CaloronPair { a, phi }.bit_eq(&p));
            (to_json(&w), exact)
        }
        (true, Direction::Forward) => {
            let u: LinkField = parse_json(&text, "link field")?;
            let p = link_forward(&u)?;
            let back = roundtrip.then(|| link_inverse(&p)).transpose()?;
            (to_json(&p), back.map(|b| b.bit_eq(&u)))
        }
        (true, Direction::Inverse) => {
            let p: LinkPair = parse_json(&text, "link pair")?;
            let u = link_inverse(&p)?;
            let back = roundtrip.then(|| link_forward(&u)).transpose()?;
            (to_json(&u), back.map(|b| b.bit_eq(&p)))
        }
    };
    if let Some(path) = output {
        write_file(path, &out)?;
    } else if !roundtrip {
        print!("{out}");
    }
    match exact {
        Some(true) => {
            println!("roundtrip: exact");
            Ok(EXIT_OK)
        }
        Some(false) => {
            println!("roundtrip: mismatch");
            Ok(EXIT_TOLERANCE)
        }
        None => Ok(EXIT_OK),
    }
}

fn class_json(rep: &CaloronClassReport) -> Value {
    json!({
        "r": rep.r,
        "d": rep.d,
        "k": rep.k,
        "pairings": rep.pairings,
        "closedness_residual": rep.closedness_residual,
        "warning": rep.warning,
    })
}

/// All requested classes of a scene.
pub fn scene_classes(scene: &Scene) -> CliResult<Vec<CaloronClassReport>> {
    let w = scene.connection()?;
    let pair;
    let links;
    let data = match scene.representation {
        Representation::Product => ClassData::Product(&w),
        Representation::Pair => {
            pair = forward_transform(&w)?;
            ClassData::Pair(&pair.0, &pair.1)
        }
        Representation::Links => {
            links = LinkField::from_connection(w.form(), w.twist())?;
            ClassData::Links(&links)
        }
    };
    let mut out = Vec::new();
    for &(r, k) in &scene.classes {
        let mut req = ClassRequest::new(InvariantPolynomial::new(k, scene.kind)?, r);
        req.path = scene.path;
        req.cycles = scene.config.classes.cycles.iter().filter(|c| c.axes.len() == r).cloned().collect();
        out.push(caloron_class(data, &req)?);
    }
    Ok(out)
}

pub struct ClassesOutcome {
    pub report: RunReport,
    pub lines: Vec<String>,
}

/// Computes the classes of a scene (and of its doubled grid with `refine`)
/// and checks them against the configured expectations.
pub fn classes(scene: &Scene, refine: bool) -> CliResult<ClassesOutcome> {
    let start = Instant::now();
    let tol = &scene.config.tolerance;
    let reports = scene_classes(scene)?;
    let mut checks = Vec::new();
    let mut lines = Vec::new();
    for rep in &reports {
        for p in &rep.pairings {
            lines.push(format!("sigma_{} {}: {:.12} (imag {:.1e})", rep.r, p.cycle, p.value, p.imag));
        }
        lines.push(format!("sigma_{} closedness residual: {:.3e}", rep.r, rep.closedness_residual));
        if let Some(w) = &rep.warning {
            lines.push(format!("warning: {w}"));
        }
        if let Some(t) = tol.closedness {
            checks.push(CheckRecord::at_most(format!("sigma_{}.closedness", rep.r), rep.closedness_residual, t));
        }
    }
    for e in &scene.config.expect {
        let rep = reports.iter().find(|r| r.r == e.degree).expect("validated");
        let selected: Vec<_> = rep.pairings.iter().filter(|p| e.cycle.as_ref().is_none_or(|c| c == &p.cycle)).collect();
        if selected.is_empty() {
            return Err(CliError::Validation(format!(
                "expectation names cycle {:?}, which sigma_{} does not pair with",
                e.cycle, e.degree
            )));
        }
        for p in selected {
            checks.push(CheckRecord::at_most(format!("sigma_{}.pairing[{}]", e.degree, p.cycle), (p.value - e.value).abs(), tol.pairing));
        }
    }
    let mut refined_json = Value::Null;
    if refine {
        let fine_scene = scene.refined(2)?;
        let fine = scene_classes(&fine_scene)?;
        let mut entries = Vec::new();
        for (c, f) in reports.iter().zip(&fine) {
            let (rc, rf) = (c.closedness_residual, f.closedness_residual);
            if rc <= tol.rounding_floor && rf <= tol.rounding_floor {
                checks.push(CheckRecord::at_most(format!("sigma_{}.refined_closedness", c.r), rf, tol.rounding_floor));
                lines.push(format!("sigma_{} refinement: residuals {rc:.3e} -> {rf:.3e} (rounding level)", c.r));
                entries.push(json!({ "r": c.r, "coarse": rc, "fine": rf, "ratio": Value::Null }));
            } else {
                let ratio = rc / rf;
                checks.push(CheckRecord::at_least(format!("sigma_{}.refine_ratio", c.r), ratio, tol.refine_ratio));
                lines.push(format!("sigma_{} refinement: residuals {rc:.3e} -> {rf:.3e}, ratio {ratio:.3}", c.r));
                entries.push(json!({ "r": c.r, "coarse": rc, "fine": rf, "ratio": ratio }));
            }
        }
        refined_json = json!({ "grid": fine_scene.grid, "classes": fine.iter().map(class_json).collect::<Vec<_>>(), "refinement": entries });
    }
    let results = json!({
        "grid": scene.grid,
        "group": scene.group,
        "classes": reports.iter().map(class_json).collect::<Vec<_>>(),
        "refined": refined_json,
    });
    let config = serde_json::to_value(&scene.config).expect("config serializes");
    let args = BTreeMap::from([("refine".to_string(), json!(refine))]);
    let report = RunReport::new("classes", args, config, checks, results)?
        .with_timings(BTreeMap::from([("total_s".to_string(), start.elapsed().as_secs_f64())]));
    Ok(ClassesOutcome { report, lines })
}

/// Selects checks of the universal suite: `all` or a comma-separated list.
pub fn select_checks(spec: &str) -> CliResult<Vec<&'static str>> {
    if spec == "all" {
        return Ok(CHECK_NAMES.to_vec());
    }
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim) {
        let known = CHECK_NAMES.iter().find(|n| **n == name).ok_or_else(|| {
            CliError::Validation(format!("unknown check `{name}` (known: all, {})", CHECK_NAMES.join(", ")))
        })?;
        if out.contains(known) {
            return Err(CliError::Validation(format!("check `{name}` is listed twice")));
        }
        out.push(*known);
    }
    Ok(out)
}

/// The universal-module property suite as a report.
pub fn universal(graph: &str, group: &str, seed: u64, checks: &str) -> CliResult<RunReport> {
    let start = Instant::now();
    let g = Graph::parse(graph)?;
    let grp = Group::parse(group)?;
    let wanted = select_checks(checks)?;
    let all = property_suite(&g, grp, seed)?;
    let records: Vec<CheckRecord> = wanted
        .iter()
        .map(|name| {
            let c = all.iter().find(|c| c.name == *name).expect("suite covers every name");
            CheckRecord::at_most(c.name.clone(), c.residual, c.tolerance)
        })
        .collect();
    let args = BTreeMap::from([
        ("graph".to_string(), json!(g.to_string())),
        ("group".to_string(), json!(grp.name())),
        ("seed".to_string(), json!(seed)),
        ("checks".to_string(), json!(wanted)),
    ]);
    let results = json!({ "vertices": g.vertices(), "edges": g.edge_count(), "basepoint": 0 });
    let report = RunReport::new("universal", args, Value::Null, records, results)?;
    Ok(report.with_timings(BTreeMap::from([("total_s".to_string(), start.elapsed().as_secs_f64())])))
}

/// Writes a report, optionally without timings.
pub fn emit_report(report: RunReport, path: Option<&PathBuf>, timings: bool) -> CliResult<()> {
    let report = if timings { report } else { RunReport { timings: None, ..report } };
    if let Some(p) = path {
        report.write(p)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_matches_table() {
        assert_eq!(expand(2, 2, ExpandVariant::Generic, RenderStyle::Plain).unwrap(), "NablaPhi^2 + 2*FA*FPhi");
        assert_eq!(expand(1, 1, ExpandVariant::Generic, RenderStyle::Latex).unwrap(), "\\nabla\\Phi");
        assert!(matches!(expand(9, 1, ExpandVariant::Generic, RenderStyle::Plain), Err(CliError::Validation(_))));
        assert_eq!(
            expand(2, 2, ExpandVariant::Abelian, RenderStyle::Plain).unwrap(),
            expand(2, 2, ExpandVariant::Generic, RenderStyle::Plain).unwrap()
        );
        assert!(expand(2, 2, ExpandVariant::String, RenderStyle::Plain).is_err());
    }

    #[test]
    fn check_selection() {
        assert_eq!(select_checks("all").unwrap().len(), CHECK_NAMES.len());
        assert_eq!(select_checks("green_inverse, abelian_fa_zero").unwrap(), vec!["green_inverse", "abelian_fa_zero"]);
        assert!(select_checks("green_inverse,green_inverse").is_err());
        assert!(select_checks("nope").is_err());
    }
}
