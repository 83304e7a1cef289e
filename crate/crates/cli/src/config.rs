//! Scene files: TOML with dotted keys, e.g.
//!
//! ```toml
//! grid.base = [4]
//! grid.fiber = [32, 32]
//! sample.family = "constant_curvature_torus"
//! sample.chern = 1
//! sample.axes = [1, 2]
//! classes.degrees = [0]
//! ```

use std::path::Path;

use caloron_core::chern_weil::{class_degree, ClassPath, Cycle, InvariantPolynomial, PolyKind};
use caloron_core::lattice::{sample, Axis, AxisRole, BandLimited, Family, Grid, Group, ModeOptions};
use caloron_core::transform::ProductConnection;
use caloron_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{read_file, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub grid: GridConfig,
    /// `u1` or `su2`; defaults to the group of the sample family.
    #[serde(default)]
    pub group: Option<String>,
    pub sample: SampleConfig,
    #[serde(default)]
    pub polynomial: PolynomialConfig,
    pub classes: ClassesConfig,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub base: Vec<usize>,
    pub fiber: Vec<usize>,
    /// Circumferences of all axes, base first; `2 pi` each when absent.
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub family: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub chern: i64,
    /// Twist plane, as product-grid axes.
    #[serde(default)]
    pub axes: Option<[usize; 2]>,
    #[serde(default = "default_max_mode")]
    pub max_mode: i32,
    /// Band-limited periodic 1-form added to the sampled connection.
    #[serde(default)]
    pub deformation: Option<DeformationConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationConfig {
    pub amplitude: f64,
    #[serde(default = "default_max_mode")]
    pub max_mode: i32,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialConfig {
    #[serde(default = "default_kind")]
    pub kind: String,
    /// When set, every requested class must need exactly this degree.
    #[serde(default)]
    pub degree: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassesConfig {
    pub degrees: Vec<usize>,
    #[serde(default = "default_path")]
    pub path: String,
    /// `product`, `pair` or `links`.
    #[serde(default = "default_representation")]
    pub representation: String,
    #[serde(default)]
    pub cycles: Vec<Cycle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_pairing_tol")]
    pub pairing: f64,
    #[serde(default)]
    pub closedness: Option<f64>,
    #[serde(default = "default_refine_ratio")]
    pub refine_ratio: f64,
    /// Residuals below this are treated as rounding noise under refinement.
    #[serde(default = "default_floor")]
    pub rounding_floor: f64,
}

/// Expected pairing of the degree-`degree` class; all of its cycles when
/// `cycle` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub degree: usize,
    #[serde(default)]
    pub cycle: Option<String>,
    pub value: f64,
}

fn default_max_mode() -> i32 {
    2
}
fn default_kind() -> String {
    "chern_normalized".into()
}
fn default_path() -> String {
    "numeric".into()
}
fn default_representation() -> String {
    "product".into()
}
fn default_pairing_tol() -> f64 {
    1e-8
}
fn default_refine_ratio() -> f64 {
    3.5
}
fn default_floor() -> f64 {
    1e-12
}

impl Default for PolynomialConfig {
    fn default() -> Self {
        PolynomialConfig { kind: default_kind(), degree: None }
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            pairing: default_pairing_tol(),
            closedness: None,
            refine_ratio: default_refine_ratio(),
            rounding_floor: default_floor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Product,
    Pair,
    Links,
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub config: SceneConfig,
    pub grid: Grid,
    pub group: Group,
    pub family: Family,
    pub kind: PolyKind,
    pub path: ClassPath,
    pub representation: Representation,
    /// `(r, k)` per requested class.
    pub classes: Vec<(usize, usize)>,
}

impl SceneConfig {
    pub fn parse(text: &str) -> CliResult<SceneConfig> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("bad scene file: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<SceneConfig> {
        SceneConfig::parse(&read_file(path)?)
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl Scene {
    /// Checks every reference and the parity of each requested class before
    /// anything is computed.
    pub fn new(config: SceneConfig) -> CliResult<Scene> {
        let grid = build_grid(&config.grid)?;
        let dim = grid.dim();
        let base_dim = config.grid.base.len();
        let d = config.grid.fiber.len();

        let axes = config.sample.axes.unwrap_or([dim.saturating_sub(2), dim - 1]);
        if axes.iter().any(|&a| a >= dim) || axes[0] >= axes[1] {
            return Err(invalid(format!("twist axes {axes:?} must be two increasing axes below {dim}")));
        }
        let family = Family::parse(&config.sample.family, config.sample.chern, axes, config.sample.max_mode)?;
        let group = match (&config.group, family.group()) {
            (Some(name), implied) => {
                let g = Group::parse(name)?;
                if let Some(h) = implied {
                    if g != h {
                        return Err(invalid(format!("family {} needs group {}, got {}", family.name(), h.name(), g.name())));
                    }
                }
                g
            }
            (None, Some(h)) => h,
            (None, None) => Group::U1,
        };
        if config.sample.chern != 0 && !matches!(family, Family::ConstantCurvatureTorus { .. }) {
            return Err(invalid("sample.chern is only used by constant_curvature_torus"));
        }

        let kind = PolyKind::parse(&config.polynomial.kind)?;
        let path = match config.classes.path.as_str() {
            "numeric" => ClassPath::Numeric,
            "symbolic" => ClassPath::Symbolic,
            other => return Err(invalid(format!("unknown class path `{other}` (expected numeric or symbolic)"))),
        };
        let representation = match config.classes.representation.as_str() {
            "product" => Representation::Product,
            "pair" => Representation::Pair,
            "links" => Representation::Links,
            other => return Err(invalid(format!("unknown representation `{other}` (expected product, pair or links)"))),
        };
        if config.classes.degrees.is_empty() {
            return Err(invalid("classes.degrees is empty"));
        }
        let mut classes = Vec::new();
        for &r in &config.classes.degrees {
            let k = class_degree(r, d)?;
            InvariantPolynomial::new(k, kind)?;
            if let Some(want) = config.polynomial.degree {
                if want != k {
                    return Err(CliError::from(Error::Degree(format!(
                        "class degree {r} over a {d}-dimensional fiber needs polynomial degree {k}, polynomial.degree is {want}"
                    ))));
                }
            }
            if classes.iter().any(|&(s, _)| s == r) {
                return Err(invalid(format!("class degree {r} is requested twice")));
            }
            classes.push((r, k));
        }
        for c in &config.classes.cycles {
            if let Some(&a) = c.axes.iter().find(|&&a| a >= base_dim) {
                return Err(invalid(format!("cycle axis {a} does not exist on a {base_dim}-dimensional base")));
            }
            if !c.anchor.is_empty() && c.anchor.len() != base_dim {
                return Err(invalid(format!("cycle anchor {:?} needs {base_dim} coordinates", c.anchor)));
            }
            if !classes.iter().any(|&(r, _)| r == c.axes.len()) {
                return Err(invalid(format!("cycle {} has dimension {} but no class of that degree is requested", c.id(), c.axes.len())));
            }
        }
        for e in &config.expect {
            if !classes.iter().any(|&(r, _)| r == e.degree) {
                return Err(invalid(format!("expectation for degree {} but that class is not requested", e.degree)));
            }
        }
        if let Some(def) = &config.sample.deformation {
            if !(def.amplitude.is_finite() && def.amplitude >= 0.0) || def.max_mode < 0 {
                return Err(invalid("deformation needs a non-negative amplitude and max_mode"));
            }
        }
        Ok(Scene { config, grid, group, family, kind, path, representation, classes })
    }

    pub fn load(path: &Path) -> CliResult<Scene> {
        Scene::new(SceneConfig::load(path)?)
    }

    /// The same scene with every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> CliResult<Scene> {
        let mut s = self.clone();
        s.grid = self.grid.refined(factor)?;
        s.config.grid.base = self.config.grid.base.iter().map(|n| n * factor).collect();
        s.config.grid.fiber = self.config.grid.fiber.iter().map(|n| n * factor).collect();
        Ok(s)
    }

    /// The sampled connection plus the configured deformation.
    pub fn connection(&self) -> CliResult<ProductConnection> {
        let s = sample(&self.family, &self.grid, self.group, self.config.sample.seed)?;
        let mut form = s.connection;
        if let Some(def) = &self.config.sample.deformation {
            let mut rng = ChaCha8Rng::seed_from_u64(def.seed);
            let opts = ModeOptions { max_mode: def.max_mode, amplitude: def.amplitude, ..ModeOptions::default() };
            let eta = BandLimited::random(&self.grid, self.group, 1, opts, &mut rng).sample(&self.grid)?;
            form = form.add(&eta)?;
        }
        Ok(ProductConnection::new(form, s.twist)?)
    }

    pub fn fiber_dim(&self) -> usize {
        self.config.grid.fiber.len()
    }
}

fn build_grid(g: &GridConfig) -> CliResult<Grid> {
    if g.base.is_empty() || g.fiber.is_empty() {
        return Err(invalid("grid.base and grid.fiber each need at least one axis"));
    }
    let lengths = match &g.lengths {
        Some(l) if l.len() != g.base.len() + g.fiber.len() => {
            return Err(invalid(format!("grid.lengths has {} entries, expected {}", l.len(), g.base.len() + g.fiber.len())))
        }
        Some(l) => l.clone(),
        None => vec![std::f64::consts::TAU; g.base.len() + g.fiber.len()],
    };
    let roles = g.base.iter().map(|_| AxisRole::Base).chain(g.fiber.iter().map(|_| AxisRole::Fiber));
    let axes = g.base.iter().chain(&g.fiber).zip(lengths).zip(roles).map(|((&size, length), role)| Axis { size, length, role }).collect();
    Ok(Grid::new(axes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWIST: &str = r#"
grid.base = [4]
grid.fiber = [16, 16]
sample.family = "constant_curvature_torus"
sample.chern = 1
sample.axes = [1, 2]
classes.degrees = [0]
"#;

    #[test]
    fn parses_dotted_keys() {
        let s = Scene::new(SceneConfig::parse(TWIST).unwrap()).unwrap();
        assert_eq!(s.group, Group::U1);
        assert_eq!(s.classes, vec![(0, 1)]);
    }

    #[test]
    fn parity_is_checked_up_front() {
        let text = TWIST.replace("classes.degrees = [0]", "classes.degrees = [1]");
        let err = Scene::new(SceneConfig::parse(&text).unwrap()).unwrap_err();
        assert!(matches!(err, CliError::Validation(m) if m.contains("parity")));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(SceneConfig::parse(&format!("{TWIST}\nsample.colour = 3\n")).is_err());
    }

    #[test]
    fn group_must_match_family() {
        let text = format!("group = \"su2\"\n{TWIST}");
        assert!(Scene::new(SceneConfig::parse(&text).unwrap()).is_err());
    }
}
