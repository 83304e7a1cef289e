use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::form::{FormField, Target};
use super::grid::{AxisSet, Grid};
use super::group::{Group, Mat};
use super::twist::BundleTwist;
use crate::{Error, Result};

/// One Fourier mode of one component: `sum_e (c_e cos(k.x) + s_e sin(k.x)) T_e`
/// over the algebra basis `T_e`, with `k_i = 2 pi m_i / L_i`.
#[derive(Debug, Clone, PartialEq)]
struct Mode {
    component: AxisSet,
    wave: Vec<i32>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Knobs for [`BandLimited::random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOptions {
    /// Largest integer wave number along any axis.
    pub max_mode: i32,
    /// Number of random modes per component.
    pub modes: usize,
    /// Overall amplitude; mode `m` is damped by `1 / (1 + |m|^2)`.
    pub amplitude: f64,
    /// Base-axis components of a product grid depend on base coordinates
    /// only.
    pub base_fiber_constant: bool,
}

impl Default for ModeOptions {
    fn default() -> Self {
        ModeOptions { max_mode: 2, modes: 3, amplitude: 0.5, base_fiber_constant: false }
    }
}

/// Analytic algebra-valued form with finitely many Fourier modes. It can be
/// sampled on any grid with the same axis lengths and differentiated
/// exactly, which makes it a convergence oracle for the finite-difference
/// operators.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimited {
    group: Group,
    degree: usize,
    lengths: Vec<f64>,
    modes: Vec<Mode>,
}

impl BandLimited {
    pub fn random<R: Rng>(grid: &Grid, group: Group, degree: usize, opts: ModeOptions, rng: &mut R) -> BandLimited {
        let lengths: Vec<f64> = grid.axes().iter().map(|a| a.length).collect();
        let mut modes = Vec::new();
        for component in AxisSet::subsets(grid.all_axes(), degree) {
            let allowed = if opts.base_fiber_constant && grid.is_product() && component.is_subset(grid.base_axes()) {
                grid.base_axes()
            } else {
                grid.all_axes()
            };
            for _ in 0..opts.modes {
                let wave: Vec<i32> = (0..grid.dim())
                    .map(|a| if allowed.contains(a) { rng.gen_range(-opts.max_mode..=opts.max_mode) } else { 0 })
                    .collect();
                let m2: i32 = wave.iter().map(|m| m * m).sum();
                let damp = opts.amplitude / (1.0 + m2 as f64);
                let cos = (0..group.algebra_dim()).map(|_| rng.gen_range(-1.0..1.0) * damp).collect();
                let sin = (0..group.algebra_dim()).map(|_| rng.gen_range(-1.0..1.0) * damp).collect();
                modes.push(Mode { component, wave, cos, sin });
            }
        }
        BandLimited { group, degree, lengths, modes }
    }

    /// A single real mode `amp * cos/sin(k.x)` along one basis direction.
    #[allow(clippy::too_many_arguments)]
    pub fn single(grid: &Grid, group: Group, degree: usize, component: AxisSet, wave: &[i32], basis: usize, cos: f64, sin: f64) -> BandLimited {
        let mut c = vec![0.0; group.algebra_dim()];
        let mut s = vec![0.0; group.algebra_dim()];
        c[basis] = cos;
        s[basis] = sin;
        BandLimited {
            group,
            degree,
            lengths: grid.axes().iter().map(|a| a.length).collect(),
            modes: vec![Mode { component, wave: wave.to_vec(), cos: c, sin: s }],
        }
    }

    pub fn plus(&self, other: &BandLimited) -> Result<BandLimited> {
        if self.group != other.group || self.degree != other.degree || self.lengths != other.lengths {
            return Err(Error::Shape("band-limited fields do not match".into()));
        }
        let mut out = self.clone();
        out.modes.extend(other.modes.iter().cloned());
        Ok(out)
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn phase(&self, m: &Mode, x: &[f64]) -> f64 {
        m.wave.iter().zip(x).zip(&self.lengths).map(|((&w, &xi), &l)| TAU * w as f64 * xi / l).sum()
    }

    fn combine(&self, c: &[f64]) -> Mat {
        self.group.from_coords(c)
    }

    /// Value of one component at a physical position.
    pub fn eval(&self, component: AxisSet, x: &[f64]) -> Mat {
        let mut acc = vec![0.0; self.group.algebra_dim()];
        for m in self.modes.iter().filter(|m| m.component == component) {
            let (s, c) = self.phase(m, x).sin_cos();
            for (e, a) in acc.iter_mut().enumerate() {
                *a += m.cos[e] * c + m.sin[e] * s;
            }
        }
        self.combine(&acc)
    }

    /// Exact partial derivative of one component along `axis`.
    pub fn partial(&self, component: AxisSet, axis: usize, x: &[f64]) -> Mat {
        let mut acc = vec![0.0; self.group.algebra_dim()];
        for m in self.modes.iter().filter(|m| m.component == component) {
            let k = TAU * m.wave[axis] as f64 / self.lengths[axis];
            if k == 0.0 {
                continue;
            }
            let (s, c) = self.phase(m, x).sin_cos();
            for (e, a) in acc.iter_mut().enumerate() {
                *a += k * (-m.cos[e] * s + m.sin[e] * c);
            }
        }
        self.combine(&acc)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        let lengths: Vec<f64> = grid.axes().iter().map(|a| a.length).collect();
        if lengths != self.lengths {
            return Err(Error::Shape("grid lengths differ from the sampled field".into()));
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Grid) -> Result<FormField> {
        self.check_grid(grid)?;
        Ok(FormField::from_fn(grid, self.degree, Target::Algebra(self.group), |set, site| {
            self.eval(set, &grid.position(site))
        }))
    }

    /// Exact exterior derivative, sampled.
    pub fn sample_ext_deriv(&self, grid: &Grid) -> Result<FormField> {
        self.check_grid(grid)?;
        Ok(FormField::from_fn(grid, self.degree + 1, Target::Algebra(self.group), |set, site| {
            let x = grid.position(site);
            set.iter().fold(self.group.zero(), |acc, a| {
                let sign = if set.count_below(a) % 2 == 0 { 1.0 } else { -1.0 };
                acc + self.partial(set.difference(AxisSet::single(a)), a, &x).scale(sign)
            })
        }))
    }
}

/// Named test configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Zero,
    /// Twisted U(1) bundle with zero periodic part: constant curvature.
    ConstantCurvatureTorus { chern: i64, axes: [usize; 2] },
    Su2BandLimited { max_mode: i32 },
    U1Harmonic { max_mode: i32 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Zero => "zero",
            Family::ConstantCurvatureTorus { .. } => "constant_curvature_torus",
            Family::Su2BandLimited { .. } => "su2_band_limited",
            Family::U1Harmonic { .. } => "u1_harmonic",
        }
    }

    /// Parses a family name with its integer parameters.
    pub fn parse(name: &str, chern: i64, axes: [usize; 2], max_mode: i32) -> Result<Family> {
        match name {
            "zero" => Ok(Family::Zero),
            "constant_curvature_torus" => Ok(Family::ConstantCurvatureTorus { chern, axes }),
            "su2_band_limited" => Ok(Family::Su2BandLimited { max_mode }),
            "u1_harmonic" => Ok(Family::U1Harmonic { max_mode }),
            other => Err(Error::Config(format!(
                "unknown family `{other}` (expected zero, constant_curvature_torus, su2_band_limited or u1_harmonic)"
            ))),
        }
    }

    /// Structure group implied by the family, if any.
    pub fn group(&self) -> Option<Group> {
        match self {
            Family::Zero => None,
            Family::ConstantCurvatureTorus { .. } | Family::U1Harmonic { .. } => Some(Group::U1),
            Family::Su2BandLimited { .. } => Some(Group::SU2),
        }
    }
}

/// A sampled connection 1-form together with its bundle twist.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub connection: FormField,
    pub twist: Option<BundleTwist>,
}

/// Deterministic connection of the given family; `group` is used by the
/// zero family.
pub fn sample(family: &Family, grid: &Grid, group: Group, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *family {
        Family::Zero => Ok(Sample { connection: FormField::zeros(grid, 1, Target::Algebra(group)), twist: None }),
        Family::ConstantCurvatureTorus { chern, axes } => {
            let twist = BundleTwist::new(chern, axes[0], axes[1])?;
            twist.validate(grid, Group::U1)?;
            Ok(Sample { connection: FormField::zeros(grid, 1, Target::Algebra(Group::U1)), twist: Some(twist) })
        }
        Family::Su2BandLimited { max_mode } | Family::U1Harmonic { max_mode } => {
            if max_mode < 0 {
                return Err(Error::Config("max_mode must be non-negative".into()));
            }
            let g = family.group().expect("band-limited families fix the group");
            let opts = ModeOptions { max_mode, ..ModeOptions::default() };
            let field = BandLimited::random(grid, g, 1, opts, &mut rng);
            Ok(Sample { connection: field.sample(grid)?, twist: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::AxisRole;

    #[test]
    fn seeded_samples_repeat() {
        let grid = Grid::periodic(&[8, 8], AxisRole::Fiber).unwrap();
        let fam = Family::Su2BandLimited { max_mode: 2 };
        let a = sample(&fam, &grid, Group::SU2, 7).unwrap();
        let b = sample(&fam, &grid, Group::SU2, 7).unwrap();
        assert!(a.connection.bit_eq(&b.connection));
        let c = sample(&fam, &grid, Group::SU2, 8).unwrap();
        assert!(!a.connection.bit_eq(&c.connection));
        a.connection.check_values(1e-12).unwrap();
    }

    #[test]
    fn zero_family_is_zero() {
        let grid = Grid::periodic(&[8], AxisRole::Fiber).unwrap();
        let s = sample(&Family::Zero, &grid, Group::SU2, 0).unwrap();
        assert_eq!(s.connection.max_abs(), 0.0);
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(matches!(Family::parse("sphere", 0, [0, 1], 1), Err(Error::Config(_))));
    }

    #[test]
    fn exact_derivative_matches_central_difference() {
        let grid = Grid::periodic(&[64, 64], AxisRole::Fiber).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = BandLimited::random(&grid, Group::SU2, 1, ModeOptions::default(), &mut rng);
        let err = f.sample(&grid).unwrap().ext_deriv().unwrap().max_abs_diff(&f.sample_ext_deriv(&grid).unwrap()).unwrap();
        assert!(err < 5e-2, "{err}");
    }
}
