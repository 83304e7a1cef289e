//! U(1) and SU(2) as matrix groups, with 1x1 and 2x2 complex matrices sharing
//! one small value type.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Plaquettes and links whose rotation angle is within this much of `pi`
/// are rejected by the principal logarithm.
pub const BRANCH_GUARD: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix of order 1 or 2, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat {
    n: u8,
    e: [C64; 4],
}

impl Mat {
    pub fn zero(n: usize) -> Self {
        debug_assert!(n == 1 || n == 2);
        Mat { n: n as u8, e: [ZERO; 4] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n);
        m.e[0] = ONE;
        if n == 2 {
            m.e[3] = ONE;
        }
        m
    }

    pub fn scalar(z: C64) -> Self {
        Mat { n: 1, e: [z, ZERO, ZERO, ZERO] }
    }

    pub fn from_2x2(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat { n: 2, e: [a, b, c, d] }
    }

    /// Reads `n*n` entries from a flat slice.
    #[inline]
    pub fn from_slice(n: usize, s: &[C64]) -> Self {
        if n == 1 {
            Mat::scalar(s[0])
        } else {
            Mat::from_2x2(s[0], s[1], s[2], s[3])
        }
    }

    #[inline]
    pub fn write_to(&self, s: &mut [C64]) {
        s.copy_from_slice(self.entries());
    }

    pub fn order(&self) -> usize {
        self.n as usize
    }

    pub fn entries(&self) -> &[C64] {
        &self.e[..(self.n as usize * self.n as usize)]
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.e[row * self.n as usize + col]
    }

    pub fn trace(&self) -> C64 {
        if self.n == 1 {
            self.e[0]
        } else {
            self.e[0] + self.e[3]
        }
    }

    pub fn det(&self) -> C64 {
        if self.n == 1 {
            self.e[0]
        } else {
            self.e[0] * self.e[3] - self.e[1] * self.e[2]
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        if self.n == 1 {
            Mat::scalar(self.e[0].conj())
        } else {
            Mat::from_2x2(self.e[0].conj(), self.e[2].conj(), self.e[1].conj(), self.e[3].conj())
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = *self;
        for z in out.e.iter_mut().take(self.n as usize * self.n as usize) {
            *z = f(*z);
        }
        out
    }

    pub fn commutator(&self, other: &Mat) -> Mat {
        if self.n == 1 {
            return Mat::zero(1);
        }
        *self * *other - *other * *self
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Add for Mat {
    type Output = Mat;

    #[inline]
    fn add(self, rhs: Mat) -> Mat {
        let mut out = self;
        for (a, b) in out.e.iter_mut().zip(rhs.e) {
            *a += b;
        }
        out
    }
}

impl AddAssign for Mat {
    fn add_assign(&mut self, rhs: Mat) {
        *self = *self + rhs;
    }
}

impl Sub for Mat {
    type Output = Mat;

    #[inline]
    fn sub(self, rhs: Mat) -> Mat {
        let mut out = self;
        for (a, b) in out.e.iter_mut().zip(rhs.e) {
            *a -= b;
        }
        out
    }
}

impl Neg for Mat {
    type Output = Mat;

    fn neg(self) -> Mat {
        self.map(|z| -z)
    }
}

impl Mul for Mat {
    type Output = Mat;

    #[inline]
    fn mul(self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.n, rhs.n);
        if self.n == 1 {
            return Mat::scalar(self.e[0] * rhs.e[0]);
        }
        let [a, b, c, d] = self.e;
        let [p, q, r, s] = rhs.e;
        Mat::from_2x2(a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s)
    }
}

/// Structure group of the bundles in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    U1,
    SU2,
}

impl Group {
    pub fn parse(name: &str) -> Result<Group> {
        match name.to_ascii_lowercase().as_str() {
            "u1" => Ok(Group::U1),
            "su2" => Ok(Group::SU2),
            other => Err(Error::Config(format!("unknown group `{other}` (expected u1 or su2)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::U1 => "u1",
            Group::SU2 => "su2",
        }
    }

    /// Matrix order of the defining representation.
    pub fn order(self) -> usize {
        match self {
            Group::U1 => 1,
            Group::SU2 => 2,
        }
    }

    pub fn is_abelian(self) -> bool {
        self == Group::U1
    }

    /// Real dimension of the Lie algebra.
    pub fn algebra_dim(self) -> usize {
        match self {
            Group::U1 => 1,
            Group::SU2 => 3,
        }
    }

    pub fn identity(self) -> Mat {
        Mat::identity(self.order())
    }

    pub fn zero(self) -> Mat {
        Mat::zero(self.order())
    }

    /// Basis orthonormal for `<X, Y> = -Re tr(XY)`: `i` for U(1) and
    /// `i sigma_k / sqrt 2` for SU(2).
    pub fn basis(self) -> Vec<Mat> {
        match self {
            Group::U1 => vec![Mat::scalar(I)],
            Group::SU2 => {
                let s = FRAC_1_SQRT_2;
                vec![
                    Mat::from_2x2(ZERO, I * s, I * s, ZERO),
                    Mat::from_2x2(ZERO, ONE * s, -ONE * s, ZERO),
                    Mat::from_2x2(I * s, ZERO, ZERO, -I * s),
                ]
            }
        }
    }

    /// Algebra element with the given basis coordinates.
    pub fn from_coords(self, coords: &[f64]) -> Mat {
        debug_assert_eq!(coords.len(), self.algebra_dim());
        self.basis().iter().zip(coords).fold(self.zero(), |acc, (b, &c)| acc + b.scale(c))
    }

    pub fn coords(self, x: &Mat) -> Vec<f64> {
        self.basis().iter().map(|b| inner(b, x)).collect()
    }

    pub fn is_algebra(self, x: &Mat, tol: f64) -> bool {
        let anti = (*x + x.dagger()).max_abs() <= tol;
        match self {
            Group::U1 => anti,
            Group::SU2 => anti && x.trace().norm() <= tol,
        }
    }

    pub fn is_element(self, u: &Mat, tol: f64) -> bool {
        let unitary = (*u * u.dagger() - self.identity()).max_abs() <= tol;
        match self {
            Group::U1 => unitary,
            Group::SU2 => unitary && (u.det() - ONE).norm() <= tol,
        }
    }

    /// Orthogonal projection of an arbitrary matrix onto the algebra.
    pub fn project_algebra(self, m: &Mat) -> Mat {
        let anti = (*m - m.dagger()).scale(0.5);
        match self {
            Group::U1 => anti,
            Group::SU2 => {
                let t = anti.trace() * 0.5;
                anti - Mat::identity(2).scale_c(t)
            }
        }
    }

    pub fn exp(self, x: &Mat) -> Mat {
        match self {
            Group::U1 => Mat::scalar(x.e[0].exp()),
            Group::SU2 => {
                // x = i v.sigma, x^2 = -|v|^2
                let theta = (-(*x * *x).trace().re * 0.5).max(0.0).sqrt();
                let sinc = if theta < 1e-8 { 1.0 - theta * theta / 6.0 } else { theta.sin() / theta };
                Mat::identity(2).scale(theta.cos()) + x.scale(sinc)
            }
        }
    }

    /// Rotation angle in `[0, pi]` of a group element: `|arg u|` for U(1)
    /// and the half-angle `phi` of `cos(phi) + i sin(phi) n.sigma` for SU(2).
    pub fn angle(self, u: &Mat) -> f64 {
        match self {
            Group::U1 => u.e[0].arg().abs(),
            Group::SU2 => {
                let (a0, v) = su2_parts(u);
                v.iter().map(|c| c * c).sum::<f64>().sqrt().atan2(a0)
            }
        }
    }

    /// Principal logarithm; refuses elements within [`BRANCH_GUARD`] of the cut.
    pub fn log(self, u: &Mat) -> Result<Mat> {
        let angle = self.angle(u);
        if angle >= PI - BRANCH_GUARD {
            return Err(Error::BranchCut(format!(
                "rotation angle {angle:.9} is within {BRANCH_GUARD:e} of pi; refine the grid"
            )));
        }
        Ok(match self {
            Group::U1 => Mat::scalar(C64::new(0.0, u.e[0].arg())),
            Group::SU2 => {
                let (_, v) = su2_parts(u);
                let s = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                let factor = if s < 1e-12 { 1.0 } else { angle / s };
                // i (v1 sigma1 + v2 sigma2 + v3 sigma3)
                Mat::from_2x2(
                    C64::new(0.0, v[2] * factor),
                    C64::new(v[1] * factor, v[0] * factor),
                    C64::new(-v[1] * factor, v[0] * factor),
                    C64::new(0.0, -v[2] * factor),
                )
            }
        })
    }

    pub fn random_algebra<R: Rng>(self, rng: &mut R, scale: f64) -> Mat {
        let coords: Vec<f64> = (0..self.algebra_dim()).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
        self.from_coords(&coords)
    }

    pub fn random_element<R: Rng>(self, rng: &mut R, scale: f64) -> Mat {
        self.exp(&self.random_algebra(rng, scale))
    }
}

/// `u = a0 + i (v1 sigma1 + v2 sigma2 + v3 sigma3)`.
fn su2_parts(u: &Mat) -> (f64, [f64; 3]) {
    let a = u.get(0, 0);
    let b = u.get(0, 1);
    (a.re, [b.im, b.re, a.im])
}

/// Invariant inner product `-Re tr(XY)` on the algebra.
pub fn inner(x: &Mat, y: &Mat) -> f64 {
    -(*x * *y).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_is_orthonormal() {
        for g in [Group::U1, Group::SU2] {
            let b = g.basis();
            for (i, x) in b.iter().enumerate() {
                assert!(g.is_algebra(x, 1e-15));
                for (j, y) in b.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((inner(x, y) - expected).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn exp_lands_in_group_and_log_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [Group::U1, Group::SU2] {
            for _ in 0..50 {
                let x = g.random_algebra(&mut rng, 1.2);
                let u = g.exp(&x);
                assert!(g.is_element(&u, 1e-12));
                let back = g.log(&u).unwrap();
                assert!((back - x).max_abs() < 1e-12, "{back:?} vs {x:?}");
                assert!(g.is_algebra(&back, 1e-12));
            }
        }
    }

    #[test]
    fn su2_exp_closed_form() {
        // exp(i theta sigma3) = diag(e^{i theta}, e^{-i theta})
        let theta = 0.7;
        let x = Mat::from_2x2(C64::new(0.0, theta), ZERO, ZERO, C64::new(0.0, -theta));
        let u = Group::SU2.exp(&x);
        assert!((u.get(0, 0) - C64::from_polar(1.0, theta)).norm() < 1e-15);
        assert!((u.get(1, 1) - C64::from_polar(1.0, -theta)).norm() < 1e-15);
    }

    #[test]
    fn log_guards_branch_cut() {
        let u = Mat::scalar(C64::from_polar(1.0, PI - 1e-8));
        assert!(matches!(Group::U1.log(&u), Err(Error::BranchCut(_))));
        let minus_one = Mat::identity(2).scale(-1.0);
        assert!(matches!(Group::SU2.log(&minus_one), Err(Error::BranchCut(_))));
        let ok = Mat::scalar(C64::from_polar(1.0, PI - 1e-3));
        assert!(Group::U1.log(&ok).is_ok());
    }

    #[test]
    fn projection_is_idempotent_on_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Group::SU2.random_algebra(&mut rng, 1.0);
        assert!((Group::SU2.project_algebra(&x) - x).max_abs() < 1e-15);
        let m = Mat::from_2x2(C64::new(1.0, 2.0), C64::new(3.0, -1.0), C64::new(0.5, 0.5), C64::new(-2.0, 1.0));
        assert!(Group::SU2.is_algebra(&Group::SU2.project_algebra(&m), 1e-15));
    }

    #[test]
    fn inner_product_is_ad_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = Group::SU2.random_element(&mut rng, 2.0);
        let x = Group::SU2.random_algebra(&mut rng, 1.0);
        let y = Group::SU2.random_algebra(&mut rng, 1.0);
        let cx = g * x * g.dagger();
        let cy = g * y * g.dagger();
        assert!((inner(&cx, &cy) - inner(&x, &y)).abs() < 1e-14);
    }
}
