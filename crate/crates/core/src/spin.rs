//! Spin operators, directions and rotations for spin-(n-1)/2 subsystems.
//!
//! Level `k` of an `n`-level subsystem is the S_z eigenstate with eigenvalue
//! `k - (n-1)/2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A unit vector on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub polar: f64,
    pub azimuth: f64,
}

impl Direction {
    /// Normalises `polar` into `[0, pi]` and `azimuth` into `[0, 2pi)`.
    pub fn new(polar: f64, azimuth: f64) -> Self {
        let mut polar = polar.rem_euclid(2.0 * PI);
        let mut azimuth = azimuth;
        if polar > PI {
            polar = 2.0 * PI - polar;
            azimuth += PI;
        }
        Direction { polar, azimuth: azimuth.rem_euclid(2.0 * PI) }
    }

    pub fn z() -> Self {
        Direction { polar: 0.0, azimuth: 0.0 }
    }

    pub fn x() -> Self {
        Direction { polar: PI / 2.0, azimuth: 0.0 }
    }

    pub fn y() -> Self {
        Direction { polar: PI / 2.0, azimuth: PI / 2.0 }
    }

    /// Direction in the xz-plane at angle `theta` from +z (towards +x).
    pub fn in_xz_plane(theta: f64) -> Self {
        Direction::new(theta, 0.0)
    }

    /// Uniformly distributed on the sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u: f64 = rng.gen();
        let v: f64 = rng.gen();
        Direction { polar: (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos(), azimuth: 2.0 * PI * v }
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let polar = (v[2] / r).clamp(-1.0, 1.0).acos();
        let azimuth = v[1].atan2(v[0]);
        Direction::new(polar, azimuth)
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (sp, cp) = self.polar.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [sp * ca, sp * sa, cp]
    }

    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos()
    }
}

/// Spin matrices for a single `n`-level subsystem (spin s = (n-1)/2).
#[derive(Debug, Clone)]
pub struct SpinFrame {
    n: usize,
    sx: CMatrix,
    sy: CMatrix,
    sz: CMatrix,
    // Eigendecomposition of S_y, eigenvalues snapped to exact half-integers.
    sy_vectors: CMatrix,
    sy_values: Vec<f64>,
}

impl SpinFrame {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Size { n, min: 2, max: usize::MAX });
        }
        let s = (n as f64 - 1.0) / 2.0;
        let mut sz = CMatrix::zeros(n, n);
        let mut raise = CMatrix::zeros(n, n);
        for k in 0..n {
            let m = k as f64 - s;
            sz[(k, k)] = Complex64::new(m, 0.0);
            if k + 1 < n {
                raise[(k + 1, k)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
            }
        }
        let lower = raise.adjoint();
        let sx = (&raise + &lower).map(|c| c * 0.5);
        let sy = (&raise - &lower).map(|c| c / (2.0 * I));

        let eig = SymmetricEigen::new(sy.clone());
        let sy_values = eig.eigenvalues.iter().map(|&l| (l + s).round() - s).collect();

        Ok(SpinFrame { n, sx, sy, sz, sy_vectors: eig.eigenvectors, sy_values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spin(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0
    }

    pub fn sx(&self) -> &CMatrix {
        &self.sx
    }

    pub fn sy(&self) -> &CMatrix {
        &self.sy
    }

    pub fn sz(&self) -> &CMatrix {
        &self.sz
    }

    /// `n . S` for the unit vector of `dir`.
    pub fn component(&self, dir: &Direction) -> CMatrix {
        let v = dir.unit_vector();
        self.sx.map(|c| c * v[0]) + self.sy.map(|c| c * v[1]) + self.sz.map(|c| c * v[2])
    }

    fn exp_sy(&self, angle: f64) -> CMatrix {
        let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.n,
            self.sy_values.iter().map(|&l| (-I * angle * l).exp()),
        ));
        &self.sy_vectors * phases * self.sy_vectors.adjoint()
    }

    fn exp_sz(&self, angle: f64) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.n,
            (0..self.n).map(|k| (-I * angle * self.sz[(k, k)].re).exp()),
        ))
    }
}

/// A single-subsystem rotation `exp(-i phi S_z) exp(-i theta S_y)`.
#[derive(Debug, Clone)]
pub struct Rotation {
    n: usize,
    u: CMatrix,
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        Rotation { n, u: CMatrix::identity(n, n) }
    }

    pub fn from_matrix(u: CMatrix) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch { expected: u.nrows(), actual: u.ncols() });
        }
        Ok(Rotation { n: u.nrows(), u })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn adjoint(&self) -> Rotation {
        Rotation { n: self.n, u: self.u.adjoint() }
    }

    /// Largest entry of `|U U^dagger - 1|`.
    pub fn unitarity_error(&self) -> f64 {
        let d = &self.u * self.u.adjoint() - CMatrix::identity(self.n, self.n);
        d.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Rotation taking the S_z eigenbasis onto the eigenbasis of the spin
/// component along `dir`: `U S_z U^dagger = dir . S`.
pub fn rotation_operator(frame: &SpinFrame, dir: &Direction) -> Rotation {
    let u = frame.exp_sz(dir.azimuth) * frame.exp_sy(dir.polar);
    Rotation { n: frame.n, u }
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
}
