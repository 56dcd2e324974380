//! Fixed-size real matrix kernel for two-mode phase space.
//!
//! Everything here is 2×2 or 4×4. Complex Hermitian matrices only appear as
//! `Re + i·Im` pairs in positivity tests, so they are diagonalised through
//! the real symmetric 8×8 embedding `[[Re, -Im], [Im, Re]]`, whose spectrum
//! is the Hermitian spectrum with every eigenvalue doubled.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;
pub type Mat4 = Matrix4<f64>;
type Mat8 = SMatrix<f64, 8, 8>;

/// Symmetry tolerance used for type invariants.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default relative tolerance for positive-semidefiniteness.
pub const PSD_TOL: f64 = 1e-9;

/// The single-mode symplectic form `J = [[0, 1], [-1, 0]]`.
pub fn j2() -> Mat2 {
    Mat2::new(0.0, 1.0, -1.0, 0.0)
}

/// The two-mode symplectic form `Σ = J ⊕ J`.
pub fn sigma() -> Mat4 {
    direct_sum(&j2(), &j2())
}

pub fn direct_sum(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
    m
}

/// Splits a 4×4 matrix into its `(A1, B, Bᵀ-block, A2)` 2×2 blocks.
pub fn blocks(m: &Mat4) -> (Mat2, Mat2, Mat2, Mat2) {
    (
        m.fixed_view::<2, 2>(0, 0).into_owned(),
        m.fixed_view::<2, 2>(0, 2).into_owned(),
        m.fixed_view::<2, 2>(2, 0).into_owned(),
        m.fixed_view::<2, 2>(2, 2).into_owned(),
    )
}

pub fn det2(m: &Mat2) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Largest absolute entry.
pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn symmetry_defect(m: &Mat4) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn is_finite<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// A complex Hermitian 4×4 matrix stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMat4 {
    re: Mat4,
    im: Mat4,
}

impl HermMat4 {
    /// Builds `re + i·im`, rejecting it unless `re` is symmetric and `im`
    /// antisymmetric.
    pub fn new(re: Mat4, im: Mat4) -> Result<Self> {
        if !is_finite(&re) || !is_finite(&im) {
            return Err(Error::NonFinite);
        }
        let defect = max_abs(&(re - re.transpose())).max(max_abs(&(im + im.transpose())));
        let scale = 1.0 + max_abs(&re).max(max_abs(&im));
        if defect > SYMMETRY_TOL * scale {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self { re, im })
    }

    pub fn real(re: Mat4) -> Result<Self> {
        Self::new(re, Mat4::zeros())
    }

    pub fn re(&self) -> &Mat4 {
        &self.re
    }

    pub fn im(&self) -> &Mat4 {
        &self.im
    }

    fn embedding(&self) -> Mat8 {
        let mut e = Mat8::zeros();
        e.fixed_view_mut::<4, 4>(0, 0).copy_from(&self.re);
        e.fixed_view_mut::<4, 4>(4, 4).copy_from(&self.re);
        e.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-self.im));
        e.fixed_view_mut::<4, 4>(4, 0).copy_from(&self.im);
        // symmetrize away rounding in the inputs
        (e + e.transpose()) * 0.5
    }
}

/// Eigenvalues of a Hermitian 4×4 matrix in ascending order.
pub fn herm_eigvals(h: &HermMat4) -> [f64; 4] {
    let mut ev: Vec<f64> = h
        .embedding()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    // each Hermitian eigenvalue appears twice
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = 0.5 * (ev[2 * k] + ev[2 * k + 1]);
    }
    out
}

/// `true` iff the smallest eigenvalue is at least `-tol·(1 + max |λ|)`.
pub fn psd_check(h: &HermMat4, tol: f64) -> bool {
    let ev = herm_eigvals(h);
    psd_from_eigvals(&ev, tol)
}

pub(crate) fn psd_from_eigvals(ev: &[f64; 4], tol: f64) -> bool {
    let scale = ev.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    ev[0] >= -tol * (1.0 + scale)
}

/// Matrices carrying a canonical symplectic form.
pub trait Symplectic {
    /// Largest entry of `SᵀΩS - Ω`.
    fn symplectic_defect(&self) -> f64;
}

impl Symplectic for Mat2 {
    fn symplectic_defect(&self) -> f64 {
        let j = j2();
        max_abs(&(self.transpose() * j * self - j))
    }
}

impl Symplectic for Mat4 {
    fn symplectic_defect(&self) -> f64 {
        let s = sigma();
        max_abs(&(self.transpose() * s * self - s))
    }
}

pub fn symplectic_check<S: Symplectic>(s: &S, tol: f64) -> bool {
    s.symplectic_defect() <= tol
}

/// Euler form `R(alpha) · diag(e^{-z}, e^{z}) · R(beta)` of an `Sp(2, ℝ)` element.
pub fn euler_sp2(alpha: f64, z: f64, beta: f64) -> Mat2 {
    rotation(alpha) * Mat2::new((-z).exp(), 0.0, 0.0, z.exp()) * rotation(beta)
}

/// Deterministic random element of `Sp(2, ℝ)` with squeezing `|z| ≤ z_max`.
pub fn random_sp2(seed: u64, z_max: f64) -> Mat2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_sp2_with(&mut rng, z_max)
}

pub fn random_sp2_with<R: Rng + ?Sized>(rng: &mut R, z_max: f64) -> Mat2 {
    assert!(z_max > 0.0, "z_max must be positive");
    let alpha = rng.gen_range(0.0..2.0 * PI);
    let beta = rng.gen_range(0.0..2.0 * PI);
    let z = rng.gen_range(-z_max..=z_max);
    euler_sp2(alpha, z, beta)
}
