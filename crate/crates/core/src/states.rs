//! Two-mode covariance matrices and their local symplectic invariants.
//!
//! Matrices are vacuum-normalised (the vacuum is the identity) and ordered
//! as `(X1, P1, X2, P2)`, so `Γ = [[A1, B], [Bᵀ, A2]]` with 2×2 blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{
    blocks, det2, direct_sum, herm_eigvals, is_finite, max_abs, psd_from_eigvals, rotation, sigma,
    symmetry_defect, HermMat4, Mat2, Mat4, Symplectic, PSD_TOL, SYMMETRY_TOL,
};

/// Slack allowed on the ordering invariants of computed invariant vectors.
pub const INVARIANT_SLACK: f64 = 1e-10;

/// Tolerance on the symplectic defect of local blocks passed in by callers.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

/// A real symmetric 4×4 matrix obeying the uncertainty relation `Γ - iΣ ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    gamma: Mat4,
}

impl CovarianceMatrix {
    pub fn new(gamma: Mat4) -> Result<Self> {
        Self::with_tol(gamma, PSD_TOL)
    }

    pub fn with_tol(gamma: Mat4, tol: f64) -> Result<Self> {
        let ev = uncertainty_spectrum(&gamma)?;
        if !psd_from_eigvals(&ev, tol) {
            return Err(Error::UncertaintyViolated {
                min_eigenvalue: ev[0],
            });
        }
        Ok(Self {
            gamma: symmetrize(&gamma),
        })
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.gamma
    }

    pub fn a1(&self) -> Mat2 {
        blocks(&self.gamma).0
    }

    pub fn a2(&self) -> Mat2 {
        blocks(&self.gamma).3
    }

    pub fn b(&self) -> Mat2 {
        blocks(&self.gamma).1
    }

    /// The same state with the two modes relabelled.
    pub fn swap_modes(&self) -> Self {
        let p = swap_permutation();
        Self {
            gamma: p.transpose() * self.gamma * p,
        }
    }

    pub fn invariants(&self) -> Result<InvariantVector> {
        invariants(self)
    }
}

fn symmetrize(m: &Mat4) -> Mat4 {
    (m + m.transpose()) * 0.5
}

fn swap_permutation() -> Mat4 {
    let mut p = Mat4::zeros();
    p[(0, 2)] = 1.0;
    p[(1, 3)] = 1.0;
    p[(2, 0)] = 1.0;
    p[(3, 1)] = 1.0;
    p
}

fn check_symmetric(gamma: &Mat4) -> Result<()> {
    if !is_finite(gamma) {
        return Err(Error::NonFinite);
    }
    let defect = symmetry_defect(gamma);
    if defect > SYMMETRY_TOL * (1.0 + max_abs(gamma)) {
        return Err(Error::NotSymmetric { defect });
    }
    Ok(())
}

fn uncertainty_spectrum(gamma: &Mat4) -> Result<[f64; 4]> {
    check_symmetric(gamma)?;
    let h = HermMat4::new(symmetrize(gamma), -sigma())?;
    Ok(herm_eigvals(&h))
}

/// Whether `gamma` satisfies the uncertainty relation at relative tolerance `tol`.
pub fn validate(gamma: &Mat4, tol: f64) -> Result<bool> {
    let ev = uncertainty_spectrum(gamma)?;
    Ok(psd_from_eigvals(&ev, tol))
}

/// Smallest eigenvalue of `Γ - iΣ`.
pub fn uncertainty_margin(gamma: &Mat4) -> Result<f64> {
    Ok(uncertainty_spectrum(gamma)?[0])
}

/// Complete label of an orbit under local symplectic transformations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantVector {
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub xi4: f64,
}

impl InvariantVector {
    pub fn new(xi1: f64, xi2: f64, xi3: f64, xi4: f64) -> Result<Self> {
        let xi = Self { xi1, xi2, xi3, xi4 };
        xi.check()?;
        Ok(xi)
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.xi1, self.xi2, self.xi3, self.xi4]
    }

    pub fn check(&self) -> Result<()> {
        let a = self.to_array();
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.xi1 < 1.0 - INVARIANT_SLACK || self.xi2 < 1.0 - INVARIANT_SLACK {
            return Err(Error::InvalidInvariants(format!(
                "local invariants must be at least 1, got ({}, {})",
                self.xi1, self.xi2
            )));
        }
        if self.xi3 < self.xi4.abs() - INVARIANT_SLACK {
            return Err(Error::InvalidInvariants(format!(
                "need xi3 >= |xi4|, got ({}, {})",
                self.xi3, self.xi4
            )));
        }
        Ok(())
    }

    /// Relabels the two modes.
    pub fn swapped(self) -> Self {
        Self {
            xi1: self.xi2,
            xi2: self.xi1,
            ..self
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

pub fn invariants(gamma: &CovarianceMatrix) -> Result<InvariantVector> {
    let (a1, b, _, a2) = blocks(gamma.matrix());
    let d1 = det2(&a1);
    let d2 = det2(&a2);
    for det in [d1, d2] {
        if det <= 0.0 {
            return Err(Error::NonPositiveLocalDeterminant { det });
        }
    }
    let p = det2(&b);
    let s = (p * p - gamma.matrix().determinant() + d1 * d2) / (d1 * d2).sqrt();
    // xi3² and xi4² are the roots of u² - s·u + p² = 0
    let mut disc = s * s - 4.0 * p * p;
    if disc < 0.0 {
        if disc < -INVARIANT_SLACK * (1.0 + s * s) {
            return Err(Error::NoRealInvariants { discriminant: disc });
        }
        disc = 0.0;
    }
    let u_plus = 0.5 * (s + disc.sqrt());
    let u_minus = if u_plus > 0.0 { p * p / u_plus } else { 0.0 };
    let xi3 = u_plus.max(0.0).sqrt();
    let xi4 = if p == 0.0 {
        0.0
    } else {
        p.signum() * u_minus.max(0.0).sqrt()
    };
    let xi = InvariantVector {
        xi1: d1.sqrt(),
        xi2: d2.sqrt(),
        xi3,
        xi4,
    };
    xi.check()?;
    Ok(xi)
}

fn normal_form_matrix(xi: &InvariantVector) -> Mat4 {
    let mut g = Mat4::zeros();
    g[(0, 0)] = xi.xi1;
    g[(1, 1)] = xi.xi1;
    g[(2, 2)] = xi.xi2;
    g[(3, 3)] = xi.xi2;
    g[(0, 2)] = xi.xi3;
    g[(2, 0)] = xi.xi3;
    g[(1, 3)] = xi.xi4;
    g[(3, 1)] = xi.xi4;
    g
}

/// The normal-form covariance matrix with the given invariants.
///
/// Fails when the matrix violates the uncertainty relation: not every
/// invariant vector labels a state.
pub fn from_xi(xi: &InvariantVector) -> Result<CovarianceMatrix> {
    xi.check()?;
    CovarianceMatrix::new(normal_form_matrix(xi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormReduction {
    pub s1: Mat2,
    pub s2: Mat2,
    pub gamma_nf: CovarianceMatrix,
}

/// `√ξ · A^{-1/2}`: symmetric, unit determinant, and maps `A` to `ξ·I`.
fn local_normaliser(a: &Mat2) -> Mat2 {
    let root_det = det2(a).sqrt();
    let sqrt_a = (a + Mat2::identity() * root_det) / (a.trace() + 2.0 * root_det).sqrt();
    let inv = sqrt_a
        .try_inverse()
        .expect("local block is positive definite");
    inv * root_det.sqrt()
}

/// `B = R(phi) · diag(d1, d2) · R(theta)` with `d1 ≥ |d2|`.
pub(crate) fn rotation_svd(b: &Mat2) -> (f64, f64, f64, f64) {
    let e = 0.5 * (b[(0, 0)] + b[(1, 1)]);
    let f = 0.5 * (b[(0, 0)] - b[(1, 1)]);
    let g = 0.5 * (b[(1, 0)] + b[(0, 1)]);
    let h = 0.5 * (b[(1, 0)] - b[(0, 1)]);
    let q = e.hypot(h);
    let r = f.hypot(g);
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    (phi, q + r, q - r, theta)
}

/// Brings `gamma` to normal form with a local symplectic `S1 ⊕ S2`.
pub fn reduce_to_normal_form(gamma: &CovarianceMatrix) -> Result<NormalFormReduction> {
    let (a1, b, _, a2) = blocks(gamma.matrix());
    for a in [&a1, &a2] {
        let det = det2(a);
        if det <= 0.0 {
            return Err(Error::NonPositiveLocalDeterminant { det });
        }
    }
    let n1 = local_normaliser(&a1);
    let n2 = local_normaliser(&a2);
    // remaining freedom is SO(2) × SO(2) acting on the correlation block
    let (phi, _, _, theta) = rotation_svd(&(n1.transpose() * b * n2));
    let s1 = n1 * rotation(phi);
    let s2 = n2 * rotation(-theta);
    let s = direct_sum(&s1, &s2);
    let nf = s.transpose() * gamma.matrix() * s;
    Ok(NormalFormReduction {
        s1,
        s2,
        gamma_nf: CovarianceMatrix::new(symmetrize(&nf))?,
    })
}

/// `(S1 ⊕ S2)ᵀ Γ (S1 ⊕ S2)`.
pub fn apply_local_symplectic(
    gamma: &CovarianceMatrix,
    s1: &Mat2,
    s2: &Mat2,
) -> Result<CovarianceMatrix> {
    for s in [s1, s2] {
        let defect = s.symplectic_defect();
        if defect > SYMPLECTIC_TOL * (1.0 + max_abs(s).powi(2)) {
            return Err(Error::NotSymplectic { defect });
        }
    }
    let s = direct_sum(s1, s2);
    CovarianceMatrix::new(symmetrize(&(s.transpose() * gamma.matrix() * s)))
}

pub fn vacuum() -> CovarianceMatrix {
    CovarianceMatrix {
        gamma: Mat4::identity(),
    }
}

/// Two-mode squeezed vacuum with squeezing parameter `r ≥ 0`.
pub fn two_mode_squeezed(r: f64) -> Result<CovarianceMatrix> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "squeezing must be non-negative, got {r}"
        )));
    }
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    let mut g = Mat4::identity() * c;
    g[(0, 2)] = s;
    g[(2, 0)] = s;
    g[(1, 3)] = -s;
    g[(3, 1)] = -s;
    CovarianceMatrix::new(g)
}

/// On-disk state description: exactly one of a full covariance matrix
/// (row-major) or an invariant vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<[[f64; 4]; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<[f64; 4]>,
}

impl StateFile {
    pub fn from_xi(xi: &InvariantVector) -> Self {
        Self {
            covariance: None,
            xi: Some(xi.to_array()),
        }
    }

    pub fn from_covariance(gamma: &CovarianceMatrix) -> Self {
        Self {
            covariance: Some(mat4_to_rows(gamma.matrix())),
            xi: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        match (&file.covariance, &file.xi) {
            (Some(_), None) | (None, Some(_)) => Ok(file),
            _ => Err(Error::Format(
                "state file needs exactly one of \"covariance\" or \"xi\"".into(),
            )),
        }
    }

    pub fn to_state(&self) -> Result<CovarianceMatrix> {
        match (&self.covariance, &self.xi) {
            (Some(rows), None) => CovarianceMatrix::new(rows_to_mat4(rows)),
            (None, Some(xi)) => from_xi(&InvariantVector::from_array(*xi)?),
            _ => Err(Error::Format(
                "state file needs exactly one of \"covariance\" or \"xi\"".into(),
            )),
        }
    }
}

pub fn rows_to_mat4(rows: &[[f64; 4]; 4]) -> Mat4 {
    Mat4::from_fn(|i, j| rows[i][j])
}

pub fn mat4_to_rows(m: &Mat4) -> [[f64; 4]; 4] {
    let mut rows = [[0.0; 4]; 4];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    rows
}

pub fn mat2_to_rows(m: &Mat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}
