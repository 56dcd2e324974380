//! Gaussian completely positive maps acting on covariance matrices as
//! `Γ ↦ MᵀΓM + G`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{
    det2, direct_sum, herm_eigvals, is_finite, max_abs, psd_from_eigvals, rotation, sigma,
    symmetry_defect, HermMat4, Mat2, Mat4, PSD_TOL, SYMMETRY_TOL,
};
use crate::states::{mat4_to_rows, rows_to_mat4, CovarianceMatrix, InvariantVector};

/// Relative tolerance when comparing the untouched mode's local invariant.
pub const LOCAL_MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianCPMap {
    m: Mat4,
    g: Mat4,
}

impl GaussianCPMap {
    /// A completely positive map; rejects `(M, G)` failing the CP condition.
    pub fn new(m: Mat4, g: Mat4) -> Result<Self> {
        let map = Self::candidate(m, g)?;
        let ev = cp_spectrum(&map);
        if !psd_from_eigvals(&ev, PSD_TOL) {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: ev[0],
            });
        }
        Ok(map)
    }

    /// A pair `(M, G)` with symmetric `G` that has not been checked for
    /// complete positivity.
    pub fn candidate(m: Mat4, g: Mat4) -> Result<Self> {
        if !is_finite(&m) || !is_finite(&g) {
            return Err(Error::NonFinite);
        }
        let defect = symmetry_defect(&g);
        if defect > SYMMETRY_TOL * (1.0 + max_abs(&g)) {
            return Err(Error::NotSymmetric { defect });
        }
        Ok(Self {
            m,
            g: (g + g.transpose()) * 0.5,
        })
    }

    pub fn identity() -> Self {
        Self {
            m: Mat4::identity(),
            g: Mat4::zeros(),
        }
    }

    pub fn m(&self) -> &Mat4 {
        &self.m
    }

    pub fn g(&self) -> &Mat4 {
        &self.g
    }

    /// `K = MᵀΣM - Σ`.
    pub fn symplectic_defect(&self) -> Mat4 {
        let s = sigma();
        self.m.transpose() * s * self.m - s
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &GaussianCPMap) -> GaussianCPMap {
        GaussianCPMap {
            m: self.m * next.m,
            g: next.m.transpose() * self.g * next.m + next.g,
        }
    }
}

/// Spectrum of `G + iΣ - iMᵀΣM`.
fn cp_spectrum(map: &GaussianCPMap) -> [f64; 4] {
    let s = sigma();
    let im = s - map.m.transpose() * s * map.m;
    let im = (im - im.transpose()) * 0.5;
    let h = HermMat4::new(map.g, im).expect("G symmetric and the imaginary part antisymmetric");
    herm_eigvals(&h)
}

pub fn cp_check(map: &GaussianCPMap, tol: f64) -> bool {
    psd_from_eigvals(&cp_spectrum(map), tol)
}

/// Smallest eigenvalue of the complete-positivity matrix.
pub fn cp_margin(map: &GaussianCPMap) -> f64 {
    cp_spectrum(map)[0]
}

pub fn apply(map: &GaussianCPMap, gamma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let ev = cp_spectrum(map);
    if !psd_from_eigvals(&ev, PSD_TOL) {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: ev[0],
        });
    }
    let out = map.m.transpose() * gamma.matrix() * map.m + map.g;
    CovarianceMatrix::new((out + out.transpose()) * 0.5)
}

/// A Gaussian operation acting on mode 1 while mode 2 is only rotated:
/// `M = M1 ⊕ M2`, `G = G1 ⊕ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMapSystem1 {
    pub m1: Mat2,
    pub g1: Mat2,
    pub m2: Mat2,
    pub theta: f64,
}

impl LocalMapSystem1 {
    pub fn assemble(&self) -> GaussianCPMap {
        GaussianCPMap {
            m: direct_sum(&self.m1, &self.m2),
            g: direct_sum(&self.g1, &Mat2::zeros()),
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > -2.0 * PI && theta <= 2.0 * PI {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "theta must lie in (-2π, 2π], got {theta}"
        )))
    }
}

pub(crate) fn local_invariants_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= LOCAL_MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

/// The map carrying the normal form of `xi` onto the normal form of `xi_pp`
/// for a given rotation angle `theta` of mode 2.
///
/// Both vectors are read as normal forms; callers holding raw matrices
/// conjugate with the [`reduce_to_normal_form`](crate::states::reduce_to_normal_form)
/// blocks first.
pub fn build_prop1_map(
    xi: &InvariantVector,
    xi_pp: &InvariantVector,
    theta: f64,
) -> Result<LocalMapSystem1> {
    check_theta(theta)?;
    if xi.xi3 == 0.0 || xi.xi4 == 0.0 {
        return Err(Error::ZeroCorrelation);
    }
    if !local_invariants_match(xi.xi2, xi_pp.xi2) {
        return Err(Error::MismatchedLocalInvariant {
            source_value: xi.xi2,
            target_value: xi_pp.xi2,
        });
    }
    let (s, c) = (0.5 * theta).sin_cos();
    let m1 = Mat2::new(
        xi_pp.xi3 / xi.xi3 * c,
        -xi_pp.xi4 / xi.xi3 * s,
        xi_pp.xi3 / xi.xi4 * s,
        xi_pp.xi4 / xi.xi4 * c,
    );
    let m2 = rotation(0.5 * theta);
    // A1'' - M1ᵀ A1 M1 between the two normal forms
    let g1 = Mat2::identity() * xi_pp.xi1 - m1.transpose() * m1 * xi.xi1;
    Ok(LocalMapSystem1 { m1, g1, m2, theta })
}

/// Trace and determinant of `H1 = G1 + iJ(1 - |M1|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Summary {
    pub trace: f64,
    pub det: f64,
}

impl H1Summary {
    /// Hermitian 2×2 positivity via trace and determinant.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.trace >= -tol && self.det >= -tol
    }
}

/// Evaluates `H1` from the assembled map blocks.
pub fn h1_summary(xi: &InvariantVector, xi_pp: &InvariantVector, theta: f64) -> Result<H1Summary> {
    let map = build_prop1_map(xi, xi_pp, theta)?;
    Ok(h1_of(&map))
}

pub fn h1_of(map: &LocalMapSystem1) -> H1Summary {
    // Hermitian [[a, b + iδ], [b - iδ, d]] has determinant ad - b² - δ²
    let delta = 1.0 - det2(&map.m1);
    H1Summary {
        trace: map.g1.trace(),
        det: det2(&map.g1) - delta * delta,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Minimality {
    Minimal,
    NotMinimal,
    /// `G` is singular on a direction where `K` acts.
    Indeterminate,
}

/// Checks the minimal-noise identity `G = Kᵀ G⁻¹ K`, `K = MᵀΣM - Σ`, on the
/// support of `G`.
pub fn minimality_check(map: &GaussianCPMap, tol: f64) -> Minimality {
    let k = map.symplectic_defect();
    let g_norm = map.g.norm();
    let k_scale = 1.0 + map.m.norm().powi(2);
    if k.norm() <= tol * k_scale {
        return if g_norm <= tol {
            Minimality::Minimal
        } else {
            Minimality::NotMinimal
        };
    }
    let eig = map.g.symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let rank_cut = 1e-9 * (1.0 + lam_max);
    let mut pinv = Mat4::zeros();
    let mut kernel = Mat4::zeros();
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let outer = v * v.transpose();
        if lam.abs() > rank_cut {
            pinv += outer / *lam;
        } else {
            kernel += outer;
        }
    }
    let leak = (k * kernel).norm().max((kernel * k).norm());
    if leak > tol * k.norm().max(1.0) {
        return Minimality::Indeterminate;
    }
    let residual = (map.g - k.transpose() * pinv * k).norm();
    if residual <= tol * (1.0 + g_norm) {
        Minimality::Minimal
    } else {
        Minimality::NotMinimal
    }
}

/// On-disk map description, both matrices row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub m: [[f64; 4]; 4],
    pub g: [[f64; 4]; 4],
}

impl MapFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_map(&self) -> Result<GaussianCPMap> {
        GaussianCPMap::new(rows_to_mat4(&self.m), rows_to_mat4(&self.g))
    }
}

impl From<&GaussianCPMap> for MapFile {
    fn from(map: &GaussianCPMap) -> Self {
        Self {
            m: mat4_to_rows(&map.m),
            g: mat4_to_rows(&map.g),
        }
    }
}
