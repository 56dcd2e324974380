//! Brute-force cross-checks for the closed-form criteria.
//!
//! Nothing here goes through the curve search in [`crate::criteria`]: the
//! region scan evaluates the unsimplified conditions on a grid, and the
//! mode-1 check assembles the explicit map and eigensolves its CP matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::criteria::g_func;
use crate::error::{Error, Result};
use crate::gmaps::{build_prop1_map, cp_check, GaussianCPMap};
use crate::matkernel::{
    direct_sum, herm_eigvals, random_sp2_with, sigma, HermMat4, Mat2, Mat4, PSD_TOL,
};
use crate::states::{from_xi, InvariantVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanConfig {
    pub nx: usize,
    pub ny: usize,
    pub tol: f64,
}

impl ScanConfig {
    pub const MIN_RESOLUTION: usize = 64;

    pub fn new(nx: usize, ny: usize, tol: f64) -> Result<Self> {
        let cfg = Self { nx, ny, tol };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.nx < Self::MIN_RESOLUTION || self.ny < Self::MIN_RESOLUTION {
            return Err(Error::InvalidArgument(format!(
                "scan resolution must be at least {} per axis, got {}x{}",
                Self::MIN_RESOLUTION,
                self.nx,
                self.ny
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be non-negative, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            nx: 1024,
            ny: 1024,
            tol: 1e-9,
        }
    }
}

/// Half-widths `(U, V)` of the scan box in units of `(ξ3, |ξ4|)`.
///
/// Inside `|uv| ≤ ξ1'/ξ1` the set `f1 ≥ 0` lies in the disk `u² + v² ≤ φ`,
/// with `φ` maximised at an end of the interval. The half-widths are rounded
/// up to powers of two so that `u = 1` and `v = ±1` are grid points whenever
/// the resolution is a multiple of them.
pub fn scan_box(xi: &InvariantVector, xi_p: &InvariantVector) -> (f64, f64) {
    let (a, b) = (xi_p.xi1, xi.xi1);
    let phi = |p: f64| ((a * a - 1.0) + (b * b - 1.0) * p * p + 2.0 * p) / (a * b);
    let p = a / b;
    let radius = (phi(p).max(phi(-p)).max(1.0) * 1.01).sqrt();
    let half = radius.log2().ceil().exp2();
    (half, half)
}

/// `(xy)²·f2` expanded as a polynomial, or `x²·f2` when `ξ4' = 0`.
fn f2_polynomial(xi: &InvariantVector, xi_p: &InvariantVector, x: f64, y: f64) -> f64 {
    let (a, b, c, d) = (xi_p.xi2, xi.xi2, xi_p.xi3, xi_p.xi4);
    if d == 0.0 {
        return (a * a - 1.0) * x * x - a * b * c * c;
    }
    let (xx, yy, xy) = (x * x, y * y, x * y);
    (a * a - 1.0) * xy * xy + (b * b - 1.0) * c * c * d * d + 2.0 * c * d * xy
        - a * b * (c * c * yy + d * d * xx)
}

/// Whether some grid point satisfies `w1 ≥ |xy| ≥ w2`, `f1 ≥ 0` and `f2 ≥ 0`.
///
/// The grid is `x = ξ3·U·i/nx` for `i = 1..=nx` and
/// `y = |ξ4|·V·(2j/ny - 1)` for `j = 0..=ny`, so doubling the resolution
/// keeps every earlier point.
pub fn region_scan_decide(
    xi: &InvariantVector,
    xi_p: &InvariantVector,
    cfg: &ScanConfig,
) -> Result<bool> {
    cfg.check()?;
    xi.check()?;
    xi_p.check()?;
    if xi.xi4 == 0.0 || xi_p.xi3 == 0.0 {
        return Err(Error::ZeroCorrelation);
    }
    let (u_max, v_max) = scan_box(xi, xi_p);
    let x_step = xi.xi3 * u_max / cfg.nx as f64;
    let y_half = xi.xi4.abs() * v_max;
    let w1 = (xi.xi3 * xi.xi4).abs() * xi_p.xi1 / xi.xi1;
    let w2 = (xi_p.xi3 * xi_p.xi4).abs() * xi.xi2 / xi_p.xi2;
    let tol = cfg.tol;
    Ok((0..=cfg.ny).into_par_iter().any(|j| {
        let y = y_half * (2.0 * j as f64 / cfg.ny as f64 - 1.0);
        (1..=cfg.nx).any(|i| {
            let x = x_step * i as f64;
            let xy = (x * y).abs();
            xy <= w1 + tol
                && xy >= w2 - tol
                && g_func(xi_p.xi1, xi.xi1, x / xi.xi3, y / xi.xi4) >= -tol
                && f2_polynomial(xi, xi_p, x, y) >= -tol
        })
    }))
}

/// Eigensolves the CP matrix of the explicit `θ = 0` mode-1 map.
pub fn prop1_explicit_check(xi: &InvariantVector, xi_pp: &InvariantVector) -> Result<bool> {
    let system = build_prop1_map(xi, xi_pp, 0.0)?;
    Ok(cp_check(&system.assemble(), PSD_TOL))
}

fn uniform_block<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    Mat2::from_fn(|_, _| rng.gen_range(-2.0..=2.0))
}

/// Random local map `M1 ⊕ M2` with isotropic noise just large enough to be
/// completely positive, plus `0.01·I`.
pub fn sample_cp_map(seed: u64) -> GaussianCPMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = direct_sum(&uniform_block(&mut rng), &uniform_block(&mut rng));
    let defect = sigma() - m.transpose() * sigma() * m;
    let h = HermMat4::new(Mat4::zeros(), defect).expect("antisymmetric defect");
    let lambda = (-herm_eigvals(&h)[0]).max(0.0);
    GaussianCPMap::new(m, Mat4::identity() * (lambda + 0.01)).expect("noise dominates the defect")
}

/// Random local symplectic map `S1 ⊕ S2` with no noise.
pub fn sample_symplectic_map(seed: u64, z_max: f64) -> GaussianCPMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = direct_sum(
        &random_sp2_with(&mut rng, z_max),
        &random_sp2_with(&mut rng, z_max),
    );
    GaussianCPMap::new(m, Mat4::zeros()).expect("symplectic maps are channels")
}

/// Invariant vector of a random physical state with `ξ1, ξ2 ∈ [1, 4]` and
/// `|ξ4| ≥ min_abs_xi4`, drawn by rejection.
pub fn sample_invariants<R: Rng + ?Sized>(rng: &mut R, min_abs_xi4: f64) -> InvariantVector {
    loop {
        let xi1 = rng.gen_range(1.0..4.0);
        let xi2 = rng.gen_range(1.0..4.0);
        let xi3: f64 = rng.gen_range(0.0..2.5);
        let xi4: f64 = rng.gen_range(-xi3..=xi3);
        if xi4.abs() < min_abs_xi4 {
            continue;
        }
        match InvariantVector::new(xi1, xi2, xi3, xi4) {
            Ok(v) if from_xi(&v).is_ok() => return v,
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmaps::apply;

    fn xi(a: f64, b: f64, c: f64, d: f64) -> InvariantVector {
        InvariantVector::new(a, b, c, d).unwrap()
    }

    #[test]
    fn identity_found() {
        let cfg = ScanConfig::new(256, 256, 1e-9).unwrap();
        for v in [
            xi(3.0, 5.0, 1.0, 0.5),
            xi(2.0, 2.0, 1.0, -0.5),
            xi(1.5, 1.2, 0.3, 0.1),
        ] {
            assert!(region_scan_decide(&v, &v, &cfg).unwrap(), "{v:?}");
        }
    }

    #[test]
    fn incommensurate_pair_rejected() {
        let cfg = ScanConfig::new(2048, 2048, 1e-9).unwrap();
        let a = xi(2.0, 2.0, 1.0, 1.0);
        let b = xi(2.0, 2.0, 1.0, -0.5);
        assert!(!region_scan_decide(&a, &b, &cfg).unwrap());
        assert!(!region_scan_decide(&b, &a, &cfg).unwrap());
    }

    #[test]
    fn resolution_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let s = sample_invariants(&mut rng, 0.05);
            let t = sample_invariants(&mut rng, 0.05);
            let coarse =
                region_scan_decide(&s, &t, &ScanConfig::new(64, 64, 1e-9).unwrap()).unwrap();
            let fine =
                region_scan_decide(&s, &t, &ScanConfig::new(128, 128, 1e-9).unwrap()).unwrap();
            assert!(!coarse || fine);
        }
    }

    #[test]
    fn small_resolution_rejected() {
        assert!(ScanConfig::new(32, 64, 1e-9).is_err());
    }

    #[test]
    fn explicit_check_examples() {
        let v = xi(3.0, 5.0, 1.0, 0.5);
        assert!(prop1_explicit_check(&v, &v).unwrap());
        assert!(prop1_explicit_check(&v, &xi(2.0, 5.0, 0.4, 0.3)).unwrap());
        assert!(!prop1_explicit_check(&v, &xi(2.0, 5.0, 1.0, 1.0)).unwrap());
    }

    #[test]
    fn sampled_maps_are_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..100 {
            let map = sample_cp_map(seed);
            assert!(cp_check(&map, 1e-9));
            assert_eq!(map, sample_cp_map(seed));
            let state = from_xi(&sample_invariants(&mut rng, 0.0)).unwrap();
            apply(&map, &state).unwrap();
            assert!(cp_check(&sample_symplectic_map(seed, 1.5), 1e-9));
        }
    }
}
