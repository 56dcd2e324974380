//! Convertibility criteria between two-mode Gaussian states under local
//! Gaussian operations.
//!
//! Everything is phrased in terms of invariant vectors, i.e. both states are
//! read in normal form. The entry points are [`decide_local_1`],
//! [`decide_local_2`] (operations on one mode only), [`decide_general`]
//! (operations on both modes) and [`compare`].

mod curve;
mod region;

pub use curve::{CurvePoint, RESIDUAL_TOL, SAMPLES_PER_PIECE};
pub use region::{accessible_region, linspace, RegionGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmaps::{build_prop1_map, local_invariants_match, GaussianCPMap, LocalMapSystem1};
use crate::matkernel::{direct_sum, Mat2, Mat4};
use crate::states::InvariantVector;

pub const DEFAULT_TOL: f64 = 1e-9;

/// `g(a,b,c,d) = (a²-1) + (b²-1)c²d² + 2cd - ab(c²+d²)`.
pub fn g_func(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (a * a - 1.0) + (b * b - 1.0) * c * c * d * d + 2.0 * c * d - a * b * (c * c + d * d)
}

/// Source and target invariants of a prospective transformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimalFunctionPair {
    pub source: InvariantVector,
    pub target: InvariantVector,
}

impl MinimalFunctionPair {
    pub fn new(source: InvariantVector, target: InvariantVector) -> Self {
        Self { source, target }
    }

    /// `f1(x, y) = g(ξ1', ξ1, x/ξ3, y/ξ4)`.
    pub fn f1(&self, x: f64, y: f64) -> Result<f64> {
        let s = &self.source;
        if s.xi3 == 0.0 || s.xi4 == 0.0 {
            return Err(Error::ZeroCorrelation);
        }
        Ok(g_func(self.target.xi1, s.xi1, x / s.xi3, y / s.xi4))
    }

    /// `f2(x, y) = g(ξ2', ξ2, ξ3'/x, ξ4'/y)`.
    pub fn f2(&self, x: f64, y: f64) -> Result<f64> {
        if x == 0.0 || y == 0.0 {
            return Err(Error::InvalidArgument(
                "f2 is singular on the coordinate axes".into(),
            ));
        }
        let t = &self.target;
        Ok(g_func(t.xi2, self.source.xi2, t.xi3 / x, t.xi4 / y))
    }

    /// `(xy)²·f2(x, y)`, continuous on the whole plane.
    pub fn f2_cleared(&self, x: f64, y: f64) -> f64 {
        curve::f2_cleared(self, x, y)
    }

    /// Upper bound `|ξ3ξ4|·ξ1'/ξ1` on `|xy|` for the intermediate state.
    pub fn w1(&self) -> f64 {
        (self.source.xi3 * self.source.xi4).abs() * self.target.xi1 / self.source.xi1
    }

    /// Lower bound `|ξ3'ξ4'|·ξ2/ξ2'` on `|xy|`.
    pub fn w2(&self) -> f64 {
        (self.target.xi3 * self.target.xi4).abs() * self.source.xi2 / self.target.xi2
    }
}

/// How the degenerate (`ξ4 = 0`) criteria treat a state mapped to itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegenerateMode {
    /// The closed-form inequality alone; it rejects some
    /// self-transformations the identity map achieves.
    #[default]
    Strict,
    /// The strict relation plus every pair of equal states.
    ReflexiveClosure,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideOptions {
    pub tol: f64,
    pub mode: DegenerateMode,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            mode: DegenerateMode::Strict,
        }
    }
}

impl DecideOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Local1,
    Local2,
    General,
    DegenerateLocal1,
    DegenerateLocal2,
    DegenerateGeneral,
    /// Target has no correlations and is prepared from scratch.
    ProductTarget,
}

/// Evidence that a transformation is possible.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Intermediate `(x, y)` on both zero curves.
    Intersection { x: f64, y: f64 },
    /// Explicit operation on mode 1 with a rotation on mode 2.
    Local1(LocalMapSystem1),
    /// Explicit map on the normal forms.
    Map(GaussianCPMap),
    /// The identity map (reflexive closure).
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformDecision {
    pub possible: bool,
    pub witness: Option<Witness>,
    /// Signed slack of the binding inequality; non-negative when possible
    /// (up to tolerance).
    pub margin: f64,
    pub route: Route,
}

impl TransformDecision {
    fn new(possible: bool, witness: Option<Witness>, margin: f64, route: Route) -> Self {
        Self {
            possible,
            witness: if possible { witness } else { None },
            margin,
            route,
        }
    }
}

fn is_zero(v: f64, tol: f64) -> bool {
    v.abs() <= tol
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must be non-negative, got {tol}"
        )))
    }
}

/// Slack of `|ξ3ξ4|/ξ1 ≥ |ξ3''ξ4''|/ξ1''` and the value of `f1(ξ3'', ξ4'')`
/// for an operation on mode 1 taking `xi` to `(xi1_pp, ξ2, x, y)`.
pub(crate) fn local1_conditions(xi: &InvariantVector, xi1_pp: f64, x: f64, y: f64) -> (f64, f64) {
    let stretch = (xi.xi3 * xi.xi4).abs() / xi.xi1 - (x * y).abs() / xi1_pp;
    let f1 = g_func(xi1_pp, xi.xi1, x / xi.xi3, y / xi.xi4);
    (stretch, f1)
}

/// Operation on mode 1 only (mode 2 undergoes at most a symplectic map).
pub fn decide_local_1(
    xi: &InvariantVector,
    xi_pp: &InvariantVector,
    opts: &DecideOptions,
) -> Result<TransformDecision> {
    check_tol(opts.tol)?;
    xi.check()?;
    xi_pp.check()?;
    if !local_invariants_match(xi.xi2, xi_pp.xi2) {
        return Err(Error::MismatchedLocalInvariant {
            source_value: xi.xi2,
            target_value: xi_pp.xi2,
        });
    }
    if is_zero(xi.xi4, opts.tol) {
        return decide_degenerate_local_1(xi, xi_pp, opts);
    }
    let (stretch, f1) = local1_conditions(xi, xi_pp.xi1, xi_pp.xi3, xi_pp.xi4);
    let possible = stretch >= -opts.tol && f1 >= -opts.tol;
    let witness = if possible {
        Some(Witness::Local1(build_prop1_map(xi, xi_pp, 0.0)?))
    } else {
        None
    };
    Ok(TransformDecision::new(
        possible,
        witness,
        stretch.min(f1),
        Route::Local1,
    ))
}

/// Operation on mode 2 only, the mirror image of [`decide_local_1`].
pub fn decide_local_2(
    xi: &InvariantVector,
    xi_p: &InvariantVector,
    opts: &DecideOptions,
) -> Result<TransformDecision> {
    check_tol(opts.tol)?;
    xi.check()?;
    xi_p.check()?;
    if !local_invariants_match(xi.xi1, xi_p.xi1) {
        return Err(Error::MismatchedLocalInvariant {
            source_value: xi.xi1,
            target_value: xi_p.xi1,
        });
    }
    if is_zero(xi.xi4, opts.tol) {
        return decide_degenerate_local_2(xi, xi_p, opts);
    }
    let stretch = (xi.xi3 * xi.xi4).abs() / xi.xi2 - (xi_p.xi3 * xi_p.xi4).abs() / xi_p.xi2;
    let f2 = g_func(xi_p.xi2, xi.xi2, xi_p.xi3 / xi.xi3, xi_p.xi4 / xi.xi4);
    let possible = stretch >= -opts.tol && f2 >= -opts.tol;
    let witness = possible.then(|| {
        let m2 = Mat2::new(xi_p.xi3 / xi.xi3, 0.0, 0.0, xi_p.xi4 / xi.xi4);
        let g2 = Mat2::identity() * xi_p.xi2 - m2.transpose() * m2 * xi.xi2;
        Witness::Map(mode2_map(m2, g2))
    });
    Ok(TransformDecision::new(
        possible,
        witness,
        stretch.min(f2),
        Route::Local2,
    ))
}

fn mode2_map(m2: Mat2, g2: Mat2) -> GaussianCPMap {
    GaussianCPMap::candidate(
        direct_sum(&Mat2::identity(), &m2),
        direct_sum(&Mat2::zeros(), &g2),
    )
    .expect("block-diagonal noise is symmetric")
}

/// Points on both zero curves that are candidates for the intermediate
/// state of a general transformation, sorted by `xy/(ξ3ξ4)`.
pub fn curve_intersections(pair: &MinimalFunctionPair) -> Result<Vec<CurvePoint>> {
    let s = &pair.source;
    let t = &pair.target;
    if s.xi3 == 0.0 || s.xi4 == 0.0 || t.xi3 == 0.0 {
        return Err(Error::ZeroCorrelation);
    }
    Ok(curve::intersections(pair, scan_window(pair)))
}

/// Range of scaled products `|uv|` searched: the window bound plus one.
fn scan_window(pair: &MinimalFunctionPair) -> f64 {
    pair.target.xi1 / pair.source.xi1 + 1.0
}

fn window_slack(pair: &MinimalFunctionPair, x: f64, y: f64) -> f64 {
    let xy = (x * y).abs();
    (pair.w1() - xy).min(xy - pair.w2())
}

/// Operations on both modes.
pub fn decide_general(
    xi: &InvariantVector,
    xi_p: &InvariantVector,
    opts: &DecideOptions,
) -> Result<TransformDecision> {
    check_tol(opts.tol)?;
    xi.check()?;
    xi_p.check()?;
    if is_zero(xi.xi4, opts.tol) {
        return decide_degenerate_general(xi, xi_p, opts);
    }
    let mut target = *xi_p;
    if is_zero(target.xi4, opts.tol) {
        target.xi4 = 0.0;
    }
    let pair = MinimalFunctionPair::new(*xi, target);
    if is_zero(target.xi3, opts.tol) {
        // the uncorrelated target is prepared locally from nothing
        let mut g = Mat4::zeros();
        g[(0, 0)] = target.xi1;
        g[(1, 1)] = target.xi1;
        g[(2, 2)] = target.xi2;
        g[(3, 3)] = target.xi2;
        let replace = GaussianCPMap::candidate(Mat4::zeros(), g).expect("diagonal");
        return Ok(TransformDecision::new(
            true,
            Some(Witness::Map(replace)),
            pair.w1(),
            Route::ProductTarget,
        ));
    }
    let points = curve::intersections(&pair, scan_window(&pair));
    let best = points
        .iter()
        .map(|q| (q, window_slack(&pair, q.x, q.y)))
        .filter(|(_, slack)| *slack >= -opts.tol)
        .max_by(|l, r| l.1.total_cmp(&r.1));
    let margin = feasibility_depth(&pair);
    Ok(match best {
        Some((q, _)) => TransformDecision::new(
            true,
            Some(Witness::Intersection { x: q.x, y: q.y }),
            margin,
            Route::General,
        ),
        None => TransformDecision::new(false, None, margin, Route::General),
    })
}

/// `max min(w1 - |xy|, |xy| - w2, f2)` along the zero set of `f1`: positive
/// when an open piece of the curve is feasible, negative when the curve
/// misses the feasible window.
fn feasibility_depth(pair: &MinimalFunctionPair) -> f64 {
    let zs = curve::ZeroSet::of_f1(pair);
    let depth_at = |q: &CurvePoint| {
        let k = curve::f2_clearing_factor(pair, q.x, q.y);
        if !(q.x > 0.0) || k == 0.0 {
            return f64::NEG_INFINITY;
        }
        let f2 = curve::f2_cleared(pair, q.x, q.y) / k;
        window_slack(pair, q.x, q.y).min(f2)
    };
    let mut best = f64::NEG_INFINITY;
    for arc in zs.arcs(scan_window(pair)) {
        let samples = curve::sample_arc(&zs, &arc);
        let values: Vec<f64> = samples.points.iter().map(depth_at).collect();
        let Some((k, _)) = values.iter().enumerate().max_by(|l, r| l.1.total_cmp(r.1)) else {
            continue;
        };
        let lo = samples.taus[k.saturating_sub(1)];
        let hi = samples.taus[(k + 1).min(values.len() - 1)];
        let (_, neg) = curve::golden_min(|t| -depth_at(&zs.arc_point(&arc, t)), lo, hi);
        best = best.max(values[k]).max(-neg);
    }
    best
}

fn degenerate_source_check(xi: &InvariantVector, tol: f64) -> Result<()> {
    if is_zero(xi.xi3, tol) {
        Err(Error::ProductState)
    } else {
        Ok(())
    }
}

fn reflexive(xi: &InvariantVector, target: &InvariantVector, tol: f64) -> bool {
    xi.max_abs_diff(target) <= tol * (1.0 + xi.xi1.max(xi.xi2))
}

fn apply_closure(
    decision: TransformDecision,
    xi: &InvariantVector,
    target: &InvariantVector,
    opts: &DecideOptions,
) -> TransformDecision {
    if decision.possible
        || opts.mode != DegenerateMode::ReflexiveClosure
        || !reflexive(xi, target, opts.tol)
    {
        return decision;
    }
    TransformDecision::new(true, Some(Witness::Identity), 0.0, decision.route)
}

/// Mode-1 operation from a state with `ξ4 = 0`.
pub fn decide_degenerate_local_1(
    xi: &InvariantVector,
    xi_pp: &InvariantVector,
    opts: &DecideOptions,
) -> Result<TransformDecision> {
    check_tol(opts.tol)?;
    degenerate_source_check(xi, opts.tol)?;
    if !local_invariants_match(xi.xi2, xi_pp.xi2) {
        return Err(Error::MismatchedLocalInvariant {
            source_value: xi.xi2,
            target_value: xi_pp.xi2,
        });
    }
    let decision = if !is_zero(xi_pp.xi4, opts.tol) {
        TransformDecision::new(false, None, -xi_pp.xi4.abs(), Route::DegenerateLocal1)
    } else {
        let ratio = xi_pp.xi3 / xi.xi3;
        let bound = (xi_pp.xi1 * xi_pp.xi1 - 1.0) / (xi.xi1 * xi_pp.xi1);
        let slack = bound - ratio * ratio;
        let possible = slack >= -opts.tol;
        // mode-1 map keeping only the correlated quadrature
        let m1 = Mat2::new(ratio, 0.0, 0.0, 0.0);
        let g1 = Mat2::identity() * xi_pp.xi1 - m1.transpose() * m1 * xi.xi1;
        let witness = Witness::Local1(LocalMapSystem1 {
            m1,
            g1,
            m2: Mat2::identity(),
            theta: 0.0,
        });
        TransformDecision::new(possible, Some(witness), slack, Route::DegenerateLocal1)
    };
    Ok(apply_closure(decision, xi, xi_pp, opts))
}

/// Mode-2 operation from a state with `ξ4 = 0`.
pub fn decide_degenerate_local_2(
    xi: &InvariantVector,
    xi_p: &InvariantVector,
    opts: &DecideOptions,
) -> Result<TransformDecision> {
    check_tol(opts.tol)?;
    degenerate_source_check(xi, opts.tol)?;
    if !local_invariants_match(xi.xi1, xi_p.xi1) {
        return Err(Error::MismatchedLocalInvariant {
            source_value: xi.xi1,
            target_value: xi_p.xi1,
        });
    }
    let decision = if !is_zero(xi_p.xi4, opts.tol) {
        TransformDecision::new(false, None, -xi_p.xi4.abs(), Route::DegenerateLocal2)
    } else {
        let ratio = xi_p.xi3 / xi.xi3;
        let bound = (xi_p.xi2 * xi_p.xi2 - 1.0) / (xi.xi2 * xi_p.xi2);
        let slack = bound - ratio * ratio;
        let m2 = Mat2::new(ratio, 0.0, 0.0, 0.0);
        let g2 = Mat2::identity() * xi_p.xi2 - m2.transpose() * m2 * xi.xi2;
        TransformDecision::new(
            slack >= -opts.tol,
            Some(Witness::Map(mode2_map(m2, g2))),
            slack,
            Route::DegenerateLocal2,
        )
    };
    Ok(apply_closure(decision, xi, xi_p, opts))
}

/// Operations on both modes from a state with `ξ4 = 0`.
pub fn decide_degenerate_general(
    xi: &InvariantVector,
    xi_p: &InvariantVector,
    opts: &DecideOptions,
) -> Result<TransformDecision> {
    check_tol(opts.tol)?;
    degenerate_source_check(xi, opts.tol)?;
    let decision = if !is_zero(xi_p.xi4, opts.tol) {
        TransformDecision::new(false, None, -xi_p.xi4.abs(), Route::DegenerateGeneral)
    } else {
        let ratio = xi_p.xi3 / xi.xi3;
        let (a1, a2) = (xi_p.xi1, xi_p.xi2);
        let bound = (a2 * a2 - 1.0) * (a1 * a1 - 1.0) / (xi.xi1 * a1 * xi.xi2 * a2);
        let slack = bound - ratio * ratio;
        // intermediate correlation reached by the strongest mode-1 step
        let x = xi.xi3 * ((a1 * a1 - 1.0) / (xi.xi1 * a1)).sqrt();
        TransformDecision::new(
            slack >= -opts.tol,
            Some(Witness::Intersection { x, y: 0.0 }),
            slack,
            Route::DegenerateGeneral,
        )
    };
    Ok(apply_closure(decision, xi, xi_p, opts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Forward,
    Backward,
    Both,
    Incommensurate,
}

/// Orders two states by convertibility under general local operations.
pub fn compare(
    xi: &InvariantVector,
    xi_p: &InvariantVector,
    opts: &DecideOptions,
) -> Result<Relation> {
    let forward = decide_general(xi, xi_p, opts)?.possible;
    let backward = decide_general(xi_p, xi, opts)?.possible;
    Ok(match (forward, backward) {
        (true, true) => Relation::Both,
        (true, false) => Relation::Forward,
        (false, true) => Relation::Backward,
        (false, false) => Relation::Incommensurate,
    })
}
