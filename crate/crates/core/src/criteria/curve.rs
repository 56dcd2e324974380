//! Intersections of the zero sets of the two minimal functions.
//!
//! In scaled coordinates `u = x/ξ3`, `v = y/ξ4` the zero set of `f1` is
//! `u² + v² = φ(uv)` with
//!
//! ```text
//! φ(p) = [(a² - 1) + (b² - 1)p² + 2p] / (ab),   a = ξ1', b = ξ1.
//! ```
//!
//! For a fixed product `p = uv` the points on the curve are recovered from
//! the roots `t±` of `t² - φ(p)t + p² = 0` (`u² = t±`), which exist whenever
//! `φ(p) ≥ 2|p|`. That inequality factorises, so the admissible `p` form
//! explicit intervals:
//!
//! ```text
//! p ≥ 0:  p ≤ min((a-1)/(b-1), (a+1)/(b+1))  or  p ≥ max(...)
//! p < 0:  p ≥ -(a-1)/(b+1)                    or  p ≤ -(a+1)/(b-1)
//! ```
//!
//! Each admissible interval yields a continuous arc in the half plane
//! `x > 0` (the `t+` and `t-` branches glued at the interval ends). The
//! second function is followed along every arc through its pole-free
//! multiple `F2`, and its roots are located by bisection on sign changes,
//! with a golden-section pass for touching roots.

use super::{g_func, MinimalFunctionPair};

/// Samples per arc piece.
pub const SAMPLES_PER_PIECE: usize = 4096;

/// Residual bound for accepting an intersection.
pub const RESIDUAL_TOL: f64 = 1e-8;

const BISECTION_STEPS: usize = 80;
const GOLDEN_STEPS: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Branch {
    /// `u² = t+`
    Wide,
    /// `u² = t-`
    Narrow,
}

/// One monotone sweep of `p` along a single branch.
#[derive(Clone, Copy, Debug)]
struct Piece {
    branch: Branch,
    p_from: f64,
    p_to: f64,
    /// Sign of `v`; zero means "follow the sign of p".
    v_sign: f64,
}

/// A continuous path on the zero set of `f1`, parametrised by `τ ∈ [0, n]`
/// for `n` pieces.
#[derive(Clone, Debug)]
pub(crate) struct Arc {
    pieces: Vec<Piece>,
}

/// A point on the zero set of `f1` with its arc parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    /// Product `uv` of the scaled coordinates.
    pub p: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct ZeroSet {
    a: f64,
    b: f64,
    xi3: f64,
    xi4: f64,
}

impl ZeroSet {
    pub(crate) fn of_f1(pair: &MinimalFunctionPair) -> Self {
        Self {
            a: pair.target.xi1,
            b: pair.source.xi1,
            xi3: pair.source.xi3,
            xi4: pair.source.xi4,
        }
    }

    pub(crate) fn phi(&self, p: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        ((a * a - 1.0) + (b * b - 1.0) * p * p + 2.0 * p) / (a * b)
    }

    /// Scaled `(u, v)` on the given branch.
    fn scaled(&self, branch: Branch, p: f64, v_sign: f64) -> (f64, f64) {
        let s = self.phi(p);
        let disc = (s * s - 4.0 * p * p).max(0.0);
        let t_plus = 0.5 * (s + disc.sqrt()).max(0.0);
        let t_minus = if t_plus > 0.0 { p * p / t_plus } else { 0.0 };
        let sign = if v_sign != 0.0 {
            v_sign
        } else if p < 0.0 {
            -1.0
        } else {
            1.0
        };
        match branch {
            Branch::Wide => (t_plus.sqrt(), sign * t_minus.sqrt()),
            Branch::Narrow => (t_minus.sqrt(), sign * t_plus.sqrt()),
        }
    }

    fn point(&self, piece: &Piece, local: f64) -> CurvePoint {
        // cosine spacing clusters samples at the branch junctions
        let w = 0.5 * (1.0 - (std::f64::consts::PI * local).cos());
        let p = piece.p_from + (piece.p_to - piece.p_from) * w;
        let (u, v) = self.scaled(piece.branch, p, piece.v_sign);
        CurvePoint {
            x: u * self.xi3,
            y: v * self.xi4,
            p,
        }
    }

    /// Point where the two branches meet (`t+ = t-`), free of the rounding
    /// a vanishing discriminant leaves in [`Self::scaled`].
    fn junction(&self, p: f64, v_sign: f64) -> CurvePoint {
        let t = (0.5 * self.phi(p)).max(0.0).sqrt();
        let sign = if v_sign != 0.0 {
            v_sign
        } else if p < 0.0 {
            -1.0
        } else {
            1.0
        };
        CurvePoint {
            x: t * self.xi3,
            y: sign * t * self.xi4,
            p,
        }
    }

    pub(crate) fn arc_point(&self, arc: &Arc, tau: f64) -> CurvePoint {
        let n = arc.pieces.len();
        let idx = (tau.floor().max(0.0) as usize).min(n - 1);
        let local = (tau - idx as f64).clamp(0.0, 1.0);
        self.point(&arc.pieces[idx], local)
    }

    /// Arcs covering the zero set with `|p| ≤ p_max`.
    pub(crate) fn arcs(&self, p_max: f64) -> Vec<Arc> {
        let (a, b) = (self.a, self.b);
        let mut arcs = Vec::new();
        if !(b > 1.0) || !(a >= 1.0) {
            return arcs;
        }
        let lo = -(a - 1.0) / (b + 1.0);
        let r1 = (a - 1.0) / (b - 1.0);
        let r2 = (a + 1.0) / (b + 1.0);
        let hi = r1.min(r2);
        if lo < 0.0 && hi > 0.0 {
            // leaves x = 0 below the axis, closes through both junctions,
            // and returns to x = 0 above it
            arcs.push(Arc {
                pieces: vec![
                    Piece {
                        branch: Branch::Narrow,
                        p_from: 0.0,
                        p_to: lo,
                        v_sign: -1.0,
                    },
                    Piece {
                        branch: Branch::Wide,
                        p_from: lo,
                        p_to: hi,
                        v_sign: 0.0,
                    },
                    Piece {
                        branch: Branch::Narrow,
                        p_from: hi,
                        p_to: 0.0,
                        v_sign: 1.0,
                    },
                ],
            });
        }
        let right = r1.max(r2);
        if right < p_max {
            arcs.push(Arc {
                pieces: vec![
                    Piece {
                        branch: Branch::Narrow,
                        p_from: p_max,
                        p_to: right,
                        v_sign: 1.0,
                    },
                    Piece {
                        branch: Branch::Wide,
                        p_from: right,
                        p_to: p_max,
                        v_sign: 1.0,
                    },
                ],
            });
        }
        let left = -(a + 1.0) / (b - 1.0);
        if left > -p_max {
            arcs.push(Arc {
                pieces: vec![
                    Piece {
                        branch: Branch::Narrow,
                        p_from: -p_max,
                        p_to: left,
                        v_sign: -1.0,
                    },
                    Piece {
                        branch: Branch::Wide,
                        p_from: left,
                        p_to: -p_max,
                        v_sign: -1.0,
                    },
                ],
            });
        }
        arcs
    }
}

impl Arc {
    pub(crate) fn len(&self) -> usize {
        self.pieces.len()
    }
}

/// `f2` multiplied by the factors that clear its poles; same sign as `f2`
/// off the coordinate axes.
pub(crate) fn f2_cleared(pair: &MinimalFunctionPair, x: f64, y: f64) -> f64 {
    let a = pair.target.xi2;
    let b = pair.source.xi2;
    let c = pair.target.xi3;
    let d = pair.target.xi4;
    match (c != 0.0, d != 0.0) {
        (true, true) => {
            (a * a - 1.0) * x * x * y * y + (b * b - 1.0) * c * c * d * d + 2.0 * c * d * x * y
                - a * b * (c * c * y * y + d * d * x * x)
        }
        (true, false) => (a * a - 1.0) * x * x - a * b * c * c,
        (false, true) => (a * a - 1.0) * y * y - a * b * d * d,
        (false, false) => a * a - 1.0,
    }
}

/// The positive factor separating [`f2_cleared`] from `f2`.
pub(crate) fn f2_clearing_factor(pair: &MinimalFunctionPair, x: f64, y: f64) -> f64 {
    let mut k = 1.0;
    if pair.target.xi3 != 0.0 {
        k *= x * x;
    }
    if pair.target.xi4 != 0.0 {
        k *= y * y;
    }
    k
}

fn f1_at(pair: &MinimalFunctionPair, x: f64, y: f64) -> f64 {
    g_func(
        pair.target.xi1,
        pair.source.xi1,
        x / pair.source.xi3,
        y / pair.source.xi4,
    )
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let mut s_lo = f_lo.signum();
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == s_lo {
            lo = mid;
            s_lo = fm.signum();
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..GOLDEN_STEPS {
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    [(lo, f(lo)), (c, fc), (d, fd), (hi, f(hi))]
        .into_iter()
        .min_by(|l, r| l.1.total_cmp(&r.1))
        .unwrap()
}

/// Sampled arc: parameters and points.
pub(crate) struct ArcSamples {
    pub(crate) taus: Vec<f64>,
    pub(crate) points: Vec<CurvePoint>,
}

pub(crate) fn sample_arc(zs: &ZeroSet, arc: &Arc) -> ArcSamples {
    let n = arc.len() * SAMPLES_PER_PIECE;
    let taus: Vec<f64> = (0..=n)
        .map(|i| i as f64 / SAMPLES_PER_PIECE as f64)
        .collect();
    let points = taus.iter().map(|&t| zs.arc_point(arc, t)).collect();
    ArcSamples { taus, points }
}

/// All isolated points in `x > 0` where both minimal functions vanish,
/// within the window `|p| ≤ p_max` of scaled products, sorted by `p`.
pub(crate) fn intersections(pair: &MinimalFunctionPair, p_max: f64) -> Vec<CurvePoint> {
    let zs = ZeroSet::of_f1(pair);
    let arcs = zs.arcs(p_max);
    // junctions first, so that exact candidates win the duplicate filter
    let mut found: Vec<CurvePoint> = arcs
        .iter()
        .flat_map(|arc| arc.pieces.iter())
        .filter(|piece| piece.branch == Branch::Wide)
        .flat_map(|piece| [piece.p_from, piece.p_to].map(|p| (p, piece.v_sign)))
        .filter(|(p, _)| p.abs() < p_max)
        .map(|(p, v_sign)| zs.junction(p, v_sign))
        .collect();
    for arc in arcs {
        let samples = sample_arc(&zs, &arc);
        let f2_at = |tau: f64| {
            let q = zs.arc_point(&arc, tau);
            f2_cleared(pair, q.x, q.y)
        };
        let values: Vec<f64> = samples
            .points
            .iter()
            .map(|q| f2_cleared(pair, q.x, q.y))
            .collect();
        let taus = &samples.taus;
        for k in 0..values.len() {
            if values[k] == 0.0 {
                found.push(samples.points[k]);
            }
            if k + 1 < values.len() && values[k] * values[k + 1] < 0.0 {
                let tau = bisect(f2_at, taus[k], taus[k + 1], values[k]);
                found.push(zs.arc_point(&arc, tau));
            }
            // touching roots never change sign: refine local minima of |F2|
            if k > 0 && k + 1 < values.len() {
                let m = values[k].abs();
                if m <= values[k - 1].abs()
                    && m <= values[k + 1].abs()
                    && values[k - 1] * values[k] > 0.0
                    && values[k] * values[k + 1] > 0.0
                {
                    let (tau, v) = golden_min(|t| f2_at(t).abs(), taus[k - 1], taus[k + 1]);
                    if v <= RESIDUAL_TOL {
                        found.push(zs.arc_point(&arc, tau));
                    }
                }
            }
        }
    }
    let mut out: Vec<CurvePoint> = Vec::new();
    for q in found {
        if !(q.x > 0.0) {
            continue;
        }
        if f1_at(pair, q.x, q.y).abs() > RESIDUAL_TOL
            || f2_cleared(pair, q.x, q.y).abs() > RESIDUAL_TOL
        {
            continue;
        }
        let dup = out
            .iter()
            .any(|r| (r.x - q.x).abs() + (r.y - q.y).abs() <= 1e-7 * (1.0 + q.x.abs() + q.y.abs()));
        if !dup {
            out.push(q);
        }
    }
    out.sort_by(|l, r| l.p.total_cmp(&r.p));
    out
}
