use rayon::prelude::*;

use super::{local1_conditions, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::states::InvariantVector;

/// Targets `(ξ3'', ξ4'')` reachable by operations on mode 1 for a fixed
/// final local invariant `ξ1''`, sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionGrid {
    pub xi1_pp: f64,
    pub grid_x: Vec<f64>,
    pub grid_y: Vec<f64>,
    /// Row-major in y then x: entry `j * nx + i` is `(grid_x[i], grid_y[j])`.
    feasible: Vec<bool>,
    f1_values: Vec<f64>,
}

impl RegionGrid {
    pub fn nx(&self) -> usize {
        self.grid_x.len()
    }

    pub fn ny(&self) -> usize {
        self.grid_y.len()
    }

    pub fn feasible(&self, i: usize, j: usize) -> bool {
        self.feasible[j * self.nx() + i]
    }

    pub fn f1(&self, i: usize, j: usize) -> f64 {
        self.f1_values[j * self.nx() + i]
    }

    /// Cells in CSV order: `(x, y, feasible, f1)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, bool, f64)> + '_ {
        let nx = self.nx();
        (0..self.ny()).flat_map(move |j| {
            (0..nx).map(move |i| {
                (
                    self.grid_x[i],
                    self.grid_y[j],
                    self.feasible(i, j),
                    self.f1(i, j),
                )
            })
        })
    }

    /// `xi3pp,xi4pp,feasible,f1` rows, y-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi3pp,xi4pp,feasible,f1\n");
        for (x, y, ok, f1) in self.cells() {
            out.push_str(&format!("{x},{y},{},{f1}\n", u8::from(ok)));
        }
        out
    }
}

/// Evaluates both mode-1 conditions on every grid cell.
pub fn accessible_region(
    xi: &InvariantVector,
    xi1_pp: f64,
    grid_x: &[f64],
    grid_y: &[f64],
) -> Result<RegionGrid> {
    xi.check()?;
    if xi.xi3 == 0.0 || xi.xi4 == 0.0 {
        return Err(Error::ZeroCorrelation);
    }
    if !(xi1_pp >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "final local invariant must be >= 1, got {xi1_pp}"
        )));
    }
    let nx = grid_x.len();
    let cells: Vec<(bool, f64)> = (0..grid_y.len() * nx)
        .into_par_iter()
        .map(|k| {
            let (x, y) = (grid_x[k % nx], grid_y[k / nx]);
            let (stretch, f1) = local1_conditions(xi, xi1_pp, x, y);
            (stretch >= -DEFAULT_TOL && f1 >= -DEFAULT_TOL, f1)
        })
        .collect();
    let (feasible, f1_values) = cells.into_iter().unzip();
    Ok(RegionGrid {
        xi1_pp,
        grid_x: grid_x.to_vec(),
        grid_y: grid_y.to_vec(),
        feasible,
        f1_values,
    })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
