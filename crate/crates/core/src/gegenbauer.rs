//! Naive Gegenbauer reprojection of the smooth cells between edges.
//!
//! Each cell is mapped to [-1, 1] and the partial sum is projected onto
//! `C_l^lambda`, `l <= m`, with weight `(1 - xi^2)^(lambda - 1/2)`.  No
//! stabilisation is attempted: when an edge is misplaced, the reprojection is
//! polluted everywhere in the cell.

use serde::{Deserialize, Serialize};

use crate::cheb::{clamp_reference, CollocationGrid, Domain, SpectralExpansion};
use crate::edge::EdgeSet;
use crate::error::{Error, Result};
use crate::mollify::{FineGrid, GibbsFreeFunction};

/// `C_n^lambda(x)` from
/// `(k+1) C_{k+1} = 2 (k + lambda) x C_k - (k + 2 lambda - 1) C_{k-1}`.
pub fn gegenbauer_eval(n: usize, lambda: f64, x: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("gegenbauer parameter must be positive, got {lambda}")));
    }
    Ok(gegenbauer(n, lambda, clamp_reference(x)?))
}

fn gegenbauer(n: usize, lambda: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, 2.0 * lambda * x);
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda) * x * cur - (kf + 2.0 * lambda - 1.0) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `C_0 .. C_m` at one point.
fn gegenbauer_all(m: usize, lambda: f64, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if m == 0 {
        return;
    }
    out.push(2.0 * lambda * x);
    for k in 1..m {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda) * x * out[k] - (kf + 2.0 * lambda - 1.0) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GegenbauerConfig {
    /// `m = lambda = max(1, floor(proportionality * half_width * N))`.
    pub proportionality: f64,
}

impl Default for GegenbauerConfig {
    fn default() -> Self {
        GegenbauerConfig { proportionality: 0.25 }
    }
}

impl GegenbauerConfig {
    pub fn order_for(&self, half_width: f64, order: usize) -> usize {
        ((self.proportionality * half_width * order as f64).floor() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReprojection {
    pub cell: (f64, f64),
    pub lambda: f64,
    pub coeffs: Vec<f64>,
}

impl CellReprojection {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (a, b) = self.cell;
        let xi = clamp_reference(Domain::new(a, b)?.to_reference(x))?;
        let mut c = Vec::with_capacity(self.coeffs.len());
        gegenbauer_all(self.coeffs.len() - 1, self.lambda, xi, &mut c);
        Ok(c.iter().zip(&self.coeffs).map(|(c, g)| c * g).sum())
    }
}

/// Reproject using the configured `m = lambda` schedule.
pub fn reproject_cell(e: &SpectralExpansion, cell: (f64, f64), cfg: &GegenbauerConfig) -> Result<CellReprojection> {
    let m = cfg.order_for(0.5 * (cell.1 - cell.0), e.order());
    reproject_cell_with(e, cell, m, m as f64)
}

/// Projection with explicit truncation `m` and parameter `lambda`.
///
/// Gauss–Lobatto quadrature with `2N + 32` Chebyshev nodes; the Chebyshev
/// weight is folded in, `w (1 - xi^2)^(lambda - 1/2) = w_cheb (1 - xi^2)^lambda`,
/// so the rule is exact for integer `lambda`.
pub fn reproject_cell_with(e: &SpectralExpansion, cell: (f64, f64), m: usize, lambda: f64) -> Result<CellReprojection> {
    let (a, b) = cell;
    let domain = e.domain();
    if !(a < b) || a < domain.lo() - 1e-12 || b > domain.hi() + 1e-12 {
        return Err(Error::DegenerateCell(a, b));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("gegenbauer parameter must be positive, got {lambda}")));
    }
    let map = Domain::new(a, b)?;
    let q = CollocationGrid::lobatto(2 * e.order() + 32)?;
    let mut num = vec![0.0; m + 1];
    let mut norms = vec![0.0; m + 1];
    let mut c = Vec::with_capacity(m + 1);
    for (&xi, &w) in q.nodes().iter().zip(q.weights()) {
        let weight = w * (1.0 - xi * xi).max(0.0).powf(lambda);
        if weight == 0.0 {
            continue;
        }
        let x = map.from_reference(xi).clamp(domain.lo(), domain.hi());
        let g = e.eval(x)?;
        gegenbauer_all(m, lambda, xi, &mut c);
        for l in 0..=m {
            num[l] += weight * g * c[l];
            norms[l] += weight * c[l] * c[l];
        }
    }
    let coeffs: Vec<f64> = num.iter().zip(&norms).map(|(n, h)| n / h).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::DegenerateCell(a, b));
    }
    Ok(CellReprojection { cell, lambda, coeffs })
}

/// Cells between consecutive edges, padded with the domain boundaries.
pub fn cells_from_edges(edges: &EdgeSet, domain: Domain) -> Vec<(f64, f64)> {
    let mut cuts = vec![domain.lo()];
    cuts.extend(edges.locations().into_iter().filter(|&c| c > domain.lo() && c < domain.hi()));
    cuts.push(domain.hi());
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Evaluate each fine-grid point from the cell that contains it; a point on a
/// shared boundary belongs to the left cell.
pub fn reconstruct(cells: &[CellReprojection], grid: &FineGrid) -> Result<GibbsFreeFunction> {
    let domain = grid.domain();
    let tol = 1e-12 * domain.width();
    let first = cells.first().ok_or(Error::Tiling(domain.lo()))?;
    if (first.cell.0 - domain.lo()).abs() > tol {
        return Err(Error::Tiling(domain.lo()));
    }
    for w in cells.windows(2) {
        if (w[0].cell.1 - w[1].cell.0).abs() > tol {
            return Err(Error::Tiling(w[0].cell.1));
        }
    }
    let last = cells.last().unwrap();
    if (last.cell.1 - domain.hi()).abs() > tol {
        return Err(Error::Tiling(last.cell.1));
    }
    let values = grid
        .xs()
        .iter()
        .map(|&x| {
            let i = cells.iter().position(|c| x <= c.cell.1).unwrap_or(cells.len() - 1);
            cells[i].eval(x)
        })
        .collect::<Result<_>>()?;
    Ok(GibbsFreeFunction {
        grid: grid.clone(),
        values,
        degenerate: Vec::new(),
    })
}

/// Reproject every cell delimited by `edges` and evaluate on `grid`.
pub fn gegenbauer_reconstruct(
    e: &SpectralExpansion,
    edges: &EdgeSet,
    grid: &FineGrid,
    cfg: &GegenbauerConfig,
) -> Result<GibbsFreeFunction> {
    let cells = cells_from_edges(edges, e.domain())
        .into_iter()
        .map(|c| reproject_cell(e, c, cfg))
        .collect::<Result<Vec<_>>>()?;
    reconstruct(&cells, grid)
}
