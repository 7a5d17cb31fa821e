//! Chebyshev–Gauss–Lobatto collocation: grids, quadrature, nodal/modal
//! transforms, partial-sum evaluation and spectral differentiation.
//!
//! Nodes are stored in descending order, `x_0 = 1` and `x_N = -1`, so that
//! `T_i(x_j) = cos(pi i j / N)`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points this far outside [-1, 1] are clamped instead of rejected.
pub const CLAMP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    lo: f64,
    hi: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { lo: -1.0, hi: 1.0 }
    }
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDomain { lo, hi });
        }
        Ok(Domain { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Map to [-1, 1]; the endpoints map exactly.
    pub fn to_reference(&self, x: f64) -> f64 {
        if x == self.lo {
            -1.0
        } else if x == self.hi {
            1.0
        } else {
            (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
        }
    }

    pub fn from_reference(&self, xi: f64) -> f64 {
        if xi == -1.0 {
            self.lo
        } else if xi == 1.0 {
            self.hi
        } else {
            self.lo + 0.5 * (xi + 1.0) * (self.hi - self.lo)
        }
    }
}

pub(crate) fn clamp_reference(x: f64) -> Result<f64> {
    if x.abs() <= 1.0 {
        Ok(x)
    } else if x.abs() <= 1.0 + CLAMP_SLACK {
        Ok(x.signum())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

/// `T_n(x)` by the three-term recurrence.
pub fn cheb_eval(n: usize, x: f64) -> Result<f64> {
    Ok(cheb_t(n, clamp_reference(x)?))
}

pub(crate) fn cheb_t(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `T'_n(x) = n U_{n-1}(x)`.  Going through the second-kind recurrence keeps
/// the endpoints well-conditioned: no division by `sqrt(1 - x^2)`.
pub fn cheb_deriv_eval(n: usize, x: f64) -> Result<f64> {
    Ok(cheb_dt(n, clamp_reference(x)?))
}

pub(crate) fn cheb_dt(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    n as f64 * cheb_u(n - 1, x)
}

/// Chebyshev polynomial of the second kind.
pub(crate) fn cheb_u(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Gauss–Lobatto nodes and weights for the weight `(1 - x^2)^(-1/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CollocationGrid {
    pub const MIN_ORDER: usize = 2;

    pub fn lobatto(order: usize) -> Result<Self> {
        if order < Self::MIN_ORDER {
            return Err(Error::InvalidOrder(order, Self::MIN_ORDER));
        }
        let n = order as f64;
        // sin form of cos(pi i / N): exact zero at the midpoint, exact symmetry
        let nodes = (0..=order)
            .map(|i| (PI * (n - 2.0 * i as f64) / (2.0 * n)).sin())
            .collect();
        let weights = (0..=order)
            .map(|i| if i == 0 || i == order { PI / (2.0 * n) } else { PI / n })
            .collect();
        Ok(CollocationGrid { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Smallest gap between adjacent nodes, `1 - cos(pi / N)`, at the ends.
    pub fn min_spacing(&self) -> f64 {
        self.nodes[0] - self.nodes[1]
    }
}

pub fn build_lobatto_grid(order: usize) -> Result<CollocationGrid> {
    CollocationGrid::lobatto(order)
}

/// `T_i(x_j)` on Lobatto nodes, reduced mod 2N so the argument stays small.
fn lobatto_cos(i: usize, j: usize, order: usize) -> f64 {
    let k = (i * j) % (2 * order);
    (PI * k as f64 / order as f64).cos()
}

/// Nodal samples on a collocation grid over a physical domain.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<CollocationGrid>,
    domain: Domain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<CollocationGrid>, domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: grid.nodes.len(),
                got: values.len(),
            });
        }
        Ok(GridFunction {
            grid,
            domain,
            values,
        })
    }

    pub fn sample(grid: Arc<CollocationGrid>, domain: Domain, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&xi| f(domain.from_reference(xi))).collect();
        GridFunction {
            grid,
            domain,
            values,
        }
    }

    pub fn grid(&self) -> &Arc<CollocationGrid> {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn physical_nodes(&self) -> Vec<f64> {
        self.grid.nodes.iter().map(|&xi| self.domain.from_reference(xi)).collect()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GridFunction::new(self.grid.clone(), self.domain, values)
    }
}

/// `sum_n f(x_n) w_n`, the Gauss–Lobatto approximation of the weighted
/// integral on the reference interval.  Exact for degree <= 2N - 1.
pub fn quadrature_integrate(f: &GridFunction) -> f64 {
    f.values.iter().zip(&f.grid.weights).map(|(v, w)| v * w).sum()
}

/// Truncated Chebyshev series `sum_n c_n T_n` on a physical domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralExpansion {
    coeffs: Vec<f64>,
    domain: Domain,
}

impl SpectralExpansion {
    pub fn new(coeffs: Vec<f64>, domain: Domain) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("expansion needs at least one coefficient".into()));
        }
        Ok(SpectralExpansion { coeffs, domain })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Discrete projection.  The last mode uses the discrete norm `pi` instead
    /// of `pi/2`, since `T_N` aliases onto itself on the Lobatto grid.
    pub fn analyze(f: &GridFunction) -> Self {
        let order = f.grid.order();
        let w = &f.grid.weights;
        let coeffs = (0..=order)
            .map(|i| {
                let norm = if i == 0 || i == order { PI } else { PI / 2.0 };
                let s: f64 = (0..=order)
                    .map(|j| lobatto_cos(i, j, order) * w[j] * f.values[j])
                    .sum();
                s / norm
            })
            .collect();
        SpectralExpansion {
            coeffs,
            domain: f.domain,
        }
    }

    /// Clenshaw summation at a reference coordinate.
    pub(crate) fn eval_reference(&self, xi: f64) -> f64 {
        clenshaw(&self.coeffs, xi)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let xi = clamp_reference(self.domain.to_reference(x))?;
        Ok(self.eval_reference(xi))
    }

    pub fn synthesize(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Coefficients of the derivative with respect to the physical coordinate.
    pub fn derivative(&self) -> SpectralExpansion {
        let mut d = modal_derivative(&self.coeffs);
        let scale = 2.0 / self.domain.width();
        d.iter_mut().for_each(|c| *c *= scale);
        SpectralExpansion {
            coeffs: d,
            domain: self.domain,
        }
    }
}

pub fn analyze(f: &GridFunction) -> SpectralExpansion {
    SpectralExpansion::analyze(f)
}

pub fn synthesize(e: &SpectralExpansion, xs: &[f64]) -> Result<Vec<f64>> {
    e.synthesize(xs)
}

pub(crate) fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    c[0] + x * b1 - b2
}

/// Backward recurrence `c_{k-1} d_{k-1} = d_{k+1} + 2k a_k`, `c_0 = 2`.
fn modal_derivative(a: &[f64]) -> Vec<f64> {
    let n = a.len() - 1;
    let mut d = vec![0.0; n + 1];
    if n == 0 {
        return d;
    }
    let mut next = 0.0; // d_{k+1}
    let mut cur = 0.0; // d_k
    for k in (1..=n).rev() {
        let prev = next + 2.0 * k as f64 * a[k];
        next = cur;
        cur = prev;
        d[k - 1] = prev;
    }
    d[0] *= 0.5;
    d
}

/// Modal, nodal and transform matrices on the reference interval.
#[derive(Debug, Clone)]
pub struct DiffOperators {
    grid: Arc<CollocationGrid>,
    modal: DMatrix<f64>,
    nodal: DMatrix<f64>,
    analysis: DMatrix<f64>,
    synthesis: DMatrix<f64>,
}

impl DiffOperators {
    pub fn new(order: usize) -> Result<Self> {
        let grid = Arc::new(CollocationGrid::lobatto(order)?);
        let n = order + 1;
        let synthesis = DMatrix::from_fn(n, n, |i, j| lobatto_cos(j, i, order));
        let analysis = synthesis
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::Singular(order))?;
        let modal = DMatrix::from_fn(n, n, |i, j| {
            if j > i && (j - i) % 2 == 1 {
                let ci = if i == 0 { 2.0 } else { 1.0 };
                2.0 * j as f64 / ci
            } else {
                0.0
            }
        });
        let nodal = &synthesis * &modal * &analysis;
        Ok(DiffOperators {
            grid,
            modal,
            nodal,
            analysis,
            synthesis,
        })
    }

    pub fn order(&self) -> usize {
        self.grid.order()
    }

    pub fn grid(&self) -> &Arc<CollocationGrid> {
        &self.grid
    }

    /// Derivative in coefficient space: `(Mc)_i` are the coefficients of `f'`.
    pub fn modal(&self) -> &DMatrix<f64> {
        &self.modal
    }

    /// Derivative in value space.
    pub fn nodal(&self) -> &DMatrix<f64> {
        &self.nodal
    }

    /// Values to coefficients, obtained by dense LU inversion.
    pub fn analysis(&self) -> &DMatrix<f64> {
        &self.analysis
    }

    /// Coefficients to values, `T_j(x_i)`.
    pub fn synthesis(&self) -> &DMatrix<f64> {
        &self.synthesis
    }

    pub fn apply_nodal(&self, values: &[f64]) -> Vec<f64> {
        matvec(&self.nodal, values)
    }

    pub fn apply_modal(&self, coeffs: &[f64]) -> Vec<f64> {
        matvec(&self.modal, coeffs)
    }
}

pub fn build_diff_operators(order: usize) -> Result<DiffOperators> {
    DiffOperators::new(order)
}

pub(crate) fn matvec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}
