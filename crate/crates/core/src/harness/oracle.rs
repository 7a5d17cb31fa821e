//! Analytic test functions and brute-force error measures.  Nothing here uses
//! the spectral machinery, so errors are measured against independent truth.

use serde::{Deserialize, Serialize};

use crate::cheb::Domain;
use crate::error::{Error, Result};

/// Points of the uniform trapezoid rule used for L2 errors.
pub const L2_POINTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(-x^2 / (2 sigma^2))`.
    Gaussian { sigma: f64 },
    /// 1 on `[lo, hi]`, 0 elsewhere.
    TopHat { lo: f64, hi: f64 },
    /// `levels[i]` between `edges[i-1]` and `edges[i]`.
    PiecewiseFlat { edges: Vec<f64>, levels: Vec<f64> },
}

impl TestFunction {
    pub fn gaussian() -> Self {
        TestFunction::Gaussian { sigma: 1.0 / 6.0 }
    }

    pub fn tophat() -> Self {
        TestFunction::TopHat { lo: -0.5, hi: 0.5 }
    }

    pub fn piecewise_flat() -> Self {
        TestFunction::PiecewiseFlat {
            edges: vec![-0.6, 0.4],
            levels: vec![0.0, 1.0, 0.0],
        }
    }

    /// One jump: 1 left of `-0.5`, 0 right of it.
    pub fn single_edge() -> Self {
        TestFunction::PiecewiseFlat {
            edges: vec![-0.5],
            levels: vec![1.0, 0.0],
        }
    }

    pub fn validate(&self, domain: Domain) -> Result<()> {
        let inside = |c: &f64| *c > domain.lo() && *c < domain.hi();
        match self {
            TestFunction::Gaussian { sigma } if !(*sigma > 0.0) => {
                Err(Error::Config(format!("gaussian width must be positive, got {sigma}")))
            }
            TestFunction::TopHat { lo, hi } if !(lo < hi && inside(lo) && inside(hi)) => {
                Err(Error::Config(format!("top hat [{lo}, {hi}] must lie strictly inside the domain")))
            }
            TestFunction::PiecewiseFlat { edges, levels } => {
                if levels.len() != edges.len() + 1 {
                    return Err(Error::Config("piecewise flat needs one more level than edges".into()));
                }
                if !edges.iter().all(inside) || edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("piecewise flat edges must be sorted and interior".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            TestFunction::Gaussian { sigma } => (-x * x / (2.0 * sigma * sigma)).exp(),
            TestFunction::TopHat { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::PiecewiseFlat { edges, levels } => levels[edges.partition_point(|&c| c <= x)],
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        match self {
            TestFunction::Gaussian { .. } => Vec::new(),
            TestFunction::TopHat { lo, hi } => vec![*lo, *hi],
            TestFunction::PiecewiseFlat { edges, .. } => edges.clone(),
        }
    }
}

pub fn uniform_points(domain: Domain, n: usize) -> Vec<f64> {
    let h = domain.width() / (n - 1) as f64;
    (0..n).map(|i| domain.lo() + i as f64 * h).collect()
}

/// `sqrt(int (a - f)^2)` by the composite trapezoid rule on [`L2_POINTS`].
pub fn l2_error(approx: &[f64], exact: impl Fn(f64) -> f64, domain: Domain) -> Result<f64> {
    if approx.len() != L2_POINTS {
        return Err(Error::LengthMismatch {
            expected: L2_POINTS,
            got: approx.len(),
        });
    }
    let xs = uniform_points(domain, L2_POINTS);
    let h = domain.width() / (L2_POINTS - 1) as f64;
    let sq: Vec<f64> = xs.iter().zip(approx).map(|(&x, a)| (a - exact(x)).powi(2)).collect();
    let s = h * (0.5 * (sq[0] + sq[L2_POINTS - 1]) + sq[1..L2_POINTS - 1].iter().sum::<f64>());
    Ok(s.sqrt())
}

pub fn max_error(xs: &[f64], approx: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
    xs.iter().zip(approx).map(|(&x, a)| (a - exact(x)).abs()).fold(0.0, f64::max)
}

/// Max error away from the given edges.
pub fn interior_error(xs: &[f64], approx: &[f64], exact: impl Fn(f64) -> f64, edges: &[f64], window: f64) -> f64 {
    xs.iter()
        .zip(approx)
        .filter(|(x, _)| edges.iter().all(|c| (*x - c).abs() > window))
        .map(|(&x, a)| (a - exact(x)).abs())
        .fold(0.0, f64::max)
}

/// Least-squares line through `(x, y)`: slope and Pearson correlation.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (sxy / sxx, sxy / (sxx * syy).sqrt())
}

/// Slope of `log(err)` against `log(N)`.
pub fn log_log_slope(orders: &[usize], errs: &[f64]) -> (f64, f64) {
    let (x, y): (Vec<f64>, Vec<f64>) = orders
        .iter()
        .zip(errs)
        .filter(|(_, e)| **e > 0.0)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .unzip();
    linear_fit(&x, &y)
}

/// Slope of `log(err)` against `N`.
pub fn log_linear_slope(orders: &[usize], errs: &[f64]) -> (f64, f64) {
    let (x, y): (Vec<f64>, Vec<f64>) = orders
        .iter()
        .zip(errs)
        .filter(|(_, e)| **e > 0.0)
        .map(|(&n, &e)| (n as f64, e.ln()))
        .unzip();
    linear_fit(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_values() {
        let t = TestFunction::tophat();
        assert_eq!(t.value(0.0), 1.0);
        assert_eq!(t.value(0.7), 0.0);
        let s = TestFunction::single_edge();
        assert_eq!(s.value(-0.9), 1.0);
        assert_eq!(s.value(0.0), 0.0);
        assert_eq!(TestFunction::piecewise_flat().edges(), vec![-0.6, 0.4]);
        assert!(TestFunction::Gaussian { sigma: 0.0 }.validate(Domain::default()).is_err());
    }

    #[test]
    fn l2_of_constant_offset() {
        let d = Domain::default();
        let approx = vec![0.5; L2_POINTS];
        let e = l2_error(&approx, |_| 0.0, d).unwrap();
        assert!((e - 0.5 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fits_recover_power_laws() {
        let ns = [8usize, 16, 32, 64];
        let errs: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-2.5)).collect();
        let (s, r) = log_log_slope(&ns, &errs);
        assert!((s + 2.5).abs() < 1e-12 && (r + 1.0).abs() < 1e-12);
        let errs: Vec<f64> = ns.iter().map(|&n| (-0.3 * n as f64).exp()).collect();
        let (s, _) = log_linear_slope(&ns, &errs);
        assert!((s + 0.3).abs() < 1e-12);
    }
}
