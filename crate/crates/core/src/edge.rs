//! Discontinuity detection from Chebyshev coefficients.
//!
//! A concentration factor `mu(k/N)` turns the differentiated series into an
//! approximation of the jump function `[f](x) = f(x+) - f(x-)`: it tends to
//! the jump height at a discontinuity and to zero where `f` is smooth.
//! Several factors are combined with minmod, which suppresses the
//! factor-specific oscillations, and edges are read off as peaks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cheb::{self, clamp_reference, DiffOperators, SpectralExpansion};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// `Si(pi) = int_0^pi sin(t)/t dt`.
pub const SI_PI: f64 = 1.851_937_051_982_466_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationKind {
    Trig,
    Poly,
    Exp,
}

impl ConcentrationKind {
    pub const ALL: [ConcentrationKind; 3] =
        [ConcentrationKind::Trig, ConcentrationKind::Poly, ConcentrationKind::Exp];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationConfig {
    pub kind: ConcentrationKind,
    pub beta: f64,
    pub p: i32,
    pub alpha: f64,
    pub eps: f64,
    gamma: f64,
}

impl ConcentrationConfig {
    /// Defaults `beta = pi`, `p = 1`, `alpha = 6`, `eps = 1/N`.
    pub fn new(kind: ConcentrationKind, order: usize) -> Result<Self> {
        Self::with_params(kind, PI, 1, 6.0, 1.0 / order.max(1) as f64)
    }

    pub fn with_params(kind: ConcentrationKind, beta: f64, p: i32, alpha: f64, eps: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(eps > 0.0 && eps < 0.5) || p < 1 {
            return Err(Error::Config(format!(
                "concentration parameters out of range (alpha={alpha}, eps={eps}, p={p})"
            )));
        }
        let gamma = if kind == ConcentrationKind::Exp {
            let integral = adaptive_simpson(&|t| exp_bump(alpha, t), eps, 1.0 - eps, 1e-10);
            PI / integral
        } else {
            1.0
        };
        Ok(ConcentrationConfig {
            kind,
            beta,
            p,
            alpha,
            eps,
            gamma,
        })
    }

    /// Normalisation of the exponential factor.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn factor(&self, eta: f64) -> Result<f64> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidEta(eta));
        }
        Ok(match self.kind {
            // sin(beta) vanishes at beta = pi; the first-order factor is
            // normalised by Si(pi) instead.
            ConcentrationKind::Trig => {
                if (self.beta - PI).abs() < 1e-12 {
                    PI * (PI * eta).sin() / SI_PI
                } else {
                    PI * (self.beta * eta).sin() / self.beta.sin()
                }
            }
            ConcentrationKind::Poly => PI * eta.powi(self.p),
            ConcentrationKind::Exp => self.gamma * eta * exp_bump(self.alpha, eta),
        })
    }
}

pub fn concentration_factor(cfg: &ConcentrationConfig, eta: f64) -> Result<f64> {
    cfg.factor(eta)
}

fn exp_bump(alpha: f64, t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (1.0 / (alpha * t * (t - 1.0))).exp()
    }
}

/// Samples of a jump-function approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpApproximation {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

/// `sum_k mu(k/N) c_k sin(k theta)` with `x = cos(theta)`, written through
/// `T'_k = k U_{k-1}` so it stays polynomial in `x`.  With this scaling a unit
/// jump produces a peak of height ~1.
pub fn jump_function(
    e: &SpectralExpansion,
    cfg: &ConcentrationConfig,
    xs: &[f64],
) -> Result<JumpApproximation> {
    let order = e.order();
    if order < 4 {
        return Err(Error::InvalidOrder(order, 4));
    }
    let n = order as f64;
    let weights: Vec<f64> = (1..=order)
        .map(|k| Ok(cfg.factor(k as f64 / n)? * e.coeffs()[k]))
        .collect::<Result<_>>()?;
    let domain = e.domain();
    let values = xs
        .iter()
        .map(|&x| {
            let xi = clamp_reference(domain.to_reference(x))?;
            // U_{k-1} by forward recurrence
            let (mut um1, mut u) = (0.0, 1.0);
            let mut acc = 0.0;
            for w in &weights {
                acc += w * u;
                let next = 2.0 * xi * u - um1;
                um1 = u;
                u = next;
            }
            Ok((1.0 - xi * xi).max(0.0).sqrt() * acc)
        })
        .collect::<Result<_>>()?;
    Ok(JumpApproximation {
        xs: xs.to_vec(),
        values,
    })
}

fn minmod(vals: impl Iterator<Item = f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > 0.0 {
        lo
    } else if hi < 0.0 {
        hi
    } else {
        0.0
    }
}

pub fn minmod_combine(jumps: &[JumpApproximation]) -> Result<JumpApproximation> {
    if jumps.len() < 2 {
        return Err(Error::InvalidInput("minmod needs at least two approximations".into()));
    }
    let xs = &jumps[0].xs;
    if jumps.iter().any(|j| &j.xs != xs || j.values.len() != xs.len()) {
        return Err(Error::GridMismatch);
    }
    let values = (0..xs.len())
        .map(|i| minmod(jumps.iter().map(|j| j.values[i])))
        .collect();
    Ok(JumpApproximation {
        xs: xs.clone(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub location: f64,
    pub jump: f64,
}

/// Edges sorted by location.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeSet {
    edges: Vec<Edge>,
}

impl EdgeSet {
    pub fn new(mut edges: Vec<Edge>) -> Result<Self> {
        edges.sort_by(|a, b| a.location.total_cmp(&b.location));
        if edges.windows(2).any(|w| w[0].location >= w[1].location)
            || edges.iter().any(|e| !e.location.is_finite())
        {
            return Err(Error::InvalidInput("edge locations must be finite and distinct".into()));
        }
        Ok(EdgeSet { edges })
    }

    /// Edges with unknown jump heights.
    pub fn from_locations(locations: &[f64]) -> Result<Self> {
        Self::new(locations.iter().map(|&location| Edge { location, jump: 0.0 }).collect())
    }

    pub fn empty() -> Self {
        EdgeSet::default()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn locations(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.location).collect()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Strict interior local maxima of `|mm|` above `rel_threshold * max|mm|`
/// and above `abs_floor`.
pub fn locate_edges(mm: &JumpApproximation, rel_threshold: f64, abs_floor: f64) -> EdgeSet {
    let a: Vec<f64> = mm.values.iter().map(|v| v.abs()).collect();
    let peak = a.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return EdgeSet::empty();
    }
    let cut = (rel_threshold * peak).max(abs_floor);
    let edges = (1..a.len().saturating_sub(1))
        .filter(|&i| a[i] > a[i - 1] && a[i] > a[i + 1] && a[i] > cut)
        .map(|i| Edge {
            location: mm.xs[i],
            jump: mm.values[i],
        })
        .collect();
    EdgeSet { edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Max,
    Min,
}

/// Drop candidates whose jump sign disagrees with the nearest extremum of the
/// spectral derivative: a rising edge sits on a derivative maximum.
pub fn filter_spurious(
    candidates: &EdgeSet,
    e: &SpectralExpansion,
    ops: &DiffOperators,
    xs: &[f64],
) -> Result<EdgeSet> {
    if candidates.is_empty() || xs.len() < 3 {
        return Ok(candidates.clone());
    }
    let scale = 2.0 / e.domain().width();
    let dc: Vec<f64> = ops.apply_modal(e.coeffs()).iter().map(|c| c * scale).collect();
    let domain = e.domain();
    let d: Vec<f64> = xs
        .iter()
        .map(|&x| Ok(cheb::clenshaw(&dc, clamp_reference(domain.to_reference(x))?)))
        .collect::<Result<_>>()?;
    let m = d.len();
    let extrema: Vec<(usize, Extremum)> = (0..m)
        .filter_map(|i| {
            let left = if i > 0 { Some(d[i - 1]) } else { None };
            let right = if i + 1 < m { Some(d[i + 1]) } else { None };
            let above = left.is_none_or(|l| d[i] > l) && right.is_none_or(|r| d[i] > r);
            let below = left.is_none_or(|l| d[i] < l) && right.is_none_or(|r| d[i] < r);
            match (above, below) {
                (true, false) => Some((i, Extremum::Max)),
                (false, true) => Some((i, Extremum::Min)),
                _ => None,
            }
        })
        .collect();
    let kept = candidates
        .edges
        .iter()
        .filter(|edge| {
            let at = nearest_index(xs, edge.location);
            let nearest = extrema.iter().min_by(|a, b| {
                let da = a.0.abs_diff(at);
                let db = b.0.abs_diff(at);
                da.cmp(&db).then(d[b.0].abs().total_cmp(&d[a.0].abs()))
            });
            match nearest {
                Some(&(i, Extremum::Max)) => edge.jump > 0.0 && d[i] > 0.0,
                Some(&(i, Extremum::Min)) => edge.jump < 0.0 && d[i] < 0.0,
                None => false,
            }
        })
        .copied()
        .collect();
    Ok(EdgeSet { edges: kept })
}

fn nearest_index(xs: &[f64], x: f64) -> usize {
    xs.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Full pipeline: jump functions for every kind, minmod, peak search and an
/// optional sign filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EdgeDetector {
    pub kinds: Vec<ConcentrationKind>,
    pub rel_threshold: f64,
    /// Peaks must also exceed this fraction of the peak-to-peak range of the
    /// partial sum on the evaluation grid.
    pub floor_fraction: f64,
    pub filter: bool,
}

impl Default for EdgeDetector {
    fn default() -> Self {
        EdgeDetector {
            kinds: ConcentrationKind::ALL.to_vec(),
            rel_threshold: 0.1,
            floor_fraction: 0.05,
            filter: true,
        }
    }
}

impl EdgeDetector {
    pub fn minmod(&self, e: &SpectralExpansion, xs: &[f64]) -> Result<JumpApproximation> {
        let jumps = self
            .kinds
            .iter()
            .map(|&k| jump_function(e, &ConcentrationConfig::new(k, e.order())?, xs))
            .collect::<Result<Vec<_>>>()?;
        if jumps.len() == 1 {
            return Ok(jumps.into_iter().next().unwrap());
        }
        minmod_combine(&jumps)
    }

    pub fn detect(&self, e: &SpectralExpansion, ops: &DiffOperators, xs: &[f64]) -> Result<EdgeSet> {
        let mm = self.minmod(e, xs)?;
        let s = e.synthesize(xs)?;
        let (lo, hi) = s
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let floor = (self.floor_fraction * (hi - lo)).max(f64::MIN_POSITIVE);
        let candidates = locate_edges(&mm, self.rel_threshold, floor);
        if self.filter {
            filter_spurious(&candidates, e, ops, xs)
        } else {
            Ok(candidates)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::{CollocationGrid, Domain, GridFunction};
    use std::sync::Arc;

    fn expansion(order: usize, f: impl Fn(f64) -> f64) -> SpectralExpansion {
        let g = Arc::new(CollocationGrid::lobatto(order).unwrap());
        SpectralExpansion::analyze(&GridFunction::sample(g, Domain::default(), f))
    }

    fn fine(m: usize) -> Vec<f64> {
        (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect()
    }

    fn tophat(x: f64) -> f64 {
        if x.abs() <= 0.5 {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn factor_values() {
        let poly = ConcentrationConfig::new(ConcentrationKind::Poly, 32).unwrap();
        assert!((poly.factor(0.5).unwrap() - PI / 2.0).abs() < 1e-15);
        let exp = ConcentrationConfig::new(ConcentrationKind::Exp, 32).unwrap();
        assert_eq!(exp.factor(1.0).unwrap(), 0.0);
        assert!(exp.factor(1e-6).unwrap() < 1e-300);
        assert!(matches!(poly.factor(0.0), Err(Error::InvalidEta(_))));
        assert!(matches!(poly.factor(1.5), Err(Error::InvalidEta(_))));
    }

    #[test]
    fn trig_factor_uses_sine_integral() {
        let t = ConcentrationConfig::new(ConcentrationKind::Trig, 16).unwrap();
        assert!((t.factor(0.5).unwrap() - PI / SI_PI).abs() < 1e-15);
    }

    #[test]
    fn minmod_pointwise() {
        let xs = vec![0.0];
        let j = |v: f64| JumpApproximation {
            xs: xs.clone(),
            values: vec![v],
        };
        let mm = |vs: &[f64]| minmod_combine(&vs.iter().map(|&v| j(v)).collect::<Vec<_>>()).unwrap().values[0];
        assert_eq!(mm(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(mm(&[-1.0, -2.0]), -1.0);
        assert_eq!(mm(&[1.0, -2.0]), 0.0);
        let other = JumpApproximation {
            xs: vec![0.5],
            values: vec![1.0],
        };
        assert!(matches!(minmod_combine(&[j(1.0), other]), Err(Error::GridMismatch)));
    }

    #[test]
    fn constant_has_no_jumps() {
        let e = expansion(16, |_| 2.5);
        let cfg = ConcentrationConfig::new(ConcentrationKind::Trig, 16).unwrap();
        let j = jump_function(&e, &cfg, &fine(101)).unwrap();
        assert!(j.values.iter().all(|v| v.abs() < 1e-13));
        assert!(locate_edges(&j, 0.1, 1e-10).is_empty());
    }

    #[test]
    fn tophat_jumps_have_unit_size() {
        let e = expansion(32, tophat);
        let xs = fine(500);
        let cfg = ConcentrationConfig::new(ConcentrationKind::Trig, 32).unwrap();
        let j = jump_function(&e, &cfg, &xs).unwrap();
        let (imax, vmax) = j.values.iter().enumerate().fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        let (imin, vmin) = j.values.iter().enumerate().fold((0, f64::MAX), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
        assert!((xs[imax] + 0.5).abs() < 0.05 && (vmax - 1.0).abs() < 0.2, "{} {}", xs[imax], vmax);
        assert!((xs[imin] - 0.5).abs() < 0.05 && (vmin + 1.0).abs() < 0.2, "{} {}", xs[imin], vmin);
    }

    #[test]
    fn tophat_edges_located() {
        let e = expansion(32, tophat);
        let ops = DiffOperators::new(32).unwrap();
        let edges = EdgeDetector::default().detect(&e, &ops, &fine(500)).unwrap();
        let loc = edges.locations();
        assert_eq!(loc.len(), 2, "{loc:?}");
        assert!((loc[0] + 0.5).abs() < 5e-2 && (loc[1] - 0.5).abs() < 5e-2);
        assert!(edges.edges()[0].jump > 0.0 && edges.edges()[1].jump < 0.0);
    }

    #[test]
    fn sign_filter_cases() {
        // atan(4x) rises steepest at 0: its derivative has a maximum there
        let e = expansion(24, |x| (4.0 * x).atan());
        let ops = DiffOperators::new(24).unwrap();
        let xs = fine(201);
        let up = EdgeSet::new(vec![Edge { location: 0.0, jump: 1.0 }]).unwrap();
        let down = EdgeSet::new(vec![Edge { location: 0.0, jump: -1.0 }]).unwrap();
        assert_eq!(filter_spurious(&up, &e, &ops, &xs).unwrap().len(), 1);
        assert_eq!(filter_spurious(&down, &e, &ops, &xs).unwrap().len(), 0);
    }
}
