//! Adaptive one-sided mollification.
//!
//! Each output point `x` gets its own kernel: a Gaussian of width
//! `delta(x)`, optionally multiplied by a Hermite sum that flattens its
//! spectrum.  The width shrinks with the distance `d(x)` to the nearest edge.
//! The kernel is cut off at the edges around `x`, so data on the far side of
//! a discontinuity never reaches `x`.  It is then renormalised to unit mass
//! over what remains.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cheb::{Domain, SpectralExpansion};
use crate::edge::EdgeSet;
use crate::error::{Error, Result};
use crate::quad::trapezoid;

pub const HERMITE_MAX_DEGREE: usize = 400;

/// Physicists' Hermite polynomial `H_n(z)`.
pub fn hermite_eval(n: usize, z: f64) -> Result<f64> {
    if n > HERMITE_MAX_DEGREE {
        return Err(Error::DegreeOverflow(n, HERMITE_MAX_DEGREE));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let (mut prev, mut cur) = (1.0, 2.0 * z);
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    if cur.is_finite() {
        Ok(cur)
    } else {
        Err(Error::DegreeOverflow(n, HERMITE_MAX_DEGREE))
    }
}

/// `sum_{j<=p} (-1)^j H_{2j}(z) / (4^j j!)`.
///
/// Uses `h_n = H_n / sqrt(2^n n!)`, which obeys
/// `h_{n+1} = z sqrt(2/(n+1)) h_n - sqrt(n/(n+1)) h_{n-1}`, so that each
/// term becomes `(-1)^j r_j h_{2j}` with `r_j = sqrt((2j)!) / (2^j j!)`.
/// Nothing in this form overflows, whatever `p` is.
pub(crate) fn hermite_sum(p: usize, z: f64) -> f64 {
    let mut sum = 1.0;
    let (mut hm1, mut h) = (0.0, 1.0);
    let mut r = 1.0;
    let mut n = 0usize;
    for j in 1..=p {
        for _ in 0..2 {
            let nf = n as f64;
            let next = z * (2.0 / (nf + 1.0)).sqrt() * h - (nf / (nf + 1.0)).sqrt() * hm1;
            hm1 = h;
            h = next;
            n += 1;
        }
        r *= ((2 * j - 1) as f64 / (2 * j) as f64).sqrt();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * r * h;
    }
    sum
}

/// Evenly spaced evaluation grid including both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct FineGrid {
    xs: Vec<f64>,
    domain: Domain,
}

impl FineGrid {
    pub const DEFAULT_POINTS: usize = 500;

    pub fn new(domain: Domain, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Config(format!("fine grid needs at least 2 points, got {points}")));
        }
        Ok(FineGrid {
            xs: uniform(domain, points),
            domain,
        })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn spacing(&self) -> f64 {
        self.domain.width() / (self.xs.len() - 1) as f64
    }
}

fn uniform(domain: Domain, points: usize) -> Vec<f64> {
    let h = domain.width() / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                domain.hi()
            } else {
                domain.lo() + i as f64 * h
            }
        })
        .collect()
}

/// Edge positions and the distance function `d(x)` derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessMap {
    edges: Vec<f64>,
    domain: Domain,
    d_max: f64,
}

impl SmoothnessMap {
    pub const DEFAULT_CAP: f64 = 1.0;

    pub fn new(edges: &EdgeSet, domain: Domain) -> Result<Self> {
        Self::with_cap(edges, domain, Self::DEFAULT_CAP)
    }

    pub fn with_cap(edges: &EdgeSet, domain: Domain, d_max: f64) -> Result<Self> {
        let locs = edges.locations();
        if let Some(&bad) = locs.iter().find(|&&c| !(c > domain.lo() && c < domain.hi())) {
            return Err(Error::InvalidInput(format!("edge {bad} is not inside the domain")));
        }
        if !(d_max > 0.0) {
            return Err(Error::Config(format!("smoothness cap must be positive, got {d_max}")));
        }
        Ok(SmoothnessMap {
            edges: locs,
            domain,
            d_max,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Distance to the nearest edge, capped.  Domain boundaries are not
    /// edges; kernels are clipped there separately.
    pub fn radius(&self, x: f64) -> f64 {
        self.edges
            .iter()
            .map(|c| (x - c).abs())
            .fold(self.d_max, f64::min)
    }

    /// Closest edges on either side, `-inf`/`+inf` when there are none.
    pub fn cell(&self, x: f64) -> (f64, f64) {
        let i = self.edges.partition_point(|&c| c <= x);
        let lo = if i > 0 { self.edges[i - 1] } else { f64::NEG_INFINITY };
        let hi = self.edges.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }
}

pub fn smoothness_radius(x: f64, sm: &SmoothnessMap) -> f64 {
    sm.radius(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dilation {
    /// `delta = sqrt(theta d / N)`: concentrates as N grows.
    Concentrating,
    /// `delta = sqrt(theta d N)`.
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degree {
    /// The same Hermite degree everywhere; 0 gives a plain Gaussian.
    Fixed(usize),
    /// `p = floor(theta^2 d N)`.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Cut the kernel at the domain boundary and renormalise.
    TruncateRenormalize,
    /// Reflect samples across the boundary over a width `delta(boundary)`.
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MollifierConfig {
    pub theta: f64,
    pub dilation: Dilation,
    pub degree: Degree,
    pub boundary: BoundaryMode,
    /// Quadrature nodes per fine-grid interval.
    pub refine: usize,
    /// Trapezoid points used for the normalisation `a(x)`.
    pub mass_points: usize,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        MollifierConfig {
            theta: 0.25,
            dilation: Dilation::Concentrating,
            degree: Degree::Fixed(0),
            boundary: BoundaryMode::TruncateRenormalize,
            refine: 8,
            mass_points: 8 * FineGrid::DEFAULT_POINTS,
        }
    }
}

impl MollifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if self.refine == 0 || self.mass_points < 16 {
            return Err(Error::Config("refine must be >= 1 and mass_points >= 16".into()));
        }
        Ok(())
    }

    fn delta(&self, d: f64, order: usize) -> f64 {
        let n = order as f64;
        match self.dilation {
            Dilation::Concentrating => (self.theta * d / n).sqrt(),
            Dilation::Growing => (self.theta * d * n).sqrt(),
        }
    }

    fn degree(&self, d: f64, order: usize) -> usize {
        match self.degree {
            Degree::Fixed(p) => p,
            Degree::Adaptive => (self.theta * self.theta * d * order as f64).floor().max(0.0) as usize,
        }
    }
}

/// Kernel centred at one output point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierKernel {
    pub center: f64,
    pub delta: f64,
    pub degree: usize,
    pub support: (f64, f64),
    pub norm: f64,
}

impl MollifierKernel {
    pub fn build(x: f64, sm: &SmoothnessMap, order: usize, cfg: &MollifierConfig) -> Result<Self> {
        if order < 4 {
            return Err(Error::InvalidOrder(order, 4));
        }
        cfg.validate()?;
        let d = sm.radius(x);
        if !(d > 0.0) {
            return Err(Error::DegenerateKernel(x));
        }
        let delta = cfg.delta(d, order);
        let degree = cfg.degree(d, order);
        let (mut lo, mut hi) = sm.cell(x);
        if cfg.boundary == BoundaryMode::TruncateRenormalize {
            lo = lo.max(sm.domain.lo());
            hi = hi.min(sm.domain.hi());
        }
        let mut k = MollifierKernel {
            center: x,
            delta,
            degree,
            support: (lo, hi),
            norm: 1.0,
        };
        let (a, b) = k.window();
        let m = cfg.mass_points.max(16);
        let h = (b - a) / (m - 1) as f64;
        // pin the last sample: a + (m - 1) h may round past the support
        let vals: Vec<f64> = (0..m)
            .map(|i| k.profile(if i == m - 1 { b } else { a + i as f64 * h }))
            .collect();
        k.norm = trapezoid(&vals, h);
        if !(k.norm > 0.0 && k.norm.is_finite()) {
            return Err(Error::DegenerateKernel(x));
        }
        Ok(k)
    }

    /// Half-width beyond which the profile is below round-off.
    pub fn reach(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.delta * ((4 * self.degree + 1) as f64).sqrt() + 6.0 * std::f64::consts::SQRT_2 * self.delta
    }

    /// Support intersected with the numerically relevant neighbourhood.
    pub fn window(&self) -> (f64, f64) {
        let r = self.reach();
        (
            self.support.0.max(self.center - r),
            self.support.1.min(self.center + r),
        )
    }

    /// Un-normalised profile, zero off the support.
    pub fn profile(&self, y: f64) -> f64 {
        if y < self.support.0 || y > self.support.1 {
            return 0.0;
        }
        let z = (self.center - y) / (std::f64::consts::SQRT_2 * self.delta);
        (-z * z).exp() * hermite_sum(self.degree, z) / self.delta
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.profile(y) / self.norm
    }
}

pub fn build_kernel(x: f64, sm: &SmoothnessMap, order: usize, cfg: &MollifierConfig) -> Result<MollifierKernel> {
    MollifierKernel::build(x, sm, order, cfg)
}

pub fn kernel_eval(k: &MollifierKernel, y: f64) -> f64 {
    k.eval(y)
}

/// Reconstructed values on a fine grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsFreeFunction {
    pub grid: FineGrid,
    pub values: Vec<f64>,
    /// Points whose kernel was degenerate; their value is copied from a
    /// neighbour.
    pub degenerate: Vec<usize>,
}

/// Mollifies samples of a partial sum given on a uniform quadrature grid
/// `refine` times finer than the output grid.
#[derive(Debug, Clone)]
pub struct Mollifier {
    grid: FineGrid,
    sm: SmoothnessMap,
    order: usize,
    cfg: MollifierConfig,
    nodes: Vec<f64>,
    /// Mirror half-widths at the lower and upper boundary.
    mirror: (f64, f64),
}

impl Mollifier {
    pub fn new(grid: FineGrid, sm: SmoothnessMap, order: usize, cfg: MollifierConfig) -> Result<Self> {
        cfg.validate()?;
        if order < 4 {
            return Err(Error::InvalidOrder(order, 4));
        }
        if grid.domain() != sm.domain() {
            return Err(Error::InvalidInput("fine grid and smoothness map use different domains".into()));
        }
        let q = (grid.len() - 1) * cfg.refine + 1;
        let nodes = uniform(grid.domain(), q);
        let d = grid.domain();
        let mirror = (
            cfg.delta(sm.radius(d.lo()), order),
            cfg.delta(sm.radius(d.hi()), order),
        );
        Ok(Mollifier {
            grid,
            sm,
            order,
            cfg,
            nodes,
            mirror,
        })
    }

    pub fn grid(&self) -> &FineGrid {
        &self.grid
    }

    pub fn config(&self) -> &MollifierConfig {
        &self.cfg
    }

    /// Where `apply` expects its samples.
    pub fn quadrature_nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn apply_expansion(&self, e: &SpectralExpansion) -> Result<GibbsFreeFunction> {
        self.apply(&e.synthesize(&self.nodes)?)
    }

    pub fn apply(&self, samples: &[f64]) -> Result<GibbsFreeFunction> {
        if samples.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: self.nodes.len(),
                got: samples.len(),
            });
        }
        let raw: Vec<Option<f64>> = self
            .grid
            .xs()
            .par_iter()
            .map(|&x| match self.value_at(x, samples) {
                Ok(v) => Ok(Some(v)),
                Err(Error::DegenerateKernel(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let degenerate: Vec<usize> = raw
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| i)
            .collect();
        let values = (0..raw.len())
            .map(|i| {
                raw[i]
                    .or_else(|| (1..raw.len()).find_map(|k| {
                        i.checked_sub(k).and_then(|j| raw[j]).or_else(|| raw.get(i + k).copied().flatten())
                    }))
                    .ok_or(Error::DegenerateKernel(self.grid.xs()[i]))
            })
            .collect::<Result<_>>()?;
        Ok(GibbsFreeFunction {
            grid: self.grid.clone(),
            values,
            degenerate,
        })
    }

    /// Mollified value at an arbitrary point of the domain.
    pub fn value_at(&self, x: f64, samples: &[f64]) -> Result<f64> {
        let k = MollifierKernel::build(x, &self.sm, self.order, &self.cfg)?;
        let d = self.grid.domain();
        let q = self.nodes.len() as i64;
        let h = d.width() / (q - 1) as f64;
        let (wlo, whi) = k.window();
        let j0 = ((wlo - d.lo()) / h - 1e-9).ceil() as i64;
        let j1 = ((whi - d.lo()) / h + 1e-9).floor() as i64;
        let (j0, j1) = match self.cfg.boundary {
            BoundaryMode::TruncateRenormalize => (j0.max(0), j1.min(q - 1)),
            BoundaryMode::Mirror => (j0, j1),
        };
        if j1 < j0 {
            return Err(Error::DegenerateKernel(x));
        }
        if j1 == j0 {
            return Ok(self.sample(j0, samples, h));
        }
        let (mut num, mut den) = (0.0, 0.0);
        for j in j0..=j1 {
            let y = self.node(j, h);
            let t = if j == j0 || j == j1 { 0.5 } else { 1.0 };
            let phi = t * k.profile(y);
            num += phi * self.sample(j, samples, h);
            den += phi;
        }
        if !(den > 0.0) {
            return Err(Error::DegenerateKernel(x));
        }
        Ok(num / den)
    }

    fn node(&self, j: i64, h: f64) -> f64 {
        if j >= 0 && (j as usize) < self.nodes.len() {
            self.nodes[j as usize]
        } else {
            self.grid.domain().lo() + j as f64 * h
        }
    }

    /// Sample at quadrature index `j`, reflecting across the boundary inside
    /// the mirror band and zero beyond it.
    fn sample(&self, j: i64, samples: &[f64], h: f64) -> f64 {
        let last = samples.len() as i64 - 1;
        if (0..=last).contains(&j) {
            return samples[j as usize];
        }
        let (k, band) = if j < 0 { (-j, self.mirror.0) } else { (j - last, self.mirror.1) };
        if k > last || k as f64 * h > band {
            return 0.0;
        }
        if j < 0 {
            samples[k as usize]
        } else {
            samples[(last - k) as usize]
        }
    }
}

/// Convenience wrapper: mollify a partial sum on a fine grid.
pub fn mollify_function(
    e: &SpectralExpansion,
    edges: &EdgeSet,
    grid: &FineGrid,
    cfg: &MollifierConfig,
) -> Result<GibbsFreeFunction> {
    let sm = SmoothnessMap::new(edges, e.domain())?;
    Mollifier::new(grid.clone(), sm, e.order(), *cfg)?.apply_expansion(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_edges() -> SmoothnessMap {
        SmoothnessMap::new(&EdgeSet::empty(), Domain::default()).unwrap()
    }

    #[test]
    fn hermite_small_orders() {
        assert_eq!(hermite_eval(0, 1.7).unwrap(), 1.0);
        assert_eq!(hermite_eval(2, 1.0).unwrap(), 2.0);
        assert_eq!(hermite_eval(4, 0.5).unwrap(), 1.0);
        assert!(matches!(hermite_eval(401, 0.1), Err(Error::DegreeOverflow(401, 400))));
    }

    #[test]
    fn hermite_sum_matches_direct_terms() {
        for p in 0..8 {
            for &z in &[0.0, 0.3, -1.1, 2.5] {
                let mut direct = 0.0;
                let mut fact = 1.0;
                for j in 0..=p {
                    if j > 0 {
                        fact *= j as f64;
                    }
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    direct += sign / (4f64.powi(j as i32) * fact) * hermite_eval(2 * j, z).unwrap();
                }
                let fast = hermite_sum(p, z);
                assert!((fast - direct).abs() <= 1e-12 * direct.abs().max(1.0), "p={p} z={z}");
            }
        }
        // large degrees stay finite
        assert!(hermite_sum(300, 3.0).is_finite());
    }

    #[test]
    fn radius_and_cells() {
        let sm = SmoothnessMap::new(&EdgeSet::from_locations(&[-0.6, 0.4]).unwrap(), Domain::default()).unwrap();
        assert!((sm.radius(0.0) - 0.4).abs() < 1e-15);
        assert_eq!(no_edges().radius(0.3), 1.0);
        let sm1 = SmoothnessMap::new(&EdgeSet::from_locations(&[0.5]).unwrap(), Domain::default()).unwrap();
        assert!(sm1.radius(0.5 + 1e-9) < 2e-9);
        assert_eq!(sm.cell(0.0), (-0.6, 0.4));
        assert_eq!(sm.cell(-0.9), (f64::NEG_INFINITY, -0.6));
    }

    #[test]
    fn adaptive_degree() {
        let cfg = MollifierConfig {
            degree: Degree::Adaptive,
            ..Default::default()
        };
        let sm = SmoothnessMap::new(&EdgeSet::empty(), Domain::new(-3.0, 3.0).unwrap()).unwrap();
        let k = MollifierKernel::build(0.0, &sm, 32, &cfg).unwrap();
        assert_eq!(k.degree, 2);
        let sm = SmoothnessMap::new(&EdgeSet::from_locations(&[0.01]).unwrap(), Domain::default()).unwrap();
        let k = MollifierKernel::build(0.0, &sm, 32, &cfg).unwrap();
        assert_eq!(k.degree, 0);
    }

    #[test]
    fn kernel_peaks() {
        let sm = no_edges();
        for p in [0usize, 1] {
            let cfg = MollifierConfig {
                degree: Degree::Fixed(p),
                ..Default::default()
            };
            let k = MollifierKernel::build(0.0, &sm, 32, &cfg).unwrap();
            let want = if p == 0 { 1.0 } else { 1.5 };
            assert!((k.profile(0.0) * k.delta - want).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_support_and_mass() {
        let sm = SmoothnessMap::new(&EdgeSet::from_locations(&[0.1]).unwrap(), Domain::default()).unwrap();
        let k = MollifierKernel::build(0.05, &sm, 16, &MollifierConfig::default()).unwrap();
        assert_eq!(k.eval(0.1 + 1e-12), 0.0);
        assert!(k.eval(0.1) > 0.0);
        assert_eq!(k.eval(-1.5), 0.0);
        let (a, b) = k.window();
        let m = 20001;
        let h = (b - a) / (m - 1) as f64;
        let vals: Vec<f64> = (0..m).map(|i| k.eval(a + i as f64 * h)).collect();
        assert!((trapezoid(&vals, h) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_at_edge() {
        let sm = SmoothnessMap::new(&EdgeSet::from_locations(&[0.5]).unwrap(), Domain::default()).unwrap();
        assert!(matches!(
            MollifierKernel::build(0.5, &sm, 16, &MollifierConfig::default()),
            Err(Error::DegenerateKernel(_))
        ));
    }

    #[test]
    fn constants_reproduced() {
        let grid = FineGrid::new(Domain::default(), 101).unwrap();
        let cfg = MollifierConfig {
            refine: 4,
            ..Default::default()
        };
        let m = Mollifier::new(grid.clone(), no_edges(), 16, cfg).unwrap();
        let s = vec![3.0; m.quadrature_nodes().len()];
        let out = m.apply(&s).unwrap();
        assert!(out.values.iter().all(|v| (v - 3.0).abs() < 1e-10));
        // mirroring only reproduces constants away from the boundary band
        let mirror = Mollifier::new(grid, no_edges(), 16, MollifierConfig { boundary: BoundaryMode::Mirror, ..cfg }).unwrap();
        let out = mirror.apply(&s).unwrap();
        for (x, v) in out.grid.xs().iter().zip(&out.values) {
            if x.abs() < 0.25 {
                assert!((v - 3.0).abs() < 1e-10, "x={x} v={v}");
            }
        }
        assert!(out.values[0] < 3.0);
    }

    #[test]
    fn degenerate_points_are_filled() {
        let grid = FineGrid::new(Domain::default(), 101).unwrap();
        let edges = EdgeSet::from_locations(&[grid.xs()[60]]).unwrap();
        let sm = SmoothnessMap::new(&edges, Domain::default()).unwrap();
        let m = Mollifier::new(grid, sm, 16, MollifierConfig { refine: 2, ..Default::default() }).unwrap();
        let s = vec![1.0; m.quadrature_nodes().len()];
        let out = m.apply(&s).unwrap();
        assert_eq!(out.degenerate, vec![60]);
        assert_eq!(out.values[60], 1.0);
    }
}
