use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{EdgeSource, RunConfig, Study};
use super::oracle::{self, TestFunction, L2_POINTS};
use crate::advect::{solve_advection, wrap_periodic, AdvectionConfig};
use crate::cheb::{CollocationGrid, DiffOperators, Domain, GridFunction, SpectralExpansion};
use crate::edge::{EdgeDetector, EdgeSet};
use crate::error::{Error, Result};
use crate::gegenbauer::gegenbauer_reconstruct;
use crate::mollify::{BoundaryMode, FineGrid, Mollifier, SmoothnessMap};

/// One id per reproduced figure.
pub const STUDY_IDS: [&str; 7] = ["fig3", "fig9", "fig11", "fig13", "fig14", "fig15", "fig16"];

/// A true edge with no detection this close counts as missed.
pub const MATCH_TOLERANCE: f64 = 0.1;

pub const INTERIOR_PAIR: (f64, f64) = (-0.25, 0.30);
pub const BOUNDARY_PAIR: (f64, f64) = (0.496, 0.996);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub study: String,
    pub order: usize,
    pub metric: String,
    pub location: String,
    pub value: f64,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub study: String,
    pub metric: String,
    pub location: String,
    /// `log_log` (power law) or `log_linear` (exponential).
    pub kind: String,
    pub slope: f64,
    pub correlation: f64,
    pub order_min: usize,
    pub order_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub name: String,
    pub rows: Vec<Row>,
    pub fits: Vec<Fit>,
    pub failures: usize,
    pub config: RunConfig,
}

impl StudyResult {
    fn new(name: &str, config: &RunConfig) -> Self {
        StudyResult {
            name: name.to_string(),
            rows: Vec::new(),
            fits: Vec::new(),
            failures: 0,
            config: config.clone(),
        }
    }

    /// `(N, value)` pairs for one curve, in row order.
    pub fn series(&self, study: &str, metric: &str, location: &str) -> (Vec<usize>, Vec<f64>) {
        self.rows
            .iter()
            .filter(|r| r.study == study && r.metric == metric && r.location == location)
            .map(|r| (r.order, r.value))
            .unzip()
    }

    pub fn value(&self, study: &str, order: usize, metric: &str, location: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.study == study && r.order == order && r.metric == metric && r.location == location)
            .map(|r| r.value)
    }

    fn fit(&mut self, study: &str, metric: &str, location: &str, exponential: bool) {
        let (orders, values) = self.series(study, metric, location);
        if orders.len() < 2 {
            return;
        }
        let (slope, correlation) = if exponential {
            oracle::log_linear_slope(&orders, &values)
        } else {
            oracle::log_log_slope(&orders, &values)
        };
        self.fits.push(Fit {
            study: study.into(),
            metric: metric.into(),
            location: location.into(),
            kind: if exponential { "log_linear" } else { "log_log" }.into(),
            slope,
            correlation,
            order_min: *orders.iter().min().unwrap(),
            order_max: *orders.iter().max().unwrap(),
        });
    }
}

struct Cell {
    study: &'static str,
    order: usize,
    rows: Vec<(String, String, f64)>,
    failures: usize,
}

impl Cell {
    fn new(study: &'static str, order: usize) -> Self {
        Cell {
            study,
            order,
            rows: Vec::new(),
            failures: 0,
        }
    }

    fn push(&mut self, metric: impl Into<String>, location: impl Into<String>, value: f64) {
        self.rows.push((metric.into(), location.into(), value));
    }
}

fn collect(res: &mut StudyResult, cells: Vec<(Vec<Cell>, f64)>, timings: bool) {
    for (group, seconds) in cells {
        for cell in group {
            res.failures += cell.failures;
            for (metric, location, value) in cell.rows {
                if !value.is_finite() || value < 0.0 {
                    res.failures += 1;
                }
                res.rows.push(Row {
                    study: cell.study.into(),
                    order: cell.order,
                    metric,
                    location,
                    value,
                    seconds: timings.then_some(seconds),
                });
            }
        }
    }
}

/// Interpolate `f` at the Lobatto nodes of order `n` and transform.
pub fn project(f: &TestFunction, order: usize) -> Result<SpectralExpansion> {
    let grid = Arc::new(CollocationGrid::lobatto(order)?);
    Ok(SpectralExpansion::analyze(&GridFunction::sample(grid, Domain::default(), |x| f.value(x))))
}

fn fine_grid(cfg: &RunConfig) -> Result<FineGrid> {
    FineGrid::new(Domain::default(), cfg.fine_points)
}

fn study_edges(cfg: &RunConfig, f: &TestFunction, e: &SpectralExpansion, ops: &DiffOperators) -> Result<EdgeSet> {
    match cfg.edge_source {
        EdgeSource::Exact => EdgeSet::from_locations(&f.edges()),
        EdgeSource::Detected => cfg.detector.detect(e, ops, fine_grid(cfg)?.xs()),
    }
}

fn fmt_probe(label: &str, p: f64) -> String {
    format!("{label}@{p}")
}

fn convergence_cells(cfg: &RunConfig, order: usize) -> Result<Vec<Cell>> {
    let domain = Domain::default();
    let l2_xs = oracle::uniform_points(domain, L2_POINTS);
    let ops = DiffOperators::new(order)?;
    let gauss = TestFunction::Gaussian { sigma: cfg.sigma };
    let tophat = TestFunction::tophat();
    let single = TestFunction::single_edge();

    let mut f3 = Cell::new("fig3", order);
    let eg = project(&gauss, order)?;
    f3.push("l2", "gaussian", oracle::l2_error(&eg.synthesize(&l2_xs)?, |x| gauss.value(x), domain)?);
    let et = project(&tophat, order)?;
    let st = et.synthesize(&l2_xs)?;
    f3.push("l2", "tophat", oracle::l2_error(&st, |x| tophat.value(x), domain)?);
    f3.push("linf", "tophat", oracle::max_error(&l2_xs, &st, |x| tophat.value(x)));

    let mut f14 = Cell::new("fig14", order);
    let mut f15 = Cell::new("fig15", order);
    let grid = fine_grid(cfg)?;
    for (label, f) in [("two_edge", &tophat), ("single_edge", &single)] {
        let e = project(f, order)?;
        let edges = study_edges(cfg, f, &e, &ops)?;
        let sm = SmoothnessMap::new(&edges, domain)?;
        for &p in &cfg.probes {
            let boundary = p == domain.lo() || p == domain.hi();
            if boundary && label != "two_edge" {
                continue;
            }
            let modes: &[BoundaryMode] = if boundary {
                &[BoundaryMode::TruncateRenormalize, BoundaryMode::Mirror]
            } else {
                &[cfg.mollifier.boundary]
            };
            for &mode in modes {
                let mcfg = crate::mollify::MollifierConfig { boundary: mode, ..cfg.mollifier };
                let m = Mollifier::new(grid.clone(), sm.clone(), order, mcfg)?;
                let samples = e.synthesize(m.quadrature_nodes())?;
                let err = (m.value_at(p, &samples)? - f.value(p)).abs();
                if boundary {
                    let metric = match mode {
                        BoundaryMode::TruncateRenormalize => "truncate",
                        BoundaryMode::Mirror => "mirror",
                    };
                    f15.push(metric, fmt_probe(label, p), err);
                } else {
                    f14.push("mollified", fmt_probe(label, p), err);
                }
            }
            if !boundary {
                f14.push("raw", fmt_probe(label, p), (e.eval(p)? - f.value(p)).abs());
            }
        }
    }
    Ok(vec![f3, f14, f15])
}

pub fn run_convergence_study(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let cells = cfg
        .orders
        .par_iter()
        .map(|&n| {
            let t0 = Instant::now();
            let cells = convergence_cells(cfg, n).map_err(|e| e.context(format!("convergence study, N = {n}")))?;
            Ok((cells, t0.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut res = StudyResult::new("converge", cfg);
    collect(&mut res, cells, cfg.record_timings);
    res.fit("fig3", "l2", "tophat", false);
    for &p in &cfg.probes {
        if p.abs() == 1.0 {
            res.fit("fig15", "truncate", &fmt_probe("two_edge", p), false);
            res.fit("fig15", "mirror", &fmt_probe("two_edge", p), false);
        } else {
            res.fit("fig14", "mollified", &fmt_probe("two_edge", p), false);
            res.fit("fig14", "mollified", &fmt_probe("single_edge", p), true);
        }
    }
    Ok(res)
}

/// Comparison of detected edges against the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScore {
    /// Distance from each true edge to the nearest detected edge.
    pub errors: Vec<Option<f64>>,
    pub detected: usize,
    pub spurious: usize,
    pub missed: usize,
}

impl EdgeScore {
    pub fn max_error(&self) -> Option<f64> {
        self.errors.iter().try_fold(0.0f64, |m, e| e.map(|e| m.max(e)))
    }
}

pub fn score_edges(truth: &[f64], detected: &[f64], tol: f64) -> EdgeScore {
    let nearest = |c: f64| -> Option<(usize, f64)> {
        detected
            .iter()
            .enumerate()
            .map(|(i, d)| (i, (d - c).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    };
    let hits: Vec<Option<(usize, f64)>> = truth.iter().map(|&c| nearest(c)).collect();
    let errors: Vec<Option<f64>> = hits.iter().map(|h| h.map(|(_, d)| d)).collect();
    let missed = errors.iter().filter(|e| e.is_none_or(|d| d > tol)).count();
    // each true edge claims only its nearest detection
    let mut claimed: Vec<usize> = hits.iter().flatten().filter(|h| h.1 <= tol).map(|h| h.0).collect();
    claimed.sort_unstable();
    claimed.dedup();
    let spurious = detected.len() - claimed.len();
    EdgeScore {
        errors,
        detected: detected.len(),
        spurious,
        missed,
    }
}

fn push_score(cell: &mut Cell, prefix: &str, truth: &[f64], score: &EdgeScore) {
    for (c, e) in truth.iter().zip(&score.errors) {
        if let Some(e) = e {
            cell.push(format!("{prefix}location_error"), format!("{c}"), *e);
        }
    }
    if let Some(m) = score.max_error() {
        cell.push(format!("{prefix}max_location_error"), "all", m);
    }
    cell.push(format!("{prefix}detected"), "all", score.detected as f64);
    cell.push(format!("{prefix}spurious"), "all", score.spurious as f64);
    cell.push(format!("{prefix}missed"), "all", score.missed as f64);
}

/// Detected edges of the top hat on `[a, b]`, with and without the sign filter.
pub fn detect_pair(detector: &EdgeDetector, pair: (f64, f64), order: usize, grid: &FineGrid) -> Result<EdgeSet> {
    let f = TestFunction::TopHat { lo: pair.0, hi: pair.1 };
    let e = project(&f, order)?;
    let ops = DiffOperators::new(order)?;
    detector.detect(&e, &ops, grid.xs())
}

fn random_pairs(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.random_pairs)
        .map(|_| {
            let a = rng.gen_range(-0.8..0.0);
            let b = rng.gen_range(a + 0.3..0.8);
            (a, b)
        })
        .collect()
}

fn edge_cells(cfg: &RunConfig, order: usize, extra: &[(f64, f64)]) -> Result<Vec<Cell>> {
    let grid = fine_grid(cfg)?;
    let filtered = EdgeDetector {
        filter: true,
        ..cfg.detector.clone()
    };
    let unfiltered = EdgeDetector {
        filter: false,
        ..cfg.detector.clone()
    };
    let mut f9 = Cell::new("fig9", order);
    let truth = [INTERIOR_PAIR.0, INTERIOR_PAIR.1];
    let found = detect_pair(&filtered, INTERIOR_PAIR, order, &grid)?;
    push_score(&mut f9, "", &truth, &score_edges(&truth, &found.locations(), MATCH_TOLERANCE));
    for (k, &pair) in extra.iter().enumerate() {
        let truth = [pair.0, pair.1];
        let found = detect_pair(&filtered, pair, order, &grid)?;
        if let Some(m) = score_edges(&truth, &found.locations(), MATCH_TOLERANCE).max_error() {
            f9.push("max_location_error", format!("random{k}:{:.6}:{:.6}", pair.0, pair.1), m);
        }
    }
    let mut f11 = Cell::new("fig11", order);
    let truth = [BOUNDARY_PAIR.0, BOUNDARY_PAIR.1];
    for (prefix, det) in [("unfiltered_", &unfiltered), ("filtered_", &filtered)] {
        let found = detect_pair(det, BOUNDARY_PAIR, order, &grid)?;
        push_score(&mut f11, prefix, &truth, &score_edges(&truth, &found.locations(), MATCH_TOLERANCE));
    }
    Ok(vec![f9, f11])
}

pub fn run_edge_study(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let extra = random_pairs(cfg);
    let cells = cfg
        .orders
        .par_iter()
        .map(|&n| {
            let t0 = Instant::now();
            let cells = edge_cells(cfg, n, &extra).map_err(|e| e.context(format!("edge study, N = {n}")))?;
            Ok((cells, t0.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut res = StudyResult::new("edges", cfg);
    collect(&mut res, cells, cfg.record_timings);
    res.fit("fig9", "max_location_error", "all", false);
    Ok(res)
}

/// Errors of both reconstructions at one advection snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotScore {
    pub t: f64,
    pub true_edges: Vec<f64>,
    pub detected: Vec<f64>,
    /// Distance from the nearest true edge to the domain boundary.
    pub boundary_distance: f64,
    pub mollifier_interior: f64,
    pub mollifier_max: f64,
    pub gegenbauer_interior: f64,
    pub gegenbauer_max: f64,
}

/// Advect the default top hat and score both reconstructions at every
/// snapshot.
pub fn advect_scores(cfg: &RunConfig, order: usize) -> Result<Vec<SnapshotScore>> {
    let plan = &cfg.advect;
    let f = TestFunction::tophat();
    let acfg = AdvectionConfig {
        speed: plan.speed,
        order,
        cfl: plan.cfl,
        t_final: plan.snapshot_times.iter().cloned().fold(0.0, f64::max),
        snapshot_times: plan.snapshot_times.clone(),
    };
    let snaps = solve_advection(|x| f.value(x), &f.edges(), &acfg)?;
    let domain = Domain::default();
    let grid = fine_grid(cfg)?;
    let ops = DiffOperators::new(order)?;
    snaps
        .iter()
        .map(|s| {
            let e = SpectralExpansion::analyze(&s.state);
            let detected = cfg.detector.detect(&e, &ops, grid.xs())?;
            let exact = |x: f64| f.value(wrap_periodic(x + plan.speed * s.t, domain));
            let sm = SmoothnessMap::new(&detected, domain)?;
            let moll = Mollifier::new(grid.clone(), sm, order, cfg.mollifier)?.apply_expansion(&e)?;
            let geg = gegenbauer_reconstruct(&e, &detected, &grid, &cfg.gegenbauer)?;
            let xs = grid.xs();
            let interior = |v: &[f64]| oracle::interior_error(xs, v, exact, &s.exact_edges, plan.edge_window);
            Ok(SnapshotScore {
                t: s.t,
                true_edges: s.exact_edges.clone(),
                detected: detected.locations(),
                boundary_distance: s
                    .exact_edges
                    .iter()
                    .map(|c| (c - domain.lo()).min(domain.hi() - c))
                    .fold(f64::INFINITY, f64::min),
                mollifier_interior: interior(&moll.values),
                mollifier_max: oracle::max_error(xs, &moll.values, exact),
                gegenbauer_interior: interior(&geg.values),
                gegenbauer_max: oracle::max_error(xs, &geg.values, exact),
            })
        })
        .collect()
}

fn advect_cells(cfg: &RunConfig, order: usize) -> Result<Vec<Cell>> {
    let mut f13 = Cell::new("fig13", order);
    let mut f16 = Cell::new("fig16", order);
    match advect_scores(cfg, order) {
        Ok(scores) => {
            for s in scores {
                let at = format!("t={}", s.t);
                f13.push("interior_error", at.clone(), s.mollifier_interior);
                f13.push("max_error", at.clone(), s.mollifier_max);
                f13.push("detected_edges", at.clone(), s.detected.len() as f64);
                f13.push("boundary_distance", at.clone(), s.boundary_distance);
                f16.push("interior_error", at.clone(), s.gegenbauer_interior);
                f16.push("max_error", at, s.gegenbauer_max);
            }
        }
        Err(Error::BlowUp { t, .. }) => {
            f13.push("failed", "blowup", t);
            f13.failures += 1;
        }
        Err(e) => return Err(e),
    }
    Ok(vec![f13, f16])
}

pub fn run_advect_pipeline(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let cells = cfg
        .advect
        .orders
        .par_iter()
        .map(|&n| {
            let t0 = Instant::now();
            let cells = advect_cells(cfg, n).map_err(|e| e.context(format!("advection pipeline, N = {n}")))?;
            Ok((cells, t0.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut res = StudyResult::new("advect", cfg);
    collect(&mut res, cells, cfg.record_timings);
    Ok(res)
}

/// Run whatever `cfg.study` selects.
pub fn run_study(cfg: &RunConfig) -> Result<Vec<StudyResult>> {
    Ok(match cfg.study {
        Study::Converge => vec![run_convergence_study(cfg)?],
        Study::Edges => vec![run_edge_study(cfg)?],
        Study::Advect => vec![run_advect_pipeline(cfg)?],
        Study::All => vec![
            run_convergence_study(cfg)?,
            run_edge_study(cfg)?,
            run_advect_pipeline(cfg)?,
        ],
    })
}
