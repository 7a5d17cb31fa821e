use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cheb::{CollocationGrid, Domain};
use crate::edge::EdgeDetector;
use crate::error::{Error, Result};
use crate::gegenbauer::GegenbauerConfig;
use crate::mollify::MollifierConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Converge,
    Edges,
    Advect,
    All,
}

/// Which edges the convergence study mollifies with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSource {
    Exact,
    Detected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdvectPlan {
    pub orders: Vec<usize>,
    pub speed: f64,
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
    /// Half-width of the window around each true edge excluded from the
    /// interior error.
    pub edge_window: f64,
}

impl Default for AdvectPlan {
    fn default() -> Self {
        AdvectPlan {
            orders: vec![32],
            speed: 1.0,
            cfl: 0.25,
            snapshot_times: vec![0.0, 0.3, 0.47, 0.8, 1.0, 1.53, 2.0],
            edge_window: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub study: Study,
    pub orders: Vec<usize>,
    pub sigma: f64,
    pub fine_points: usize,
    pub probes: Vec<f64>,
    pub edge_source: EdgeSource,
    pub detector: EdgeDetector,
    pub mollifier: MollifierConfig,
    pub gegenbauer: GegenbauerConfig,
    pub advect: AdvectPlan,
    /// Extra randomly placed edge pairs in the edge study.
    pub random_pairs: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Wall times make the CSV non-reproducible, so they are opt-in.
    pub record_timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            study: Study::All,
            orders: vec![8, 12, 16, 20, 24, 32, 40, 48, 56, 64, 72, 80, 96, 112, 128],
            sigma: 1.0 / 6.0,
            fine_points: 500,
            probes: vec![0.002, -1.0],
            edge_source: EdgeSource::Exact,
            detector: EdgeDetector::default(),
            mollifier: MollifierConfig::default(),
            gegenbauer: GegenbauerConfig::default(),
            advect: AdvectPlan::default(),
            random_pairs: 0,
            seed: 0,
            output_dir: PathBuf::from("results"),
            record_timings: false,
        }
    }
}

pub const MAX_ORDER: usize = 256;

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let check_orders = |orders: &[usize], what: &str| -> Result<()> {
            if let Some(n) = orders.iter().find(|&&n| !(4..=MAX_ORDER).contains(&n)) {
                return Err(Error::Config(format!("{what} order {n} outside [4, {MAX_ORDER}]")));
            }
            Ok(())
        };
        check_orders(&self.orders, "sweep")?;
        check_orders(&self.advect.orders, "advection")?;
        if !(self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.fine_points < 3 {
            return Err(Error::Config("fine grid needs at least 3 points".into()));
        }
        self.mollifier.validate()?;
        if !(self.detector.rel_threshold >= 0.0 && self.detector.floor_fraction >= 0.0) {
            return Err(Error::Config("edge thresholds must be non-negative".into()));
        }
        if self.detector.kinds.is_empty() {
            return Err(Error::Config("at least one concentration kind is required".into()));
        }
        if !(self.gegenbauer.proportionality > 0.0) {
            return Err(Error::Config("gegenbauer proportionality must be positive".into()));
        }
        if self.advect.speed == 0.0 || !(self.advect.cfl > 0.0 && self.advect.cfl <= 1.0) {
            return Err(Error::Config("advection needs a non-zero speed and cfl in (0, 1]".into()));
        }
        if self.advect.snapshot_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Config("snapshot times must be finite and non-negative".into()));
        }
        let d = Domain::default();
        for &p in &self.probes {
            if !d.contains(p) {
                return Err(Error::Config(format!("probe {p} outside the domain")));
            }
            if p > d.lo() && p < d.hi() {
                // an interior probe sitting on a node would hide the Gibbs error
                for &n in &self.orders {
                    let g = CollocationGrid::lobatto(n)?;
                    if g.nodes().iter().any(|x| (x - p).abs() < 1e-12) {
                        return Err(Error::Config(format!("probe {p} coincides with a node at N = {n}")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn node_probe_rejected() {
        let cfg = RunConfig {
            probes: vec![0.0],
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"orders":[16,32],"mollifier":{"boundary":"mirror"}}"#).unwrap();
        assert_eq!(cfg.orders, vec![16, 32]);
        assert_eq!(cfg.mollifier.theta, 0.25);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus":1}"#).is_err());
    }
}
