//! Method-of-lines solver for `u_t = c u_x` on [-1, 1] with periodic data.
//!
//! Space is collocated on the Lobatto grid and time is advanced with RK4.
//! The non-periodic basis is made periodic by injection: the time derivative
//! at the inflow node copies the one at the outflow node.

use serde::{Deserialize, Serialize};

use crate::cheb::{Domain, DiffOperators, GridFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdvectionConfig {
    pub speed: f64,
    pub order: usize,
    pub cfl: f64,
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
}

impl Default for AdvectionConfig {
    fn default() -> Self {
        AdvectionConfig {
            speed: 1.0,
            order: 32,
            cfl: 0.25,
            t_final: 2.0,
            snapshot_times: Vec::new(),
        }
    }
}

impl AdvectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.speed == 0.0 || !self.speed.is_finite() {
            return Err(Error::Config("advection speed must be finite and non-zero".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        if let Some(t) = self.snapshot_times.iter().find(|&&t| !(t >= 0.0 && t <= self.t_final)) {
            return Err(Error::Config(format!("snapshot time {t} outside [0, {}]", self.t_final)));
        }
        if self.order < 2 {
            return Err(Error::InvalidOrder(self.order, 2));
        }
        Ok(())
    }

    /// `cfl * (1 - cos(pi/N)) / |c|`.
    pub fn time_step(&self) -> f64 {
        let h = 1.0 - (std::f64::consts::PI / self.order as f64).cos();
        self.cfl * h / self.speed.abs()
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: GridFunction,
    pub exact_edges: Vec<f64>,
}

/// Wrap into `[lo, hi)`.
pub fn wrap_periodic(x: f64, domain: Domain) -> f64 {
    let w = domain.width();
    let r = (x - domain.lo()).rem_euclid(w);
    let r = if r >= w { 0.0 } else { r };
    domain.lo() + r
}

/// `c N u` with the inflow node slaved to the outflow node.
pub fn advection_rhs(u: &[f64], ops: &DiffOperators, c: f64) -> Vec<f64> {
    let mut r: Vec<f64> = ops.apply_nodal(u).into_iter().map(|v| c * v).collect();
    close_periodic(&mut r, c);
    r
}

fn close_periodic(r: &mut [f64], c: f64) {
    let last = r.len() - 1;
    // nodes descend: index 0 is x = +1, the inflow when c > 0
    if c > 0.0 {
        r[0] = r[last];
    } else {
        r[last] = r[0];
    }
}

pub fn rk4_step(u: &[f64], t: f64, dt: f64, ops: &DiffOperators, c: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    let axpy = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> { a.iter().zip(k).map(|(a, k)| a + s * k).collect() };
    let k1 = advection_rhs(u, ops, c);
    let k2 = advection_rhs(&axpy(u, &k1, 0.5 * dt), ops, c);
    let k3 = advection_rhs(&axpy(u, &k2, 0.5 * dt), ops, c);
    let k4 = advection_rhs(&axpy(u, &k3, dt), ops, c);
    let out: Vec<f64> = (0..u.len())
        .map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp {
            t: t + dt,
            order: ops.order(),
        });
    }
    Ok(out)
}

/// Integrate from `u0`, landing exactly on each requested snapshot time.
/// `edges` are the discontinuities of `u0`; their advected positions are
/// reported with each snapshot.
pub fn solve_advection(u0: impl Fn(f64) -> f64, edges: &[f64], cfg: &AdvectionConfig) -> Result<Vec<Snapshot>> {
    cfg.validate()?;
    let ops = DiffOperators::new(cfg.order)?;
    let domain = Domain::default();
    let start = GridFunction::sample(ops.grid().clone(), domain, u0);
    let mut times = cfg.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    let dt0 = cfg.time_step();
    let mut u = start.values().to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in &times {
        while target - t > 1e-14 {
            let dt = dt0.min(target - t);
            u = rk4_step(&u, t, dt, &ops, cfg.speed)?;
            t = if target - t <= dt0 { target } else { t + dt };
        }
        let mut exact: Vec<f64> = edges.iter().map(|&e| wrap_periodic(e - cfg.speed * target, domain)).collect();
        exact.sort_by(f64::total_cmp);
        out.push(Snapshot {
            t: target,
            state: start.with_values(u.clone())?,
            exact_edges: exact,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rhs_of_constant_vanishes() {
        let ops = DiffOperators::new(16).unwrap();
        let r = advection_rhs(&[2.0; 17], &ops, 1.0);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rhs_of_sine() {
        let ops = DiffOperators::new(32).unwrap();
        let x = ops.grid().nodes().to_vec();
        let u: Vec<f64> = x.iter().map(|x| (PI * x).sin()).collect();
        let r = advection_rhs(&u, &ops, 1.0);
        for i in 1..32 {
            assert!((r[i] - PI * (PI * x[i]).cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_rhs_is_fixed_point() {
        let ops = DiffOperators::new(8).unwrap();
        let u = vec![1.5; 9];
        assert_eq!(rk4_step(&u, 0.0, 0.01, &ops, 1.0).unwrap(), u);
    }

    #[test]
    fn zero_speed_rejected() {
        let cfg = AdvectionConfig {
            speed: 0.0,
            ..Default::default()
        };
        assert!(matches!(solve_advection(|x| x, &[], &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn wraps_into_domain() {
        let d = Domain::default();
        assert!((wrap_periodic(-1.5, d) - 0.5).abs() < 1e-15);
        assert!((wrap_periodic(1.0, d) + 1.0).abs() < 1e-15);
        assert!((wrap_periodic(3.25, d) + 0.75).abs() < 1e-15);
    }

    #[test]
    fn no_snapshots_gives_nothing() {
        let cfg = AdvectionConfig::default();
        assert!(solve_advection(|x| x, &[], &cfg).unwrap().is_empty());
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let cfg = AdvectionConfig {
            order: 16,
            t_final: 0.3,
            snapshot_times: vec![0.3, 0.0, 0.1234],
            ..Default::default()
        };
        let s = solve_advection(|x| (-(x * x) * 4.0).exp(), &[0.5], &cfg).unwrap();
        let ts: Vec<f64> = s.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 0.1234, 0.3]);
        assert!((s[2].exact_edges[0] - 0.2).abs() < 1e-14);
    }
}
