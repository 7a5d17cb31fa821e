use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gibbsfree::harness::{emit_csv, run_study, EdgeSource, RunConfig, Study};
use gibbsfree::mollify::BoundaryMode;
use gibbsfree::Error;

/// Gibbs-free reconstruction studies for Chebyshev partial sums.
#[derive(Parser, Debug)]
#[command(name = "gibbsfree", version)]
struct Cli {
    #[command(subcommand)]
    study: Cmd,

    /// JSON run configuration; flags below override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for the CSV and manifest files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Polynomial orders of the sweep, e.g. 16,32,64.
    #[arg(long, global = true, value_delimiter = ',')]
    orders: Option<Vec<usize>>,

    /// Mollifier dilation constant.
    #[arg(long, global = true)]
    theta: Option<f64>,

    #[arg(long, global = true)]
    fine_points: Option<usize>,

    /// Refinement of the mollifier quadrature grid over the fine grid.
    #[arg(long, global = true)]
    refine: Option<usize>,

    #[arg(long, global = true, value_enum)]
    boundary_mode: Option<Boundary>,

    /// Probe points of the pointwise convergence study.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    probes: Option<Vec<f64>>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Extra randomly placed edge pairs in the edge study.
    #[arg(long, global = true)]
    random_pairs: Option<usize>,

    /// Record wall-clock seconds per order (output is then not reproducible).
    #[arg(long, global = true)]
    timings: bool,

    /// Advection snapshot times; an empty list disables snapshots.
    #[arg(long, global = true, value_delimiter = ',', num_args = 0..)]
    snapshots: Option<Vec<f64>>,

    /// Orders of the advection pipeline.
    #[arg(long, global = true, value_delimiter = ',')]
    advect_orders: Option<Vec<usize>>,

    #[arg(long, global = true)]
    cfl: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    speed: Option<f64>,

    /// Edges used by the convergence study.
    #[arg(long, global = true, value_enum)]
    edge_source: Option<Source>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Pointwise and L2 convergence sweeps.
    Converge,
    /// Edge detection accuracy.
    Edges,
    /// Advection of a top hat with reconstruction at snapshots.
    Advect,
    /// Everything above.
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Boundary {
    Truncate,
    Mirror,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Source {
    Exact,
    Detected,
}

impl Cli {
    fn run_config(&self) -> gibbsfree::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        cfg.study = match self.study {
            Cmd::Converge => Study::Converge,
            Cmd::Edges => Study::Edges,
            Cmd::Advect => Study::Advect,
            Cmd::All => Study::All,
        };
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = &self.orders {
            cfg.orders = v.clone();
        }
        if let Some(v) = self.theta {
            cfg.mollifier.theta = v;
        }
        if let Some(v) = self.fine_points {
            cfg.fine_points = v;
        }
        if let Some(v) = self.refine {
            cfg.mollifier.refine = v;
        }
        if let Some(v) = self.boundary_mode {
            cfg.mollifier.boundary = match v {
                Boundary::Truncate => BoundaryMode::TruncateRenormalize,
                Boundary::Mirror => BoundaryMode::Mirror,
            };
        }
        if let Some(v) = &self.probes {
            cfg.probes = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.random_pairs {
            cfg.random_pairs = v;
        }
        cfg.record_timings |= self.timings;
        if let Some(v) = &self.snapshots {
            cfg.advect.snapshot_times = v.clone();
        }
        if let Some(v) = &self.advect_orders {
            cfg.advect.orders = v.clone();
        }
        if let Some(v) = self.cfl {
            cfg.advect.cfl = v;
        }
        if let Some(v) = self.speed {
            cfg.advect.speed = v;
        }
        if let Some(v) = self.edge_source {
            cfg.edge_source = match v {
                Source::Exact => EdgeSource::Exact,
                Source::Detected => EdgeSource::Detected,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cfg: &RunConfig) -> Result<usize, Error> {
    let mut failures = 0;
    for res in run_study(cfg)? {
        let (csv, _) = emit_csv(&res, &cfg.output_dir)?;
        println!("{}: {} rows, {} failures -> {}", res.name, res.rows.len(), res.failures, csv.display());
        for f in &res.fits {
            println!(
                "  {} {} {} ({}, N {}..{}): slope {:.4}, r = {:.4}",
                f.study, f.metric, f.location, f.kind, f.order_min, f.order_max, f.slope, f.correlation
            );
        }
        failures += res.failures;
    }
    Ok(failures)
}

fn main() -> ExitCode {
    let cfg = match Cli::parse().run_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} cells failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
