//! Convergence, edge-location and advection studies with CSV output.

mod config;
pub mod oracle;
mod output;
mod studies;

pub use config::{AdvectPlan, EdgeSource, RunConfig, Study, MAX_ORDER};
pub use oracle::TestFunction;
pub use output::{emit_csv, CSV_HEADER};
pub use studies::{
    advect_scores, detect_pair, project, run_advect_pipeline, run_convergence_study, run_edge_study, run_study,
    score_edges, EdgeScore, Fit, Row, SnapshotScore, StudyResult, BOUNDARY_PAIR, INTERIOR_PAIR, MATCH_TOLERANCE,
    STUDY_IDS,
};
