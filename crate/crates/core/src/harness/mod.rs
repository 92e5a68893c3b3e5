//! End-to-end studies, their configuration format and reports.

pub mod checks;
mod config;
mod report;
mod studies;

pub use config::{default_tolerances, StudyConfig, StudyKind};
pub use report::{Check, NamedFit, NamedLadder, Numerics, SolveTiming, StudyReport, Table, Target, Timing};
pub use studies::{
    representation_error, run_study, run_study_on, selftest, solve_point, study_decay, study_flux, study_k_to_zero,
    study_kernels, study_lap_helmholtz, study_lap_zero, Solved,
};
