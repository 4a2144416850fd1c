//! Experiment driver for the fracrb solvers: configuration, convergence
//! studies and mesh sweeps with stable CSV output, rate tables, and
//! Zolotarev point dumps.

pub mod config;
pub mod rates;
pub mod study;

pub use config::{BoundsSpec, ConfigError, Domain, ExperimentConfig, RhsSpec};
pub use rates::{rate_table, rates_csv, zpoints_text, RateRow};
pub use study::{
    run_convergence_study, run_mesh_sweep, Metric, RateFit, StudyError, StudyOutput, StudyRow,
    SweepOutput,
};
