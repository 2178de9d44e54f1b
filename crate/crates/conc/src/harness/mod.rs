//! Experiment orchestration: configuration, deterministic replication
//! streams, the concentration-dominance and ERM oracle-inequality
//! experiments, and CSV/JSON result emission.
//!
//! Reproducibility contract: a config plus master seed determines every
//! record byte-for-byte (the wall-time column aside), whether replications
//! run serially or in parallel. Replication streams are derived as
//! `(master, experiment id, grid index, replication index)` and records are
//! sorted by (T, replication) before emission.

mod config;
mod experiments;
mod record;

pub use config::{
    BasicCheckConfig, BetaProfileConfig, BoundForm, ConcentrationBoundConfig,
    ConcentrationConfig, ErmConfig, GammaProfileConfig, GeneratorConfig, ScalarLossFamily,
    SimulateConfig, SpaceConfig,
};
pub use experiments::{
    calibrate_eps1, run_beta_profile, run_concentration_experiment, run_erm_experiment,
    run_erm_experiment_detailed, run_gamma_profile, ErmReplication, GammaProfileRow,
};
pub use record::{
    emit_results, fmt_float17, parse_records_json, render_records, OutputFormat, ResultRecord,
};
