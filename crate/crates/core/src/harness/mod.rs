//! Experiment orchestration behind the `bkic` command line tool.
//!
//! A command resolves an [`ExperimentConfig`] from defaults and a flat
//! `key = value` map, then produces a [`Table`] whose comment header records
//! every resolved setting. Monte Carlo trials run in parallel; each trial is
//! seeded from `(seed, point, trial)` and results are reduced in order, so
//! output bytes do not depend on the thread count.

mod config;
mod csv;
mod monte_carlo;
mod stats;
mod sweep;
mod validate;

pub use config::{
    parse_config_text, Command, ConfigMap, ExperimentConfig, FadingKind, Scheme, Suite, Sweep, ZMod, DEFAULT_SEED,
    DEFAULT_TRIALS, KNOWN_KEYS,
};
pub use csv::{format_number, Table};
pub use monte_carlo::{mc_bkic_residual, mc_orthogonal_rate, mc_traditional_sinr, McSetup};
pub use stats::{mean_estimate, ratio_of_means, to_db, McEstimate};
pub use sweep::{run_fig3, run_fig4, run_sweep, run_table, Cell, ResultRow};
pub use validate::{
    continuous_fading_cov, h_invariance, jensen, mimo_identity, report_table, run_validation, sinr_match,
    zf_equivalence, Check,
};
