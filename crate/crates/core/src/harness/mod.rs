//! Experiment orchestration: hyperparameter sweeps, the mesh study, the
//! PINN/FEM comparison, configuration files and CSV/JSON export.

mod compare;
mod config;
mod export;
mod sweep;

pub use compare::{
    run_comparison, Comparison, ComparisonRow, ReferenceKind, PUBLISHED_PARAMETER_COUNT,
};
pub use config::{Config, FemSection, ModelSection, CONFIG_SCHEMA_VERSION};
pub use export::{
    read_csv_rows, read_json, write_csv_rows, write_json, write_loss_curve, Format, LossCurveRow,
};
pub use sweep::{
    cell_seed, run_sweep, run_sweep_traced, AxisValue, SweepAxis, SweepReport, SweepRow, SweepSpec,
};
