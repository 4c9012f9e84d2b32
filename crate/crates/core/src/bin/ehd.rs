use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ehd_core::autodiff::ActivationKind;
use ehd_core::fem::{
    self, mesh_refinement_study, successive_difference_ratios, NewtonHistory, RefinementRow,
};
use ehd_core::harness::{
    run_comparison, run_sweep_traced, write_csv_rows, write_json, write_loss_curve, Config, Format,
    SweepAxis, SweepSpec,
};
use ehd_core::model::{l2_error, reference_grid, ModelParams, ReferenceSolution};
use ehd_core::par::Execution;
use ehd_core::pinn::{train_with, LossRecord, NetworkConfig, TrainingStatus};
use ehd_core::shooting::ShootingSolution;
use ehd_core::{Error, Result};

/// Largest allowed gap between the shooting oracle and the tabulated
/// reference in `validate`.
const VALIDATE_TOLERANCE: f64 = 5e-4;

#[derive(Parser, Debug)]
#[command(
    name = "ehd",
    version,
    about = "PINN and FEM solvers for the EHD conduit flow problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one network and report its loss history and error.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetFlags,
    },
    /// Solve once with the finite element engine.
    Fem {
        #[command(flatten)]
        common: Common,
        /// Number of cells.
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Run one hyperparameter study.
    Sweep {
        /// data_points, activation, depth, width or learning_rate.
        #[arg(long)]
        axis: SweepAxis,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetFlags,
        /// Write one `epoch,total_loss` file per cell into this directory.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Mesh refinement study.
    Refine {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cell counts.
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128,1024")]
        cells: Vec<usize>,
    },
    /// Side-by-side PINN, FEM and reference table.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetFlags,
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Check the tabulated reference against an independent shooting solution.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Ha².
    #[arg(long, allow_hyphen_values = true)]
    ha2: Option<f64>,
    /// Network seed, or the master seed for `sweep`.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug, Default)]
struct NetFlags {
    #[arg(long)]
    epochs: Option<usize>,
    /// Collocation points.
    #[arg(long)]
    points: Option<usize>,
    /// Hidden layers.
    #[arg(long)]
    layers: Option<usize>,
    /// Neurons per hidden layer.
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long)]
    activation: Option<ActivationKind>,
    /// Learning rate.
    #[arg(long, allow_hyphen_values = true)]
    lr: Option<f64>,
}

impl NetFlags {
    fn apply(&self, mut cfg: NetworkConfig) -> NetworkConfig {
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.points {
            cfg.n_points = v;
        }
        if let Some(v) = self.layers {
            cfg.hidden_layers = v;
        }
        if let Some(v) = self.neurons {
            cfg.neurons_per_layer = v;
        }
        if let Some(v) = self.activation {
            cfg.activation = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        cfg
    }
}

impl Common {
    fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(a) = self.alpha {
            cfg.model.alpha = a;
        }
        if let Some(h) = self.ha2 {
            cfg.model.ha_sq = h;
        }
        Ok(cfg)
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    /// Writes `rows` as CSV or `whole` as JSON to `--out` or stdout.
    fn emit<R: Serialize, W: Serialize>(&self, rows: &[R], whole: &W) -> Result<()> {
        match (&self.out, self.format) {
            (Some(p), Format::Csv) => write_csv_rows(rows, p),
            (Some(p), Format::Json) => write_json(whole, p),
            (None, Format::Csv) => {
                let mut w = csv::Writer::from_writer(io::stdout().lock());
                for r in rows {
                    w.serialize(r).map_err(|source| Error::Csv {
                        path: "<stdout>".into(),
                        source,
                    })?;
                }
                w.flush().map_err(stdout_err)
            }
            (None, Format::Json) => {
                let mut out = io::stdout().lock();
                serde_json::to_writer_pretty(&mut out, whole).map_err(|source| Error::Json {
                    path: "<stdout>".into(),
                    source,
                })?;
                writeln!(out).map_err(stdout_err)
            }
        }
    }
}

fn stdout_err(source: io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source,
    }
}

/// Summary lines go to stderr so stdout stays machine-readable.
macro_rules! note {
    ($($t:tt)*) => { eprintln!($($t)*) };
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    config: &'a NetworkConfig,
    alpha: f64,
    ha_sq: f64,
    parameters: usize,
    status: &'a TrainingStatus,
    seconds: f64,
    l2_error: Option<f64>,
    solution: Vec<(f64, f64)>,
    records: &'a [LossRecord],
}

fn cmd_train(common: &Common, net: &NetFlags) -> Result<()> {
    let file = common.config()?;
    let params = file.model_params()?;
    let mut cfg = net.apply(file.network.clone());
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let trace = train_with(&cfg, params, common.exec())?;
    let table = trace.network.evaluate(&reference_grid())?;
    let l2 = if trace.diverged() || params != ModelParams::default() {
        None
    } else {
        Some(l2_error(&table, &ReferenceSolution::tabulated())?)
    };
    let out = TrainOutput {
        config: &cfg,
        alpha: params.alpha(),
        ha_sq: params.ha_sq(),
        parameters: cfg.parameter_count(),
        status: &trace.status,
        seconds: trace.duration.as_secs_f64(),
        l2_error: l2,
        solution: table.samples().to_vec(),
        records: &trace.records,
    };
    match (&common.out, common.format) {
        (Some(p), Format::Csv) => write_loss_curve(&trace.records, p)?,
        _ => {
            let rows: Vec<_> = trace
                .records
                .iter()
                .map(|r| ehd_core::harness::LossCurveRow {
                    epoch: r.epoch,
                    total_loss: r.loss.total,
                })
                .collect();
            common.emit(&rows, &out)?;
        }
    }
    if let Some(last) = trace.final_loss() {
        note!(
            "final loss {:.3e} (diff {:.3e}, neumann {:.3e}, dirichlet {:.3e})",
            last.total,
            last.differential_cost,
            last.boundary_neumann,
            last.boundary_dirichlet
        );
    }
    if let Some(e) = l2 {
        note!("l2 error vs reference: {e:.4e}");
    }
    note!(
        "{} trainable parameters, {:.2} s",
        cfg.parameter_count(),
        trace.duration.as_secs_f64()
    );
    match trace.status {
        TrainingStatus::Completed => Ok(()),
        TrainingStatus::Diverged { epoch, reason } => Err(Error::Diverged { epoch, reason }),
    }
}

#[derive(Serialize)]
struct NodeRow {
    tau: f64,
    v: f64,
}

#[derive(Serialize)]
struct FemOutput<'a> {
    cells: usize,
    dofs: usize,
    alpha: f64,
    ha_sq: f64,
    v_half: f64,
    l2_error: Option<f64>,
    history: &'a NewtonHistory,
    nodes: &'a [f64],
    values: &'a [f64],
}

fn cmd_fem(common: &Common, cells: Option<usize>) -> Result<()> {
    let file = common.config()?;
    let params = file.model_params()?;
    let cells = cells.unwrap_or(file.fem.cells);
    let (state, history) = fem::solve(cells, params, &file.fem.settings, common.exec())?;
    let nodes = state.mesh().nodes();
    let l2 = if params == ModelParams::default() {
        Some(l2_error(
            &state.to_table(&reference_grid())?,
            &ReferenceSolution::tabulated(),
        )?)
    } else {
        None
    };
    let rows: Vec<NodeRow> = nodes
        .iter()
        .zip(state.values())
        .map(|(&tau, &v)| NodeRow { tau, v })
        .collect();
    let v_half = state.interpolate(0.5)?;
    common.emit(
        &rows,
        &FemOutput {
            cells,
            dofs: state.dofs(),
            alpha: params.alpha(),
            ha_sq: params.ha_sq(),
            v_half,
            l2_error: l2,
            history: &history,
            nodes: &nodes,
            values: state.values(),
        },
    )?;
    for s in &history.steps {
        note!(
            "iter {:>2}  residual {:.3e}  lambda {}",
            s.iteration,
            s.residual,
            s.damping.map_or("-".to_string(), |l| l.to_string())
        );
    }
    note!("v(0.5) = {v_half:.6}");
    if let Some(e) = l2 {
        note!("l2 error vs reference: {e:.4e}");
    }
    Ok(())
}

fn cmd_sweep(
    axis: SweepAxis,
    common: &Common,
    net: &NetFlags,
    curves: Option<&Path>,
) -> Result<()> {
    let file = common.config()?;
    let base = net.apply(file.network_over(&axis.study_base_config())?);
    let spec = SweepSpec::new(
        axis,
        axis.study_values(),
        base,
        file.model_params()?,
        common.seed.unwrap_or(file.master_seed),
    )?;
    let (report, traces) = run_sweep_traced(&spec, common.exec())?;
    if let Some(dir) = curves {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (row, records) in report.rows.iter().zip(&traces) {
            write_loss_curve(
                records,
                &dir.join(format!("{}_{}.csv", axis, row.axis_value)),
            )?;
        }
    }
    common.emit(&report.rows, &report)?;
    for row in &report.rows {
        let err = row
            .l2_error
            .map_or("diverged".to_string(), |e| format!("{e:.4e}"));
        note!("{:>14}  l2 {err}", row.axis_value);
    }
    Ok(())
}

#[derive(Serialize)]
struct RefineOutput<'a> {
    alpha: f64,
    ha_sq: f64,
    rows: &'a [RefinementRow],
    successive_difference_ratios: Vec<f64>,
}

fn cmd_refine(common: &Common, cells: &[usize]) -> Result<()> {
    let file = common.config()?;
    let params = file.model_params()?;
    let rows = mesh_refinement_study(cells, params, &file.fem.settings, common.exec())?;
    let ratios = successive_difference_ratios(&rows);
    common.emit(
        &rows,
        &RefineOutput {
            alpha: params.alpha(),
            ha_sq: params.ha_sq(),
            rows: &rows,
            successive_difference_ratios: ratios,
        },
    )?;
    for r in &rows {
        note!(
            "{:>6} cells  v(0.5) {:.6}  l2 {:.3e}",
            r.cells,
            r.v_half,
            r.l2_error
        );
    }
    Ok(())
}

fn cmd_compare(common: &Common, net: &NetFlags, cells: Option<usize>) -> Result<()> {
    let file = common.config()?;
    let mut cfg = net.apply(file.network.clone());
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let c = run_comparison(
        &cfg,
        cells.unwrap_or(file.fem.cells),
        file.model_params()?,
        common.exec(),
    )?;
    common.emit(&c.rows, &c)?;
    note!(
        "PINN l2 {:.4e}  ({} trainable parameters)",
        c.pinn_l2_error,
        c.pinn_parameters
    );
    if c.parameter_count_mismatch {
        note!(
            "note: the published comparison quotes {} parameters for this architecture",
            c.published_pinn_parameters
        );
    }
    note!("FEM  l2 {:.4e}  ({} DoFs)", c.fem_l2_error, c.fem_dofs);
    Ok(())
}

#[derive(Serialize)]
struct ValidateRow {
    tau: f64,
    reference: f64,
    shooting: f64,
    deviation: f64,
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    v0: f64,
    boundary_miss: f64,
    tolerance: f64,
    max_deviation: f64,
    passed: bool,
    rows: &'a [ValidateRow],
}

fn cmd_validate(common: &Common) -> Result<()> {
    let file = common.config()?;
    let params = file.model_params()?;
    if params != ModelParams::default() {
        return Err(Error::InvalidParameter(
            "the tabulated reference is for alpha = 0.5, Ha^2 = 1 only".into(),
        ));
    }
    let oracle = ShootingSolution::solve(params)?;
    let reference = ReferenceSolution::tabulated();
    let shot = oracle.values(&reference.taus())?;
    let rows: Vec<ValidateRow> = reference
        .points()
        .iter()
        .zip(shot)
        .map(|(&(tau, r), s)| ValidateRow {
            tau,
            reference: r,
            shooting: s,
            deviation: (s - r).abs(),
        })
        .collect();
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let passed = max_deviation <= VALIDATE_TOLERANCE;
    common.emit(
        &rows,
        &ValidateOutput {
            v0: oracle.v0,
            boundary_miss: oracle.boundary_miss,
            tolerance: VALIDATE_TOLERANCE,
            max_deviation,
            passed,
            rows: &rows,
        },
    )?;
    note!(
        "shooting v(0) = {:.10}, max deviation {max_deviation:.3e}",
        oracle.v0
    );
    if passed {
        Ok(())
    } else {
        Err(Error::Shooting(format!(
            "reference deviates from the oracle by {max_deviation:.3e} > {VALIDATE_TOLERANCE:e}"
        )))
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Train { common, net } => cmd_train(common, net),
        Command::Fem { common, cells } => cmd_fem(common, *cells),
        Command::Sweep {
            axis,
            common,
            net,
            curves,
        } => cmd_sweep(*axis, common, net, curves.as_deref()),
        Command::Refine { common, cells } => cmd_refine(common, cells),
        Command::Compare { common, net, cells } => cmd_compare(common, net, *cells),
        Command::Validate { common } => cmd_validate(common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
