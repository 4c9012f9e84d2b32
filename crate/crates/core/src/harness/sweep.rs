use std::fmt;

use serde::{Deserialize, Serialize};

use crate::autodiff::ActivationKind;
use crate::error::{Error, Result};
use crate::model::{l2_error, reference_grid, ModelParams, ReferenceSolution};
use crate::par::Execution;
use crate::pinn::{train_with, LossRecord, NetworkConfig, TrainingTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    DataPoints,
    Activation,
    Depth,
    Width,
    LearningRate,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] = [
        SweepAxis::DataPoints,
        SweepAxis::Activation,
        SweepAxis::Depth,
        SweepAxis::Width,
        SweepAxis::LearningRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::DataPoints => "data_points",
            SweepAxis::Activation => "activation",
            SweepAxis::Depth => "depth",
            SweepAxis::Width => "width",
            SweepAxis::LearningRate => "learning_rate",
        }
    }

    /// Values of the published study along this axis.
    pub fn study_values(self) -> Vec<AxisValue> {
        let counts = |v: &[usize]| v.iter().map(|&n| AxisValue::Count(n)).collect();
        match self {
            SweepAxis::DataPoints => counts(&[10, 50, 100, 150, 200, 500]),
            SweepAxis::Activation => ActivationKind::ALL
                .iter()
                .map(|&a| AxisValue::Activation(a))
                .collect(),
            SweepAxis::Depth => counts(&[1, 2, 3, 4]),
            SweepAxis::Width => counts(&[4, 8, 16, 32, 64, 128]),
            SweepAxis::LearningRate => [0.1, 0.01, 0.001, 0.0001]
                .iter()
                .map(|&r| AxisValue::Rate(r))
                .collect(),
        }
    }

    /// Fixed settings of the published study along this axis. Every study
    /// uses 100 points, 16 neurons, sigmoid and lr 0.001 unless varied; the
    /// first four use a single hidden layer, the learning-rate study two.
    pub fn study_base_config(self) -> NetworkConfig {
        let hidden_layers = match self {
            SweepAxis::LearningRate => 2,
            _ => 1,
        };
        NetworkConfig {
            hidden_layers,
            ..NetworkConfig::default()
        }
    }

    pub fn parse_value(self, s: &str) -> Result<AxisValue> {
        let bad = |e: &dyn fmt::Display| {
            Error::InvalidParameter(format!("bad {} value '{s}': {e}", self.name()))
        };
        match self {
            SweepAxis::Activation => s.parse().map(AxisValue::Activation),
            SweepAxis::LearningRate => s.parse().map(AxisValue::Rate).map_err(|e| bad(&e)),
            _ => s.parse().map(AxisValue::Count).map_err(|e| bad(&e)),
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &NetworkConfig, value: AxisValue) -> Result<NetworkConfig> {
        let mut cfg = base.clone();
        match (self, value) {
            (SweepAxis::DataPoints, AxisValue::Count(n)) => cfg.n_points = n,
            (SweepAxis::Depth, AxisValue::Count(n)) => cfg.hidden_layers = n,
            (SweepAxis::Width, AxisValue::Count(n)) => cfg.neurons_per_layer = n,
            (SweepAxis::Activation, AxisValue::Activation(a)) => cfg.activation = a,
            (SweepAxis::LearningRate, AxisValue::Rate(r)) => cfg.learning_rate = r,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "value {value} does not belong on the {} axis",
                    self.name()
                )))
            }
        }
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sweep axis '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Count(usize),
    Rate(f64),
    Activation(ActivationKind),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Count(n) => write!(f, "{n}"),
            AxisValue::Rate(r) => write!(f, "{r}"),
            AxisValue::Activation(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<AxisValue>,
    pub base_config: NetworkConfig,
    pub model: ModelParams,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn new(
        axis: SweepAxis,
        values: Vec<AxisValue>,
        base_config: NetworkConfig,
        model: ModelParams,
        master_seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            axis,
            values,
            base_config,
            model,
            master_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The published study along `axis`.
    pub fn study(axis: SweepAxis, master_seed: u64) -> Self {
        Self {
            axis,
            values: axis.study_values(),
            base_config: axis.study_base_config(),
            model: ModelParams::default(),
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep needs at least one axis value".into(),
            ));
        }
        self.base_config.validate()?;
        for &v in &self.values {
            self.axis.apply(&self.base_config, v)?.validate()?;
        }
        Ok(())
    }
}

/// Seed of one sweep cell. It depends on the axis name and the value
/// itself, not on the position in the list, so adding values leaves
/// existing rows unchanged.
pub fn cell_seed(master_seed: u64, axis: SweepAxis, value: AxisValue) -> u64 {
    // FNV-1a, then the splitmix64 finaliser to spread the bits.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let key = format!("{}\u{0}{}", axis.name(), value);
    for b in master_seed.to_le_bytes().iter().chain(key.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// One sweep cell. Field names are the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: String,
    pub final_total_loss: Option<f64>,
    pub diff_cost: Option<f64>,
    pub bc_neumann: Option<f64>,
    pub bc_dirichlet: Option<f64>,
    pub l2_error: Option<f64>,
    pub diverged: bool,
    pub seconds: f64,
}

impl SweepRow {
    /// Equality ignoring the wall-clock column.
    pub fn same_result(&self, other: &Self) -> bool {
        Self {
            seconds: 0.0,
            ..self.clone()
        } == Self {
            seconds: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub master_seed: u64,
    pub version: String,
    pub alpha: f64,
    pub ha_sq: f64,
    pub base_config: NetworkConfig,
    pub rows: Vec<SweepRow>,
}

fn finish_row(value: AxisValue, trace: &TrainingTrace, reference: &ReferenceSolution) -> SweepRow {
    let last = trace.final_loss().copied();
    let l2 = if trace.diverged() {
        None
    } else {
        trace
            .network
            .evaluate(&reference_grid())
            .and_then(|t| l2_error(&t, reference))
            .ok()
            .filter(|e| e.is_finite())
    };
    SweepRow {
        axis_value: value.to_string(),
        final_total_loss: last.map(|l| l.total),
        diff_cost: last.map(|l| l.differential_cost),
        bc_neumann: last.map(|l| l.boundary_neumann),
        bc_dirichlet: last.map(|l| l.boundary_dirichlet),
        diverged: l2.is_none(),
        l2_error: l2,
        seconds: trace.duration.as_secs_f64(),
    }
}

/// Trains one network per axis value and returns the report together with
/// each cell's loss curve.
///
/// Cells run concurrently under [`Execution::Parallel`]; each cell trains
/// sequentially with its own RNG. Divergent cells are flagged in the row.
pub fn run_sweep_traced(
    spec: &SweepSpec,
    exec: Execution,
) -> Result<(SweepReport, Vec<Vec<LossRecord>>)> {
    spec.validate()?;
    let reference = ReferenceSolution::tabulated();
    let cells = exec.map_slice(
        &spec.values,
        |&value| -> Result<(SweepRow, Vec<LossRecord>)> {
            let mut cfg = spec.axis.apply(&spec.base_config, value)?;
            cfg.seed = cell_seed(spec.master_seed, spec.axis, value);
            let trace = train_with(&cfg, spec.model, Execution::Sequential)?;
            Ok((finish_row(value, &trace, &reference), trace.records))
        },
    );
    let mut rows = Vec::with_capacity(cells.len());
    let mut curves = Vec::with_capacity(cells.len());
    for cell in cells {
        let (row, curve) = cell?;
        rows.push(row);
        curves.push(curve);
    }
    let report = SweepReport {
        axis: spec.axis,
        master_seed: spec.master_seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        alpha: spec.model.alpha(),
        ha_sq: spec.model.ha_sq(),
        base_config: spec.base_config.clone(),
        rows,
    };
    Ok((report, curves))
}

pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepReport> {
    run_sweep_traced(spec, exec).map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{read_csv_rows, read_json, write_csv_rows, write_json};

    fn tiny(axis: SweepAxis, values: Vec<AxisValue>) -> SweepSpec {
        let base = NetworkConfig {
            n_points: 12,
            hidden_layers: 1,
            neurons_per_layer: 4,
            epochs: 150,
            ..NetworkConfig::default()
        };
        SweepSpec::new(axis, values, base, ModelParams::default(), 7).unwrap()
    }

    #[test]
    fn empty_values_rejected() {
        let r = SweepSpec::new(
            SweepAxis::Depth,
            vec![],
            NetworkConfig::default(),
            ModelParams::default(),
            0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn mismatched_value_rejected() {
        let r = SweepSpec::new(
            SweepAxis::Depth,
            vec![AxisValue::Rate(0.1)],
            NetworkConfig::default(),
            ModelParams::default(),
            0,
        );
        assert!(r.is_err());
        let r = SweepSpec::new(
            SweepAxis::DataPoints,
            vec![AxisValue::Count(1)],
            NetworkConfig::default(),
            ModelParams::default(),
            0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn study_tables() {
        assert_eq!(SweepAxis::DataPoints.study_values().len(), 6);
        assert_eq!(SweepAxis::Activation.study_values().len(), 8);
        assert_eq!(SweepAxis::Depth.study_values().len(), 4);
        assert_eq!(SweepAxis::Width.study_values().len(), 6);
        assert_eq!(SweepAxis::LearningRate.study_values().len(), 4);
        assert_eq!(SweepAxis::LearningRate.study_base_config().hidden_layers, 2);
        assert_eq!(SweepAxis::Width.study_base_config().hidden_layers, 1);
        for axis in SweepAxis::ALL {
            assert!(SweepSpec::study(axis, 0).validate().is_ok());
            assert_eq!(axis.name().parse::<SweepAxis>().unwrap(), axis);
        }
        assert_eq!(
            "learning-rate".parse::<SweepAxis>().unwrap(),
            SweepAxis::LearningRate
        );
    }

    #[test]
    fn axis_values_round_trip_through_text() {
        for axis in SweepAxis::ALL {
            for v in axis.study_values() {
                assert_eq!(axis.parse_value(&v.to_string()).unwrap(), v);
            }
        }
    }

    #[test]
    fn seeds_depend_on_value_not_position() {
        let a = cell_seed(1, SweepAxis::Width, AxisValue::Count(8));
        assert_eq!(a, cell_seed(1, SweepAxis::Width, AxisValue::Count(8)));
        assert_ne!(a, cell_seed(2, SweepAxis::Width, AxisValue::Count(8)));
        assert_ne!(a, cell_seed(1, SweepAxis::Depth, AxisValue::Count(8)));
        assert_ne!(a, cell_seed(1, SweepAxis::Width, AxisValue::Count(16)));
    }

    #[test]
    fn cells_are_isolated_from_order_and_mode() {
        let vals = vec![
            AxisValue::Count(3),
            AxisValue::Count(5),
            AxisValue::Count(4),
        ];
        let a = run_sweep(&tiny(SweepAxis::Width, vals.clone()), Execution::Parallel).unwrap();
        let mut rev = vals;
        rev.reverse();
        let b = run_sweep(&tiny(SweepAxis::Width, rev), Execution::Sequential).unwrap();
        assert_eq!(a.rows.len(), 3);
        for (x, y) in a.rows.iter().zip(b.rows.iter().rev()) {
            assert!(x.same_result(y), "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn divergence_is_a_row_not_an_error() {
        let spec = tiny(
            SweepAxis::LearningRate,
            vec![AxisValue::Rate(1e9), AxisValue::Rate(0.01)],
        );
        let r = run_sweep(&spec, Execution::Sequential).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert_eq!(row.diverged, row.l2_error.is_none());
        }
        assert!(!r.rows[1].diverged);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let spec = tiny(
            SweepAxis::Activation,
            vec![AxisValue::Activation(ActivationKind::Tanh)],
        );
        let mut report = run_sweep(&spec, Execution::Sequential).unwrap();
        report.rows.push(SweepRow {
            axis_value: "linear".into(),
            final_total_loss: None,
            diff_cost: None,
            bc_neumann: None,
            bc_dirichlet: None,
            l2_error: None,
            diverged: true,
            seconds: 0.5,
        });
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("s.csv");
        write_csv_rows(&report.rows, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(text.starts_with(
            "axis_value,final_total_loss,diff_cost,bc_neumann,bc_dirichlet,l2_error,diverged,seconds\n"
        ));
        assert!(text.contains("linear,,,,,,true,0.5"), "{text}");
        assert!(!text.to_ascii_lowercase().contains("nan"));
        let rows: Vec<SweepRow> = read_csv_rows(&csv_path).unwrap();
        assert_eq!(rows, report.rows);

        let json_path = dir.path().join("s.json");
        write_json(&report, &json_path).unwrap();
        let text = std::fs::read_to_string(&json_path).unwrap();
        assert!(text.contains("\"l2_error\": null"));
        let back: SweepReport = read_json(&json_path).unwrap();
        assert_eq!(back, report);
    }
}
