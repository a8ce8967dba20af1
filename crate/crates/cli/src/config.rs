//! Scenario configuration: a single JSON document describing what to run,
//! with validation that names the offending field, and a canonical snapshot
//! form used for hashing and reproduction.

use std::f64::consts::FRAC_PI_2;

use macroqubit_core::dynamics::PropagationPlan;
use macroqubit_core::gates::RotationTarget;
use macroqubit_core::measurement::SensitivityFunction;
use macroqubit_core::model::{
    BECPreset, ChannelSet, CooperPairBoxPreset, RydbergPreset, SpinModelRealization,
    StaticModelParams,
};
use macroqubit_core::spin::{coherent_state, QuantumState, Spin, SpinOperators, SubspaceWindow};
use macroqubit_core::tomography::NormalizationStrategy;
use serde::{Deserialize, Serialize};

/// Default shot count when sampling is requested without an explicit count.
pub const DEFAULT_SHOTS: u64 = 4096;
/// Default ensemble size for the dephasing demo.
pub const DEFAULT_ENSEMBLE: usize = 10_000;
/// Only schema this tool reads.
pub const SCHEMA_VERSION: u32 = 1;

/// Config problems, each naming the offending field and constraint.
#[derive(Debug, thiserror::Error)]
#[error("invalid config: {}", problems.join("; "))]
pub struct ConfigError {
    /// One entry per violated constraint, `field: constraint` form.
    pub problems: Vec<String>,
}

impl ConfigError {
    fn one(problem: impl Into<String>) -> Self {
        Self {
            problems: vec![problem.into()],
        }
    }
}

/// Which scenario a config runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioTag {
    /// Evolve, measure along three axes, reconstruct, check bounds.
    TomographyRun,
    /// Synthesize a control pulse for a rotation target and validate it.
    GateCalibration,
    /// Classical ensemble dephasing with a precession-plus-damping fit.
    DephasingDemo,
    /// Charge-ladder vs spin form vs two-mode condensate comparison.
    PresetComparison,
    /// The canonical end-to-end run: restricted tomography on a large spin,
    /// qubit fit, fluctuation contrast, verdict.
    DelusionDemo,
    /// Cartesian-product sweep of another scenario config.
    Sweep,
}

impl ScenarioTag {
    /// Stable kebab-case name (used in output paths and seed derivation).
    pub fn name(&self) -> &'static str {
        match self {
            Self::TomographyRun => "tomography-run",
            Self::GateCalibration => "gate-calibration",
            Self::DephasingDemo => "dephasing-demo",
            Self::PresetComparison => "preset-comparison",
            Self::DelusionDemo => "delusion-demo",
            Self::Sweep => "sweep",
        }
    }
}

/// Physical model selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PresetBlock {
    /// Highly excited level ladder: `Δ = 2R/ν0³`, `Ω = -3Δ/ν0`,
    /// `j = n0 + 1/2`, drive channels `{1, 2}`.
    Rydberg {
        /// Binding-energy constant.
        rydberg_constant: f64,
        /// Reference principal quantum number.
        n0: u32,
        /// Quantum defect (default 0).
        #[serde(default)]
        quantum_defect: f64,
    },
    /// Directly specified static model `Ω J3² + Δ J3 + Γ J1`.
    Custom {
        /// Twice the spin magnitude (dimension is `spin_two_j + 1`).
        spin_two_j: u32,
        /// Quadratic coefficient.
        omega: f64,
        /// Linear coefficient.
        delta: f64,
        /// Transverse coefficient (default 0).
        #[serde(default)]
        gamma: f64,
        /// Drive channels available to pulses (default all three).
        #[serde(default = "all_channels")]
        channels: Vec<u8>,
    },
}

fn all_channels() -> Vec<u8> {
    vec![1, 2, 3]
}

impl PresetBlock {
    /// Reduce to the common static spin form.
    pub fn realize(&self) -> Result<SpinModelRealization, ConfigError> {
        match self {
            Self::Rydberg {
                rydberg_constant,
                n0,
                quantum_defect,
            } => {
                let preset = RydbergPreset {
                    rydberg_constant: *rydberg_constant,
                    n0: *n0,
                    quantum_defect: *quantum_defect,
                };
                macroqubit_core::model::rydberg_realization(&preset)
                    .map(|r| r.model)
                    .map_err(|e| ConfigError::one(format!("preset: {e}")))
            }
            Self::Custom {
                spin_two_j,
                omega,
                delta,
                gamma,
                channels,
            } => {
                let spin = Spin::from_two_j(*spin_two_j)
                    .map_err(|e| ConfigError::one(format!("preset.spin_two_j: {e}")))?;
                let params = StaticModelParams {
                    omega: *omega,
                    delta: *delta,
                    gamma: *gamma,
                };
                params
                    .validate()
                    .map_err(|e| ConfigError::one(format!("preset: {e}")))?;
                let allowed_channels = ChannelSet::from_channels(channels)
                    .map_err(|e| ConfigError::one(format!("preset.channels: {e}")))?;
                Ok(SpinModelRealization {
                    params,
                    allowed_channels,
                    spin,
                })
            }
        }
    }

    fn validate(&self) -> Vec<String> {
        match self.realize() {
            Ok(_) => Vec::new(),
            Err(e) => e.problems,
        }
    }
}

/// Initial quantum state of the tomography scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialStateBlock {
    /// Spin-coherent state along `(θ, φ)`.
    Coherent {
        /// Polar angle from `+e3`.
        theta: f64,
        /// Azimuth from `+e1`.
        phi: f64,
    },
    /// Even superposition of the two extreme levels.
    Cat,
    /// Single level `|j, m⟩` selected by `2m`.
    Basis {
        /// Twice the magnetic quantum number.
        two_m: i64,
    },
}

impl Default for InitialStateBlock {
    fn default() -> Self {
        Self::Coherent {
            theta: FRAC_PI_2,
            phi: 0.0,
        }
    }
}

impl InitialStateBlock {
    fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if let Self::Coherent { theta, phi } = self {
            if !theta.is_finite() {
                problems.push(format!("initial.theta: must be finite (got {theta})"));
            }
            if !phi.is_finite() {
                problems.push(format!("initial.phi: must be finite (got {phi})"));
            }
        }
        problems
    }

    /// Build the state for a concrete spin.
    pub fn build(&self, ops: &SpinOperators) -> Result<QuantumState, ConfigError> {
        let spin = ops.spin();
        match self {
            Self::Coherent { theta, phi } => coherent_state(ops, *theta, *phi)
                .map_err(|e| ConfigError::one(format!("initial: {e}"))),
            Self::Cat => Ok(QuantumState::cat(spin)),
            Self::Basis { two_m } => QuantumState::basis(spin, *two_m)
                .map_err(|e| ConfigError::one(format!("initial.two_m: {e}"))),
        }
    }
}

/// Sampling grid for time evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanBlock {
    /// Start time (default 0).
    #[serde(default)]
    pub t_start: f64,
    /// End time (must exceed the start).
    pub t_end: f64,
    /// Number of sample times, endpoints included (≥ 2).
    pub samples: usize,
    /// Integrator step ceiling (default: span / 512).
    #[serde(default)]
    pub max_step: Option<f64>,
}

impl PlanBlock {
    fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !(self.t_end.is_finite() && self.t_start.is_finite() && self.t_end > self.t_start) {
            problems.push(format!(
                "plan.t_end: must be finite and exceed t_start (got {} vs {})",
                self.t_end, self.t_start
            ));
        }
        if self.samples < 2 {
            problems.push(format!(
                "plan.samples: need at least 2 sample times (got {})",
                self.samples
            ));
        }
        if let Some(step) = self.max_step {
            if !(step.is_finite() && step > 0.0) {
                problems.push(format!("plan.max_step: must be positive (got {step})"));
            }
        }
        problems
    }

    /// The evenly spaced sample times.
    pub fn times(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n)
            .map(|i| {
                self.t_start + (self.t_end - self.t_start) * i as f64 / (n - 1) as f64
            })
            .collect()
    }

    /// Step ceiling for classical integration.
    pub fn step_ceiling(&self) -> f64 {
        self.max_step
            .unwrap_or((self.t_end - self.t_start) / 512.0)
    }

    /// Propagation plan over the full span.
    pub fn core_plan(&self) -> Result<PropagationPlan, ConfigError> {
        PropagationPlan::new(self.t_start, self.t_end, self.step_ceiling())
            .map_err(|e| ConfigError::one(format!("plan: {e}")))
    }
}

/// Readout configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementBlock {
    /// Threshold response; default is the width-`√j` smooth ramp.
    #[serde(default)]
    pub sensitivity: Option<SensitivityFunction>,
    /// Shots per observable per sample time (default 4096 when sampling).
    #[serde(default)]
    pub shots: Option<i64>,
    /// Replace shot sampling with exact outcome probabilities.
    #[serde(default)]
    pub exact_probabilities: bool,
    /// Detection window as `2·δm` (default `2·ceil(2√j)`).
    #[serde(default)]
    pub window_two_delta_m: Option<u32>,
    /// How estimates are pushed into the unit ball (default radial clip).
    #[serde(default)]
    pub normalization: Option<NormalizationStrategy>,
}

impl MeasurementBlock {
    fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if let Some(shots) = self.shots {
            if shots < 1 {
                problems.push(format!(
                    "measurement.shots: must be at least 1 (got {shots})"
                ));
            }
        }
        if let Some(f) = &self.sensitivity {
            if let Err(e) = f.validate() {
                problems.push(format!("measurement.sensitivity: {e}"));
            }
        }
        if let Some(strategy) = &self.normalization {
            if let Err(e) = strategy.validate() {
                problems.push(format!("measurement.normalization: {e}"));
            }
        }
        problems
    }
}

/// Rotation target for gate synthesis: a named standard target or explicit
/// axis images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    /// `"u1"`, `"u2"`, `"identity"`, `"analysis-1"`, `"analysis-2"`,
    /// `"analysis-3"`.
    Named(String),
    /// Explicit orthonormal images with an anchor axis.
    Explicit(RotationTarget),
}

impl TargetSpec {
    /// Resolve to a concrete rotation target.
    pub fn resolve(&self) -> Result<RotationTarget, ConfigError> {
        match self {
            Self::Explicit(t) => Ok(t.clone()),
            Self::Named(name) => match name.as_str() {
                "u1" => Ok(RotationTarget::u1()),
                "u2" => Ok(RotationTarget::u2()),
                "identity" => Ok(RotationTarget::identity()),
                "analysis-1" => RotationTarget::analysis(1)
                    .map_err(|e| ConfigError::one(format!("pulse.target: {e}"))),
                "analysis-2" => RotationTarget::analysis(2)
                    .map_err(|e| ConfigError::one(format!("pulse.target: {e}"))),
                "analysis-3" => RotationTarget::analysis(3)
                    .map_err(|e| ConfigError::one(format!("pulse.target: {e}"))),
                other => Err(ConfigError::one(format!(
                    "pulse.target: unknown named target '{other}' \
                     (expected u1, u2, identity, or analysis-1/2/3)"
                ))),
            },
        }
    }
}

/// Gate-synthesis configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseBlock {
    /// What rotation the pulse should implement.
    pub target: TargetSpec,
    /// Piecewise-constant segment count (default 3; 1 = single segment).
    #[serde(default)]
    pub segments: Option<usize>,
    /// Amplitude ceiling per channel (default: the seed amplitude).
    #[serde(default)]
    pub h_max: Option<f64>,
    /// Classical squared-error tolerance for synthesis (default 1e-8).
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Seed amplitudes in the drift-dominating strong-pulse regime.
    #[serde(default)]
    pub strong_pulse: bool,
}

impl PulseBlock {
    fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if let Err(e) = self.target.resolve() {
            problems.extend(e.problems);
        }
        if let Some(segments) = self.segments {
            if segments < 1 {
                problems.push(format!(
                    "pulse.segments: need at least 1 segment (got {segments})"
                ));
            }
        }
        if let Some(h) = self.h_max {
            if !(h.is_finite() && h > 0.0) {
                problems.push(format!("pulse.h_max: must be positive (got {h})"));
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                problems.push(format!("pulse.tolerance: must be positive (got {tol})"));
            }
        }
        problems
    }
}

/// Ensemble size for the dephasing demo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleBlock {
    /// Number of classical members averaged.
    pub n_samples: usize,
}

impl EnsembleBlock {
    fn validate(&self) -> Vec<String> {
        if self.n_samples < 2 {
            vec![format!(
                "ensemble.n_samples: need at least 2 members (got {})",
                self.n_samples
            )]
        } else {
            Vec::new()
        }
    }
}

/// Parameters of the three-way model comparison (charge ladder, spin form,
/// two-mode condensate).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonBlock {
    /// Charging energy (> 0).
    pub charging_energy: f64,
    /// Tunneling energy (≥ 0).
    pub josephson_energy: f64,
    /// Reference pair number; the spin form has `j = n0 + 1/2`.
    pub n0: u32,
    /// Charge-window half-width (default from the preset).
    #[serde(default)]
    pub charge_window: Option<u32>,
    /// Largest atom number for the two-mode operator check (default 12).
    #[serde(default)]
    pub schwinger_max_atoms: Option<u32>,
}

impl ComparisonBlock {
    fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !(self.charging_energy.is_finite() && self.charging_energy > 0.0) {
            problems.push(format!(
                "comparison.charging_energy: must be positive (got {})",
                self.charging_energy
            ));
        }
        if !(self.josephson_energy.is_finite() && self.josephson_energy >= 0.0) {
            problems.push(format!(
                "comparison.josephson_energy: must be non-negative (got {})",
                self.josephson_energy
            ));
        }
        if self.n0 < 1 {
            problems.push(format!(
                "comparison.n0: must be at least 1 (got {})",
                self.n0
            ));
        }
        if let Some(n) = self.schwinger_max_atoms {
            if n < 1 || n > 400 {
                problems.push(format!(
                    "comparison.schwinger_max_atoms: must be in 1..=400 (got {n})"
                ));
            }
        }
        problems
    }

    /// The charge-ladder preset this block describes.
    pub fn cpb_preset(&self) -> CooperPairBoxPreset {
        CooperPairBoxPreset {
            charging_energy: self.charging_energy,
            josephson_energy: self.josephson_energy,
            n0: self.n0,
        }
    }

    /// The condensate preset matched to the same `(E_C, E_J, j)`: atom
    /// number `2·n0 + 1` gives the same `j = n0 + 1/2`, and the tunneling
    /// scale maps so both reduce to `E_C J3² - (E_J/j) J1`.
    pub fn matched_bec_preset(&self) -> BECPreset {
        BECPreset {
            atom_number: 2 * self.n0 + 1,
            charging_scale: self.charging_energy,
            tunneling_scale: self.josephson_energy,
        }
    }
}

/// One sweep axis: a JSON-pointer into the base config plus the values to
/// substitute there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// JSON pointer (RFC 6901), e.g. `/preset/omega`.
    pub pointer: String,
    /// Finite list of numeric values.
    pub values: Vec<f64>,
}

/// Sweep description: a base scenario config plus axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// The scenario config each cell starts from (JSON form; the cell's
    /// seed and axis fields are substituted before validation).
    pub base: serde_json::Value,
    /// Axes of the Cartesian product.
    pub axes: Vec<SweepAxis>,
    /// Parallel workers (default 1; the `--workers` flag overrides).
    #[serde(default)]
    pub workers: Option<usize>,
}

impl SweepBlock {
    fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !self.base.is_object() {
            problems.push("sweep.base: must be a scenario config object".to_string());
        }
        if self.axes.is_empty() {
            problems.push("sweep.axes: need at least one axis".to_string());
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if !axis.pointer.starts_with('/') {
                problems.push(format!(
                    "sweep.axes[{i}].pointer: must be a JSON pointer starting with '/' \
                     (got '{}')",
                    axis.pointer
                ));
            }
            if axis.values.is_empty() {
                problems.push(format!("sweep.axes[{i}].values: must be non-empty"));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                problems.push(format!("sweep.axes[{i}].values: must be finite"));
            }
        }
        if let Some(workers) = self.workers {
            if workers < 1 {
                problems.push(format!(
                    "sweep.workers: need at least 1 worker (got {workers})"
                ));
            }
        }
        problems
    }

    /// Number of cells in the Cartesian product.
    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis values of cell `index` (row-major over the axes).
    pub fn cell_values(&self, index: usize) -> Vec<f64> {
        let mut remaining = index;
        let mut values = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let len = axis.values.len();
            values[k] = axis.values[remaining % len];
            remaining /= len;
        }
        values
    }
}

/// The whole scenario configuration document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Must equal [`SCHEMA_VERSION`].
    pub schema_version: u32,
    /// Which scenario to run.
    pub scenario: ScenarioTag,
    /// Master seed for all randomness in the run.
    pub seed: u64,
    /// Physical model (most scenarios).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetBlock>,
    /// Initial quantum state (tomography scenarios; default equatorial
    /// coherent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialStateBlock>,
    /// Time grid (evolution scenarios).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanBlock>,
    /// Readout configuration (tomography scenarios).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementBlock>,
    /// Gate-synthesis configuration (gate calibration).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseBlock>,
    /// Ensemble size (dephasing demo).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleBlock>,
    /// Model-comparison parameters (preset comparison).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonBlock>,
    /// Sweep description (sweep scenario).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    /// Output directory; relative paths resolve under the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ScenarioConfig {
    /// Parse a JSON document (no validation beyond the schema shape).
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::one(format!("parse: {e}")))
    }

    /// Check every block and cross-block requirement; the error lists all
    /// violations as `field: constraint`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            problems.push(format!(
                "schema_version: this tool reads version {SCHEMA_VERSION} \
                 (got {})",
                self.schema_version
            ));
        }
        let mut require = |present: bool, block: &str| {
            if !present {
                problems.push(format!(
                    "{block}: required by scenario '{}'",
                    self.scenario.name()
                ));
            }
        };
        match self.scenario {
            ScenarioTag::TomographyRun | ScenarioTag::DelusionDemo => {
                require(self.preset.is_some(), "preset");
                require(self.plan.is_some(), "plan");
            }
            ScenarioTag::GateCalibration => {
                require(self.preset.is_some(), "preset");
                require(self.pulse.is_some(), "pulse");
            }
            ScenarioTag::DephasingDemo => {
                require(self.preset.is_some(), "preset");
                require(self.plan.is_some(), "plan");
            }
            ScenarioTag::PresetComparison => {
                require(self.comparison.is_some(), "comparison");
            }
            ScenarioTag::Sweep => {
                require(self.sweep.is_some(), "sweep");
            }
        }
        if let Some(preset) = &self.preset {
            problems.extend(preset.validate());
        }
        if let Some(initial) = &self.initial {
            problems.extend(initial.validate());
        }
        if let Some(plan) = &self.plan {
            problems.extend(plan.validate());
        }
        if let Some(measurement) = &self.measurement {
            problems.extend(measurement.validate());
        }
        if let Some(pulse) = &self.pulse {
            problems.extend(pulse.validate());
        }
        if let Some(ensemble) = &self.ensemble {
            problems.extend(ensemble.validate());
        }
        if let Some(comparison) = &self.comparison {
            problems.extend(comparison.validate());
        }
        if let Some(sweep) = &self.sweep {
            problems.extend(sweep.validate());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { problems })
        }
    }

    /// Effective readout block (all-defaults when absent).
    pub fn measurement_or_default(&self) -> MeasurementBlock {
        self.measurement.clone().unwrap_or_default()
    }

    /// Effective threshold response for a concrete spin.
    pub fn sensitivity_for(&self, spin: Spin) -> SensitivityFunction {
        self.measurement_or_default()
            .sensitivity
            .unwrap_or_else(|| SensitivityFunction::default_for(spin))
    }

    /// Effective detection window for a concrete spin.
    pub fn window_for(&self, spin: Spin) -> SubspaceWindow {
        match self.measurement_or_default().window_two_delta_m {
            Some(two_delta_m) => SubspaceWindow::from_two_delta_m(two_delta_m),
            None => SubspaceWindow::default_for(spin),
        }
    }

    /// Effective shot count.
    pub fn shots(&self) -> u64 {
        match self.measurement_or_default().shots {
            Some(n) if n >= 1 => n as u64,
            _ => DEFAULT_SHOTS,
        }
    }

    /// Whether to use exact outcome probabilities instead of sampling.
    pub fn exact_probabilities(&self) -> bool {
        self.measurement_or_default().exact_probabilities
    }

    /// Effective normalization strategy.
    pub fn normalization(&self) -> NormalizationStrategy {
        self.measurement_or_default()
            .normalization
            .unwrap_or(NormalizationStrategy::RadialClip)
    }

    /// Effective initial state block.
    pub fn initial_or_default(&self) -> InitialStateBlock {
        self.initial.unwrap_or_default()
    }

    /// Effective ensemble size.
    pub fn ensemble_size(&self) -> usize {
        self.ensemble.map_or(DEFAULT_ENSEMBLE, |e| e.n_samples)
    }

    /// Canonical snapshot: the config as it ran, with the destination
    /// stripped (where outputs land does not affect what they contain).
    pub fn canonical_snapshot(&self) -> Self {
        let mut snapshot = self.clone();
        snapshot.output_dir = None;
        snapshot
    }

    /// Canonical JSON bytes of the snapshot (stable field order).
    pub fn canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.canonical_snapshot())
            .expect("config serializes");
        text.push('\n');
        text
    }
}
