//! Scenario execution: compose the core modules per the config, write the
//! output files, and return the run record plus summary metrics.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use macroqubit_core::dynamics::{
    classical_trajectory, dephasing_ensemble, quantum_mean_spin_trajectory, ClassicalState,
    StaticPropagator, StokesVector,
};
use macroqubit_core::gates::{
    strong_pulse_amplitude, synthesize_gate, validate_gate_quantum, PulseAnsatz,
};
use macroqubit_core::measurement::{
    estimate_stokes, exact_analysis_gates, exact_stokes, observables_from_gates, sample_shots,
    SensitivityFunction, UnsharpObservable,
};
use macroqubit_core::model::{
    bec_realization, cpb_spin_realization, default_charge_window, schwinger_map,
    compare_charge_vs_spin, ChargeSpinComparison, ControlPulse, SpinModelRealization,
};
use macroqubit_core::spin::{
    fluctuation_report, FluctuationReport, QuantumState, SpinOperators, SubspaceWindow,
};
use macroqubit_core::tomography::{
    bloch_model_fit, delusion_report, normalize_stokes, reconstruct_qubit,
    window_discarded_weight, windowed_linearized_stokes, BlochFit, DelusionInputs,
    DelusionVerdict, UNIVERSAL_STOKES_BOUND,
};
use macroqubit_core::linalg;

use crate::config::{ConfigError, InitialStateBlock, ScenarioConfig, ScenarioTag};
use crate::output::{derive_seed, OutputDir, RunRecord, RunWriter};

/// Failure modes of a run, mapped to exit codes by the binary.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// The config does not validate (exit 2).
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// The run itself failed (exit 3).
    #[error("runtime failure in scenario '{scenario}': {message}")]
    Runtime {
        /// Scenario that failed.
        scenario: String,
        /// What went wrong.
        message: String,
    },
}

impl RunError {
    fn runtime(scenario: ScenarioTag, message: impl std::fmt::Display) -> Self {
        Self::Runtime {
            scenario: scenario.name().to_string(),
            message: message.to_string(),
        }
    }
}

/// Key metrics of a finished run, one row of a sweep summary.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    /// Largest raw `|s|²` over the Stokes series.
    pub max_raw_radius_squared: Option<f64>,
    /// Normalized RMS residual of the qubit-model fit.
    pub bloch_residual_rms: Option<f64>,
    /// Fitted phase-damping rate `1/T2`.
    pub transverse_rate: Option<f64>,
    /// Fitted energy-damping rate `1/T1`.
    pub longitudinal_rate: Option<f64>,
    /// Ensemble 1/e dephasing time.
    pub fitted_decay_time: Option<f64>,
    /// Classical squared rotation error of a synthesized gate.
    pub classical_error: Option<f64>,
    /// Quantum direction fidelity of a synthesized gate.
    pub direction_fidelity: Option<f64>,
    /// Max quantum-vs-classical mean-spin deviation.
    pub classical_deviation: Option<f64>,
    /// Largest model-equivalence entry deviation.
    pub model_max_diff: Option<f64>,
    /// Delusion verdict, when the scenario produces one.
    pub verdict: Option<String>,
}

/// Column order of sweep summary metrics (matches [`ScenarioMetrics::row`]).
pub const METRIC_COLUMNS: [&str; 10] = [
    "max_raw_radius_squared",
    "bloch_residual_rms",
    "transverse_rate",
    "longitudinal_rate",
    "fitted_decay_time",
    "classical_error",
    "direction_fidelity",
    "classical_deviation",
    "model_max_diff",
    "verdict",
];

impl ScenarioMetrics {
    /// Render as CSV cells in [`METRIC_COLUMNS`] order (empty when absent).
    pub fn row(&self) -> Vec<String> {
        let f = |v: &Option<f64>| v.map(crate::output::fmt_f64).unwrap_or_default();
        vec![
            f(&self.max_raw_radius_squared),
            f(&self.bloch_residual_rms),
            f(&self.transverse_rate),
            f(&self.longitudinal_rate),
            f(&self.fitted_decay_time),
            f(&self.classical_error),
            f(&self.direction_fidelity),
            f(&self.classical_deviation),
            f(&self.model_max_diff),
            self.verdict.clone().unwrap_or_default(),
        ]
    }
}

/// One measurement event in the JSON-lines output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasurementLine {
    /// Sample time.
    pub time: f64,
    /// Observable label (1, 2, 3).
    pub label: u8,
    /// Shots drawn.
    pub shots: u64,
    /// `+1` outcomes.
    pub count_plus: u64,
    /// `-1` outcomes.
    pub count_minus: u64,
    /// Derived seed of this draw.
    pub seed: u64,
}

/// Run a validated config in `out`, writing all files there.
///
/// Sweep configs are rejected here — the sweep coordinator owns them.
pub fn run_scenario(
    config: &ScenarioConfig,
    out: OutputDir,
) -> Result<(RunRecord, ScenarioMetrics), RunError> {
    config.validate()?;
    if config.scenario == ScenarioTag::Sweep {
        return Err(ConfigError {
            problems: vec![
                "scenario: sweep configs run through the sweep coordinator".to_string(),
            ],
        }
        .into());
    }
    let mut writer =
        RunWriter::begin(out, config).map_err(|e| RunError::runtime(config.scenario, e))?;
    let metrics = match config.scenario {
        ScenarioTag::TomographyRun => run_tomography(config, &mut writer),
        ScenarioTag::DelusionDemo => run_delusion(config, &mut writer),
        ScenarioTag::GateCalibration => run_gate_calibration(config, &mut writer),
        ScenarioTag::DephasingDemo => run_dephasing(config, &mut writer),
        ScenarioTag::PresetComparison => run_preset_comparison(config, &mut writer),
        ScenarioTag::Sweep => unreachable!("rejected above"),
    }?;
    let record = writer
        .finish()
        .map_err(|e| RunError::runtime(config.scenario, e))?;
    Ok((record, metrics))
}

/// Everything the tomography-style scenarios share.
struct TomographySetup {
    realization: SpinModelRealization,
    ops: SpinOperators,
    f: SensitivityFunction,
    window: SubspaceWindow,
    gates: [macroqubit_core::CMatrix; 3],
    observables: [UnsharpObservable; 3],
    initial: QuantumState,
    fluctuations: FluctuationReport,
    times: Vec<f64>,
}

fn tomography_setup(config: &ScenarioConfig) -> Result<TomographySetup, RunError> {
    let scenario = config.scenario;
    let realization = config
        .preset
        .as_ref()
        .expect("validated")
        .realize()
        .map_err(RunError::Config)?;
    let spin = realization.spin;
    let ops = SpinOperators::build(spin);
    let f = config.sensitivity_for(spin);
    let window = config.window_for(spin);
    let gates = exact_analysis_gates(&ops);
    let observables = observables_from_gates(&f, &ops, &gates)
        .map_err(|e| RunError::runtime(scenario, e))?;
    let initial = config.initial_or_default().build(&ops)?;
    let fluctuations =
        fluctuation_report(&ops, &initial).map_err(|e| RunError::runtime(scenario, e))?;
    let times = config.plan.as_ref().expect("validated").times();
    Ok(TomographySetup {
        realization,
        ops,
        f,
        window,
        gates,
        observables,
        initial,
        fluctuations,
        times,
    })
}

/// Evolve and measure: raw Stokes per sample time, plus the shot records
/// (empty in exact mode).
fn measure_series(
    config: &ScenarioConfig,
    setup: &TomographySetup,
) -> Result<(Vec<QuantumState>, Vec<StokesVector>, Vec<MeasurementLine>), RunError> {
    let scenario = config.scenario;
    let h = setup
        .realization
        .matrix(&setup.ops)
        .map_err(|e| RunError::runtime(scenario, e))?;
    let propagator = StaticPropagator::new(&h).map_err(|e| RunError::runtime(scenario, e))?;
    let exact = config.exact_probabilities();
    let shots = config.shots();
    let mut states = Vec::with_capacity(setup.times.len());
    let mut raw_series = Vec::with_capacity(setup.times.len());
    let mut lines = Vec::new();
    for (index, &t) in setup.times.iter().enumerate() {
        let state = propagator
            .evolve(&setup.initial, t)
            .map_err(|e| RunError::runtime(scenario, e))?;
        if exact {
            let s = exact_stokes(&state, &setup.observables)
                .map_err(|e| RunError::runtime(scenario, e))?;
            raw_series.push(s);
        } else {
            let mut records = Vec::with_capacity(3);
            for (k, obs) in setup.observables.iter().enumerate() {
                let seed = derive_seed(
                    config.seed,
                    "measurement",
                    (index * 3 + k) as u64,
                );
                let record = sample_shots(&state, obs, shots, seed)
                    .map_err(|e| RunError::runtime(scenario, e))?;
                lines.push(MeasurementLine {
                    time: t,
                    label: record.label,
                    shots: record.shots,
                    count_plus: record.count_plus,
                    count_minus: record.count_minus,
                    seed: record.seed,
                });
                records.push(record);
            }
            let s = estimate_stokes(&records).map_err(|e| RunError::runtime(scenario, e))?;
            raw_series.push(s);
        }
        states.push(state);
    }
    Ok((states, raw_series, lines))
}

fn stokes_csv(
    writer: &mut RunWriter,
    times: &[f64],
    raw: &[StokesVector],
    normalized: &[StokesVector],
    windowed: &[Vector3<f64>],
) -> std::io::Result<()> {
    writer.csv(
        "stokes_series.csv",
        &[
            "time",
            "raw_s1",
            "raw_s2",
            "raw_s3",
            "normalized_s1",
            "normalized_s2",
            "normalized_s3",
            "windowed_s1",
            "windowed_s2",
            "windowed_s3",
        ],
        times.iter().enumerate().map(|(i, &t)| {
            vec![
                t,
                raw[i].s[0],
                raw[i].s[1],
                raw[i].s[2],
                normalized[i].s[0],
                normalized[i].s[1],
                normalized[i].s[2],
                windowed[i][0],
                windowed[i][1],
                windowed[i][2],
            ]
        }),
    )
}

/// Nominal precession axis of the static model, for seeding the fit: the
/// drift field at the initial direction.
fn nominal_axis(
    realization: &SpinModelRealization,
    initial: &InitialStateBlock,
) -> Option<Vector3<f64>> {
    let params = realization.params;
    let n3 = match initial {
        InitialStateBlock::Coherent { theta, .. } => theta.cos(),
        _ => 0.0,
    };
    let j = realization.spin.j();
    let drift = Vector3::new(
        params.gamma,
        0.0,
        params.delta + (2.0 * j - 1.0) * params.omega * n3,
    );
    (drift.norm() > 1e-12).then(|| drift.normalize())
}

/// Report written by the tomography-run scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TomographyRunReport {
    /// Twice the spin magnitude.
    pub spin_two_j: u32,
    /// Fluctuation triple of the prepared state.
    pub fluctuations: FluctuationReport,
    /// Detection window half-width `δm`.
    pub window_delta_m: f64,
    /// Prepared-state weight outside the window.
    pub window_discarded_weight: f64,
    /// Largest raw `|s|²` over the series.
    pub max_raw_radius_squared: f64,
    /// The universal bound 3.
    pub universal_bound: f64,
    /// Whether every raw sample satisfied the universal bound.
    pub universal_pass_all: bool,
    /// Small-signal bound `3 F'(0)² δm²` (absent for the hard sign).
    pub linearized_bound: Option<f64>,
    /// Largest windowed-linearized `|s|²` over the series.
    pub max_windowed_radius_squared: f64,
    /// Whether every windowed sample satisfied the small-signal bound.
    pub linearized_pass_all: Option<bool>,
    /// Bloch vector of the final reconstructed qubit.
    pub final_bloch: [f64; 3],
    /// Eigenvalues of the final reconstructed qubit.
    pub final_eigenvalues: [f64; 2],
    /// Max quantum-vs-classical scaled mean-spin deviation (coherent
    /// initial states only).
    pub classical_deviation: Option<f64>,
}

fn run_tomography(
    config: &ScenarioConfig,
    writer: &mut RunWriter,
) -> Result<ScenarioMetrics, RunError> {
    let scenario = config.scenario;
    let setup = tomography_setup(config)?;
    let (states, raw_series, lines) = measure_series(config, &setup)?;
    let strategy = config.normalization();
    let mut normalized = Vec::with_capacity(raw_series.len());
    let mut windowed = Vec::with_capacity(raw_series.len());
    let mut max_windowed_sq = 0.0_f64;
    for (i, raw) in raw_series.iter().enumerate() {
        normalized.push(
            normalize_stokes(raw, &strategy).map_err(|e| RunError::runtime(scenario, e))?,
        );
        let w = windowed_linearized_stokes(&states[i], &setup.gates, &setup.f, &setup.window)
            .map(|w| w.stokes.s)
            .unwrap_or_else(|_| Vector3::zeros());
        max_windowed_sq = max_windowed_sq.max(w.norm_squared());
        windowed.push(w);
    }
    stokes_csv(writer, &setup.times, &raw_series, &normalized, &windowed)
        .map_err(|e| RunError::runtime(scenario, e))?;
    if !lines.is_empty() {
        writer
            .jsonl("measurements.jsonl", &lines)
            .map_err(|e| RunError::runtime(scenario, e))?;
    }

    let max_raw_radius_squared = raw_series
        .iter()
        .map(|s| s.s.norm_squared())
        .fold(0.0, f64::max);
    let slope = setup.f.slope_at_zero().ok();
    let linearized_bound =
        slope.map(|fp| 3.0 * fp.powi(2) * setup.window.delta_m().powi(2));
    let final_qubit = reconstruct_qubit(normalized.last().expect("samples >= 2"), strategy)
        .map_err(|e| RunError::runtime(scenario, e))?;
    let (hi, lo) = final_qubit.eigenvalues();

    // Quantum-vs-classical deviation for coherent starts.
    let classical_deviation = match config.initial_or_default() {
        InitialStateBlock::Coherent { theta, phi } => {
            let plan = config.plan.as_ref().expect("validated").core_plan()?;
            let pulse = ControlPulse::empty(setup.realization.allowed_channels);
            let h = setup
                .realization
                .matrix(&setup.ops)
                .map_err(|e| RunError::runtime(scenario, e))?;
            let quantum = quantum_mean_spin_trajectory(
                &h,
                &pulse,
                &setup.ops,
                &setup.initial,
                &plan,
            )
            .map_err(|e| RunError::runtime(scenario, e))?;
            let n0 = ClassicalState::new(Vector3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ))
            .map_err(|e| RunError::runtime(scenario, e))?;
            let classical = classical_trajectory(
                &setup.realization.params,
                &pulse,
                setup.realization.spin.j(),
                &n0,
                &plan,
            )
            .map_err(|e| RunError::runtime(scenario, e))?;
            Some(
                quantum
                    .max_deviation(&classical)
                    .map_err(|e| RunError::runtime(scenario, e))?,
            )
        }
        _ => None,
    };

    let report = TomographyRunReport {
        spin_two_j: setup.realization.spin.two_j(),
        fluctuations: setup.fluctuations.clone(),
        window_delta_m: setup.window.delta_m(),
        window_discarded_weight: window_discarded_weight(&setup.initial, &setup.window),
        max_raw_radius_squared,
        universal_bound: UNIVERSAL_STOKES_BOUND,
        universal_pass_all: max_raw_radius_squared <= UNIVERSAL_STOKES_BOUND + 1e-12,
        linearized_bound,
        max_windowed_radius_squared: max_windowed_sq,
        linearized_pass_all: linearized_bound.map(|b| max_windowed_sq <= b + 1e-12),
        final_bloch: [
            final_qubit.source.s[0],
            final_qubit.source.s[1],
            final_qubit.source.s[2],
        ],
        final_eigenvalues: [hi, lo],
        classical_deviation,
    };
    writer
        .json("tomography_report.json", &report)
        .map_err(|e| RunError::runtime(scenario, e))?;

    Ok(ScenarioMetrics {
        max_raw_radius_squared: Some(max_raw_radius_squared),
        classical_deviation,
        ..Default::default()
    })
}

fn run_delusion(
    config: &ScenarioConfig,
    writer: &mut RunWriter,
) -> Result<ScenarioMetrics, RunError> {
    let scenario = config.scenario;
    let setup = tomography_setup(config)?;
    let (states, raw_series, lines) = measure_series(config, &setup)?;
    let strategy = config.normalization();
    let mut normalized = Vec::with_capacity(raw_series.len());
    let mut windowed = Vec::with_capacity(raw_series.len());
    for (i, raw) in raw_series.iter().enumerate() {
        normalized.push(
            normalize_stokes(raw, &strategy).map_err(|e| RunError::runtime(scenario, e))?,
        );
        let w = windowed_linearized_stokes(&states[i], &setup.gates, &setup.f, &setup.window)
            .map(|w| w.stokes.s)
            .unwrap_or_else(|_| Vector3::zeros());
        windowed.push(w);
    }
    stokes_csv(writer, &setup.times, &raw_series, &normalized, &windowed)
        .map_err(|e| RunError::runtime(scenario, e))?;
    if !lines.is_empty() {
        writer
            .jsonl("measurements.jsonl", &lines)
            .map_err(|e| RunError::runtime(scenario, e))?;
    }

    let discarded = window_discarded_weight(&setup.initial, &setup.window);
    let report = delusion_report(&DelusionInputs {
        spin: Some(setup.realization.spin),
        fluctuations: Some(&setup.fluctuations),
        times: Some(&setup.times),
        raw_series: Some(&raw_series),
        normalized_series: Some(&normalized),
        window: Some(setup.window),
        window_discarded_weight: Some(discarded),
        sensitivity: Some(&setup.f),
        axis_guess: nominal_axis(&setup.realization, &config.initial_or_default()),
    })
    .map_err(|e| RunError::runtime(scenario, e))?;
    writer
        .json("delusion_report.json", &report)
        .map_err(|e| RunError::runtime(scenario, e))?;

    Ok(ScenarioMetrics {
        max_raw_radius_squared: Some(report.raw_radius_squared),
        bloch_residual_rms: Some(report.fit.residual_rms),
        transverse_rate: Some(report.fit.transverse_rate),
        longitudinal_rate: Some(report.fit.longitudinal_rate),
        verdict: Some(verdict_name(report.verdict)),
        ..Default::default()
    })
}

/// Kebab-case verdict name matching the JSON reports.
pub fn verdict_name(verdict: DelusionVerdict) -> String {
    serde_json::to_value(verdict)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{verdict:?}"))
}

/// Report written by the gate-calibration scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateCalibrationReport {
    /// Twice the spin magnitude.
    pub spin_two_j: u32,
    /// Classical squared rotation error of the synthesized pulse.
    pub classical_error: f64,
    /// Whether synthesis met its tolerance.
    pub converged: bool,
    /// Objective evaluations spent.
    pub iterations: usize,
    /// Quantum direction fidelity `<J·target(e3)>/j`.
    pub direction_fidelity: f64,
    /// Fluctuations of the rotated coherent state.
    pub fluctuations: FluctuationReport,
}

fn run_gate_calibration(
    config: &ScenarioConfig,
    writer: &mut RunWriter,
) -> Result<ScenarioMetrics, RunError> {
    let scenario = config.scenario;
    let realization = config
        .preset
        .as_ref()
        .expect("validated")
        .realize()
        .map_err(RunError::Config)?;
    let pulse_block = config.pulse.as_ref().expect("validated");
    let target = pulse_block.target.resolve().map_err(RunError::Config)?;
    let spin = realization.spin;
    let j = spin.j();
    let params = realization.params;
    let seed_amplitude = if pulse_block.strong_pulse {
        strong_pulse_amplitude(&params, j)
    } else {
        1.0
    };
    let h_max = pulse_block.h_max.unwrap_or(seed_amplitude).max(seed_amplitude);
    let segments = pulse_block.segments.unwrap_or(3);
    let ansatz = if segments == 1 {
        PulseAnsatz::single_segment(realization.allowed_channels, h_max, seed_amplitude)
    } else {
        PulseAnsatz::piecewise(segments, realization.allowed_channels, h_max, seed_amplitude)
    };
    let tolerance = pulse_block.tolerance.unwrap_or(1e-8);
    let result = synthesize_gate(&target, &params, j, &ansatz, tolerance)
        .map_err(|e| RunError::runtime(scenario, e))?;
    let ops = SpinOperators::build(spin);
    let validation = validate_gate_quantum(&result.pulse, &params, &ops, &target)
        .map_err(|e| RunError::runtime(scenario, e))?;

    writer
        .json("synthesis.json", &result)
        .map_err(|e| RunError::runtime(scenario, e))?;
    writer
        .json("validation.json", &validation)
        .map_err(|e| RunError::runtime(scenario, e))?;
    writer
        .csv(
            "pulse.csv",
            &["segment", "duration", "h1", "h2", "h3"],
            result.pulse.segments().iter().enumerate().map(|(i, s)| {
                vec![i as f64, s.duration, s.h1, s.h2, s.h3]
            }),
        )
        .map_err(|e| RunError::runtime(scenario, e))?;

    let report = GateCalibrationReport {
        spin_two_j: spin.two_j(),
        classical_error: result.classical_error,
        converged: result.converged,
        iterations: result.iterations,
        direction_fidelity: validation.direction_fidelity,
        fluctuations: validation.fluctuations.clone(),
    };
    writer
        .json("gate_calibration_report.json", &report)
        .map_err(|e| RunError::runtime(scenario, e))?;

    Ok(ScenarioMetrics {
        classical_error: Some(result.classical_error),
        direction_fidelity: Some(validation.direction_fidelity),
        ..Default::default()
    })
}

/// Report written by the dephasing demo (scalars only; the mean trajectory
/// is in the CSV).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DephasingDemoReport {
    /// Ensemble size.
    pub n_samples: usize,
    /// Transverse spread of the initial directions.
    pub sigma: f64,
    /// 1/e decay time of the mean transverse magnitude.
    pub fitted_decay_time: Option<f64>,
    /// Smallest single-member `|n|` (stays at 1: no energy damping).
    pub min_member_norm: f64,
    /// Largest single-member `|n|`.
    pub max_member_norm: f64,
    /// `|mean direction|` at the final time.
    pub final_mean_magnitude: f64,
    /// Precession-plus-damping fit of the mean trajectory.
    pub fit: BlochFit,
}

fn run_dephasing(
    config: &ScenarioConfig,
    writer: &mut RunWriter,
) -> Result<ScenarioMetrics, RunError> {
    let scenario = config.scenario;
    let realization = config
        .preset
        .as_ref()
        .expect("validated")
        .realize()
        .map_err(RunError::Config)?;
    let plan = config.plan.as_ref().expect("validated").core_plan()?;
    let ensemble = dephasing_ensemble(
        &realization.params,
        realization.spin.j(),
        config.ensemble_size(),
        config.seed,
        &plan,
    )
    .map_err(|e| RunError::runtime(scenario, e))?;
    let fit = bloch_model_fit(
        &ensemble.mean_trajectory.times,
        &ensemble.mean_trajectory.samples,
        Some(Vector3::z()),
    )
    .map_err(|e| RunError::runtime(scenario, e))?;

    writer
        .csv(
            "mean_trajectory.csv",
            &["time", "s1", "s2", "s3", "transverse_magnitude"],
            ensemble
                .mean_trajectory
                .times
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let s = ensemble.mean_trajectory.samples[i];
                    vec![t, s[0], s[1], s[2], ensemble.transverse_magnitude[i]]
                }),
        )
        .map_err(|e| RunError::runtime(scenario, e))?;

    let report = DephasingDemoReport {
        n_samples: ensemble.n_samples,
        sigma: ensemble.sigma,
        fitted_decay_time: ensemble.fitted_decay_time,
        min_member_norm: ensemble.min_member_norm,
        max_member_norm: ensemble.max_member_norm,
        final_mean_magnitude: ensemble.final_mean_magnitude,
        fit: fit.clone(),
    };
    writer
        .json("dephasing_report.json", &report)
        .map_err(|e| RunError::runtime(scenario, e))?;

    Ok(ScenarioMetrics {
        fitted_decay_time: ensemble.fitted_decay_time,
        transverse_rate: Some(fit.transverse_rate),
        longitudinal_rate: Some(fit.longitudinal_rate),
        bloch_residual_rms: Some(fit.residual_rms),
        ..Default::default()
    })
}

/// Report written by the preset comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PresetComparisonReport {
    /// Twice the shared spin magnitude.
    pub spin_two_j: u32,
    /// Charge-ladder vs spin-form comparison.
    pub charge_vs_spin: ChargeSpinComparison,
    /// Max entry difference between the two matched spin-form Hamiltonians
    /// (charge-ladder preset vs two-mode condensate preset).
    pub matched_hamiltonian_max_diff: f64,
    /// Max entry difference between two-mode-built and directly built spin
    /// operators, over all checked atom numbers.
    pub schwinger_max_diff: f64,
    /// Largest atom number checked.
    pub schwinger_atoms_checked: u32,
    /// Alternative half-integer spin labeling of the condensate sector.
    pub alternative_half_integer_j: f64,
}

fn run_preset_comparison(
    config: &ScenarioConfig,
    writer: &mut RunWriter,
) -> Result<ScenarioMetrics, RunError> {
    let scenario = config.scenario;
    let block = config.comparison.as_ref().expect("validated");
    let cpb = block.cpb_preset();
    let window = match block.charge_window {
        Some(w) => w,
        None => default_charge_window(&cpb).map_err(|e| RunError::runtime(scenario, e))?,
    };
    let charge_vs_spin = compare_charge_vs_spin(&cpb, window)
        .map_err(|e| RunError::runtime(scenario, e))?;

    let spin_real =
        cpb_spin_realization(&cpb).map_err(|e| RunError::runtime(scenario, e))?;
    let ops = SpinOperators::build(spin_real.spin);
    let h_cpb = spin_real
        .matrix(&ops)
        .map_err(|e| RunError::runtime(scenario, e))?;
    let bec = bec_realization(&block.matched_bec_preset())
        .map_err(|e| RunError::runtime(scenario, e))?;
    let h_bec = bec.matrix().map_err(|e| RunError::runtime(scenario, e))?;
    let matched_diff = linalg::max_abs(&(&h_cpb - &h_bec));

    let max_atoms = block.schwinger_max_atoms.unwrap_or(12);
    let mut schwinger_max = 0.0_f64;
    for n in 1..=max_atoms {
        let schwinger = schwinger_map(n).map_err(|e| RunError::runtime(scenario, e))?;
        let direct = SpinOperators::build(schwinger.ops.spin());
        for k in 1..=3 {
            let diff = linalg::max_abs(&(schwinger.ops.component(k) - direct.component(k)));
            schwinger_max = schwinger_max.max(diff);
        }
    }

    let report = PresetComparisonReport {
        spin_two_j: spin_real.spin.two_j(),
        charge_vs_spin,
        matched_hamiltonian_max_diff: matched_diff,
        schwinger_max_diff: schwinger_max,
        schwinger_atoms_checked: max_atoms,
        alternative_half_integer_j: bec.alternative_half_integer_j,
    };
    writer
        .json("preset_comparison.json", &report)
        .map_err(|e| RunError::runtime(scenario, e))?;

    Ok(ScenarioMetrics {
        model_max_diff: Some(matched_diff.max(schwinger_max)),
        ..Default::default()
    })
}
