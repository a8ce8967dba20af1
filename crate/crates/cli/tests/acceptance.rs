//! Acceptance suite: twelve numbered criteria, each a separate test that
//! prints one `[acceptance] criterion N: PASS` line when it holds.  The
//! numeric tolerances are part of the contract and are asserted exactly as
//! stated; nothing here is tuned to make a failing property look healthy.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

use macroqubit_core::dynamics::{
    classical_trajectory, dephasing_ensemble, propagate_unitary, quantum_mean_spin_trajectory,
    ClassicalState, PropagationPlan, StaticPropagator,
};
use macroqubit_core::gates::{
    strong_pulse_amplitude, synthesize_gate, validate_gate_quantum, PulseAnsatz, RotationTarget,
};
use macroqubit_core::linalg::{self, exp_neg_i_h_t, hermiticity_residual, unitarity_residual};
use macroqubit_core::measurement::{
    estimate_stokes, exact_analysis_gates, exact_stokes, observables_from_gates, sample_shots,
    SensitivityFunction,
};
use macroqubit_core::model::{
    bec_realization, cpb_spin_realization, rydberg_realization, schwinger_map, BECPreset,
    ChannelSet, ControlPulse, CooperPairBoxPreset, PulseSegment, RydbergPreset, StaticModelParams,
};
use macroqubit_core::rotations::rotation_about;
use macroqubit_core::spin::{
    coherent_state, QuantumState, Spin, SpinOperators, SubspaceWindow,
};
use macroqubit_core::tomography::{
    bloch_model_fit, check_stokes_bound, reconstruct_qubit, windowed_linearized_stokes,
    NormalizationStrategy,
};
use macroqubit_core::CVector;
use num_complex::Complex64;

fn pass(n: u32, what: &str) {
    println!("[acceptance] criterion {n} ({what}): PASS");
}

fn ops_for(two_j: u32) -> SpinOperators {
    SpinOperators::build(Spin::from_two_j(two_j).expect("valid spin"))
}

// --------------------------------------------------------------------------
// 1. Operator algebra: commutators, Hermiticity, Casimir across spins.
// --------------------------------------------------------------------------
#[test]
fn criterion_01_operator_algebra() {
    for two_j in [1u32, 2, 3, 50, 101, 200] {
        let ops = ops_for(two_j);
        let spin = ops.spin();
        let i = Complex64::new(0.0, 1.0);
        let mut worst = 0.0_f64;
        // [J_a, J_b] = i J_c cyclically.
        for (a, b, c) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            let lhs = linalg::commutator(ops.component(a), ops.component(b));
            let rhs = ops.component(c).map(|x| x * i);
            worst = worst.max(linalg::max_abs(&(lhs - rhs)));
        }
        for k in 1..=3 {
            worst = worst.max(hermiticity_residual(ops.component(k)));
        }
        let casimir = ops.casimir_matrix()
            - linalg::identity(spin.dim()).map(|x| x * spin.casimir());
        worst = worst.max(linalg::max_abs(&casimir));
        assert!(
            worst < 1e-10,
            "algebra residual {worst:.3e} at two_j = {two_j}"
        );
    }
    pass(1, "operator algebra residuals < 1e-10");
}

// --------------------------------------------------------------------------
// 2. POVM structure: completeness and positivity for every response family
//    and for observables conjugated by 50 random rotation gates.
// --------------------------------------------------------------------------
#[test]
fn criterion_02_povm_completeness_and_positivity() {
    let ops = ops_for(50); // j = 25
    let spin = ops.spin();
    let gates = exact_analysis_gates(&ops);
    let families = [
        SensitivityFunction::HardSign,
        SensitivityFunction::ScaledTanh {
            width: spin.j().sqrt(),
        },
        SensitivityFunction::ScaledErf {
            width: spin.j().sqrt(),
        },
    ];
    for f in &families {
        let observables = observables_from_gates(f, &ops, &gates).expect("observables");
        for obs in &observables {
            assert!(
                obs.completeness_residual() < 1e-12,
                "completeness {:.3e} for {f:?}",
                obs.completeness_residual()
            );
            assert!(
                obs.positivity_margin() > -1e-12,
                "positivity {:.3e} for {f:?}",
                obs.positivity_margin()
            );
        }
    }
    // Random rotation gates exp(-i θ u·J) around uniformly drawn axes.
    let f = SensitivityFunction::ScaledTanh {
        width: spin.j().sqrt(),
    };
    let base = macroqubit_core::measurement::build_s3(&f, &ops).expect("base readout");
    let mut rng = ChaCha12Rng::seed_from_u64(7_071);
    for _ in 0..50 {
        let axis = loop {
            let v = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if v.norm() > 1e-3 {
                break v.normalize();
            }
        };
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let u = exp_neg_i_h_t(&ops.linear_combination(&axis), angle);
        let obs = macroqubit_core::measurement::rotate_observable(&u, &base, 2)
            .expect("rotated observable");
        assert!(obs.completeness_residual() < 1e-12);
        assert!(obs.positivity_margin() > -1e-12);
    }
    pass(2, "POVM completeness/positivity < 1e-12");
}

// --------------------------------------------------------------------------
// 3. Propagators at j = 25: unitarity, composition, closed-form agreement.
// --------------------------------------------------------------------------
#[test]
fn criterion_03_propagator_suite() {
    let ops = ops_for(50); // j = 25
    let params = StaticModelParams {
        omega: 0.01,
        delta: 1.0,
        gamma: 0.2,
    };
    let h = params.matrix(&ops).expect("static model");
    let channels = ChannelSet::all();
    let pulse = ControlPulse::new(
        vec![
            PulseSegment {
                duration: 0.7,
                h1: 0.4,
                h2: 0.0,
                h3: -0.3,
            },
            PulseSegment {
                duration: 0.9,
                h1: -0.2,
                h2: 0.5,
                h3: 0.1,
            },
        ],
        channels,
    )
    .expect("pulse");

    // Unitarity of the time-stepped propagator under drive.
    let plan = PropagationPlan::new(0.0, 2.0, 0.05).unwrap();
    let u_full = propagate_unitary(&h, &pulse, &ops, &plan).expect("propagate");
    let unitarity = unitarity_residual(&u_full);
    assert!(unitarity < 1e-9, "unitarity residual {unitarity:.3e}");

    // Composition: evolving [0, t1] then [t1, T] equals evolving [0, T].
    let t1 = 0.85; // falls inside a segment, not on a boundary
    let plan_a = PropagationPlan::new(0.0, t1, 0.05).unwrap();
    let plan_b = PropagationPlan::new(t1, 2.0, 0.05).unwrap();
    let u_a = propagate_unitary(&h, &pulse, &ops, &plan_a).expect("first leg");
    let u_b = propagate_unitary(&h, &pulse, &ops, &plan_b).expect("second leg");
    let composed = &u_b * &u_a;
    let composition = linalg::max_abs(&(&composed - &u_full));
    assert!(composition < 1e-8, "composition residual {composition:.3e}");

    // Time-independent case agrees with the spectral closed form.
    let free = ControlPulse::empty(channels);
    let t = 3.7;
    let plan_static = PropagationPlan::new(0.0, t, 0.1).unwrap();
    let u_stepped = propagate_unitary(&h, &free, &ops, &plan_static).expect("stepped");
    let spectral = StaticPropagator::new(&h).expect("spectral").unitary(t);
    let agreement = linalg::max_abs(&(&u_stepped - &spectral));
    assert!(agreement < 1e-8, "spectral agreement {agreement:.3e}");
    pass(3, "propagator unitarity/composition/closed-form");
}

// --------------------------------------------------------------------------
// 4. Genuine-qubit round trip at j = 1/2 with a sharp response.
// --------------------------------------------------------------------------
#[test]
fn criterion_04_genuine_qubit_round_trip() {
    let ops = ops_for(1);
    let gates = exact_analysis_gates(&ops);
    let f = SensitivityFunction::HardSign;
    let observables = observables_from_gates(&f, &ops, &gates).expect("observables");
    let state = coherent_state(&ops, 1.0, 0.6).expect("state");
    let true_bloch = Vector3::new(
        2.0 * state.expectation(&ops.j1).unwrap(),
        2.0 * state.expectation(&ops.j2).unwrap(),
        2.0 * state.expectation(&ops.j3).unwrap(),
    );

    // Exact-probability mode: machine-level agreement.
    let s = exact_stokes(&state, &observables).expect("exact stokes");
    let reconstructed = reconstruct_qubit(&s, NormalizationStrategy::None).expect("reconstruct");
    let exact_err = (reconstructed.bloch_vector() - true_bloch).norm();
    assert!(exact_err < 1e-10, "exact-mode Bloch error {exact_err:.3e}");
    let density_err = linalg::max_abs(&(&reconstructed.density - state.density().matrix()));
    assert!(density_err < 1e-10, "density error {density_err:.3e}");

    // Finite statistics: each axis within 3 binomial standard errors.
    let shots = 1_000_000_u64;
    let mut records = Vec::new();
    for (k, obs) in observables.iter().enumerate() {
        records.push(sample_shots(&state, obs, shots, 3_001 + k as u64).expect("sample"));
    }
    let sampled = estimate_stokes(&records).expect("estimate");
    for k in 0..3 {
        let p_plus = (1.0 + true_bloch[k]) / 2.0;
        let se = 2.0 * (p_plus * (1.0 - p_plus) / shots as f64).sqrt();
        let err = (sampled.s[k] - true_bloch[k]).abs();
        assert!(
            err <= 3.0 * se,
            "axis {} off by {err:.3e} vs 3σ = {:.3e}",
            k + 1,
            3.0 * se
        );
    }
    pass(4, "genuine-qubit round trip exact + sampled");
}

// --------------------------------------------------------------------------
// 5. Linear-case exactness at j = 10: the mean spin follows the closed-form
//    precession about (Γ, 0, Δ) when the quadratic term is off.
// --------------------------------------------------------------------------
#[test]
fn criterion_05_linear_case_exactness() {
    let ops = ops_for(20); // j = 10
    let params = StaticModelParams {
        omega: 0.0,
        delta: 1.0,
        gamma: 0.4,
    };
    let h = params.matrix(&ops).expect("hamiltonian");
    let (theta, phi) = (1.1, 0.7);
    let initial = coherent_state(&ops, theta, phi).expect("coherent");
    let plan = PropagationPlan::new(0.0, 10.0 / params.delta, 0.05).unwrap();
    let pulse = ControlPulse::empty(ChannelSet::all());
    let quantum =
        quantum_mean_spin_trajectory(&h, &pulse, &ops, &initial, &plan).expect("trajectory");

    let omega_vec = Vector3::new(params.gamma, 0.0, params.delta);
    let n0 = Vector3::new(
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    );
    let rate = omega_vec.norm();
    let axis = omega_vec / rate;
    let mut worst = 0.0_f64;
    for (t, sample) in quantum.times.iter().zip(&quantum.samples) {
        let expected = rotation_about(&axis, rate * t) * n0;
        worst = worst.max((sample - expected).norm());
    }
    assert!(worst < 1e-6, "linear-case deviation {worst:.3e}");
    pass(5, "linear-case trajectory deviation < 1e-6");
}

// --------------------------------------------------------------------------
// 6. Semiclassical convergence: quantum-vs-classical deviation does not grow
//    as j doubles, when the quadratic coefficient scales as χ/j.
// --------------------------------------------------------------------------
#[test]
fn criterion_06_semiclassical_convergence() {
    let mut rng = ChaCha12Rng::seed_from_u64(2_024);
    for draw in 0..3 {
        let chi: f64 = rng.random_range(0.2..0.6);
        let delta: f64 = rng.random_range(0.5..1.5);
        let gamma: f64 = rng.random_range(0.0..0.5);
        let theta: f64 = rng.random_range(0.6..2.5);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let mut deviations = Vec::new();
        for two_j in [20u32, 40, 80, 160] {
            let ops = ops_for(two_j);
            let j = ops.spin().j();
            let params = StaticModelParams {
                omega: chi / j,
                delta,
                gamma,
            };
            let h = params.matrix(&ops).expect("hamiltonian");
            let initial = coherent_state(&ops, theta, phi).expect("coherent");
            let plan = PropagationPlan::new(0.0, 1.0, 0.005).unwrap();
            let pulse = ControlPulse::empty(ChannelSet::all());
            let quantum = quantum_mean_spin_trajectory(&h, &pulse, &ops, &initial, &plan)
                .expect("quantum trajectory");
            let n0 = ClassicalState::new(Vector3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ))
            .expect("unit vector");
            let classical =
                classical_trajectory(&params, &pulse, j, &n0, &plan).expect("classical");
            deviations.push(quantum.max_deviation(&classical).expect("same grid"));
        }
        for w in deviations.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12,
                "draw {draw}: deviations not non-increasing: {deviations:?}"
            );
        }
    }
    pass(6, "semiclassical deviation non-increasing in j");
}

// --------------------------------------------------------------------------
// 7. Stokes radius bounds: universal bound on 200 random states; the
//    small-signal bound on 100 windowed coherent states at j = 50.
// --------------------------------------------------------------------------
#[test]
fn criterion_07_stokes_bounds() {
    let ops = ops_for(100); // j = 50
    let spin = ops.spin();
    let gates = exact_analysis_gates(&ops);
    let f = SensitivityFunction::default_for(spin);
    let observables = observables_from_gates(&f, &ops, &gates).expect("observables");
    let slope = f.slope_at_zero().expect("slope");
    let window = SubspaceWindow::default_for(spin);

    let mut rng = ChaCha12Rng::seed_from_u64(555);
    for _ in 0..200 {
        let dim = spin.dim();
        let mut amplitudes = CVector::zeros(dim);
        for k in 0..dim {
            amplitudes[k] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let norm = amplitudes.norm();
        let state = QuantumState::new(spin, amplitudes / Complex64::new(norm, 0.0))
            .expect("random state");
        let s = exact_stokes(&state, &observables).expect("stokes");
        let report = check_stokes_bound(&s, slope, window.delta_m());
        assert!(
            report.universal_pass,
            "universal bound violated: |s|^2 = {:.6}",
            report.radius_squared
        );
    }

    for i in 0..100 {
        // Low-discrepancy sphere coverage.
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let theta = (1.0 - 2.0 * (i as f64 + 0.5) / 100.0).acos();
        let phi = golden * i as f64;
        let state = coherent_state(&ops, theta, phi).expect("coherent");
        let w = windowed_linearized_stokes(&state, &gates, &f, &window).expect("windowed");
        let report = check_stokes_bound(&w.stokes, slope, window.delta_m());
        assert!(
            report.linearized_pass,
            "small-signal bound violated at sample {i}: |s|^2 = {:.6e} vs {:.6e}",
            report.radius_squared, report.linearized_bound
        );
    }
    pass(7, "Stokes universal + small-signal bounds");
}

// --------------------------------------------------------------------------
// 8. Gate synthesis on the level-ladder preset and the free case.
// --------------------------------------------------------------------------
#[test]
fn criterion_08_gate_synthesis() {
    let preset = RydbergPreset {
        rydberg_constant: 1.0,
        n0: 50,
        quantum_defect: 0.0,
    };
    let realization = rydberg_realization(&preset).expect("preset").model;
    let j = realization.spin.j();
    let amplitude = strong_pulse_amplitude(&realization.params, j);
    let ansatz = PulseAnsatz::piecewise(3, realization.allowed_channels, amplitude, amplitude);
    let target = RotationTarget::u1();
    let result =
        synthesize_gate(&target, &realization.params, j, &ansatz, 1e-8).expect("synthesis");
    assert!(
        result.classical_error < 1e-3,
        "classical error {:.3e}",
        result.classical_error
    );
    let ops = SpinOperators::build(realization.spin);
    let quantum =
        validate_gate_quantum(&result.pulse, &realization.params, &ops, &target).expect("quantum");
    assert!(
        quantum.direction_fidelity > 0.95,
        "direction fidelity {:.4}",
        quantum.direction_fidelity
    );

    // Free case: the analytic seed is already exact, no search runs.
    let free = StaticModelParams {
        omega: 0.0,
        delta: 0.0,
        gamma: 0.0,
    };
    let free_ansatz = PulseAnsatz::single_segment(ChannelSet::all(), 1.0, 1.0);
    let free_result = synthesize_gate(&target, &free, j, &free_ansatz, 1e-8).expect("seed");
    assert_eq!(free_result.iterations, 1, "free case must not optimize");
    assert!(
        free_result.classical_error < 1e-10,
        "free-case seed error {:.3e}",
        free_result.classical_error
    );
    pass(8, "gate synthesis: driven < 1e-3, fidelity > 0.95, seed < 1e-10");
}

// --------------------------------------------------------------------------
// Helpers for the binary-level criteria.
// --------------------------------------------------------------------------
fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/delusion_demo.json")
}

fn run_demo(out: &Path) {
    let output = Command::new(env!("CARGO_BIN_EXE_macroqubit"))
        .args([
            "simulate",
            "--config",
            demo_config().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .expect("binary spawns");
    assert!(
        output.status.success(),
        "delusion demo exited with {}: {}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
}

// --------------------------------------------------------------------------
// 9. The central demonstration: a large spin in a semiclassical state fits a
//    qubit Bloch model to small residuals while its fluctuations stay
//    macroscopic.
// --------------------------------------------------------------------------
#[test]
fn criterion_09_delusion_demo() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("demo");
    run_demo(&out);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("delusion_report.json")).unwrap())
            .unwrap();
    let residual = report["fit"]["residual_rms"].as_f64().unwrap();
    assert!(
        residual < 0.05,
        "Bloch-fit residual {residual:.4} not below 0.05"
    );
    let j = 50.0;
    let macroscopic = report["variances"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v.as_f64().unwrap() >= j / 4.0)
        .count();
    assert!(
        macroscopic >= 2,
        "need at least two macroscopic variances, report: {report}"
    );
    assert_eq!(report["verdict"], "delusion-consistent");
    pass(9, "delusion demo: residual < 0.05 with Var >= j/4 on 2 axes");
}

// --------------------------------------------------------------------------
// 10. Dephasing scaling: doubling the quadratic coefficient halves the
//     fitted 1/e time; phase damping dominates energy damping.
// --------------------------------------------------------------------------
#[test]
fn criterion_10_dephasing_scaling() {
    let j = 50.0;
    let plan = PropagationPlan::new(0.0, 12.0, 0.1).unwrap();
    let run = |omega: f64| {
        let params = StaticModelParams {
            omega,
            delta: 1.0,
            gamma: 0.0,
        };
        dephasing_ensemble(&params, j, 10_000, 99, &plan).expect("ensemble")
    };
    let base = run(0.02);
    let doubled = run(0.04);
    let tau_base = base.fitted_decay_time.expect("base decay time");
    let tau_doubled = doubled.fitted_decay_time.expect("doubled decay time");
    let ratio = tau_base / tau_doubled;
    assert!(
        (ratio - 2.0).abs() <= 0.4,
        "decay-time ratio {ratio:.3} outside 2 ± 20% (τ = {tau_base:.3}, {tau_doubled:.3})"
    );

    let fit = bloch_model_fit(
        &base.mean_trajectory.times,
        &base.mean_trajectory.samples,
        Some(Vector3::z()),
    )
    .expect("fit");
    assert!(
        fit.t1_over_t2 > 10.0,
        "T1/T2 = {:.2} not above 10",
        fit.t1_over_t2
    );
    pass(10, "dephasing time halves under 2Ω; T1/T2 > 10");
}

// --------------------------------------------------------------------------
// 11. Model equivalences: matched charge-ladder and two-mode forms are
//     entry-identical; the two-mode operator map reproduces the spin
//     operators for N ≤ 12 atoms.
// --------------------------------------------------------------------------
#[test]
fn criterion_11_model_equivalence() {
    let cpb = CooperPairBoxPreset {
        charging_energy: 1.0,
        josephson_energy: 0.3,
        n0: 20,
    };
    let spin_form = cpb_spin_realization(&cpb).expect("spin form");
    let ops = SpinOperators::build(spin_form.spin);
    let h_spin = spin_form.matrix(&ops).expect("spin matrix");
    let bec = BECPreset {
        atom_number: 2 * cpb.n0 + 1, // same j = n0 + 1/2
        charging_scale: cpb.charging_energy,
        tunneling_scale: cpb.josephson_energy,
    };
    let bec_form = bec_realization(&bec).expect("two-mode form");
    let h_bec = bec_form.matrix().expect("two-mode matrix");
    let diff = linalg::max_abs(&(&h_spin - &h_bec));
    assert!(diff <= 1e-14, "matched Hamiltonians differ by {diff:.3e}");

    for atoms in 1..=12u32 {
        let mapped = schwinger_map(atoms).expect("mapping");
        let direct = SpinOperators::build(Spin::from_two_j(atoms).unwrap());
        for k in 1..=3 {
            let delta = linalg::max_abs(&(mapped.ops.component(k) - direct.component(k)));
            assert!(
                delta < 1e-10,
                "component {k} differs by {delta:.3e} at N = {atoms}"
            );
        }
    }
    pass(11, "matched models entry-identical; operator map exact to N = 12");
}

// --------------------------------------------------------------------------
// 12. Reproducibility: the demo rerun with the same config and seed is
//     byte-identical (the run record differs only in wall-clock duration).
// --------------------------------------------------------------------------
#[test]
fn criterion_12_byte_identical_reruns() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    run_demo(&first);
    run_demo(&second);
    let record: Value =
        serde_json::from_str(&fs::read_to_string(first.join("run_record.json")).unwrap()).unwrap();
    for file in record["manifest"].as_array().unwrap() {
        let name = file.as_str().unwrap();
        if name == "run_record.json" {
            // Identical except the wall-clock duration field.
            let mut a: Value =
                serde_json::from_str(&fs::read_to_string(first.join(name)).unwrap()).unwrap();
            let mut b: Value =
                serde_json::from_str(&fs::read_to_string(second.join(name)).unwrap()).unwrap();
            a["duration_seconds"] = Value::Null;
            b["duration_seconds"] = Value::Null;
            assert_eq!(a, b, "run records differ beyond duration");
            continue;
        }
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} not byte-identical across reruns");
    }
    pass(12, "delusion-demo reruns byte-identical");
}
