//! Property-based invariants across the core modules: operator algebra for
//! arbitrary spins, coherent-state geometry, positivity of the unsharp
//! measurement under random gates, qubit reconstruction positivity, and
//! rotation decomposition round trips.

use macroqubit_core::dynamics::StokesVector;
use macroqubit_core::linalg::{self, CMatrix};
use macroqubit_core::measurement::{observables_from_gates, SensitivityFunction};
use macroqubit_core::model::{ChannelSet, ControlPulse, PulseSegment};
use macroqubit_core::rotations::{euler_two_axis, orthonormality_defect, rotation_about};
use macroqubit_core::spin::{coherent_state, Spin, SpinOperators};
use macroqubit_core::tomography::{
    normalize_stokes, reconstruct_qubit, NormalizationStrategy,
};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

fn exp_rotation(ops: &SpinOperators, axis: Vector3<f64>, angle: f64) -> CMatrix {
    let generator = ops.linear_combination(&axis.normalize());
    let (values, vectors) = linalg::hermitian_eigen(&generator);
    linalg::exp_neg_i_from_eigen(&values, &vectors, angle)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn ladder_algebra_holds_for_arbitrary_spin(two_j in 1u32..=60) {
        let spin = Spin::from_two_j(two_j).unwrap();
        let ops = SpinOperators::build(spin);
        let j1 = ops.component(1);
        let j2 = ops.component(2);
        let j3 = ops.component(3);
        let i = Complex64::i();
        // Cyclic commutators.
        prop_assert!(linalg::max_abs(&(commutator(j1, j2) - j3 * i)) < 1e-10);
        prop_assert!(linalg::max_abs(&(commutator(j2, j3) - j1 * i)) < 1e-10);
        prop_assert!(linalg::max_abs(&(commutator(j3, j1) - j2 * i)) < 1e-10);
        // Hermiticity.
        for k in 1..=3 {
            let jk = ops.component(k);
            prop_assert!(linalg::max_abs(&(jk - &jk.adjoint())) < 1e-12);
        }
        // Casimir.
        let j = spin.j();
        let casimir = j1 * j1 + j2 * j2 + j3 * j3;
        let expected = linalg::identity(spin.dim()) * Complex64::new(j * (j + 1.0), 0.0);
        prop_assert!(linalg::max_abs(&(casimir - expected)) < 1e-10 * (j * (j + 1.0)).max(1.0));
    }

    #[test]
    fn coherent_state_mean_spin_points_along_its_direction(
        two_j in 1u32..=50,
        theta in 0.0..std::f64::consts::PI,
        phi in 0.0..(2.0 * std::f64::consts::PI),
    ) {
        let spin = Spin::from_two_j(two_j).unwrap();
        let ops = SpinOperators::build(spin);
        let state = coherent_state(&ops, theta, phi).unwrap();
        let j = spin.j();
        let n = Vector3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        );
        for k in 1..=3 {
            let mean = state.expectation(ops.component(k)).unwrap();
            prop_assert!(
                (mean - j * n[(k - 1) as usize]).abs() < 1e-9 * j.max(1.0),
                "axis {k}: {mean} vs {}", j * n[(k - 1) as usize]
            );
        }
        // Highest-weight along n: zero variance along n, j/2 transverse.
        let jn = ops.linear_combination(&n);
        let along = state.expectation(&jn).unwrap();
        let along_sq = state.expectation(&(&jn * &jn)).unwrap();
        prop_assert!((along_sq - along * along).abs() < 1e-8 * j.max(1.0).powi(2));
    }

    #[test]
    fn unsharp_observables_stay_povm_under_random_gates(
        two_j in 1u32..=40,
        ax in -1.0f64..1.0,
        ay in -1.0f64..1.0,
        az in -1.0f64..1.0,
        angle in 0.01f64..std::f64::consts::PI,
        width_scale in 0.3f64..3.0,
        family in 0u8..3,
    ) {
        prop_assume!(Vector3::new(ax, ay, az).norm() > 1e-3);
        let spin = Spin::from_two_j(two_j).unwrap();
        let ops = SpinOperators::build(spin);
        let f = match family {
            0 => SensitivityFunction::HardSign,
            1 => SensitivityFunction::ScaledTanh { width: width_scale * spin.j().sqrt().max(0.5) },
            _ => SensitivityFunction::ScaledErf { width: width_scale * spin.j().sqrt().max(0.5) },
        };
        let u = exp_rotation(&ops, Vector3::new(ax, ay, az), angle);
        let gates = [u.clone(), u.clone(), linalg::identity(spin.dim())];
        let observables = observables_from_gates(&f, &ops, &gates).unwrap();
        for obs in &observables {
            prop_assert!(obs.completeness_residual() < 1e-12);
            prop_assert!(obs.positivity_margin() > -1e-12);
        }
    }

    #[test]
    fn reconstruction_after_normalization_is_positive(
        sx in -1.0f64..1.0,
        sy in -1.0f64..1.0,
        sz in -1.0f64..1.0,
        ox in -0.2f64..0.2,
        oz in -0.2f64..0.2,
        strategy_pick in 0u8..3,
    ) {
        let s = StokesVector::raw(Vector3::new(sx, sy, sz)).unwrap();
        let strategy = match strategy_pick {
            0 => NormalizationStrategy::RadialClip,
            1 => NormalizationStrategy::BlochBallProjection,
            _ => NormalizationStrategy::OffsetSubtract {
                offset: Vector3::new(ox, 0.0, oz),
            },
        };
        let n = normalize_stokes(&s, &strategy).unwrap();
        prop_assert!(n.s.norm() <= 1.0 + 1e-12);
        let q = reconstruct_qubit(&n, strategy).unwrap();
        // Positivity and unit trace from the closed-form eigenvalues.
        let (hi, lo) = q.eigenvalues();
        prop_assert!(lo >= -1e-14);
        prop_assert!((hi + lo - 1.0).abs() < 1e-12);
        let trace = (q.density[(0, 0)] + q.density[(1, 1)]).re;
        prop_assert!((trace - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euler_decomposition_recomposes_the_rotation(
        ax in -1.0f64..1.0,
        ay in -1.0f64..1.0,
        az in -1.0f64..1.0,
        angle in -3.1f64..3.1,
        pair in 0u8..3,
    ) {
        prop_assume!(Vector3::new(ax, ay, az).norm() > 1e-3);
        let axis = Vector3::new(ax, ay, az).normalize();
        let r = rotation_about(&axis, angle);
        prop_assert!(orthonormality_defect(&r) < 1e-12);
        let (a, b) = match pair {
            0 => (3u8, 1u8),
            1 => (3, 2),
            _ => (1, 2),
        };
        let _ = pair;
        let axis_of = |k: u8| -> Vector3<f64> {
            match k {
                1 => Vector3::x(),
                2 => Vector3::y(),
                _ => Vector3::z(),
            }
        };
        let (alpha, beta, gamma) = euler_two_axis(&r, &axis_of(a), &axis_of(b)).unwrap();
        let recomposed: Matrix3<f64> = rotation_about(&axis_of(a), alpha)
            * rotation_about(&axis_of(b), beta)
            * rotation_about(&axis_of(a), gamma);
        prop_assert!(
            (recomposed - r).abs().max() < 1e-9,
            "recomposition defect {}", (recomposed - r).abs().max()
        );
    }

    #[test]
    fn piecewise_propagators_stay_unitary(
        two_j in 1u32..=30,
        d1 in 0.05f64..1.0,
        d2 in 0.05f64..1.0,
        h1 in -2.0f64..2.0,
        h3 in -2.0f64..2.0,
    ) {
        let spin = Spin::from_two_j(two_j).unwrap();
        let ops = SpinOperators::build(spin);
        let channels = ChannelSet::from_channels(&[1, 3]).unwrap();
        let pulse = ControlPulse::new(
            vec![
                PulseSegment { duration: d1, h1, h2: 0.0, h3: 0.0 },
                PulseSegment { duration: d2, h1: 0.0, h2: 0.0, h3 },
            ],
            channels,
        ).unwrap();
        let h_static = linalg::identity(spin.dim()) * Complex64::new(0.0, 0.0);
        let plan = macroqubit_core::dynamics::PropagationPlan::new(
            0.0,
            d1 + d2,
            (d1 + d2) / 16.0,
        ).unwrap();
        let u = macroqubit_core::dynamics::propagate_unitary(&h_static, &pulse, &ops, &plan).unwrap();
        prop_assert!(linalg::require_unitary(&u, 1e-9).is_ok());
    }
}
