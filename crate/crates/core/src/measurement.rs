//! The unsharp sign-of-`J3` two-outcome measurement: sensitivity functions,
//! POVM construction, gate-rotated observables, outcome probabilities,
//! finite-shot sampling, and Stokes-parameter estimators.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::dynamics::StokesVector;
use crate::error::{Error, Result};
use crate::linalg::{self, exp_neg_i_from_eigen, hermitian_eigen, require_unitary, CMatrix};
use crate::spin::{ExpectationSource, SpinOperators};

/// Unitarity tolerance for gates used to rotate observables.
pub const GATE_UNITARITY_TOL: f64 = 1e-8;

/// Odd, monotone readout response `F` mapping the measured level to a value
/// in `[-1, 1]`; the two-outcome effects are `(I ± F(J3))/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SensitivityFunction {
    /// Ideal threshold detector: `F(x) = sign(x)`.
    HardSign,
    /// `F(x) = tanh(x / width)`.
    ScaledTanh {
        /// Smearing width in units of `m`.
        width: f64,
    },
    /// `F(x) = erf(x / width)`.
    ScaledErf {
        /// Smearing width in units of `m`.
        width: f64,
    },
}

impl SensitivityFunction {
    /// Default readout for a given spin: `tanh` with width `sqrt(j)`, which
    /// resolves structure at the coherent-state fluctuation scale.
    pub fn default_for(spin: crate::spin::Spin) -> Self {
        Self::ScaledTanh {
            width: spin.j().sqrt(),
        }
    }

    /// Reject non-positive or non-finite widths.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::HardSign => Ok(()),
            Self::ScaledTanh { width } | Self::ScaledErf { width } => {
                if width.is_finite() && width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "sensitivity width {width} must be positive"
                    )))
                }
            }
        }
    }

    /// Evaluate `F(x)`.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Self::HardSign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::ScaledTanh { width } => (x / width).tanh(),
            Self::ScaledErf { width } => erf(x / width),
        }
    }

    /// `F'(0)`; undefined for the hard sign.
    pub fn slope_at_zero(&self) -> Result<f64> {
        match *self {
            Self::HardSign => Err(Error::UndefinedSlope(
                "hard-sign response has no slope at zero".into(),
            )),
            Self::ScaledTanh { width } => Ok(1.0 / width),
            // d/dx erf(x/w) = (2 / sqrt(pi)) (1/w) exp(-(x/w)^2).
            Self::ScaledErf { width } => Ok(2.0 / (width * std::f64::consts::PI.sqrt())),
        }
    }

    /// `F'''(0)`, the leading correction to the linearized readout;
    /// undefined for the hard sign.
    pub fn third_derivative_at_zero(&self) -> Result<f64> {
        match *self {
            Self::HardSign => Err(Error::UndefinedSlope(
                "hard-sign response has no derivatives at zero".into(),
            )),
            // tanh(u) = u - u^3/3 + ..., so d^3/du^3 at 0 is -2.
            Self::ScaledTanh { width } => Ok(-2.0 / width.powi(3)),
            // erf(u) = (2/sqrt(pi)) (u - u^3/3 + ...): third derivative -4/sqrt(pi).
            Self::ScaledErf { width } => {
                Ok(-4.0 / (std::f64::consts::PI.sqrt() * width.powi(3)))
            }
        }
    }
}

/// Two-outcome POVM `{S_+, S_-}` with `S_+ + S_- = I`, labeled by the axis
/// it effectively measures, along with the gate that generated it.
#[derive(Clone, Debug)]
pub struct UnsharpObservable {
    /// Effect for the `+` outcome.
    pub s_plus: CMatrix,
    /// Effect for the `-` outcome.
    pub s_minus: CMatrix,
    /// Axis label `k` in `{1, 2, 3}`.
    pub label: u8,
    /// Accumulated gate `G` with `S_± = G† S_±^{(3)} G` (identity for the
    /// direct `J3` readout).
    pub gate: CMatrix,
}

impl UnsharpObservable {
    /// Max-entry residual of `S_+ + S_- - I`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = &self.s_plus + &self.s_minus - linalg::identity(self.s_plus.nrows());
        linalg::max_abs(&sum)
    }

    /// Smallest eigenvalue across both effects (must be `>= -1e-12`).
    pub fn positivity_margin(&self) -> f64 {
        let (vp, _) = hermitian_eigen(&self.s_plus);
        let (vm, _) = hermitian_eigen(&self.s_minus);
        vp.min().min(vm.min())
    }

    /// Dimension of the underlying representation.
    pub fn dim(&self) -> usize {
        self.s_plus.nrows()
    }
}

/// Build the unsharp sign-of-`J3` POVM: `S_± = (I ± F(J3))/2`, with `F`
/// applied spectrally to the diagonal levels `m` (so the construction is
/// exact, not a series).  For the hard sign with half-odd spin, the effects
/// are the sharp projectors onto `sign(m) = ±1`.
pub fn build_s3(f: &SensitivityFunction, ops: &SpinOperators) -> Result<UnsharpObservable> {
    f.validate()?;
    let spin = ops.spin();
    let n = spin.dim();
    let mut s_plus = CMatrix::zeros(n, n);
    let mut s_minus = CMatrix::zeros(n, n);
    for row in 0..n {
        let fm = f.value(spin.m_at(row));
        if !fm.is_finite() || fm.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "sensitivity value F({}) = {fm} outside [-1, 1]",
                spin.m_at(row)
            )));
        }
        s_plus[(row, row)] = Complex64::new((1.0 + fm) / 2.0, 0.0);
        s_minus[(row, row)] = Complex64::new((1.0 - fm) / 2.0, 0.0);
    }
    Ok(UnsharpObservable {
        s_plus,
        s_minus,
        label: 3,
        gate: linalg::identity(n),
    })
}

/// Conjugate an observable by a gate: `S_±' = U† S_± U`, relabeled to the
/// axis the composite effectively measures.  Unitarity is enforced within
/// [`GATE_UNITARITY_TOL`]; completeness and positivity are automatically
/// preserved by conjugation.
pub fn rotate_observable(
    u: &CMatrix,
    base: &UnsharpObservable,
    label: u8,
) -> Result<UnsharpObservable> {
    if u.nrows() != base.dim() {
        return Err(Error::DimensionMismatch(format!(
            "gate is {}x{}, observable has dimension {}",
            u.nrows(),
            u.ncols(),
            base.dim()
        )));
    }
    if !(1..=3).contains(&label) {
        return Err(Error::InvalidParameter(format!(
            "observable label {label} outside 1..=3"
        )));
    }
    require_unitary(u, GATE_UNITARITY_TOL)?;
    let ud = u.adjoint();
    Ok(UnsharpObservable {
        s_plus: &ud * &base.s_plus * u,
        s_minus: &ud * &base.s_minus * u,
        label,
        gate: &base.gate * u,
    })
}

/// Exact analysis gates `A_k` with `A_k† J3 A_k = J_k`:
/// `A_1 = exp(+i (π/2) J2)`, `A_2 = exp(-i (π/2) J1)`, `A_3 = I`.
///
/// Conjugating by `exp(-i θ u·J)` rotates the operator triple by the
/// rotation `R_u(θ)` (the same rotation mean spins undergo under the state
/// map), so measuring `J_k` requires the gate whose *inverse* maps `e3` to
/// `e_k`.  Note the state-map rotation that carries `e3` onto `e1`
/// (`exp(-i(π/2)J2)`) conjugates `J3` to `-J1` and would flip the sign of
/// the first Stokes component; analysis gates are its adjoints.
pub fn exact_analysis_gates(ops: &SpinOperators) -> [CMatrix; 3] {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let (v2, w2) = hermitian_eigen(&ops.j2);
    let a1 = exp_neg_i_from_eigen(&v2, &w2, -half_pi);
    let (v1, w1) = hermitian_eigen(&ops.j1);
    let a2 = exp_neg_i_from_eigen(&v1, &w1, half_pi);
    [a1, a2, linalg::identity(ops.dim())]
}

/// Build the three rotated observables `S^k = U_k† S^3 U_k` from a base
/// readout and per-axis gates (`U_3 = I` by convention; not enforced).
pub fn observables_from_gates(
    f: &SensitivityFunction,
    ops: &SpinOperators,
    gates: &[CMatrix; 3],
) -> Result<[UnsharpObservable; 3]> {
    let base = build_s3(f, ops)?;
    Ok([
        rotate_observable(&gates[0], &base, 1)?,
        rotate_observable(&gates[1], &base, 2)?,
        rotate_observable(&gates[2], &base, 3)?,
    ])
}

/// Outcome probabilities `p_± = <S_±>`, checked to sum to 1 within `1e-10`
/// and clipped into `[0, 1]`.
pub fn outcome_probability<S: ExpectationSource>(
    state: &S,
    obs: &UnsharpObservable,
) -> Result<(f64, f64)> {
    if state.source_spin().dim() != obs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs observable dimension {}",
            state.source_spin().dim(),
            obs.dim()
        )));
    }
    let p_plus = state.expect(&obs.s_plus);
    let p_minus = state.expect(&obs.s_minus);
    if !(p_plus.is_finite() && p_minus.is_finite()) || (p_plus + p_minus - 1.0).abs() > 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "outcome probabilities ({p_plus}, {p_minus}) do not sum to 1"
        )));
    }
    if p_plus < -1e-10 || p_plus > 1.0 + 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "outcome probability {p_plus} outside [0, 1]"
        )));
    }
    Ok((p_plus.clamp(0.0, 1.0), p_minus.clamp(0.0, 1.0)))
}

/// Counts from repeated two-outcome measurements of one observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    /// Axis label `k` in `{1, 2, 3}`.
    pub label: u8,
    /// Number of shots.
    pub shots: u64,
    /// `+1` outcomes.
    pub count_plus: u64,
    /// `-1` outcomes (`count_plus + count_minus = shots`).
    pub count_minus: u64,
    /// RNG seed that produced the counts.
    pub seed: u64,
}

/// Draw `shots` independent two-outcome results as a single binomial sample
/// (statistically identical to a per-shot loop); reproducible from the seed.
pub fn sample_shots<S: ExpectationSource>(
    state: &S,
    obs: &UnsharpObservable,
    shots: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if shots < 1 {
        return Err(Error::InvalidParameter(
            "shot count must be at least 1".into(),
        ));
    }
    let (p_plus, _) = outcome_probability(state, obs)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dist = Binomial::new(shots, p_plus)
        .map_err(|e| Error::NumericalFailure(format!("binomial parameters: {e}")))?;
    let count_plus = dist.sample(&mut rng);
    Ok(MeasurementRecord {
        label: obs.label,
        shots,
        count_plus,
        count_minus: shots - count_plus,
        seed,
    })
}

/// Finite-shot Stokes estimator `s_k = (N_+ - N_-)/N` from one record per
/// axis (any order; all three labels must be present exactly once).
pub fn estimate_stokes(records: &[MeasurementRecord]) -> Result<StokesVector> {
    let mut s = [f64::NAN; 3];
    for record in records {
        let idx = match record.label {
            1..=3 => (record.label - 1) as usize,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "record label {other} outside 1..=3"
                )))
            }
        };
        if !s[idx].is_nan() {
            return Err(Error::InvalidParameter(format!(
                "duplicate record for axis {}",
                record.label
            )));
        }
        if record.count_plus + record.count_minus != record.shots {
            return Err(Error::InvalidParameter(
                "record counts do not sum to the shot count".into(),
            ));
        }
        s[idx] =
            (record.count_plus as f64 - record.count_minus as f64) / record.shots as f64;
    }
    if s.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter(
            "records must cover axes 1, 2 and 3".into(),
        ));
    }
    StokesVector::raw(Vector3::new(s[0], s[1], s[2]))
}

/// Exact-probability Stokes parameters `s_k = <S_+^k> - <S_-^k>` (the
/// infinite-shot limit of [`estimate_stokes`]).
pub fn exact_stokes<S: ExpectationSource>(
    state: &S,
    observables: &[UnsharpObservable; 3],
) -> Result<StokesVector> {
    let mut s = Vector3::zeros();
    for obs in observables {
        let (p_plus, p_minus) = outcome_probability(state, obs)?;
        let idx = match obs.label {
            1..=3 => (obs.label - 1) as usize,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "observable label {other} outside 1..=3"
                )))
            }
        };
        s[idx] = p_plus - p_minus;
    }
    StokesVector::raw(s)
}

/// Small-signal Stokes estimate with its leading correction.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LinearizedStokes {
    /// `s_k = F'(0) · <U_k† J3 U_k>` (provenance `linearized`).
    pub stokes: StokesVector,
    /// Cubic diagnostic `(F'''(0)/6) · <U_k† J3³ U_k>` per axis — the next
    /// expansion term, quantifying where linearization breaks down.
    pub cubic_correction: Vector3<f64>,
}

/// Linearized Stokes parameters `s_k ≈ F'(0) Tr(U_k ρ U_k† J3)`, with the
/// cubic correction exposed for diagnostics.  Rejects the hard-sign
/// response, whose slope at zero does not exist.
pub fn stokes_linearized<S: ExpectationSource>(
    state: &S,
    gates: &[CMatrix; 3],
    f: &SensitivityFunction,
    ops: &SpinOperators,
) -> Result<LinearizedStokes> {
    let slope = f.slope_at_zero()?;
    let third = f.third_derivative_at_zero()?;
    let j3_cubed = &ops.j3 * &ops.j3 * &ops.j3;
    let mut linear = Vector3::zeros();
    let mut cubic = Vector3::zeros();
    for (k, u) in gates.iter().enumerate() {
        require_unitary(u, GATE_UNITARITY_TOL)?;
        let ud = u.adjoint();
        linear[k] = slope * state.expect(&(&ud * &ops.j3 * u));
        cubic[k] = third / 6.0 * state.expect(&(&ud * &j3_cubed * u));
    }
    Ok(LinearizedStokes {
        stokes: StokesVector::linearized(linear)?,
        cubic_correction: cubic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::spin::{coherent_state, DensityMatrix, QuantumState, Spin};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn spectral_apply(f: &SensitivityFunction, op: &CMatrix) -> CMatrix {
        // F applied in the eigenbasis of an arbitrary Hermitian operator —
        // independent oracle for rotated observables.
        let (values, vectors) = hermitian_eigen(op);
        let mut diag = CMatrix::zeros(op.nrows(), op.ncols());
        for k in 0..op.nrows() {
            diag[(k, k)] = Complex64::new(f.value(values[k]), 0.0);
        }
        &vectors * diag * vectors.adjoint()
    }

    fn effect_difference(obs: &UnsharpObservable) -> CMatrix {
        &obs.s_plus - &obs.s_minus
    }

    #[test]
    fn hard_sign_at_spin_half_gives_sharp_projectors() {
        let ops = SpinOperators::build(Spin::from_two_j(1).unwrap());
        let obs = build_s3(&SensitivityFunction::HardSign, &ops).unwrap();
        assert_abs_diff_eq!(obs.s_plus[(0, 0)].re, 1.0);
        assert_abs_diff_eq!(obs.s_plus[(1, 1)].re, 0.0);
        assert_abs_diff_eq!(obs.s_minus[(1, 1)].re, 1.0);
        assert!(obs.completeness_residual() < 1e-15);
    }

    #[test]
    fn narrow_tanh_approaches_hard_sign() {
        let ops = SpinOperators::build(Spin::from_two_j(5).unwrap());
        let sharp = build_s3(&SensitivityFunction::HardSign, &ops).unwrap();
        let narrow = build_s3(&SensitivityFunction::ScaledTanh { width: 1e-3 }, &ops).unwrap();
        assert!(max_abs(&(&narrow.s_plus - &sharp.s_plus)) < 1e-12);
    }

    #[test]
    fn tanh_diagonal_matches_scalar_oracle() {
        let spin = Spin::from_two_j(9).unwrap(); // j = 9/2
        let ops = SpinOperators::build(spin);
        let f = SensitivityFunction::ScaledTanh { width: 3.0 };
        let obs = build_s3(&f, &ops).unwrap();
        for row in 0..spin.dim() {
            let m = spin.m_at(row);
            assert_abs_diff_eq!(
                obs.s_plus[(row, row)].re,
                (1.0 + (m / 3.0).tanh()) / 2.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn erf_family_is_odd_monotone_with_known_slope() {
        let f = SensitivityFunction::ScaledErf { width: 2.0 };
        assert_abs_diff_eq!(f.value(0.7), -f.value(-0.7), epsilon = 1e-15);
        assert!(f.value(1.0) < f.value(2.0));
        assert_abs_diff_eq!(
            f.slope_at_zero().unwrap(),
            2.0 / (2.0 * std::f64::consts::PI.sqrt()),
            epsilon = 1e-15
        );
        // Numerical derivative checks for both smooth families.
        for f in [
            SensitivityFunction::ScaledTanh { width: 1.7 },
            SensitivityFunction::ScaledErf { width: 1.7 },
        ] {
            let h = 1e-5;
            let numeric = (f.value(h) - f.value(-h)) / (2.0 * h);
            assert_abs_diff_eq!(f.slope_at_zero().unwrap(), numeric, epsilon = 1e-9);
            let third =
                (f.value(2.0 * h) - 2.0 * f.value(h) + 2.0 * f.value(-h) - f.value(-2.0 * h))
                    / (2.0 * h.powi(3));
            assert_abs_diff_eq!(
                f.third_derivative_at_zero().unwrap(),
                third,
                epsilon = 1e-3
            );
        }
    }

    #[test]
    fn analysis_gates_conjugate_j3_onto_each_axis() {
        let ops = SpinOperators::build(Spin::from_j(2.5).unwrap());
        let gates = exact_analysis_gates(&ops);
        for (k, gate) in gates.iter().enumerate() {
            let conj = gate.adjoint() * &ops.j3 * gate;
            assert!(
                max_abs(&(conj - ops.component(k + 1).clone())) < 1e-12,
                "axis {}",
                k + 1
            );
        }
    }

    #[test]
    fn rotated_observable_measures_unsharp_sign_of_target_axis() {
        let ops = SpinOperators::build(Spin::from_j(3.0).unwrap());
        let f = SensitivityFunction::ScaledTanh { width: 1.5 };
        let base = build_s3(&f, &ops).unwrap();
        // Identity leaves the observable unchanged.
        let same = rotate_observable(&linalg::identity(ops.dim()), &base, 3).unwrap();
        assert!(max_abs(&(&same.s_plus - &base.s_plus)) < 1e-15);
        // The analysis gate turns the readout into the unsharp sign of J1.
        let gates = exact_analysis_gates(&ops);
        let rotated = rotate_observable(&gates[0], &base, 1).unwrap();
        let oracle = spectral_apply(&f, &ops.j1);
        assert!(max_abs(&(effect_difference(&rotated) - oracle)) < 1e-10);
        assert!(rotated.completeness_residual() < 1e-12);
        assert!(rotated.positivity_margin() > -1e-12);
        // The state-map rotation carrying e3 onto e1 measures -J1 instead.
        let (v2, w2) = hermitian_eigen(&ops.j2);
        let state_map = exp_neg_i_from_eigen(&v2, &w2, FRAC_PI_2);
        let flipped = rotate_observable(&state_map, &base, 1).unwrap();
        let oracle_neg = spectral_apply(&f, &ops.j1.map(|z| -z));
        assert!(max_abs(&(effect_difference(&flipped) - oracle_neg)) < 1e-10);
    }

    #[test]
    fn povm_suite_over_random_rotations() {
        let ops = SpinOperators::build(Spin::from_j(2.5).unwrap());
        for f in [
            SensitivityFunction::HardSign,
            SensitivityFunction::ScaledTanh { width: 1.2 },
            SensitivityFunction::ScaledErf { width: 0.8 },
        ] {
            let base = build_s3(&f, &ops).unwrap();
            assert!(base.completeness_residual() < 1e-12);
            assert!(base.positivity_margin() > -1e-12);
            let mut x = 0.42_f64;
            for _ in 0..50 {
                // Deterministic low-discrepancy angles and axes.
                x = (x + std::f64::consts::FRAC_1_SQRT_2) % 1.0;
                let theta = 2.0 * std::f64::consts::PI * x;
                let axis = Vector3::new((7.0 * x).sin(), (13.0 * x).cos(), 2.0 * x - 1.0)
                    .normalize();
                let gen = ops.linear_combination(&axis);
                let (values, vectors) = hermitian_eigen(&gen);
                let u = exp_neg_i_from_eigen(&values, &vectors, theta);
                let rotated = rotate_observable(&u, &base, 1).unwrap();
                assert!(rotated.completeness_residual() < 1e-12);
                assert!(rotated.positivity_margin() > -1e-12);
            }
        }
    }

    #[test]
    fn outcome_probabilities_match_amplitude_oracle() {
        let spin = Spin::from_j(10.0).unwrap();
        let ops = SpinOperators::build(spin);
        let f = SensitivityFunction::ScaledTanh { width: 2.0 };
        let obs = build_s3(&f, &ops).unwrap();
        // Maximally mixed: odd F makes (1/2, 1/2) for any family.
        let mixed = DensityMatrix::maximally_mixed(spin);
        for family in [
            SensitivityFunction::HardSign,
            f,
            SensitivityFunction::ScaledErf { width: 1.0 },
        ] {
            let o = build_s3(&family, &ops).unwrap();
            let (p, q) = outcome_probability(&mixed, &o).unwrap();
            assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(q, 0.5, epsilon = 1e-12);
        }
        // Highest-weight state with the hard sign: certain "+".
        let top = QuantumState::basis(spin, spin.two_j() as i64).unwrap();
        let sharp = build_s3(&SensitivityFunction::HardSign, &ops).unwrap();
        let (p, q) = outcome_probability(&top, &sharp).unwrap();
        assert_abs_diff_eq!(p, 1.0);
        assert_abs_diff_eq!(q, 0.0);
        // Coherent state against the independent binomial-amplitude oracle.
        let theta = FRAC_PI_3;
        let state = coherent_state(&ops, theta, 0.9).unwrap();
        let (c2, s2) = ((theta / 2.0).cos().powi(2), (theta / 2.0).sin().powi(2));
        let mut choose = 1.0_f64;
        let mut p_oracle = 0.0;
        for row in 0..spin.dim() {
            let (jp, jm) = (spin.j() + spin.m_at(row), spin.j() - spin.m_at(row));
            p_oracle +=
                choose * c2.powf(jp) * s2.powf(jm) * (1.0 + (spin.m_at(row) / 2.0).tanh()) / 2.0;
            choose *= jp / (jm + 1.0);
        }
        let (p, _) = outcome_probability(&state, &obs).unwrap();
        assert_abs_diff_eq!(p, p_oracle, epsilon = 1e-10);
    }

    #[test]
    fn shot_sampling_is_reproducible_and_concentrated() {
        let spin = Spin::from_two_j(1).unwrap();
        let ops = SpinOperators::build(spin);
        let sharp = build_s3(&SensitivityFunction::HardSign, &ops).unwrap();
        // Certain outcome: every shot lands in "+".
        let top = QuantumState::basis(spin, 1).unwrap();
        let rec = sample_shots(&top, &sharp, 1000, 3).unwrap();
        assert_eq!(rec.count_plus, 1000);
        assert_eq!(rec.count_minus, 0);
        // Unbiased state: en route to p = 1/2 within ~3 standard errors.
        let mixed = DensityMatrix::maximally_mixed(spin);
        let n = 1_000_000;
        let rec = sample_shots(&mixed, &sharp, n, 11).unwrap();
        assert_eq!(rec.count_plus + rec.count_minus, n);
        let freq = rec.count_plus as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002, "frequency {freq}");
        // Determinism: identical seed, identical record.
        let again = sample_shots(&mixed, &sharp, n, 11).unwrap();
        assert_eq!(rec, again);
        let other = sample_shots(&mixed, &sharp, n, 12).unwrap();
        assert_ne!(rec.count_plus, other.count_plus);
    }

    #[test]
    fn stokes_estimators_agree_with_closed_forms() {
        let spin = Spin::from_j(50.0).unwrap();
        let ops = SpinOperators::build(spin);
        let f = SensitivityFunction::default_for(spin);
        let gates = exact_analysis_gates(&ops);
        let observables = observables_from_gates(&f, &ops, &gates).unwrap();
        // A coherent state along +e1 is the J1 highest-weight state, so
        // s1 = F(j) exactly, and the transverse components vanish by parity.
        let state = coherent_state(&ops, FRAC_PI_2, 0.0).unwrap();
        let s = exact_stokes(&state, &observables).unwrap();
        assert_abs_diff_eq!(s.s[0], (spin.j() / spin.j().sqrt()).tanh(), epsilon = 1e-9);
        assert_abs_diff_eq!(s.s[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.s[2], 0.0, epsilon = 1e-9);
        assert!(s.s.norm_squared() <= 3.0);
        // Maximally mixed: zero vector.
        let mixed = DensityMatrix::maximally_mixed(spin);
        let s = exact_stokes(&mixed, &observables).unwrap();
        assert!(s.s.norm() < 1e-12);
    }

    #[test]
    fn sharp_estimator_reads_pole_state_exactly() {
        let spin = Spin::from_two_j(1).unwrap();
        let ops = SpinOperators::build(spin);
        let observables = observables_from_gates(
            &SensitivityFunction::HardSign,
            &ops,
            &exact_analysis_gates(&ops),
        )
        .unwrap();
        let top = QuantumState::basis(spin, 1).unwrap();
        let s = exact_stokes(&top, &observables).unwrap();
        assert!((s.s - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_stokes_is_covariant_under_joint_rotation() {
        let spin = Spin::from_j(2.0).unwrap();
        let ops = SpinOperators::build(spin);
        let f = SensitivityFunction::ScaledTanh { width: 1.0 };
        let state = coherent_state(&ops, 0.8, 1.9).unwrap().density();
        let gates = exact_analysis_gates(&ops);
        let observables = observables_from_gates(&f, &ops, &gates).unwrap();
        let s_direct = exact_stokes(&state, &observables).unwrap();
        // Joint change of frame: rho -> V rho V†, U_k -> U_k V†.
        let gen = ops.linear_combination(&Vector3::new(0.3, -0.5, 0.81).normalize());
        let (values, vectors) = hermitian_eigen(&gen);
        let v = exp_neg_i_from_eigen(&values, &vectors, 0.77);
        let rho_rotated = state.conjugated(&v).unwrap();
        let vd = v.adjoint();
        let moved_gates = [&gates[0] * &vd, &gates[1] * &vd, &gates[2] * &vd];
        let moved = observables_from_gates(&f, &ops, &moved_gates).unwrap();
        let s_moved = exact_stokes(&rho_rotated, &moved).unwrap();
        assert!((s_direct.s - s_moved.s).norm() < 1e-10);
    }

    #[test]
    fn finite_shot_estimator_validates_records() {
        let mk = |label, plus| MeasurementRecord {
            label,
            shots: 100,
            count_plus: plus,
            count_minus: 100 - plus,
            seed: 0,
        };
        let s = estimate_stokes(&[mk(1, 75), mk(2, 50), mk(3, 10)]).unwrap();
        assert_abs_diff_eq!(s.s[0], 0.5);
        assert_abs_diff_eq!(s.s[1], 0.0);
        assert_abs_diff_eq!(s.s[2], -0.8);
        assert!(s.s.norm_squared() <= 3.0);
        assert!(estimate_stokes(&[mk(1, 1), mk(2, 2)]).is_err());
        assert!(estimate_stokes(&[mk(1, 1), mk(1, 2), mk(3, 3)]).is_err());
    }

    #[test]
    fn linearized_estimator_matches_two_term_expansion() {
        let spin = Spin::from_j(2.5).unwrap();
        let ops = SpinOperators::build(spin);
        let w = 2.0;
        let f = SensitivityFunction::ScaledTanh { width: w };
        // State supported on m = ±1/2 with population imbalance d.
        let mut amps = crate::linalg::CVector::zeros(spin.dim());
        amps[spin.row_of_two_m(1).unwrap()] = Complex64::new(0.9, 0.0);
        amps[spin.row_of_two_m(-1).unwrap()] = Complex64::new(0.43588989435406744, 0.0);
        let state = QuantumState::new(spin, amps).unwrap();
        let d = 0.9_f64.powi(2) - 0.43588989435406744_f64.powi(2);
        let gates = exact_analysis_gates(&ops);
        let lin = stokes_linearized(&state, &gates, &f, &ops).unwrap();
        // Exact third component: d * tanh(1/(2w)).
        let base = build_s3(&f, &ops).unwrap();
        let exact3 = state.expect(&effect_difference(&base));
        assert_abs_diff_eq!(exact3, d * (0.5 / w).tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(lin.stokes.s[2], d * 0.5 / w, epsilon = 1e-12);
        // Two-term expansion captures the gap to ~u^5 accuracy.
        let cubic = lin.cubic_correction[2];
        assert_abs_diff_eq!(cubic, -d / (24.0 * w.powi(3)), epsilon = 1e-12);
        assert!((lin.stokes.s[2] + cubic - exact3).abs() < 0.05 * cubic.abs());
        // Maximally mixed: all components vanish.
        let mixed = DensityMatrix::maximally_mixed(spin);
        let lin = stokes_linearized(&mixed, &gates, &f, &ops).unwrap();
        assert!(lin.stokes.s.norm() < 1e-12);
        // Hard sign has no slope: rejected.
        assert!(matches!(
            stokes_linearized(&state, &gates, &SensitivityFunction::HardSign, &ops),
            Err(Error::UndefinedSlope(_))
        ));
    }

    #[test]
    fn linearization_gap_grows_with_window_extent() {
        // At fixed width, states reaching farther out in m stress the
        // linearized readout more (the truncation in the series expansion).
        let spin = Spin::from_j(10.0).unwrap();
        let ops = SpinOperators::build(spin);
        let w = 4.0;
        let f = SensitivityFunction::ScaledTanh { width: w };
        let base = build_s3(&f, &ops).unwrap();
        let gates = exact_analysis_gates(&ops);
        let mut gaps = Vec::new();
        for two_m in [2_i64, 8, 14] {
            // Equal superposition of ±m.
            let mut amps = crate::linalg::CVector::zeros(spin.dim());
            amps[spin.row_of_two_m(two_m).unwrap()] = Complex64::new(0.8, 0.0);
            amps[spin.row_of_two_m(-two_m).unwrap()] = Complex64::new(0.6, 0.0);
            let state = QuantumState::new(spin, amps).unwrap();
            let exact = state.expect(&effect_difference(&base));
            let lin = stokes_linearized(&state, &gates, &f, &ops).unwrap();
            gaps.push((lin.stokes.s[2] - exact).abs());
        }
        assert!(gaps[0] < gaps[1] && gaps[1] < gaps[2], "gaps = {gaps:?}");
    }
}
