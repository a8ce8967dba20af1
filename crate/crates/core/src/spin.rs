//! Spin quantum numbers, angular-momentum matrices, states and window
//! projections.
//!
//! Basis convention: the `(2j + 1)`-dimensional representation is ordered by
//! descending magnetic number, `m = j, j - 1, ..., -j`, so row/column `0`
//! corresponds to `m = j`.  All magnetic numbers are stored as `2m` integers
//! so half-integer bookkeeping stays exact.

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, exp_neg_i_from_eigen, hermitian_eigen, require_hermitian, CMatrix, CVector,
};

/// Tolerance for treating a projection as having annihilated the state.
pub const ANNIHILATION_TOL: f64 = 1e-12;
/// Relative Hermiticity tolerance used when validating observables.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Spin magnitude `j`, stored exactly as `2j`.
///
/// Integer and half-odd-integer values are both accepted; `is_half_integer`
/// reports whether the levels `m = ±1/2` exist, which the qubit-level
/// interpretation of restricted tomography relies on.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Spin {
    two_j: u32,
}

impl Spin {
    /// Build from `2j`; requires `2j >= 1`.
    pub fn from_two_j(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidSpin("2j must be at least 1".into()));
        }
        Ok(Self { two_j })
    }

    /// Build from `j` as a float; `2j` must be within `1e-9` of a positive integer.
    pub fn from_j(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        let rounded = two_j.round();
        if !two_j.is_finite() || (two_j - rounded).abs() > 1e-9 || rounded < 1.0 || rounded > 1e6 {
            return Err(Error::InvalidSpin(format!(
                "j = {j} is not a positive half-integer"
            )));
        }
        Ok(Self {
            two_j: rounded as u32,
        })
    }

    /// The quantum number `j`.
    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    /// `2j` as an integer.
    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    /// Representation dimension `2j + 1`.
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Whether `j` is half-odd (so the levels `m = ±1/2` exist).
    pub fn is_half_integer(&self) -> bool {
        self.two_j % 2 == 1
    }

    /// Casimir eigenvalue `j (j + 1)`.
    pub fn casimir(&self) -> f64 {
        self.j() * (self.j() + 1.0)
    }

    /// `2m` for basis row `row` (row 0 is `m = j`).
    pub fn two_m_at(&self, row: usize) -> i64 {
        i64::from(self.two_j) - 2 * row as i64
    }

    /// `m` for basis row `row`.
    pub fn m_at(&self, row: usize) -> f64 {
        self.two_m_at(row) as f64 / 2.0
    }

    /// Basis row for a given `2m`, if it exists in this representation.
    pub fn row_of_two_m(&self, two_m: i64) -> Option<usize> {
        let two_j = i64::from(self.two_j);
        if two_m.abs() > two_j || (two_j - two_m) % 2 != 0 {
            return None;
        }
        Some(((two_j - two_m) / 2) as usize)
    }
}

/// The three Cartesian angular-momentum matrices plus ladder operators for a
/// fixed spin, in the descending-`m` basis.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    spin: Spin,
    /// `J1` (Hermitian).
    pub j1: CMatrix,
    /// `J2` (Hermitian).
    pub j2: CMatrix,
    /// `J3` (diagonal, descending `m`).
    pub j3: CMatrix,
    /// Raising operator `J+`.
    pub plus: CMatrix,
    /// Lowering operator `J- = (J+)^dagger`.
    pub minus: CMatrix,
}

impl SpinOperators {
    /// Build the matrices from the ladder coefficients
    /// `<m + 1|J+|m> = sqrt(j(j+1) - m(m+1))`.
    pub fn build(spin: Spin) -> Self {
        let n = spin.dim();
        let two_j = i64::from(spin.two_j());
        let mut plus = CMatrix::zeros(n, n);
        for row in 1..n {
            // Column `row` holds m = j - row; J+ sends it to row - 1 (m + 1).
            let two_m = spin.two_m_at(row);
            // j(j+1) - m(m+1) = [2j(2j+2) - 2m(2m+2)] / 4, exact in integers.
            let num = two_j * (two_j + 2) - two_m * (two_m + 2);
            debug_assert!(num >= 0 && num % 4 == 0);
            plus[(row - 1, row)] = Complex64::new(((num / 4) as f64).sqrt(), 0.0);
        }
        let minus = plus.adjoint();
        let j1 = (&plus + &minus).map(|z| z * 0.5);
        let j2 = (&plus - &minus).map(|z| z * Complex64::new(0.0, -0.5));
        let mut j3 = CMatrix::zeros(n, n);
        for row in 0..n {
            j3[(row, row)] = Complex64::new(spin.m_at(row), 0.0);
        }
        Self {
            spin,
            j1,
            j2,
            j3,
            plus,
            minus,
        }
    }

    /// Assemble from externally constructed Cartesian components (used by the
    /// two-mode boson realization); ladder operators are derived.
    pub(crate) fn from_components(spin: Spin, j1: CMatrix, j2: CMatrix, j3: CMatrix) -> Self {
        let plus = &j1 + &j2.map(|z| z * Complex64::new(0.0, 1.0));
        let minus = plus.adjoint();
        Self {
            spin,
            j1,
            j2,
            j3,
            plus,
            minus,
        }
    }

    /// The spin these operators represent.
    pub fn spin(&self) -> Spin {
        self.spin
    }

    /// Representation dimension.
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// Cartesian component by index `1..=3`.
    pub fn component(&self, k: usize) -> &CMatrix {
        match k {
            1 => &self.j1,
            2 => &self.j2,
            3 => &self.j3,
            _ => panic!("component index must be 1, 2 or 3"),
        }
    }

    /// Hermitian linear combination `c1 J1 + c2 J2 + c3 J3`.
    pub fn linear_combination(&self, c: &Vector3<f64>) -> CMatrix {
        let mut out = self.j1.map(|z| z * c[0]);
        out += self.j2.map(|z| z * c[1]);
        out += self.j3.map(|z| z * c[2]);
        out
    }

    /// `J1^2 + J2^2 + J3^2` (should equal `j(j+1) I`).
    pub fn casimir_matrix(&self) -> CMatrix {
        &self.j1 * &self.j1 + &self.j2 * &self.j2 + &self.j3 * &self.j3
    }
}

/// Normalized pure state of a fixed spin.
#[derive(Clone, Debug)]
pub struct QuantumState {
    spin: Spin,
    amplitudes: CVector,
}

impl QuantumState {
    /// Build from amplitudes (normalized internally; zero vectors are rejected).
    pub fn new(spin: Spin, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != spin.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} amplitudes for dimension {}",
                amplitudes.len(),
                spin.dim()
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm < 1e-150 {
            return Err(Error::InvalidState(
                "state amplitudes have zero or non-finite norm".into(),
            ));
        }
        Ok(Self {
            spin,
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    /// The basis state `|j, m>` specified by `2m`.
    pub fn basis(spin: Spin, two_m: i64) -> Result<Self> {
        let row = spin.row_of_two_m(two_m).ok_or_else(|| {
            Error::InvalidParameter(format!("2m = {two_m} not in the spectrum of 2j = {}", spin.two_j()))
        })?;
        let mut amplitudes = CVector::zeros(spin.dim());
        amplitudes[row] = Complex64::new(1.0, 0.0);
        Self::new(spin, amplitudes)
    }

    /// Equal superposition of the extremal levels, `(|j, j> + |j, -j>)/sqrt(2)`.
    ///
    /// This is the standard counterexample to window-confinement assumptions:
    /// its `J3` variance is `j^2` and no small window around `m = 0` retains
    /// any of its weight.
    pub fn cat(spin: Spin) -> Self {
        let mut amplitudes = CVector::zeros(spin.dim());
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amplitudes[0] = a;
        amplitudes[spin.dim() - 1] = a;
        Self { spin, amplitudes }
    }

    /// Spin of this state.
    pub fn spin(&self) -> Spin {
        self.spin
    }

    /// Amplitudes in the descending-`m` basis.
    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Occupation probability of basis row `row`.
    pub fn probability(&self, row: usize) -> f64 {
        self.amplitudes[row].norm_sqr()
    }

    /// Apply a (presumed unitary) matrix, renormalizing.
    pub fn apply(&self, u: &CMatrix) -> Result<Self> {
        if u.ncols() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, state has {} amplitudes",
                u.nrows(),
                u.ncols(),
                self.amplitudes.len()
            )));
        }
        Self::new(self.spin, u * &self.amplitudes)
    }

    /// `<psi| A |psi>` for Hermitian `A` (validated within [`HERMITICITY_TOL`]).
    pub fn expectation(&self, op: &CMatrix) -> Result<f64> {
        require_hermitian(op, HERMITICITY_TOL)?;
        Ok(self.expectation_unchecked(op))
    }

    /// `<psi| A |psi>` without the Hermiticity check (hot paths).
    pub fn expectation_unchecked(&self, op: &CMatrix) -> f64 {
        debug_assert_eq!(op.ncols(), self.amplitudes.len());
        let image = op * &self.amplitudes;
        self.amplitudes.dotc(&image).re
    }

    /// Variance `<A^2> - <A>^2` of a Hermitian observable.
    pub fn variance(&self, op: &CMatrix) -> Result<f64> {
        require_hermitian(op, HERMITICITY_TOL)?;
        let image = op * &self.amplitudes;
        let mean = self.amplitudes.dotc(&image).re;
        Ok((image.norm().powi(2) - mean * mean).max(0.0))
    }

    /// Density matrix `|psi><psi|`.
    pub fn density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix {
            spin: self.spin,
            matrix: m,
        }
    }
}

/// Density matrix of a fixed spin: Hermitian, unit trace, positive
/// semidefinite (all validated on construction within `1e-12`).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    spin: Spin,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(spin: Spin, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != spin.dim() || matrix.ncols() != spin.dim() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{}, expected {}",
                matrix.nrows(),
                matrix.ncols(),
                spin.dim()
            )));
        }
        require_hermitian(&matrix, HERMITICITY_TOL)?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let (values, _) = hermitian_eigen(&matrix);
        if values.iter().any(|&v| v < -1e-12) {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {:.3e}",
                values.min()
            )));
        }
        Ok(Self { spin, matrix })
    }

    /// Maximally mixed state `I / (2j + 1)`.
    pub fn maximally_mixed(spin: Spin) -> Self {
        let n = spin.dim();
        let m = linalg::identity(n) / Complex64::new(n as f64, 0.0);
        Self { spin, matrix: m }
    }

    /// Spin of this state.
    pub fn spin(&self) -> Spin {
        self.spin
    }

    /// Matrix entries.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Conjugate by a (presumed unitary) matrix: `U rho U^dagger`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        if u.ncols() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch(
                "conjugating unitary does not match density dimension".into(),
            ));
        }
        Ok(Self {
            spin: self.spin,
            matrix: u * &self.matrix * u.adjoint(),
        })
    }

    /// `Re tr(rho A)` for Hermitian `A` (validated).
    pub fn expectation(&self, op: &CMatrix) -> Result<f64> {
        require_hermitian(op, HERMITICITY_TOL)?;
        Ok(self.expectation_unchecked(op))
    }

    /// `Re tr(rho A)` without the Hermiticity check (hot paths).
    pub fn expectation_unchecked(&self, op: &CMatrix) -> f64 {
        linalg::trace_product_re(&self.matrix, op)
    }

    /// Variance `<A^2> - <A>^2` of a Hermitian observable.
    pub fn variance(&self, op: &CMatrix) -> Result<f64> {
        require_hermitian(op, HERMITICITY_TOL)?;
        let sq = op * op;
        let mean = self.expectation_unchecked(op);
        Ok((self.expectation_unchecked(&sq) - mean * mean).max(0.0))
    }
}

/// Anything that can produce expectation values of Hermitian observables.
pub trait ExpectationSource {
    /// Spin of the underlying state.
    fn source_spin(&self) -> Spin;
    /// `<A>` for Hermitian `A` (no validation; callers validate once).
    fn expect(&self, op: &CMatrix) -> f64;
}

impl ExpectationSource for QuantumState {
    fn source_spin(&self) -> Spin {
        self.spin
    }
    fn expect(&self, op: &CMatrix) -> f64 {
        self.expectation_unchecked(op)
    }
}

impl ExpectationSource for DensityMatrix {
    fn source_spin(&self) -> Spin {
        self.spin
    }
    fn expect(&self, op: &CMatrix) -> f64 {
        self.expectation_unchecked(op)
    }
}

/// Spin-coherent state pointing along the unit vector with polar angles
/// `(theta, phi)`: the rotated highest-weight state
/// `exp(-i theta (cos(phi) J2 - sin(phi) J1)) |j, j>`.
///
/// The generator is the Hermitian combination whose rotation carries `e3`
/// onto `n(theta, phi) = (sin t cos p, sin t sin p, cos t)`, so
/// `<J> = j n(theta, phi)` exactly and both transverse variances equal `j/2`.
pub fn coherent_state(ops: &SpinOperators, theta: f64, phi: f64) -> Result<QuantumState> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidParameter(
            "coherent-state angles must be finite".into(),
        ));
    }
    let axis = Vector3::new(-phi.sin(), phi.cos(), 0.0);
    let generator = ops.linear_combination(&axis);
    let (values, vectors) = hermitian_eigen(&generator);
    let u = exp_neg_i_from_eigen(&values, &vectors, theta);
    let mut amplitudes = CVector::zeros(ops.dim());
    for row in 0..ops.dim() {
        amplitudes[row] = u[(row, 0)];
    }
    QuantumState::new(ops.spin(), amplitudes)
}

/// Means, variances and the coherent-state comparison scale for all three
/// spin components.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FluctuationReport {
    /// Spin quantum number `j`.
    pub j: f64,
    /// `<J_k>` for `k = 1, 2, 3`.
    pub mean: [f64; 3],
    /// `Var(J_k)` for `k = 1, 2, 3`.
    pub variance: [f64; 3],
    /// `j / 2`: the transverse variance of any coherent state, the natural
    /// scale separating microscopic from macroscopic fluctuations.
    pub coherent_transverse_scale: f64,
}

/// Compute means and variances of `J1, J2, J3` for a pure or mixed state.
pub fn fluctuation_report<S: ExpectationSource>(ops: &SpinOperators, source: &S) -> Result<FluctuationReport> {
    if source.source_spin() != ops.spin() {
        return Err(Error::DimensionMismatch(
            "state and operators have different spins".into(),
        ));
    }
    let mut mean = [0.0; 3];
    let mut variance = [0.0; 3];
    for k in 0..3 {
        let op = ops.component(k + 1);
        let sq = op * op;
        mean[k] = source.expect(op);
        variance[k] = (source.expect(&sq) - mean[k] * mean[k]).max(0.0);
    }
    Ok(FluctuationReport {
        j: ops.spin().j(),
        mean,
        variance,
        coherent_transverse_scale: ops.spin().j() / 2.0,
    })
}

/// Symmetric magnetic-number window `|m| <= delta_m`, with `delta_m` stored
/// exactly as `2 delta_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceWindow {
    two_delta_m: u32,
}

impl SubspaceWindow {
    /// Window from `2 delta_m`.
    pub fn from_two_delta_m(two_delta_m: u32) -> Self {
        Self { two_delta_m }
    }

    /// Window from `delta_m` as a float (must be a non-negative half-integer).
    pub fn from_delta_m(delta_m: f64) -> Result<Self> {
        let two = 2.0 * delta_m;
        let rounded = two.round();
        if !two.is_finite() || (two - rounded).abs() > 1e-9 || rounded < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta_m = {delta_m} is not a non-negative half-integer"
            )));
        }
        Ok(Self {
            two_delta_m: rounded as u32,
        })
    }

    /// Default tomography window `delta_m = ceil(2 sqrt(j))`, wide enough to
    /// retain essentially all of a near-equatorial coherent state.
    pub fn default_for(spin: Spin) -> Self {
        let delta_m = (2.0 * spin.j().sqrt()).ceil();
        Self {
            two_delta_m: (2.0 * delta_m) as u32,
        }
    }

    /// `delta_m` as a float.
    pub fn delta_m(&self) -> f64 {
        f64::from(self.two_delta_m) / 2.0
    }

    /// Whether the level with magnetic number `2m` lies inside the window.
    pub fn contains_two_m(&self, two_m: i64) -> bool {
        two_m.abs() <= i64::from(self.two_delta_m)
    }

    /// Basis rows of `spin` inside the window (may be empty for a narrow
    /// window on a half-odd spin, where `m = 0` does not exist).
    pub fn rows_for(&self, spin: Spin) -> Vec<usize> {
        (0..spin.dim())
            .filter(|&row| self.contains_two_m(spin.two_m_at(row)))
            .collect()
    }
}

/// Result of projecting a state onto a window.
#[derive(Clone, Debug)]
pub struct WindowProjection {
    /// Renormalized post-projection state.
    pub state: QuantumState,
    /// Probability weight removed by the projection.
    pub discarded_weight: f64,
    /// Whether the discarded weight exceeded the caller's reporting threshold.
    pub exceeds_threshold: bool,
    /// The reporting threshold used.
    pub threshold: f64,
}

/// Project a pure state onto the window `|m| <= delta_m` and renormalize.
///
/// Errors if the window holds no basis state of this spin, or if the
/// projection discards more than `1 - 1e-12` of the weight (annihilation).
/// `threshold` only controls the `exceeds_threshold` flag used by diagnostic
/// reports; it does not cause an error.
pub fn project_window(
    state: &QuantumState,
    window: SubspaceWindow,
    threshold: f64,
) -> Result<WindowProjection> {
    let spin = state.spin();
    let rows = window.rows_for(spin);
    if rows.is_empty() {
        return Err(Error::EmptyWindow(format!(
            "window |m| <= {} holds no level of spin j = {}",
            window.delta_m(),
            spin.j()
        )));
    }
    let mut kept = CVector::zeros(spin.dim());
    let mut kept_weight = 0.0;
    for &row in &rows {
        kept[row] = state.amplitudes()[row];
        kept_weight += state.probability(row);
    }
    let discarded = (1.0 - kept_weight).clamp(0.0, 1.0);
    if discarded > 1.0 - ANNIHILATION_TOL {
        return Err(Error::WindowAnnihilation { discarded });
    }
    Ok(WindowProjection {
        state: QuantumState::new(spin, kept)?,
        discarded_weight: discarded,
        exceeds_threshold: discarded > threshold,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, identity, max_abs, C_I};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn algebra_residual(ops: &SpinOperators) -> f64 {
        // [J1, J2] = i J3 and cyclic permutations.
        let r12 = max_abs(&(commutator(&ops.j1, &ops.j2) - ops.j3.map(|z| z * C_I)));
        let r23 = max_abs(&(commutator(&ops.j2, &ops.j3) - ops.j1.map(|z| z * C_I)));
        let r31 = max_abs(&(commutator(&ops.j3, &ops.j1) - ops.j2.map(|z| z * C_I)));
        r12.max(r23).max(r31)
    }

    #[test]
    fn spin_half_matches_pauli_over_two() {
        let ops = SpinOperators::build(Spin::from_two_j(1).unwrap());
        assert_abs_diff_eq!(ops.j3[(0, 0)].re, 0.5);
        assert_abs_diff_eq!(ops.j3[(1, 1)].re, -0.5);
        assert_abs_diff_eq!(ops.j1[(0, 1)].re, 0.5);
        assert_abs_diff_eq!(ops.j2[(0, 1)].im, -0.5);
        assert_abs_diff_eq!(ops.plus[(0, 1)].re, 1.0);
    }

    #[test]
    fn ladder_coefficients_at_three_halves() {
        // <m+1|J+|m> = sqrt(j(j+1) - m(m+1)) for j = 3/2:
        // m = 1/2 -> sqrt(15/4 - 3/4) = sqrt(3); m = -1/2 -> 2; m = -3/2 -> sqrt(3).
        let ops = SpinOperators::build(Spin::from_two_j(3).unwrap());
        assert_abs_diff_eq!(ops.plus[(0, 1)].re, 3.0_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(ops.plus[(1, 2)].re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ops.plus[(2, 3)].re, 3.0_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn commutators_and_casimir_hold_across_spins() {
        for two_j in [1_u32, 2, 3, 50, 51, 101] {
            let spin = Spin::from_two_j(two_j).unwrap();
            let ops = SpinOperators::build(spin);
            assert!(
                algebra_residual(&ops) < 1e-10,
                "commutator residual too large at 2j = {two_j}"
            );
            let casimir = ops.casimir_matrix();
            let expected = identity(spin.dim()).map(|z| z * spin.casimir());
            assert!(
                max_abs(&(casimir - expected)) < 1e-10,
                "Casimir deviates at 2j = {two_j}"
            );
            assert!(max_abs(&(ops.plus.adjoint() - ops.minus.clone())) < 1e-15);
        }
    }

    #[test]
    fn coherent_state_mean_is_j_times_direction() {
        let spin = Spin::from_j(10.0).unwrap();
        let ops = SpinOperators::build(spin);
        for (theta, phi) in [
            (0.0, 0.0),
            (FRAC_PI_2, 0.0),
            (FRAC_PI_2, 1.1),
            (PI / 4.0, -2.3),
            (2.7, 0.4),
        ] {
            let state = coherent_state(&ops, theta, phi).unwrap();
            let n = Vector3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            );
            for k in 1..=3 {
                assert_abs_diff_eq!(
                    state.expectation(ops.component(k)).unwrap(),
                    spin.j() * n[k - 1],
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn coherent_state_transverse_variances_are_j_over_two() {
        let spin = Spin::from_j(10.0).unwrap();
        let ops = SpinOperators::build(spin);
        let state = coherent_state(&ops, FRAC_PI_2, 0.0).unwrap();
        // Pointing along e1: J2 and J3 are transverse, J1 longitudinal.
        assert_abs_diff_eq!(state.variance(&ops.j2).unwrap(), 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(state.variance(&ops.j3).unwrap(), 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(state.variance(&ops.j1).unwrap(), 0.0, epsilon = 1e-9);
        // General direction: every variance is at most j/2.
        let tilted = coherent_state(&ops, 1.234, 0.567).unwrap();
        for k in 1..=3 {
            assert!(tilted.variance(ops.component(k)).unwrap() <= 5.0 + 1e-9);
        }
    }

    #[test]
    fn coherent_state_at_zero_angle_is_highest_weight() {
        let spin = Spin::from_j(4.5).unwrap();
        let ops = SpinOperators::build(spin);
        let state = coherent_state(&ops, 0.0, 0.3).unwrap();
        assert_abs_diff_eq!(state.probability(0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_state_probabilities_match_binomial_oracle() {
        // Independent route: |<j,m | theta>|^2 = C(2j, j+m) cos^(2(j+m))(t/2) sin^(2(j-m))(t/2).
        let spin = Spin::from_j(10.0).unwrap();
        let ops = SpinOperators::build(spin);
        let theta = FRAC_PI_3;
        let state = coherent_state(&ops, theta, 0.77).unwrap();
        let (c2, s2) = ((theta / 2.0).cos().powi(2), (theta / 2.0).sin().powi(2));
        let mut choose = 1.0_f64; // C(2j, 2j) for row 0 (m = j)
        for row in 0..spin.dim() {
            let jp = spin.j() + spin.m_at(row); // j + m
            let jm = spin.j() - spin.m_at(row); // j - m
            let expected = choose * c2.powf(jp) * s2.powf(jm);
            assert_abs_diff_eq!(state.probability(row), expected, epsilon = 1e-10);
            // Update C(2j, j+m) -> C(2j, j+m-1): multiply by (j+m)/(j-m+1).
            choose *= jp / (jm + 1.0);
        }
    }

    #[test]
    fn maximally_mixed_spin_one_has_known_j3_variance() {
        let spin = Spin::from_j(1.0).unwrap();
        let ops = SpinOperators::build(spin);
        let rho = DensityMatrix::maximally_mixed(spin);
        // <J3^2> = (1 + 0 + 1)/3 = 2/3, <J3> = 0.
        assert_abs_diff_eq!(rho.variance(&ops.j3).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        let report = fluctuation_report(&ops, &rho).unwrap();
        assert_abs_diff_eq!(report.variance[2], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.coherent_transverse_scale, 0.5);
    }

    #[test]
    fn cat_state_has_macroscopic_j3_variance() {
        let spin = Spin::from_j(5.0).unwrap();
        let ops = SpinOperators::build(spin);
        let cat = QuantumState::cat(spin);
        let report = fluctuation_report(&ops, &cat).unwrap();
        assert_abs_diff_eq!(report.mean[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.variance[2], 25.0, epsilon = 1e-12);
    }

    #[test]
    fn window_projection_weight_matches_binomial_tail_oracle() {
        // Equatorial coherent state at j = 50; window |m| <= 7 keeps the
        // central binomial mass. Frozen from the exact tail sum
        // 2 * sum_{k=58}^{100} C(100, k) / 2^100.
        let spin = Spin::from_j(50.0).unwrap();
        let ops = SpinOperators::build(spin);
        let state = coherent_state(&ops, FRAC_PI_2, 0.0).unwrap();
        let window = SubspaceWindow::from_delta_m(7.0).unwrap();
        let proj = project_window(&state, window, 0.05).unwrap();
        assert_abs_diff_eq!(proj.discarded_weight, 0.13321061920721333, epsilon = 1e-9);
        assert!(proj.exceeds_threshold);
        // The default window ceil(2 sqrt(50)) = 15 retains all but ~0.18%.
        let default = SubspaceWindow::default_for(spin);
        assert_abs_diff_eq!(default.delta_m(), 15.0);
        let proj = project_window(&state, default, 0.05).unwrap();
        assert_abs_diff_eq!(proj.discarded_weight, 0.0017899303914868526, epsilon = 1e-9);
        assert!(!proj.exceeds_threshold);
    }

    #[test]
    fn window_projection_annihilates_cat_state() {
        let spin = Spin::from_j(5.0).unwrap();
        let cat = QuantumState::cat(spin);
        let window = SubspaceWindow::from_delta_m(2.0).unwrap();
        match project_window(&cat, window, 0.05) {
            Err(Error::WindowAnnihilation { discarded }) => {
                assert!(discarded > 1.0 - ANNIHILATION_TOL)
            }
            other => panic!("expected annihilation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_window_is_rejected() {
        // delta_m = 0 on a half-odd spin holds no level.
        let spin = Spin::from_j(2.5).unwrap();
        let ops = SpinOperators::build(spin);
        let state = coherent_state(&ops, 1.0, 0.0).unwrap();
        let window = SubspaceWindow::from_two_delta_m(0);
        assert!(matches!(
            project_window(&state, window, 0.05),
            Err(Error::EmptyWindow(_))
        ));
    }

    #[test]
    fn invalid_spins_are_rejected() {
        assert!(Spin::from_j(0.0).is_err());
        assert!(Spin::from_j(0.3).is_err());
        assert!(Spin::from_j(-1.0).is_err());
        assert!(Spin::from_j(2.5).is_ok());
    }
}
