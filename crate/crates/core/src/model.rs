//! Model Hamiltonians: the static quadratic form `Ω J3² + Δ J3 + Γ J1`,
//! piecewise-constant control pulses, and the three physical presets
//! (Rydberg-like level ladder, Cooper-pair box, two-mode condensate) that
//! realize it, including an exact-vs-spin-form comparison for the
//! charge-basis model.

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::spin::{Spin, SpinOperators};

/// Coefficients of the static Hamiltonian `H = Ω J3² + Δ J3 + Γ J1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticModelParams {
    /// Coefficient of `J3²` (quadratic anharmonicity).
    pub omega: f64,
    /// Coefficient of `J3` (linear level splitting).
    pub delta: f64,
    /// Coefficient of `J1` (static transverse coupling).
    pub gamma: f64,
}

impl StaticModelParams {
    /// Purely linear splitting `Δ J3`.
    pub fn linear(delta: f64) -> Self {
        Self {
            omega: 0.0,
            delta,
            gamma: 0.0,
        }
    }

    /// Reject non-finite coefficients.
    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.delta.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(
                "static model coefficients must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Assemble the Hermitian matrix `Ω J3² + Δ J3 + Γ J1`.
    pub fn matrix(&self, ops: &SpinOperators) -> Result<CMatrix> {
        self.validate()?;
        let mut h = (&ops.j3 * &ops.j3).map(|z| z * self.omega);
        h += ops.j3.map(|z| z * self.delta);
        h += ops.j1.map(|z| z * self.gamma);
        Ok(h)
    }
}

/// Subset of the control channels `{1, 2, 3}` (couplings to `J1`, `J2`, `J3`).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct ChannelSet {
    mask: u8,
}

impl ChannelSet {
    /// Build from channel indices in `1..=3`.
    pub fn from_channels(channels: &[u8]) -> Result<Self> {
        let mut mask = 0u8;
        for &k in channels {
            if !(1..=3).contains(&k) {
                return Err(Error::InvalidParameter(format!(
                    "control channel {k} outside 1..=3"
                )));
            }
            mask |= 1 << (k - 1);
        }
        Ok(Self { mask })
    }

    /// All three channels.
    pub fn all() -> Self {
        Self { mask: 0b111 }
    }

    /// Whether channel `k` (1-based) is allowed.
    pub fn contains(&self, k: u8) -> bool {
        (1..=3).contains(&k) && self.mask & (1 << (k - 1)) != 0
    }

    /// Allowed channels in ascending order.
    pub fn channels(&self) -> Vec<u8> {
        (1..=3).filter(|&k| self.contains(k)).collect()
    }

    /// Number of allowed channels.
    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// Whether no channel is allowed.
    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }
}

impl TryFrom<Vec<u8>> for ChannelSet {
    type Error = Error;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        Self::from_channels(&v)
    }
}

impl From<ChannelSet> for Vec<u8> {
    fn from(s: ChannelSet) -> Self {
        s.channels()
    }
}

/// One piecewise-constant pulse segment: field amplitudes `(h1, h2, h3)`
/// applied for `duration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    /// Segment length (must be positive).
    pub duration: f64,
    /// Amplitude on channel 1 (`J1`).
    pub h1: f64,
    /// Amplitude on channel 2 (`J2`).
    pub h2: f64,
    /// Amplitude on channel 3 (`J3`).
    pub h3: f64,
}

impl PulseSegment {
    /// Field vector `(h1, h2, h3)`.
    pub fn field(&self) -> Vector3<f64> {
        Vector3::new(self.h1, self.h2, self.h3)
    }

    fn amplitude(&self, k: u8) -> f64 {
        match k {
            1 => self.h1,
            2 => self.h2,
            3 => self.h3,
            _ => 0.0,
        }
    }
}

/// Piecewise-constant control pulse `H_c(t) = Σ_k h_k(t) J_k`, anchored at
/// `t = 0`; the field is zero outside `[0, total_duration)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ControlPulseRepr", into = "ControlPulseRepr")]
pub struct ControlPulse {
    segments: Vec<PulseSegment>,
    allowed_channels: ChannelSet,
    boundaries: Vec<f64>,
}

/// Serialized form of [`ControlPulse`] (boundaries are derived, not stored).
#[derive(Serialize, Deserialize)]
struct ControlPulseRepr {
    segments: Vec<PulseSegment>,
    allowed_channels: ChannelSet,
}

impl TryFrom<ControlPulseRepr> for ControlPulse {
    type Error = Error;
    fn try_from(repr: ControlPulseRepr) -> Result<Self> {
        Self::new(repr.segments, repr.allowed_channels)
    }
}

impl From<ControlPulse> for ControlPulseRepr {
    fn from(p: ControlPulse) -> Self {
        Self {
            segments: p.segments,
            allowed_channels: p.allowed_channels,
        }
    }
}

impl ControlPulse {
    /// Validating constructor: every duration must be positive and finite,
    /// and every amplitude on a disallowed channel must be exactly zero.
    pub fn new(segments: Vec<PulseSegment>, allowed_channels: ChannelSet) -> Result<Self> {
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.duration.is_finite() && seg.duration > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "segment {i} has non-positive duration {}",
                    seg.duration
                )));
            }
            if !(seg.h1.is_finite() && seg.h2.is_finite() && seg.h3.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "segment {i} has non-finite amplitudes"
                )));
            }
            for k in 1..=3u8 {
                if !allowed_channels.contains(k) && seg.amplitude(k) != 0.0 {
                    return Err(Error::InfeasibleChannels(format!(
                        "segment {i} drives channel {k}, which is not in the allowed set {:?}",
                        allowed_channels.channels()
                    )));
                }
            }
        }
        let mut boundaries = Vec::with_capacity(segments.len() + 1);
        let mut t = 0.0;
        boundaries.push(t);
        for seg in &segments {
            t += seg.duration;
            boundaries.push(t);
        }
        Ok(Self {
            segments,
            allowed_channels,
            boundaries,
        })
    }

    /// The zero pulse (no segments).
    pub fn empty(allowed_channels: ChannelSet) -> Self {
        Self {
            segments: Vec::new(),
            allowed_channels,
            boundaries: vec![0.0],
        }
    }

    /// Segments in order.
    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    /// The allowed channel set.
    pub fn allowed_channels(&self) -> ChannelSet {
        self.allowed_channels
    }

    /// Total duration (0 for the empty pulse).
    pub fn total_duration(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    /// Cumulative segment boundaries `0 = t_0 < t_1 < ... < t_n = total`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Field vector at time `t`; zero outside `[0, total_duration)`.
    pub fn field_at(&self, t: f64) -> Vector3<f64> {
        if self.segments.is_empty() || t < 0.0 || t >= self.total_duration() {
            return Vector3::zeros();
        }
        // partition_point returns the first boundary > t; boundary 0 is 0 <= t.
        let idx = self.boundaries.partition_point(|&b| b <= t) - 1;
        self.segments[idx.min(self.segments.len() - 1)].field()
    }

    /// Control matrix `Σ_k h_k(t) J_k` at time `t` (zero outside support).
    pub fn matrix_at(&self, t: f64, ops: &SpinOperators) -> CMatrix {
        ops.linear_combination(&self.field_at(t))
    }
}

// ---------------------------------------------------------------------------
// Rydberg-like ladder preset
// ---------------------------------------------------------------------------

/// Highly excited hydrogen-like ladder around a reference level `n0`,
/// with binding energies `-R / (n - δ)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RydbergPreset {
    /// Binding-energy constant `R`.
    pub rydberg_constant: f64,
    /// Reference principal quantum number (large).
    pub n0: u32,
    /// Quantum defect `δ` shifting the effective quantum number.
    pub quantum_defect: f64,
}

/// A physical preset reduced to the static spin form, with its control
/// channel restriction and spin magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinModelRealization {
    /// Static coefficients of `Ω J3² + Δ J3 + Γ J1`.
    pub params: StaticModelParams,
    /// Channels physically available for driving.
    pub allowed_channels: ChannelSet,
    /// Spin magnitude of the realization.
    pub spin: Spin,
}

impl SpinModelRealization {
    /// Assemble the Hamiltonian matrix (operators must match `self.spin`).
    pub fn matrix(&self, ops: &SpinOperators) -> Result<CMatrix> {
        if ops.spin() != self.spin {
            return Err(Error::DimensionMismatch(format!(
                "operators built for j = {}, realization expects j = {}",
                ops.spin().j(),
                self.spin.j()
            )));
        }
        self.params.matrix(ops)
    }
}

/// Rydberg ladder reduced to the spin form, with the quadratic-expansion
/// bookkeeping made explicit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RydbergRealization {
    /// Spin-form model: `Δ = 2R/(n0-δ)³`, `Ω = -3Δ/(n0-δ)`, `Γ = 0`,
    /// `j = n0 + 1/2`, dipole-driven channels `{1, 2}`.
    pub model: SpinModelRealization,
    /// Ignorable additive constant absorbed when re-centering the level
    /// index on the half-integer grid `m = n - n0 - 1/2`:
    /// `-R/(n0-δ)² + Δ/2 + Ω/4`.
    pub constant_shift: f64,
    /// Residual linear-in-`m` coefficient (equal to `Ω`, a relative
    /// `O(1/(n0-δ))` correction to `Δ`) dropped by the same re-centering.
    pub dropped_linear_coefficient: f64,
}

/// Reduce a Rydberg-like preset to spin form.
///
/// Quadratic expansion of the level energies about the reference level,
/// re-centered on `m = n - n0 - 1/2`, with `j = n0 + 1/2` so that the
/// ionization split `n ≥ n0 + 1` vs `n ≤ n0` becomes `sign(m)`.  Dipole
/// selection rules leave only the ladder-coupling channels `{1, 2}`.
pub fn rydberg_realization(preset: &RydbergPreset) -> Result<RydbergRealization> {
    let nu0 = f64::from(preset.n0) - preset.quantum_defect;
    if !(preset.rydberg_constant.is_finite() && preset.quantum_defect.is_finite()) {
        return Err(Error::InvalidParameter(
            "Rydberg preset parameters must be finite".into(),
        ));
    }
    if preset.n0 < 2 {
        return Err(Error::InvalidParameter(
            "Rydberg reference level n0 must be at least 2".into(),
        ));
    }
    if nu0 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "effective quantum number n0 - δ = {nu0} must be positive"
        )));
    }
    let delta = 2.0 * preset.rydberg_constant / nu0.powi(3);
    let omega = -3.0 * delta / nu0;
    let params = StaticModelParams {
        omega,
        delta,
        gamma: 0.0,
    };
    let spin = Spin::from_two_j(2 * preset.n0 + 1)?;
    Ok(RydbergRealization {
        model: SpinModelRealization {
            params,
            allowed_channels: ChannelSet::from_channels(&[1, 2])?,
            spin,
        },
        constant_shift: -preset.rydberg_constant / (nu0 * nu0) + delta / 2.0 + omega / 4.0,
        dropped_linear_coefficient: omega,
    })
}

// ---------------------------------------------------------------------------
// Cooper-pair box preset
// ---------------------------------------------------------------------------

/// Superconducting island at its charge-degeneracy point: Coulomb charging
/// scale `E_C` and Josephson tunneling `E_J`, with `n0` Cooper pairs on the
/// island at reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CooperPairBoxPreset {
    /// Charging energy `E_C` (> 0).
    pub charging_energy: f64,
    /// Josephson tunneling energy `E_J` (>= 0).
    pub josephson_energy: f64,
    /// Reference Cooper-pair number (large).
    pub n0: u32,
}

impl CooperPairBoxPreset {
    fn validate(&self) -> Result<()> {
        if !(self.charging_energy.is_finite() && self.charging_energy > 0.0) {
            return Err(Error::InvalidParameter(
                "charging energy must be positive and finite".into(),
            ));
        }
        if !(self.josephson_energy.is_finite() && self.josephson_energy >= 0.0) {
            return Err(Error::InvalidParameter(
                "Josephson energy must be non-negative and finite".into(),
            ));
        }
        if self.n0 < 1 {
            return Err(Error::InvalidParameter(
                "reference pair number n0 must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Spin magnitude of the spin-form realization, `j = n0 + 1/2`.
    pub fn spin(&self) -> Result<Spin> {
        Spin::from_two_j(2 * self.n0 + 1)
    }
}

/// Exact charge-basis Hamiltonian on a truncated pair-number window,
/// ordered by descending `n` so that rows align with the descending-`m`
/// spin basis under `m = n - n0 - 1/2`.
#[derive(Clone, Debug)]
pub struct ChargeHamiltonian {
    /// Tridiagonal matrix: diagonal `E_C (n - n0 - 1/2)²`, off-diagonal `-E_J`.
    pub matrix: CMatrix,
    /// Smallest pair number in the window.
    pub n_min: u32,
    /// Largest pair number in the window.
    pub n_max: u32,
    /// Reference pair number.
    pub n0: u32,
}

impl ChargeHamiltonian {
    /// Dimension of the truncated basis.
    pub fn dim(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    /// Pair number of basis row `row` (row 0 is `n_max`).
    pub fn n_at(&self, row: usize) -> u32 {
        self.n_max - row as u32
    }

    /// Identified magnetic number `2m = 2(n - n0) - 1` of basis row `row`.
    pub fn two_m_at(&self, row: usize) -> i64 {
        2 * (i64::from(self.n_at(row)) - i64::from(self.n0)) - 1
    }
}

/// Default charge-window half-width: `min(ceil(4 sqrt(j)), n0)`, wide enough
/// to cover the low-energy support with margin while respecting `n >= 0`.
pub fn default_charge_window(preset: &CooperPairBoxPreset) -> Result<u32> {
    let spin = preset.spin()?;
    let w = (4.0 * spin.j().sqrt()).ceil() as u32;
    Ok(w.min(preset.n0))
}

/// Exact charge-basis Hamiltonian on the window `n ∈ [n0 - W, n0 + W + 1]`
/// (dimension `2W + 2`, symmetric about the degeneracy point `n0 + 1/2`).
pub fn cpb_charge_hamiltonian(
    preset: &CooperPairBoxPreset,
    window_half_width: u32,
) -> Result<ChargeHamiltonian> {
    preset.validate()?;
    let w = window_half_width;
    if w < 1 {
        return Err(Error::InvalidParameter(
            "charge window half-width must be at least 1".into(),
        ));
    }
    if w > preset.n0 {
        return Err(Error::InvalidParameter(format!(
            "charge window half-width {w} extends below n = 0 for n0 = {}",
            preset.n0
        )));
    }
    let n_min = preset.n0 - w;
    let n_max = preset.n0 + w + 1;
    let dim = (n_max - n_min + 1) as usize;
    let mut matrix = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let n = f64::from(n_max - row as u32);
        let x = n - f64::from(preset.n0) - 0.5;
        matrix[(row, row)] = Complex64::new(preset.charging_energy * x * x, 0.0);
        if row + 1 < dim {
            matrix[(row, row + 1)] = Complex64::new(-preset.josephson_energy, 0.0);
            matrix[(row + 1, row)] = Complex64::new(-preset.josephson_energy, 0.0);
        }
    }
    Ok(ChargeHamiltonian {
        matrix,
        n_min,
        n_max,
        n0: preset.n0,
    })
}

/// Spin-form realization of the Cooper-pair box:
/// `H = E_C J3² - (E_J / j) J1` with `j = n0 + 1/2`; drives couple through
/// the island charge, leaving channels `{2, 3}`.
pub fn cpb_spin_realization(preset: &CooperPairBoxPreset) -> Result<SpinModelRealization> {
    preset.validate()?;
    let spin = preset.spin()?;
    Ok(SpinModelRealization {
        params: StaticModelParams {
            omega: preset.charging_energy,
            delta: 0.0,
            gamma: -preset.josephson_energy / spin.j(),
        },
        allowed_channels: ChannelSet::from_channels(&[2, 3])?,
        spin,
    })
}

/// Quantitative comparison between the exact charge-basis Hamiltonian and
/// its spin-form counterpart under the identification `m = n - n0 - 1/2`.
///
/// The diagonal parts agree exactly.  The off-diagonal parts do not: the
/// spin form's nearest-neighbour element near the band center is
/// `-(E_J/2)(1 + 1/(2j))`, approaching `-E_J/2` as `j` grows, while the
/// charge basis has `-E_J` — a structural factor of two that this report
/// quantifies rather than corrects (see the `tunneling_element_*` fields).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChargeSpinComparison {
    /// Spin magnitude `j = n0 + 1/2`.
    pub j: f64,
    /// Window half-width used for the comparison.
    pub window_half_width: u32,
    /// Max |charge − spin| matrix-element deviation over the shared window.
    pub max_matrix_deviation: f64,
    /// |lowest eigenvalues(charge) − lowest eigenvalues(spin window)|.
    pub low_eigenvalue_deviations: [f64; 4],
    /// Charge-basis nearest-neighbour tunneling element (`-E_J`).
    pub tunneling_element_charge: f64,
    /// Spin-form tunneling element at the band center (`m = ∓1/2`).
    pub tunneling_element_spin_center: f64,
    /// Large-`j` limit of the spin-form center element (`-E_J/2`).
    pub tunneling_element_large_j_limit: f64,
    /// Max deviation of spin-form off-diagonals from the large-`j` limit
    /// over the central window `|m| <= sqrt(j)`; shrinks as `E_J/(4j)`.
    pub offdiag_deviation_vs_limit: f64,
    /// Max deviation of spin-form off-diagonals from the charge-basis value
    /// over the same central window; stays near `E_J/2` (the factor of two).
    pub offdiag_deviation_vs_charge: f64,
}

/// Compare the exact charge-basis Hamiltonian with the spin form on a
/// shared window (see [`ChargeSpinComparison`]).
pub fn compare_charge_vs_spin(
    preset: &CooperPairBoxPreset,
    window_half_width: u32,
) -> Result<ChargeSpinComparison> {
    let charge = cpb_charge_hamiltonian(preset, window_half_width)?;
    let realization = cpb_spin_realization(preset)?;
    let spin = realization.spin;
    let ops = SpinOperators::build(spin);
    let h_spin = realization.matrix(&ops)?;

    // Rows of the spin matrix matching the charge window, in the same
    // descending order: 2m runs over odd integers in [-(2W+1), 2W+1].
    let rows: Vec<usize> = (0..spin.dim())
        .filter(|&r| spin.two_m_at(r).abs() <= 2 * i64::from(window_half_width) + 1)
        .collect();
    let dim = rows.len();
    if dim != charge.dim() {
        return Err(Error::DimensionMismatch(format!(
            "charge window has {} levels, spin window has {dim}",
            charge.dim()
        )));
    }
    let mut h_spin_window = CMatrix::zeros(dim, dim);
    let mut max_dev = 0.0_f64;
    for (a, &ra) in rows.iter().enumerate() {
        for (b, &rb) in rows.iter().enumerate() {
            h_spin_window[(a, b)] = h_spin[(ra, rb)];
            max_dev = max_dev.max((charge.matrix[(a, b)] - h_spin[(ra, rb)]).norm());
        }
    }

    let (ev_charge, _) = hermitian_eigen(&charge.matrix);
    let (ev_spin, _) = hermitian_eigen(&h_spin_window);
    let mut low_eigenvalue_deviations = [0.0; 4];
    for (k, dev) in low_eigenvalue_deviations.iter_mut().enumerate() {
        if k < dim {
            *dev = (ev_charge[k] - ev_spin[k]).abs();
        }
    }

    // Spin off-diagonal elements over the central window |m| <= sqrt(j).
    let e_j = preset.josephson_energy;
    let limit = -e_j / 2.0;
    let mut vs_limit = 0.0_f64;
    let mut vs_charge = 0.0_f64;
    for r in 0..spin.dim() - 1 {
        let m_hi = spin.m_at(r);
        let m_lo = spin.m_at(r + 1);
        if m_hi.abs() <= spin.j().sqrt() && m_lo.abs() <= spin.j().sqrt() {
            let elem = h_spin[(r, r + 1)].re;
            vs_limit = vs_limit.max((elem - limit).abs());
            vs_charge = vs_charge.max((elem + e_j).abs());
        }
    }

    // Center element couples m = +1/2 to m = -1/2 (present since j is
    // half-odd): -(E_J/2)(1 + 1/(2j)).
    let center_row = spin.row_of_two_m(1).expect("j = n0 + 1/2 is half-odd");
    let center = h_spin[(center_row, center_row + 1)].re;

    Ok(ChargeSpinComparison {
        j: spin.j(),
        window_half_width,
        max_matrix_deviation: max_dev,
        low_eigenvalue_deviations,
        tunneling_element_charge: -e_j,
        tunneling_element_spin_center: center,
        tunneling_element_large_j_limit: limit,
        offdiag_deviation_vs_limit: vs_limit,
        offdiag_deviation_vs_charge: vs_charge,
    })
}

// ---------------------------------------------------------------------------
// Two-mode condensate preset
// ---------------------------------------------------------------------------

/// `N` bosons in a double well: charging-like interaction scale and
/// Josephson-like tunneling scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BECPreset {
    /// Total atom number (>= 2).
    pub atom_number: u32,
    /// Coefficient of the population-imbalance term (`J3²`).
    pub charging_scale: f64,
    /// Tunneling scale; enters as `-(tunneling/j) J1`.
    pub tunneling_scale: f64,
}

/// Collective spin operators realized on the fixed-`N` two-mode Fock sector.
#[derive(Clone, Debug)]
pub struct SchwingerRealization {
    /// The operators; entry-identical to [`SpinOperators::build`] at `j = N/2`.
    pub ops: SpinOperators,
    /// Constructive spin magnitude `j = N/2` (sector dimension `N + 1`).
    pub j: f64,
    /// Alternative labeling `floor(N/2) + 1/2` sometimes quoted for this
    /// system; recorded for reference only — the sector dimension fixes
    /// `j = N/2`.
    pub alternative_half_integer_j: f64,
}

/// Build collective spin operators from two bosonic modes at fixed total
/// number `N`: with mode occupations `(n_a, n_b = N - n_a)`,
/// `J3 = (a†a - b†b)/2` and `J+ = a†b` (so `J2 = -i(a†b - b†a)/2`, making
/// the triple right-handed: `[J1, J2] = +i J3`).  Basis rows are ordered by
/// descending `n_a`, which is exactly the descending-`m` spin order, so the
/// matrices are entry-identical to the directly built ladder operators at
/// `j = N/2`.
pub fn schwinger_map(atom_number: u32) -> Result<SchwingerRealization> {
    if atom_number < 1 {
        return Err(Error::InvalidParameter(
            "two-mode sector needs at least one particle".into(),
        ));
    }
    let n = atom_number;
    let dim = n as usize + 1;
    let spin = Spin::from_two_j(n)?;
    // Row r holds |n_a = N - r, n_b = r>;  m = (n_a - n_b)/2 = N/2 - r.
    let mut plus = CMatrix::zeros(dim, dim);
    for r in 1..dim {
        // a†b : |N - r, r> -> sqrt((N - r + 1) r) |N - r + 1, r - 1>.
        let coeff = (f64::from(n - r as u32 + 1) * r as f64).sqrt();
        plus[(r - 1, r)] = Complex64::new(coeff, 0.0);
    }
    let minus = plus.adjoint();
    let j1 = (&plus + &minus).map(|z| z * 0.5);
    let j2 = (&plus - &minus).map(|z| z * Complex64::new(0.0, -0.5));
    let mut j3 = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        j3[(r, r)] = Complex64::new(f64::from(n) / 2.0 - r as f64, 0.0);
    }
    Ok(SchwingerRealization {
        ops: SpinOperators::from_components(spin, j1, j2, j3),
        j: f64::from(n) / 2.0,
        alternative_half_integer_j: f64::from(n / 2) + 0.5,
    })
}

/// Two-mode condensate reduced to the common spin form.
#[derive(Clone, Debug)]
pub struct BECRealization {
    /// Static model on the fixed-`N` sector.
    pub model: SpinModelRealization,
    /// Sector operators from the two-mode construction.
    pub ops: SpinOperators,
    /// Alternative half-integer labeling recorded by [`schwinger_map`].
    pub alternative_half_integer_j: f64,
}

impl BECRealization {
    /// Hamiltonian matrix on the fixed-`N` sector.
    pub fn matrix(&self) -> Result<CMatrix> {
        self.model.params.matrix(&self.ops)
    }
}

/// Reduce a two-mode condensate preset to the spin form
/// `H = charging J3² - (tunneling / j) J1` on the fixed-`N` sector.
pub fn bec_realization(preset: &BECPreset) -> Result<BECRealization> {
    if preset.atom_number < 2 {
        return Err(Error::InvalidParameter(
            "condensate preset needs at least 2 atoms".into(),
        ));
    }
    if !(preset.charging_scale.is_finite() && preset.tunneling_scale.is_finite()) {
        return Err(Error::InvalidParameter(
            "condensate scales must be finite".into(),
        ));
    }
    let schwinger = schwinger_map(preset.atom_number)?;
    let j = schwinger.j;
    let spin = schwinger.ops.spin();
    Ok(BECRealization {
        model: SpinModelRealization {
            params: StaticModelParams {
                omega: preset.charging_scale,
                delta: 0.0,
                gamma: -preset.tunneling_scale / j,
            },
            allowed_channels: ChannelSet::from_channels(&[2, 3])?,
            spin,
        },
        ops: schwinger.ops,
        alternative_half_integer_j: schwinger.alternative_half_integer_j,
    })
}
