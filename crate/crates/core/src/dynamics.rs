//! Time evolution: exact quantum propagation under piecewise-constant
//! Hamiltonians, the semiclassical mean-spin flow, the renormalized Stokes
//! flow, and the classical-fluctuation dephasing ensemble.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{exp_neg_i_from_eigen, hermitian_eigen, require_hermitian, CMatrix};
use crate::model::{ControlPulse, StaticModelParams};
use crate::spin::{QuantumState, SpinOperators};

/// Members per work unit when averaging ensembles.  Partial sums are always
/// combined in chunk order, so results are independent of thread count.
const ENSEMBLE_CHUNK: usize = 512;

/// Relative magnitude window of |mean transverse component| used when
/// fitting a 1/e dephasing time: below 0.9 the decay has visibly started,
/// above 0.2 the sampling noise floor is still far away.
pub const DECAY_FIT_WINDOW: (f64, f64) = (0.2, 0.9);

/// Fixed-step integration plan over `[t_in, t_fin]`.
///
/// Quantum propagation subdivides at control-segment boundaries, where the
/// total Hamiltonian is constant, and applies the closed-form exponential of
/// each piece (midpoint-sampled; since the field is piecewise constant the
/// substep product telescopes exactly, so `max_step` does not limit its
/// accuracy).  The classical flow integrates with a classical 4th-order
/// Runge-Kutta scheme of step at most `max_step`, renormalizing after every
/// step, likewise respecting segment boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationPlan {
    /// Start time.
    pub t_in: f64,
    /// End time (must exceed `t_in`).
    pub t_fin: f64,
    /// Maximum substep (must be positive).
    pub max_step: f64,
}

impl PropagationPlan {
    /// Validating constructor.
    pub fn new(t_in: f64, t_fin: f64, max_step: f64) -> Result<Self> {
        let plan = Self {
            t_in,
            t_fin,
            max_step,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Check the invariants `t_fin > t_in` and `max_step > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_in.is_finite() && self.t_fin.is_finite() && self.t_fin > self.t_in) {
            return Err(Error::InvalidParameter(format!(
                "propagation window [{}, {}] is not increasing",
                self.t_in, self.t_fin
            )));
        }
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "max_step = {} must be positive",
                self.max_step
            )));
        }
        Ok(())
    }

    /// Total duration.
    pub fn duration(&self) -> f64 {
        self.t_fin - self.t_in
    }
}

/// Unit direction on the classical sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    /// Direction vector (unit length within `1e-6` on input).
    pub n: Vector3<f64>,
}

impl ClassicalState {
    /// Validating constructor: `|n| = 1` within `1e-6`, then exactly
    /// renormalized.
    pub fn new(n: Vector3<f64>) -> Result<Self> {
        let norm = n.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "classical direction has norm {norm}, expected 1"
            )));
        }
        Ok(Self { n: n / norm })
    }

    /// The `+e1` direction.
    pub fn e1() -> Self {
        Self {
            n: Vector3::new(1.0, 0.0, 0.0),
        }
    }

    /// The `+e3` direction.
    pub fn e3() -> Self {
        Self {
            n: Vector3::new(0.0, 0.0, 1.0),
        }
    }
}

/// How a Stokes vector was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StokesProvenance {
    /// Direct two-outcome frequencies (or exact probabilities): each
    /// component lies in `[-1, 1]`, so `|s| <= sqrt(3)`.
    Raw,
    /// Small-signal linearization `F'(0) <J_k>`; unbounded in general.
    Linearized,
    /// Rescaled/clipped to the unit ball by a tomography strategy.
    Normalized,
}

/// Measured or modeled Stokes vector with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    /// Components `(s1, s2, s3)`.
    pub s: Vector3<f64>,
    /// How the components were obtained.
    pub provenance: StokesProvenance,
}

impl StokesVector {
    /// Raw Stokes vector; every component must lie in `[-1, 1]` (within
    /// `1e-9`), which implies the ball bound `|s| <= sqrt(3)`.
    pub fn raw(s: Vector3<f64>) -> Result<Self> {
        for k in 0..3 {
            if !s[k].is_finite() || s[k].abs() > 1.0 + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "raw Stokes component s{} = {} outside [-1, 1]",
                    k + 1,
                    s[k]
                )));
            }
        }
        Ok(Self {
            s,
            provenance: StokesProvenance::Raw,
        })
    }

    /// Linearized Stokes vector (finite components required).
    pub fn linearized(s: Vector3<f64>) -> Result<Self> {
        if !(s[0].is_finite() && s[1].is_finite() && s[2].is_finite()) {
            return Err(Error::InvalidParameter(
                "Stokes components must be finite".into(),
            ));
        }
        Ok(Self {
            s,
            provenance: StokesProvenance::Linearized,
        })
    }

    /// Normalized Stokes vector (inside the unit ball within `1e-9`).
    pub fn normalized(s: Vector3<f64>) -> Result<Self> {
        let norm = s.norm();
        if !norm.is_finite() || norm > 1.0 + 1e-9 {
            return Err(Error::BlochBallViolation { radius: norm });
        }
        Ok(Self {
            s,
            provenance: StokesProvenance::Normalized,
        })
    }
}

/// What the per-time 3-vector samples of a [`Trajectory`] represent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    /// Classical unit direction `n(t)`.
    ClassicalDirection,
    /// Stokes vector `s(t)`.
    Stokes,
    /// Quantum mean spin scaled to the sphere, `<J(t)>/j`.
    ScaledMeanSpin,
}

/// Time series of 3-vector samples on a strictly increasing grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    /// Payload interpretation.
    pub kind: TrajectoryKind,
    /// Sample times (strictly increasing, first = plan start).
    pub times: Vec<f64>,
    /// One 3-vector per sample time.
    pub samples: Vec<Vector3<f64>>,
}

impl Trajectory {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Whether the trajectory holds no samples.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Final sample.
    pub fn last(&self) -> Vector3<f64> {
        *self.samples.last().expect("trajectory is never empty")
    }

    /// Largest pointwise distance to another trajectory on the shared grid.
    pub fn max_deviation(&self, other: &Trajectory) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::DimensionMismatch(format!(
                "trajectories have {} vs {} samples",
                self.times.len(),
                other.times.len()
            )));
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// A time interval on which the total Hamiltonian is constant, subdivided
/// into equal steps no longer than the plan's `max_step`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    start: f64,
    end: f64,
    steps: usize,
}

impl Piece {
    fn dt(&self) -> f64 {
        (self.end - self.start) / self.steps as f64
    }

    /// Time after `k` substeps, exact at the endpoints.
    fn time_at(&self, k: usize) -> f64 {
        if k == self.steps {
            self.end
        } else {
            self.start + self.dt() * k as f64
        }
    }

    fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }
}

/// Split the plan window at the pulse's segment boundaries.
fn pieces(pulse: &ControlPulse, plan: &PropagationPlan) -> Result<Vec<Piece>> {
    plan.validate()?;
    let mut cuts = vec![plan.t_in];
    for &b in pulse.boundaries() {
        if b > plan.t_in && b < plan.t_fin {
            cuts.push(b);
        }
    }
    cuts.push(plan.t_fin);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let (start, end) = (w[0], w[1]);
        let steps = ((end - start) / plan.max_step).ceil().max(1.0) as usize;
        out.push(Piece { start, end, steps });
    }
    Ok(out)
}

/// Exact propagator for one constant Hamiltonian, via its eigensystem.
///
/// `unitary(t) = V exp(-i Λ t) V†` for any `t`, so long time series cost one
/// diagonalization plus matrix-vector work per sample.
#[derive(Clone, Debug)]
pub struct StaticPropagator {
    values: nalgebra::DVector<f64>,
    vectors: CMatrix,
}

impl StaticPropagator {
    /// Diagonalize a Hermitian generator (validated within `1e-10` relative).
    pub fn new(hamiltonian: &CMatrix) -> Result<Self> {
        require_hermitian(hamiltonian, 1e-10)?;
        let (values, vectors) = hermitian_eigen(hamiltonian);
        Ok(Self { values, vectors })
    }

    /// Propagator `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        exp_neg_i_from_eigen(&self.values, &self.vectors, t)
    }

    /// Evolve a pure state by time `t` (two matrix-vector products).
    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        let mut coeffs = self.vectors.adjoint() * state.amplitudes();
        for (k, c) in coeffs.iter_mut().enumerate() {
            let phase = -self.values[k] * t;
            *c *= num_complex::Complex64::new(phase.cos(), phase.sin());
        }
        QuantumState::new(state.spin(), &self.vectors * coeffs)
    }
}

/// Ordered evolution operator for `H_static + Σ_k h_k(t) J_k` over the plan
/// window.
///
/// The field is piecewise constant, so the ordered product of midpoint
/// exponentials telescopes exactly within each piece; each piece contributes
/// one closed-form exponential computed from the Hermitian eigensystem.  The
/// result is unitary to round-off.
pub fn propagate_unitary(
    h_static: &CMatrix,
    pulse: &ControlPulse,
    ops: &SpinOperators,
    plan: &PropagationPlan,
) -> Result<CMatrix> {
    if h_static.nrows() != ops.dim() || h_static.ncols() != ops.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian is {}x{}, operators have dimension {}",
            h_static.nrows(),
            h_static.ncols(),
            ops.dim()
        )));
    }
    require_hermitian(h_static, 1e-10)?;
    let mut u = crate::linalg::identity(ops.dim());
    for piece in pieces(pulse, plan)? {
        let h = h_static + pulse.matrix_at(piece.midpoint(), ops);
        let (values, vectors) = hermitian_eigen(&h);
        let step = exp_neg_i_from_eigen(&values, &vectors, piece.end - piece.start);
        u = step * u;
    }
    Ok(u)
}

/// Sample `<J(t)>/j` along the exact quantum evolution, on the same grid the
/// classical integrator uses (piece boundaries plus equal substeps).
pub fn quantum_mean_spin_trajectory(
    h_static: &CMatrix,
    pulse: &ControlPulse,
    ops: &SpinOperators,
    initial: &QuantumState,
    plan: &PropagationPlan,
) -> Result<Trajectory> {
    if initial.spin() != ops.spin() {
        return Err(Error::DimensionMismatch(
            "initial state and operators have different spins".into(),
        ));
    }
    require_hermitian(h_static, 1e-10)?;
    let j = ops.spin().j();
    let mut state = initial.clone();
    let mut times = Vec::new();
    let mut samples = Vec::new();
    let mean = |s: &QuantumState| {
        Vector3::new(
            s.expectation_unchecked(&ops.j1) / j,
            s.expectation_unchecked(&ops.j2) / j,
            s.expectation_unchecked(&ops.j3) / j,
        )
    };
    times.push(plan.t_in);
    samples.push(mean(&state));
    for piece in pieces(pulse, plan)? {
        let h = h_static + pulse.matrix_at(piece.midpoint(), ops);
        let (values, vectors) = hermitian_eigen(&h);
        let u_step = exp_neg_i_from_eigen(&values, &vectors, piece.dt());
        for k in 1..=piece.steps {
            state = state.apply(&u_step)?;
            times.push(piece.time_at(k));
            samples.push(mean(&state));
        }
    }
    Ok(Trajectory {
        kind: TrajectoryKind::ScaledMeanSpin,
        times,
        samples,
    })
}

/// Effective precession vector of the mean-spin flow,
/// `ω(n) = (2j - 1) Ω n3 e3 + Δ e3 + Γ e1 + h(t)`.
///
/// The quadratic term's contribution follows from the Heisenberg equation,
/// which closes on symmetrized products `<J3 J_k + J_k J3>`; evaluating
/// those in a spin-coherent state along `n` gives the rate `(2j - 1) Ω n3`.
/// Substituting `<J> = j n` directly into the commutator (i.e. using `j Ω
/// n3`) underestimates the nonlinear precession by a factor approaching two
/// and breaks the large-`j` agreement with the exact dynamics.
pub fn flow_field(
    params: &StaticModelParams,
    j: f64,
    control: &Vector3<f64>,
    n: &Vector3<f64>,
) -> Vector3<f64> {
    Vector3::new(
        params.gamma + control[0],
        control[1],
        (2.0 * j - 1.0) * params.omega * n[2] + params.delta + control[2],
    )
}

/// Integrate `dv/dt = ω(v) × v` with fixed-step RK4, renormalizing `|v|` to
/// its initial magnitude after every step, and respecting pulse boundaries.
fn integrate_rotation_flow(
    params: &StaticModelParams,
    pulse: &ControlPulse,
    j: f64,
    v0: Vector3<f64>,
    plan: &PropagationPlan,
    kind: TrajectoryKind,
) -> Result<Trajectory> {
    params.validate()?;
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spin magnitude j = {j} must be positive"
        )));
    }
    let magnitude = v0.norm();
    let mut v = v0;
    let mut times = vec![plan.t_in];
    let mut samples = vec![v];
    for piece in pieces(pulse, plan)? {
        let dt = piece.dt();
        // The field is constant across the piece (boundaries were cut
        // beforehand), so all RK4 stages see the midpoint sample; evaluating
        // at `t + dt` instead would leak the next segment's field into k4.
        let h = pulse.field_at(piece.midpoint());
        let deriv = |v: &Vector3<f64>| flow_field(params, j, &h, v).cross(v);
        for k in 0..piece.steps {
            let k1 = deriv(&v);
            let k2 = deriv(&(v + 0.5 * dt * k1));
            let k3 = deriv(&(v + 0.5 * dt * k2));
            let k4 = deriv(&(v + dt * k3));
            v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            // The flow is a rotation; restore the conserved magnitude.
            if magnitude > 0.0 {
                v *= magnitude / v.norm();
            }
            times.push(piece.time_at(k + 1));
            samples.push(v);
        }
    }
    Ok(Trajectory {
        kind,
        times,
        samples,
    })
}

/// Classical mean-spin trajectory `dn/dt = ω(n) × n` (see [`flow_field`]),
/// starting from a unit vector; `|n(t)| = 1` is restored after every step.
pub fn classical_trajectory(
    params: &StaticModelParams,
    pulse: &ControlPulse,
    j: f64,
    initial: &ClassicalState,
    plan: &PropagationPlan,
) -> Result<Trajectory> {
    integrate_rotation_flow(
        params,
        pulse,
        j,
        initial.n,
        plan,
        TrajectoryKind::ClassicalDirection,
    )
}

/// Stokes-vector flow: the mean-spin flow with the quadratic coefficient
/// rescaled by the readout slope, `Ω -> Ω / F'(0)`, acting on `s`.  The flow
/// is a time-dependent rotation, so `|s|` is conserved.
pub fn stokes_flow(
    params: &StaticModelParams,
    pulse: &ControlPulse,
    j: f64,
    f_prime0: f64,
    initial: &StokesVector,
    plan: &PropagationPlan,
) -> Result<Trajectory> {
    if !(f_prime0.is_finite() && f_prime0 > 0.0) {
        return Err(Error::UndefinedSlope(format!(
            "readout slope F'(0) = {f_prime0} must be positive"
        )));
    }
    let rescaled = StaticModelParams {
        omega: params.omega / f_prime0,
        ..*params
    };
    integrate_rotation_flow(
        &rescaled,
        pulse,
        j,
        initial.s,
        plan,
        TrajectoryKind::Stokes,
    )
}

/// Ensemble-averaged dephasing of classical trajectories whose initial
/// directions fluctuate around `+e1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DephasingReport {
    /// Ensemble mean direction over time (not unit length once dephased).
    pub mean_trajectory: Trajectory,
    /// `|mean transverse component| = sqrt(s̄1² + s̄2²)` per sample time.
    pub transverse_magnitude: Vec<f64>,
    /// 1/e decay time fitted on `log` of the transverse magnitude over the
    /// window [`DECAY_FIT_WINDOW`]; `None` when no decay is measurable.
    pub fitted_decay_time: Option<f64>,
    /// Ensemble size.
    pub n_samples: usize,
    /// Transverse spread of initial directions, `1/sqrt(2j)`.
    pub sigma: f64,
    /// Smallest single-member `|n|` over the evolution (stays 1: the
    /// ensemble shows phase damping with no energy damping per member).
    pub min_member_norm: f64,
    /// Largest single-member `|n|` over the evolution.
    pub max_member_norm: f64,
    /// `|mean direction|` at the final time.
    pub final_mean_magnitude: f64,
}

/// Derive a per-member seed from the master seed; the weak counter mixing is
/// hardened by the seeded stream cipher underneath.
fn derive_member_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a golden-ratio counter sequence.
    let mut z = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Average `n_samples` uncontrolled classical trajectories whose initial
/// directions are `normalize(e1 + ξ2 e2 + ξ3 e3)` with `ξ ~ N(0, 1/sqrt(2j))`
/// — the transverse spread of a spin-coherent state scaled to the unit
/// sphere.  Frequencies disperse through the quadratic term, damping the
/// mean's phase while every member keeps `|n| = 1`.
///
/// Chunked parallel accumulation with in-order reduction makes the result
/// independent of the worker count; the seed alone fixes the output.
pub fn dephasing_ensemble(
    params: &StaticModelParams,
    j: f64,
    n_samples: usize,
    seed: u64,
    plan: &PropagationPlan,
) -> Result<DephasingReport> {
    params.validate()?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter(
            "dephasing ensemble needs at least 2 members".into(),
        ));
    }
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spin magnitude j = {j} must be positive"
        )));
    }
    plan.validate()?;
    let sigma = 1.0 / (2.0 * j).sqrt();
    let pulse = ControlPulse::empty(crate::model::ChannelSet::all());
    // Shared sample grid: one piece, equal steps.
    let grid = pieces(&pulse, plan)?;
    let n_times: usize = 1 + grid.iter().map(|p| p.steps).sum::<usize>();

    let n_chunks = n_samples.div_ceil(ENSEMBLE_CHUNK);
    struct ChunkSum {
        sum: Vec<Vector3<f64>>,
        min_norm: f64,
        max_norm: f64,
    }
    let chunk_results: Vec<Result<ChunkSum>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * ENSEMBLE_CHUNK;
            let hi = ((chunk + 1) * ENSEMBLE_CHUNK).min(n_samples);
            let mut sum = vec![Vector3::zeros(); n_times];
            let mut min_norm = f64::INFINITY;
            let mut max_norm = f64::NEG_INFINITY;
            for member in lo..hi {
                let mut rng = ChaCha12Rng::seed_from_u64(derive_member_seed(seed, member as u64));
                let normal = Normal::new(0.0, sigma)
                    .map_err(|e| Error::InvalidParameter(format!("noise width: {e}")))?;
                let xi2 = normal.sample(&mut rng);
                let xi3 = normal.sample(&mut rng);
                let n0 = Vector3::new(1.0, xi2, xi3).normalize();
                let traj = integrate_rotation_flow(
                    params,
                    &pulse,
                    j,
                    n0,
                    plan,
                    TrajectoryKind::ClassicalDirection,
                )?;
                for (acc, v) in sum.iter_mut().zip(&traj.samples) {
                    *acc += v;
                    let norm = v.norm();
                    min_norm = min_norm.min(norm);
                    max_norm = max_norm.max(norm);
                }
            }
            Ok(ChunkSum {
                sum,
                min_norm,
                max_norm,
            })
        })
        .collect();

    // In-order sequential reduction for bit-stable results.
    let mut total = vec![Vector3::zeros(); n_times];
    let mut min_norm = f64::INFINITY;
    let mut max_norm = f64::NEG_INFINITY;
    for chunk in chunk_results {
        let chunk = chunk?;
        for (acc, v) in total.iter_mut().zip(&chunk.sum) {
            *acc += v;
        }
        min_norm = min_norm.min(chunk.min_norm);
        max_norm = max_norm.max(chunk.max_norm);
    }
    let mean: Vec<Vector3<f64>> = total
        .into_iter()
        .map(|v| v / n_samples as f64)
        .collect();

    // Reconstruct the shared time grid.
    let mut times = vec![plan.t_in];
    for piece in &grid {
        for k in 1..=piece.steps {
            times.push(piece.time_at(k));
        }
    }
    let transverse: Vec<f64> = mean.iter().map(|v| v.fixed_rows::<2>(0).norm()).collect();
    let fitted_decay_time = fit_decay_time(&times, &transverse);
    let final_mean_magnitude = mean.last().map_or(0.0, |v| v.norm());

    Ok(DephasingReport {
        mean_trajectory: Trajectory {
            kind: TrajectoryKind::ClassicalDirection,
            times,
            samples: mean,
        },
        transverse_magnitude: transverse,
        fitted_decay_time,
        n_samples,
        sigma,
        min_member_norm: min_norm,
        max_member_norm: max_norm,
        final_mean_magnitude,
    })
}

/// Least-squares fit of `log m(t) = a - t/τ` over the samples with
/// `m ∈ [0.2, 0.9] · m(0)`; returns the 1/e time `τ`, or `None` when fewer
/// than two samples fall in the window or the fitted slope is not a decay.
pub fn fit_decay_time(times: &[f64], magnitudes: &[f64]) -> Option<f64> {
    let m0 = *magnitudes.first()?;
    if !(m0.is_finite() && m0 > 0.0) {
        return None;
    }
    let (lo, hi) = DECAY_FIT_WINDOW;
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(magnitudes)
        .filter(|&(_, &m)| m > lo * m0 && m < hi * m0)
        .map(|(&t, &m)| (t, m.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let st: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let stt: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sty: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * stt - st * st;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sty - st * sy) / denom;
    if slope >= -1e-300 {
        return None;
    }
    Some(-1.0 / slope)
}
