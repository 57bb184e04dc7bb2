//! Deterministic state-vector execution of characterization circuits.
//!
//! Circuits are explicit gate lists over named gates plus swept rotations.
//! Noise enters in exactly two places, both classical from the simulator's
//! point of view: a column-stochastic transition matrix applied to the
//! outcome distribution, and a preparation phase θ₀ added to every *swept*
//! rotation angle. Fixed gates are assumed noiseless.
//!
//! Every shot-sampled result is reproducible: per-circuit seeds are derived
//! from the master seed by [`derive_seed`], so batches give bitwise
//! identical output no matter how they are scheduled.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{CMatrix, CVector, UnitaryOperator, MAX_QUBITS};

/// Rotation axis on the Bloch sphere used for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    Y,
    X,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Y => write!(f, "Y"),
            Axis::X => write!(f, "X"),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Y" => Ok(Axis::Y),
            "X" => Ok(Axis::X),
            other => Err(Error::Config(format!("unknown axis '{other}', expected X or Y"))),
        }
    }
}

/// One gate in a circuit.
#[derive(Debug, Clone)]
pub enum GateOp {
    X { qubit: usize },
    H { qubit: usize },
    S { qubit: usize },
    Cx { control: usize, target: usize },
    /// Axis rotation by `theta`. `swept` marks the angle as part of a sweep,
    /// which makes it subject to the preparation-phase offset θ₀.
    Rotation { axis: Axis, theta: f64, qubit: usize, swept: bool },
    /// Arbitrary unitary on the full register.
    Unitary { op: UnitaryOperator },
}

/// A circuit: initial computational basis state plus an ordered gate list.
#[derive(Debug, Clone)]
pub struct CircuitSpec {
    n: usize,
    initial: usize,
    gates: Vec<GateOp>,
}

impl CircuitSpec {
    pub fn new(n: usize, initial: usize) -> Result<Self> {
        if n < 1 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n} outside supported range 1..={MAX_QUBITS}"
            )));
        }
        if initial >= 1 << n {
            return Err(Error::InvalidArgument(format!(
                "initial basis label {initial} out of range for n = {n}"
            )));
        }
        Ok(Self { n, initial, gates: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn push(&mut self, gate: GateOp) -> Result<()> {
        self.validate_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn with_gate(mut self, gate: GateOp) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    fn validate_gate(&self, gate: &GateOp) -> Result<()> {
        let check = |q: usize| -> Result<()> {
            if q >= self.n {
                Err(Error::InvalidArgument(format!("qubit index {q} out of range for n = {}", self.n)))
            } else {
                Ok(())
            }
        };
        match gate {
            GateOp::X { qubit } | GateOp::H { qubit } | GateOp::S { qubit } => check(*qubit),
            GateOp::Cx { control, target } => {
                check(*control)?;
                check(*target)?;
                if control == target {
                    return Err(Error::InvalidArgument("CX control equals target".into()));
                }
                Ok(())
            }
            GateOp::Rotation { theta, qubit, .. } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidArgument("rotation angle must be finite".into()));
                }
                check(*qubit)
            }
            GateOp::Unitary { op } => {
                if op.num_qubits() != self.n {
                    return Err(Error::DimensionMismatch(format!(
                        "full-register unitary acts on {} qubits, circuit has {}",
                        op.num_qubits(),
                        self.n
                    )));
                }
                Ok(())
            }
        }
    }

    /// Dense matrix of one gate, with θ₀ added to swept rotations.
    fn gate_matrix(&self, gate: &GateOp, noise: Option<&NoiseProfile>) -> Result<UnitaryOperator> {
        match gate {
            GateOp::X { qubit } => UnitaryOperator::embedded(&UnitaryOperator::pauli_x(), *qubit, self.n),
            GateOp::H { qubit } => UnitaryOperator::embedded(&UnitaryOperator::hadamard(), *qubit, self.n),
            GateOp::S { qubit } => UnitaryOperator::embedded(&UnitaryOperator::phase_s(), *qubit, self.n),
            GateOp::Cx { control, target } => UnitaryOperator::cx(self.n, *control, *target),
            GateOp::Rotation { axis, theta, qubit, swept } => {
                let offset = match (swept, noise) {
                    (true, Some(profile)) => profile.theta0(*qubit, *axis),
                    _ => 0.0,
                };
                rotation_gate(*axis, theta + offset, *qubit, self.n)
            }
            GateOp::Unitary { op } => Ok(op.clone()),
        }
    }

    /// Product of all gates (no initial state), i.e. the circuit unitary.
    pub fn total_unitary(&self) -> Result<UnitaryOperator> {
        let mut u = UnitaryOperator::identity(self.n)?;
        for gate in &self.gates {
            u = self.gate_matrix(gate, None)?.compose(&u)?;
        }
        Ok(u)
    }

    fn final_state(&self, noise: Option<&NoiseProfile>) -> Result<CVector> {
        let dim = 1 << self.n;
        let mut state = CVector::zeros(dim);
        state[self.initial] = Complex64::new(1.0, 0.0);
        for gate in &self.gates {
            state = self.gate_matrix(gate, noise)?.matrix() * state;
        }
        Ok(state)
    }
}

/// Single-qubit axis rotation exp(-i θ σ/2) embedded on `qubit` of an
/// n-qubit register.
pub fn rotation_gate(axis: Axis, theta: f64, qubit: usize, n: usize) -> Result<UnitaryOperator> {
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("rotation angle must be finite".into()));
    }
    let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let m = match axis {
        Axis::Y => CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(ch, 0.0),
                Complex64::new(-sh, 0.0),
                Complex64::new(sh, 0.0),
                Complex64::new(ch, 0.0),
            ],
        ),
        Axis::X => CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(ch, 0.0),
                Complex64::new(0.0, -sh),
                Complex64::new(0.0, -sh),
                Complex64::new(ch, 0.0),
            ],
        ),
    };
    let single = UnitaryOperator::new(m)?;
    UnitaryOperator::embedded(&single, qubit, n)
}

/// Outcome distribution over the 2ⁿ computational basis states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityDistribution {
    n: usize,
    p: Vec<f64>,
}

impl ProbabilityDistribution {
    /// Validated constructor: nonnegative entries summing to 1 within 1e-12.
    pub fn exact(n: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "distribution for n = {n} needs {} entries, got {}",
                1 << n,
                p.len()
            )));
        }
        if p.iter().any(|&x| !x.is_finite() || x < -1e-12) {
            return Err(Error::InvalidArgument("distribution has negative or non-finite entries".into()));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("distribution sums to {sum}, expected 1")));
        }
        Ok(Self { n, p: p.into_iter().map(|x| x.max(0.0)).collect() })
    }

    /// Empirical distribution counts/N.
    pub fn from_counts(n: usize, counts: &[u64]) -> Result<Self> {
        if counts.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "counts for n = {n} need {} entries, got {}",
                1 << n,
                counts.len()
            )));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("empty counts".into()));
        }
        Ok(Self { n, p: counts.iter().map(|&k| k as f64 / total as f64).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.p[outcome]
    }
}

/// Column-stochastic assignment-error matrix: t[(j, k)] = P(observe j | prepared k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    n: usize,
    t: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn identity(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self { n, t: DMatrix::identity(1 << n, 1 << n) })
    }

    /// Single-qubit matrix from the two correct-readout probabilities.
    pub fn single_qubit(t00: f64, t11: f64) -> Result<Self> {
        let m = DMatrix::from_row_slice(2, 2, &[t00, 1.0 - t11, 1.0 - t00, t11]);
        Self::from_matrix(1, m)
    }

    /// Validated constructor: entries in [0, 1], columns summing to 1 within 1e-9.
    pub fn from_matrix(n: usize, t: DMatrix<f64>) -> Result<Self> {
        check_n(n)?;
        let dim = 1 << n;
        if t.nrows() != dim || t.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "transition matrix for n = {n} must be {dim}x{dim}, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        for j in 0..dim {
            let mut col_sum = 0.0;
            for i in 0..dim {
                let v = t[(i, j)];
                if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "transition entry ({i}, {j}) = {v} outside [0, 1]"
                    )));
                }
                col_sum += v;
            }
            if (col_sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "transition column {j} sums to {col_sum}, expected 1"
                )));
            }
        }
        Ok(Self { n, t })
    }

    /// Tensor product, `self` on the more significant qubits.
    pub fn kron(&self, other: &TransitionMatrix) -> Result<Self> {
        check_n(self.n + other.n)?;
        Ok(Self { n: self.n + other.n, t: self.t.kronecker(&other.t) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn entry(&self, observed: usize, prepared: usize) -> f64 {
        self.t[(observed, prepared)]
    }

    /// Ratio of largest to smallest singular value.
    pub fn condition_number(&self) -> f64 {
        let sv = self.t.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 || n > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n} outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Preparation-phase offset for one (qubit, axis) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepPhase {
    pub qubit: usize,
    pub axis: Axis,
    pub theta0: f64,
}

/// Everything the simulator injects on top of ideal execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub transition: TransitionMatrix,
    pub prep_phases: Vec<PrepPhase>,
    /// Master seed; per-circuit seeds are derived from it.
    pub seed: u64,
}

impl NoiseProfile {
    pub fn ideal(n: usize, seed: u64) -> Result<Self> {
        Ok(Self { transition: TransitionMatrix::identity(n)?, prep_phases: Vec::new(), seed })
    }

    pub fn new(transition: TransitionMatrix, prep_phases: Vec<PrepPhase>, seed: u64) -> Result<Self> {
        for phase in &prep_phases {
            if phase.qubit >= transition.n() {
                return Err(Error::InvalidArgument(format!(
                    "prep-phase qubit {} out of range for n = {}",
                    phase.qubit,
                    transition.n()
                )));
            }
            if !phase.theta0.is_finite() || phase.theta0.abs() > std::f64::consts::PI {
                return Err(Error::InvalidArgument(format!(
                    "prep phase {} outside [-pi, pi]",
                    phase.theta0
                )));
            }
        }
        Ok(Self { transition, prep_phases, seed })
    }

    pub fn n(&self) -> usize {
        self.transition.n()
    }

    /// θ₀ for a (qubit, axis) pair; 0 when unset.
    pub fn theta0(&self, qubit: usize, axis: Axis) -> f64 {
        self.prep_phases
            .iter()
            .find(|p| p.qubit == qubit && p.axis == axis)
            .map(|p| p.theta0)
            .unwrap_or(0.0)
    }
}

/// Shot budget. Exact mode skips sampling and returns the noisy ideal
/// distribution itself; a zero shot count is rejected rather than being a
/// sentinel for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotCount {
    Exact,
    Finite(u32),
}

impl ShotCount {
    pub fn finite(shots: u32) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidArgument(
                "shot count must be >= 1; use ShotCount::Exact for exact mode".into(),
            ));
        }
        Ok(ShotCount::Finite(shots))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ShotCount::Exact)
    }
}

/// Measured distribution together with its raw counts (absent in exact mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub dist: ProbabilityDistribution,
    pub counts: Option<Vec<u64>>,
    pub shots: ShotCount,
}

/// Exact outcome distribution p_j = |⟨j|U_circuit|initial⟩|².
///
/// This is the brute-force oracle every analytic model in the crate is
/// checked against.
pub fn ideal_distribution(circuit: &CircuitSpec) -> Result<ProbabilityDistribution> {
    let state = circuit.final_state(None)?;
    distribution_from_state(circuit.n, &state)
}

fn distribution_from_state(n: usize, state: &CVector) -> Result<ProbabilityDistribution> {
    let mut p: Vec<f64> = state.iter().map(|amp| amp.norm_sqr()).collect();
    let sum: f64 = p.iter().sum();
    // Renormalize away the last few ulps of gate-product round-off.
    for x in &mut p {
        *x /= sum;
    }
    ProbabilityDistribution::exact(n, p)
}

/// q = T·p.
pub fn apply_readout_noise(
    p: &ProbabilityDistribution,
    t: &TransitionMatrix,
) -> Result<ProbabilityDistribution> {
    if p.n() != t.n() {
        return Err(Error::DimensionMismatch(format!(
            "distribution on {} qubits, transition matrix on {}",
            p.n(),
            t.n()
        )));
    }
    let dim = p.dim();
    let mut q = vec![0.0; dim];
    for (j, qj) in q.iter_mut().enumerate() {
        for k in 0..dim {
            *qj += t.entry(j, k) * p.prob(k);
        }
    }
    let sum: f64 = q.iter().sum();
    for x in &mut q {
        *x = (*x / sum).max(0.0);
    }
    ProbabilityDistribution::exact(p.n(), q)
}

/// Multinomial draw of `shots` outcomes, by inverse CDF on a ChaCha8 stream.
/// Identical (p, shots, seed) always give identical counts.
pub fn sample_counts(p: &ProbabilityDistribution, shots: u32, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = p.dim();
    let mut cdf = Vec::with_capacity(dim);
    let mut acc = 0.0;
    for j in 0..dim {
        acc += p.prob(j);
        cdf.push(acc);
    }
    let mut counts = vec![0u64; dim];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&edge| edge < u).min(dim - 1);
        counts[idx] += 1;
    }
    counts
}

/// Execute one circuit under a noise profile: θ₀ offsets on swept rotations,
/// readout transition on the distribution, then shot sampling (or exact mode).
pub fn run_noisy(
    circuit: &CircuitSpec,
    noise: &NoiseProfile,
    shots: ShotCount,
) -> Result<EmpiricalDistribution> {
    run_noisy_with_seed(circuit, noise, shots, noise.seed)
}

/// Same as [`run_noisy`] but with an explicit sampling seed, used by batch
/// execution to give every circuit its own derived stream.
pub fn run_noisy_with_seed(
    circuit: &CircuitSpec,
    noise: &NoiseProfile,
    shots: ShotCount,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    if noise.n() != circuit.n() {
        return Err(Error::DimensionMismatch(format!(
            "noise profile on {} qubits, circuit on {}",
            noise.n(),
            circuit.n()
        )));
    }
    let state = circuit.final_state(Some(noise))?;
    let ideal = distribution_from_state(circuit.n(), &state)?;
    let noisy = apply_readout_noise(&ideal, &noise.transition)?;
    match shots {
        ShotCount::Exact => Ok(EmpiricalDistribution { dist: noisy, counts: None, shots }),
        ShotCount::Finite(count) => {
            if count == 0 {
                return Err(Error::InvalidArgument("shot count must be >= 1".into()));
            }
            let counts = sample_counts(&noisy, count, seed);
            let dist = ProbabilityDistribution::from_counts(circuit.n(), &counts)?;
            Ok(EmpiricalDistribution { dist, counts: Some(counts), shots })
        }
    }
}

/// Independent seed streams for the different experiment stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStream {
    Calibration = 0,
    Characterization = 1,
    Tomography = 2,
    Analysis = 3,
}

/// Per-circuit seed: two splitmix64 rounds over (master, stream, index).
///
/// The derivation is part of the reproducibility contract; changing it
/// changes every sampled artifact.
pub fn derive_seed(master: u64, stream: SeedStream, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(stream as u64 + 1))
        .wrapping_add(0xbf58476d1ce4e5b9u64.wrapping_mul(index.wrapping_add(1)));
    for _ in 0..2 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
    }
    z
}

/// Run a batch of circuits in parallel with per-index derived seeds.
/// The result order matches the input order and is scheduling-independent.
pub fn execute_batch(
    circuits: &[CircuitSpec],
    noise: &NoiseProfile,
    shots: ShotCount,
    stream: SeedStream,
) -> Result<Vec<EmpiricalDistribution>> {
    circuits
        .par_iter()
        .enumerate()
        .map(|(idx, circuit)| {
            let seed = derive_seed(noise.seed, stream, idx as u64);
            run_noisy_with_seed(circuit, noise, shots, seed)
        })
        .collect()
}

/// The sweep grid over [-π, π]: Nθ intervals, hence Nθ + 1 points
/// θ_j = (2j/Nθ - 1)π with both endpoints included.
pub fn angle_grid(n_theta: usize) -> Vec<f64> {
    (0..=n_theta)
        .map(|j| (2.0 * j as f64 / n_theta as f64 - 1.0) * std::f64::consts::PI)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn y_rotation_acts_as_expected() {
        // Y_{pi/2}|0> = (|0>+|1>)/sqrt(2)
        let mut circ = CircuitSpec::new(1, 0).unwrap();
        circ.push(GateOp::Rotation { axis: Axis::Y, theta: PI / 2.0, qubit: 0, swept: false }).unwrap();
        let p = ideal_distribution(&circ).unwrap();
        assert_abs_diff_eq!(p.prob(0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(p.prob(1), 0.5, epsilon = 1e-14);

        // Y_pi|0> = |1> up to global phase
        let mut circ = CircuitSpec::new(1, 0).unwrap();
        circ.push(GateOp::Rotation { axis: Axis::Y, theta: PI, qubit: 0, swept: false }).unwrap();
        let p = ideal_distribution(&circ).unwrap();
        assert_abs_diff_eq!(p.prob(1), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn x_rotation_matches_matrix_exponential() {
        // X_theta|0> = cos(theta/2)|0> - i sin(theta/2)|1>, checked against
        // a series evaluation of exp(-i theta X / 2).
        let theta = 0.731;
        let gate = rotation_gate(Axis::X, theta, 0, 1).unwrap();
        let expected = matrix_exponential(&(UnitaryOperator::pauli_x().matrix()
            * Complex64::new(0.0, -theta / 2.0)));
        let dev = (gate.matrix() - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-13);
        assert_abs_diff_eq!(gate.entry(0, 0).re, (theta / 2.0).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(gate.entry(1, 0).im, -(theta / 2.0).sin(), epsilon = 1e-14);
    }

    fn matrix_exponential(m: &CMatrix) -> CMatrix {
        let dim = m.nrows();
        let mut term = CMatrix::identity(dim, dim);
        let mut sum = CMatrix::identity(dim, dim);
        for k in 1..40 {
            term = &term * m / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn rotation_rejects_bad_qubit() {
        assert!(rotation_gate(Axis::Y, 0.1, 2, 2).is_err());
    }

    #[test]
    fn hadamard_gives_uniform_distribution() {
        let circ = CircuitSpec::new(1, 0).unwrap().with_gate(GateOp::H { qubit: 0 }).unwrap();
        let p = ideal_distribution(&circ).unwrap();
        assert_abs_diff_eq!(p.prob(0), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn cx_truth_table_from_basis_input() {
        // |10>: X on qubit 1 makes |11>, CX(0->1) flips it back to |10>.
        let mut circ = CircuitSpec::new(2, 2).unwrap();
        circ.push(GateOp::X { qubit: 1 }).unwrap();
        circ.push(GateOp::Cx { control: 0, target: 1 }).unwrap();
        let p = ideal_distribution(&circ).unwrap();
        assert_abs_diff_eq!(p.prob(2), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn y_sweep_on_identity_matches_cosine_law() {
        for theta in [-2.0, -0.4, 0.0, 0.9, 2.7] {
            let circ = CircuitSpec::new(1, 0)
                .unwrap()
                .with_gate(GateOp::Rotation { axis: Axis::Y, theta, qubit: 0, swept: true })
                .unwrap();
            let p = ideal_distribution(&circ).unwrap();
            assert_abs_diff_eq!(p.prob(0), (theta / 2.0).cos().powi(2), epsilon = 1e-13);
            assert_abs_diff_eq!(p.prob(1), (theta / 2.0).sin().powi(2), epsilon = 1e-13);
        }
    }

    #[test]
    fn readout_noise_identity_is_noop() {
        let p = ProbabilityDistribution::exact(1, vec![0.3, 0.7]).unwrap();
        let t = TransitionMatrix::identity(1).unwrap();
        assert_eq!(apply_readout_noise(&p, &t).unwrap(), p);
    }

    #[test]
    fn readout_noise_reads_off_columns() {
        let t = TransitionMatrix::single_qubit(0.9, 0.8).unwrap();
        let p = ProbabilityDistribution::exact(1, vec![1.0, 0.0]).unwrap();
        let q = apply_readout_noise(&p, &t).unwrap();
        assert_abs_diff_eq!(q.prob(0), 0.9, epsilon = 1e-14);
        assert_abs_diff_eq!(q.prob(1), 0.1, epsilon = 1e-14);
    }

    #[test]
    fn readout_noise_preserves_normalization() {
        let t = TransitionMatrix::single_qubit(0.93, 0.81).unwrap();
        let p = ProbabilityDistribution::exact(1, vec![0.25, 0.75]).unwrap();
        let q = apply_readout_noise(&p, &t).unwrap();
        assert_abs_diff_eq!(q.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_distribution_sampling() {
        let p = ProbabilityDistribution::exact(1, vec![1.0, 0.0]).unwrap();
        let counts = sample_counts(&p, 5000, 17);
        assert_eq!(counts, vec![5000, 0]);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let p = ProbabilityDistribution::exact(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let a = sample_counts(&p, 4096, 99);
        let b = sample_counts(&p, 4096, 99);
        assert_eq!(a, b);
        let c = sample_counts(&p, 4096, 100);
        assert_ne!(a, c);
        assert_eq!(a.iter().sum::<u64>(), 4096);
    }

    #[test]
    fn fair_coin_stays_within_statistical_floor() {
        // |counts0/N - 1/2| <= 3 * (N^{-1/2}/2) in at least 99% of seeds.
        let p = ProbabilityDistribution::exact(1, vec![0.5, 0.5]).unwrap();
        let shots = 5000u32;
        let bound = 3.0 * 0.5 / (shots as f64).sqrt();
        let trials = 200;
        let ok = (0..trials)
            .filter(|&seed| {
                let counts = sample_counts(&p, shots, seed);
                (counts[0] as f64 / shots as f64 - 0.5).abs() <= bound
            })
            .count();
        assert!(ok as f64 >= 0.99 * trials as f64, "only {ok}/{trials} within bound");
    }

    #[test]
    fn exact_mode_equals_ideal_without_noise() {
        let circ = CircuitSpec::new(1, 0)
            .unwrap()
            .with_gate(GateOp::Rotation { axis: Axis::Y, theta: 0.7, qubit: 0, swept: true })
            .unwrap();
        let noise = NoiseProfile::ideal(1, 5).unwrap();
        let got = run_noisy(&circ, &noise, ShotCount::Exact).unwrap();
        let ideal = ideal_distribution(&circ).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(got.dist.prob(j), ideal.prob(j), epsilon = 1e-14);
        }
        assert!(got.counts.is_none());
    }

    #[test]
    fn prep_phase_shifts_swept_angles_only() {
        let theta0 = 0.1;
        let noise = NoiseProfile::new(
            TransitionMatrix::identity(1).unwrap(),
            vec![PrepPhase { qubit: 0, axis: Axis::Y, theta0 }],
            0,
        )
        .unwrap();
        let swept = CircuitSpec::new(1, 0)
            .unwrap()
            .with_gate(GateOp::Rotation { axis: Axis::Y, theta: 0.6, qubit: 0, swept: true })
            .unwrap();
        let shifted = CircuitSpec::new(1, 0)
            .unwrap()
            .with_gate(GateOp::Rotation { axis: Axis::Y, theta: 0.6 + theta0, qubit: 0, swept: false })
            .unwrap();
        let got = run_noisy(&swept, &noise, ShotCount::Exact).unwrap();
        let expected = ideal_distribution(&shifted).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(got.dist.prob(j), expected.prob(j), epsilon = 1e-14);
        }

        // Fixed rotations are not offset.
        let fixed = CircuitSpec::new(1, 0)
            .unwrap()
            .with_gate(GateOp::Rotation { axis: Axis::Y, theta: 0.6, qubit: 0, swept: false })
            .unwrap();
        let got_fixed = run_noisy(&fixed, &noise, ShotCount::Exact).unwrap();
        let unshifted = ideal_distribution(&fixed).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(got_fixed.dist.prob(j), unshifted.prob(j), epsilon = 1e-14);
        }
    }

    #[test]
    fn injected_transition_shows_in_exact_mode() {
        let t = TransitionMatrix::single_qubit(0.9, 0.8).unwrap();
        let noise = NoiseProfile::new(t.clone(), vec![], 0).unwrap();
        let circ = CircuitSpec::new(1, 0).unwrap();
        let got = run_noisy(&circ, &noise, ShotCount::Exact).unwrap();
        assert_abs_diff_eq!(got.dist.prob(0), 0.9, epsilon = 1e-14);
        assert_abs_diff_eq!(got.dist.prob(1), 0.1, epsilon = 1e-14);
    }

    #[test]
    fn batch_execution_is_order_independent() {
        let noise = NoiseProfile::ideal(1, 42).unwrap();
        let circuits: Vec<CircuitSpec> = angle_grid(11)
            .into_iter()
            .map(|theta| {
                CircuitSpec::new(1, 0)
                    .unwrap()
                    .with_gate(GateOp::Rotation { axis: Axis::Y, theta, qubit: 0, swept: true })
                    .unwrap()
            })
            .collect();
        let a = execute_batch(&circuits, &noise, ShotCount::Finite(500), SeedStream::Calibration).unwrap();
        let b = execute_batch(&circuits, &noise, ShotCount::Finite(500), SeedStream::Calibration).unwrap();
        assert_eq!(a, b);
        // Per-circuit result equals a direct single run with the derived seed.
        let direct = run_noisy_with_seed(
            &circuits[3],
            &noise,
            ShotCount::Finite(500),
            derive_seed(42, SeedStream::Calibration, 3),
        )
        .unwrap();
        assert_eq!(a[3], direct);
    }

    #[test]
    fn angle_grid_covers_closed_interval() {
        let grid = angle_grid(51);
        assert_eq!(grid.len(), 52);
        assert_abs_diff_eq!(grid[0], -PI, epsilon = 1e-15);
        assert_abs_diff_eq!(*grid.last().unwrap(), PI, epsilon = 1e-15);
        // Uniform spacing of 2π/Nθ.
        for w in grid.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 2.0 * PI / 51.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn shot_count_zero_is_rejected() {
        assert!(ShotCount::finite(0).is_err());
        assert!(ShotCount::finite(1).is_ok());
    }

    #[test]
    fn prep_phase_outside_pi_is_rejected() {
        let t = TransitionMatrix::identity(1).unwrap();
        let bad = NoiseProfile::new(t, vec![PrepPhase { qubit: 0, axis: Axis::Y, theta0: 4.0 }], 0);
        assert!(bad.is_err());
    }
}
