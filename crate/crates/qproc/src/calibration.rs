//! SPAM calibration: angle-sweep estimation of the readout transition
//! matrix T and the preparation phase θ₀, run before characterization.
//!
//! The procedure rotates qubit 0 of each basis preparation |0, k⟩ through
//! the sweep grid. The ideal distribution then has exactly two nonzero
//! components, cos²(θ/2) at column k and sin²(θ/2) at column k + 2^(n-1),
//! so each sweep determines two columns of T. θ₀ is a single scalar shared
//! by every sweep of one axis and is fit by profiling.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit_phase_and_linear, project_to_simplex};
use crate::simulator::{
    angle_grid, execute_batch, Axis, CircuitSpec, EmpiricalDistribution, GateOp, NoiseProfile,
    SeedStream, ShotCount, TransitionMatrix,
};

/// Calibration sweeps pair each axis with every (n-1)-bit preparation of
/// the non-rotated qubits.
pub fn calibration_sweep_plan(n: usize, n_theta: usize, axes: &[Axis]) -> Result<Vec<CircuitSpec>> {
    if n_theta < 3 {
        return Err(Error::InvalidArgument("n_theta must be at least 3".into()));
    }
    if axes.is_empty() {
        return Err(Error::InvalidArgument("at least one sweep axis is required".into()));
    }
    let grid = angle_grid(n_theta);
    let mut circuits = Vec::with_capacity(axes.len() * (1 << (n - 1)) * grid.len());
    for &axis in axes {
        for k_rest in 0..(1usize << (n - 1)) {
            for &theta in &grid {
                let mut circuit = CircuitSpec::new(n, 0)?;
                // Prepare |0, k>: X on every non-rotated qubit whose bit is set.
                for q in 1..n {
                    if (k_rest >> (n - 1 - q)) & 1 == 1 {
                        circuit.push(GateOp::X { qubit: q })?;
                    }
                }
                circuit.push(GateOp::Rotation { axis, theta, qubit: 0, swept: true })?;
                circuits.push(circuit);
            }
        }
    }
    Ok(circuits)
}

/// One executed calibration sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationSweep {
    pub axis: Axis,
    /// (n-1)-bit label of the non-rotated qubits.
    pub k_rest: usize,
    pub angles: Vec<f64>,
    pub observed: Vec<EmpiricalDistribution>,
}

/// Raw calibration measurements, grouped per sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationData {
    pub n: usize,
    pub n_theta: usize,
    pub shots: ShotCount,
    pub sweeps: Vec<CalibrationSweep>,
}

/// Per-axis preparation-phase estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisPhase {
    pub axis: Axis,
    pub theta0: f64,
    pub theta0_err: f64,
    pub residual_rms: f64,
}

/// Fitted transition matrix and preparation phases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub n: usize,
    pub n_theta: usize,
    pub shots: ShotCount,
    pub transition: TransitionMatrix,
    /// Standard errors of the (pre-projection) transition entries.
    pub transition_std_errors: DMatrix<f64>,
    pub phases: Vec<AxisPhase>,
    pub residual_rms: f64,
    pub warnings: Vec<String>,
}

impl CalibrationResult {
    /// θ₀ for an axis; 0 when the axis was not calibrated.
    pub fn theta0(&self, axis: Axis) -> f64 {
        self.phases.iter().find(|p| p.axis == axis).map(|p| p.theta0).unwrap_or(0.0)
    }

    pub fn axes(&self) -> Vec<Axis> {
        self.phases.iter().map(|p| p.axis).collect()
    }
}

/// Execute the calibration plan under a noise profile and group the
/// measurements by sweep.
pub fn run_calibration_sweeps(
    n: usize,
    n_theta: usize,
    axes: &[Axis],
    noise: &NoiseProfile,
    shots: ShotCount,
) -> Result<CalibrationData> {
    let circuits = calibration_sweep_plan(n, n_theta, axes)?;
    let results = execute_batch(&circuits, noise, shots, SeedStream::Calibration)?;
    let grid = angle_grid(n_theta);
    let per_sweep = grid.len();
    let mut sweeps = Vec::new();
    let mut cursor = 0;
    for &axis in axes {
        for k_rest in 0..(1usize << (n - 1)) {
            let observed = results[cursor..cursor + per_sweep].to_vec();
            cursor += per_sweep;
            sweeps.push(CalibrationSweep { axis, k_rest, angles: grid.clone(), observed });
        }
    }
    Ok(CalibrationData { n, n_theta, shots, sweeps })
}

/// Fit (T, θ₀) from calibration sweeps.
///
/// For each axis, the shared θ₀ is profiled while every (sweep, outcome)
/// pair is an independent linear target over the regressors
/// [cos²((θ+θ₀)/2), sin²((θ+θ₀)/2)]; the two coefficient vectors of sweep k
/// are columns k and k + 2^(n-1) of T. Columns estimated on several axes
/// are combined by inverse-variance weighting, then projected onto the
/// simplex so they sum to 1 exactly.
pub fn fit_calibration(data: &CalibrationData) -> Result<CalibrationResult> {
    let n = data.n;
    let dim = 1 << n;
    let half = 1 << (n - 1);

    // Coverage check before any fitting.
    let mut covered = vec![false; dim];
    for sweep in &data.sweeps {
        covered[sweep.k_rest] = true;
        covered[sweep.k_rest + half] = true;
    }
    let missing: Vec<usize> = (0..dim).filter(|&c| !covered[c]).collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteCalibration { missing });
    }

    let mut axes: Vec<Axis> = data.sweeps.iter().map(|s| s.axis).collect();
    axes.sort();
    axes.dedup();

    // Weighted accumulators per transition entry.
    let mut weight_sum = DMatrix::zeros(dim, dim);
    let mut weighted_value = DMatrix::zeros(dim, dim);
    let mut phases = Vec::new();
    let mut total_rss = 0.0;
    let mut total_points = 0usize;
    let mut warnings = Vec::new();

    for &axis in &axes {
        let sweeps: Vec<&CalibrationSweep> =
            data.sweeps.iter().filter(|s| s.axis == axis).collect();
        let angles = &sweeps[0].angles;
        for sweep in &sweeps {
            if sweep.angles != *angles {
                return Err(Error::InvalidArgument(
                    "calibration sweeps of one axis must share the angle grid".into(),
                ));
            }
        }

        // Targets: one column per (sweep, outcome) pair.
        let mut targets = DMatrix::zeros(angles.len(), sweeps.len() * dim);
        for (si, sweep) in sweeps.iter().enumerate() {
            for (ai, observed) in sweep.observed.iter().enumerate() {
                for m in 0..dim {
                    targets[(ai, si * dim + m)] = observed.dist.prob(m);
                }
            }
        }
        let basis = |theta: f64, row: &mut [f64]| {
            let c = (theta / 2.0).cos();
            row[0] = c * c;
            row[1] = 1.0 - c * c;
        };
        let fit = fit_phase_and_linear(angles, &targets, 2, basis)?;

        for (si, sweep) in sweeps.iter().enumerate() {
            let c0 = sweep.k_rest;
            let c1 = sweep.k_rest + half;
            for m in 0..dim {
                let col = si * dim + m;
                for (row_idx, dest) in [(0usize, c0), (1usize, c1)] {
                    let est = fit.linear.coefficients[(row_idx, col)];
                    let se = fit.linear.std_errors[(row_idx, col)];
                    let w = 1.0 / se.mul_add(se, 1e-16);
                    weighted_value[(m, dest)] += w * est;
                    weight_sum[(m, dest)] += w;
                }
            }
        }

        phases.push(AxisPhase {
            axis,
            theta0: fit.theta0,
            theta0_err: fit.theta0_err,
            residual_rms: fit.linear.residual_rms,
        });
        total_rss += fit.linear.rss;
        total_points += angles.len() * targets.ncols();
    }

    // Combine, then force each column onto the simplex.
    let mut t = DMatrix::zeros(dim, dim);
    let mut std_errors = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            t[(i, j)] = weighted_value[(i, j)] / weight_sum[(i, j)];
            std_errors[(i, j)] = (1.0 / weight_sum[(i, j)]).sqrt();
        }
    }
    for j in 0..dim {
        let col: Vec<f64> = (0..dim).map(|i| t[(i, j)]).collect();
        let projected = project_to_simplex(&col);
        for i in 0..dim {
            t[(i, j)] = projected[i];
        }
    }
    let transition = TransitionMatrix::from_matrix(n, t)?;
    let cond = transition.condition_number();
    if cond > 1e8 {
        warnings.push(format!("fitted transition matrix is ill-conditioned (cond = {cond:.3e})"));
    }

    Ok(CalibrationResult {
        n,
        n_theta: data.n_theta,
        shots: data.shots,
        transition,
        transition_std_errors: std_errors,
        phases,
        residual_rms: (total_rss / total_points as f64).sqrt(),
        warnings,
    })
}

/// Sweep execution plus fit in one call.
pub fn run_calibration(
    n: usize,
    n_theta: usize,
    axes: &[Axis],
    noise: &NoiseProfile,
    shots: ShotCount,
) -> Result<CalibrationResult> {
    let data = run_calibration_sweeps(n, n_theta, axes, noise, shots)?;
    fit_calibration(&data)
}

/// One row of the hyperparameter-sweep table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperparameterRow {
    pub n_theta: usize,
    pub shots: ShotCount,
    pub parameter: String,
    pub estimate: f64,
    pub std_error: f64,
}

/// Repeat the calibration fit over a (Nθ, shots) grid and tabulate every
/// fitted parameter with its standard error, averaging over `repeats`
/// re-seeded runs per grid point.
pub fn calibration_hyperparameter_sweep(
    n: usize,
    n_theta_grid: &[usize],
    shots_grid: &[ShotCount],
    axes: &[Axis],
    noise: &NoiseProfile,
    repeats: usize,
) -> Result<Vec<HyperparameterRow>> {
    if n_theta_grid.is_empty() || shots_grid.is_empty() {
        return Err(Error::InvalidArgument("hyperparameter grids must be nonempty".into()));
    }
    let repeats = repeats.max(1);
    let dim = 1 << n;
    let mut rows = Vec::new();
    for &n_theta in n_theta_grid {
        for &shots in shots_grid {
            let mut estimates: Vec<Vec<f64>> = Vec::new();
            let mut errors: Vec<Vec<f64>> = Vec::new();
            let mut names: Vec<String> = Vec::new();
            for rep in 0..repeats {
                let reseeded = NoiseProfile {
                    seed: crate::simulator::derive_seed(
                        noise.seed,
                        SeedStream::Analysis,
                        (n_theta * 1_000_003 + rep) as u64,
                    ),
                    ..noise.clone()
                };
                let cal = run_calibration(n, n_theta, axes, &reseeded, shots)?;
                let mut est = Vec::new();
                let mut err = Vec::new();
                let mut nm = Vec::new();
                for i in 0..dim {
                    for j in 0..dim {
                        nm.push(format!("t_{i}_{j}"));
                        est.push(cal.transition.entry(i, j));
                        err.push(cal.transition_std_errors[(i, j)]);
                    }
                }
                for phase in &cal.phases {
                    nm.push(format!("theta0_{}", phase.axis));
                    est.push(phase.theta0);
                    err.push(phase.theta0_err);
                }
                names = nm;
                estimates.push(est);
                errors.push(err);
            }
            for (pi, name) in names.iter().enumerate() {
                let mean_est =
                    estimates.iter().map(|e| e[pi]).sum::<f64>() / estimates.len() as f64;
                let mean_err = errors.iter().map(|e| e[pi]).sum::<f64>() / errors.len() as f64;
                rows.push(HyperparameterRow {
                    n_theta,
                    shots,
                    parameter: name.clone(),
                    estimate: mean_est,
                    std_error: mean_err,
                });
            }
        }
    }
    Ok(rows)
}
