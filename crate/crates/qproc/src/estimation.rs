//! Fitting and projection primitives: linear least squares in a sinusoid
//! basis, separable phase + linear fits, simplex-constrained mitigation,
//! and nearest-unitary projection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{CMatrix, UnitaryOperator};
use crate::simulator::{ProbabilityDistribution, TransitionMatrix};

/// Smallest relative singular value treated as nonzero in fit designs.
const RANK_TOL: f64 = 1e-10;

/// Coefficients of p_j(θ) = (A_j + B_j cos θ + C_j sin θ)/2 per outcome j,
/// with standard errors from the least-squares covariance.
#[derive(Debug, Clone)]
pub struct SinusoidFit {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub a_err: Vec<f64>,
    pub b_err: Vec<f64>,
    pub c_err: Vec<f64>,
    /// Root-mean-square model-data gap over all points and outcomes.
    pub residual_rms: f64,
}

impl SinusoidFit {
    pub fn outcomes(&self) -> usize {
        self.a.len()
    }
}

/// Per-outcome ordinary (or weighted) least squares on regressors
/// (1, cos θ, sin θ). `data[i]` is the distribution observed at `angles[i]`.
pub fn fit_sinusoid(
    angles: &[f64],
    data: &[ProbabilityDistribution],
    weights: Option<&[f64]>,
) -> Result<SinusoidFit> {
    if angles.len() != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} angles but {} distributions",
            angles.len(),
            data.len()
        )));
    }
    if angles.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 angles to fit a sinusoid".into()));
    }
    if let Some(w) = weights {
        if w.len() != angles.len() {
            return Err(Error::DimensionMismatch("weights length != angles length".into()));
        }
        if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
    }
    let dim = data[0].dim();
    if data.iter().any(|d| d.dim() != dim) {
        return Err(Error::DimensionMismatch("distributions have mixed dimensions".into()));
    }

    let m = angles.len();
    let mut design = DMatrix::zeros(m, 3);
    for (i, &theta) in angles.iter().enumerate() {
        design[(i, 0)] = 1.0;
        design[(i, 1)] = theta.cos();
        design[(i, 2)] = theta.sin();
    }
    let mut targets = DMatrix::zeros(m, dim);
    for (i, dist) in data.iter().enumerate() {
        for j in 0..dim {
            targets[(i, j)] = dist.prob(j);
        }
    }
    let solved = solve_linear_multi(&design, &targets, weights)?;

    // Model coefficients are twice the regression coefficients.
    let take = |row: usize, m: &DMatrix<f64>| (0..dim).map(|j| 2.0 * m[(row, j)]).collect::<Vec<f64>>();
    Ok(SinusoidFit {
        a: take(0, &solved.coefficients),
        b: take(1, &solved.coefficients),
        c: take(2, &solved.coefficients),
        a_err: take(0, &solved.std_errors),
        b_err: take(1, &solved.std_errors),
        c_err: take(2, &solved.std_errors),
        residual_rms: solved.residual_rms,
    })
}

/// Output of a multi-target linear least-squares solve.
#[derive(Debug, Clone)]
pub struct LinearFit {
    /// k × targets coefficient matrix.
    pub coefficients: DMatrix<f64>,
    /// Matching standard errors.
    pub std_errors: DMatrix<f64>,
    pub residual_rms: f64,
    pub rss: f64,
}

/// Least squares with a shared design for many target columns, solved by SVD.
/// `weights` are per-row multipliers of the squared error.
pub fn solve_linear_multi(
    design: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    weights: Option<&[f64]>,
) -> Result<LinearFit> {
    let m = design.nrows();
    let k = design.ncols();
    if targets.nrows() != m {
        return Err(Error::DimensionMismatch("design and target row counts differ".into()));
    }
    let (wdesign, wtargets) = match weights {
        None => (design.clone(), targets.clone()),
        Some(w) => {
            let mut d = design.clone();
            let mut t = targets.clone();
            for i in 0..m {
                let s = w[i].sqrt();
                for j in 0..k {
                    d[(i, j)] *= s;
                }
                for j in 0..t.ncols() {
                    t[(i, j)] *= s;
                }
            }
            (d, t)
        }
    };

    let svd = wdesign.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * max_sv).count();
    if rank < k {
        return Err(Error::IllConditioned(format!(
            "design matrix rank {rank} < {k} (degenerate angles)"
        )));
    }

    let coefficients = svd
        .solve(&wtargets, RANK_TOL * max_sv)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;

    let fitted = &wdesign * &coefficients;
    let resid = &wtargets - &fitted;
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let total_points = (m * targets.ncols()) as f64;
    let residual_rms = (rss / total_points).sqrt();

    // Per-column sigma^2 from its own residuals; covariance sigma^2 (X^T X)^-1.
    let xtx = wdesign.transpose() * &wdesign;
    let xtx_inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("normal matrix not invertible".into()))?;
    let dof = (m.saturating_sub(k)).max(1) as f64;
    let mut std_errors = DMatrix::zeros(k, targets.ncols());
    for j in 0..targets.ncols() {
        let col_rss: f64 = (0..m).map(|i| resid[(i, j)] * resid[(i, j)]).sum();
        let sigma2 = col_rss / dof;
        for r in 0..k {
            std_errors[(r, j)] = (sigma2 * xtx_inv[(r, r)]).max(0.0).sqrt();
        }
    }

    Ok(LinearFit { coefficients, std_errors, residual_rms, rss })
}

/// Separable fit of a shared scalar phase plus linear coefficients.
#[derive(Debug, Clone)]
pub struct PhaseFit {
    pub theta0: f64,
    /// Profile-curvature standard error of θ₀ (conditional-fit estimate).
    pub theta0_err: f64,
    pub linear: LinearFit,
    pub inner_solves: usize,
}

/// Maximum number of inner linear solves spent in the θ₀ search.
pub const PHASE_SOLVE_BUDGET: usize = 200;

const PHASE_RANGE: f64 = std::f64::consts::FRAC_PI_4;
const PHASE_GRID_POINTS: usize = 101;
const PHASE_TOL: f64 = 1e-9;

/// Fit `targets[i][j] ≈ Σ_r coeff[r][j] · basis(angles[i] + θ₀)[r]` with a
/// single shared θ₀ found by profiling: a 101-point scan of [-π/4, π/4]
/// followed by golden-section refinement, the inner problem being linear
/// least squares.
pub fn fit_phase_and_linear<F>(
    angles: &[f64],
    targets: &DMatrix<f64>,
    num_regressors: usize,
    basis: F,
) -> Result<PhaseFit>
where
    F: Fn(f64, &mut [f64]),
{
    if angles.len() != targets.nrows() {
        return Err(Error::DimensionMismatch("angles and target rows differ".into()));
    }
    if angles.len() < num_regressors + 1 {
        return Err(Error::InvalidArgument("not enough angles for the phase fit".into()));
    }

    let mut solves = 0usize;
    let mut evaluate = |theta0: f64| -> Result<f64> {
        solves += 1;
        if solves > PHASE_SOLVE_BUDGET {
            return Err(Error::FitFailure(format!(
                "phase search failed to converge within {PHASE_SOLVE_BUDGET} inner solves"
            )));
        }
        Ok(profiled_fit(angles, targets, num_regressors, &basis, theta0)?.rss)
    };

    // Grid scan.
    let mut best_idx = 0;
    let mut best_rss = f64::INFINITY;
    let grid: Vec<f64> = (0..PHASE_GRID_POINTS)
        .map(|i| -PHASE_RANGE + 2.0 * PHASE_RANGE * i as f64 / (PHASE_GRID_POINTS - 1) as f64)
        .collect();
    for (i, &theta0) in grid.iter().enumerate() {
        let rss = evaluate(theta0)?;
        if rss < best_rss {
            best_rss = rss;
            best_idx = i;
        }
    }

    // Golden-section refinement over the bracketing interval.
    let mut lo = grid[best_idx.saturating_sub(1)];
    let mut hi = grid[(best_idx + 1).min(grid.len() - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = evaluate(x1)?;
    let mut f2 = evaluate(x2)?;
    while hi - lo > PHASE_TOL {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = evaluate(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = evaluate(x2)?;
        }
    }
    let theta0 = 0.5 * (lo + hi);
    let linear = profiled_fit(angles, targets, num_regressors, &basis, theta0)?;

    // θ₀ standard error from the profile curvature: var ≈ 2σ² / RSS''(θ₀).
    let h = 1e-4;
    let rss_plus = evaluate(theta0 + h)?;
    let rss_minus = evaluate(theta0 - h)?;
    let curvature = (rss_plus - 2.0 * linear.rss + rss_minus) / (h * h);
    let points = (angles.len() * targets.ncols()) as f64;
    let dof = (points - (num_regressors * targets.ncols()) as f64 - 1.0).max(1.0);
    let sigma2 = linear.rss / dof;
    let theta0_err = if curvature > 0.0 { (2.0 * sigma2 / curvature).sqrt() } else { f64::INFINITY };

    Ok(PhaseFit { theta0, theta0_err, linear, inner_solves: solves })
}

fn profiled_fit<F>(
    angles: &[f64],
    targets: &DMatrix<f64>,
    num_regressors: usize,
    basis: &F,
    theta0: f64,
) -> Result<LinearFit>
where
    F: Fn(f64, &mut [f64]),
{
    let m = angles.len();
    let mut design = DMatrix::zeros(m, num_regressors);
    let mut row = vec![0.0; num_regressors];
    for (i, &theta) in angles.iter().enumerate() {
        basis(theta + theta0, &mut row);
        for (r, &v) in row.iter().enumerate() {
            design[(i, r)] = v;
        }
    }
    solve_linear_multi(&design, targets, None)
}

/// Result of assignment-error mitigation on one distribution.
#[derive(Debug, Clone)]
pub struct Mitigated {
    pub dist: ProbabilityDistribution,
    /// ‖q - T·p‖₂ at the solution.
    pub residual: f64,
    pub warning: Option<String>,
}

/// Recover the pre-readout distribution: argmin over the probability
/// simplex of ‖q - T·p‖₂, solved as nonnegative least squares followed by
/// Euclidean projection onto the simplex when the mass is off.
pub fn mitigate_distribution(
    q: &ProbabilityDistribution,
    t: &TransitionMatrix,
) -> Result<Mitigated> {
    if q.n() != t.n() {
        return Err(Error::DimensionMismatch(format!(
            "distribution on {} qubits, transition matrix on {}",
            q.n(),
            t.n()
        )));
    }
    let warning = {
        let cond = t.condition_number();
        (cond > 1e8).then(|| format!("transition matrix is severely ill-conditioned (cond = {cond:.3e})"))
    };

    let dim = q.dim();
    let a = t.matrix().clone();
    let b = DVector::from_iterator(dim, q.as_slice().iter().cloned());
    let mut p = nnls(&a, &b)?;

    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        let projected = project_to_simplex(p.as_slice());
        p = DVector::from_vec(projected);
    }
    let residual = (&b - &a * &p).norm();
    let dist = ProbabilityDistribution::exact(q.n(), p.iter().cloned().collect())?;
    Ok(Mitigated { dist, residual, warning })
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|&x| (x - tau).max(0.0)).collect();
    // Make the unit sum exact by absorbing the round-off into the largest entry.
    let sum: f64 = out.iter().sum();
    if sum > 0.0 {
        let gap = 1.0 - sum;
        let imax = out
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        out[imax] = (out[imax] + gap).max(0.0);
    } else {
        let dim = out.len();
        out.iter_mut().for_each(|x| *x = 1.0 / dim as f64);
    }
    out
}

/// Lawson-Hanson nonnegative least squares: min ‖a·x - b‖₂ s.t. x ≥ 0.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    let mut passive = vec![false; n];
    let mut x = DVector::zeros(n);
    let max_iter = 3 * n * n + 30;

    for _ in 0..max_iter {
        let grad = a.transpose() * (b - a * &x);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !passive[j] && grad[j] > 1e-12 && best.is_none_or(|(_, g)| grad[j] > g) {
                best = Some((j, grad[j]));
            }
        }
        let Some((enter, _)) = best else {
            return Ok(x);
        };
        passive[enter] = true;

        loop {
            let s = solve_passive(a, b, &passive)?;
            let negative: Vec<usize> = passive
                .iter()
                .enumerate()
                .filter(|&(j, &active)| active && s[j] <= 1e-14)
                .map(|(j, _)| j)
                .collect();
            if negative.is_empty() {
                for j in 0..n {
                    x[j] = if passive[j] { s[j] } else { 0.0 };
                }
                break;
            }
            // Step toward s until the first passive variable hits zero.
            let mut alpha = f64::INFINITY;
            for &j in &negative {
                let denom = x[j] - s[j];
                if denom > 0.0 {
                    alpha = alpha.min(x[j] / denom);
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for j in 0..n {
                if passive[j] {
                    x[j] += alpha * (s[j] - x[j]);
                    if x[j] <= 1e-14 {
                        x[j] = 0.0;
                        passive[j] = false;
                    }
                }
            }
        }
    }
    Err(Error::FitFailure("nonnegative least squares did not converge".into()))
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> Result<DVector<f64>> {
    let cols: Vec<usize> = passive
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(j, _)| j)
        .collect();
    let sub = a.select_columns(cols.iter());
    let svd = sub.svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let sol = svd
        .solve(b, RANK_TOL * max_sv.max(1e-300))
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let mut full = DVector::zeros(a.ncols());
    for (idx, &j) in cols.iter().enumerate() {
        full[j] = sol[idx];
    }
    Ok(full)
}

/// Polar projection: the unitary factor W of M = W·P, together with the
/// distance ‖M - W‖_F.
pub fn nearest_unitary(m: &CMatrix) -> Result<(UnitaryOperator, f64)> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "nearest_unitary needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = m.clone().svd(true, true);
    let smallest = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smallest <= 1e-12 * largest.max(1.0) {
        return Err(Error::SingularMatrix { smallest_sv: smallest });
    }
    let u = svd.u.as_ref().expect("svd with vectors");
    let v_t = svd.v_t.as_ref().expect("svd with vectors");
    let w = u * v_t;
    let distance = (m - &w).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let op = UnitaryOperator::new(w)?;
    Ok((op, distance))
}

/// Complex least-squares solve of min ‖a·x - b‖₂ via SVD.
pub fn solve_complex_lstsq(
    a: &CMatrix,
    b: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * max_sv).count();
    if rank < a.ncols() {
        return Err(Error::IllConditioned(format!(
            "system rank {rank} below unknown count {} (underdetermined)",
            a.ncols()
        )));
    }
    svd.solve(b, RANK_TOL * max_sv).map_err(|e| Error::IllConditioned(e.to_string()))
}
