//! Damped Gauss-Newton (Levenberg-Marquardt style) least squares.
//!
//! The normal equations use Marquardt scaling, `(J^T J + lambda diag(J^T J))
//! delta = J^T r`. Damping starts at zero so a linear model converges in the
//! first accepted step; it is multiplied by 10 when a trial step is rejected
//! and divided by 10 when one is accepted. Steps that leave the model's
//! parameter domain (non-positive width or period) or produce non-finite
//! residuals are rejected rather than erroring, and a singular normal
//! matrix at every damping level yields a non-converged result, never a
//! panic.

use crate::coincidence::Pattern;
use crate::error::{Error, Result};

use super::models::FitModel;

/// Solver tolerances and limits.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Cap on accepted iterations.
    pub max_iterations: usize,
    /// Convergence: relative change of the residual norm below this...
    pub residual_tol: f64,
    /// ...and the largest relative parameter step below this.
    pub step_tol: f64,
    /// Damping escalation gives up beyond this value.
    pub max_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            residual_tol: 1e-10,
            step_tol: 1e-8,
            max_damping: 1e12,
        }
    }
}

/// Converged (or not) fit: parameter vector, residual 2-norm, accepted
/// iteration count, and per-parameter standard errors from the final
/// normal-equations curvature (zero for pinned parameters).
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub param_stderr: Vec<f64>,
}

/// Fit `model` to `data` starting from `init` (full-length parameter
/// vector; pinned entries are overwritten by their pinned values).
pub fn least_squares(
    model: &FitModel,
    data: &Pattern,
    init: &[f64],
    opts: &FitOptions,
) -> Result<FitResult> {
    let n_params = model.param_count();
    if init.len() != n_params {
        return Err(Error::input(format!(
            "initial guess has {} entries, model takes {n_params}",
            init.len()
        )));
    }
    if init.iter().any(|p| !p.is_finite()) {
        return Err(Error::input("initial guess must be finite"));
    }
    if data
        .counts()
        .iter()
        .chain(data.abscissa())
        .any(|v| !v.is_finite())
    {
        return Err(Error::input("data must be finite"));
    }

    let free: Vec<usize> = (0..n_params)
        .filter(|&i| model.pinned_value(i).is_none())
        .collect();
    if data.len() <= free.len() {
        return Err(Error::input(format!(
            "under-determined fit: {} data points for {} free parameters",
            data.len(),
            free.len()
        )));
    }

    let mut params = init.to_vec();
    model.apply_pins(&mut params);
    let mut residuals = eval_residuals(model, data, &params)?;
    let mut norm = l2(&residuals);
    if !norm.is_finite() {
        return Err(Error::input(
            "model is non-finite at the initial guess".to_string(),
        ));
    }

    let n = data.len();
    let nf = free.len();
    let mut jac = vec![vec![0.0; nf]; n];
    let mut full_row = vec![0.0; n_params];
    let mut iterations = 0usize;
    let mut converged = false;
    // A residual this far below the data scale is numerically zero; the
    // relative-change test is noise down there.
    let residual_floor = 1e-14 * l2(data.counts());

    'outer: while iterations < opts.max_iterations {
        if build_jacobian(model, data, &params, &free, &mut jac, &mut full_row).is_err() {
            break;
        }
        let normal = normal_matrix(&jac);
        let gradient = jt_r(&jac, &residuals);

        let mut lambda = 0.0f64;
        loop {
            let mut damped = normal.clone();
            for (j, row) in damped.iter_mut().enumerate() {
                row[j] += lambda * normal[j][j];
            }
            let step = cholesky_solve(&damped, &gradient);

            let accepted = step.as_ref().ok().and_then(|delta| {
                let mut trial = params.clone();
                for (k, &j) in free.iter().enumerate() {
                    trial[j] += delta[k];
                }
                if !model.params_in_domain(&trial) {
                    return None;
                }
                let trial_res = eval_residuals(model, data, &trial).ok()?;
                let trial_norm = l2(&trial_res);
                // Ties accepted: at the residual floor the step that
                // triggers the convergence test no longer reduces the norm.
                if trial_norm.is_finite() && trial_norm <= norm {
                    Some((trial, trial_res, trial_norm, delta.clone()))
                } else {
                    None
                }
            });

            match accepted {
                Some((trial, trial_res, trial_norm, delta)) => {
                    let res_change = (norm - trial_norm) / norm.max(f64::MIN_POSITIVE);
                    let max_step = free
                        .iter()
                        .enumerate()
                        .map(|(k, &j)| delta[k].abs() / trial[j].abs().max(1e-8))
                        .fold(0.0, f64::max);
                    params = trial;
                    residuals = trial_res;
                    norm = trial_norm;
                    iterations += 1;
                    let res_ok = res_change < opts.residual_tol || trial_norm <= residual_floor;
                    if res_ok && max_step < opts.step_tol {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                None => {
                    lambda = if lambda == 0.0 { 1e-4 } else { lambda * 10.0 };
                    if lambda > opts.max_damping {
                        break 'outer;
                    }
                }
            }
        }
    }

    let param_stderr = standard_errors(model, data, &params, &free, n, nf, norm);
    Ok(FitResult {
        params,
        residual_norm: norm,
        iterations,
        converged,
        param_stderr,
    })
}

/// Central-difference Jacobian of the model values over `xs` with respect
/// to the full parameter vector; step `1e-6 max(1, |p|)` per parameter.
/// Validation oracle for the analytic partials.
pub fn numerical_jacobian(model: &FitModel, params: &[f64], xs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n_params = model.param_count();
    let mut out = vec![vec![0.0; n_params]; xs.len()];
    for j in 0..n_params {
        let h = 1e-6 * params[j].abs().max(1.0);
        let mut plus = params.to_vec();
        plus[j] += h;
        let mut minus = params.to_vec();
        minus[j] -= h;
        for (i, &x) in xs.iter().enumerate() {
            let fp = model.eval(&plus, x)?;
            let fm = model.eval(&minus, x)?;
            out[i][j] = (fp - fm) / (2.0 * h);
        }
    }
    Ok(out)
}

fn eval_residuals(model: &FitModel, data: &Pattern, params: &[f64]) -> Result<Vec<f64>> {
    data.abscissa()
        .iter()
        .zip(data.counts())
        .map(|(&x, &y)| Ok(y - model.eval(params, x)?))
        .collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum::<f64>().sqrt()
}

fn build_jacobian(
    model: &FitModel,
    data: &Pattern,
    params: &[f64],
    free: &[usize],
    jac: &mut [Vec<f64>],
    full_row: &mut [f64],
) -> Result<()> {
    for (i, &x) in data.abscissa().iter().enumerate() {
        model.jacobian_row(params, x, full_row)?;
        for (k, &j) in free.iter().enumerate() {
            if !full_row[j].is_finite() {
                return Err(Error::parameter("non-finite jacobian entry"));
            }
            // Residuals are y - f, so the residual Jacobian is -df/dp;
            // the sign cancels in the normal equations below.
            jac[i][k] = full_row[j];
        }
    }
    Ok(())
}

#[allow(clippy::needless_range_loop)]
fn normal_matrix(jac: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let nf = jac.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; nf]; nf];
    for row in jac {
        for a in 0..nf {
            for b in a..nf {
                out[a][b] += row[a] * row[b];
            }
        }
    }
    for a in 0..nf {
        for b in 0..a {
            out[a][b] = out[b][a];
        }
    }
    out
}

fn jt_r(jac: &[Vec<f64>], residuals: &[f64]) -> Vec<f64> {
    let nf = jac.first().map_or(0, Vec::len);
    let mut out = vec![0.0; nf];
    for (row, &r) in jac.iter().zip(residuals) {
        for (o, &j) in out.iter_mut().zip(row) {
            *o += j * r;
        }
    }
    out
}

/// Solve `A x = b` for symmetric positive-definite `A`; fails when the
/// factorization hits a non-positive pivot.
#[allow(clippy::needless_range_loop, clippy::result_unit_err)]
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> std::result::Result<Vec<f64>, ()> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if !sum.is_finite() || sum <= 0.0 {
                    return Err(());
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(())
    }
}

fn standard_errors(
    model: &FitModel,
    data: &Pattern,
    params: &[f64],
    free: &[usize],
    n: usize,
    nf: usize,
    norm: f64,
) -> Vec<f64> {
    let mut stderr = vec![0.0; model.param_count()];
    if n <= nf {
        return stderr;
    }
    let mut jac = vec![vec![0.0; nf]; n];
    let mut full_row = vec![0.0; model.param_count()];
    if build_jacobian(model, data, params, free, &mut jac, &mut full_row).is_err() {
        return stderr;
    }
    let normal = normal_matrix(&jac);
    let sigma2 = norm * norm / (n - nf) as f64;
    // Diagonal of the covariance via one solve per free parameter.
    for (k, &j) in free.iter().enumerate() {
        let mut unit = vec![0.0; nf];
        unit[k] = 1.0;
        if let Ok(col) = cholesky_solve(&normal, &unit) {
            let var = sigma2 * col[k];
            stderr[j] = if var > 0.0 { var.sqrt() } else { 0.0 };
        }
    }
    stderr
}
