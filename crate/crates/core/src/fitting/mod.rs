//! Nonlinear least-squares fitting of scan patterns and visibility
//! extraction.

mod models;
mod solver;

pub use models::{FitModel, ModelKind};
pub use solver::{least_squares, numerical_jacobian, FitOptions, FitResult};

use crate::coincidence::Pattern;
use crate::error::{Error, Result};
use crate::geometry::OpticalLayout;

/// Sinc-envelope scale for the double-slit model, pinned from the layout:
/// `sqrt(3) / (pi w)` with `w` the mean envelope width, which matches the
/// sinc^2 curvature at its peak to the squared Gaussian envelopes.
pub fn double_slit_a_eff(layout: &OpticalLayout) -> f64 {
    let mean_width = 0.5 * (layout.env_width_1 + layout.env_width_2);
    3f64.sqrt() / (std::f64::consts::PI * mean_width)
}

/// Fringe visibility `(max - min) / (max + min)` of the raw counts,
/// optionally restricted to an abscissa window.
pub fn visibility_raw(pattern: &Pattern, window: Option<(f64, f64)>) -> Result<f64> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut seen = false;
    for (&x, &c) in pattern.abscissa().iter().zip(pattern.counts()) {
        if x < lo || x > hi {
            continue;
        }
        seen = true;
        max = max.max(c);
        min = min.min(c);
    }
    if !seen {
        return Err(Error::input(format!(
            "no pattern points in window [{lo}, {hi}]"
        )));
    }
    if max + min <= 0.0 {
        return Err(Error::input(
            "visibility undefined: max + min of the counts is not positive",
        ));
    }
    Ok((max - min) / (max + min))
}

/// A visibility extracted from a fit, clipped to [0, 1]; `clipped` is set
/// when the raw fitted value fell outside the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility {
    pub value: f64,
    pub clipped: bool,
}

/// Visibility of a converged fit: the `V` parameter for the double-slit
/// model, `A / B` for the fringe model.
pub fn visibility_from_fit(result: &FitResult, model: &FitModel) -> Result<Visibility> {
    if !result.converged {
        return Err(Error::state(
            "cannot extract a visibility from a fit that did not converge",
        ));
    }
    let raw = match model.kind() {
        ModelKind::DoubleSlit => result.params[4],
        ModelKind::Fringe => {
            let (a, b) = (result.params[0], result.params[3]);
            if a == 0.0 {
                0.0
            } else if b == 0.0 {
                f64::INFINITY
            } else {
                a / b
            }
        }
        ModelKind::Gaussian => return Err(Error::input("the gaussian model has no visibility")),
    };
    let value = raw.clamp(0.0, 1.0);
    Ok(Visibility {
        value,
        clipped: raw != value,
    })
}

/// Data-driven initial guess for a fit of `model` to `data`:
/// amplitude from the count range, centre from the peak (double-slit:
/// the count-weighted centroid), width from the half-maximum width,
/// period from the peak-to-trough spacing, and phases from a projection
/// onto the estimated fringe.
pub fn initial_guess(model: &FitModel, data: &Pattern) -> Result<Vec<f64>> {
    if data.len() < 3 {
        return Err(Error::input("too few points for an initial guess"));
    }
    let xs = data.abscissa();
    let ys = data.counts();
    let max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = xs[xs.len() - 1] - xs[0];

    let guess = match model.kind() {
        ModelKind::Gaussian => {
            let x_peak = xs[data.argmax()];
            let amplitude = (max - min).max(f64::MIN_POSITIVE);
            let width = half_max_width(xs, ys, min + 0.5 * amplitude)
                .map(|fwhm| fwhm / 2.3548)
                .unwrap_or(span / 6.0)
                .max(span / (xs.len() as f64 * 4.0));
            vec![amplitude, x_peak, width, min]
        }
        ModelKind::DoubleSlit => {
            let center = centroid(xs, ys, min);
            let period = peak_to_trough_period(xs, ys).unwrap_or(span / 4.0);
            let (phase, modulation) = fringe_projection(xs, ys, center, period);
            let amplitude = (max - min).max(f64::MIN_POSITIVE);
            vec![
                amplitude,
                center,
                period,
                phase,
                modulation.clamp(0.05, 0.999),
                min,
            ]
        }
        ModelKind::Fringe => {
            let mid = 0.5 * (max + min);
            let amplitude = 0.5 * (max - min);
            let omega = 4.0;
            let (mut c, mut s) = (0.0, 0.0);
            for (&x, &y) in xs.iter().zip(ys) {
                c += (y - mid) * (omega * x).cos();
                s += (y - mid) * (omega * x).sin();
            }
            vec![amplitude, omega, (-s).atan2(c), mid]
        }
    };
    Ok(guess)
}

/// Serialize a fit result with named parameters.
pub fn fit_result_json(model: &FitModel, result: &FitResult) -> serde_json::Value {
    let names = model.param_names();
    let params: serde_json::Map<String, serde_json::Value> = names
        .iter()
        .zip(&result.params)
        .map(|(n, v)| (n.to_string(), serde_json::json!(v)))
        .collect();
    let stderr: serde_json::Map<String, serde_json::Value> = names
        .iter()
        .zip(&result.param_stderr)
        .map(|(n, v)| (n.to_string(), serde_json::json!(v)))
        .collect();
    serde_json::json!({
        "model": model.kind().name(),
        "params": params,
        "stderr": stderr,
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "converged": result.converged,
    })
}

/// Full width of the region where counts exceed `level`, if well formed.
fn half_max_width(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    let first = ys.iter().position(|&y| y >= level)?;
    let last = ys.iter().rposition(|&y| y >= level)?;
    (last > first).then(|| xs[last] - xs[first])
}

/// Count-weighted centroid above the baseline.
fn centroid(xs: &[f64], ys: &[f64], baseline: f64) -> f64 {
    let mut weight = 0.0;
    let mut moment = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let w = (y - baseline).max(0.0);
        weight += w;
        moment += w * x;
    }
    if weight > 0.0 {
        moment / weight
    } else {
        0.5 * (xs[0] + xs[xs.len() - 1])
    }
}

/// Twice the distance from the global maximum to the nearest local
/// minimum: an FFT-free period estimate.
fn peak_to_trough_period(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let peak = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)?;
    let mut nearest: Option<usize> = None;
    for i in 1..ys.len() - 1 {
        if ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1] && i != peak {
            let better = match nearest {
                Some(j) => (i as isize - peak as isize).abs() < (j as isize - peak as isize).abs(),
                None => true,
            };
            if better {
                nearest = Some(i);
            }
        }
    }
    let trough = nearest?;
    let period = 2.0 * (xs[trough] - xs[peak]).abs();
    (period > 0.0).then_some(period)
}

/// Project the detrended counts onto cos/sin at the trial period to
/// estimate the fringe phase at `center` and the modulation depth.
fn fringe_projection(xs: &[f64], ys: &[f64], center: f64, period: f64) -> (f64, f64) {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut c = 0.0;
    let mut s = 0.0;
    let mut power = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let chi = std::f64::consts::TAU * (x - center) / period;
        let d = y - mean;
        c += d * chi.cos();
        s += d * chi.sin();
        power += d * d;
    }
    let phase = (-s).atan2(c);
    let modulation = if power > 0.0 {
        (c * c + s * s).sqrt() / power.sqrt() / (0.5 * ys.len() as f64).sqrt()
    } else {
        0.5
    };
    (phase, modulation)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_relative_eq;

    use crate::coincidence::AbscissaKind;

    use super::*;

    fn pattern(xs: Vec<f64>, ys: Vec<f64>) -> Pattern {
        Pattern::new(xs, ys, AbscissaKind::Position).unwrap()
    }

    #[test]
    fn raw_visibility_examples() {
        let two = pattern(vec![0.0, 1.0], vec![330.0, 72.0]);
        assert_relative_eq!(visibility_raw(&two, None).unwrap(), 0.64179, epsilon = 1e-5);

        let constant = pattern(vec![0.0, 1.0, 2.0], vec![5.0, 5.0, 5.0]);
        assert_relative_eq!(visibility_raw(&constant, None).unwrap(), 0.0);

        let touching = pattern(vec![0.0, 1.0], vec![0.0, 10.0]);
        assert_relative_eq!(visibility_raw(&touching, None).unwrap(), 1.0);
    }

    #[test]
    fn raw_visibility_rejects_empty_window() {
        let p = pattern(vec![0.0, 1.0], vec![1.0, 2.0]);
        assert!(matches!(
            visibility_raw(&p, Some((5.0, 6.0))),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn fit_visibility_requires_convergence() {
        let result = FitResult {
            params: vec![0.375, 4.0, 0.0, 0.5],
            residual_norm: 0.0,
            iterations: 0,
            converged: false,
            param_stderr: vec![0.0; 4],
        };
        assert!(matches!(
            visibility_from_fit(&result, &FitModel::fringe()),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn fit_visibility_for_both_fringe_models() {
        let fringe = FitResult {
            params: vec![0.375, 4.0, 0.0, 0.5],
            residual_norm: 0.0,
            iterations: 3,
            converged: true,
            param_stderr: vec![0.0; 4],
        };
        let v = visibility_from_fit(&fringe, &FitModel::fringe()).unwrap();
        assert_relative_eq!(v.value, 0.75, epsilon = 1e-12);
        assert!(!v.clipped);

        let ds = FitResult {
            params: vec![100.0, 6.3, 1.0, 0.0, 0.64, 2.0],
            residual_norm: 0.1,
            iterations: 7,
            converged: true,
            param_stderr: vec![0.0; 6],
        };
        let v = visibility_from_fit(&ds, &FitModel::double_slit(0.6)).unwrap();
        assert_relative_eq!(v.value, 0.64, epsilon = 1e-12);

        let zero = FitResult {
            params: vec![0.0, 4.0, 0.0, 0.5],
            residual_norm: 0.0,
            iterations: 1,
            converged: true,
            param_stderr: vec![0.0; 4],
        };
        assert_relative_eq!(
            visibility_from_fit(&zero, &FitModel::fringe())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn fit_visibility_clips_out_of_range_values() {
        let over = FitResult {
            params: vec![100.0, 6.3, 1.0, 0.0, 1.03, 2.0],
            residual_norm: 0.1,
            iterations: 7,
            converged: true,
            param_stderr: vec![0.0; 6],
        };
        let v = visibility_from_fit(&over, &FitModel::double_slit(0.6)).unwrap();
        assert_relative_eq!(v.value, 1.0);
        assert!(v.clipped);
    }

    #[test]
    fn gaussian_guess_lands_in_the_basin() {
        let model = FitModel::gaussian();
        let truth = [220.0, 6.15, 0.62, 8.0];
        let xs: Vec<f64> = (0..150).map(|i| 4.0 + i as f64 * 0.03).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| model.eval(&truth, x).unwrap()).collect();
        let data = pattern(xs, ys);
        let init = initial_guess(&model, &data).unwrap();
        let fit = least_squares(&model, &data, &init, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        for (got, want) in fit.params.iter().zip(truth) {
            assert_relative_eq!(*got, want, max_relative = 1e-6);
        }
    }

    #[test]
    fn fringe_guess_recovers_phase_and_frequency() {
        let model = FitModel::fringe();
        let truth = [0.3, 4.0, 0.8, 0.5];
        let xs: Vec<f64> = (0..90).map(|i| i as f64 * PI / 90.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| model.eval(&truth, x).unwrap()).collect();
        let data = Pattern::new(xs, ys, AbscissaKind::WaveplateAngle).unwrap();
        let init = initial_guess(&model, &data).unwrap();
        let fit = least_squares(&model, &data, &init, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.params[1], 4.0, max_relative = 1e-6);
        assert_relative_eq!(fit.params[2], 0.8, max_relative = 1e-5);
    }

    #[test]
    fn raw_visibility_of_a_sampled_fringe_recovers_the_modulation() {
        // One fringe period at the envelope centre, densely sampled: the
        // raw visibility reads back the V parameter to within the envelope
        // variation over the window.
        let model = FitModel::double_slit(0.05);
        let params = [100.0, 6.0, 1.0, 0.0, 0.64, 0.0];
        let xs: Vec<f64> = (0..400).map(|i| 5.5 + i as f64 / 399.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| model.eval(&params, x).unwrap())
            .collect();
        let data = pattern(xs, ys);
        let v = visibility_raw(&data, None).unwrap();
        assert!((v - 0.64).abs() < 0.01, "raw visibility {v}");
    }

    #[test]
    fn fit_result_json_has_named_fields() {
        let model = FitModel::gaussian();
        let result = FitResult {
            params: vec![200.0, 6.2, 0.5, 10.0],
            residual_norm: 1.5e-9,
            iterations: 6,
            converged: true,
            param_stderr: vec![0.1, 0.01, 0.02, 0.3],
        };
        let json = fit_result_json(&model, &result);
        assert_eq!(json["model"], "gaussian");
        assert_eq!(json["params"]["x_c"], 6.2);
        assert_eq!(json["stderr"]["A"], 0.1);
        assert_eq!(json["converged"], true);
        assert_eq!(json["iterations"], 6);
    }
}
