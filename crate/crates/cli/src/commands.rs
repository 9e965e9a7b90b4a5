//! Command implementations shared by the binary and the integration tests.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::path::{Path, PathBuf};

use spdc_core::{
    chsh_from_state, chsh_from_visibility, double_slit_a_eff, fit_result_json, initial_guess,
    least_squares, make_two_crystal_state, scan_signal, scan_waveplate, visibility_from_fit,
    visibility_raw, BellSettings, BiphotonState, FitModel, FitOptions, FitResult, ModelKind,
    OpticalLayout, Pattern, ScanConfig,
};

use crate::config::RunConfig;
use crate::output::{read_pattern_csv, write_json, write_pattern_csv};
use crate::CliError;

/// Flag overrides shared by the simulate commands.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulateOverrides {
    pub theta_deg: Option<f64>,
    pub x_mm: Option<f64>,
    pub seed: Option<u64>,
    pub noise: Option<bool>,
}

fn build_state(config: &RunConfig) -> Result<BiphotonState, CliError> {
    let (alpha, beta) = config.amplitudes()?;
    Ok(make_two_crystal_state(alpha, beta, 0.0)?)
}

fn output_path(out: Option<&Path>, config: &RunConfig) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| config.out_csv.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pattern.csv"))
}

/// `simulate scan`: horizontal signal-detector scan at a fixed waveplate
/// angle, written as CSV.
pub fn cmd_simulate_scan(
    config_path: Option<&Path>,
    overrides: SimulateOverrides,
    out: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let config = RunConfig::load(config_path)?;
    let layout = config.layout()?;
    let state = build_state(&config)?;
    let mut scan: ScanConfig = config.scan.to_scan_config();
    if let Some(theta_deg) = overrides.theta_deg {
        scan.theta_signal = theta_deg.to_radians();
    }
    if let Some(seed) = overrides.seed {
        scan.seed = seed;
    }
    if let Some(noise) = overrides.noise {
        scan.noise = noise;
    }
    let pattern = scan_signal(&layout, &state, &scan, config.gamma())?;
    let path = output_path(out, &config);
    write_pattern_csv(&path, &pattern)?;
    Ok(path)
}

/// `simulate bell-scan`: turn the signal waveplate with both detectors
/// fixed, written as CSV.
pub fn cmd_simulate_bell_scan(
    config_path: Option<&Path>,
    overrides: SimulateOverrides,
    out: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let config = RunConfig::load(config_path)?;
    let layout = config.layout()?;
    let state = build_state(&config)?;
    let grid = config.scan.theta_grid()?;
    let x_fixed = overrides
        .x_mm
        .or(config.scan.x_fixed_mm)
        .unwrap_or(layout.x_ref);
    let pattern = scan_waveplate(
        &layout,
        &state,
        x_fixed,
        &grid,
        config.scan.shots_scale,
        overrides.noise.unwrap_or(config.scan.noise),
        overrides.seed.unwrap_or(config.scan.seed),
        config.gamma(),
    )?;
    let path = output_path(out, &config);
    write_pattern_csv(&path, &pattern)?;
    Ok(path)
}

fn model_for(kind: ModelKind, layout: &OpticalLayout) -> FitModel {
    match kind {
        ModelKind::Gaussian => FitModel::gaussian(),
        ModelKind::DoubleSlit => FitModel::double_slit(double_slit_a_eff(layout)),
        ModelKind::Fringe => FitModel::fringe(),
    }
}

/// `fit`: fit the named model to a pattern CSV and write the result JSON.
/// A non-converged fit still writes its result, then reports exit code 2.
pub fn cmd_fit(
    kind: ModelKind,
    input: &Path,
    out: &Path,
    config_path: Option<&Path>,
) -> Result<FitResult, CliError> {
    let config = RunConfig::load(config_path)?;
    let layout = config.layout()?;
    let pattern = read_pattern_csv(input)?;
    let model = model_for(kind, &layout);
    let init = initial_guess(&model, &pattern)?;
    let fit = least_squares(&model, &pattern, &init, &FitOptions::default())?;
    write_json(out, &fit_result_json(&model, &fit))?;
    if fit.converged {
        Ok(fit)
    } else {
        Err(CliError::non_convergence(format!(
            "fit did not converge after {} iterations (result written to {})",
            fit.iterations,
            out.display()
        )))
    }
}

/// `analyze visibility`: raw (max-min)/(max+min) of a pattern CSV,
/// printed as JSON on stdout.
pub fn cmd_analyze_visibility(
    input: &Path,
    window: Option<(f64, f64)>,
) -> Result<serde_json::Value, CliError> {
    let pattern = read_pattern_csv(input)?;
    let v = visibility_raw(&pattern, window)?;
    Ok(serde_json::json!({ "visibility": v }))
}

/// `analyze chsh`: both CHSH estimators for a given fringe visibility,
/// printed as JSON on stdout. The state-based estimator uses a balanced
/// state with the coherence set to the visibility unless overridden.
pub fn cmd_analyze_chsh(
    visibility: f64,
    alpha_beta: Option<(f64, f64)>,
    gamma: Option<f64>,
    phi_rad: f64,
) -> Result<serde_json::Value, CliError> {
    let (s_visibility, violated) = chsh_from_visibility(visibility)?;
    let (alpha, beta) = alpha_beta.unwrap_or((FRAC_1_SQRT_2, FRAC_1_SQRT_2));
    let gamma = gamma.unwrap_or(visibility);
    let s_state = chsh_from_state(alpha, beta, phi_rad, gamma, &BellSettings::default())?;
    Ok(serde_json::json!({
        "S_visibility": s_visibility,
        "S_state": s_state,
        "violated": violated,
    }))
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The five reference figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }
}

/// Everything `reproduce` emits for one figure.
pub struct Reproduction {
    pub pattern_csv: PathBuf,
    pub fit_json: PathBuf,
    pub summary_json: PathBuf,
    pub summary: serde_json::Value,
}

fn fit_pattern(model: &FitModel, pattern: &Pattern) -> Result<FitResult, CliError> {
    let init = initial_guess(model, pattern)?;
    Ok(least_squares(
        model,
        pattern,
        &init,
        &FitOptions::default(),
    )?)
}

/// Fitted double-slit visibility of a balanced scan at `theta` and the
/// given coherence.
fn scan_and_fit_visibility(
    layout: &OpticalLayout,
    state: &BiphotonState,
    scan: &ScanConfig,
    theta: f64,
    gamma: f64,
) -> Result<(Pattern, FitModel, FitResult, f64), CliError> {
    let scan = ScanConfig {
        theta_signal: theta,
        ..scan.clone()
    };
    let pattern = scan_signal(layout, state, &scan, gamma)?;
    let model = FitModel::double_slit(double_slit_a_eff(layout));
    let fit = fit_pattern(&model, &pattern)?;
    if !fit.converged {
        return Err(CliError::non_convergence(format!(
            "double-slit fit did not converge at theta = {theta}"
        )));
    }
    let vis = visibility_from_fit(&fit, &model)?.value;
    Ok((pattern, model, fit, vis))
}

/// Solve the coherence that makes the fitted visibility hit `target`.
///
/// Slit averaging and the sinc-envelope approximation attenuate the
/// fitted visibility by a few percent relative to the coherence; since
/// the fitted visibility is linear in the coherence, one secant step on
/// a trial scan lands on the target.
fn calibrate_gamma(
    layout: &OpticalLayout,
    state: &BiphotonState,
    scan: &ScanConfig,
    theta: f64,
    target: f64,
) -> Result<f64, CliError> {
    let trial = ScanConfig {
        noise: false,
        ..scan.clone()
    };
    let (_, _, _, fitted) = scan_and_fit_visibility(layout, state, &trial, theta, target)?;
    if fitted <= 0.0 {
        return Err(CliError::input(format!(
            "cannot calibrate coherence: trial fit returned visibility {fitted}"
        )));
    }
    Ok((target * target / fitted).min(1.0))
}

/// Extremum position of a pattern inside an abscissa window.
fn extremum_x(pattern: &Pattern, lo: f64, hi: f64, minimum: bool) -> Option<f64> {
    pattern
        .abscissa()
        .iter()
        .zip(pattern.counts())
        .filter(|(&x, _)| x >= lo && x <= hi)
        .min_by(|a, b| {
            if minimum {
                a.1.total_cmp(b.1)
            } else {
                b.1.total_cmp(a.1)
            }
        })
        .map(|(&x, _)| x)
}

/// Fringe phase of a double-slit fit evaluated at `x_mm`, in [0, 2 pi).
fn fitted_phase_at(fit: &FitResult, x_mm: f64) -> f64 {
    (TAU * (x_mm - fit.params[1]) / fit.params[2] + fit.params[3]).rem_euclid(TAU)
}

/// `reproduce`: simulate one reference figure, fit it, and write the
/// pattern CSV, fit JSON and summary JSON into `outdir`.
pub fn cmd_reproduce(
    fig: Figure,
    outdir: &Path,
    noise: bool,
    seed: u64,
) -> Result<Reproduction, CliError> {
    std::fs::create_dir_all(outdir)
        .map_err(|e| CliError::input(format!("{}: {e}", outdir.display())))?;
    let layout = OpticalLayout::default();
    let scan = ScanConfig {
        noise,
        seed,
        ..ScanConfig::default()
    };

    let (pattern, model, fit, summary) = match fig {
        Figure::Fig2 | Figure::Fig3 => {
            let (amps, target_center) = match fig {
                Figure::Fig2 => ((1.0, 0.0), layout.env_center_1),
                _ => ((0.0, 1.0), layout.env_center_2),
            };
            let state = make_two_crystal_state(amps.0, amps.1, 0.0)?;
            let pattern = scan_signal(&layout, &state, &scan, 0.5)?;
            let model = FitModel::gaussian();
            let fit = fit_pattern(&model, &pattern)?;
            let summary = serde_json::json!({
                "figure": fig.name(),
                "model": "gaussian",
                "fitted_center_mm": fit.params[1],
                "target_center_mm": target_center,
                "peak_x_mm": extremum_x(&pattern, f64::NEG_INFINITY, f64::INFINITY, false),
                "noise": noise,
                "converged": fit.converged,
            });
            (pattern, model, fit, summary)
        }
        Figure::Fig4 | Figure::Fig5 => {
            let (theta, target) = match fig {
                Figure::Fig4 => (FRAC_PI_4, 0.64),
                _ => (0.0, 0.62),
            };
            let state = make_two_crystal_state(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0)?;
            let gamma = calibrate_gamma(&layout, &state, &scan, theta, target)?;
            let (pattern, model, fit, fitted_vis) =
                scan_and_fit_visibility(&layout, &state, &scan, theta, gamma)?;
            let minimum = fig == Figure::Fig4;
            let summary = serde_json::json!({
                "figure": fig.name(),
                "model": "double_slit",
                "gamma": gamma,
                "target_visibility": target,
                "fitted_visibility": fitted_vis,
                "extremum": if minimum { "valley" } else { "peak" },
                "extremum_x_mm": extremum_x(&pattern, 6.0, 6.6, minimum),
                "fringe_phase_at_x_ref_rad": fitted_phase_at(&fit, layout.x_ref),
                "noise": noise,
                "converged": fit.converged,
            });
            (pattern, model, fit, summary)
        }
        Figure::Fig6 => {
            let gamma = 0.75;
            let state = make_two_crystal_state(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0)?;
            let grid: Vec<f64> = (0..181).map(|i| PI * i as f64 / 180.0).collect();
            let pattern = scan_waveplate(
                &layout,
                &state,
                layout.x_ref,
                &grid,
                scan.shots_scale,
                noise,
                seed,
                gamma,
            )?;
            let model = FitModel::fringe();
            let fit = fit_pattern(&model, &pattern)?;
            let fitted_vis = if fit.converged {
                visibility_from_fit(&fit, &model)?.value
            } else {
                f64::NAN
            };
            let summary = serde_json::json!({
                "figure": "fig6",
                "model": "fringe",
                "gamma": gamma,
                "target_visibility": 0.75,
                "fitted_visibility": fitted_vis,
                "fitted_period_rad": TAU / fit.params[1],
                "x_fixed_mm": layout.x_ref,
                "noise": noise,
                "converged": fit.converged,
            });
            (pattern, model, fit, summary)
        }
    };

    let pattern_csv = outdir.join(format!("{}_pattern.csv", fig.name()));
    let fit_json = outdir.join(format!("{}_fit.json", fig.name()));
    let summary_json = outdir.join(format!("{}_summary.json", fig.name()));
    write_pattern_csv(&pattern_csv, &pattern)?;
    write_json(&fit_json, &fit_result_json(&model, &fit))?;
    write_json(&summary_json, &summary)?;
    if !fit.converged {
        return Err(CliError::non_convergence(format!(
            "{} fit did not converge (outputs written to {})",
            fig.name(),
            outdir.display()
        )));
    }
    Ok(Reproduction {
        pattern_csv,
        fit_json,
        summary_json,
        summary,
    })
}
