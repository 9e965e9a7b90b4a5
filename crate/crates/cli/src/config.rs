//! JSON run configuration with unit-suffixed keys.
//!
//! Every dimensioned key names its unit (`x_start_mm`, `lambda_down_nm`,
//! `theta_deg`); conversion to the core types' internal units happens
//! here and nowhere else. Unknown keys are rejected so typos surface as
//! config errors rather than silently-ignored settings.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spdc_core::{OpticalLayout, PhaseModel, ScanConfig};

use crate::CliError;

const NM_PER_M: f64 = 1e9;
const MM_PER_M: f64 = 1e3;

/// The `layout` object: bench geometry, envelopes and phase model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutConfig {
    pub lambda_pump_nm: f64,
    pub lambda_down_nm: f64,
    pub crystal_length_mm: f64,
    pub crystal_separation_mm: f64,
    pub z_detector_m: f64,
    pub slit_width_mm: f64,
    pub env_center_1_mm: f64,
    pub env_center_2_mm: f64,
    pub env_width_1_mm: f64,
    pub env_width_2_mm: f64,
    pub fringe_period_mm: f64,
    pub phase_offset_rad: f64,
    pub x_ref_mm: f64,
    /// "linear" or "fresnel".
    pub phase_model: String,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        let layout = OpticalLayout::default();
        Self {
            lambda_pump_nm: layout.lambda_pump * NM_PER_M,
            lambda_down_nm: layout.lambda_down * NM_PER_M,
            crystal_length_mm: layout.crystal_length * MM_PER_M,
            crystal_separation_mm: layout.crystal_separation * MM_PER_M,
            z_detector_m: layout.z_detector,
            slit_width_mm: layout.slit_width * MM_PER_M,
            env_center_1_mm: layout.env_center_1,
            env_center_2_mm: layout.env_center_2,
            env_width_1_mm: layout.env_width_1,
            env_width_2_mm: layout.env_width_2,
            fringe_period_mm: layout.fringe_period,
            phase_offset_rad: layout.phase_offset,
            x_ref_mm: layout.x_ref,
            phase_model: "linear".to_string(),
        }
    }
}

impl LayoutConfig {
    pub fn to_layout(&self) -> Result<OpticalLayout, CliError> {
        let phase_model = match self.phase_model.as_str() {
            "linear" => PhaseModel::Linear,
            "fresnel" => PhaseModel::Fresnel,
            other => {
                return Err(CliError::input(format!(
                    "layout.phase_model must be 'linear' or 'fresnel', got '{other}'"
                )))
            }
        };
        let layout = OpticalLayout {
            lambda_pump: self.lambda_pump_nm / NM_PER_M,
            lambda_down: self.lambda_down_nm / NM_PER_M,
            crystal_length: self.crystal_length_mm / MM_PER_M,
            crystal_separation: self.crystal_separation_mm / MM_PER_M,
            z_detector: self.z_detector_m,
            slit_width: self.slit_width_mm / MM_PER_M,
            env_center_1: self.env_center_1_mm,
            env_center_2: self.env_center_2_mm,
            env_width_1: self.env_width_1_mm,
            env_width_2: self.env_width_2_mm,
            fringe_period: self.fringe_period_mm,
            phase_offset: self.phase_offset_rad,
            x_ref: self.x_ref_mm,
            phase_model,
        };
        layout.validate()?;
        Ok(layout)
    }
}

/// The `scan` object: grid, waveplate angle, counting scale and noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub x_start_mm: f64,
    pub x_end_mm: f64,
    pub n_points: usize,
    pub theta_deg: f64,
    pub shots_scale: f64,
    pub noise: bool,
    pub seed: u64,
    pub slit_samples: usize,
    /// Fixed detector position for waveplate scans; defaults to the
    /// layout's reference position.
    pub x_fixed_mm: Option<f64>,
    pub theta_start_deg: f64,
    pub theta_end_deg: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        let scan = ScanConfig::default();
        Self {
            x_start_mm: scan.x_start_mm,
            x_end_mm: scan.x_end_mm,
            n_points: scan.n_points,
            theta_deg: 0.0,
            shots_scale: scan.shots_scale,
            noise: scan.noise,
            seed: scan.seed,
            slit_samples: scan.slit_samples,
            x_fixed_mm: None,
            theta_start_deg: 0.0,
            theta_end_deg: 180.0,
        }
    }
}

impl ScanSection {
    pub fn to_scan_config(&self) -> ScanConfig {
        ScanConfig {
            x_start_mm: self.x_start_mm,
            x_end_mm: self.x_end_mm,
            n_points: self.n_points,
            theta_signal: self.theta_deg.to_radians(),
            shots_scale: self.shots_scale,
            noise: self.noise,
            seed: self.seed,
            slit_samples: self.slit_samples,
        }
    }

    /// Strictly increasing waveplate grid in radians.
    pub fn theta_grid(&self) -> Result<Vec<f64>, CliError> {
        if self.n_points < 2 {
            return Err(CliError::input(format!(
                "scan.n_points must be at least 2, got {}",
                self.n_points
            )));
        }
        if self.theta_end_deg <= self.theta_start_deg {
            return Err(CliError::input(format!(
                "waveplate grid needs theta_end_deg > theta_start_deg, got [{}, {}]",
                self.theta_start_deg, self.theta_end_deg
            )));
        }
        let step = (self.theta_end_deg - self.theta_start_deg) / (self.n_points - 1) as f64;
        Ok((0..self.n_points)
            .map(|i| (self.theta_start_deg + step * i as f64).to_radians())
            .collect())
    }
}

/// Top-level run configuration.
///
/// The pump is set either by explicit state amplitudes (`alpha`, `beta`)
/// or by the pump waveplate angle (`pump_hwp_deg`), never both; with
/// neither present both crystals are pumped equally.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub layout: LayoutConfig,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub pump_hwp_deg: Option<f64>,
    /// Replaces the layout's phase offset when present.
    pub phi0_override_rad: Option<f64>,
    pub gamma: Option<f64>,
    pub scan: ScanSection,
    pub out_csv: Option<String>,
}

impl RunConfig {
    /// Load from a JSON file, or the built-in defaults when no path is
    /// given. Parse errors carry `path:line:column`.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::input(format!(
                "{}:{}:{}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })
    }

    /// Coherence of the cross term; defaults to the half-strength reading.
    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(0.5)
    }

    /// The pump amplitudes (alpha, beta) after validation.
    pub fn amplitudes(&self) -> Result<(f64, f64), CliError> {
        match (self.alpha, self.beta, self.pump_hwp_deg) {
            (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => Err(CliError::input(
                "give either alpha/beta or pump_hwp_deg, not both",
            )),
            (Some(a), Some(b), None) => Ok((a, b)),
            (Some(_), None, None) | (None, Some(_), None) => {
                Err(CliError::input("alpha and beta must be given together"))
            }
            (None, None, Some(deg)) => Ok(spdc_core::pump_split(&spdc_core::PumpSetting::new(
                deg.to_radians(),
            ))),
            // Neither given: pump both crystals equally.
            (None, None, None) => Ok(spdc_core::pump_split(&spdc_core::PumpSetting::new(
                PI / 8.0,
            ))),
        }
    }

    pub fn layout(&self) -> Result<OpticalLayout, CliError> {
        let mut layout = self.layout.to_layout()?;
        if let Some(phi0) = self.phi0_override_rad {
            layout.phase_offset = phi0;
        }
        Ok(layout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_usable() {
        let cfg = RunConfig::default();
        let layout = cfg.layout().unwrap();
        assert_eq!(layout, OpticalLayout::default());
        let (a, b) = cfg.amplitudes().unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!((a * a + b * b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_sources_are_mutually_exclusive() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"alpha": 0.6, "beta": 0.8, "pump_hwp_deg": 22.5}"#).unwrap();
        assert!(cfg.amplitudes().is_err());

        let cfg: RunConfig = serde_json::from_str(r#"{"alpha": 0.6}"#).unwrap();
        assert!(cfg.amplitudes().is_err());

        let cfg: RunConfig = serde_json::from_str(r#"{"pump_hwp_deg": 0.0}"#).unwrap();
        let (a, b) = cfg.amplitudes().unwrap();
        assert_eq!((a, b), (1.0, 0.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"lambda_pump": 442}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }

    #[test]
    fn layout_units_convert() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"layout": {"lambda_down_nm": 800.0, "slit_width_mm": 0.4}}"#)
                .unwrap();
        let layout = cfg.layout().unwrap();
        assert!((layout.lambda_down - 800e-9).abs() < 1e-21);
        assert!((layout.slit_width - 0.4e-3).abs() < 1e-12);
    }

    #[test]
    fn phi0_override_replaces_the_offset() {
        let cfg: RunConfig = serde_json::from_str(r#"{"phi0_override_rad": 0.25}"#).unwrap();
        assert!((cfg.layout().unwrap().phase_offset - 0.25).abs() < 1e-15);
    }

    #[test]
    fn theta_grid_is_strictly_increasing_radians() {
        let section = ScanSection {
            n_points: 5,
            theta_start_deg: 0.0,
            theta_end_deg: 90.0,
            ..ScanSection::default()
        };
        let grid = section.theta_grid().unwrap();
        assert_eq!(grid.len(), 5);
        assert!((grid[4] - PI / 2.0).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }
}
