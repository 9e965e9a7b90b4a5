//! Optical-bench parameters and the phenomenological spatial model.
//!
//! The bench carries the wavelengths and distances of the apparatus plus a
//! per-crystal Gaussian envelope and an interference phase profile. Detector
//! positions are millimetres at the API surface; wavelengths and distances
//! are metres internally, with the conversion confined to this module.
//!
//! The fringe period, envelope widths and phase offset are calibration
//! inputs rather than derived quantities: the default phase offset of pi
//! makes the zero-waveplate scan constructive at the reference position,
//! compensating the constant sign the reflection-convention half-wave
//! plate puts on the crystal-2 amplitude.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

const MM_PER_M: f64 = 1e3;

/// Interference-phase profile along the detector scan axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseModel {
    /// `phi0 + 2 pi (x - x_ref) / fringe_period`.
    #[default]
    Linear,
    /// Quadratic path-difference approximation,
    /// `phi0 + pi d / (lambda z^2) * (x^2 - x_ref^2)` with lengths in metres.
    Fresnel,
}

/// All geometry, wavelength, envelope and phase parameters of the bench.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalLayout {
    /// Pump wavelength, metres.
    pub lambda_pump: f64,
    /// Down-converted wavelength, metres.
    pub lambda_down: f64,
    /// Crystal length, metres.
    pub crystal_length: f64,
    /// Separation between the two crystals, metres.
    pub crystal_separation: f64,
    /// Crystal-to-detector distance, metres.
    pub z_detector: f64,
    /// Detector entrance slit width, metres.
    pub slit_width: f64,
    /// Crystal-1 coincidence-profile centre, millimetres.
    pub env_center_1: f64,
    /// Crystal-2 coincidence-profile centre, millimetres.
    pub env_center_2: f64,
    /// Gaussian envelope width (sigma) for crystal 1, millimetres.
    pub env_width_1: f64,
    /// Gaussian envelope width (sigma) for crystal 2, millimetres.
    pub env_width_2: f64,
    /// Fringe period of the linear phase model, millimetres.
    pub fringe_period: f64,
    /// Phase offset at the reference position, radians.
    pub phase_offset: f64,
    /// Reference detector position, millimetres.
    pub x_ref: f64,
    pub phase_model: PhaseModel,
}

impl Default for OpticalLayout {
    fn default() -> Self {
        Self {
            lambda_pump: 442e-9,
            lambda_down: 884e-9,
            crystal_length: 0.01,
            crystal_separation: 0.01,
            z_detector: 1.0,
            slit_width: 0.2e-3,
            env_center_1: 6.2,
            env_center_2: 6.4,
            env_width_1: 0.9,
            env_width_2: 0.9,
            fringe_period: 1.0,
            phase_offset: PI,
            x_ref: 6.3,
            phase_model: PhaseModel::Linear,
        }
    }
}

impl OpticalLayout {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_pump", self.lambda_pump),
            ("lambda_down", self.lambda_down),
            ("crystal_length", self.crystal_length),
            ("crystal_separation", self.crystal_separation),
            ("z_detector", self.z_detector),
            ("slit_width", self.slit_width),
            ("env_width_1", self.env_width_1),
            ("env_width_2", self.env_width_2),
            ("fringe_period", self.fringe_period),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::input(format!(
                    "layout field {name} must be strictly positive, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("env_center_1", self.env_center_1),
            ("env_center_2", self.env_center_2),
            ("phase_offset", self.phase_offset),
            ("x_ref", self.x_ref),
        ] {
            if !value.is_finite() {
                return Err(Error::input(format!(
                    "layout field {name} must be finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Slit width in millimetres, for use on the scan axis.
    pub fn slit_width_mm(&self) -> f64 {
        self.slit_width * MM_PER_M
    }

    fn env_params(&self, crystal: usize) -> Result<(f64, f64)> {
        match crystal {
            1 => Ok((self.env_center_1, self.env_width_1)),
            2 => Ok((self.env_center_2, self.env_width_2)),
            other => Err(Error::input(format!(
                "crystal index must be 1 or 2, got {other}"
            ))),
        }
    }

    /// Gaussian spatial envelope of the given crystal's coincidence profile,
    /// `exp(-(x - center)^2 / (2 width^2))`, evaluated at `x_mm`.
    pub fn envelope(&self, crystal: usize, x_mm: f64) -> Result<f64> {
        let (center, width) = self.env_params(crystal)?;
        let u = (x_mm - center) / width;
        Ok((-0.5 * u * u).exp())
    }

    /// Interference phase between the two crystal paths at `x_mm`.
    pub fn phase_diff(&self, x_mm: f64) -> f64 {
        match self.phase_model {
            PhaseModel::Linear => {
                self.phase_offset + TAU * (x_mm - self.x_ref) / self.fringe_period
            }
            PhaseModel::Fresnel => {
                let x = x_mm / MM_PER_M;
                let x_ref = self.x_ref / MM_PER_M;
                let scale = PI * self.crystal_separation
                    / (self.lambda_down * self.z_detector * self.z_detector);
                self.phase_offset + scale * (x - x_ref) * (x + x_ref)
            }
        }
    }

    /// Local fringe period of the Fresnel model at `x_mm`, in millimetres.
    pub fn fresnel_local_period_mm(&self, x_mm: f64) -> f64 {
        let x = x_mm / MM_PER_M;
        let period_m =
            self.lambda_down * self.z_detector * self.z_detector / (self.crystal_separation * x);
        period_m * MM_PER_M
    }
}
