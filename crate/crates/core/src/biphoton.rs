//! The two-crystal entangled state and its projection onto the analyzers.
//!
//! Each crystal contributes one path amplitude carrying a signal and an
//! idler polarization. The relative phase between the two paths is stored
//! once on the state and attached to the crystal-2 amplitude at projection
//! time; spatial scans replace it with a position-dependent phase instead.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polarization::{hwp, projection_amplitude, JonesVector};

/// Which pump polarization component drives crystal 1.
///
/// The apparatus description leaves the crystal ordering ambiguous, so it
/// is a configuration switch. The default matches the state ordering:
/// the horizontal pump component drives crystal 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PumpMapping {
    #[default]
    HorizontalFirst,
    VerticalFirst,
}

/// Pump half-wave plate setting controlling the per-crystal pump strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSetting {
    /// Pump HWP fast-axis angle from horizontal, radians.
    pub hwp_angle: f64,
    pub mapping: PumpMapping,
}

impl PumpSetting {
    pub fn new(hwp_angle: f64) -> Self {
        Self {
            hwp_angle,
            mapping: PumpMapping::default(),
        }
    }
}

/// One crystal's contribution to the biphoton state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAmplitude {
    /// Source crystal, 1 or 2.
    pub crystal: usize,
    pub signal_pol: JonesVector,
    pub idler_pol: JonesVector,
    pub amp: Complex64,
}

/// Superposition of per-crystal path amplitudes, plus the relative phase
/// between the crystal-1 and crystal-2 paths.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonState {
    paths: Vec<PathAmplitude>,
    phase_phi: f64,
}

impl BiphotonState {
    pub fn paths(&self) -> &[PathAmplitude] {
        &self.paths
    }

    /// The relative phase attached to the crystal-2 path at projection time.
    pub fn phase(&self) -> f64 {
        self.phase_phi
    }

    /// Same paths with a different relative phase.
    pub fn with_phase(&self, phi: f64) -> Self {
        Self {
            paths: self.paths.clone(),
            phase_phi: phi,
        }
    }

    /// Sum of |amp|^2 * |signal|^2 * |idler|^2 over paths.
    pub fn total_weight(&self) -> f64 {
        self.paths
            .iter()
            .map(|p| p.amp.norm_sqr() * p.signal_pol.norm_sqr() * p.idler_pol.norm_sqr())
            .sum()
    }

    /// Pass each path's signal photon through a half-wave plate at `theta`.
    ///
    /// Idler polarizations, amplitudes and the stored phase are unchanged;
    /// the path norm is preserved.
    pub fn apply_signal_hwp(&self, theta: f64) -> Result<BiphotonState> {
        let plate = hwp(theta)?;
        let paths = self
            .paths
            .iter()
            .map(|p| PathAmplitude {
                signal_pol: plate.apply(&p.signal_pol),
                ..*p
            })
            .collect();
        Ok(BiphotonState {
            paths,
            phase_phi: self.phase_phi,
        })
    }

    /// Project both photons onto linear analyzers and return the two
    /// interfering coincidence amplitudes (crystal 1, crystal 2).
    ///
    /// Each amplitude is `amp * <a_signal|signal> * <a_idler|idler>`; the
    /// crystal-2 amplitude additionally carries `exp(i phi)`.
    pub fn project_analyzers(&self, a_signal: f64, a_idler: f64) -> Result<(Complex64, Complex64)> {
        let mut c1 = Complex64::new(0.0, 0.0);
        let mut c2 = Complex64::new(0.0, 0.0);
        let phase = Complex64::from_polar(1.0, self.phase_phi);
        for p in &self.paths {
            let amp = p.amp
                * projection_amplitude(a_signal, &p.signal_pol)?
                * projection_amplitude(a_idler, &p.idler_pol)?;
            match p.crystal {
                1 => c1 += amp,
                2 => c2 += amp * phase,
                _ => unreachable!("paths are built with crystal index 1 or 2"),
            }
        }
        Ok((c1, c2))
    }
}

/// Build the two-crystal state: crystal 1 emits an H/H pair with amplitude
/// `alpha`, crystal 2 a V/V pair with amplitude `beta`, relative phase `phi`.
///
/// Paths with zero amplitude are dropped, so a single-pumped-crystal state
/// carries exactly one path.
pub fn make_two_crystal_state(alpha: f64, beta: f64, phi: f64) -> Result<BiphotonState> {
    if !(alpha.is_finite() && beta.is_finite() && phi.is_finite()) {
        return Err(Error::input("state parameters must be finite"));
    }
    if alpha < 0.0 || beta < 0.0 {
        return Err(Error::input(format!(
            "pump amplitudes must be non-negative, got ({alpha}, {beta})"
        )));
    }
    let defect = alpha * alpha + beta * beta - 1.0;
    if defect.abs() > 1e-9 {
        return Err(Error::input(format!(
            "pump amplitudes must satisfy alpha^2 + beta^2 = 1; norm defect {defect:e}"
        )));
    }
    let mut paths = Vec::with_capacity(2);
    if alpha > 0.0 {
        paths.push(PathAmplitude {
            crystal: 1,
            signal_pol: JonesVector::horizontal(),
            idler_pol: JonesVector::horizontal(),
            amp: Complex64::new(alpha, 0.0),
        });
    }
    if beta > 0.0 {
        paths.push(PathAmplitude {
            crystal: 2,
            signal_pol: JonesVector::vertical(),
            idler_pol: JonesVector::vertical(),
            amp: Complex64::new(beta, 0.0),
        });
    }
    Ok(BiphotonState {
        paths,
        phase_phi: phi,
    })
}

/// Pump amplitudes (alpha, beta) for an H-polarized laser passing the pump
/// HWP at `hwp_angle`: (|cos 2t|, |sin 2t|), swapped for the
/// `VerticalFirst` mapping. The returned pair is normalized.
pub fn pump_split(pump: &PumpSetting) -> (f64, f64) {
    let c = (2.0 * pump.hwp_angle).cos().abs();
    let s = (2.0 * pump.hwp_angle).sin().abs();
    match pump.mapping {
        PumpMapping::HorizontalFirst => (c, s),
        PumpMapping::VerticalFirst => (s, c),
    }
}

/// The printed state coefficients:
/// `(alpha cos(pi/4 - 2 theta), beta sin(pi/4 - 2 theta))`.
///
/// These carry the rotated-state sign convention; the Jones projection
/// route differs from them by a constant factor of -1 on the second
/// coefficient and by the common 45-degree idler factor 1/sqrt(2).
pub fn state_coefficients(alpha: f64, beta: f64, theta: f64) -> (f64, f64) {
    let u = std::f64::consts::FRAC_PI_4 - 2.0 * theta;
    (alpha * u.cos(), beta * u.sin())
}

/// Degree of polarization entanglement, `2 alpha beta` in [0, 1].
pub fn concurrence(alpha: f64, beta: f64) -> f64 {
    2.0 * alpha * beta
}
