//! Coincidence rates and simulated detector scans.
//!
//! `rate_closed_form` is the closed-form coincidence rate in the state
//! coefficients; `rate_spatial` is its position-dependent generalization
//! built from the Jones projection amplitudes, the per-crystal envelopes
//! and the interference phase profile. Scans add slit averaging and
//! optional Poisson shot noise.
//!
//! The cross term carries a coherence factor `gamma` in [0, 1]:
//! `gamma = 1` is the fully coherent superposition, `gamma = 0` an
//! incoherent mixture, and `gamma = 1/2` reproduces the textbook
//! half-strength cross term.

use std::f64::consts::FRAC_PI_4;
use std::io::{self, BufRead, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::biphoton::BiphotonState;
use crate::error::{Error, Result};
use crate::geometry::OpticalLayout;

/// Coherence of the two-path cross term, in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence(f64);

impl Coherence {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && (0.0..=1.0).contains(&gamma) {
            Ok(Self(gamma))
        } else {
            Err(Error::input(format!(
                "coherence gamma must lie in [0, 1], got {gamma}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Signal-detector scan parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub x_start_mm: f64,
    pub x_end_mm: f64,
    pub n_points: usize,
    /// Signal half-wave plate angle, radians.
    pub theta_signal: f64,
    /// Expected counts at unit rate.
    pub shots_scale: f64,
    pub noise: bool,
    pub seed: u64,
    /// Odd number of slit-average samples.
    pub slit_samples: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            x_start_mm: 4.0,
            x_end_mm: 9.0,
            n_points: 201,
            theta_signal: 0.0,
            shots_scale: 800.0,
            noise: false,
            seed: 1,
            slit_samples: 5,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_start_mm.is_finite() && self.x_end_mm.is_finite()) {
            return Err(Error::input("scan range must be finite"));
        }
        if self.x_end_mm <= self.x_start_mm {
            return Err(Error::input(format!(
                "scan range must satisfy x_end > x_start, got [{}, {}]",
                self.x_start_mm, self.x_end_mm
            )));
        }
        if self.n_points < 2 {
            return Err(Error::input(format!(
                "scan needs at least 2 points, got {}",
                self.n_points
            )));
        }
        if !(self.shots_scale.is_finite() && self.shots_scale > 0.0) {
            return Err(Error::input(format!(
                "shots_scale must be positive, got {}",
                self.shots_scale
            )));
        }
        if !self.theta_signal.is_finite() {
            return Err(Error::input("theta_signal must be finite"));
        }
        if self.slit_samples == 0 || self.slit_samples.is_multiple_of(2) {
            return Err(Error::input(format!(
                "slit_samples must be odd and >= 1, got {}",
                self.slit_samples
            )));
        }
        Ok(())
    }
}

/// What the abscissa of a [`Pattern`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbscissaKind {
    /// Detector position, millimetres.
    Position,
    /// Signal waveplate angle, radians (serialized as degrees).
    WaveplateAngle,
}

impl AbscissaKind {
    fn csv_header(self) -> &'static str {
        match self {
            AbscissaKind::Position => "x_mm,counts",
            AbscissaKind::WaveplateAngle => "theta_deg,counts",
        }
    }
}

/// One scan record: strictly increasing abscissa plus non-negative counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    abscissa: Vec<f64>,
    counts: Vec<f64>,
    kind: AbscissaKind,
}

impl Pattern {
    pub fn new(abscissa: Vec<f64>, counts: Vec<f64>, kind: AbscissaKind) -> Result<Self> {
        if abscissa.len() != counts.len() {
            return Err(Error::input(format!(
                "abscissa and counts lengths differ: {} vs {}",
                abscissa.len(),
                counts.len()
            )));
        }
        if abscissa.is_empty() {
            return Err(Error::input("pattern must not be empty"));
        }
        if abscissa.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("abscissa must be finite"));
        }
        for w in abscissa.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::input(format!(
                    "abscissa must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for (i, &c) in counts.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::input(format!(
                    "counts must be finite and non-negative, got {c} at index {i}"
                )));
            }
        }
        Ok(Self {
            abscissa,
            counts,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn kind(&self) -> AbscissaKind {
        self.kind
    }

    /// Index of the largest count.
    pub fn argmax(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Index of the smallest count.
    pub fn argmin(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Write `x_mm,counts` (or `theta_deg,counts`) rows, one per grid
    /// point, with 13 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.kind.csv_header())?;
        for (&x, &c) in self.abscissa.iter().zip(&self.counts) {
            let x_out = match self.kind {
                AbscissaKind::Position => x,
                AbscissaKind::WaveplateAngle => x.to_degrees(),
            };
            writeln!(out, "{x_out:.12e},{c:.12e}")?;
        }
        Ok(())
    }

    /// Parse a pattern written by [`Pattern::write_csv`]. Errors carry
    /// 1-based line numbers.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let kind = match lines.next() {
            Some((_, Ok(header))) => match header.trim() {
                "x_mm,counts" => AbscissaKind::Position,
                "theta_deg,counts" => AbscissaKind::WaveplateAngle,
                other => {
                    return Err(Error::input(format!(
                        "line 1: expected header 'x_mm,counts' or 'theta_deg,counts', got '{other}'"
                    )))
                }
            },
            Some((_, Err(e))) => return Err(Error::input(format!("line 1: {e}"))),
            None => return Err(Error::input("empty CSV")),
        };
        let mut abscissa = Vec::new();
        let mut counts = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::input(format!("line {line_no}: {e}")))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut fields = trimmed.split(',');
            let (Some(a), Some(c), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::input(format!(
                    "line {line_no}: expected 2 comma-separated fields"
                )));
            };
            let a: f64 = a.trim().parse().map_err(|e| {
                Error::input(format!("line {line_no}: bad abscissa value '{a}': {e}"))
            })?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|e| Error::input(format!("line {line_no}: bad count value '{c}': {e}")))?;
            abscissa.push(match kind {
                AbscissaKind::Position => a,
                AbscissaKind::WaveplateAngle => a.to_radians(),
            });
            counts.push(c);
        }
        Pattern::new(abscissa, counts, kind)
    }
}

/// Closed-form coincidence rate in the state coefficients:
/// `a^2 cos^2 u + b^2 sin^2 u + 2 gamma a b cos u sin u cos phi`
/// with `u = pi/4 - 2 theta`. At `gamma = 1/2` this is the textbook
/// `(ab/2) sin 2u cos phi` cross term.
pub fn rate_closed_form(alpha: f64, beta: f64, theta: f64, phi: f64, gamma: f64) -> Result<f64> {
    let gamma = Coherence::new(gamma)?.value();
    let u = FRAC_PI_4 - 2.0 * theta;
    let (su, cu) = u.sin_cos();
    Ok(alpha * alpha * cu * cu
        + beta * beta * su * su
        + 2.0 * gamma * alpha * beta * cu * su * phi.cos())
}

fn rate_from_amplitudes(
    layout: &OpticalLayout,
    c1: Complex64,
    c2: Complex64,
    gamma: f64,
    x_mm: f64,
) -> f64 {
    let a1 = c1
        * layout
            .envelope(1, x_mm)
            .expect("crystal 1 is a valid index");
    let a2 = c2
        * layout
            .envelope(2, x_mm)
            .expect("crystal 2 is a valid index");
    let phase = Complex64::from_polar(1.0, layout.phase_diff(x_mm));
    let rate = a1.norm_sqr() + a2.norm_sqr() + 2.0 * gamma * (a1.conj() * a2 * phase).re;
    // Exact cancellation at full destructive interference can land a few
    // ulps below zero.
    rate.max(0.0)
}

/// Position-dependent coincidence rate with both analyzers at 45 degrees:
/// the signal photon passes a half-wave plate at `theta`, each crystal's
/// amplitude is weighted by its envelope at `x_mm`, and the cross term
/// carries the interference phase `phi(x)` and the coherence `gamma`.
pub fn rate_spatial(
    layout: &OpticalLayout,
    state: &BiphotonState,
    theta: f64,
    gamma: f64,
    x_mm: f64,
) -> Result<f64> {
    let gamma = Coherence::new(gamma)?.value();
    layout.validate()?;
    let projected = state.apply_signal_hwp(theta)?;
    let (c1, c2) = projected.project_analyzers(FRAC_PI_4, FRAC_PI_4)?;
    Ok(rate_from_amplitudes(layout, c1, c2, gamma, x_mm))
}

/// Average `f` over the detector slit: `slit_samples` cell midpoints
/// spanning `[x - a/2, x + a/2]` with `a` the slit width.
pub fn slit_average<F: Fn(f64) -> f64>(
    layout: &OpticalLayout,
    slit_samples: usize,
    f: F,
    x_mm: f64,
) -> f64 {
    let n = slit_samples.max(1);
    let width = layout.slit_width_mm();
    let cell = width / n as f64;
    let start = x_mm - 0.5 * width + 0.5 * cell;
    (0..n).map(|k| f(start + k as f64 * cell)).sum::<f64>() / n as f64
}

/// Factor by which slit averaging attenuates a fringe of the layout's
/// period: the slit average of `cos(2 pi x / period)` centred on a crest.
pub fn slit_cos_reduction(layout: &OpticalLayout, slit_samples: usize) -> f64 {
    slit_average(
        layout,
        slit_samples,
        |x| (std::f64::consts::TAU * x / layout.fringe_period).cos(),
        0.0,
    )
}

/// Scan the signal detector with the idler fixed: slit-averaged
/// `rate_spatial` on a uniform grid, scaled to expected counts, with
/// optional per-point Poisson noise.
pub fn scan_signal(
    layout: &OpticalLayout,
    state: &BiphotonState,
    cfg: &ScanConfig,
    gamma: f64,
) -> Result<Pattern> {
    layout.validate()?;
    cfg.validate()?;
    let gamma = Coherence::new(gamma)?.value();
    let projected = state.apply_signal_hwp(cfg.theta_signal)?;
    let (c1, c2) = projected.project_analyzers(FRAC_PI_4, FRAC_PI_4)?;

    let step = (cfg.x_end_mm - cfg.x_start_mm) / (cfg.n_points - 1) as f64;
    let mut abscissa = Vec::with_capacity(cfg.n_points);
    let mut counts = Vec::with_capacity(cfg.n_points);
    for i in 0..cfg.n_points {
        let x = cfg.x_start_mm + step * i as f64;
        let rate = slit_average(
            layout,
            cfg.slit_samples,
            |xi| rate_from_amplitudes(layout, c1, c2, gamma, xi),
            x,
        );
        abscissa.push(x);
        counts.push(cfg.shots_scale * rate);
    }
    let pattern = Pattern::new(abscissa, counts, AbscissaKind::Position)?;
    if cfg.noise {
        poissonize(&pattern, cfg.seed)
    } else {
        Ok(pattern)
    }
}

/// Turn the signal waveplate with both detectors fixed: the rate at
/// `x_fixed_mm` over the given strictly increasing waveplate angles.
///
/// The detector does not move, so no slit convolution is applied; the
/// fringe visibility of the resulting pattern is `gamma` when the state
/// is balanced and the envelopes match at `x_fixed_mm`.
#[allow(clippy::too_many_arguments)]
pub fn scan_waveplate(
    layout: &OpticalLayout,
    state: &BiphotonState,
    x_fixed_mm: f64,
    theta_grid: &[f64],
    shots_scale: f64,
    noise: bool,
    seed: u64,
    gamma: f64,
) -> Result<Pattern> {
    layout.validate()?;
    let gamma = Coherence::new(gamma)?.value();
    if theta_grid.len() < 2 {
        return Err(Error::input("waveplate grid needs at least 2 points"));
    }
    if theta_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::input("waveplate grid must be finite"));
    }
    if theta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("waveplate grid must be strictly increasing"));
    }
    if !(shots_scale.is_finite() && shots_scale > 0.0) {
        return Err(Error::input(format!(
            "shots_scale must be positive, got {shots_scale}"
        )));
    }
    let mut counts = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        let projected = state.apply_signal_hwp(theta)?;
        let (c1, c2) = projected.project_analyzers(FRAC_PI_4, FRAC_PI_4)?;
        counts.push(shots_scale * rate_from_amplitudes(layout, c1, c2, gamma, x_fixed_mm));
    }
    let pattern = Pattern::new(theta_grid.to_vec(), counts, AbscissaKind::WaveplateAngle)?;
    if noise {
        poissonize(&pattern, seed)
    } else {
        Ok(pattern)
    }
}

/// Replace each count by a Poisson draw with that mean.
///
/// Draw `i` uses its own ChaCha stream keyed by `(seed, i)`, so the output
/// is independent of evaluation order and identical across runs with the
/// same seed.
pub fn poissonize(pattern: &Pattern, seed: u64) -> Result<Pattern> {
    let counts = pattern
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &mean)| {
            if !mean.is_finite() || mean < 0.0 {
                return Err(Error::input(format!(
                    "Poisson mean must be non-negative, got {mean} at index {i}"
                )));
            }
            if mean == 0.0 {
                return Ok(0.0);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let dist = Poisson::new(mean)
                .map_err(|e| Error::input(format!("Poisson mean {mean} at index {i}: {e}")))?;
            Ok(dist.sample(&mut rng))
        })
        .collect::<Result<Vec<f64>>>()?;
    Pattern::new(pattern.abscissa().to_vec(), counts, pattern.kind())
}
