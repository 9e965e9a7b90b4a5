//! The three fit models: Gaussian peak, double-slit fringe pattern, and
//! waveplate fringe. Each carries analytic partial derivatives.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Which functional form is being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `B + A exp(-(x - x_c)^2 / (2 w^2))`, params (A, x_c, w, B).
    Gaussian,
    /// `B + A sinc^2(pi a_eff (x - x0)) (1 + V cos(2 pi (x - x0) / Lambda + phi0))`,
    /// params (A, x0, Lambda, phi0, V, B) with `a_eff` pinned.
    DoubleSlit,
    /// `B + A cos(omega theta + psi)`, params (A, omega, psi, B);
    /// visibility is A / B.
    Fringe,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gaussian => "gaussian",
            ModelKind::DoubleSlit => "double_slit",
            ModelKind::Fringe => "fringe",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Gaussian => &["A", "x_c", "w", "B"],
            ModelKind::DoubleSlit => &["A", "x0", "Lambda", "phi0", "V", "B"],
            ModelKind::Fringe => &["A", "omega", "psi", "B"],
        }
    }

    pub fn param_count(self) -> usize {
        self.param_names().len()
    }
}

/// A fit model plus its pinned values: non-fit constants (the double-slit
/// `a_eff`) and any fit parameters held fixed during optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct FitModel {
    kind: ModelKind,
    fixed: BTreeMap<String, f64>,
}

impl FitModel {
    pub fn gaussian() -> Self {
        Self {
            kind: ModelKind::Gaussian,
            fixed: BTreeMap::new(),
        }
    }

    /// Double-slit fringe model; `a_eff` (1/mm) sets the sinc envelope
    /// scale and is pinned from the optical layout, not fitted.
    pub fn double_slit(a_eff: f64) -> Self {
        let mut fixed = BTreeMap::new();
        fixed.insert("a_eff".to_string(), a_eff);
        Self {
            kind: ModelKind::DoubleSlit,
            fixed,
        }
    }

    pub fn fringe() -> Self {
        Self {
            kind: ModelKind::Fringe,
            fixed: BTreeMap::new(),
        }
    }

    /// Hold the named fit parameter fixed at `value` during fitting.
    pub fn pin(mut self, name: &str, value: f64) -> Result<Self> {
        if !self.kind.param_names().contains(&name) {
            return Err(Error::parameter(format!(
                "{} model has no parameter named '{name}'",
                self.kind.name()
            )));
        }
        self.fixed.insert(name.to_string(), value);
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn param_count(&self) -> usize {
        self.kind.param_count()
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        self.kind.param_names()
    }

    pub fn a_eff(&self) -> Option<f64> {
        self.fixed.get("a_eff").copied()
    }

    /// Pinned value of the fit parameter at `index`, if any.
    pub fn pinned_value(&self, index: usize) -> Option<f64> {
        let name = self.kind.param_names().get(index)?;
        self.fixed.get(*name).copied()
    }

    /// Overwrite pinned entries of a full parameter vector.
    pub fn apply_pins(&self, params: &mut [f64]) {
        for (i, p) in params.iter_mut().enumerate() {
            if let Some(v) = self.pinned_value(i) {
                *p = v;
            }
        }
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::parameter(format!(
                "{} model takes {} parameters, got {}",
                self.kind.name(),
                self.param_count(),
                params.len()
            )));
        }
        match self.kind {
            ModelKind::Gaussian => {
                if params[2].is_nan() || params[2] <= 0.0 {
                    return Err(Error::parameter(format!(
                        "gaussian width must be positive, got {}",
                        params[2]
                    )));
                }
            }
            ModelKind::DoubleSlit => {
                if self.a_eff().is_none() {
                    return Err(Error::parameter(
                        "double_slit model requires a pinned a_eff",
                    ));
                }
                if params[2].is_nan() || params[2] <= 0.0 {
                    return Err(Error::parameter(format!(
                        "fringe period must be positive, got {}",
                        params[2]
                    )));
                }
            }
            ModelKind::Fringe => {}
        }
        Ok(())
    }

    /// Whether `params` is inside the model's domain (used by the solver
    /// to reject trial steps instead of erroring).
    pub(crate) fn params_in_domain(&self, params: &[f64]) -> bool {
        params.iter().all(|p| p.is_finite()) && self.check_params(params).is_ok()
    }

    /// Evaluate the model at a single abscissa.
    pub fn eval(&self, params: &[f64], x: f64) -> Result<f64> {
        self.check_params(params)?;
        Ok(self.eval_unchecked(params, x))
    }

    pub(crate) fn eval_unchecked(&self, params: &[f64], x: f64) -> f64 {
        match self.kind {
            ModelKind::Gaussian => {
                let (a, x_c, w, b) = (params[0], params[1], params[2], params[3]);
                let u = (x - x_c) / w;
                b + a * (-0.5 * u * u).exp()
            }
            ModelKind::DoubleSlit => {
                let (a, x0, period, phi0, v, b) = (
                    params[0], params[1], params[2], params[3], params[4], params[5],
                );
                let a_eff = self.a_eff().expect("a_eff checked");
                let u = x - x0;
                let s = sinc(std::f64::consts::PI * a_eff * u);
                let chi = TAU * u / period + phi0;
                b + a * s * s * (1.0 + v * chi.cos())
            }
            ModelKind::Fringe => {
                let (a, omega, psi, b) = (params[0], params[1], params[2], params[3]);
                b + a * (omega * x + psi).cos()
            }
        }
    }

    /// Analytic partials of the model value with respect to each parameter.
    pub fn jacobian_row(&self, params: &[f64], x: f64, row: &mut [f64]) -> Result<()> {
        self.check_params(params)?;
        if row.len() != self.param_count() {
            return Err(Error::parameter(format!(
                "jacobian row length {} does not match parameter count {}",
                row.len(),
                self.param_count()
            )));
        }
        match self.kind {
            ModelKind::Gaussian => {
                let (a, x_c, w, _) = (params[0], params[1], params[2], params[3]);
                let u = x - x_c;
                let g = (-0.5 * u * u / (w * w)).exp();
                row[0] = g;
                row[1] = a * g * u / (w * w);
                row[2] = a * g * u * u / (w * w * w);
                row[3] = 1.0;
            }
            ModelKind::DoubleSlit => {
                let (a, x0, period, phi0, v, _) = (
                    params[0], params[1], params[2], params[3], params[4], params[5],
                );
                let a_eff = self.a_eff().expect("a_eff checked");
                let u = x - x0;
                let k = std::f64::consts::PI * a_eff;
                let s = sinc(k * u);
                let sp = sinc_prime(k * u);
                let big_s = s * s;
                let chi = TAU * u / period + phi0;
                let (sin_chi, cos_chi) = chi.sin_cos();
                let big_c = 1.0 + v * cos_chi;
                row[0] = big_s * big_c;
                row[1] = -2.0 * a * s * sp * k * big_c + a * big_s * v * sin_chi * TAU / period;
                row[2] = a * big_s * v * sin_chi * TAU * u / (period * period);
                row[3] = -a * big_s * v * sin_chi;
                row[4] = a * big_s * cos_chi;
                row[5] = 1.0;
            }
            ModelKind::Fringe => {
                let (a, omega, psi, _) = (params[0], params[1], params[2], params[3]);
                let (sin_p, cos_p) = (omega * x + psi).sin_cos();
                row[0] = cos_p;
                row[1] = -a * x * sin_p;
                row[2] = -a * sin_p;
                row[3] = 1.0;
            }
        }
        Ok(())
    }
}

fn sinc(v: f64) -> f64 {
    if v.abs() < 1e-4 {
        let v2 = v * v;
        1.0 - v2 / 6.0 + v2 * v2 / 120.0
    } else {
        v.sin() / v
    }
}

fn sinc_prime(v: f64) -> f64 {
    if v.abs() < 1e-4 {
        -v / 3.0 + v * v * v / 30.0
    } else {
        (v.cos() - sinc(v)) / v
    }
}
