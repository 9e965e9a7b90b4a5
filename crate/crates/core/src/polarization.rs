//! Jones-calculus primitives: polarization states, waveplates and analyzers.
//!
//! Angles are radians everywhere. The half-wave plate uses the real
//! symmetric convention (fast axis at `theta` from horizontal, overall
//! phase dropped), so `hwp(0)` maps V to -V. That relative sign is kept
//! deliberately; it is observable in the coincidence cross term.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Two-component complex polarization amplitude in the (H, V) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub h: Complex64,
    pub v: Complex64,
}

impl JonesVector {
    pub fn new(h: Complex64, v: Complex64) -> Self {
        Self { h, v }
    }

    /// Horizontal basis state (1, 0).
    pub fn horizontal() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Vertical basis state (0, 1).
    pub fn vertical() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// Linear polarization at `angle` from horizontal.
    pub fn linear(angle: f64) -> Self {
        Self::new(
            Complex64::new(angle.cos(), 0.0),
            Complex64::new(angle.sin(), 0.0),
        )
    }

    /// |h|^2 + |v|^2.
    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }
}

/// 2x2 complex operator on Jones vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    pub m_hh: Complex64,
    pub m_hv: Complex64,
    pub m_vh: Complex64,
    pub m_vv: Complex64,
}

impl JonesMatrix {
    pub fn new(m_hh: Complex64, m_hv: Complex64, m_vh: Complex64, m_vv: Complex64) -> Self {
        Self {
            m_hh,
            m_hv,
            m_vh,
            m_vv,
        }
    }

    fn from_real(m_hh: f64, m_hv: f64, m_vh: f64, m_vv: f64) -> Self {
        Self::new(
            Complex64::new(m_hh, 0.0),
            Complex64::new(m_hv, 0.0),
            Complex64::new(m_vh, 0.0),
            Complex64::new(m_vv, 0.0),
        )
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn apply(&self, psi: &JonesVector) -> JonesVector {
        JonesVector::new(
            self.m_hh * psi.h + self.m_hv * psi.v,
            self.m_vh * psi.h + self.m_vv * psi.v,
        )
    }

    pub fn compose(&self, rhs: &JonesMatrix) -> JonesMatrix {
        JonesMatrix::new(
            self.m_hh * rhs.m_hh + self.m_hv * rhs.m_vh,
            self.m_hh * rhs.m_hv + self.m_hv * rhs.m_vv,
            self.m_vh * rhs.m_hh + self.m_vv * rhs.m_vh,
            self.m_vh * rhs.m_hv + self.m_vv * rhs.m_vv,
        )
    }

    pub fn adjoint(&self) -> JonesMatrix {
        JonesMatrix::new(
            self.m_hh.conj(),
            self.m_vh.conj(),
            self.m_hv.conj(),
            self.m_vv.conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.m_hh + self.m_vv
    }

    /// Max absolute entry-wise deviation from another matrix.
    pub fn max_abs_diff(&self, rhs: &JonesMatrix) -> f64 {
        [
            self.m_hh - rhs.m_hh,
            self.m_hv - rhs.m_hv,
            self.m_vh - rhs.m_vh,
            self.m_vv - rhs.m_vv,
        ]
        .iter()
        .map(|d| d.norm())
        .fold(0.0, f64::max)
    }
}

impl std::ops::Mul<JonesVector> for JonesMatrix {
    type Output = JonesVector;

    fn mul(self, rhs: JonesVector) -> JonesVector {
        self.apply(&rhs)
    }
}

impl std::ops::Mul<JonesMatrix> for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        self.compose(&rhs)
    }
}

fn check_finite_angle(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be finite, got {value}")))
    }
}

/// Half-wave plate with fast axis at `theta` from horizontal:
/// [[cos 2t, sin 2t], [sin 2t, -cos 2t]].
pub fn hwp(theta: f64) -> Result<JonesMatrix> {
    check_finite_angle("waveplate angle", theta)?;
    let (s, c) = (2.0 * theta).sin_cos();
    Ok(JonesMatrix::from_real(c, s, s, -c))
}

/// Projector onto linear polarization at `alpha` from horizontal.
pub fn polarizer(alpha: f64) -> Result<JonesMatrix> {
    check_finite_angle("analyzer angle", alpha)?;
    let (s, c) = alpha.sin_cos();
    Ok(JonesMatrix::from_real(c * c, c * s, c * s, s * s))
}

/// Scalar amplitude `<alpha|psi> = cos(alpha) h + sin(alpha) v` for passing
/// an analyzer at `alpha`.
pub fn projection_amplitude(alpha: f64, psi: &JonesVector) -> Result<Complex64> {
    check_finite_angle("analyzer angle", alpha)?;
    let (s, c) = alpha.sin_cos();
    Ok(psi.h * c + psi.v * s)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn assert_vec_close(got: &JonesVector, h: f64, v: f64, tol: f64) {
        assert!(
            (got.h - Complex64::new(h, 0.0)).norm() < tol,
            "h: got {}, want {}",
            got.h,
            h
        );
        assert!(
            (got.v - Complex64::new(v, 0.0)).norm() < tol,
            "v: got {}, want {}",
            got.v,
            v
        );
    }

    #[test]
    fn hwp_at_zero_fixes_horizontal() {
        let out = hwp(0.0).unwrap() * JonesVector::horizontal();
        assert_vec_close(&out, 1.0, 0.0, 1e-15);
    }

    #[test]
    fn hwp_at_45_deg_swaps_h_and_v() {
        let out = hwp(FRAC_PI_4).unwrap() * JonesVector::horizontal();
        assert_vec_close(&out, 0.0, 1.0, 1e-15);
    }

    // The 5-digit literals are frozen reference values.
    #[allow(clippy::approx_constant)]
    #[test]
    fn hwp_at_22p5_deg_makes_diagonal() {
        let out = hwp(FRAC_PI_8).unwrap() * JonesVector::horizontal();
        assert_vec_close(&out, 0.70711, 0.70711, 1e-5);
    }

    #[test]
    fn hwp_at_zero_flips_vertical_sign() {
        let out = hwp(0.0).unwrap() * JonesVector::vertical();
        assert_vec_close(&out, 0.0, -1.0, 1e-15);
    }

    #[test]
    fn hwp_rejects_non_finite_angle() {
        assert!(matches!(hwp(f64::NAN), Err(Error::InvalidInput(_))));
        assert!(matches!(hwp(f64::INFINITY), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn crossed_polarizer_extinguishes() {
        let out = polarizer(0.0).unwrap() * JonesVector::vertical();
        assert_vec_close(&out, 0.0, 0.0, 1e-15);
    }

    #[test]
    fn polarizer_at_45_deg_projects_horizontal() {
        let out = polarizer(FRAC_PI_4).unwrap() * JonesVector::horizontal();
        assert_vec_close(&out, 0.5, 0.5, 1e-15);
    }

    #[test]
    fn polarizer_trace_is_one() {
        let tr = polarizer(1.234).unwrap().trace();
        assert_relative_eq!(tr.re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(tr.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn polarizer_rejects_non_finite_angle() {
        assert!(matches!(polarizer(f64::NAN), Err(Error::InvalidInput(_))));
    }

    #[allow(clippy::approx_constant)]
    #[test]
    fn projection_of_horizontal_onto_45_deg() {
        let amp = projection_amplitude(FRAC_PI_4, &JonesVector::horizontal()).unwrap();
        assert_relative_eq!(amp.re, 0.70711, epsilon = 1e-5);
        assert_relative_eq!(amp.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn projection_of_vertical_onto_horizontal_is_zero() {
        let amp = projection_amplitude(0.0, &JonesVector::vertical()).unwrap();
        assert!(amp.norm() < 1e-15);
    }

    #[test]
    fn projection_after_hwp_matches_cosine_identity() {
        // cos 2t + sin 2t = sqrt(2) cos(pi/4 - 2t), so the 45-degree
        // projection of hwp(t)|H> is cos(pi/4 - 2t).
        let theta = 0.3;
        let psi = hwp(theta).unwrap() * JonesVector::horizontal();
        let amp = projection_amplitude(FRAC_PI_4, &psi).unwrap();
        assert_relative_eq!(amp.re, 0.98286, epsilon = 1e-5);
        assert_relative_eq!(amp.re, (FRAC_PI_4 - 2.0 * theta).cos(), epsilon = 1e-12);
    }

    #[test]
    fn hwp_unitary_over_grid() {
        let id = JonesMatrix::identity();
        for k in 0..128 {
            let theta = PI * (k as f64) / 128.0;
            let m = hwp(theta).unwrap();
            let prod = m.adjoint() * m;
            assert!(
                prod.max_abs_diff(&id) < 1e-12,
                "hwp({theta}) not unitary: deviation {}",
                prod.max_abs_diff(&id)
            );
        }
    }

    #[test]
    fn projection_magnitudes_recover_state_coefficients() {
        // |<45|hwp(t)|H>| = |cos(pi/4 - 2t)| and |<45|hwp(t)|V>| = |sin(pi/4 - 2t)|.
        for k in 0..128 {
            let theta = PI * (k as f64) / 128.0;
            let m = hwp(theta).unwrap();
            let ph = projection_amplitude(FRAC_PI_4, &(m * JonesVector::horizontal())).unwrap();
            let pv = projection_amplitude(FRAC_PI_4, &(m * JonesVector::vertical())).unwrap();
            let u = FRAC_PI_4 - 2.0 * theta;
            assert!((ph.norm() - u.cos().abs()).abs() < 1e-12);
            assert!((pv.norm() - u.sin().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_product_tracks_cross_term_sign() {
        // The product of the two 45-degree projections is -(1/2) sin 2(pi/4 - 2t)
        // = -(1/2) cos 4t: the reflection convention contributes a constant
        // factor of -1 relative to the naive rotated-state coefficients.
        for k in 0..128 {
            let theta = PI * (k as f64) / 128.0;
            let m = hwp(theta).unwrap();
            let ph = projection_amplitude(FRAC_PI_4, &(m * JonesVector::horizontal())).unwrap();
            let pv = projection_amplitude(FRAC_PI_4, &(m * JonesVector::vertical())).unwrap();
            let prod = (ph * pv).re;
            let expected = -0.5 * (2.0 * (FRAC_PI_4 - 2.0 * theta)).sin();
            assert!(
                (prod - expected).abs() < 1e-12,
                "theta={theta}: product {prod} vs {expected}"
            );
        }
    }

    proptest! {
        #[test]
        fn hwp_has_period_pi(theta in -4.0f64..4.0) {
            let a = hwp(theta).unwrap();
            let b = hwp(theta + PI).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
        }

        #[test]
        fn polarizer_is_idempotent(alpha in -4.0f64..4.0) {
            let p = polarizer(alpha).unwrap();
            let pp = p * p;
            prop_assert!(pp.max_abs_diff(&p) < 1e-12);
        }

        #[test]
        fn hwp_preserves_norm(theta in -4.0f64..4.0, angle in 0.0f64..std::f64::consts::TAU) {
            let psi = JonesVector::linear(angle);
            let out = hwp(theta).unwrap() * psi;
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
