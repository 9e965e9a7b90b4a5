//! Polarization-correlation and CHSH analysis of the two-crystal state.
//!
//! Two CHSH estimators are exposed on purpose: the state-based value
//! computed from joint probabilities at the four analyzer settings, and a
//! uniform-visibility heuristic `S = 2 sqrt(2) v`. Under the partial
//! coherence model they disagree (`sqrt(2) (1 + gamma)` vs
//! `2 sqrt(2) gamma` for a balanced state); both are reported, labeled.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use crate::coincidence::Coherence;
use crate::error::{Error, Result};

/// The four analyzer angles of a CHSH measurement, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for BellSettings {
    /// The standard settings (0, pi/4, pi/8, 3 pi/8) that maximize S for a
    /// maximally entangled state.
    fn default() -> Self {
        Self {
            a: 0.0,
            a_prime: FRAC_PI_4,
            b: FRAC_PI_8,
            b_prime: 3.0 * FRAC_PI_8,
        }
    }
}

/// Joint probability of both photons passing analyzers at `(a_s, a_i)`:
/// `a^2 cos^2 a_s cos^2 a_i + b^2 sin^2 a_s sin^2 a_i
///  + 2 gamma a b cos a_s cos a_i sin a_s sin a_i cos phi`.
pub fn joint_probability(
    alpha: f64,
    beta: f64,
    phi: f64,
    gamma: f64,
    a_s: f64,
    a_i: f64,
) -> Result<f64> {
    let gamma = Coherence::new(gamma)?.value();
    let (ss, cs) = a_s.sin_cos();
    let (si, ci) = a_i.sin_cos();
    Ok(alpha * alpha * cs * cs * ci * ci
        + beta * beta * ss * ss * si * si
        + 2.0 * gamma * alpha * beta * cs * ci * ss * si * phi.cos())
}

/// Correlation `E(a, b)` from the four joint probabilities at `(a, b)` and
/// their orthogonal complements.
pub fn correlation_e(alpha: f64, beta: f64, phi: f64, gamma: f64, a: f64, b: f64) -> Result<f64> {
    let p = |a_s: f64, a_i: f64| joint_probability(alpha, beta, phi, gamma, a_s, a_i);
    let same = p(a, b)? + p(a + FRAC_PI_2, b + FRAC_PI_2)?;
    let diff = p(a, b + FRAC_PI_2)? + p(a + FRAC_PI_2, b)?;
    let total = same + diff;
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::state(format!(
            "degenerate correlation: joint probabilities sum to {total}"
        )));
    }
    Ok((same - diff) / total)
}

/// CHSH combination `S = E(a,b) - E(a,b') + E(a',b) + E(a',b')`.
pub fn chsh_from_state(
    alpha: f64,
    beta: f64,
    phi: f64,
    gamma: f64,
    settings: &BellSettings,
) -> Result<f64> {
    let e = |a, b| correlation_e(alpha, beta, phi, gamma, a, b);
    Ok(
        e(settings.a, settings.b)? - e(settings.a, settings.b_prime)?
            + e(settings.a_prime, settings.b)?
            + e(settings.a_prime, settings.b_prime)?,
    )
}

/// Uniform-visibility heuristic: `S = 2 sqrt(2) v`, violated iff
/// `v > 1/sqrt(2)` (strictly).
pub fn chsh_from_visibility(v: f64) -> Result<(f64, bool)> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(Error::input(format!(
            "visibility must lie in [0, 1], got {v}"
        )));
    }
    let s = 2.0 * std::f64::consts::SQRT_2 * v;
    Ok((s, v > std::f64::consts::FRAC_1_SQRT_2))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn joint_probability_examples() {
        let p = joint_probability(SQRT_HALF, SQRT_HALF, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(p, 0.5, epsilon = 1e-12);

        let p = joint_probability(SQRT_HALF, SQRT_HALF, 1.3, 0.4, 0.0, FRAC_PI_2).unwrap();
        assert!(p.abs() < 1e-12);

        for (a_s, a_i) in [(0.3, 0.9), (1.1, 0.2)] {
            let p = joint_probability(1.0, 0.0, 0.0, 0.7, a_s, a_i).unwrap();
            assert_relative_eq!(p, a_s.cos().powi(2) * a_i.cos().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn joint_probability_rejects_bad_gamma() {
        assert!(joint_probability(1.0, 0.0, 0.0, 1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn complementary_joint_probabilities_sum_to_one() {
        for i in 0..10 {
            let t = FRAC_PI_2 * (i as f64 + 0.5) / 10.0;
            let (alpha, beta) = (t.cos(), t.sin());
            for k in 0..10 {
                let a = 2.1 * k as f64 / 10.0;
                let b = 0.3 + 1.7 * k as f64 / 10.0;
                let phi = 0.6 * k as f64;
                let gamma = k as f64 / 10.0;
                let mut total = 0.0;
                for (da, db) in [
                    (0.0, 0.0),
                    (0.0, FRAC_PI_2),
                    (FRAC_PI_2, 0.0),
                    (FRAC_PI_2, FRAC_PI_2),
                ] {
                    total += joint_probability(alpha, beta, phi, gamma, a + da, b + db).unwrap();
                }
                assert!((total - 1.0).abs() < 1e-12, "total = {total}");
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let e = correlation_e(SQRT_HALF, SQRT_HALF, 0.0, 1.0, 0.7, 0.7).unwrap();
        assert_relative_eq!(e, 1.0, epsilon = 1e-12);

        let e = correlation_e(SQRT_HALF, SQRT_HALF, 0.0, 1.0, 0.0, FRAC_PI_4).unwrap();
        assert!(e.abs() < 1e-12);

        let e = correlation_e(SQRT_HALF, SQRT_HALF, 0.0, 0.75, FRAC_PI_8, FRAC_PI_8).unwrap();
        assert_relative_eq!(e, 0.875, epsilon = 1e-12);
    }

    #[test]
    fn balanced_correlation_matches_closed_form() {
        for gamma in [0.0, 0.4, 1.0] {
            for k in 0..12 {
                let a = 1.9 * k as f64 / 12.0;
                let b = 0.2 + 2.3 * k as f64 / 12.0;
                let e = correlation_e(SQRT_HALF, SQRT_HALF, 0.0, gamma, a, b).unwrap();
                let want =
                    (2.0 * a).cos() * (2.0 * b).cos() + gamma * (2.0 * a).sin() * (2.0 * b).sin();
                assert_relative_eq!(e, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn chsh_standard_settings_scale_with_coherence() {
        let settings = BellSettings::default();
        let s = chsh_from_state(SQRT_HALF, SQRT_HALF, 0.0, 1.0, &settings).unwrap();
        assert_relative_eq!(s, 2.0 * SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(s, 2.82843, epsilon = 1e-5);

        let s = chsh_from_state(SQRT_HALF, SQRT_HALF, 0.0, 0.0, &settings).unwrap();
        assert_relative_eq!(s, SQRT_2, epsilon = 1e-12);

        let s = chsh_from_state(1.0, 0.0, 0.0, 0.3, &settings).unwrap();
        assert_relative_eq!(s, SQRT_2, epsilon = 1e-12);

        for gamma in [0.25, 0.5, 0.75] {
            let s = chsh_from_state(SQRT_HALF, SQRT_HALF, 0.0, gamma, &settings).unwrap();
            assert_relative_eq!(s, SQRT_2 * (1.0 + gamma), epsilon = 1e-12);
        }
    }

    #[test]
    fn visibility_heuristic_threshold() {
        let (s, violated) = chsh_from_visibility(0.75).unwrap();
        assert_relative_eq!(s, 2.12132, epsilon = 1e-5);
        assert!(violated);

        let (s, violated) = chsh_from_visibility(SQRT_HALF).unwrap();
        assert_relative_eq!(s, 2.0, epsilon = 1e-12);
        assert!(!violated);

        let (s, violated) = chsh_from_visibility(1.0).unwrap();
        assert_relative_eq!(s, 2.0 * SQRT_2, epsilon = 1e-12);
        assert!(violated);

        assert!(chsh_from_visibility(1.2).is_err());
        assert!(chsh_from_visibility(-0.1).is_err());
    }

    #[test]
    fn randomized_settings_respect_quantum_and_local_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let settings = BellSettings {
                a: rng.random_range(0.0..std::f64::consts::PI),
                a_prime: rng.random_range(0.0..std::f64::consts::PI),
                b: rng.random_range(0.0..std::f64::consts::PI),
                b_prime: rng.random_range(0.0..std::f64::consts::PI),
            };
            let t: f64 = rng.random_range(0.0..FRAC_PI_2);
            let gamma: f64 = rng.random_range(0.0..=1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let e = correlation_e(t.cos(), t.sin(), phi, gamma, settings.a, settings.b).unwrap();
            assert!(e.abs() <= 1.0 + 1e-12, "E = {e}");

            let s = chsh_from_state(t.cos(), t.sin(), phi, gamma, &settings).unwrap();
            assert!(s.abs() <= 2.0 * SQRT_2 + 1e-9, "S = {s}");

            // Incoherent mixtures and product states admit a local model.
            let s0 = chsh_from_state(t.cos(), t.sin(), phi, 0.0, &settings).unwrap();
            assert!(s0.abs() <= 2.0 + 1e-9, "gamma=0 S = {s0}");
            let sp = chsh_from_state(1.0, 0.0, phi, gamma, &settings).unwrap();
            assert!(sp.abs() <= 2.0 + 1e-9, "product S = {sp}");
        }
    }
}
