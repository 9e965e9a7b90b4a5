//! Simulation and analysis of the two-crystal SPDC conditional-interference
//! bench: Jones-calculus polarization optics, the two-path entangled state,
//! position- and waveplate-resolved coincidence scans with slit averaging
//! and Poisson shot noise, nonlinear least-squares pattern fitting, and
//! CHSH correlation analysis.

pub mod bell;
pub mod biphoton;
pub mod coincidence;
pub mod error;
pub mod fitting;
pub mod geometry;
pub mod polarization;

pub use bell::{
    chsh_from_state, chsh_from_visibility, correlation_e, joint_probability, BellSettings,
};
pub use biphoton::{
    concurrence, make_two_crystal_state, pump_split, state_coefficients, BiphotonState,
    PathAmplitude, PumpMapping, PumpSetting,
};
pub use coincidence::{
    poissonize, rate_closed_form, rate_spatial, scan_signal, scan_waveplate, slit_average,
    slit_cos_reduction, AbscissaKind, Coherence, Pattern, ScanConfig,
};
pub use error::{Error, Result};
pub use fitting::{
    double_slit_a_eff, fit_result_json, initial_guess, least_squares, numerical_jacobian,
    visibility_from_fit, visibility_raw, FitModel, FitOptions, FitResult, ModelKind, Visibility,
};
pub use geometry::{OpticalLayout, PhaseModel};
pub use polarization::{hwp, polarizer, projection_amplitude, JonesMatrix, JonesVector};
