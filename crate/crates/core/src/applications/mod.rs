//! Executable scenarios: transport by characteristics, the half-wave
//! parametrix and the wave equation with a randomly perturbed speed.

mod halfwave;
mod ode;
mod transport;
mod wave;

pub use halfwave::{
    eikonal_phi, eikonal_residual, eikonal_series, halfwave_phase, halfwave_solve, p_coefficients, p_value,
    pseudo_spectral_halfwave, solve_flows, spectral_halfwave, EikonalJet, FlowState, HalfWaveData, PeriodicGrid,
    SpectralOptions, P_INNER, P_OUTER,
};
pub use ode::OdeOptions;
pub use transport::{
    characteristic_series, check_speed, solve_characteristics, solve_characteristics_with, transport_operator,
    transport_oracle, transport_phase, transport_phase_with, transport_solve, CharacteristicJet, SPEED_SCAN,
};
pub use wave::{dalembert, wave_branch_phase, wave_expected, wave_mc, wave_sample_exact, wave_solve, WaveScenario};
