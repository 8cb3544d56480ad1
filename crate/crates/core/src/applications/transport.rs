//! Transport equation `∂ₜu + c(x)∂ₓu = 0` through characteristics.

use super::ode::{compose_speed, rk4, OdeOptions};
use crate::error::{invalid, Result};
use crate::jets::univariate::Taylor1;
use crate::jets::{PhaseProfile, RealSeries, SmoothMap, TabulatedPhase};
use crate::oscillatory::{Field, FioOperator, QuadratureConfig};
use crate::stochastic::min_on_grid;
use crate::symbol_spaces::{axis, Amplitude, PhaseFunction, TestFunction};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `γ(x, t; 0)` and its x-derivatives `∂ᵏγ/∂xᵏ`, `derivs[0] = γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicJet {
    pub gamma: f64,
    pub derivs: Vec<f64>,
}

/// Taylor series in `x` of the foot point `γ(x, t; 0)` of the characteristic through `(x, t)`.
pub fn characteristic_series(c: &dyn SmoothMap, x: f64, t: f64, order: usize, opts: &OdeOptions) -> Result<RealSeries> {
    if c.signature().nx != 1 || c.signature().total() != 1 {
        return Err(invalid("speed must be a map of one x-variable"));
    }
    let start = RealSeries::variable(1, order, 0, x);
    // dγ/dτ = c(γ) from τ = t back to τ = 0
    let out = rk4(vec![start], -t, opts.steps(t), |y| Ok(vec![compose_speed(c, &y[0])?]))?;
    Ok(out.into_iter().next().expect("one state"))
}

pub fn solve_characteristics(c: &dyn SmoothMap, x: f64, t: f64, order: usize) -> Result<CharacteristicJet> {
    solve_characteristics_with(c, x, t, order, &OdeOptions::default())
}

pub fn solve_characteristics_with(c: &dyn SmoothMap, x: f64, t: f64, order: usize, opts: &OdeOptions) -> Result<CharacteristicJet> {
    let s = characteristic_series(c, x, t, order, opts)?;
    let mut fact = 1.0;
    let derivs = s
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v * fact
        })
        .collect();
    Ok(CharacteristicJet { gamma: s.value(), derivs })
}

#[derive(Debug)]
struct CharacteristicProfile {
    speed: Arc<dyn SmoothMap>,
    t: f64,
    opts: OdeOptions,
}

impl PhaseProfile for CharacteristicProfile {
    fn profile(&self, x: f64, sign: f64, order: usize) -> Result<Taylor1<f64>> {
        let s = characteristic_series(self.speed.as_ref(), x, self.t, order, &self.opts)?;
        Ok(s.coeffs().iter().map(|v| sign * v).collect())
    }
    fn describe(&self) -> String {
        format!("gamma(x, {}; 0) for c = {}", self.t, self.speed.describe())
    }
}

/// Where speeds are scanned for the lower bound `α`.
pub const SPEED_SCAN: (f64, f64, usize) = (-50.0, 50.0, 4001);

/// Reject speeds that dip below `α > 0` on the scan grid.
pub fn check_speed(c: &dyn SmoothMap, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("speed lower bound α must be positive"));
    }
    let min = min_on_grid(c, &axis(SPEED_SCAN.0, SPEED_SCAN.1, SPEED_SCAN.2))?;
    if min < alpha {
        return Err(invalid(format!("speed minimum {min} is below α = {alpha}")));
    }
    Ok(min)
}

/// `Φ(x, y, ξ) = ξ(γ(x, t; 0) − y)`.
pub fn transport_phase(c: Arc<dyn SmoothMap>, t: f64, alpha: f64) -> Result<PhaseFunction> {
    transport_phase_with(c, t, alpha, OdeOptions::default())
}

pub fn transport_phase_with(c: Arc<dyn SmoothMap>, t: f64, alpha: f64, opts: OdeOptions) -> Result<PhaseFunction> {
    check_speed(c.as_ref(), alpha)?;
    let profile = CharacteristicProfile { speed: c, t, opts };
    Ok(PhaseFunction::new(Arc::new(TabulatedPhase::new(Arc::new(profile)))))
}

/// The operator solving the transport equation at time `t`.
pub fn transport_operator(c: Arc<dyn SmoothMap>, t: f64, alpha: f64, config: &QuadratureConfig) -> Result<FioOperator> {
    let phi = transport_phase(c, t, alpha)?;
    let amp = Amplitude::constant(phi.signature(), 1.0);
    FioOperator::new(phi, amp, config.clone())
}

pub fn transport_solve(
    c: Arc<dyn SmoothMap>,
    t: f64,
    alpha: f64,
    u0: &TestFunction,
    xs: &[f64],
    config: &QuadratureConfig,
) -> Result<Field> {
    transport_operator(c, t, alpha, config)?.apply(u0, xs)
}

/// `u₀(γ(x, t; 0))` straight from the characteristics.
pub fn transport_oracle(c: &dyn SmoothMap, t: f64, u0: &TestFunction, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter().map(|&x| u0.value(&[solve_characteristics(c, x, t, 0)?.gamma])).collect()
}
