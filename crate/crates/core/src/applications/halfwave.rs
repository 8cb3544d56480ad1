//! Half-wave equation `(∂ₜ + i c(x) P(Dₓ))u = 0` through the F/G flows and
//! the eikonal phase, with spectral reference solvers.

use super::ode::{compose_speed, compose_speed_derivative, rk4, OdeOptions};
use crate::error::{invalid, Error, Result};
use crate::jets::univariate::{smooth_step, Taylor1};
use crate::jets::{Point, PhaseProfile, RealSeries, SmoothMap, TabulatedPhase};
use crate::oscillatory::{composite, Field, FioOperator, QuadratureConfig};
use crate::symbol_spaces::{axis, Amplitude, PhaseFunction, TestFunction};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// `χ_P ≡ 1` for `|ξ| < 1/4` and `≡ 0` for `|ξ| > 1/2`.
pub const P_INNER: f64 = 0.25;
pub const P_OUTER: f64 = 0.5;

/// The symbol `P(ξ) = |ξ|(1 − χ_P(ξ))`.
pub fn p_value(g: f64) -> f64 {
    g.abs() * (1.0 - smooth_step(g.abs(), P_INNER, P_OUTER, 0)[0])
}

/// Taylor coefficients of `P` at `g0`.
pub fn p_coefficients(g0: f64, order: usize) -> Taylor1<f64> {
    if g0.abs() <= P_INNER {
        return Taylor1::from_elem(0.0, order + 1);
    }
    let u = RealSeries::variable(1, order, 0, g0).scale(g0.signum());
    let chi = u.compose(&smooth_step(g0.abs(), P_INNER, P_OUTER, order));
    u.mul(&chi.neg().add_scalar(1.0)).coeffs().iter().copied().collect()
}

fn p_of(g: &RealSeries) -> RealSeries {
    g.compose(&p_coefficients(g.value(), g.order()))
}

fn dp_of(g: &RealSeries) -> RealSeries {
    let p = p_coefficients(g.value(), g.order() + 1);
    let d: Vec<f64> = p.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    g.compose(&d)
}

/// Run `F' = c(F)P'(G)`, `G' = −c'(F)P(G)` for `duration` (negative runs backwards).
fn flow(c: &dyn SmoothMap, f: RealSeries, g: RealSeries, duration: f64, opts: &OdeOptions) -> Result<(RealSeries, RealSeries)> {
    let out = rk4(vec![f, g], duration, opts.steps(duration), |y| {
        let (f, g) = (&y[0], &y[1]);
        Ok(vec![compose_speed(c, f)?.mul(&dp_of(g)), compose_speed_derivative(c, f)?.mul(&p_of(g)).neg()])
    })?;
    let mut it = out.into_iter();
    Ok((it.next().expect("F"), it.next().expect("G")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub f: f64,
    pub g: f64,
}

/// `(F, G)(t; x₁, ξ₁)` at the ascending nonnegative times `t_grid`.
pub fn solve_flows(c: &dyn SmoothMap, t_grid: &[f64], x1: f64, xi1: f64, opts: &OdeOptions) -> Result<Vec<FlowState>> {
    if xi1.abs() < 1.0 {
        return Err(invalid("flows start from |ξ₁| ≥ 1"));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(invalid("time grid must be ascending and nonnegative"));
    }
    let mut f = RealSeries::constant(1, 0, x1);
    let mut g = RealSeries::constant(1, 0, xi1);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        (f, g) = flow(c, f, g, t - now, opts)?;
        now = t;
        out.push(FlowState { t, f: f.value(), g: g.value() });
    }
    Ok(out)
}

/// Speed field, observed horizon and discretization of the eikonal representation.
#[derive(Clone, Debug)]
pub struct HalfWaveData {
    pub speed: Arc<dyn SmoothMap>,
    /// `max(sup c, sup |c'|)` on the scan grid.
    pub speed_bound: f64,
    /// Region of starting points `x₁` scanned for the horizon.
    pub region: (f64, f64),
    pub horizon: f64,
    pub margin: f64,
    /// Last time at which `|G|` stays above `½(1 + margin)` for all scanned `x₁` and `ξ₁ = ±1`.
    pub t_obs: f64,
    pub opts: OdeOptions,
    /// Gauss–Legendre panel width and nodes for the `s`-integral.
    pub s_panel: f64,
    pub s_nodes: usize,
}

impl HalfWaveData {
    pub fn new(speed: Arc<dyn SmoothMap>, region: (f64, f64), horizon: f64) -> Result<Self> {
        Self::with_options(speed, region, horizon, 0.1, OdeOptions::default())
    }

    pub fn with_options(speed: Arc<dyn SmoothMap>, region: (f64, f64), horizon: f64, margin: f64, opts: OdeOptions) -> Result<Self> {
        if !(region.0 < region.1) || !(horizon > 0.0) || !(margin >= 0.0) {
            return Err(invalid("half-wave data needs a nonempty region, positive horizon and nonnegative margin"));
        }
        let mut bound = 0.0f64;
        for x in axis(super::transport::SPEED_SCAN.0, super::transport::SPEED_SCAN.1, super::transport::SPEED_SCAN.2) {
            let s = speed.series(&Point::new(&[x], &[], &[])?, 1, crate::jets::VarSet::all(1))?;
            bound = bound.max(s.value().abs()).max(s.coeffs()[1].abs());
        }
        let threshold = 0.5 * (1.0 + margin);
        let steps = opts.steps(horizon);
        let dt = horizon / steps as f64;
        let mut t_obs = horizon;
        for x1 in axis(region.0, region.1, 41) {
            for xi1 in [-1.0, 1.0] {
                let mut f = RealSeries::constant(1, 0, x1);
                let mut g = RealSeries::constant(1, 0, xi1);
                for k in 1..=steps {
                    let t = k as f64 * dt;
                    if t > t_obs {
                        break;
                    }
                    (f, g) = flow(speed.as_ref(), f, g, dt, &OdeOptions { tolerance: opts.tolerance, min_steps: 1 })?;
                    if g.value().abs() <= threshold {
                        t_obs = t - dt;
                        break;
                    }
                }
            }
        }
        Ok(HalfWaveData { speed, speed_bound: bound, region, horizon, margin, t_obs, opts, s_panel: 0.25, s_nodes: 8 })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t < 0.0 {
            return Err(invalid("half-wave time must be nonnegative"));
        }
        if t > self.t_obs {
            return Err(Error::BeyondHorizon { t, horizon: self.t_obs });
        }
        Ok(())
    }
}

/// `φ(x, t, ξ)` and its x-derivatives, `derivs[0] = φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EikonalJet {
    pub value: f64,
    pub derivs: Vec<f64>,
}

/// Taylor series in `x` of `φ(x,t,ξ) = xξ − ∫₀ᵗ c(x) P(G(F(−s;x,ξ), s, ξ)) ds`.
pub fn eikonal_series(data: &HalfWaveData, x: f64, t: f64, xi: f64, order: usize) -> Result<RealSeries> {
    data.check_time(t)?;
    if xi.abs() < 1.0 {
        return Err(invalid("the eikonal representation needs |ξ| ≥ 1"));
    }
    let c = data.speed.as_ref();
    let xs = RealSeries::variable(1, order, 0, x);
    let mut phi = xs.scale(xi);
    if t == 0.0 {
        return Ok(phi);
    }
    let cx = compose_speed(c, &xs)?;
    let panels = (t / data.s_panel).ceil().max(1.0) as usize;
    let bounds: Vec<_> = (0..panels).map(|i| (t * i as f64 / panels as f64, t * (i + 1) as f64 / panels as f64)).collect();
    let (nodes, weights) = composite(&bounds, data.s_nodes);
    let g0 = RealSeries::constant(1, order, xi);
    for (s, w) in nodes.iter().zip(&weights) {
        let (foot, _) = flow(c, xs.clone(), g0.clone(), -s, &data.opts)?;
        let (_, g) = flow(c, foot, g0.clone(), *s, &data.opts)?;
        phi = phi.sub(&cx.mul(&p_of(&g)).scale(*w));
    }
    Ok(phi)
}

pub fn eikonal_phi(data: &HalfWaveData, x: f64, t: f64, xi: f64, order: usize) -> Result<EikonalJet> {
    let s = eikonal_series(data, x, t, xi, order)?;
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
    Ok(EikonalJet { value: s.value(), derivs })
}

/// `|∂ₜφ + c(x)P(∂ₓφ)|` with `∂ₓφ` from the jet and `∂ₜφ` by Richardson-extrapolated differences.
pub fn eikonal_residual(data: &HalfWaveData, x: f64, t: f64, xi: f64) -> Result<f64> {
    let phi = |s: f64| eikonal_series(data, x, s, xi, 0).map(|v| v.value());
    let h = 1e-2f64.min(0.25 * (data.t_obs - t).max(0.0)).max(1e-4);
    let dt = if t >= 2.0 * h {
        let d = |h: f64| -> Result<f64> { Ok((phi(t + h)? - phi(t - h)?) / (2.0 * h)) };
        (4.0 * d(0.5 * h)? - d(h)?) / 3.0
    } else {
        let d = |h: f64| -> Result<f64> { Ok((-3.0 * phi(t)? + 4.0 * phi(t + h)? - phi(t + 2.0 * h)?) / (2.0 * h)) };
        (4.0 * d(0.5 * h)? - d(h)?) / 3.0
    };
    let jet = eikonal_phi(data, x, t, xi, 1)?;
    let c = data.speed.value(&Point::new(&[x], &[], &[])?)?;
    Ok((dt + c * p_value(jet.derivs[1])).abs())
}

#[derive(Debug)]
struct EikonalProfile {
    data: HalfWaveData,
    t: f64,
}

impl PhaseProfile for EikonalProfile {
    fn profile(&self, x: f64, sign: f64, order: usize) -> Result<Taylor1<f64>> {
        Ok(eikonal_series(&self.data, x, self.t, sign, order)?.coeffs().iter().copied().collect())
    }
    fn describe(&self) -> String {
        format!("phi(x, {}, sign xi) for c = {}", self.t, self.data.speed.describe())
    }
}

/// `Φ(x, y, ξ) = |ξ|φ(x, t, ξ/|ξ|) − yξ`.
pub fn halfwave_phase(data: &HalfWaveData, t: f64) -> Result<PhaseFunction> {
    data.check_time(t)?;
    let profile = EikonalProfile { data: data.clone(), t };
    Ok(PhaseFunction::new(Arc::new(TabulatedPhase::new(Arc::new(profile)))))
}

/// Leading-order parametrix with amplitude `a ≡ 1`.
pub fn halfwave_solve(data: &HalfWaveData, t: f64, u0: &TestFunction, xs: &[f64], config: &QuadratureConfig) -> Result<Field> {
    let phi = halfwave_phase(data, t)?;
    let amp = Amplitude::constant(phi.signature(), 1.0);
    FioOperator::new(phi, amp, config.clone())?.apply(u0, xs)
}

/// Discretization of the Fourier-side oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralOptions {
    pub xi_max: f64,
    pub panel: f64,
    pub nodes: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { xi_max: 64.0, panel: 0.25, nodes: 12 }
    }
}

fn panels(lo: f64, hi: f64, width: f64) -> Vec<(f64, f64)> {
    let n = ((hi - lo) / width).ceil().max(1.0) as usize;
    (0..n).map(|i| (lo + (hi - lo) * i as f64 / n as f64, lo + (hi - lo) * (i + 1) as f64 / n as f64)).collect()
}

/// `u(x, t) = (2π)⁻¹ ∫ e^{ixξ − i t c₀ P(ξ)} û₀(ξ) dξ` for constant speed, by dense quadrature.
pub fn spectral_halfwave(c0: f64, u0: &TestFunction, t: f64, xs: &[f64], opts: &SpectralOptions) -> Result<Vec<Complex64>> {
    let Some(support) = &u0.support else {
        return Ok(vec![Complex64::new(0.0, 0.0); xs.len()]);
    };
    let (ys, wy) = composite(&panels(support[0].0, support[0].1, opts.panel), opts.nodes);
    let uy: Vec<f64> = ys.iter().map(|&y| u0.value(&[y])).collect::<Result<_>>()?;
    let (ks, wk) = composite(&panels(-opts.xi_max, opts.xi_max, opts.panel), opts.nodes);
    let spectrum: Vec<Complex64> = ks
        .iter()
        .zip(&wk)
        .map(|(&k, &w)| {
            let hat: Complex64 = ys.iter().zip(&wy).zip(&uy).map(|((y, wy), u)| Complex64::from_polar(wy * u, -k * y)).sum();
            hat * Complex64::from_polar(w / (2.0 * PI), -t * c0 * p_value(k))
        })
        .collect();
    Ok(xs.iter().map(|&x| ks.iter().zip(&spectrum).map(|(k, s)| s * Complex64::from_polar(1.0, k * x)).sum()).collect())
}

/// Periodic grid and time step of the pseudo-spectral reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodicGrid {
    pub half_width: f64,
    pub points: usize,
    pub dt: f64,
}

impl Default for PeriodicGrid {
    fn default() -> Self {
        PeriodicGrid { half_width: 40.0, points: 2048, dt: 2e-3 }
    }
}

/// Reference for variable speed: `P(D)` applied by FFT on a periodic grid, RK4 in time,
/// trigonometric interpolation to `xs`.
pub fn pseudo_spectral_halfwave(c: &dyn SmoothMap, u0: &TestFunction, t: f64, xs: &[f64], grid: &PeriodicGrid) -> Result<Vec<Complex64>> {
    let n = grid.points;
    if n < 8 || !(grid.half_width > 0.0) || !(grid.dt > 0.0) {
        return Err(invalid("periodic grid needs at least 8 points, positive width and step"));
    }
    let len = 2.0 * grid.half_width;
    let dx = len / n as f64;
    let xg: Vec<f64> = (0..n).map(|j| -grid.half_width + j as f64 * dx).collect();
    let cg: Vec<f64> = xg.iter().map(|&x| c.value(&Point::new(&[x], &[], &[])?)).collect::<Result<_>>()?;
    let wave: Vec<f64> = (0..n).map(|m| 2.0 * PI / len * if m < n / 2 { m as f64 } else { m as f64 - n as f64 }).collect();
    let pk: Vec<f64> = wave.iter().map(|&k| p_value(k) / n as f64).collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let rhs = |u: &[Complex64]| -> Vec<Complex64> {
        let mut b = u.to_vec();
        fwd.process(&mut b);
        for (v, p) in b.iter_mut().zip(&pk) {
            *v *= p;
        }
        inv.process(&mut b);
        b.iter().zip(&cg).map(|(v, c)| Complex64::new(0.0, -c) * v).collect()
    };
    let mut u: Vec<Complex64> = xg.iter().map(|&x| u0.value(&[x]).map(|v| Complex64::new(v, 0.0))).collect::<Result<_>>()?;
    let steps = (t / grid.dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let shift = |u: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> { u.iter().zip(k).map(|(u, k)| u + k * a).collect() };
    if t > 0.0 {
        for _ in 0..steps {
            let k1 = rhs(&u);
            let k2 = rhs(&shift(&u, &k1, 0.5 * h));
            let k3 = rhs(&shift(&u, &k2, 0.5 * h));
            let k4 = rhs(&shift(&u, &k3, h));
            for i in 0..n {
                u[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
        }
    }
    fwd.process(&mut u);
    Ok(xs
        .iter()
        .map(|&x| {
            u.iter().zip(&wave).map(|(v, k)| v * Complex64::from_polar(1.0 / n as f64, k * (x + grid.half_width))).sum()
        })
        .collect())
}
