//! Fixed-step RK4 on truncated Taylor series.
//!
//! Running the classical scheme on series in the initial position instead of
//! plain numbers integrates the variational equations for all x-derivatives
//! at once, with exactly the same discretization as the state itself.

use crate::error::{Error, Result};
use crate::jets::{Point, RealSeries, SmoothMap, VarSet};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdeOptions {
    /// Target global error; the step count per unit time is `tolerance^(−1/4)`.
    pub tolerance: f64,
    pub min_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { tolerance: 1e-10, min_steps: 8 }
    }
}

impl OdeOptions {
    pub fn steps(&self, duration: f64) -> usize {
        let per_unit = self.tolerance.powf(-0.25);
        ((duration.abs() * per_unit).ceil() as usize).max(self.min_steps)
    }

    /// The same options with half the step size.
    pub fn halved(&self) -> Self {
        OdeOptions { tolerance: self.tolerance / 16.0, min_steps: 2 * self.min_steps }
    }
}

fn axpy(y: &[RealSeries], h: f64, k: &[RealSeries]) -> Vec<RealSeries> {
    y.iter().zip(k).map(|(a, b)| a.add(&b.scale(h))).collect()
}

/// Integrate `y' = f(y)` over `duration` (negative runs backwards) in `steps` steps.
pub(crate) fn rk4<F>(mut y: Vec<RealSeries>, duration: f64, steps: usize, f: F) -> Result<Vec<RealSeries>>
where
    F: Fn(&[RealSeries]) -> Result<Vec<RealSeries>>,
{
    if duration == 0.0 {
        return Ok(y);
    }
    let h = duration / steps as f64;
    for _ in 0..steps {
        let k1 = f(&y)?;
        let k2 = f(&axpy(&y, 0.5 * h, &k1))?;
        let k3 = f(&axpy(&y, 0.5 * h, &k2))?;
        let k4 = f(&axpy(&y, h, &k3))?;
        for (i, yi) in y.iter_mut().enumerate() {
            let incr = k1[i].add(&k2[i].scale(2.0)).add(&k3[i].scale(2.0)).add(&k4[i]);
            *yi = yi.add(&incr.scale(h / 6.0));
        }
        if y.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("ODE state".into()));
        }
    }
    Ok(y)
}

/// `c(g)` for a map `c` of one x-variable and a one-variable series `g`.
pub(crate) fn compose_speed(c: &dyn SmoothMap, g: &RealSeries) -> Result<RealSeries> {
    let cs = c.series(&Point::new(&[g.value()], &[], &[])?, g.order(), VarSet::all(1))?;
    Ok(g.compose(cs.coeffs()))
}

/// `c'(g)` as a series.
pub(crate) fn compose_speed_derivative(c: &dyn SmoothMap, g: &RealSeries) -> Result<RealSeries> {
    let cs = c.series(&Point::new(&[g.value()], &[], &[])?, g.order() + 1, VarSet::all(1))?;
    let d: Vec<f64> = cs.coeffs().iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    Ok(g.compose(&d))
}
