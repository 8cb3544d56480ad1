//! Taylor coefficients `f^(k)(u0)/k!` of the scalar functions used in compositions.

use super::series::RealSeries;
use num_complex::Complex64;
use smallvec::SmallVec;

pub type Taylor1<T> = SmallVec<[T; 9]>;

fn inv_factorials(order: usize) -> Taylor1<f64> {
    let mut f = Taylor1::new();
    let mut acc = 1.0;
    for k in 0..=order {
        if k > 0 {
            acc /= k as f64;
        }
        f.push(acc);
    }
    f
}

pub fn exp(u0: f64, order: usize) -> Taylor1<f64> {
    let e = u0.exp();
    inv_factorials(order).into_iter().map(|c| c * e).collect()
}

/// Coefficients of `exp(i u)` at `u0`.
pub fn exp_i(u0: f64, order: usize) -> Taylor1<Complex64> {
    let base = Complex64::new(u0.cos(), u0.sin());
    let mut ik = Complex64::new(1.0, 0.0);
    let inv = inv_factorials(order);
    let mut out = Taylor1::new();
    for c in inv {
        out.push(base * ik * c);
        ik *= Complex64::new(0.0, 1.0);
    }
    out
}

/// Coefficients of `u^p` at `u0 > 0` (any real `p`), or at any `u0` for integer `p >= 0`.
pub fn pow(u0: f64, p: f64, order: usize) -> Taylor1<f64> {
    let mut out = Taylor1::new();
    let mut binom = 1.0;
    for k in 0..=order {
        if k > 0 {
            binom *= (p - (k as f64 - 1.0)) / k as f64;
        }
        let e = p - k as f64;
        let term = if binom == 0.0 {
            0.0
        } else if e == 0.0 {
            binom
        } else {
            binom * u0.powf(e)
        };
        out.push(term);
    }
    out
}

pub fn sin(u0: f64, order: usize) -> Taylor1<f64> {
    let (s, c) = u0.sin_cos();
    let cyc = [s, c, -s, -c];
    inv_factorials(order).into_iter().enumerate().map(|(k, f)| cyc[k % 4] * f).collect()
}

pub fn cos(u0: f64, order: usize) -> Taylor1<f64> {
    let (s, c) = u0.sin_cos();
    let cyc = [c, -s, -c, s];
    inv_factorials(order).into_iter().enumerate().map(|(k, f)| cyc[k % 4] * f).collect()
}

/// Coefficients of `cos(k u + θ)` at `u0`.
pub fn cos_affine(k: f64, theta: f64, u0: f64, order: usize) -> Taylor1<f64> {
    let base = cos(k * u0 + theta, order);
    let mut kp = 1.0;
    base.into_iter()
        .map(|c| {
            let r = c * kp;
            kp *= k;
            r
        })
        .collect()
}

/// Coefficients of `sin(k u + θ)` at `u0`.
pub fn sin_affine(k: f64, theta: f64, u0: f64, order: usize) -> Taylor1<f64> {
    let base = sin(k * u0 + theta, order);
    let mut kp = 1.0;
    base.into_iter()
        .map(|c| {
            let r = c * kp;
            kp *= k;
            r
        })
        .collect()
}

pub fn tanh(u0: f64, order: usize) -> Taylor1<f64> {
    let u = RealSeries::variable(1, order, 0, u0);
    let e2 = u.scale(2.0).compose(&exp(2.0 * u0, order));
    let num = e2.add_scalar(-1.0);
    let den = e2.add_scalar(1.0);
    match num.div(&den) {
        Ok(t) => t.coeffs().iter().copied().collect(),
        Err(_) => {
            let mut v = Taylor1::from_elem(0.0, order + 1);
            v[0] = u0.signum();
            v
        }
    }
}

/// The mollifier building block `g(u) = exp(-1/u)` for `u > 0`, zero otherwise.
pub fn mollifier_g(u0: f64, order: usize) -> Taylor1<f64> {
    // below this threshold every coefficient is far below f64 resolution
    if u0 <= 1.0 / 700.0 {
        return Taylor1::from_elem(0.0, order + 1);
    }
    let u = RealSeries::variable(1, order, 0, u0);
    let w = u.recip().expect("u0 > 0").neg();
    w.compose(&exp(-1.0 / u0, order)).coeffs().iter().copied().collect()
}

/// Coefficients of the smooth step `χ(s)`, equal to 1 for `s <= inner` and 0 for `s >= outer`:
/// `χ = g(1-τ) / (g(1-τ) + g(τ))` with `τ = (s - inner)/(outer - inner)`.
pub fn smooth_step(s0: f64, inner: f64, outer: f64, order: usize) -> Taylor1<f64> {
    let w = outer - inner;
    let tau0 = (s0 - inner) / w;
    let mut out = Taylor1::from_elem(0.0, order + 1);
    if tau0 <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if tau0 >= 1.0 {
        return out;
    }
    let lift = |c: Taylor1<f64>, sgn: f64| -> RealSeries {
        // g(τ0 + sgn δs / w) as a series in δs
        let mut v = c;
        let mut f = 1.0;
        for x in v.iter_mut() {
            *x *= f;
            f *= sgn / w;
        }
        RealSeries::from_coeffs(1, order, v.into_iter().collect())
    };
    let a = lift(mollifier_g(1.0 - tau0, order), -1.0);
    let b = lift(mollifier_g(tau0, order), 1.0);
    let den = a.add(&b);
    match a.div(&den) {
        Ok(chi) => chi.coeffs().iter().copied().collect(),
        Err(_) => out,
    }
}
