//! Central finite-difference jets, used only as a test oracle.

use super::layout::{layout, MAX_VARS};
use super::map::{Jet, Point, SmoothMap};
use super::series::RealSeries;
use crate::error::{invalid, Error, Result};

/// Offsets (in steps) and weights of the second-order central stencil for `d^k/du^k`.
fn stencil(k: u8) -> (&'static [i32], &'static [f64]) {
    match k {
        0 => (&[0], &[1.0]),
        1 => (&[-1, 1], &[-0.5, 0.5]),
        2 => (&[-1, 0, 1], &[1.0, -2.0, 1.0]),
        3 => (&[-2, -1, 1, 2], &[-0.5, 1.0, -1.0, 0.5]),
        4 => (&[-2, -1, 0, 1, 2], &[1.0, -4.0, 6.0, -4.0, 1.0]),
        _ => unreachable!("stencil order is checked by the caller"),
    }
}

fn mixed_partial(f: &dyn SmoothMap, p: &Point, e: &[u8], step: f64) -> Result<f64> {
    let n = p.signature().total();
    let active: Vec<usize> = (0..n).filter(|&v| e[v] > 0).collect();
    let stencils: Vec<_> = active.iter().map(|&v| stencil(e[v])).collect();
    let mut counter = vec![0usize; active.len()];
    let mut acc = 0.0;
    loop {
        let mut q = *p;
        let mut w = 1.0;
        for (a, &v) in active.iter().enumerate() {
            let (off, wt) = stencils[a];
            q.set_coord(v, p.coord(v) + off[counter[a]] as f64 * step);
            w *= wt[counter[a]];
        }
        acc += w * f.value(&q)?;
        // odometer over the tensor-product stencil
        let mut a = 0;
        loop {
            if a == active.len() {
                let total: u32 = e.iter().map(|&k| k as u32).sum();
                return Ok(acc / step.powi(total as i32));
            }
            counter[a] += 1;
            if counter[a] < stencils[a].0.len() {
                break;
            }
            counter[a] = 0;
            a += 1;
        }
    }
}

fn fd_series(f: &dyn SmoothMap, p: &Point, order: usize, step: f64) -> Result<RealSeries> {
    let n = p.signature().total();
    let l = layout(n);
    let mut s = RealSeries::zeros(n, order);
    for i in 0..l.len(order) {
        let e = l.exponents(i);
        let d = mixed_partial(f, p, &e[..MAX_VARS], step)?;
        s.coeffs_mut()[i] = d / l.factorial(i);
    }
    Ok(s)
}

fn check(f: &dyn SmoothMap, p: &Point, order: usize, step: f64) -> Result<()> {
    if !(step > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    if order > 4 {
        return Err(Error::OrderExceeded { requested: order, max: 4 });
    }
    if p.signature() != f.signature() {
        return Err(invalid("point signature differs from map signature"));
    }
    if order > 0 && p.signature().nxi > 0 {
        let norm = p.xi_norm();
        if norm <= 2.0 * step * order as f64 {
            return Err(Error::StencilOutsideDomain(format!(
                "‖ξ‖ = {norm:e} is within the stencil radius of ξ = 0"
            )));
        }
    }
    Ok(())
}

/// Jet by central differences; truncation error `O(step²)`.
pub fn fd_jet(f: &dyn SmoothMap, p: &Point, order: usize, step: f64) -> Result<Jet> {
    check(f, p, order, step)?;
    Ok(Jet::from_series(*p, fd_series(f, p, order, step)?))
}

/// Richardson-refined jet `(4 D(step/2) − D(step))/3`; truncation error `O(step⁴)`.
pub fn fd_jet_richardson(f: &dyn SmoothMap, p: &Point, order: usize, step: f64) -> Result<Jet> {
    check(f, p, order, step)?;
    let coarse = fd_series(f, p, order, step)?;
    let fine = fd_series(f, p, order, step / 2.0)?;
    Ok(Jet::from_series(*p, fine.scale(4.0 / 3.0).sub(&coarse.scale(1.0 / 3.0))))
}
