//! Truncated multivariate Taylor series in normalized form, `c[α] = ∂^α f / α!`.
//!
//! With normalized coefficients a product is a plain Cauchy product over the
//! precomputed pair table of the layout, and a quotient is the recursive
//! Cauchy division in graded order.

use super::layout::{layout, Exponents, Layout, MAX_ORDER, MAX_VARS, NONE};
use crate::error::{Error, Result};
use num_complex::Complex64;
use smallvec::{smallvec, SmallVec};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Coefficient field of a series: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Default
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        Complex64::new(self.re * s, self.im * s)
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Inline capacity: two variables at order three.
const INLINE: usize = 10;

pub type Coeffs<T> = SmallVec<[T; INLINE]>;

/// Coefficients `f(0), …, f(len − 1)`, filled in place.
#[inline]
fn build<U: Copy + Default>(len: usize, mut f: impl FnMut(usize) -> U) -> SmallVec<[U; INLINE]> {
    let mut c: SmallVec<[U; INLINE]> = smallvec![U::default(); len];
    for (i, v) in c.iter_mut().enumerate() {
        *v = f(i);
    }
    c
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series<T> {
    nvars: u8,
    order: u8,
    c: Coeffs<T>,
}

pub type RealSeries = Series<f64>;
pub type ComplexSeries = Series<Complex64>;

impl<T: Scalar> Series<T> {
    pub fn zeros(nvars: usize, order: usize) -> Self {
        debug_assert!(order <= MAX_ORDER && nvars <= MAX_VARS);
        Series { nvars: nvars as u8, order: order as u8, c: smallvec![T::zero(); layout(nvars).len(order)] }
    }

    pub fn constant(nvars: usize, order: usize, v: T) -> Self {
        let mut s = Self::zeros(nvars, order);
        s.c[0] = v;
        s
    }

    /// `value + δ_slot`.
    pub fn variable(nvars: usize, order: usize, slot: usize, value: T) -> Self {
        let mut s = Self::constant(nvars, order, value);
        if order >= 1 {
            s.c[1 + slot] = T::one();
        }
        s
    }

    pub fn from_coeffs(nvars: usize, order: usize, c: Coeffs<T>) -> Self {
        assert_eq!(c.len(), layout(nvars).len(order));
        Series { nvars: nvars as u8, order: order as u8, c }
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    #[inline]
    pub fn layout(&self) -> &'static Layout {
        layout(self.nvars as usize)
    }

    #[inline]
    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.c
    }

    #[inline]
    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Normalized coefficient of `e`, zero if beyond the order.
    pub fn coeff(&self, e: &Exponents) -> T {
        match self.layout().index_of(e) {
            Some(i) if i < self.c.len() => self.c[i],
            _ => T::zero(),
        }
    }

    /// Partial derivative `∂^e f` at the expansion point.
    pub fn derivative(&self, e: &Exponents) -> T {
        match self.layout().index_of(e) {
            Some(i) if i < self.c.len() => self.c[i].scale(self.layout().factorial(i)),
            _ => T::zero(),
        }
    }

    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order());
        let len = self.layout().len(order);
        Series { nvars: self.nvars, order: order as u8, c: SmallVec::from_slice(&self.c[..len]) }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    fn common(&self, other_order: usize, other_nvars: usize) -> usize {
        debug_assert_eq!(self.nvars(), other_nvars, "series over different variable sets");
        self.order().min(other_order)
    }

    pub fn add(&self, o: &Self) -> Self {
        let m = self.common(o.order(), o.nvars());
        let len = self.layout().len(m);
        let c = build(len, |i| self.c[i] + o.c[i]);
        Series { nvars: self.nvars, order: m as u8, c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let m = self.common(o.order(), o.nvars());
        let len = self.layout().len(m);
        let c = build(len, |i| self.c[i] - o.c[i]);
        Series { nvars: self.nvars, order: m as u8, c }
    }

    pub fn add_assign(&mut self, o: &Self) {
        let m = self.common(o.order(), o.nvars());
        self.c.truncate(self.layout().len(m));
        self.order = m as u8;
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a += *b;
        }
    }

    #[inline]
    fn map_in_place(&self, f: impl Fn(T) -> T) -> Self {
        let mut r = self.clone();
        for v in r.c.iter_mut() {
            *v = f(*v);
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.map_in_place(|v| -v)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_in_place(|v| v.scale(s))
    }

    pub fn scale_by(&self, s: T) -> Self {
        self.map_in_place(|v| v * s)
    }

    pub fn add_scalar(&self, s: T) -> Self {
        let mut r = self.clone();
        r.c[0] += s;
        r
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, o: &Self) -> Self {
        let m = self.common(o.order(), o.nvars());
        let l = self.layout();
        let len = l.len(m);
        let (a, b): (&[T], &[_]) = (&self.c[..], &o.c[..]);
        let c = build(len, |out| {
            let mut s = T::zero();
            for &(i, j) in l.pairs_of(out) {
                s += a[i as usize] * b[j as usize];
            }
            s
        });
        Series { nvars: self.nvars, order: m as u8, c }
    }

    /// Product with a real series.
    pub fn mul_real(&self, o: &RealSeries) -> Self {
        let m = self.common(o.order(), o.nvars());
        let l = self.layout();
        let len = l.len(m);
        let (a, b): (&[T], &[_]) = (&self.c[..], &o.c[..]);
        let c = build(len, |out| {
            let mut s = T::zero();
            for &(i, j) in l.pairs_of(out) {
                s += a[i as usize].scale(b[j as usize]);
            }
            s
        });
        Series { nvars: self.nvars, order: m as u8, c }
    }

    /// Recursive Cauchy quotient `self / o`.
    pub fn div(&self, o: &Self) -> Result<Self> {
        let b0 = o.c[0];
        if b0.modulus() == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let m = self.common(o.order(), o.nvars());
        let l = self.layout();
        let len = l.len(m);
        let inv = T::one() / b0;
        let mut c: Coeffs<T> = smallvec![T::zero(); len];
        let (a, b): (&[T], &[T]) = (&self.c[..], &o.c[..]);
        let cs: &mut [T] = &mut c[..];
        for out in 0..len {
            let mut s = a[out];
            for &(i, j) in &l.pairs_of(out)[1..] {
                s -= b[i as usize] * cs[j as usize];
            }
            cs[out] = s * inv;
        }
        Ok(Series { nvars: self.nvars, order: m as u8, c })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::constant(self.nvars(), self.order(), T::one()).div(self)
    }

    /// `∂/∂(slot)`; the result has order one less.
    pub fn deriv(&self, slot: usize) -> Self {
        debug_assert!(self.order >= 1, "cannot differentiate an order-0 series");
        let l = self.layout();
        let m = self.order().saturating_sub(1);
        let len = l.len(m);
        let up = l.up(slot);
        let src: &[T] = &self.c[..];
        let c = build(len, |i| {
            let j = up[i];
            debug_assert!(j != NONE);
            src[j as usize].scale(f64::from(l.exponents(i)[slot]) + 1.0)
        });
        Series { nvars: self.nvars, order: m as u8, c }
    }

    /// `Σ_k outer[k] (self - self(0))^k` for univariate Taylor coefficients `outer`.
    pub fn compose(&self, outer: &[T]) -> Self {
        compose_generic(&self.shifted(), self.nvars(), self.order(), outer)
    }

    fn shifted(&self) -> Self {
        let mut v = self.clone();
        v.c[0] = T::zero();
        v
    }

    /// Extract the series over a subset of slots (other displacements set to zero).
    pub fn project(&self, keep: &[usize]) -> Self {
        let l = self.layout();
        let lt = layout(keep.len());
        let mut r = Self::zeros(keep.len(), self.order());
        for (to, slot) in r.c.iter_mut().enumerate() {
            let et = lt.exponents(to);
            let mut e = [0u8; MAX_VARS];
            for (k, &s) in keep.iter().enumerate() {
                e[s] = et[k];
            }
            *slot = self.c[l.index_of(&e).expect("projection within layout")];
        }
        r
    }

    /// Place this series into a larger variable set; `slots[k]` is the target slot of variable `k`.
    pub fn embed(&self, nvars: usize, slots: &[usize]) -> Self {
        debug_assert_eq!(slots.len(), self.nvars());
        if slots.len() == nvars && slots.iter().enumerate().all(|(k, &s)| k == s) {
            return self.clone();
        }
        let l = self.layout();
        let lt = layout(nvars);
        let mut r = Self::zeros(nvars, self.order());
        for (i, &v) in self.c.iter().enumerate() {
            let e = l.exponents(i);
            let mut f = [0u8; MAX_VARS];
            for (k, &s) in slots.iter().enumerate() {
                f[s] = e[k];
            }
            r.c[lt.index_of(&f).expect("embedding within layout")] = v;
        }
        r
    }
}

impl RealSeries {
    pub fn to_complex(&self) -> ComplexSeries {
        Series { nvars: self.nvars, order: self.order, c: build(self.c.len(), |i| Complex64::new(self.c[i], 0.0)) }
    }

    /// Compose with an outer function whose coefficients are complex, e.g. `exp(i·)`.
    pub fn compose_complex(&self, outer: &[Complex64]) -> ComplexSeries {
        let v = self.shifted();
        let n = self.nvars();
        let k = outer.len().min(self.order() + 1);
        let mut r = ComplexSeries::constant(n, self.order(), outer[k - 1]);
        for j in (0..k - 1).rev() {
            r = r.mul_real(&v);
            r.c[0] += outer[j];
        }
        r
    }
}

impl ComplexSeries {
    pub fn re(&self) -> RealSeries {
        Series { nvars: self.nvars, order: self.order, c: self.c.iter().map(|v| v.re).collect() }
    }

    pub fn im(&self) -> RealSeries {
        Series { nvars: self.nvars, order: self.order, c: self.c.iter().map(|v| v.im).collect() }
    }

    /// `i · self`.
    pub fn times_i(&self) -> Self {
        Series { nvars: self.nvars, order: self.order, c: self.c.iter().map(|v| Complex64::new(-v.im, v.re)).collect() }
    }
}

fn compose_generic<T: Scalar>(v: &Series<T>, n: usize, order: usize, outer: &[T]) -> Series<T> {
    let mut k = outer.len().min(order + 1);
    // trailing zero coefficients contribute nothing
    while k > 1 && outer[k - 1] == T::zero() {
        k -= 1;
    }
    if k == 0 {
        return Series::zeros(n, order);
    }
    let mut r = Series::constant(n, order, outer[k - 1]);
    for j in (0..k - 1).rev() {
        r = r.mul(v);
        r.c[0] += outer[j];
    }
    r
}
