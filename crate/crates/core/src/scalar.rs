//! Scalar domains: exact rationals and `f64`, plus complex numbers over either.
//!
//! Exact arithmetic never consults a tolerance. Float comparisons always go
//! through an explicit tolerance, [`DEFAULT_TOL`] unless overridden.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;
pub type Complex<T> = num_complex::Complex<T>;

/// Default float tolerance for ranks and definiteness.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Field element usable as a matrix entry.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// True for the exact (rational) domain.
    const EXACT: bool;

    /// Exact domain: `is_zero`. Float domain: magnitude below `tol`.
    fn negligible(&self, tol: f64) -> bool;

    /// Absolute value as a float, used for pivot selection.
    fn magnitude(&self) -> f64;

    fn conj(&self) -> Self;

    fn from_i64(v: i64) -> Self;

    /// Real and imaginary parts as exact rationals (exact domain only).
    fn rational_parts(&self) -> Option<(Rational, Rational)>;

    fn to_c64(&self) -> Complex<f64>;

    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }

    fn add_ref(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self.clone() - other.clone()
    }

    /// `self -= a * b`
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self = self.sub_ref(&a.mul_ref(b));
    }
}

/// Ordered real scalar (rational or `f64`).
pub trait Real: Scalar + PartialOrd + Num {
    fn to_f64(&self) -> f64;

    fn from_rational(q: &Rational) -> Self;

    /// Sign with respect to `tol` (exact domain ignores `tol`).
    fn sign(&self, tol: f64) -> i8 {
        if self.negligible(tol) {
            0
        } else if *self > Self::zero() {
            1
        } else {
            -1
        }
    }

    /// Exact square root when one exists in the domain.
    fn try_sqrt(&self) -> Option<Self>;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn rational_parts(&self) -> Option<(Rational, Rational)> {
        Some((self.clone(), Rational::zero()))
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(Real::to_f64(self), 0.0)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self -= a * b;
    }
}

impl Real for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn try_sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &n * &n == *self.numer() && &d * &d == *self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn conj(&self) -> Self {
        *self
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn rational_parts(&self) -> Option<(Rational, Rational)> {
        None
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(*self, 0.0)
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
}

impl Real for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn try_sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
}

impl<T: Real> Scalar for Complex<T> {
    const EXACT: bool = T::EXACT;

    fn negligible(&self, tol: f64) -> bool {
        if T::EXACT {
            self.re.is_zero() && self.im.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }

    fn magnitude(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn from_i64(v: i64) -> Self {
        Complex::new(T::from_i64(v), T::zero())
    }

    fn rational_parts(&self) -> Option<(Rational, Rational)> {
        Some((self.re.rational_parts()?.0, self.im.rational_parts()?.0))
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64(), self.im.to_f64())
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let re = self.re.mul_ref(&other.re).sub_ref(&self.im.mul_ref(&other.im));
        let im = self.re.mul_ref(&other.im).add_ref(&self.im.mul_ref(&other.re));
        Complex::new(re, im)
    }

    fn add_ref(&self, other: &Self) -> Self {
        Complex::new(self.re.add_ref(&other.re), self.im.add_ref(&other.im))
    }

    fn sub_ref(&self, other: &Self) -> Self {
        Complex::new(self.re.sub_ref(&other.re), self.im.sub_ref(&other.im))
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        self.re.sub_mul_assign(&a.re, &b.re);
        self.re = self.re.add_ref(&a.im.mul_ref(&b.im));
        self.im.sub_mul_assign(&a.re, &b.im);
        self.im.sub_mul_assign(&a.im, &b.re);
    }
}

/// Rational `p/q` from machine integers.
pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

/// Rational integer.
pub fn qi(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// The imaginary unit in the given real domain.
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Lift a real scalar into the complex domain.
pub fn real_c<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}
