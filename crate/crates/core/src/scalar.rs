//! Scalar abstractions shared by the numeric modules.
//!
//! Floating-point code is written against [`Real`]; the enumeration oracles
//! only need field arithmetic and are written against [`Exact`], so they run
//! unchanged over `f64` and over [`crate::Rational`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Floating-point scalar used by samplers, partition functions and chains.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl<T> Real for T where T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {}

/// Field arithmetic without rounding requirements (rationals or floats).
pub trait Exact: Num + Clone + PartialOrd + Debug {}

impl<T> Exact for T where T: Num + Clone + PartialOrd + Debug {}

/// A positive number stored as `mantissa * 2^exponent`.
///
/// Path partition functions grow like `rho^len`; this keeps them finite for
/// lengths in the millions regardless of the scalar's exponent range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub mantissa: T,
    pub exponent: i64,
}

const RESCALE_BITS: i32 = 32;

impl<T: Real> Scaled<T> {
    pub fn new(value: T) -> Self {
        let mut s = Self {
            mantissa: value,
            exponent: 0,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let hi = T::lit(2f64.powi(RESCALE_BITS));
        let lo = T::lit(2f64.powi(-RESCALE_BITS));
        if self.mantissa.is_zero() || !self.mantissa.is_finite() {
            return;
        }
        while self.mantissa.abs() >= hi {
            self.mantissa = self.mantissa * lo;
            self.exponent += RESCALE_BITS as i64;
        }
        while self.mantissa.abs() < lo {
            self.mantissa = self.mantissa * hi;
            self.exponent -= RESCALE_BITS as i64;
        }
    }

    pub fn ln(&self) -> T {
        self.mantissa.ln() + T::lit(self.exponent as f64) * T::lit(std::f64::consts::LN_2)
    }

    /// Plain value, or `None` if it does not fit the scalar type.
    pub fn to_real(&self) -> Option<T> {
        let e = i32::try_from(self.exponent).ok()?;
        let v = self.mantissa * T::lit(2.0).powi(e);
        v.is_finite().then_some(v)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut s = Self {
            mantissa: self.mantissa * other.mantissa,
            exponent: self.exponent + other.exponent,
        };
        s.normalize();
        s
    }

    pub fn scale(&self, factor: T) -> Self {
        let mut s = Self {
            mantissa: self.mantissa * factor,
            exponent: self.exponent,
        };
        s.normalize();
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        let (big, small) = if self.exponent >= other.exponent {
            (self, other)
        } else {
            (other, self)
        };
        let shift = big.exponent - small.exponent;
        let aligned = if shift > 2000 {
            T::zero()
        } else {
            small.mantissa * T::lit(2f64.powi(-(shift as i32)))
        };
        let mut s = Self {
            mantissa: big.mantissa + aligned,
            exponent: big.exponent,
        };
        s.normalize();
        s
    }

    /// `self / other` as a plain scalar.
    pub fn ratio(&self, other: &Self) -> T {
        let e = (self.exponent - other.exponent).clamp(-4000, 4000) as i32;
        (self.mantissa / other.mantissa) * T::lit(2.0).powi(e)
    }
}
