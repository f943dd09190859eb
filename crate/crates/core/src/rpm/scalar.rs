//! Arithmetic shared by the plain and first-order-dual evaluation paths.

use rug::{Complex, Float};

use crate::mp::norm_sqr;

pub(crate) trait Scalar: Clone {
    fn zero(bits: u32) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn sub_real(&self, r: &Float) -> Self;
    fn mul_real(&self, r: &Float) -> Self;
    fn div_u32(&self, n: u32) -> Self;
    fn neg(&self) -> Self;
    /// Squared modulus of the value part, for pivoting and scaling.
    fn magnitude_sqr(&self) -> Float;
}

impl Scalar for Complex {
    fn zero(bits: u32) -> Self {
        Complex::new(bits)
    }

    fn add(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self + other)
    }

    fn sub(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self - other)
    }

    fn mul(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self * other)
    }

    fn div(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self / other)
    }

    fn sub_real(&self, r: &Float) -> Self {
        Complex::with_val(self.prec(), self - r)
    }

    fn mul_real(&self, r: &Float) -> Self {
        Complex::with_val(self.prec(), self * r)
    }

    fn div_u32(&self, n: u32) -> Self {
        Complex::with_val(self.prec(), self / n)
    }

    fn neg(&self) -> Self {
        Complex::with_val(self.prec(), -self)
    }

    fn magnitude_sqr(&self) -> Float {
        norm_sqr(self)
    }
}

/// A value together with its derivative with respect to the energy.
#[derive(Clone, Debug)]
pub struct Dual {
    pub value: Complex,
    pub deriv: Complex,
}

impl Dual {
    pub fn new(value: Complex, deriv: Complex) -> Self {
        Self { value, deriv }
    }
}

impl Scalar for Dual {
    fn zero(bits: u32) -> Self {
        Self::new(Complex::new(bits), Complex::new(bits))
    }

    fn add(&self, other: &Self) -> Self {
        Self::new(self.value.add(&other.value), self.deriv.add(&other.deriv))
    }

    fn sub(&self, other: &Self) -> Self {
        Self::new(self.value.sub(&other.value), self.deriv.sub(&other.deriv))
    }

    fn mul(&self, other: &Self) -> Self {
        let value = self.value.mul(&other.value);
        let deriv = self.value.mul(&other.deriv).add(&self.deriv.mul(&other.value));
        Self::new(value, deriv)
    }

    fn div(&self, other: &Self) -> Self {
        // (a + a' d) / (b + b' d) = a/b + (a' - (a/b) b') / b d
        let value = self.value.div(&other.value);
        let deriv = self.deriv.sub(&value.mul(&other.deriv)).div(&other.value);
        Self::new(value, deriv)
    }

    fn sub_real(&self, r: &Float) -> Self {
        Self::new(self.value.sub_real(r), self.deriv.clone())
    }

    fn mul_real(&self, r: &Float) -> Self {
        Self::new(self.value.mul_real(r), self.deriv.mul_real(r))
    }

    fn div_u32(&self, n: u32) -> Self {
        Self::new(self.value.div_u32(n), self.deriv.div_u32(n))
    }

    fn neg(&self) -> Self {
        Self::new(self.value.neg(), self.deriv.neg())
    }

    fn magnitude_sqr(&self) -> Float {
        norm_sqr(&self.value)
    }
}
