//! Coefficient rings for Grassmann elements.

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// A commutative coefficient ring that scalars of the Grassmann algebra are drawn from.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_c64(c: Complex64) -> Self;
    fn scale(&self, c: Complex64) -> Self;
    /// `exp(self)` when it stays inside the ring.
    fn exp_coeff(&self) -> Option<Self>;
    /// Largest absolute value of the numeric parts, used for residue checks.
    fn magnitude(&self) -> f64;
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_c64(c: Complex64) -> Self {
        c
    }
    fn scale(&self, c: Complex64) -> Self {
        self * c
    }
    fn exp_coeff(&self) -> Option<Self> {
        Some(self.exp())
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}
