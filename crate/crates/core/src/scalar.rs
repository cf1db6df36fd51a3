//! Scalar abstraction: the crate is generic over the real floating-point
//! type, with complex arithmetic built on top of it.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar underlying all complex arithmetic (f32 or f64).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Converts an f64 literal into the scalar type.
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a real type.
pub type Cx<T> = Complex<T>;

pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::real(re), T::real(im))
}
