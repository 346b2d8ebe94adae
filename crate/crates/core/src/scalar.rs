use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar used for probabilities: f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    fn from_rational(r: &BigRational) -> Self {
        Self::of(r.to_f64().unwrap_or(f64::NAN))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
