//! Scalar abstraction shared by the closed-form modules.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar accepted by the formula, geometry, belief and
/// leader layers.
pub trait Real:
    Float + FloatConst + NumAssign + FromPrimitive + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
