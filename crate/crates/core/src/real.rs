use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar for the weight/constants layer: f32 or f64.
pub trait Real: Float + FloatConst + FromPrimitive + core::fmt::Debug + 'static {
    fn from_f64c(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant")
    }
}

impl Real for f32 {}
impl Real for f64 {}
