//! Scalar abstraction: `f32` or `f64`.

use crate::rng::SimRng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Real floating-point scalar the whole crate is generic over.
///
/// Bundles the `num-traits` float surface with the sampling hooks the
/// stochastic operations need, plus precision-dependent validation
/// tolerances (a unitary assembled in `f32` cannot be expected to check
/// out at `f64` accuracy).
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + std::iter::Sum<Self>
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// One standard normal draw.
    fn sample_standard_normal(rng: &mut SimRng) -> Self;

    /// One uniform draw from `[0, 1)`.
    fn sample_uniform(rng: &mut SimRng) -> Self;

    /// Largest acceptable `max|U U† − I|` for a gate action matrix.
    fn gate_unitary_tol() -> Self;

    /// Largest acceptable `max|M M† − I|` for a full-space operator.
    fn op_unitary_tol() -> Self;

    fn of_f64(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar convertible to f64")
    }
}

impl Real for f64 {
    fn sample_standard_normal(rng: &mut SimRng) -> Self {
        rng.sample(StandardNormal)
    }
    fn sample_uniform(rng: &mut SimRng) -> Self {
        rng.random()
    }
    fn gate_unitary_tol() -> Self {
        1e-12
    }
    fn op_unitary_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn sample_standard_normal(rng: &mut SimRng) -> Self {
        rng.sample(StandardNormal)
    }
    fn sample_uniform(rng: &mut SimRng) -> Self {
        rng.random()
    }
    fn gate_unitary_tol() -> Self {
        1e-5
    }
    fn op_unitary_tol() -> Self {
        1e-4
    }
}
