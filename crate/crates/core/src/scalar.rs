//! Numeric bounds shared by the statistics kernels.
//!
//! Order statistics and occupancy averages only need field arithmetic, so they
//! are written against [`Scalar`] and work for `f32`, `f64` and exact rationals
//! such as `num_rational::Ratio<i64>`. Log-odds scoring needs `ln` and `sqrt`
//! and is written against [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}

pub trait Real: Scalar + Float {}

impl<T> Real for T where T: Scalar + Float {}
