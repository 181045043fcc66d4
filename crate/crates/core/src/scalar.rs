use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Exact integer type usable by the linear algebra layer.
///
/// Implemented for every signed integer that supports the `num` traits,
/// in practice `i64`, `i128` and `BigInt`.
pub trait Scalar:
    Integer + Signed + Clone + Debug + Display + FromPrimitive + ToPrimitive + std::hash::Hash + Send + Sync
{
    fn from_i64_exact(v: i64) -> Self {
        Self::from_i64(v).expect("integer literal out of range for scalar")
    }
}

impl<T> Scalar for T where
    T: Integer + Signed + Clone + Debug + Display + FromPrimitive + ToPrimitive + std::hash::Hash + Send + Sync
{
}

/// Floor division remainder that is always in `[0, |m|)`.
pub fn mod_floor<T: Scalar>(a: &T, m: &T) -> T {
    a.mod_floor(m)
}
