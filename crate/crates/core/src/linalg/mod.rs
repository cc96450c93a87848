//! Shared dense numeric kernels: float LU, fraction-free integer
//! elimination, Smith normal form, exact rational solves.

pub mod bareiss;
pub mod lu;
pub mod ratsolve;
pub mod snf;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Natural log of an arbitrary-precision nonnegative integer, accurate to
/// f64 precision even when the value overflows f64.
pub fn log_biguint(n: &BigUint) -> f64 {
    if n.bits() <= 53 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = n.bits() - 53;
    let top = (n >> shift).to_f64().expect("53-bit mantissa fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
