//! Benchmark-only crate; see `benches/kernels.rs`.
//!
//! Shared fixture builders live here so the bench target stays small.

use num_bigint::BigInt;

use algact_core::{Group, GroupDescriptor, GroupElement, RingElement};

pub fn z_desc() -> GroupDescriptor {
    GroupDescriptor::FreeAbelian(1)
}

pub fn heis_desc() -> GroupDescriptor {
    GroupDescriptor::Heisenberg3
}

/// 3 - x - x^{-1} over Z, integer domain.
pub fn laplacian_z_int() -> RingElement<BigInt> {
    RingElement::from_terms(
        Group::Ambient(z_desc()),
        [
            (GroupElement::new(vec![0]), BigInt::from(3)),
            (GroupElement::new(vec![1]), BigInt::from(-1)),
            (GroupElement::new(vec![-1]), BigInt::from(-1)),
        ],
    )
    .unwrap()
}

/// 5 - a - a^{-1} - b - b^{-1} over the Heisenberg group, f64 domain.
pub fn laplacian_heis_f64() -> RingElement<f64> {
    RingElement::from_terms(
        Group::Ambient(heis_desc()),
        [
            (GroupElement::new(vec![0, 0, 0]), 5.0),
            (GroupElement::new(vec![1, 0, 0]), -1.0),
            (GroupElement::new(vec![-1, 0, 0]), -1.0),
            (GroupElement::new(vec![0, 1, 0]), -1.0),
            (GroupElement::new(vec![0, -1, 0]), -1.0),
        ],
    )
    .unwrap()
}
