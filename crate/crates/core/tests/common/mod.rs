#![allow(dead_code)] // shared between test targets with different usage

//! Shared builders for the integration suites.

use num_bigint::BigInt;

use algact_core::{Group, GroupDescriptor, GroupElement, RingElement};

pub fn z_desc() -> GroupDescriptor {
    GroupDescriptor::FreeAbelian(1)
}

pub fn z2_desc() -> GroupDescriptor {
    GroupDescriptor::FreeAbelian(2)
}

pub fn h3_desc() -> GroupDescriptor {
    GroupDescriptor::Heisenberg3
}

pub fn el(coords: &[i64]) -> GroupElement {
    GroupElement::new(coords.to_vec())
}

pub fn z_int(pairs: &[(i64, i64)]) -> RingElement<BigInt> {
    RingElement::from_terms(
        Group::Ambient(z_desc()),
        pairs.iter().map(|&(k, c)| (el(&[k]), BigInt::from(c))),
    )
    .unwrap()
}

pub fn z2_int(pairs: &[([i64; 2], i64)]) -> RingElement<BigInt> {
    RingElement::from_terms(
        Group::Ambient(z2_desc()),
        pairs.iter().map(|&(k, c)| (el(&k), BigInt::from(c))),
    )
    .unwrap()
}

pub fn h3_int(pairs: &[([i64; 3], i64)]) -> RingElement<BigInt> {
    RingElement::from_terms(
        Group::Ambient(h3_desc()),
        pairs.iter().map(|&(k, c)| (el(&k), BigInt::from(c))),
    )
    .unwrap()
}

/// 2 - x over Z.
pub fn two_minus_x() -> RingElement<BigInt> {
    z_int(&[(0, 2), (1, -1)])
}

/// 3 - x - x^{-1} over Z.
pub fn laplacian_z() -> RingElement<BigInt> {
    z_int(&[(0, 3), (1, -1), (-1, -1)])
}

/// 5 - x - x^{-1} - y - y^{-1} over Z^2.
pub fn laplacian_z2() -> RingElement<BigInt> {
    z2_int(&[
        ([0, 0], 5),
        ([1, 0], -1),
        ([-1, 0], -1),
        ([0, 1], -1),
        ([0, -1], -1),
    ])
}

/// 5 - a - a^{-1} - b - b^{-1} over the Heisenberg group.
pub fn laplacian_heis() -> RingElement<BigInt> {
    h3_int(&[
        ([0, 0, 0], 5),
        ([1, 0, 0], -1),
        ([-1, 0, 0], -1),
        ([0, 1, 0], -1),
        ([0, -1, 0], -1),
    ])
}

/// ln((3 + sqrt 5) / 2): the entropy of 3 - x - x^{-1}.
pub fn golden_entropy() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}
