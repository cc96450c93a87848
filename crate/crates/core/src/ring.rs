//! Finitely supported group-ring arithmetic: convolution, involution, norms
//! and the von Neumann trace (the coefficient at the identity).
//!
//! Coefficients come in three domains: exact integers for integral group-ring inputs and
//! fixed-point counting, rationals for exact property checks, and f64 for
//! approximate inverses. Promotion Integer -> Rational -> Float64 is always
//! explicit. Support maps are ordered by the lexicographic tuple order, so
//! float reductions are reproducible.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};

/// Coefficient domains admitted by [`RingElement`].
pub trait Coeff:
    Signed
    + ToPrimitive
    + Clone
    + PartialOrd
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Coeff for T where
    T: Signed
        + ToPrimitive
        + Clone
        + PartialOrd
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// A finitely supported map Gamma -> S with exact support (no stored zeros).
#[derive(Clone, Debug, PartialEq)]
pub struct RingElement<S> {
    group: Group,
    terms: BTreeMap<GroupElement, S>,
}

impl<S: Coeff> RingElement<S> {
    pub fn zero(group: Group) -> Self {
        RingElement {
            group,
            terms: BTreeMap::new(),
        }
    }

    /// The indicator element e(gamma).
    pub fn basis(group: Group, gamma: GroupElement) -> Result<Self> {
        group.validate_element(&gamma)?;
        let mut terms = BTreeMap::new();
        terms.insert(gamma, S::one());
        Ok(RingElement { group, terms })
    }

    /// c * e(identity).
    pub fn scalar(group: Group, c: S) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(group.identity(), c);
        }
        RingElement { group, terms }
    }

    /// Builds an element from (gamma, coefficient) pairs, accumulating
    /// duplicates and stripping zeros.
    pub fn from_terms<I>(group: Group, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, S)>,
    {
        let mut terms: BTreeMap<GroupElement, S> = BTreeMap::new();
        for (g, c) in pairs {
            group.validate_element(&g)?;
            let entry = terms.entry(g).or_insert_with(S::zero);
            *entry = entry.clone() + c;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(RingElement { group, terms })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn terms(&self) -> &BTreeMap<GroupElement, S> {
        &self.terms
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient at gamma, zero when absent.
    pub fn coeff(&self, gamma: &GroupElement) -> S {
        self.terms.get(gamma).cloned().unwrap_or_else(S::zero)
    }

    fn check_same_group(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::DescriptorMismatch(
                "ring elements live over different groups".into(),
            ));
        }
        Ok(())
    }

    /// Convolution product (h * h')_gamma = sum_{g'} h_{g'} h'_{g'^{-1} gamma},
    /// realized as the direct double loop over both supports.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_same_group(other)?;
        let mut terms: BTreeMap<GroupElement, S> = BTreeMap::new();
        for (ga, ca) in &self.terms {
            for (gb, cb) in &other.terms {
                let key = self.group.multiply(ga, gb)?;
                let prod = ca.clone() * cb.clone();
                let entry = terms.entry(key).or_insert_with(S::zero);
                *entry = entry.clone() + prod;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(RingElement {
            group: self.group.clone(),
            terms,
        })
    }

    /// The involution h* with h*_gamma = h_{gamma^{-1}}.
    pub fn involute(&self) -> Self {
        let mut terms = BTreeMap::new();
        for (g, c) in &self.terms {
            let key = self
                .group
                .inverse(g)
                .expect("stored support elements are valid");
            terms.insert(key, c.clone());
        }
        RingElement {
            group: self.group.clone(),
            terms,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_group(other)?;
        let mut terms = self.terms.clone();
        for (g, c) in &other.terms {
            let entry = terms.entry(g.clone()).or_insert_with(S::zero);
            *entry = entry.clone() + c.clone();
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(RingElement {
            group: self.group.clone(),
            terms,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(g, c)| (g.clone(), -c.clone()))
            .collect();
        RingElement {
            group: self.group.clone(),
            terms,
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.group.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|(g, x)| (g.clone(), x.clone() * c.clone()))
            .collect();
        RingElement {
            group: self.group.clone(),
            terms,
        }
    }

    /// l1 norm: the sum of absolute coefficient values.
    pub fn norm_l1(&self) -> S {
        let mut acc = S::zero();
        for c in self.terms.values() {
            acc = acc + c.abs();
        }
        acc
    }

    /// sup norm: the largest absolute coefficient value.
    pub fn norm_linf(&self) -> S {
        let mut best = S::zero();
        for c in self.terms.values() {
            let a = c.abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    pub fn norm_l1_f64(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }

    /// The von Neumann trace on L^1(Gamma): the coefficient at the identity.
    pub fn trace(&self) -> S {
        self.coeff(&self.group.identity())
    }

    /// k-th convolution power; pow(0) is the unit e(1).
    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::basis(self.group.clone(), self.group.identity())?;
        for _ in 0..k {
            acc = acc.convolve(self)?;
        }
        Ok(acc)
    }

    pub fn map_coeffs<T: Coeff>(&self, f: impl Fn(&S) -> T) -> RingElement<T> {
        let mut terms = BTreeMap::new();
        for (g, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                terms.insert(g.clone(), v);
            }
        }
        RingElement {
            group: self.group.clone(),
            terms,
        }
    }
}

impl RingElement<BigInt> {
    /// Explicit promotion Integer -> Rational.
    pub fn to_rational(&self) -> RingElement<BigRational> {
        self.map_coeffs(|c| BigRational::from_integer(c.clone()))
    }

    /// Explicit promotion Integer -> Float64.
    pub fn to_f64(&self) -> RingElement<f64> {
        self.map_coeffs(|c| c.to_f64().expect("integer coefficient fits in f64"))
    }
}

impl RingElement<BigRational> {
    /// Explicit promotion Rational -> Float64.
    pub fn to_f64(&self) -> RingElement<f64> {
        self.map_coeffs(|c| c.to_f64().expect("rational coefficient fits in f64"))
    }
}

/// Evaluates an integer polynomial q_0 + q_1 t + ... + q_d t^d at a ring
/// element by Horner's scheme.
pub fn eval_int_poly(coeffs: &[BigInt], f: &RingElement<BigInt>) -> Result<RingElement<BigInt>> {
    let unit = RingElement::basis(f.group().clone(), f.group().identity())?;
    let mut acc = RingElement::zero(f.group().clone());
    for q in coeffs.iter().rev() {
        acc = acc.convolve(f)?;
        acc = acc.add(&unit.scale(q))?;
    }
    Ok(acc)
}
