//! Enumerated finite quotients Gamma/Gamma_n and chains of them.
//!
//! Quotients are congruence quotients: every coordinate of the canonical
//! form is reduced modulo a per-coordinate modulus. For Z^d the moduli may
//! differ per axis; for the Heisenberg group a single modulus m is applied
//! to all three coordinates (the cocycle x*y' reduces well mod m, so the
//! reduction is a group homomorphism and the quotient has order m^3).

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupElement};

/// Default cap on the number of enumerated quotient elements.
pub const QUOTIENT_ELEMENT_CAP: u64 = 4_000_000;

/// An enumerated finite quotient with its index map and projection.
#[derive(Debug)]
pub struct FiniteQuotient {
    parent: GroupDescriptor,
    coord_moduli: Vec<u64>,
    strides: Vec<u64>,
    order: u64,
    elements: Vec<GroupElement>,
}

impl PartialEq for FiniteQuotient {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent && self.coord_moduli == other.coord_moduli
    }
}

impl FiniteQuotient {
    fn build(parent: GroupDescriptor, coord_moduli: Vec<u64>, cap: u64) -> Result<Arc<Self>> {
        parent.validate_descriptor()?;
        if coord_moduli.len() != parent.rank() {
            return Err(Error::Parameter(format!(
                "need {} coordinate moduli, got {}",
                parent.rank(),
                coord_moduli.len()
            )));
        }
        if coord_moduli.contains(&0) {
            return Err(Error::Parameter("moduli must be >= 1".into()));
        }
        if matches!(parent, GroupDescriptor::FiniteCyclicProduct(_)) {
            return Err(Error::Parameter(
                "finite cyclic products are already finite; no quotient chain is defined".into(),
            ));
        }
        let mut order: u64 = 1;
        for &m in &coord_moduli {
            order = order
                .checked_mul(m)
                .ok_or_else(|| Error::Parameter("quotient order overflows u64".into()))?;
            if order > cap {
                return Err(Error::Capacity {
                    what: "quotient enumeration",
                    requested: order,
                    cap,
                });
            }
        }
        let rank = coord_moduli.len();
        let mut strides = vec![1u64; rank];
        for i in (0..rank.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * coord_moduli[i + 1];
        }
        // Lexicographic enumeration: the last coordinate varies fastest.
        let mut elements = Vec::with_capacity(order as usize);
        let mut cur = vec![0i64; rank];
        loop {
            elements.push(GroupElement::new(cur.clone()));
            let mut i = rank;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                cur[i] += 1;
                if (cur[i] as u64) < coord_moduli[i] {
                    break;
                }
                cur[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
        debug_assert_eq!(elements.len() as u64, order);
        Ok(Arc::new(FiniteQuotient {
            parent,
            coord_moduli,
            strides,
            order,
            elements,
        }))
    }

    /// Congruence quotient with a single modulus applied to every coordinate:
    /// (Z/m)^d for Z^d, the Heisenberg group over Z/m for Heisenberg3,
    /// blockwise for direct products.
    pub fn congruence(parent: &GroupDescriptor, modulus: u64, cap: u64) -> Result<Arc<Self>> {
        Self::build(parent.clone(), vec![modulus; parent.rank()], cap)
    }

    /// Per-axis moduli; only meaningful for free abelian groups.
    pub fn with_moduli(parent: &GroupDescriptor, moduli: &[u64], cap: u64) -> Result<Arc<Self>> {
        match parent {
            GroupDescriptor::FreeAbelian(_) => Self::build(parent.clone(), moduli.to_vec(), cap),
            _ => Err(Error::Parameter(
                "per-axis moduli are only supported for free abelian groups".into(),
            )),
        }
    }

    pub fn parent(&self) -> &GroupDescriptor {
        &self.parent
    }

    pub fn coord_moduli(&self) -> &[u64] {
        &self.coord_moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, idx: usize) -> &GroupElement {
        &self.elements[idx]
    }

    pub fn identity(&self) -> GroupElement {
        self.parent.identity()
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    /// Componentwise residue of an ambient element; a group homomorphism.
    pub fn project(&self, g: &GroupElement) -> Result<GroupElement> {
        self.parent.validate_element(g)?;
        let coords = g
            .coords()
            .iter()
            .zip(&self.coord_moduli)
            .map(|(c, &m)| c.rem_euclid(m as i64))
            .collect();
        Ok(GroupElement::new(coords))
    }

    /// Position of a canonical residue tuple in the element enumeration.
    pub fn index_of(&self, residue: &GroupElement) -> usize {
        let mut idx = 0u64;
        for ((c, &m), &s) in residue
            .coords()
            .iter()
            .zip(&self.coord_moduli)
            .zip(&self.strides)
        {
            debug_assert!(*c >= 0 && (*c as u64) < m);
            idx += *c as u64 * s;
        }
        idx as usize
    }

    pub fn project_index(&self, g: &GroupElement) -> Result<usize> {
        Ok(self.index_of(&self.project(g)?))
    }

    pub fn validate_residue(&self, g: &GroupElement) -> Result<()> {
        if g.coords().len() != self.coord_moduli.len() {
            return Err(Error::DescriptorMismatch(
                "residue tuple has wrong arity".into(),
            ));
        }
        for (c, &m) in g.coords().iter().zip(&self.coord_moduli) {
            if *c < 0 || *c as u64 >= m {
                return Err(Error::DescriptorMismatch(format!(
                    "residue {c} out of range for modulus {m}"
                )));
            }
        }
        Ok(())
    }

    /// Group law of the quotient: multiply canonical residues in the parent
    /// and reduce.
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let p = self.parent.multiply(a, b)?;
        self.project(&p)
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        let p = self.parent.inverse(a)?;
        self.project(&p)
    }

    pub fn multiply_idx(&self, i: usize, j: usize) -> usize {
        let p = self
            .multiply(&self.elements[i], &self.elements[j])
            .expect("enumerated residues are valid");
        self.index_of(&p)
    }

    pub fn inverse_idx(&self, i: usize) -> usize {
        let p = self
            .inverse(&self.elements[i])
            .expect("enumerated residues are valid");
        self.index_of(&p)
    }

    /// Whether an ambient element lies in the kernel Gamma_n of the
    /// projection, i.e. every coordinate is divisible by its modulus.
    pub fn in_kernel(&self, g: &GroupElement) -> bool {
        g.coords()
            .iter()
            .zip(&self.coord_moduli)
            .all(|(c, &m)| c.rem_euclid(m as i64) == 0)
    }
}

/// An ordered chain of congruence quotients with strictly increasing order
/// and divisible moduli, so the kernels are nested decreasing subgroups.
#[derive(Debug, Clone)]
pub struct QuotientChain {
    levels: Vec<Arc<FiniteQuotient>>,
}

impl QuotientChain {
    pub fn new(levels: Vec<Arc<FiniteQuotient>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Parameter(
                "chain must have at least one level".into(),
            ));
        }
        for w in levels.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.parent() != b.parent() {
                return Err(Error::DescriptorMismatch(
                    "chain levels quotient different parents".into(),
                ));
            }
            if b.order() <= a.order() {
                return Err(Error::Parameter(
                    "chain orders must be strictly increasing".into(),
                ));
            }
            for (ma, mb) in a.coord_moduli().iter().zip(b.coord_moduli()) {
                if mb % ma != 0 {
                    return Err(Error::Parameter(format!(
                        "chain moduli must divide levelwise ({ma} does not divide {mb})"
                    )));
                }
            }
        }
        Ok(QuotientChain { levels })
    }

    /// Congruence chain with one uniform modulus per level.
    pub fn congruence(parent: &GroupDescriptor, moduli: &[u64], cap: u64) -> Result<Self> {
        let levels = moduli
            .iter()
            .map(|&m| FiniteQuotient::congruence(parent, m, cap))
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    pub fn levels(&self) -> &[Arc<FiniteQuotient>] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn parent(&self) -> &GroupDescriptor {
        self.levels[0].parent()
    }
}

/// Least level n with Gamma_n intersecting K^{-1}K only in the identity.
/// By the divisibility of chain moduli all later levels separate as well.
pub fn verify_chain_separation(
    chain: &QuotientChain,
    window: &BTreeSet<GroupElement>,
) -> Result<usize> {
    let parent = chain.parent().clone();
    let mut products = BTreeSet::new();
    for k1 in window {
        let k1_inv = parent.inverse(k1)?;
        for k2 in window {
            products.insert(parent.multiply(&k1_inv, k2)?);
        }
    }
    products.remove(&parent.identity());
    'level: for (n, q) in chain.levels().iter().enumerate() {
        for g in &products {
            if q.in_kernel(g) {
                continue 'level;
            }
        }
        return Ok(n);
    }
    Err(Error::ChainTooShort)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::word_ball;

    fn el(coords: &[i64]) -> GroupElement {
        GroupElement::new(coords.to_vec())
    }

    #[test]
    fn z_mod_4_projection() {
        let q = FiniteQuotient::congruence(&GroupDescriptor::FreeAbelian(1), 4, 1000).unwrap();
        assert_eq!(q.project(&el(&[7])).unwrap(), el(&[3]));
        assert_eq!(q.project(&el(&[0])).unwrap(), el(&[0]));
        assert_eq!(q.order(), 4);
    }

    #[test]
    fn heisenberg_mod_2_is_homomorphism() {
        let q = FiniteQuotient::congruence(&GroupDescriptor::Heisenberg3, 2, 1000).unwrap();
        assert_eq!(q.order(), 8);
        let g = el(&[1, 1, 1]);
        let prod = GroupDescriptor::Heisenberg3.multiply(&g, &g).unwrap();
        let lhs = q.project(&prod).unwrap();
        let rhs = q
            .multiply(&q.project(&g).unwrap(), &q.project(&g).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn enumeration_is_lexicographic_and_indexed() {
        let q =
            FiniteQuotient::with_moduli(&GroupDescriptor::FreeAbelian(2), &[2, 3], 1000).unwrap();
        assert_eq!(q.order(), 6);
        let els = q.elements();
        assert_eq!(els[0], el(&[0, 0]));
        assert_eq!(els[1], el(&[0, 1]));
        assert_eq!(els[3], el(&[1, 0]));
        for (i, e) in els.iter().enumerate() {
            assert_eq!(q.index_of(e), i);
        }
    }

    #[test]
    fn chain_separation_on_z() {
        let chain =
            QuotientChain::congruence(&GroupDescriptor::FreeAbelian(1), &[2, 4, 8], 1000).unwrap();
        let window: BTreeSet<_> = [-1i64, 0, 1].iter().map(|&k| el(&[k])).collect();
        // 4Z meets {-2..2} only in 0, while 2Z contains 2.
        assert_eq!(verify_chain_separation(&chain, &window).unwrap(), 1);
        let only_identity: BTreeSet<_> = [el(&[0])].into_iter().collect();
        assert_eq!(verify_chain_separation(&chain, &only_identity).unwrap(), 0);
    }

    #[test]
    fn chain_separation_on_heisenberg_ball() {
        let g = GroupDescriptor::Heisenberg3;
        let chain = QuotientChain::congruence(&g, &[2, 4], 100_000).unwrap();
        let ball = word_ball(&g, &g.standard_generators(), 1, 1000).unwrap();
        // K^{-1}K contains (2,0,0), which lies in the mod-2 kernel.
        assert_eq!(verify_chain_separation(&chain, &ball).unwrap(), 1);
    }

    #[test]
    fn chain_too_short() {
        let chain =
            QuotientChain::congruence(&GroupDescriptor::FreeAbelian(1), &[2], 1000).unwrap();
        let window: BTreeSet<_> = [el(&[0]), el(&[2])].into_iter().collect();
        assert!(matches!(
            verify_chain_separation(&chain, &window),
            Err(Error::ChainTooShort)
        ));
    }

    #[test]
    fn chain_requires_divisible_moduli() {
        let err =
            QuotientChain::congruence(&GroupDescriptor::FreeAbelian(1), &[2, 3], 1000).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn quotient_order_closed_form() {
        let q = FiniteQuotient::congruence(&GroupDescriptor::Heisenberg3, 3, 1000).unwrap();
        assert_eq!(q.order(), 27);
        assert_eq!(q.elements().len(), 27);
        let q2 = FiniteQuotient::with_moduli(&GroupDescriptor::FreeAbelian(3), &[2, 5, 7], 1000)
            .unwrap();
        assert_eq!(q2.order(), 70);
    }
}
