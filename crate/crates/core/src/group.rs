//! Concrete residually finite amenable groups in canonical coordinate form.
//!
//! Every supported group stores its elements as integer tuples with a unique
//! canonical form, so equality is tuple equality and the identity is the zero
//! tuple. The catalog is a contract: amenability and residual finiteness are
//! properties of the listed kinds, not something we verify algorithmically.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quotient::FiniteQuotient;

/// A group element in canonical form: an integer tuple whose layout is fixed
/// by the owning [`GroupDescriptor`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        GroupElement(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Catalog of supported groups. All of them are residually finite and
/// amenable; this is a restriction of the catalog, not a computed fact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupDescriptor {
    /// Z^d with componentwise addition.
    FreeAbelian(usize),
    /// The discrete Heisenberg group in normal form: triples (x, y, z) with
    /// (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y').
    Heisenberg3,
    /// Direct product; coordinates are concatenated factor blocks.
    DirectProduct(Vec<GroupDescriptor>),
    /// Z/m_1 x ... x Z/m_k with canonical residues in [0, m_i).
    FiniteCyclicProduct(Vec<u64>),
}

impl GroupDescriptor {
    pub fn validate_descriptor(&self) -> Result<()> {
        match self {
            GroupDescriptor::FreeAbelian(d) => {
                if *d == 0 {
                    return Err(Error::Parameter("FreeAbelian rank must be >= 1".into()));
                }
            }
            GroupDescriptor::Heisenberg3 => {}
            GroupDescriptor::DirectProduct(fs) => {
                if fs.is_empty() {
                    return Err(Error::Parameter("DirectProduct needs >= 1 factor".into()));
                }
                for f in fs {
                    f.validate_descriptor()?;
                }
            }
            GroupDescriptor::FiniteCyclicProduct(ms) => {
                if ms.is_empty() || ms.contains(&0) {
                    return Err(Error::Parameter(
                        "FiniteCyclicProduct moduli must be >= 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of coordinates in the canonical tuple.
    pub fn rank(&self) -> usize {
        match self {
            GroupDescriptor::FreeAbelian(d) => *d,
            GroupDescriptor::Heisenberg3 => 3,
            GroupDescriptor::DirectProduct(fs) => fs.iter().map(|f| f.rank()).sum(),
            GroupDescriptor::FiniteCyclicProduct(ms) => ms.len(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            GroupDescriptor::FreeAbelian(_) | GroupDescriptor::Heisenberg3 => false,
            GroupDescriptor::DirectProduct(fs) => fs.iter().all(|f| f.is_finite()),
            GroupDescriptor::FiniteCyclicProduct(_) => true,
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    pub fn validate_element(&self, g: &GroupElement) -> Result<()> {
        if g.coords().len() != self.rank() {
            return Err(Error::DescriptorMismatch(format!(
                "element has {} coordinates, group {:?} has rank {}",
                g.coords().len(),
                self,
                self.rank()
            )));
        }
        if let GroupDescriptor::FiniteCyclicProduct(ms) = self {
            for (c, &m) in g.coords().iter().zip(ms) {
                if *c < 0 || *c as u64 >= m {
                    return Err(Error::DescriptorMismatch(format!(
                        "residue {c} out of range for modulus {m}"
                    )));
                }
            }
        }
        if let GroupDescriptor::DirectProduct(fs) = self {
            let mut off = 0;
            for f in fs {
                let r = f.rank();
                f.validate_element(&GroupElement(g.coords()[off..off + r].to_vec()))?;
                off += r;
            }
        }
        Ok(())
    }

    fn mul_into(&self, a: &[i64], b: &[i64], out: &mut Vec<i64>) {
        match self {
            GroupDescriptor::FreeAbelian(_) => {
                for (x, y) in a.iter().zip(b) {
                    out.push(x + y);
                }
            }
            GroupDescriptor::Heisenberg3 => {
                out.push(a[0] + b[0]);
                out.push(a[1] + b[1]);
                out.push(a[2] + b[2] + a[0] * b[1]);
            }
            GroupDescriptor::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    let r = f.rank();
                    f.mul_into(&a[off..off + r], &b[off..off + r], out);
                    off += r;
                }
            }
            GroupDescriptor::FiniteCyclicProduct(ms) => {
                for ((x, y), &m) in a.iter().zip(b).zip(ms) {
                    out.push((x + y).rem_euclid(m as i64));
                }
            }
        }
    }

    fn inv_into(&self, a: &[i64], out: &mut Vec<i64>) {
        match self {
            GroupDescriptor::FreeAbelian(_) => {
                for x in a {
                    out.push(-x);
                }
            }
            GroupDescriptor::Heisenberg3 => {
                // (x,y,z)^{-1} = (-x, -y, -z + x*y)
                out.push(-a[0]);
                out.push(-a[1]);
                out.push(-a[2] + a[0] * a[1]);
            }
            GroupDescriptor::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    let r = f.rank();
                    f.inv_into(&a[off..off + r], out);
                    off += r;
                }
            }
            GroupDescriptor::FiniteCyclicProduct(ms) => {
                for (x, &m) in a.iter().zip(ms) {
                    out.push((-x).rem_euclid(m as i64));
                }
            }
        }
    }

    /// Canonical form of g*h.
    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.validate_element(g)?;
        self.validate_element(h)?;
        let mut out = Vec::with_capacity(self.rank());
        self.mul_into(g.coords(), h.coords(), &mut out);
        Ok(GroupElement(out))
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.validate_element(g)?;
        let mut out = Vec::with_capacity(self.rank());
        self.inv_into(g.coords(), &mut out);
        Ok(GroupElement(out))
    }

    /// The standard symmetric generating set for the kind. For FreeAbelian
    /// these are the +/- unit vectors, for Heisenberg the four elements
    /// a^{+-1}, b^{+-1}; products take the union of embedded factor sets.
    pub fn standard_generators(&self) -> Vec<GroupElement> {
        let rank = self.rank();
        let mut gens = Vec::new();
        match self {
            GroupDescriptor::FreeAbelian(d) => {
                for i in 0..*d {
                    for s in [1i64, -1] {
                        let mut v = vec![0; rank];
                        v[i] = s;
                        gens.push(GroupElement(v));
                    }
                }
            }
            GroupDescriptor::Heisenberg3 => {
                for i in 0..2 {
                    for s in [1i64, -1] {
                        let mut v = vec![0; 3];
                        v[i] = s;
                        gens.push(GroupElement(v));
                    }
                }
            }
            GroupDescriptor::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    let r = f.rank();
                    for g in f.standard_generators() {
                        let mut v = vec![0; rank];
                        v[off..off + r].copy_from_slice(g.coords());
                        gens.push(GroupElement(v));
                    }
                    off += r;
                }
            }
            GroupDescriptor::FiniteCyclicProduct(ms) => {
                for (i, &m) in ms.iter().enumerate() {
                    if m == 1 {
                        continue;
                    }
                    let mut v = vec![0; rank];
                    v[i] = 1;
                    gens.push(GroupElement(v));
                    if m > 2 {
                        let mut v = vec![0; rank];
                        v[i] = m as i64 - 1;
                        gens.push(GroupElement(v));
                    }
                }
            }
        }
        gens
    }
}

/// The group a ring element lives over: an ambient catalog group, or an
/// enumerated finite quotient of one.
#[derive(Clone, Debug, PartialEq)]
pub enum Group {
    Ambient(GroupDescriptor),
    Quotient(Arc<FiniteQuotient>),
}

impl Group {
    pub fn rank(&self) -> usize {
        match self {
            Group::Ambient(d) => d.rank(),
            Group::Quotient(q) => q.parent().rank(),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            Group::Ambient(d) => d.identity(),
            Group::Quotient(q) => q.identity(),
        }
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        match self {
            Group::Ambient(d) => d.multiply(g, h),
            Group::Quotient(q) => q.multiply(g, h),
        }
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        match self {
            Group::Ambient(d) => d.inverse(g),
            Group::Quotient(q) => q.inverse(g),
        }
    }

    pub fn validate_element(&self, g: &GroupElement) -> Result<()> {
        match self {
            Group::Ambient(d) => d.validate_element(g),
            Group::Quotient(q) => q.validate_residue(g),
        }
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        match self {
            Group::Ambient(d) => d,
            Group::Quotient(q) => q.parent(),
        }
    }
}

fn symmetrize(group: &GroupDescriptor, gens: &[GroupElement]) -> Result<Vec<GroupElement>> {
    let mut set = BTreeSet::new();
    for g in gens {
        group.validate_element(g)?;
        set.insert(g.clone());
        set.insert(group.inverse(g)?);
    }
    set.remove(&group.identity());
    if set.is_empty() {
        return Err(Error::Parameter("empty generating set".into()));
    }
    Ok(set.into_iter().collect())
}

/// Breadth-first closure of the word ball {gamma : l_F(gamma) <= radius},
/// together with the word length of every member. The generating set is
/// symmetrized internally. Fails with a capacity error if the ball would
/// exceed `cap` elements.
pub fn word_ball_lengths(
    group: &GroupDescriptor,
    generators: &[GroupElement],
    radius: u32,
    cap: usize,
) -> Result<BTreeMap<GroupElement, u32>> {
    let gens = symmetrize(group, generators)?;
    let mut lengths = BTreeMap::new();
    let mut frontier = VecDeque::new();
    lengths.insert(group.identity(), 0u32);
    frontier.push_back(group.identity());
    let mut depth = 0u32;
    while depth < radius && !frontier.is_empty() {
        depth += 1;
        let mut next = VecDeque::new();
        while let Some(g) = frontier.pop_front() {
            for s in &gens {
                let h = group.multiply(&g, s)?;
                if !lengths.contains_key(&h) {
                    if lengths.len() >= cap {
                        return Err(Error::Capacity {
                            what: "word ball",
                            requested: lengths.len() as u64 + 1,
                            cap: cap as u64,
                        });
                    }
                    lengths.insert(h.clone(), depth);
                    next.push_back(h);
                }
            }
        }
        frontier = next;
    }
    Ok(lengths)
}

/// The word ball as a set; see [`word_ball_lengths`].
pub fn word_ball(
    group: &GroupDescriptor,
    generators: &[GroupElement],
    radius: u32,
    cap: usize,
) -> Result<BTreeSet<GroupElement>> {
    Ok(word_ball_lengths(group, generators, radius, cap)?
        .into_keys()
        .collect())
}

/// Word lengths of a prescribed target set with respect to the standard
/// generators, growing the BFS ball only as far as needed. FreeAbelian
/// groups use the closed form l(g) = sum |g_i| directly.
pub fn word_lengths_of(
    group: &GroupDescriptor,
    targets: &BTreeSet<GroupElement>,
    cap: usize,
) -> Result<BTreeMap<GroupElement, u32>> {
    if let GroupDescriptor::FreeAbelian(_) = group {
        let mut out = BTreeMap::new();
        for t in targets {
            group.validate_element(t)?;
            let l: i64 = t.coords().iter().map(|c| c.abs()).sum();
            out.insert(t.clone(), l as u32);
        }
        return Ok(out);
    }
    let gens = group.standard_generators();
    let mut radius = 8u32;
    loop {
        let lengths = word_ball_lengths(group, &gens, radius, cap)?;
        if targets.iter().all(|t| lengths.contains_key(t)) {
            let out = targets
                .iter()
                .map(|t| (t.clone(), lengths[t]))
                .collect::<BTreeMap<_, _>>();
            return Ok(out);
        }
        if lengths.len() >= cap || radius > 4096 {
            return Err(Error::Capacity {
                what: "word-length search",
                requested: radius as u64 * 2,
                cap: cap as u64,
            });
        }
        radius *= 2;
    }
}

/// Membership test for word balls, used by the truncation machinery. For
/// FreeAbelian groups membership is the closed-form l1 condition; other
/// kinds materialize the ball once.
#[derive(Clone)]
pub enum BallOracle {
    L1 {
        radius: u32,
    },
    Table {
        lengths: Arc<BTreeMap<GroupElement, u32>>,
        radius: u32,
    },
}

impl BallOracle {
    pub fn new(group: &GroupDescriptor, radius: u32, cap: usize) -> Result<Self> {
        match group {
            GroupDescriptor::FreeAbelian(_) => Ok(BallOracle::L1 { radius }),
            _ => {
                let lengths = word_ball_lengths(group, &group.standard_generators(), radius, cap)?;
                Ok(BallOracle::Table {
                    lengths: Arc::new(lengths),
                    radius,
                })
            }
        }
    }

    pub fn radius(&self) -> u32 {
        match self {
            BallOracle::L1 { radius } | BallOracle::Table { radius, .. } => *radius,
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match self {
            BallOracle::L1 { radius } => {
                let l: i64 = g.coords().iter().map(|c| c.abs()).sum();
                l <= *radius as i64
            }
            BallOracle::Table { lengths, .. } => lengths.contains_key(g),
        }
    }

    /// Word length of g when it lies inside the ball.
    pub fn length(&self, g: &GroupElement) -> Option<u32> {
        match self {
            BallOracle::L1 { radius } => {
                let l: i64 = g.coords().iter().map(|c| c.abs()).sum();
                (l <= *radius as i64).then_some(l as u32)
            }
            BallOracle::Table { lengths, .. } => lengths.get(g).copied(),
        }
    }
}
