//! Fibre integration onto finite quotients and materialized operator
//! matrices of the right-convolution action.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::quotient::FiniteQuotient;
use crate::ring::{Coeff, RingElement};

/// Default cap on the order of densely materialized operators.
pub const DENSE_CAP: u64 = 8192;

/// Integration along the fibres: f^(n)(delta) = sum_{gamma in delta} f(gamma).
/// An algebra homomorphism with involution; contracts the l1 norm.
pub fn fibre_integrate<S: Coeff>(
    f: &RingElement<S>,
    q: &Arc<FiniteQuotient>,
) -> Result<RingElement<S>> {
    let parent = match f.group() {
        Group::Ambient(d) => d,
        Group::Quotient(_) => {
            return Err(Error::DescriptorMismatch(
                "fibre integration expects an ambient-group element".into(),
            ))
        }
    };
    if parent != q.parent() {
        return Err(Error::DescriptorMismatch(
            "element and quotient have different parent groups".into(),
        ));
    }
    RingElement::from_terms(
        Group::Quotient(Arc::clone(q)),
        f.terms()
            .iter()
            .map(|(g, c)| (q.project(g).expect("validated support"), c.clone())),
    )
}

/// The order x order matrix of right convolution by a quotient-ring element:
/// M[g, g'] = f^(n)(g^{-1} g') in the quotient's element enumeration, so the
/// matrix-vector action matches (rho_f w)_g = sum_{g'} w_{g g'} f(g').
#[derive(Debug, Clone)]
pub struct QuotientOperator<S> {
    quotient: Arc<FiniteQuotient>,
    n: usize,
    data: Vec<S>,
}

impl<S: Coeff> QuotientOperator<S> {
    pub fn from_element(fq: &RingElement<S>, dense_cap: u64) -> Result<Self> {
        let q = match fq.group() {
            Group::Quotient(q) => Arc::clone(q),
            Group::Ambient(_) => {
                return Err(Error::DescriptorMismatch(
                    "operator matrices are defined for quotient-ring elements".into(),
                ))
            }
        };
        if q.order() > dense_cap {
            return Err(Error::Capacity {
                what: "dense operator matrix (try the polynomial trace method)",
                requested: q.order(),
                cap: dense_cap,
            });
        }
        let n = q.order() as usize;
        // Row i holds fq(g_i^{-1} g_j); equivalently for every support term
        // (delta, c) the column j with g_j = g_i * delta receives c, making
        // each row a permuted copy of the coefficient vector.
        let support: Vec<(usize, S)> = fq
            .terms()
            .iter()
            .map(|(d, c)| (q.index_of(d), c.clone()))
            .collect();
        let mut data = vec![S::zero(); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (dj, c) in &support {
                let j = q.multiply_idx(i, *dj);
                row[j] = c.clone();
            }
        });
        Ok(QuotientOperator {
            quotient: q,
            n,
            data,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn quotient(&self) -> &Arc<FiniteQuotient> {
        &self.quotient
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    pub fn rows(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn matrix_trace(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.n {
            acc = acc + self.data[i * self.n + i].clone();
        }
        acc
    }

    /// Dumps the dense matrix as CSV for offline inspection.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    write!(w, ",")?;
                }
                write!(w, "{}", self.data[i * self.n + j])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

impl QuotientOperator<f64> {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Power-iteration estimate of the largest-magnitude eigenvalue; a sanity
    /// check against the l1 bound on the operator norm.
    pub fn spectral_radius_estimate(&self, iters: usize) -> f64 {
        let n = self.n;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 / (i as f64 + 2.0)).collect();
        let mut lambda = 0.0;
        for _ in 0..iters {
            let w = self.apply(&v);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            lambda = norm;
            v = w.into_iter().map(|x| x / norm).collect();
        }
        lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupDescriptor, GroupElement};
    use num_bigint::BigInt;

    fn el(coords: &[i64]) -> GroupElement {
        GroupElement::new(coords.to_vec())
    }

    fn z_elem(pairs: &[(i64, i64)]) -> RingElement<BigInt> {
        RingElement::from_terms(
            Group::Ambient(GroupDescriptor::FreeAbelian(1)),
            pairs.iter().map(|&(k, c)| (el(&[k]), BigInt::from(c))),
        )
        .unwrap()
    }

    #[test]
    fn fibre_merges_shared_cosets() {
        let f = z_elem(&[(0, 3), (1, -1), (-1, -1)]);
        let q = FiniteQuotient::congruence(&GroupDescriptor::FreeAbelian(1), 2, 100).unwrap();
        let fq = fibre_integrate(&f, &q).unwrap();
        assert_eq!(fq.coeff(&el(&[0])), BigInt::from(3));
        assert_eq!(fq.coeff(&el(&[1])), BigInt::from(-2));
    }

    #[test]
    fn fibre_singleton_support() {
        let f = z_elem(&[(0, 2), (1, -1)]);
        let q = FiniteQuotient::congruence(&GroupDescriptor::FreeAbelian(1), 4, 100).unwrap();
        let fq = fibre_integrate(&f, &q).unwrap();
        assert_eq!(fq.coeff(&el(&[0])), BigInt::from(2));
        assert_eq!(fq.coeff(&el(&[1])), BigInt::from(-1));
        assert_eq!(fq.support_size(), 2);
    }

    #[test]
    fn fibre_on_heisenberg_mod_2() {
        let g = GroupDescriptor::Heisenberg3;
        let f = RingElement::from_terms(
            Group::Ambient(g.clone()),
            [
                (el(&[0, 0, 0]), BigInt::from(5)),
                (el(&[1, 0, 0]), BigInt::from(-1)),
                (el(&[-1, 0, 0]), BigInt::from(-1)),
                (el(&[0, 1, 0]), BigInt::from(-1)),
                (el(&[0, -1, 0]), BigInt::from(-1)),
            ],
        )
        .unwrap();
        let q = FiniteQuotient::congruence(&g, 2, 100).unwrap();
        let fq = fibre_integrate(&f, &q).unwrap();
        assert_eq!(fq.coeff(&el(&[0, 0, 0])), BigInt::from(5));
        assert_eq!(fq.coeff(&el(&[1, 0, 0])), BigInt::from(-2));
        assert_eq!(fq.coeff(&el(&[0, 1, 0])), BigInt::from(-2));
        assert_eq!(fq.support_size(), 3);
    }

    #[test]
    fn operator_matrix_on_z_mod_2() {
        let f = z_elem(&[(0, 2), (1, -1)]);
        let q = FiniteQuotient::congruence(&GroupDescriptor::FreeAbelian(1), 2, 100).unwrap();
        let fq = fibre_integrate(&f, &q).unwrap();
        let op = QuotientOperator::from_element(&fq, DENSE_CAP).unwrap();
        assert_eq!(*op.entry(0, 0), BigInt::from(2));
        assert_eq!(*op.entry(0, 1), BigInt::from(-1));
        assert_eq!(*op.entry(1, 0), BigInt::from(-1));
        assert_eq!(*op.entry(1, 1), BigInt::from(2));
    }

    #[test]
    fn scalar_element_gives_scaled_identity() {
        let q = FiniteQuotient::congruence(&GroupDescriptor::FreeAbelian(1), 3, 100).unwrap();
        let c = RingElement::scalar(Group::Quotient(Arc::clone(&q)), BigInt::from(7));
        let op = QuotientOperator::from_element(&c, DENSE_CAP).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 7 } else { 0 };
                assert_eq!(*op.entry(i, j), BigInt::from(expect));
            }
        }
    }

    #[test]
    fn circulant_structure_mod_3() {
        let f = z_elem(&[(0, 3), (1, -1), (-1, -1)]);
        let q = FiniteQuotient::congruence(&GroupDescriptor::FreeAbelian(1), 3, 100).unwrap();
        let fq = fibre_integrate(&f, &q).unwrap();
        let op = QuotientOperator::from_element(&fq, DENSE_CAP).unwrap();
        let first: Vec<i64> = (0..3).map(|j| op.entry(0, j).try_into().unwrap()).collect();
        assert_eq!(first, vec![3, -1, -1]);
        // Rows are permuted copies; diagonal constant.
        for i in 0..3 {
            assert_eq!(*op.entry(i, i), BigInt::from(3));
        }
    }

    #[test]
    fn csv_dump_lists_rows() {
        let f = z_elem(&[(0, 2), (1, -1)]);
        let q = FiniteQuotient::congruence(&GroupDescriptor::FreeAbelian(1), 2, 100).unwrap();
        let fq = fibre_integrate(&f, &q).unwrap();
        let op = QuotientOperator::from_element(&fq, DENSE_CAP).unwrap();
        let mut buf = Vec::new();
        op.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "2,-1\n-1,2\n");
    }

    #[test]
    fn dense_cap_enforced() {
        let f = z_elem(&[(0, 2), (1, -1)]);
        let q = FiniteQuotient::congruence(&GroupDescriptor::FreeAbelian(1), 64, 1000).unwrap();
        let fq = fibre_integrate(&f, &q).unwrap();
        let err = QuotientOperator::from_element(&fq, 32).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }
}
