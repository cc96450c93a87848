//! Smith normal form over the integers with right-transform tracking.
//!
//! For a square integer matrix M we compute unimodular U, V with
//! U M V = diag(d_1, ..., d_r, 0, ..., 0), d_i >= 0 and d_i | d_{i+1}.
//! Only V is materialized: the solution set of M x in Z^n (mod Z^n) is
//! { V y : y_i in (1/d_i) Z }, which is all the fixed-point enumeration
//! needs.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone)]
pub struct SmithResult {
    /// Diagonal entries, nonnegative, with d_i | d_{i+1} among the nonzero
    /// prefix; zeros trail.
    pub diag: Vec<BigInt>,
    /// Right transform V (row-major n x n).
    pub right: Vec<BigInt>,
    pub n: usize,
}

struct Work {
    m: Vec<BigInt>,
    v: Vec<BigInt>,
    n: usize,
}

impl Work {
    fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.m[i * self.n + j]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n {
            self.m.swap(a * self.n + j, b * self.n + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.n {
            self.m.swap(i * self.n + a, i * self.n + b);
            self.v.swap(i * self.n + a, i * self.n + b);
        }
    }

    /// row_i -= q * row_t
    fn row_sub(&mut self, i: usize, t: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.n {
            let delta = q * &self.m[t * self.n + j];
            self.m[i * self.n + j] -= delta;
        }
    }

    /// col_j -= q * col_t
    fn col_sub(&mut self, j: usize, t: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.n {
            let dm = q * &self.m[i * self.n + t];
            self.m[i * self.n + j] -= dm;
            let dv = q * &self.v[i * self.n + t];
            self.v[i * self.n + j] -= dv;
        }
    }

    /// col_t += col_s
    fn col_add(&mut self, t: usize, s: usize) {
        for i in 0..self.n {
            let dm = self.m[i * self.n + s].clone();
            self.m[i * self.n + t] += dm;
            let dv = self.v[i * self.n + s].clone();
            self.v[i * self.n + t] += dv;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.n {
            let a = -self.m[i * self.n + j].clone();
            self.m[i * self.n + j] = a;
            let b = -self.v[i * self.n + j].clone();
            self.v[i * self.n + j] = b;
        }
    }

    /// Minimal-magnitude nonzero entry in the trailing submatrix.
    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.n {
            for j in t..self.n {
                let x = self.at(i, j);
                if x.is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if x.abs() < self.at(bi, bj).abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        best
    }

    fn diagonalize_from(&mut self, start: usize) {
        let n = self.n;
        let mut t = start;
        while t < n {
            let Some((pi, pj)) = self.find_pivot(t) else {
                break;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..n {
                if !self.at(i, t).is_zero() {
                    let q = self.at(i, t) / self.at(t, t);
                    self.row_sub(i, t, &q);
                    if !self.at(i, t).is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..n {
                if !self.at(t, j).is_zero() {
                    let q = self.at(t, j) / self.at(t, t);
                    self.col_sub(j, t, &q);
                    if !self.at(t, j).is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                t += 1;
            }
            // Otherwise loop again: the remaining residues are strictly
            // smaller than the old pivot, so the minimal pivot shrinks.
        }
    }
}

pub fn smith_normal_form(m: Vec<BigInt>, n: usize) -> SmithResult {
    assert_eq!(m.len(), n * n);
    let mut v = vec![BigInt::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = BigInt::from(1);
    }
    let mut w = Work { m, v, n };
    w.diagonalize_from(0);
    // Divisibility fix: when d_t does not divide d_{t+1}, fold column t+1
    // into column t and rediagonalize from t; d_t becomes gcd(d_t, d_{t+1}).
    loop {
        let mut violated = None;
        for t in 0..n.saturating_sub(1) {
            let a = w.at(t, t).clone();
            let b = w.at(t + 1, t + 1).clone();
            if !a.is_zero() && !b.is_zero() && !(&b % &a).is_zero() {
                violated = Some(t);
                break;
            }
        }
        let Some(t) = violated else { break };
        w.col_add(t, t + 1);
        w.diagonalize_from(t);
    }
    for j in 0..n {
        if w.at(j, j).is_negative() {
            w.negate_col(j);
        }
    }
    let diag = (0..n).map(|i| w.at(i, i).clone()).collect();
    SmithResult {
        diag,
        right: w.v,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> (Vec<BigInt>, usize) {
        let n = rows.len();
        let mut a = Vec::with_capacity(n * n);
        for r in rows {
            for &v in *r {
                a.push(BigInt::from(v));
            }
        }
        (a, n)
    }

    fn check_invariants(orig: &[BigInt], n: usize, res: &SmithResult) {
        // Nonzero prefix with divisibility, zeros trailing.
        let mut seen_zero = false;
        for i in 0..n {
            if res.diag[i].is_zero() {
                seen_zero = true;
            } else {
                assert!(!seen_zero, "zero before nonzero in SNF diagonal");
                assert!(!res.diag[i].is_negative());
                if i + 1 < n && !res.diag[i + 1].is_zero() {
                    assert!((&res.diag[i + 1] % &res.diag[i]).is_zero());
                }
            }
        }
        // |det V| = 1.
        let detv = crate::linalg::bareiss::det_bigint(res.right.clone(), n);
        assert_eq!(detv.abs(), BigInt::from(1));
        // det M = +- prod diag.
        let detm = crate::linalg::bareiss::det_bigint(orig.to_vec(), n).abs();
        let mut prod = BigInt::from(1);
        for d in &res.diag {
            prod *= d;
        }
        assert_eq!(detm, prod.abs());
    }

    #[test]
    fn circulant_two_minus_x_mod_2() {
        let (a, n) = m(&[&[2, -1], &[-1, 2]]);
        let res = smith_normal_form(a.clone(), n);
        assert_eq!(res.diag, vec![BigInt::from(1), BigInt::from(3)]);
        check_invariants(&a, n, &res);
    }

    #[test]
    fn doubled_identity() {
        let (a, n) = m(&[&[2, 0], &[0, 2]]);
        let res = smith_normal_form(a.clone(), n);
        assert_eq!(res.diag, vec![BigInt::from(2), BigInt::from(2)]);
        check_invariants(&a, n, &res);
    }

    #[test]
    fn divisibility_is_enforced() {
        let (a, n) = m(&[&[2, 0], &[0, 3]]);
        let res = smith_normal_form(a.clone(), n);
        assert_eq!(res.diag, vec![BigInt::from(1), BigInt::from(6)]);
        check_invariants(&a, n, &res);
    }

    #[test]
    fn singular_matrix_has_zero_divisor() {
        let (a, n) = m(&[&[1, -1], &[-1, 1]]);
        let res = smith_normal_form(a.clone(), n);
        assert_eq!(res.diag, vec![BigInt::from(1), BigInt::from(0)]);
    }

    #[test]
    fn random_matrices_keep_invariants() {
        // Small deterministic pseudo-random integer matrices.
        let mut seed = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % 11) as i64 - 5
        };
        for n in 2..=5 {
            for _ in 0..8 {
                let a: Vec<BigInt> = (0..n * n).map(|_| BigInt::from(next())).collect();
                let res = smith_normal_form(a.clone(), n);
                check_invariants(&a, n, &res);
            }
        }
    }
}
