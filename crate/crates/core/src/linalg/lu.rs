//! Dense partial-pivot elimination for log-determinants and linear solves.
//!
//! Row updates are parallelized with rayon; each row's arithmetic is
//! independent of the partitioning, so results are identical for any thread
//! count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// log|det| of a square matrix, or a minus-infinity marker when elimination
/// hits an exactly zero pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogDet {
    Finite(f64),
    MinusInfinity,
}

impl LogDet {
    pub fn value(self) -> f64 {
        match self {
            LogDet::Finite(v) => v,
            LogDet::MinusInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, LogDet::Finite(_))
    }
}

/// In-place LU with partial pivoting returning sum(log|pivot|).
pub fn logdet_in_place(a: &mut [f64], n: usize) -> Result<LogDet> {
    assert_eq!(a.len(), n * n);
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("matrix has non-finite entries".into()));
    }
    let mut acc = 0.0f64;
    for k in 0..n {
        // Pivot: largest magnitude in column k at or below the diagonal.
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Ok(LogDet::MinusInfinity);
        }
        if piv != k {
            // Split at max(piv, k) row start so we can borrow both rows.
            let (top, bottom) = a.split_at_mut(piv * n);
            top[k * n..k * n + n].swap_with_slice(&mut bottom[..n]);
        }
        let pivot = a[k * n + k];
        acc += pivot.abs().ln();
        let inv = 1.0 / pivot;
        let (pivot_rows, rest) = a.split_at_mut((k + 1) * n);
        let pivot_row = &pivot_rows[k * n..(k + 1) * n];
        rest.par_chunks_mut(n).for_each(|row| {
            let factor = row[k] * inv;
            if factor != 0.0 {
                row[k] = factor;
                for j in k + 1..n {
                    row[j] -= factor * pivot_row[j];
                }
            }
        });
    }
    Ok(LogDet::Finite(acc))
}

/// Solves A x = b by Gaussian elimination with partial pivoting. Returns
/// `None` when a pivot is exactly zero.
pub fn solve(a: &[f64], n: usize, b: &[f64]) -> Result<Option<Vec<f64>>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("matrix has non-finite entries".into()));
    }
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        let mut best = m[k * n + k].abs();
        for i in k + 1..n {
            let v = m[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Ok(None);
        }
        if piv != k {
            let (top, bottom) = m.split_at_mut(piv * n);
            top[k * n..k * n + n].swap_with_slice(&mut bottom[..n]);
            rhs.swap(k, piv);
        }
        let inv = 1.0 / m[k * n + k];
        let (pivot_rows, rest) = m.split_at_mut((k + 1) * n);
        let pivot_row = &pivot_rows[k * n..(k + 1) * n];
        let rhs_k = rhs[k];
        let rhs_rest = &mut rhs[k + 1..];
        rest.par_chunks_mut(n)
            .zip(rhs_rest.par_iter_mut())
            .for_each(|(row, r)| {
                let factor = row[k] * inv;
                if factor != 0.0 {
                    for j in k + 1..n {
                        row[j] -= factor * pivot_row[j];
                    }
                    *r -= factor * rhs_k;
                }
            });
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= m[i * n + j] * x[j];
        }
        x[i] = s / m[i * n + i];
    }
    Ok(Some(x))
}
