//! Exact linear solves over the rationals (small systems only).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Solves A x = b exactly by Gaussian elimination; `None` when singular.
pub fn solve_rational(a: &[BigRational], n: usize, b: &[BigRational]) -> Option<Vec<BigRational>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let mut piv = None;
        for i in k..n {
            if !m[i * n + k].is_zero() {
                piv = Some(i);
                break;
            }
        }
        let piv = piv?;
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            rhs.swap(k, piv);
        }
        let inv = m[k * n + k].recip();
        for i in k + 1..n {
            if m[i * n + k].is_zero() {
                continue;
            }
            let factor = &m[i * n + k] * &inv;
            for j in k..n {
                let d = &factor * &m[k * n + j];
                m[i * n + j] -= d;
            }
            let d = &factor * &rhs[k];
            rhs[i] -= d;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i].clone();
        for j in i + 1..n {
            s -= &m[i * n + j] * &x[j];
        }
        x[i] = s / &m[i * n + i];
    }
    Some(x)
}

/// Solves A x = b for an integer matrix and integer right-hand side.
pub fn solve_int_system(a: &[BigInt], n: usize, b: &[BigInt]) -> Option<Vec<BigRational>> {
    let ar: Vec<BigRational> = a
        .iter()
        .map(|x| BigRational::from_integer(x.clone()))
        .collect();
    let br: Vec<BigRational> = b
        .iter()
        .map(|x| BigRational::from_integer(x.clone()))
        .collect();
    solve_rational(&ar, n, &br)
}

/// Reduces a rational into [0, 1).
pub fn frac_mod_one(x: &BigRational) -> BigRational {
    let f = x.floor();
    x - f
}

/// Torus distance d(a, b) = min(|a-b| mod 1, 1 - |a-b| mod 1), exact.
pub fn torus_distance(a: &BigRational, b: &BigRational) -> BigRational {
    let d = frac_mod_one(&(a - b));
    let one_minus = BigRational::from_integer(1.into()) - &d;
    if d <= one_minus {
        d
    } else {
        one_minus
    }
}

/// Nearest-integer distance |x - round(x)| as an exact rational.
pub fn dist_to_integers(x: &BigRational) -> BigRational {
    torus_distance(x, &BigRational::zero())
}
