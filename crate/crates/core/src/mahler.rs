//! Independent oracle for Z^d: Wiener-style invertibility on the torus and
//! entropy as the logarithmic Mahler measure by periodic trapezoid
//! quadrature.
//!
//! The tensor trapezoid grid is deliberately plain: for nonvanishing f-hat
//! the integrand is periodic-analytic so the rule is spectrally accurate,
//! and the grid points coincide with the eigenvalue angles of the (Z/N)^d
//! quotient operator, which gives an exact cross-check against the dense
//! method. Grids are limited to d <= 3; beyond that the cost explodes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::ring::RingElement;

/// A trigonometric polynomial on the d-torus: the Fourier-transform view of
/// a ring element over Z^d.
#[derive(Debug, Clone)]
pub struct TorusPolynomial {
    dim: usize,
    terms: Vec<(Vec<i64>, f64)>,
}

impl TorusPolynomial {
    pub fn from_ring_element(f: &RingElement<f64>) -> Result<Self> {
        let dim = match f.group() {
            Group::Ambient(crate::group::GroupDescriptor::FreeAbelian(d)) => *d,
            _ => {
                return Err(Error::Parameter(
                    "torus polynomials are defined over free abelian groups".into(),
                ))
            }
        };
        if dim > 3 {
            return Err(Error::Parameter("torus grids are limited to d <= 3".into()));
        }
        let terms = f
            .terms()
            .iter()
            .map(|(g, c)| (g.coords().to_vec(), *c))
            .collect();
        Ok(TorusPolynomial { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_exponent(&self) -> u64 {
        self.terms
            .iter()
            .flat_map(|(v, _)| v.iter().map(|c| c.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    /// f-hat(theta) = sum_v f_v exp(2 pi i <v, theta>), exact finite sum.
    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        assert_eq!(theta.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, c) in &self.terms {
            let phase: f64 = v.iter().zip(theta).map(|(&vi, &ti)| vi as f64 * ti).sum();
            let angle = 2.0 * std::f64::consts::PI * phase;
            acc += Complex64::new(c * angle.cos(), c * angle.sin());
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WienerVerdict {
    /// The true minimum of |f-hat| is certified positive.
    NonvanishingCertified,
    /// A grid value is (numerically) zero.
    GridVanishing,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct WienerReport {
    pub grid_min: f64,
    pub argmin: Vec<f64>,
    /// grid_min minus the Lipschitz offset; a lower bound on min |f-hat|.
    pub certified_lower: f64,
    pub verdict: WienerVerdict,
    pub grid: u32,
}

fn grid_iter(dim: usize, n: u32, mut visit: impl FnMut(&[f64])) {
    let mut idx = vec![0u32; dim];
    let mut theta = vec![0.0f64; dim];
    loop {
        for (t, &i) in theta.iter_mut().zip(&idx) {
            *t = i as f64 / n as f64;
        }
        visit(&theta);
        let mut k = dim;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            if k == 0 {
                return;
            }
        }
    }
}

/// Grid minimum of |f-hat| plus a Lipschitz-certified lower bound on the
/// true minimum (per-axis constant 2 pi sum_v |v_i| |f_v|, half-cell reach).
pub fn wiener_invertibility(p: &TorusPolynomial, n: u32) -> Result<WienerReport> {
    let need = 4 * (p.max_exponent() + 1);
    if (n as u64) < need {
        return Err(Error::Parameter(format!(
            "grid must satisfy N >= 4 (max exponent + 1) = {need}, got {n}"
        )));
    }
    let mut grid_min = f64::INFINITY;
    let mut argmin = vec![0.0; p.dim()];
    grid_iter(p.dim(), n, |theta| {
        let v = p.eval(theta).norm();
        if v < grid_min {
            grid_min = v;
            argmin.copy_from_slice(theta);
        }
    });
    let mut offset = 0.0f64;
    for axis in 0..p.dim() {
        let lip: f64 = p
            .terms
            .iter()
            .map(|(v, c)| 2.0 * std::f64::consts::PI * v[axis].abs() as f64 * c.abs())
            .sum();
        offset += lip / (2.0 * n as f64);
    }
    let certified_lower = grid_min - offset;
    let verdict = if certified_lower > 0.0 {
        WienerVerdict::NonvanishingCertified
    } else if grid_min <= 1e-12 {
        WienerVerdict::GridVanishing
    } else {
        WienerVerdict::Unknown
    };
    Ok(WienerReport {
        grid_min,
        argmin,
        certified_lower,
        verdict,
        grid: n,
    })
}

/// Pairwise deterministic summation.
fn pairwise_sum(v: &mut [f64]) -> f64 {
    let mut len = v.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            v[i] = v[2 * i] + v[2 * i + 1];
        }
        if len % 2 == 1 {
            v[half] = v[len - 1];
            len = half + 1;
        } else {
            len = half;
        }
    }
    if v.is_empty() {
        0.0
    } else {
        v[0]
    }
}

fn grid_average_log(p: &TorusPolynomial, n: u32) -> f64 {
    let mut vals = Vec::with_capacity((n as usize).pow(p.dim() as u32));
    grid_iter(p.dim(), n, |theta| {
        vals.push(p.eval(theta).norm().ln());
    });
    let count = vals.len() as f64;
    pairwise_sum(&mut vals) / count
}

#[derive(Debug, Clone)]
pub struct MahlerEstimate {
    /// Equal-weight grid average of log |f-hat| at grid N.
    pub value: f64,
    /// Same at grid 2N.
    pub refined: f64,
    /// |value - refined|: the grid-doubling error estimate.
    pub error_estimate: f64,
    pub grid: u32,
}

/// Logarithmic Mahler measure by torus trapezoid quadrature. Refuses when
/// the Wiener check cannot certify a nonvanishing f-hat: the spectral
/// accuracy claim needs a log singularity-free integrand.
pub fn mahler_quadrature(p: &TorusPolynomial, n: u32) -> Result<MahlerEstimate> {
    let report = wiener_invertibility(p, n)?;
    if report.verdict != WienerVerdict::NonvanishingCertified {
        return Err(Error::Precondition(format!(
            "mahler quadrature needs a certified nonvanishing transform \
             (verdict {:?}, grid min {:.3e})",
            report.verdict, report.grid_min
        )));
    }
    let value = grid_average_log(p, n);
    let refined = grid_average_log(p, 2 * n);
    Ok(MahlerEstimate {
        value,
        refined,
        error_estimate: (value - refined).abs(),
        grid: n,
    })
}
