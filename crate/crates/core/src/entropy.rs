//! Entropy per finite-quotient level via log-determinants, exact periodic
//! point counts, Cauchy convergence over a chain, spectral-radius brackets,
//! and the separated-family positivity demonstration.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::invert::{InvertibilityCertificate, TruncatedInverse};
use crate::linalg::{bareiss, log_biguint, lu};
use crate::quotient::{FiniteQuotient, QuotientChain};
use crate::ring::RingElement;
use crate::transfer::{fibre_integrate, QuotientOperator};

pub use crate::linalg::lu::LogDet;

/// Pivoted log|det| of a dense operator; minus infinity on an exact zero
/// pivot.
pub fn logdet_dense(op: &QuotientOperator<f64>) -> Result<LogDet> {
    let n = op.order();
    let mut data = op.rows().to_vec();
    lu::logdet_in_place(&mut data, n)
}

/// (1 / |Gamma/Gamma_n|) log |det rho_{f^(n)}|; NEG_INFINITY when the level
/// operator is singular.
pub fn entropy_at_level(
    f: &RingElement<f64>,
    q: &Arc<FiniteQuotient>,
    dense_cap: u64,
) -> Result<f64> {
    let fq = fibre_integrate(f, q)?;
    let op = QuotientOperator::from_element(&fq, dense_cap)?;
    Ok(logdet_dense(&op)?.value() / q.order() as f64)
}

/// The number of Gamma_n-fixed points, or the verdict that the fixed group
/// is infinite (singular integer operator).
#[derive(Debug, Clone, PartialEq)]
pub enum FixCount {
    Finite(BigUint),
    InfiniteFixedGroup,
}

impl FixCount {
    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            FixCount::Finite(c) => Some(c),
            FixCount::InfiniteFixedGroup => None,
        }
    }
}

/// |det| of the integer operator by fraction-free elimination; equals
/// |Fix_{Gamma_n}(X_f)| when nonzero.
pub fn fixed_points_exact(
    f: &RingElement<BigInt>,
    q: &Arc<FiniteQuotient>,
    dense_cap: u64,
) -> Result<FixCount> {
    let fq = fibre_integrate(f, q)?;
    let op = QuotientOperator::from_element(&fq, dense_cap)?;
    let n = op.order();
    let det = bareiss::det_bigint(op.into_data(), n);
    if det.is_zero() {
        Ok(FixCount::InfiniteFixedGroup)
    } else {
        Ok(FixCount::Finite(det.abs().to_biguint().expect("abs value")))
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub order: u64,
    pub value: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Convergence {
    pub rows: Vec<ConvergenceRow>,
    pub cauchy_fired: bool,
    pub final_estimate: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub max_levels: usize,
    pub cauchy_tol: f64,
}

/// Per-level entropies along the chain until consecutive values agree within
/// `cauchy_tol` or levels run out. A singular level for certified-invertible
/// input contradicts the uniform inverse bound and is surfaced as an
/// internal-inconsistency error.
pub fn entropy_converge(
    f: &RingElement<f64>,
    chain: &QuotientChain,
    stop: StopRule,
    certified_invertible: bool,
    dense_cap: u64,
) -> Result<Convergence> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut cauchy_fired = false;
    for q in chain.levels().iter().take(stop.max_levels.max(1)) {
        if q.order() > dense_cap {
            break;
        }
        let t0 = Instant::now();
        let value = entropy_at_level(f, q, dense_cap)?;
        let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
        if value == f64::NEG_INFINITY && certified_invertible {
            return Err(Error::Inconsistent(format!(
                "level of order {} is singular although f is certified invertible",
                q.order()
            )));
        }
        rows.push(ConvergenceRow {
            order: q.order(),
            value,
            wall_ms,
        });
        if rows.len() >= 2 {
            let k = rows.len();
            if (rows[k - 1].value - rows[k - 2].value).abs() < stop.cauchy_tol {
                cauchy_fired = true;
                break;
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Capacity {
            what: "entropy_converge: every chain level exceeds the dense cap (try the cheb method)",
            requested: chain.levels()[0].order(),
            cap: dense_cap,
        });
    }
    let final_estimate = rows.last().map(|r| r.value);
    Ok(Convergence {
        rows,
        cauchy_fired,
        final_estimate,
    })
}

/// The spectral-radius bracket
/// log ||f^{-1}||_1^{-1} <= h_f <= log sigma_f <= log ||f||_1,
/// tightened by power norms on both sides. The inverse side folds the
/// truncation tail into each power norm.
#[derive(Debug, Clone)]
pub struct EntropyBracket {
    pub lower: f64,
    pub upper: f64,
    pub upper_seq: Vec<f64>,
    pub lower_seq: Vec<f64>,
}

const POWER_BUDGET: usize = 4_000_000;

pub fn entropy_bounds(
    f: &RingElement<f64>,
    cert: &InvertibilityCertificate,
    power_iters: u32,
) -> Result<EntropyBracket> {
    let Some(w) = cert.approx_inverse.as_ref() else {
        return Err(Error::Precondition(
            "entropy_bounds requires a certified-invertible element".into(),
        ));
    };
    let tau = cert.tail_bound.unwrap_or(0.0);
    let mut upper_seq = Vec::new();
    let mut power = f.clone();
    for k in 1..=power_iters {
        upper_seq.push(power.norm_l1_f64().ln() / k as f64);
        if k < power_iters {
            if power.support_size() * f.support_size() > POWER_BUDGET {
                break;
            }
            power = power.convolve(f)?;
        }
    }
    let mut lower_seq = Vec::new();
    let norm_w = w.norm_l1_f64();
    let mut wpow = w.clone();
    for k in 1..=power_iters {
        // ||f^{-k}||_1 <= ||w^k||_1 + k tau (||w||_1 + tau)^{k-1}
        let bound = wpow.norm_l1_f64() + k as f64 * tau * (norm_w + tau).powi(k as i32 - 1);
        lower_seq.push(-(bound.ln()) / k as f64);
        if k < power_iters {
            if wpow.support_size() * w.support_size() > POWER_BUDGET {
                break;
            }
            wpow = wpow.convolve(w)?;
        }
    }
    let upper = upper_seq.iter().cloned().fold(f64::INFINITY, f64::min);
    let lower = lower_seq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(EntropyBracket {
        lower: lower.min(upper),
        upper,
        upper_seq,
        lower_seq,
    })
}

fn torus_dist(a: f64, b: f64) -> f64 {
    let t = (a - b).rem_euclid(1.0);
    t.min(1.0 - t)
}

/// Outcome of the separated-family construction: 2^{omega_size} sums of
/// kernel-shifted homoclinic points, pairwise separated by half the
/// designated coordinate's distance to zero.
#[derive(Debug, Clone)]
pub struct SeparationDemo {
    /// Demonstrated entropy lower bound log 2 / |Gamma/Gamma_n|.
    pub bound: f64,
    pub omega_size: usize,
    pub family_size: usize,
    pub verified_pairs: usize,
    /// d(x_{gamma_0}, 0) / 2.
    pub threshold: f64,
    pub min_pair_gap: f64,
    pub gamma0: GroupElement,
}

/// Builds the separated family of Theorem-style sums x^(omega) =
/// sum_{gamma in Omega'} omega_gamma lambda^gamma x-tilde and verifies the
/// pairwise separation at the designated coordinates.
pub fn separated_lower_bound(
    f: &RingElement<BigInt>,
    q: &Arc<FiniteQuotient>,
    inv: &TruncatedInverse,
    omega_cap: usize,
    dense_cap: u64,
) -> Result<SeparationDemo> {
    // X_f != 0 demonstrated by |det| > 1 at this level.
    match fixed_points_exact(f, q, dense_cap)? {
        FixCount::Finite(c) if c > BigUint::from(1u32) => {}
        _ => {
            return Err(Error::Precondition(
                "separated_lower_bound needs a level with |det| > 1 (X_f = 0 otherwise)".into(),
            ))
        }
    }
    let w_tilde = inv.element.involute();
    let tau = inv.tail_bound;
    // Designated coordinate: the support point farthest from the integers.
    let (gamma0, dist0) = w_tilde
        .terms()
        .iter()
        .map(|(g, v)| (g.clone(), torus_dist(*v, 0.0)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite values"))
        .ok_or_else(|| Error::Construction("homoclinic point is zero".into()))?;
    if dist0 <= 4.0 * (tau + 1e-13) {
        return Err(Error::Construction(
            "homoclinic point vanishes mod 1 on the window".into(),
        ));
    }
    let sep = dist0 / 2.0;
    // Finite window F with sum_{gamma not in F} |w-tilde_gamma| < sep,
    // greedy by descending magnitude (ties by key order).
    let mut by_mag: Vec<(&GroupElement, f64)> =
        w_tilde.terms().iter().map(|(g, v)| (g, v.abs())).collect();
    by_mag.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(b.0)));
    let total: f64 = by_mag.iter().map(|p| p.1).sum();
    let mut window: Vec<GroupElement> = Vec::new();
    let mut kept = 0.0;
    for (g, m) in &by_mag {
        if total - kept + tau < sep {
            break;
        }
        window.push((*g).clone());
        kept += m;
    }
    if total - kept + tau >= sep {
        return Err(Error::Construction(
            "cannot reach the required tail below half the designated distance".into(),
        ));
    }
    // The quotient kernel must separate F F^{-1} so that the translates
    // gamma F are pairwise disjoint over the kernel.
    let parent = q.parent().clone();
    for a in &window {
        let a_inv = parent.inverse(a)?;
        for b in &window {
            let p = parent.multiply(b, &a_inv)?;
            if !p.is_identity() && q.in_kernel(&p) {
                return Err(Error::Construction(format!(
                    "kernel of the level (order {}) meets the window difference set; use a deeper level",
                    q.order()
                )));
            }
        }
    }
    // Omega': kernel elements k * (m_0, 0, ..., 0).
    let omega_size = omega_cap.clamp(1, 8);
    let m0 = q.coord_moduli()[0] as i64;
    let rank = parent.rank();
    let omega: Vec<GroupElement> = (0..omega_size as i64)
        .map(|k| {
            let mut v = vec![0i64; rank];
            v[0] = k * m0;
            GroupElement::new(v)
        })
        .collect();
    // A[j][i] = w-tilde(gamma_j^{-1} gamma_i gamma_0).
    let k = omega.len();
    let mut a = vec![0.0f64; k * k];
    for (j, gj) in omega.iter().enumerate() {
        let gj_inv = parent.inverse(gj)?;
        for (i, gi) in omega.iter().enumerate() {
            let coord = parent.multiply(&parent.multiply(&gj_inv, gi)?, &gamma0)?;
            a[j * k + i] = w_tilde.coeff(&coord);
        }
    }
    let family_size = 1usize << k;
    let values = |omega_bits: usize, i: usize| -> f64 {
        let mut s = 0.0;
        for j in 0..k {
            if omega_bits >> j & 1 == 1 {
                s += a[j * k + i];
            }
        }
        s.rem_euclid(1.0)
    };
    let slack = 2.0 * tau + 1e-12;
    let mut min_gap = f64::INFINITY;
    let mut verified_pairs = 0usize;
    for o1 in 0..family_size {
        for o2 in o1 + 1..family_size {
            let diff = o1 ^ o2;
            let mut pair_ok = false;
            for j in 0..k {
                if diff >> j & 1 == 1 {
                    let gap = torus_dist(values(o1, j), values(o2, j));
                    min_gap = min_gap.min(gap);
                    if gap >= sep - slack {
                        pair_ok = true;
                    }
                }
            }
            if !pair_ok {
                return Err(Error::Construction(format!(
                    "pair ({o1},{o2}) is not separated at the designated coordinates"
                )));
            }
            verified_pairs += 1;
        }
    }
    Ok(SeparationDemo {
        bound: std::f64::consts::LN_2 / q.order() as f64,
        omega_size: k,
        family_size,
        verified_pairs,
        threshold: sep,
        min_pair_gap: min_gap,
        gamma0,
    })
}

/// Rounds exp(logdet)/order-free comparisons: checks whether the float
/// log-determinant and an exact count agree (|exp(logdet) - count| within
/// 0.4 of the integer), used to cross-flag the two computation routes.
pub fn count_matches_logdet(count: &BigUint, logdet: f64) -> bool {
    if !logdet.is_finite() {
        return false;
    }
    let lc = log_biguint(count);
    // Compare in log space: |exp(d) - c| < 0.4 ~ |d - log c| < 0.4/c.
    let tol = (0.4f64).min(0.4 / lc.exp().max(1.0)).max(1e-12);
    (logdet - lc).abs() < tol.max(1e-9)
}
