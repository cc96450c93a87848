//! Certified invertibility of f in L^1(Gamma), truncated inverses, and decay
//! profiling of the inverse coefficients.
//!
//! Invertibility in L^1 has no general decision procedure, so the module runs
//! two one-sided tracks. A truncated candidate g with residual
//! delta = ||e(1) - g*f||_1 < 1 certifies invertibility (a one-sided inverse
//! with small residual is enough); an exactly singular quotient operator
//! certifies non-invertibility. Everything else stays Unknown.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{BallOracle, Group, GroupElement};
use crate::linalg::bareiss;
use crate::linalg::lu;
use crate::quotient::{FiniteQuotient, QuotientChain};
use crate::ring::RingElement;
use crate::transfer::{fibre_integrate, QuotientOperator};

use num_bigint::BigInt;

/// Default l1 tail target for truncated inverses.
pub const DEFAULT_TAIL_TARGET: f64 = 1e-12;
/// Default residual target for certification.
pub const DEFAULT_RESIDUAL_TARGET: f64 = 1e-12;
/// Default word-ball radius cap for abelian groups.
pub const RADIUS_CAP_ABELIAN: u32 = 64;
/// Default word-ball radius cap for the Heisenberg group.
pub const RADIUS_CAP_HEISENBERG: u32 = 24;
/// Default cap on materialized ball sizes.
pub const BALL_CAP: usize = 1_000_000;

pub fn default_radius_cap(group: &Group) -> u32 {
    use crate::group::GroupDescriptor::*;
    match group.descriptor() {
        FreeAbelian(_) | FiniteCyclicProduct(_) => RADIUS_CAP_ABELIAN,
        Heisenberg3 | DirectProduct(_) => RADIUS_CAP_HEISENBERG,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    InvertibleCertified,
    NonInvertibleCertified,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Dominant-coefficient Neumann series.
    Neumann,
    /// Quotient-lifted seed refined by Newton iteration.
    QuotientNewton,
}

/// One refinement step: the recomputed residual and the truncation slack
/// injected by that step (dropped l1 mass times ||f||_1).
#[derive(Debug, Clone, Copy)]
pub struct RefineStep {
    pub residual: f64,
    pub slack: f64,
}

#[derive(Debug, Clone)]
pub struct InvertibilityCertificate {
    pub verdict: Verdict,
    /// Approximate inverse g (present when certified invertible).
    pub approx_inverse: Option<RingElement<f64>>,
    /// delta = ||e(1) - g*f||_1 for the stored g.
    pub residual: Option<f64>,
    /// ||f^{-1} - g||_1 <= tail_bound, via the geometric bound
    /// ||g||_1 * delta / (1 - delta).
    pub tail_bound: Option<f64>,
    /// Largest word length in the support of g.
    pub support_radius: Option<u32>,
    pub route: Option<Route>,
    /// Singular quotient witnessing non-invertibility.
    pub witness: Option<Arc<FiniteQuotient>>,
    /// Residual/slack trace of the refinement, for diagnostics.
    pub refinement: Vec<RefineStep>,
}

impl InvertibilityCertificate {
    fn unknown(refinement: Vec<RefineStep>, best: Option<(RingElement<f64>, f64)>) -> Self {
        let (residual,) = match &best {
            Some((_, d)) => (Some(*d),),
            None => (None,),
        };
        InvertibilityCertificate {
            verdict: Verdict::Unknown,
            approx_inverse: None,
            residual,
            tail_bound: None,
            support_radius: None,
            route: None,
            witness: None,
            refinement,
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.verdict == Verdict::InvertibleCertified
    }
}

/// A ball-truncated inverse with its certified l1 tail bound.
#[derive(Debug, Clone)]
pub struct TruncatedInverse {
    pub element: RingElement<f64>,
    pub tail_bound: f64,
    pub residual: f64,
}

fn truncate_to_ball(el: &RingElement<f64>, oracle: &BallOracle) -> Result<(RingElement<f64>, f64)> {
    let mut dropped = 0.0f64;
    let kept = el.terms().iter().filter_map(|(g, c)| {
        if oracle.contains(g) {
            Some((g.clone(), *c))
        } else {
            dropped += c.abs();
            None
        }
    });
    // collect through a Vec so `dropped` is fully accumulated first
    let kept: Vec<_> = kept.collect();
    let out = RingElement::from_terms(el.group().clone(), kept)?;
    Ok((out, dropped))
}

fn residual_of(g: &RingElement<f64>, f: &RingElement<f64>) -> Result<f64> {
    let unit = RingElement::basis(f.group().clone(), f.group().identity())?;
    Ok(unit.sub(&g.convolve(f)?)?.norm_l1_f64())
}

fn support_radius(g: &RingElement<f64>, oracle: &BallOracle) -> u32 {
    g.terms()
        .keys()
        .filter_map(|k| oracle.length(k))
        .max()
        .unwrap_or(0)
}

fn finish_certified(
    f: &RingElement<f64>,
    g: RingElement<f64>,
    oracle: &BallOracle,
    route: Route,
    refinement: Vec<RefineStep>,
) -> Result<InvertibilityCertificate> {
    let delta = residual_of(&g, f)?;
    if delta >= 1.0 {
        return Ok(InvertibilityCertificate::unknown(
            refinement,
            Some((g, delta)),
        ));
    }
    let tail = g.norm_l1_f64() * delta / (1.0 - delta);
    let radius = support_radius(&g, oracle);
    Ok(InvertibilityCertificate {
        verdict: Verdict::InvertibleCertified,
        approx_inverse: Some(g),
        residual: Some(delta),
        tail_bound: Some(tail),
        support_radius: Some(radius),
        route: Some(route),
        witness: None,
        refinement,
    })
}

/// Dominant-coefficient Neumann series: f = c (e - u) with ||u||_1 < 1.
fn certify_neumann(
    f: &RingElement<f64>,
    target: f64,
    oracle: &BallOracle,
) -> Result<InvertibilityCertificate> {
    let group = f.group().clone();
    let c = f.trace();
    let unit = RingElement::basis(group.clone(), group.identity())?;
    // u = e - f/c, supported off the identity.
    let u = unit.sub(&f.scale(&(1.0 / c)))?;
    let max_steps = 4 * oracle.radius() as usize + 64;
    let mut term = unit.scale(&(1.0 / c));
    let mut sum = term.clone();
    let mut refinement = Vec::new();
    let mut best: Option<(RingElement<f64>, f64)> = None;
    let mut stale = 0usize;
    for step in 0..max_steps {
        let (next, dropped) = truncate_to_ball(&term.convolve(&u)?, oracle)?;
        term = next;
        sum = sum.add(&term)?;
        let check_now = sum.support_size() <= 30_000 || step % 5 == 4 || term.is_zero();
        if check_now {
            let delta = residual_of(&sum, f)?;
            refinement.push(RefineStep {
                residual: delta,
                slack: dropped * f.norm_l1_f64(),
            });
            let improved = best.as_ref().is_none_or(|(_, b)| delta < *b * 0.9999);
            if improved {
                best = Some((sum.clone(), delta));
                stale = 0;
            } else {
                stale += 1;
            }
            if delta <= target || term.is_zero() {
                break;
            }
            if stale >= 8 {
                break;
            }
        }
    }
    match best {
        Some((g, _)) => finish_certified(f, g, oracle, Route::Neumann, refinement),
        None => Ok(InvertibilityCertificate::unknown(refinement, None)),
    }
}

fn seed_modulus(rank: usize, f: &RingElement<f64>, dense_cap: u64) -> u64 {
    let max_coord = f
        .terms()
        .keys()
        .flat_map(|g| g.coords().iter().map(|c| c.unsigned_abs()))
        .max()
        .unwrap_or(0);
    let mut m: u64 = match rank {
        1 => 256,
        2 => 64,
        3 => 16,
        _ => 8,
    };
    let need = 2 * max_coord + 2;
    while m < need {
        m *= 2;
    }
    while m > 4 && (m as u128).pow(rank as u32) > dense_cap as u128 {
        m /= 2;
    }
    m
}

fn centered_lift(q: &FiniteQuotient, residue: &GroupElement) -> GroupElement {
    let coords = residue
        .coords()
        .iter()
        .zip(q.coord_moduli())
        .map(|(&c, &m)| if 2 * c < m as i64 { c } else { c - m as i64 })
        .collect();
    GroupElement::new(coords)
}

/// Seed from a finite quotient: solve rho_{f^(n)} on e(1-bar) for the left
/// inverse coefficients and lift each residue to its centered representative.
fn quotient_seed(
    f: &RingElement<f64>,
    oracle: &BallOracle,
    dense_cap: u64,
) -> Result<Option<RingElement<f64>>> {
    let group = f.group().clone();
    let descriptor = match &group {
        Group::Ambient(d) => d.clone(),
        Group::Quotient(_) => {
            return Err(Error::Parameter(
                "certification runs over ambient groups".into(),
            ))
        }
    };
    let m = seed_modulus(descriptor.rank(), f, dense_cap);
    let q = FiniteQuotient::congruence(&descriptor, m, dense_cap)?;
    let fq = fibre_integrate(f, &q)?;
    // Coefficients of the left inverse are row 0 of M_f^{-1}, i.e. the
    // solution of M_f^T y = e_0; and M_f^T is the matrix of (f^(n))^*.
    let op = QuotientOperator::from_element(&fq.involute(), dense_cap)?;
    let n = op.order();
    let mut e0 = vec![0.0; n];
    e0[q.identity_index()] = 1.0;
    let Some(y) = lu::solve(op.rows(), n, &e0)? else {
        return Ok(None);
    };
    let ymax = y.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let terms = y.iter().enumerate().filter_map(|(j, &v)| {
        if v.abs() > 1e-16 * ymax {
            Some((centered_lift(&q, q.element(j)), v))
        } else {
            None
        }
    });
    let raw = RingElement::from_terms(group, terms.collect::<Vec<_>>())?;
    let (seed, _) = truncate_to_ball(&raw, oracle)?;
    Ok(Some(seed))
}

fn certify_newton(
    f: &RingElement<f64>,
    target: f64,
    oracle: &BallOracle,
    dense_cap: u64,
) -> Result<InvertibilityCertificate> {
    let Some(mut g) = quotient_seed(f, oracle, dense_cap)? else {
        return Ok(InvertibilityCertificate::unknown(Vec::new(), None));
    };
    let group = f.group().clone();
    let unit = RingElement::basis(group.clone(), group.identity())?;
    let two_e = unit.scale(&2.0);
    let norm_f = f.norm_l1_f64();
    let mut delta = residual_of(&g, f)?;
    let mut refinement = vec![RefineStep {
        residual: delta,
        slack: 0.0,
    }];
    let mut best = (g.clone(), delta);
    for _ in 0..40 {
        if delta <= target {
            break;
        }
        let s = two_e.sub(&f.convolve(&g)?)?;
        let (next, dropped) = truncate_to_ball(&g.convolve(&s)?, oracle)?;
        let next_delta = residual_of(&next, f)?;
        refinement.push(RefineStep {
            residual: next_delta,
            slack: dropped * norm_f,
        });
        if !next_delta.is_finite() || next_delta >= delta {
            break;
        }
        g = next;
        delta = next_delta;
        if delta < best.1 {
            best = (g.clone(), delta);
        }
    }
    if best.1 < 1.0 {
        finish_certified(f, best.0, oracle, Route::QuotientNewton, refinement)
    } else {
        Ok(InvertibilityCertificate::unknown(refinement, Some(best)))
    }
}

/// Searches for a truncated candidate g with ||e(1) - g*f||_1 < 1 within the
/// given word-ball radius. The candidate comes from the dominant-coefficient
/// Neumann series when |f_1| exceeds the off-identity l1 mass, otherwise from
/// a quotient-lifted seed refined by Newton steps g <- g(2e - fg) with ball
/// truncation. Refinement continues until the residual reaches
/// `target_residual` or the radius cap binds; a candidate with residual < 1
/// still certifies.
pub fn certify_invertible(
    f: &RingElement<f64>,
    target_residual: f64,
    max_radius: u32,
) -> Result<InvertibilityCertificate> {
    certify_invertible_with(
        f,
        target_residual,
        max_radius,
        BALL_CAP,
        crate::transfer::DENSE_CAP,
    )
}

pub fn certify_invertible_with(
    f: &RingElement<f64>,
    target_residual: f64,
    max_radius: u32,
    ball_cap: usize,
    dense_cap: u64,
) -> Result<InvertibilityCertificate> {
    if f.is_zero() {
        return Err(Error::Parameter("cannot certify the zero element".into()));
    }
    if !(target_residual > 0.0 && target_residual < 1.0) {
        return Err(Error::Parameter(
            "target residual must lie strictly between 0 and 1".into(),
        ));
    }
    let oracle = BallOracle::new(f.group().descriptor(), max_radius, ball_cap)?;
    let c = f.trace();
    let off_mass = f.norm_l1_f64() - c.abs();
    if c != 0.0 && c.abs() > off_mass {
        certify_neumann(f, target_residual, &oracle)
    } else {
        certify_newton(f, target_residual, &oracle, dense_cap)
    }
}

/// Integer-exact singular-quotient scan: a level with det rho_{f^(n)} = 0
/// witnesses non-invertibility of f in L^1 (the quotient operator of an
/// invertible element is invertible with uniformly bounded inverse).
pub fn detect_noninvertible(
    f: &RingElement<BigInt>,
    chain: &QuotientChain,
    dense_cap: u64,
) -> Result<InvertibilityCertificate> {
    use num_traits::Zero;
    for q in chain.levels() {
        if q.order() > dense_cap {
            break;
        }
        let fq = fibre_integrate(f, q)?;
        let op = QuotientOperator::from_element(&fq, dense_cap)?;
        let n = op.order();
        let det = bareiss::det_bigint(op.into_data(), n);
        if det.is_zero() {
            return Ok(InvertibilityCertificate {
                verdict: Verdict::NonInvertibleCertified,
                approx_inverse: None,
                residual: None,
                tail_bound: None,
                support_radius: None,
                route: None,
                witness: Some(Arc::clone(q)),
                refinement: Vec::new(),
            });
        }
    }
    Ok(InvertibilityCertificate::unknown(Vec::new(), None))
}

fn inverse_from_certificate(cert: &InvertibilityCertificate) -> Result<TruncatedInverse> {
    match (&cert.approx_inverse, cert.residual, cert.tail_bound) {
        (Some(g), Some(d), Some(t)) => Ok(TruncatedInverse {
            element: g.clone(),
            tail_bound: t,
            residual: d,
        }),
        _ => Err(Error::Precondition(
            "certificate does not certify invertibility".into(),
        )),
    }
}

/// Truncated w_f = f^{-1} with certified l1 tail <= tail_target, refined
/// inside the radius cap. Errors with the best achieved bound when the
/// target is unreachable.
pub fn l1_inverse(
    f: &RingElement<f64>,
    tail_target: f64,
    max_radius: u32,
) -> Result<TruncatedInverse> {
    let inv = l1_inverse_best_effort(f, tail_target, max_radius)?;
    if inv.tail_bound <= tail_target {
        Ok(inv)
    } else {
        Err(Error::TailUnreachable {
            target: tail_target,
            achieved: inv.tail_bound,
        })
    }
}

/// Same refinement as [`l1_inverse`] but returns the best truncation found
/// even when the tail target is out of reach at this radius.
pub fn l1_inverse_best_effort(
    f: &RingElement<f64>,
    tail_target: f64,
    max_radius: u32,
) -> Result<TruncatedInverse> {
    let cert = certify_invertible(f, (tail_target * 0.25).clamp(1e-300, 0.5), max_radius)?;
    if cert.verdict != Verdict::InvertibleCertified {
        return Err(Error::Precondition(
            "l1_inverse requires a certified-invertible element".into(),
        ));
    }
    let first = inverse_from_certificate(&cert)?;
    if first.tail_bound <= tail_target {
        return Ok(first);
    }
    // The tail bound is ||g|| delta / (1 - delta); retry with the residual
    // target rescaled by the now-known ||g||.
    let norm_g = first.element.norm_l1_f64().max(1.0);
    let retry_target = (tail_target / (4.0 * norm_g)).clamp(1e-300, 0.5);
    let cert2 = certify_invertible(f, retry_target, max_radius)?;
    let second = inverse_from_certificate(&cert2)?;
    if second.tail_bound < first.tail_bound {
        Ok(second)
    } else {
        Ok(first)
    }
}

/// Shell maxima of |w_gamma| over word-metric spheres, with the least-squares
/// slope of log(max) against the radius.
#[derive(Debug, Clone)]
pub struct DecayProfile {
    pub shells: Vec<(u32, f64)>,
    /// Fitted slope of ln(shell max) per unit radius.
    pub rate: f64,
    pub intercept: f64,
    /// RMS residual of the linear fit.
    pub fit_residual: f64,
}

pub fn decay_profile(w: &RingElement<f64>, ball_cap: usize) -> Result<DecayProfile> {
    let descriptor = match w.group() {
        Group::Ambient(d) => d.clone(),
        Group::Quotient(_) => {
            return Err(Error::Parameter(
                "decay profiles are defined over the ambient group".into(),
            ))
        }
    };
    let support: BTreeSet<GroupElement> = w.terms().keys().cloned().collect();
    if support.is_empty() {
        return Err(Error::InsufficientData("zero element has no shells".into()));
    }
    let lengths = crate::group::word_lengths_of(&descriptor, &support, ball_cap)?;
    let mut shells: std::collections::BTreeMap<u32, f64> = std::collections::BTreeMap::new();
    for (g, c) in w.terms() {
        let r = lengths[g];
        let entry = shells.entry(r).or_insert(0.0);
        *entry = entry.max(c.abs());
    }
    let shells: Vec<(u32, f64)> = shells.into_iter().collect();
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|(r, m)| (*r as f64, m.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 nonempty shells, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - rate * sx) / n;
    let ss: f64 = pts
        .iter()
        .map(|(x, y)| {
            let e = y - (intercept + rate * x);
            e * e
        })
        .sum();
    Ok(DecayProfile {
        shells,
        rate,
        intercept,
        fit_residual: (ss / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupDescriptor;

    fn z_group() -> Group {
        Group::Ambient(GroupDescriptor::FreeAbelian(1))
    }

    fn el(k: i64) -> GroupElement {
        GroupElement::new(vec![k])
    }

    fn zf(pairs: &[(i64, f64)]) -> RingElement<f64> {
        RingElement::from_terms(z_group(), pairs.iter().map(|&(k, c)| (el(k), c))).unwrap()
    }

    fn zi(pairs: &[(i64, i64)]) -> RingElement<BigInt> {
        RingElement::from_terms(
            z_group(),
            pairs.iter().map(|&(k, c)| (el(k), BigInt::from(c))),
        )
        .unwrap()
    }

    fn heis_f() -> RingElement<f64> {
        let g = Group::Ambient(GroupDescriptor::Heisenberg3);
        RingElement::from_terms(
            g,
            [
                (GroupElement::new(vec![0, 0, 0]), 5.0),
                (GroupElement::new(vec![1, 0, 0]), -1.0),
                (GroupElement::new(vec![-1, 0, 0]), -1.0),
                (GroupElement::new(vec![0, 1, 0]), -1.0),
                (GroupElement::new(vec![0, -1, 0]), -1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn neumann_certifies_two_minus_x() {
        let f = zf(&[(0, 2.0), (1, -1.0)]);
        let cert = certify_invertible(&f, 2f64.powi(-10), 64).unwrap();
        assert_eq!(cert.verdict, Verdict::InvertibleCertified);
        let g = cert.approx_inverse.as_ref().unwrap();
        // Partial geometric series: coefficient 2^{-(k+1)} at x^k.
        assert_eq!(g.coeff(&el(0)), 0.5);
        assert_eq!(g.coeff(&el(3)), 2f64.powi(-4));
        assert!((cert.residual.unwrap() - 2f64.powi(-10)).abs() < 1e-18);
    }

    #[test]
    fn scalar_has_exact_inverse() {
        let f = zf(&[(0, 2.0)]);
        let cert = certify_invertible(&f, 1e-12, 8).unwrap();
        assert_eq!(cert.verdict, Verdict::InvertibleCertified);
        assert_eq!(cert.residual.unwrap(), 0.0);
        let g = cert.approx_inverse.unwrap();
        assert_eq!(g.coeff(&el(0)), 0.5);
        assert_eq!(g.support_size(), 1);
    }

    #[test]
    fn heisenberg_laplacian_certifies_with_unit_inverse_norm() {
        let f = heis_f();
        let cert = certify_invertible(&f, 1e-8, 12).unwrap();
        assert_eq!(cert.verdict, Verdict::InvertibleCertified);
        assert_eq!(cert.route, Some(Route::Neumann));
        let g = cert.approx_inverse.unwrap();
        // Neumann bound: ||f^{-1}||_1 <= (1/5) / (1 - 4/5) = 1.
        assert!(g.norm_l1_f64() <= 1.0 + 1e-9);
        assert!(cert.residual.unwrap() < 1e-2);
    }

    #[test]
    fn newton_route_certifies_squared_element() {
        // (2 - x)^2 = 4 - 4x + x^2 has no dominant coefficient.
        let f = zf(&[(0, 4.0), (1, -4.0), (2, 1.0)]);
        let cert = certify_invertible(&f, 1e-10, 64).unwrap();
        assert_eq!(cert.verdict, Verdict::InvertibleCertified);
        assert_eq!(cert.route, Some(Route::QuotientNewton));
        assert!(cert.residual.unwrap() < 1e-10);
        // True inverse has positive coefficients summing to 1.
        let g = cert.approx_inverse.unwrap();
        assert!((g.norm_l1_f64() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_target_rejected() {
        let f = zf(&[(0, 2.0), (1, -1.0)]);
        assert!(certify_invertible(&f, 0.0, 8).is_err());
        assert!(certify_invertible(&f, 1.5, 8).is_err());
    }

    #[test]
    fn singular_quotient_witnesses_noninvertibility() {
        let f = zi(&[(0, 1), (1, -1)]);
        let chain =
            QuotientChain::congruence(&GroupDescriptor::FreeAbelian(1), &[2, 4], 100).unwrap();
        let cert = detect_noninvertible(&f, &chain, 8192).unwrap();
        assert_eq!(cert.verdict, Verdict::NonInvertibleCertified);
        assert_eq!(cert.witness.unwrap().order(), 2);
    }

    #[test]
    fn invertible_element_stays_unknown_under_detection() {
        let f = zi(&[(0, 2), (1, -1)]);
        let chain =
            QuotientChain::congruence(&GroupDescriptor::FreeAbelian(1), &[2, 4, 8], 100).unwrap();
        let cert = detect_noninvertible(&f, &chain, 8192).unwrap();
        assert_eq!(cert.verdict, Verdict::Unknown);
    }

    #[test]
    fn zero_element_is_singular_everywhere() {
        let f = RingElement::<BigInt>::zero(z_group());
        let chain = QuotientChain::congruence(&GroupDescriptor::FreeAbelian(1), &[2], 100).unwrap();
        let cert = detect_noninvertible(&f, &chain, 8192).unwrap();
        assert_eq!(cert.verdict, Verdict::NonInvertibleCertified);
    }

    #[test]
    fn l1_inverse_geometric_tail() {
        let f = zf(&[(0, 2.0), (1, -1.0)]);
        let inv = l1_inverse(&f, 1e-6, 64).unwrap();
        assert!(inv.tail_bound <= 1e-6);
        // Exact binary coefficients of the geometric series.
        assert_eq!(inv.element.coeff(&el(0)), 0.5);
        assert_eq!(inv.element.coeff(&el(5)), 2f64.powi(-6));
        // Residual of the defining relation stays within tail * ||f||_1.
        let unit = RingElement::basis(z_group(), el(0)).unwrap();
        let err = unit
            .sub(&inv.element.convolve(&f).unwrap())
            .unwrap()
            .norm_l1_f64();
        assert!(err <= inv.tail_bound * f.norm_l1_f64() + 1e-15);
    }

    #[test]
    fn l1_inverse_scalar_exact() {
        let f = zf(&[(0, 2.0)]);
        let inv = l1_inverse(&f, 1e-12, 8).unwrap();
        assert_eq!(inv.tail_bound, 0.0);
        assert_eq!(inv.element.coeff(&el(0)), 0.5);
    }

    #[test]
    fn l1_inverse_symmetric_laplacian_norm_bound() {
        let f = zf(&[(0, 3.0), (1, -1.0), (-1, -1.0)]);
        let inv = l1_inverse(&f, 1e-10, 64).unwrap();
        // Neumann bound (1/3) / (1 - 2/3) = 1.
        assert!(inv.element.norm_l1_f64() <= 1.0 + 1e-9);
    }

    #[test]
    fn tail_unreachable_reports_best() {
        let f = heis_f();
        let err = l1_inverse(&f, 1e-12, 8).unwrap_err();
        match err {
            Error::TailUnreachable { achieved, .. } => assert!(achieved > 1e-12),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn decay_rate_of_geometric_inverse() {
        let f = zf(&[(0, 2.0), (1, -1.0)]);
        let inv = l1_inverse(&f, 1e-10, 64).unwrap();
        let profile = decay_profile(&inv.element, BALL_CAP).unwrap();
        assert!((profile.rate + std::f64::consts::LN_2).abs() < 1e-3);
        assert!(profile.fit_residual < 1e-6);
    }

    #[test]
    fn single_shell_is_insufficient() {
        let w = zf(&[(0, 1.0)]);
        assert!(matches!(
            decay_profile(&w, BALL_CAP),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn certify_and_detect_never_both_certify() {
        let catalog: Vec<(RingElement<f64>, RingElement<BigInt>)> = vec![
            (zf(&[(0, 2.0), (1, -1.0)]), zi(&[(0, 2), (1, -1)])),
            (zf(&[(0, 1.0), (1, -1.0)]), zi(&[(0, 1), (1, -1)])),
            (
                zf(&[(0, 3.0), (1, -1.0), (-1, -1.0)]),
                zi(&[(0, 3), (1, -1), (-1, -1)]),
            ),
        ];
        let chain =
            QuotientChain::congruence(&GroupDescriptor::FreeAbelian(1), &[2, 4, 8], 100).unwrap();
        for (ff, fi) in catalog {
            let pos = certify_invertible(&ff, 1e-10, 48).unwrap();
            let neg = detect_noninvertible(&fi, &chain, 8192).unwrap();
            assert!(
                !(pos.verdict == Verdict::InvertibleCertified
                    && neg.verdict == Verdict::NonInvertibleCertified),
                "both tracks certified the same element"
            );
        }
    }
}
