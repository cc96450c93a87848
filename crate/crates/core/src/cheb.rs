//! Log-determinants via polynomial approximation of log on a spectral
//! interval and the identity-coefficient trace.
//!
//! For self-adjoint positive g = f f* the spectra of rho_g and of every
//! quotient operator rho_{g^(n)} lie in [1/||g^{-1}||_1, ||g||_1], so one
//! Chebyshev approximation Q of log on that interval serves all levels:
//! tr log(g^(n)) is within sup|log - Q| of sum_k c_k tr T_k(g-bar^(n)),
//! and each trace is the plain identity coefficient. Cost scales with
//! support sizes, never with the square of the group order, which is what
//! lets this run past the dense cap and directly on the infinite group.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::group::{BallOracle, Group};
use crate::invert::InvertibilityCertificate;
use crate::quotient::{verify_chain_separation, FiniteQuotient, QuotientChain};
use crate::ring::{eval_int_poly, Coeff, RingElement};
use crate::transfer::fibre_integrate;

/// A certified enclosure [a, b] of the spectra of rho_g and all rho_{g^(n)}.
#[derive(Debug, Clone, Copy)]
pub struct SpectralInterval {
    pub a: f64,
    pub b: f64,
}

impl SpectralInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Parameter(format!(
                "spectral interval needs 0 < a <= b, got [{a}, {b}]"
            )));
        }
        // Degenerate [a, a] widened by a relative 1e-12 to keep the affine
        // map to [-1, 1] well defined.
        let a = if a >= b { b * (1.0 - 1e-12) } else { a };
        Ok(SpectralInterval { a, b })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.b - self.a)
    }
}

/// Interval for g = f f* from f's certificate: b = ||g||_1 and
/// a = (||w_f||_1 + tail)^{-2} <= 1/||g^{-1}||_1, since
/// ||g^{-1}||_1 = ||(f^{-1})* f^{-1}||_1 <= ||f^{-1}||_1^2.
pub fn spectral_interval(
    g: &RingElement<f64>,
    factor_cert: &InvertibilityCertificate,
) -> Result<SpectralInterval> {
    let (Some(w), Some(tau)) = (&factor_cert.approx_inverse, factor_cert.tail_bound) else {
        return Err(Error::Precondition(
            "spectral_interval needs a certificate of invertibility for the factor".into(),
        ));
    };
    let gs = g.involute();
    let asym = g.sub(&gs)?.norm_l1_f64();
    if asym > 1e-9 * (1.0 + g.norm_l1_f64()) {
        return Err(Error::Precondition(
            "spectral_interval expects a self-adjoint element (g = f f*)".into(),
        ));
    }
    let inv_norm_bound = (w.norm_l1_f64() + tau).powi(2);
    SpectralInterval::new(1.0 / inv_norm_bound, g.norm_l1_f64())
}

/// Chebyshev approximation of log on a spectral interval, with a sampled and
/// safety-factored certificate of the sup error.
#[derive(Debug, Clone)]
pub struct LogPolynomial {
    pub degree: usize,
    /// Chebyshev coefficients c_0..c_d on the interval mapped to [-1, 1].
    pub coeffs: Vec<f64>,
    pub interval: SpectralInterval,
    /// Certified bound on sup_{t in I} |log t - Q(t)|.
    pub sup_error: f64,
}

impl LogPolynomial {
    /// Clenshaw evaluation of Q at a scalar t in the interval.
    pub fn eval(&self, t: f64) -> f64 {
        let s = (t - self.interval.midpoint()) / self.interval.half_width();
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * s * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + s * b1 - b2
    }
}

/// Coefficients by cosine quadrature at the Chebyshev nodes; the sup error is
/// certified by dense sampling (10 d + 1 points) times a safety factor 2.
pub fn chebyshev_log(interval: SpectralInterval, degree: usize) -> Result<LogPolynomial> {
    if degree < 1 {
        return Err(Error::Parameter("degree must be >= 1".into()));
    }
    let n = degree + 1;
    let mid = interval.midpoint();
    let hw = interval.half_width();
    let samples: Vec<f64> = (0..n)
        .map(|j| {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
            (mid + hw * theta.cos()).ln()
        })
        .collect();
    let mut coeffs = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = 0.0;
        for (j, &fj) in samples.iter().enumerate() {
            acc += fj * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
        }
        let scale = if k == 0 { 1.0 } else { 2.0 };
        coeffs.push(scale * acc / n as f64);
    }
    let mut poly = LogPolynomial {
        degree,
        coeffs,
        interval,
        sup_error: f64::INFINITY,
    };
    let m = 10 * degree + 1;
    let mut worst = 0.0f64;
    for i in 0..m {
        let t = interval.a + (interval.b - interval.a) * i as f64 / (m - 1).max(1) as f64;
        worst = worst.max((t.ln() - poly.eval(t)).abs());
    }
    poly.sup_error = 2.0 * worst;
    Ok(poly)
}

/// The von Neumann trace as the identity coefficient; on a finite quotient
/// this equals (1/|G|) times the dense matrix trace.
pub fn trace_identity_coeff<S: Coeff>(h: &RingElement<S>) -> S {
    h.trace()
}

#[derive(Debug, Clone)]
pub struct ChebEstimate {
    pub value: f64,
    /// Half the sup error, plus the weighted truncation slack in direct mode.
    pub error_bar: f64,
    pub degree: usize,
    pub sup_error: f64,
    /// sum_k |c_k| slack_k from direct-mode ball truncation (zero in
    /// quotient mode).
    pub truncation_term: f64,
}

const NORM_GUARD: f64 = 1e100;

fn cheb_trace_sum(
    g_bar: &RingElement<f64>,
    poly: &LogPolynomial,
    truncation: Option<(&BallOracle, f64)>,
) -> Result<(f64, f64)> {
    let group = g_bar.group().clone();
    let unit = RingElement::basis(group.clone(), group.identity())?;
    let norm_gbar = g_bar.norm_l1_f64();
    let mut acc = 0.5 * poly.coeffs[0]; // tr T_0 = 1
    let mut slack_weighted = 0.0f64;
    let mut t_prev = unit; // T_0
    let mut t_cur = g_bar.clone(); // T_1
    let mut s_prev = 0.0f64;
    let mut s_cur = 0.0f64;
    if let Some((oracle, norm_f)) = truncation {
        let _ = norm_f;
        // T_1 = g-bar may already poke outside the ball.
        let (t, dropped) = truncate(&t_cur, oracle)?;
        t_cur = t;
        s_cur = dropped;
    }
    if poly.coeffs.len() > 1 {
        acc += 0.5 * poly.coeffs[1] * t_cur.trace();
        slack_weighted += poly.coeffs[1].abs() * s_cur;
    }
    for k in 2..=poly.degree {
        let mut t_next = g_bar.convolve(&t_cur)?.scale(&2.0).sub(&t_prev)?;
        let mut s_next = 2.0 * norm_gbar * s_cur + s_prev;
        if let Some((oracle, _)) = truncation {
            let (t, dropped) = truncate(&t_next, oracle)?;
            t_next = t;
            s_next += dropped;
        }
        if t_next.norm_l1_f64() > NORM_GUARD {
            return Err(Error::RecurrenceOverflow(format!(
                "Chebyshev recurrence norm exceeded {NORM_GUARD:e} at degree {k}; \
                 the spectral interval is likely invalid"
            )));
        }
        acc += 0.5 * poly.coeffs[k] * t_next.trace();
        slack_weighted += poly.coeffs[k].abs() * s_next;
        t_prev = t_cur;
        t_cur = t_next;
        s_prev = s_cur;
        s_cur = s_next;
    }
    Ok((acc, slack_weighted))
}

fn truncate(el: &RingElement<f64>, oracle: &BallOracle) -> Result<(RingElement<f64>, f64)> {
    let mut dropped = 0.0f64;
    let kept: Vec<_> = el
        .terms()
        .iter()
        .filter_map(|(g, c)| {
            if oracle.contains(g) {
                Some((g.clone(), *c))
            } else {
                dropped += c.abs();
                None
            }
        })
        .collect();
    Ok((RingElement::from_terms(el.group().clone(), kept)?, dropped))
}

fn rescale_to_interval(
    g: &RingElement<f64>,
    interval: &SpectralInterval,
) -> Result<RingElement<f64>> {
    let unit = RingElement::basis(g.group().clone(), g.group().identity())?;
    let shifted = g.sub(&unit.scale(&interval.midpoint()))?;
    Ok(shifted.scale(&(1.0 / interval.half_width())))
}

/// Quotient-mode estimate of (1/2) tr log(g^(n)) for g = f f*: the Chebyshev
/// recurrence runs on quotient-ring elements, extracting only identity
/// coefficients.
pub fn entropy_cheb_quotient(
    f: &RingElement<f64>,
    q: &Arc<FiniteQuotient>,
    poly: &LogPolynomial,
) -> Result<ChebEstimate> {
    let g = f.convolve(&f.involute())?;
    let gq = fibre_integrate(&g, q)?;
    let g_bar = rescale_to_interval(&gq, &poly.interval)?;
    let (value, _) = cheb_trace_sum(&g_bar, poly, None)?;
    Ok(ChebEstimate {
        value,
        error_bar: 0.5 * poly.sup_error,
        degree: poly.degree,
        sup_error: poly.sup_error,
        truncation_term: 0.0,
    })
}

/// Direct mode on the infinite group: the recurrence is truncated to the
/// radius-R word ball after every step and the dropped l1 mass is folded
/// into the error bar (|identity coefficient of a perturbation| is at most
/// its l1 mass, amplified through the three-term recurrence).
pub fn entropy_cheb_direct(
    f: &RingElement<f64>,
    radius: u32,
    poly: &LogPolynomial,
    ball_cap: usize,
) -> Result<ChebEstimate> {
    let g = f.convolve(&f.involute())?;
    let descriptor = match g.group() {
        Group::Ambient(d) => d.clone(),
        Group::Quotient(_) => {
            return Err(Error::Parameter(
                "direct mode runs over the ambient group".into(),
            ))
        }
    };
    let oracle = BallOracle::new(&descriptor, radius, ball_cap)?;
    let g_bar = rescale_to_interval(&g, &poly.interval)?;
    let norm_f = f.norm_l1_f64();
    let (value, slack_weighted) = cheb_trace_sum(&g_bar, poly, Some((&oracle, norm_f)))?;
    Ok(ChebEstimate {
        value,
        error_bar: 0.5 * (poly.sup_error + slack_weighted),
        degree: poly.degree,
        sup_error: poly.sup_error,
        truncation_term: slack_weighted,
    })
}

/// Per-degree diagnostics of the doubling loop.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ChebDiagnostic {
    pub degree: usize,
    pub sup_error: f64,
    pub slack: f64,
    pub estimate: f64,
}

/// Doubles the degree from `start_degree` until the error bar target is met
/// or `max_degree` is reached; returns the last estimate and the per-degree
/// diagnostics.
pub fn entropy_cheb_auto(
    f: &RingElement<f64>,
    q: &Arc<FiniteQuotient>,
    factor_cert: &InvertibilityCertificate,
    bar_target: f64,
    start_degree: usize,
    max_degree: usize,
) -> Result<(ChebEstimate, Vec<ChebDiagnostic>)> {
    let g = f.convolve(&f.involute())?;
    let interval = spectral_interval(&g, factor_cert)?;
    let mut degree = start_degree.max(1);
    let mut diags = Vec::new();
    loop {
        let poly = chebyshev_log(interval, degree)?;
        let est = entropy_cheb_quotient(f, q, &poly)?;
        diags.push(ChebDiagnostic {
            degree,
            sup_error: est.sup_error,
            slack: est.truncation_term,
            estimate: est.value,
        });
        if est.error_bar <= bar_target || degree >= max_degree {
            return Ok((est, diags));
        }
        degree = (degree * 2).min(max_degree);
    }
}

/// Integer trace stabilization along a chain: tr Q(f^(n)) is an integer that
/// equals tr Q(f) once the kernel separates supp(Q(f)) union {1}.
#[derive(Debug, Clone)]
pub struct StabilizationReport {
    /// First level from which the quotient traces all agree with tr Q(f).
    pub level: usize,
    /// Exact trace of Q(f) over the ambient group.
    pub trace: BigInt,
    pub per_level: Vec<BigInt>,
    /// Separation level for supp(Q(f)) union {identity}.
    pub separation_level: usize,
}

pub fn trace_stabilization(
    f: &RingElement<BigInt>,
    q_poly: &[BigInt],
    chain: &QuotientChain,
) -> Result<StabilizationReport> {
    let qf = eval_int_poly(q_poly, f)?;
    let trace = qf.trace();
    let mut per_level = Vec::with_capacity(chain.len());
    for q in chain.levels() {
        let fq = fibre_integrate(f, q)?;
        let qfq = eval_int_poly(q_poly, &fq)?;
        per_level.push(qfq.trace());
    }
    let mut level = None;
    for start in 0..per_level.len() {
        if per_level[start..].iter().all(|t| *t == trace) {
            level = Some(start);
            break;
        }
    }
    let Some(level) = level else {
        return Err(Error::Inconsistent(
            "quotient traces never stabilize within the chain, although separation holds \
             eventually"
                .into(),
        ));
    };
    // The Lemma-style bound requires the window to contain the identity.
    let mut window: std::collections::BTreeSet<_> = qf.terms().keys().cloned().collect();
    window.insert(f.group().identity());
    let separation_level = verify_chain_separation(chain, &window)?;
    if level > separation_level {
        return Err(Error::Inconsistent(format!(
            "trace stabilized at level {level} but separation already holds at \
             {separation_level}"
        )));
    }
    Ok(StabilizationReport {
        level,
        trace,
        per_level,
        separation_level,
    })
}
