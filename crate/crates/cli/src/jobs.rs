//! Subcommand runners: each builds its inputs from the job config, runs the
//! pipeline, and returns a deterministic JSON document plus a one-line
//! summary and the scriptable exit code.

use std::collections::BTreeSet;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;

use algact_core::cheb::ChebDiagnostic;
use algact_core::invert::default_radius_cap;
use algact_core::linalg::log_biguint;
use algact_core::report::{BracketSnapshot, EntropyReport, LevelRow, MethodTag};
use algact_core::Group;
use algact_core::{
    certify_invertible_with, decay_profile, detect_noninvertible, entropy_bounds,
    entropy_cheb_auto, entropy_converge, fixed_points_exact, l1_inverse_best_effort,
    mahler_quadrature, specification_glue, wiener_invertibility, CertificateSnapshot, Convergence,
    FiniteQuotient, FixCount, GroupDescriptor, GroupElement, InvertibilityCertificate,
    QuotientChain, RingElement, StopRule, TorusPoint, TorusPolynomial, Verdict, WienerVerdict,
};

use crate::config::{
    build_element, word_element, ElementData, JobConfig, MethodName, SpecConfig, Tolerances,
};

/// Exit codes: 0 success, 2 nonexpansive verdict, 3 unknown-invertibility
/// advisory, 1 error (by process convention).
pub const EXIT_OK: i32 = 0;
pub const EXIT_NONEXPANSIVE: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Debug)]
pub struct RunOutcome {
    pub summary: String,
    pub json: String,
    pub csv: Option<String>,
    pub exit: i32,
}

struct JobInputs {
    desc: GroupDescriptor,
    f: ElementData,
    tol: Tolerances,
}

fn prepare(cfg: &JobConfig) -> anyhow::Result<JobInputs> {
    let desc = cfg.group.descriptor()?;
    let f = build_element(&desc, &cfg.f)?;
    Ok(JobInputs {
        desc,
        f,
        tol: cfg.tolerances(),
    })
}

fn radius(desc: &GroupDescriptor, tol: &Tolerances) -> u32 {
    tol.max_radius
        .unwrap_or_else(|| default_radius_cap(&Group::Ambient(desc.clone())))
}

fn certify(inputs: &JobInputs) -> anyhow::Result<(RingElement<f64>, InvertibilityCertificate)> {
    let ff = inputs.f.to_float();
    let cert = certify_invertible_with(
        &ff,
        inputs.tol.target_residual,
        radius(&inputs.desc, &inputs.tol),
        inputs.tol.ball_cap,
        inputs.tol.dense_cap,
    )?;
    Ok((ff, cert))
}

fn quotients(
    desc: &GroupDescriptor,
    moduli: &[u64],
) -> anyhow::Result<Vec<std::sync::Arc<FiniteQuotient>>> {
    moduli
        .iter()
        .map(|&m| {
            FiniteQuotient::congruence(desc, m, algact_core::quotient::QUOTIENT_ELEMENT_CAP)
                .map_err(Into::into)
        })
        .collect()
}

/// The main pipeline: certify, then per-level entropy by the requested
/// methods, then the oracle rows, all assembled into one report.
pub fn run_entropy(cfg: &JobConfig) -> anyhow::Result<RunOutcome> {
    let inputs = prepare(cfg)?;
    let moduli = cfg
        .chain
        .as_ref()
        .ok_or_else(|| anyhow!("field `chain`: the entropy pipeline needs a quotient chain"))?;
    let methods = cfg
        .methods
        .clone()
        .unwrap_or_else(|| vec![MethodName::Dense]);
    let tol = &inputs.tol;
    let levels = quotients(&inputs.desc, moduli)?;
    let (ff, cert) = certify(&inputs)?;

    let mut rows: Vec<LevelRow> = Vec::new();
    let mut walls: Vec<f64> = Vec::new();
    let mut advisory: Option<String> = None;
    let mut exact_counts: Vec<(u64, num_bigint::BigUint)> = Vec::new();
    let mut cheb_diagnostics: Vec<ChebDiagnostic> = Vec::new();
    let mut exit = EXIT_OK;
    let mut bracket: Option<BracketSnapshot> = None;
    let mut cauchy_fired = None;
    let mut final_estimate = None;
    let mut cert_snapshot = CertificateSnapshot::from(&cert);

    match cert.verdict {
        Verdict::NonInvertibleCertified => unreachable!("certify never returns this verdict"),
        Verdict::Unknown => {
            // Second track: an exactly singular level certifies
            // non-expansiveness.
            if let Some(fi) = inputs.f.as_int() {
                let chain = QuotientChain::new(levels.clone())
                    .context("field `chain`: singular-quotient detection needs a valid chain")?;
                let det = detect_noninvertible(fi, &chain, tol.dense_cap)?;
                if det.verdict == Verdict::NonInvertibleCertified {
                    let witness_order = det.witness.as_ref().map(|q| q.order()).unwrap_or(0);
                    let report = EntropyReport {
                        group: format!("{:?}", inputs.desc),
                        rows: Vec::new(),
                        bracket: None,
                        final_estimate: None,
                        cauchy_fired: None,
                        advisory: Some(format!(
                            "nonexpansive: singular quotient operator at order {witness_order}"
                        )),
                        certificate: CertificateSnapshot::from(&det),
                        cheb_diagnostics: Vec::new(),
                    };
                    return Ok(RunOutcome {
                        summary: format!(
                            "nonexpansive (singular quotient of order {witness_order}); no entropy"
                        ),
                        json: report.to_json(),
                        csv: Some(report.to_csv(&[])),
                        exit: EXIT_NONEXPANSIVE,
                    });
                }
            }
            // Advisory mode: only counting methods, flagged loudly.
            exit = EXIT_UNKNOWN;
            advisory = Some(
                "invertibility unknown: values below are fixed-point counts only and carry \
                 no entropy guarantee"
                    .into(),
            );
            let chain = QuotientChain::new(levels.clone())?;
            let conv = entropy_converge(
                &ff,
                &chain,
                StopRule {
                    max_levels: tol.max_levels,
                    cauchy_tol: tol.cauchy_tol,
                },
                false,
                tol.dense_cap,
            )?;
            push_dense(&mut rows, &mut walls, &conv);
            if let Some(fi) = inputs.f.as_int() {
                exact_counts = push_exact(&mut rows, &mut walls, fi, &levels, tol, false)?;
            }
        }
        Verdict::InvertibleCertified => {
            let b = entropy_bounds(&ff, &cert, tol.power_iters)?;
            bracket = Some(BracketSnapshot::from(&b));
            for method in &methods {
                match method {
                    MethodName::Dense => {
                        let chain = QuotientChain::new(levels.clone())
                            .context("field `chain`: the dense method needs divisible moduli")?;
                        let conv = entropy_converge(
                            &ff,
                            &chain,
                            StopRule {
                                max_levels: tol.max_levels,
                                cauchy_tol: tol.cauchy_tol,
                            },
                            true,
                            tol.dense_cap,
                        )?;
                        cauchy_fired = Some(conv.cauchy_fired);
                        final_estimate = conv.final_estimate;
                        push_dense(&mut rows, &mut walls, &conv);
                    }
                    MethodName::Exact => {
                        exact_counts = push_exact(
                            &mut rows,
                            &mut walls,
                            inputs.f.as_int().ok_or_else(|| {
                                anyhow!("method `exact` needs integer coefficients")
                            })?,
                            &levels,
                            tol,
                            true,
                        )?;
                    }
                    MethodName::Cheb => {
                        for q in &levels {
                            let t0 = Instant::now();
                            let (est, diags) = entropy_cheb_auto(
                                &ff,
                                q,
                                &cert,
                                tol.cheb_bar_target,
                                tol.cheb_degree,
                                tol.cheb_degree_max,
                            )?;
                            walls.push(t0.elapsed().as_secs_f64() * 1e3);
                            rows.push(LevelRow {
                                level_order: q.order(),
                                method: MethodTag::Cheb,
                                value: est.value,
                                error_bar: Some(est.error_bar),
                            });
                            if final_estimate.is_none() {
                                final_estimate = Some(est.value);
                            }
                            cheb_diagnostics.extend(diags);
                        }
                    }
                    MethodName::Mahler => {
                        let t0 = Instant::now();
                        let p = TorusPolynomial::from_ring_element(&ff)
                            .context("method `mahler` runs on free abelian groups only")?;
                        let est = mahler_quadrature(&p, tol.mahler_grid)?;
                        walls.push(t0.elapsed().as_secs_f64() * 1e3);
                        rows.push(LevelRow {
                            level_order: est.grid as u64,
                            method: MethodTag::Mahler,
                            value: est.value,
                            error_bar: Some(est.error_estimate),
                        });
                        if final_estimate.is_none() {
                            final_estimate = Some(est.value);
                        }
                    }
                }
            }
            cert_snapshot = CertificateSnapshot::from(&cert);
        }
    }

    // Cross-flag: an exact count must agree with the dense log-determinant
    // of the same level (the float value within 0.4 of the integer).
    for (order, count) in &exact_counts {
        let Some(dense) = rows
            .iter()
            .find(|r| r.method == MethodTag::Dense && r.level_order == *order)
        else {
            continue;
        };
        let logdet = dense.value * *order as f64;
        if !algact_core::entropy::count_matches_logdet(count, logdet) {
            let flag = format!(
                "flagged: exact count {count} and dense log-determinant {logdet:.6} \
                 disagree at order {order}"
            );
            advisory = Some(match advisory.take() {
                Some(prev) => format!("{prev}; {flag}"),
                None => flag,
            });
        }
    }
    // Level-major row order (stable, so method blocks keep their relative
    // order at equal levels).
    let mut paired: Vec<(LevelRow, f64)> = rows.into_iter().zip(walls).collect();
    paired.sort_by_key(|(r, _)| r.level_order);
    let (rows, walls): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
    let report = EntropyReport {
        group: format!("{:?}", inputs.desc),
        rows,
        bracket,
        final_estimate,
        cauchy_fired,
        advisory: advisory.clone(),
        certificate: cert_snapshot,
        cheb_diagnostics,
    };
    let summary = match (&advisory, final_estimate) {
        (Some(note), _) => format!("advisory: {note}"),
        (None, Some(v)) => format!(
            "entropy estimate {v:.9} over {} row(s); cauchy fired: {}",
            report.rows.len(),
            cauchy_fired.unwrap_or(false)
        ),
        (None, None) => "no rows produced".into(),
    };
    Ok(RunOutcome {
        summary,
        json: report.to_json(),
        csv: Some(report.to_csv(&walls)),
        exit,
    })
}

fn push_dense(rows: &mut Vec<LevelRow>, walls: &mut Vec<f64>, conv: &Convergence) {
    for r in &conv.rows {
        rows.push(LevelRow {
            level_order: r.order,
            method: MethodTag::Dense,
            value: r.value,
            error_bar: None,
        });
        walls.push(r.wall_ms);
    }
}

fn push_exact(
    rows: &mut Vec<LevelRow>,
    walls: &mut Vec<f64>,
    fi: &RingElement<num_bigint::BigInt>,
    levels: &[std::sync::Arc<FiniteQuotient>],
    tol: &Tolerances,
    certified: bool,
) -> anyhow::Result<Vec<(u64, num_bigint::BigUint)>> {
    let mut counts = Vec::new();
    for q in levels {
        if q.order() > tol.exact_cap {
            continue;
        }
        let t0 = Instant::now();
        match fixed_points_exact(fi, q, tol.dense_cap)? {
            FixCount::Finite(c) => {
                rows.push(LevelRow {
                    level_order: q.order(),
                    method: MethodTag::Exact,
                    value: log_biguint(&c) / q.order() as f64,
                    error_bar: None,
                });
                walls.push(t0.elapsed().as_secs_f64() * 1e3);
                counts.push((q.order(), c));
            }
            FixCount::InfiniteFixedGroup => {
                if certified {
                    bail!(
                        "internal inconsistency: singular level of order {} under a \
                         certificate of invertibility",
                        q.order()
                    );
                }
            }
        }
    }
    Ok(counts)
}

#[derive(Serialize)]
struct FixcountRow {
    order: u64,
    count: String,
    log_count_per_order: Option<f64>,
    /// Exact rational coordinates ("2/3") of every fixed point, present for
    /// small levels with at most [`POINT_LIST_CAP`] points.
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<String>>>,
}

/// Point lists are embedded only below this count (and at quotient order
/// <= 64, where the Smith form is cheap).
const POINT_LIST_CAP: u64 = 100;

#[derive(Serialize)]
struct FixcountReport {
    group: String,
    rows: Vec<FixcountRow>,
}

/// Table of exact |Fix_{Gamma_n}(X_f)| along the configured moduli.
pub fn run_fixcount(cfg: &JobConfig) -> anyhow::Result<RunOutcome> {
    use num_bigint::BigUint;
    let inputs = prepare(cfg)?;
    let fi = inputs
        .f
        .as_int()
        .ok_or_else(|| anyhow!("fixcount needs integer coefficients"))?;
    let moduli = cfg
        .chain
        .as_ref()
        .ok_or_else(|| anyhow!("field `chain`: fixcount needs a modulus list"))?;
    let levels = quotients(&inputs.desc, moduli)?;
    let mut rows = Vec::new();
    for q in &levels {
        let row = match fixed_points_exact(fi, q, inputs.tol.dense_cap)? {
            FixCount::Finite(c) => {
                let points = if q.order() <= 64 && c <= BigUint::from(POINT_LIST_CAP) {
                    algact_core::enumerate_fixed_points(
                        fi,
                        q,
                        POINT_LIST_CAP,
                        inputs.tol.dense_cap,
                    )?
                    .finite()
                    .and_then(|g| g.points)
                    .map(|pts| pts.iter().map(|p| p.value_strings()).collect())
                } else {
                    None
                };
                FixcountRow {
                    order: q.order(),
                    log_count_per_order: Some(log_biguint(&c) / q.order() as f64),
                    count: c.to_string(),
                    points,
                }
            }
            FixCount::InfiniteFixedGroup => FixcountRow {
                order: q.order(),
                count: "infinite".into(),
                log_count_per_order: None,
                points: None,
            },
        };
        rows.push(row);
    }
    let summary = format!(
        "fixcount over {} level(s): [{}]",
        rows.len(),
        rows.iter()
            .map(|r| r.count.clone())
            .collect::<Vec<_>>()
            .join(", ")
    );
    let report = FixcountReport {
        group: format!("{:?}", inputs.desc),
        rows,
    };
    Ok(RunOutcome {
        summary,
        json: serde_json::to_string_pretty(&report)?,
        csv: None,
        exit: EXIT_OK,
    })
}

#[derive(Serialize)]
struct InvertReport {
    group: String,
    certificate: CertificateSnapshot,
}

/// Certificate-only pipeline; falls back to singular-quotient detection for
/// integer elements the candidate search cannot certify.
pub fn run_invert(cfg: &JobConfig) -> anyhow::Result<RunOutcome> {
    let inputs = prepare(cfg)?;
    let (_, cert) = certify(&inputs)?;
    let (cert, exit, note) = match cert.verdict {
        Verdict::InvertibleCertified => (cert, EXIT_OK, "invertible (expansive)"),
        _ => {
            if let Some(fi) = inputs.f.as_int() {
                let moduli = cfg.chain.clone().unwrap_or_else(|| vec![2, 4, 8, 16]);
                let chain = QuotientChain::congruence(
                    &inputs.desc,
                    &moduli,
                    algact_core::quotient::QUOTIENT_ELEMENT_CAP,
                )?;
                let det = detect_noninvertible(fi, &chain, inputs.tol.dense_cap)?;
                match det.verdict {
                    Verdict::NonInvertibleCertified => {
                        (det, EXIT_NONEXPANSIVE, "non-invertible (nonexpansive)")
                    }
                    _ => (cert, EXIT_UNKNOWN, "invertibility unknown"),
                }
            } else {
                (cert, EXIT_UNKNOWN, "invertibility unknown")
            }
        }
    };
    let snapshot = CertificateSnapshot::from(&cert);
    let summary = match (&snapshot.residual, &snapshot.tail_bound) {
        (Some(r), Some(t)) => format!("{note}: residual {r:.3e}, tail bound {t:.3e}"),
        _ => note.to_string(),
    };
    let report = InvertReport {
        group: format!("{:?}", inputs.desc),
        certificate: snapshot,
    };
    Ok(RunOutcome {
        summary,
        json: serde_json::to_string_pretty(&report)?,
        csv: None,
        exit,
    })
}

#[derive(Serialize)]
struct MahlerReport {
    group: String,
    verdict: String,
    grid_min: f64,
    certified_lower: f64,
    grid: u32,
    value: Option<f64>,
    refined: Option<f64>,
    error_estimate: Option<f64>,
}

/// Wiener check plus torus quadrature of log |f-hat|.
pub fn run_mahler(cfg: &JobConfig) -> anyhow::Result<RunOutcome> {
    let inputs = prepare(cfg)?;
    let ff = inputs.f.to_float();
    let p = TorusPolynomial::from_ring_element(&ff)
        .context("mahler runs on free abelian groups only")?;
    let wiener = wiener_invertibility(&p, inputs.tol.mahler_grid)?;
    let (value, refined, error_estimate, exit, summary) = match wiener.verdict {
        WienerVerdict::NonvanishingCertified => {
            let est = mahler_quadrature(&p, inputs.tol.mahler_grid)?;
            let s = format!(
                "mahler measure {:.12} (grid {} vs {}: {:.3e})",
                est.value,
                est.grid,
                2 * est.grid,
                est.error_estimate
            );
            (
                Some(est.value),
                Some(est.refined),
                Some(est.error_estimate),
                EXIT_OK,
                s,
            )
        }
        WienerVerdict::GridVanishing => (
            None,
            None,
            None,
            EXIT_NONEXPANSIVE,
            format!(
                "transform vanishes on the grid (min {:.3e}); action is nonexpansive",
                wiener.grid_min
            ),
        ),
        WienerVerdict::Unknown => (
            None,
            None,
            None,
            EXIT_UNKNOWN,
            format!(
                "cannot certify the transform away from zero (grid min {:.3e})",
                wiener.grid_min
            ),
        ),
    };
    let report = MahlerReport {
        group: format!("{:?}", inputs.desc),
        verdict: format!("{:?}", wiener.verdict),
        grid_min: wiener.grid_min,
        certified_lower: wiener.certified_lower,
        grid: wiener.grid,
        value,
        refined,
        error_estimate,
    };
    Ok(RunOutcome {
        summary,
        json: serde_json::to_string_pretty(&report)?,
        csv: None,
        exit,
    })
}

#[derive(Serialize)]
struct SpecdemoReport {
    group: String,
    epsilon: f64,
    f_window: Vec<String>,
    max_deviation: f64,
    residual: f64,
}

fn default_line_window(range: std::ops::RangeInclusive<i64>) -> Vec<Vec<(String, i64)>> {
    range.map(|k| vec![("x".to_string(), k)]).collect()
}

/// Glues the homoclinic point against zero on the configured windows.
pub fn run_specdemo(cfg: &JobConfig) -> anyhow::Result<RunOutcome> {
    let inputs = prepare(cfg)?;
    let fi = inputs
        .f
        .as_int()
        .ok_or_else(|| anyhow!("specdemo needs integer coefficients"))?;
    let spec = cfg.specification.clone().unwrap_or(SpecConfig {
        c1: None,
        c2: None,
        epsilon: None,
    });
    let is_line = matches!(inputs.desc, GroupDescriptor::FreeAbelian(1));
    let (c1_words, c2_words) = match (spec.c1, spec.c2) {
        (Some(a), Some(b)) => (a, b),
        (None, None) if is_line => (default_line_window(-2..=2), default_line_window(10..=14)),
        _ => bail!(
            "field `specification`: c1 and c2 windows are required for this group \
             (defaults exist only on the line)"
        ),
    };
    let epsilon = spec.epsilon.unwrap_or(0.1);
    let to_set =
        |words: &[Vec<(String, i64)>], field: &str| -> anyhow::Result<BTreeSet<GroupElement>> {
            words
                .iter()
                .enumerate()
                .map(|(i, w)| word_element(&inputs.desc, w, &format!("{field}[{i}]")))
                .collect::<Result<_, _>>()
        };
    let c1 = to_set(&c1_words, "specification.c1")?;
    let c2 = to_set(&c2_words, "specification.c2")?;
    let ff = inputs.f.to_float();
    let rad = radius(&inputs.desc, &inputs.tol);
    let inv = l1_inverse_best_effort(&ff, inputs.tol.tail_target, rad)?;
    // Window big enough to lift on C_i F^{-1} and to recheck membership.
    let lengths = algact_core::group::word_lengths_of(
        &inputs.desc,
        &c1.union(&c2).cloned().collect(),
        inputs.tol.ball_cap,
    )?;
    let c_reach = lengths.values().copied().max().unwrap_or(0);
    let reach = |el: &RingElement<f64>| -> anyhow::Result<u32> {
        let supp: BTreeSet<GroupElement> = el.terms().keys().cloned().collect();
        Ok(
            algact_core::group::word_lengths_of(&inputs.desc, &supp, inputs.tol.ball_cap)?
                .values()
                .copied()
                .max()
                .unwrap_or(0),
        )
    };
    let f_reach = reach(&ff)?;
    let w_reach = reach(&inv.element)?;
    // The lifts need x-values on C_i F_eps^{-1} supp(f), and F_eps sits
    // inside the support of the truncated inverse.
    let win_radius = c_reach + w_reach + f_reach + 1;
    let window = algact_core::word_ball(
        &inputs.desc,
        &inputs.desc.standard_generators(),
        win_radius,
        inputs.tol.ball_cap,
    )?;
    let w_tilde = inv.element.involute();
    let x1 = TorusPoint::from_realization(&w_tilde, &window)?;
    let x2 = TorusPoint::zero(Group::Ambient(inputs.desc.clone()), &window)?;
    let glued = specification_glue(&x1, &x2, &c1, &c2, epsilon, fi, &inv)?;
    let report = SpecdemoReport {
        group: format!("{:?}", inputs.desc),
        epsilon,
        f_window: glued.f_window.iter().map(|g| format!("{g}")).collect(),
        max_deviation: glued.max_deviation,
        residual: glued.residual,
    };
    Ok(RunOutcome {
        summary: format!(
            "glued within {:.3e} (< eps {epsilon}), residual {:.3e}, |F_eps| = {}",
            glued.max_deviation,
            glued.residual,
            glued.f_window.len()
        ),
        json: serde_json::to_string_pretty(&report)?,
        csv: None,
        exit: EXIT_OK,
    })
}

#[derive(Serialize)]
struct DecayReport {
    group: String,
    rate: f64,
    intercept: f64,
    fit_residual: f64,
    tail_bound: f64,
    shells: Vec<(u32, f64)>,
}

/// Shell-by-shell decay of the truncated inverse.
pub fn run_decay(cfg: &JobConfig) -> anyhow::Result<RunOutcome> {
    let inputs = prepare(cfg)?;
    let ff = inputs.f.to_float();
    let rad = inputs
        .tol
        .decay_radius
        .unwrap_or_else(|| radius(&inputs.desc, &inputs.tol));
    let inv = l1_inverse_best_effort(&ff, inputs.tol.tail_target, rad)?;
    let profile = decay_profile(&inv.element, inputs.tol.ball_cap)?;
    let report = DecayReport {
        group: format!("{:?}", inputs.desc),
        rate: profile.rate,
        intercept: profile.intercept,
        fit_residual: profile.fit_residual,
        tail_bound: inv.tail_bound,
        shells: profile.shells.clone(),
    };
    Ok(RunOutcome {
        summary: format!(
            "decay rate {:.6} per shell over {} shells (fit residual {:.3})",
            profile.rate,
            profile.shells.len(),
            profile.fit_residual
        ),
        json: serde_json::to_string_pretty(&report)?,
        csv: None,
        exit: EXIT_OK,
    })
}
