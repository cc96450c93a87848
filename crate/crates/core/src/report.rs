//! Machine-readable entropy reports: deterministic JSON plus CSV tables.
//!
//! The JSON body is byte-identical across runs of the same job: fixed field
//! order, fixed summation orders upstream, and no timestamps in data rows.
//! Wall-clock times travel separately and only appear in the CSV table and
//! the human summary.

use serde::Serialize;

use crate::cheb::ChebDiagnostic;
use crate::entropy::EntropyBracket;
use crate::invert::{InvertibilityCertificate, Route, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodTag {
    Dense,
    Exact,
    Cheb,
    Mahler,
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MethodTag::Dense => "dense",
            MethodTag::Exact => "exact",
            MethodTag::Cheb => "cheb",
            MethodTag::Mahler => "mahler",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub level_order: u64,
    pub method: MethodTag,
    pub value: f64,
    pub error_bar: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketSnapshot {
    pub lower: f64,
    pub upper: f64,
}

impl From<&EntropyBracket> for BracketSnapshot {
    fn from(b: &EntropyBracket) -> Self {
        BracketSnapshot {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSnapshot {
    pub verdict: String,
    pub route: Option<String>,
    pub residual: Option<f64>,
    pub tail_bound: Option<f64>,
    pub support_radius: Option<u32>,
    pub witness_order: Option<u64>,
}

impl From<&InvertibilityCertificate> for CertificateSnapshot {
    fn from(c: &InvertibilityCertificate) -> Self {
        CertificateSnapshot {
            verdict: match c.verdict {
                Verdict::InvertibleCertified => "invertible_certified".into(),
                Verdict::NonInvertibleCertified => "non_invertible_certified".into(),
                Verdict::Unknown => "unknown".into(),
            },
            route: c.route.map(|r| {
                match r {
                    Route::Neumann => "neumann",
                    Route::QuotientNewton => "quotient_newton",
                }
                .into()
            }),
            residual: c.residual,
            tail_bound: c.tail_bound,
            support_radius: c.support_radius,
            witness_order: c.witness.as_ref().map(|q| q.order()),
        }
    }
}

/// The full report of one job. Rows are ordered by increasing level order
/// within each method block.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub group: String,
    pub rows: Vec<LevelRow>,
    pub bracket: Option<BracketSnapshot>,
    pub final_estimate: Option<f64>,
    pub cauchy_fired: Option<bool>,
    pub advisory: Option<String>,
    pub certificate: CertificateSnapshot,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub cheb_diagnostics: Vec<ChebDiagnostic>,
}

impl EntropyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV with the wall-clock column; `wall_ms` runs parallel to `rows`
    /// (0.0 for rows without timing).
    pub fn to_csv(&self, wall_ms: &[f64]) -> String {
        let mut out = String::from("level_order,method,value,error_bar,wall_ms\n");
        for (i, row) in self.rows.iter().enumerate() {
            let bar = row.error_bar.map(|b| format!("{b:e}")).unwrap_or_default();
            let wall = wall_ms.get(i).copied().unwrap_or(0.0);
            out.push_str(&format!(
                "{},{},{:.17e},{},{:.3}\n",
                row.level_order, row.method, row.value, bar, wall
            ));
        }
        out
    }
}
