//! Job configuration: JSON schema, validation, and construction of the
//! group-ring element from (word, coefficient) pairs.

use anyhow::{anyhow, bail, Context};
use num_bigint::BigInt;
use serde::Deserialize;

use algact_core::{Group, GroupDescriptor, GroupElement, RingElement};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum GroupConfig {
    FreeAbelian { rank: usize },
    Heisenberg3,
    DirectProduct { factors: Vec<GroupConfig> },
    FiniteCyclicProduct { moduli: Vec<u64> },
}

impl GroupConfig {
    pub fn descriptor(&self) -> anyhow::Result<GroupDescriptor> {
        let d = match self {
            GroupConfig::FreeAbelian { rank } => GroupDescriptor::FreeAbelian(*rank),
            GroupConfig::Heisenberg3 => GroupDescriptor::Heisenberg3,
            GroupConfig::DirectProduct { factors } => GroupDescriptor::DirectProduct(
                factors
                    .iter()
                    .map(|f| f.descriptor())
                    .collect::<anyhow::Result<_>>()?,
            ),
            GroupConfig::FiniteCyclicProduct { moduli } => {
                GroupDescriptor::FiniteCyclicProduct(moduli.clone())
            }
        };
        d.validate_descriptor()?;
        Ok(d)
    }
}

/// One term of f: a word in the declared generators and a coefficient.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub word: Vec<(String, i64)>,
    pub coeff: serde_json::Number,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Dense,
    Exact,
    Cheb,
    Mahler,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub target_residual: Option<f64>,
    pub tail_target: Option<f64>,
    pub cauchy_tol: Option<f64>,
    pub max_radius: Option<u32>,
    pub dense_cap: Option<u64>,
    pub exact_cap: Option<u64>,
    pub ball_cap: Option<usize>,
    pub cheb_degree: Option<usize>,
    pub cheb_degree_max: Option<usize>,
    pub cheb_bar_target: Option<f64>,
    pub mahler_grid: Option<u32>,
    pub power_iters: Option<u32>,
    pub enumerate_cap: Option<u64>,
    pub max_levels: Option<usize>,
    pub decay_radius: Option<u32>,
}

/// Effective tolerances after defaulting.
#[derive(Debug, Clone)]
pub struct Tolerances {
    pub target_residual: f64,
    pub tail_target: f64,
    pub cauchy_tol: f64,
    pub max_radius: Option<u32>,
    pub dense_cap: u64,
    pub exact_cap: u64,
    pub ball_cap: usize,
    pub cheb_degree: usize,
    pub cheb_degree_max: usize,
    pub cheb_bar_target: f64,
    pub mahler_grid: u32,
    pub power_iters: u32,
    pub enumerate_cap: u64,
    pub max_levels: usize,
    pub decay_radius: Option<u32>,
}

impl Tolerances {
    fn from_config(c: Option<&ToleranceConfig>) -> Self {
        let c = c.cloned().unwrap_or_default();
        Tolerances {
            target_residual: c.target_residual.unwrap_or(1e-12),
            tail_target: c.tail_target.unwrap_or(1e-12),
            cauchy_tol: c.cauchy_tol.unwrap_or(1e-9),
            max_radius: c.max_radius,
            dense_cap: c.dense_cap.unwrap_or(8192),
            exact_cap: c.exact_cap.unwrap_or(512),
            ball_cap: c.ball_cap.unwrap_or(1_000_000),
            cheb_degree: c.cheb_degree.unwrap_or(64),
            cheb_degree_max: c.cheb_degree_max.unwrap_or(1024),
            cheb_bar_target: c.cheb_bar_target.unwrap_or(1e-6),
            mahler_grid: c.mahler_grid.unwrap_or(256),
            power_iters: c.power_iters.unwrap_or(8),
            enumerate_cap: c.enumerate_cap.unwrap_or(10_000),
            max_levels: c.max_levels.unwrap_or(64),
            decay_radius: c.decay_radius,
        }
    }
}

/// Windows and accuracy for the specification demo, all words in the
/// declared generators.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub c1: Option<Vec<Vec<(String, i64)>>>,
    pub c2: Option<Vec<Vec<(String, i64)>>>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<OutputFormat>,
    pub path: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub group: GroupConfig,
    pub f: Vec<TermConfig>,
    pub chain: Option<Vec<u64>>,
    pub methods: Option<Vec<MethodName>>,
    pub tolerances: Option<ToleranceConfig>,
    pub specification: Option<SpecConfig>,
    pub output: Option<OutputConfig>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: JobConfig =
            serde_json::from_str(text).context("config does not match the job schema")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.f.is_empty() {
            bail!("field `f`: the element must have at least one term");
        }
        if let Some(chain) = &self.chain {
            if chain.is_empty() {
                bail!("field `chain`: must list at least one modulus");
            }
            for w in chain.windows(2) {
                if w[1] <= w[0] {
                    bail!(
                        "field `chain`: moduli must be strictly increasing ({} then {})",
                        w[0],
                        w[1]
                    );
                }
            }
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::from_config(self.tolerances.as_ref())
    }
}

/// Resolves a generator name to its canonical element. Every kind accepts
/// the uniform coordinate names g1..gR; free abelian groups also accept
/// x, y, z and x1..xd, the Heisenberg group a, b, c.
pub fn generator_element(desc: &GroupDescriptor, name: &str) -> Option<GroupElement> {
    let rank = desc.rank();
    let coord = |i: usize| {
        let mut v = vec![0i64; rank];
        v[i] = 1;
        GroupElement::new(v)
    };
    if let Some(rest) = name.strip_prefix('g') {
        if let Ok(i) = rest.parse::<usize>() {
            if (1..=rank).contains(&i) {
                return Some(coord(i - 1));
            }
        }
    }
    match desc {
        GroupDescriptor::FreeAbelian(d) => {
            let named = ["x", "y", "z"];
            if let Some(i) = named.iter().position(|n| *n == name) {
                if i < *d {
                    return Some(coord(i));
                }
            }
            if let Some(rest) = name.strip_prefix('x') {
                if let Ok(i) = rest.parse::<usize>() {
                    if (1..=*d).contains(&i) {
                        return Some(coord(i - 1));
                    }
                }
            }
            None
        }
        GroupDescriptor::Heisenberg3 => {
            let named = ["a", "b", "c"];
            named.iter().position(|n| *n == name).map(coord)
        }
        _ => None,
    }
}

/// A word [(name, exponent), ...] multiplied out left to right.
pub fn word_element(
    desc: &GroupDescriptor,
    word: &[(String, i64)],
    field: &str,
) -> anyhow::Result<GroupElement> {
    let mut acc = desc.identity();
    for (name, exp) in word {
        let gen = generator_element(desc, name).ok_or_else(|| {
            anyhow!("field `{field}`: unknown generator \"{name}\" for group {desc:?}")
        })?;
        if exp.unsigned_abs() > 1_000_000 {
            bail!("field `{field}`: exponent {exp} is out of range");
        }
        let step = if *exp >= 0 { gen } else { desc.inverse(&gen)? };
        for _ in 0..exp.unsigned_abs() {
            acc = desc.multiply(&acc, &step)?;
        }
    }
    Ok(acc)
}

/// The configured element in its natural coefficient domain.
#[derive(Debug, Clone)]
pub enum ElementData {
    Int(RingElement<BigInt>),
    Float(RingElement<f64>),
}

impl ElementData {
    pub fn to_float(&self) -> RingElement<f64> {
        match self {
            ElementData::Int(e) => e.to_f64(),
            ElementData::Float(e) => e.clone(),
        }
    }

    pub fn as_int(&self) -> Option<&RingElement<BigInt>> {
        match self {
            ElementData::Int(e) => Some(e),
            ElementData::Float(_) => None,
        }
    }
}

/// Builds f from the config terms. Integer coefficients yield the exact
/// integer domain; any non-integer coefficient switches the whole element
/// to f64 (promotion is explicit and total, never per-term).
pub fn build_element(desc: &GroupDescriptor, terms: &[TermConfig]) -> anyhow::Result<ElementData> {
    let all_integer = terms.iter().all(|t| t.coeff.is_i64());
    let group = Group::Ambient(desc.clone());
    if all_integer {
        let pairs = terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let g = word_element(desc, &t.word, &format!("f[{i}].word"))?;
                Ok((g, BigInt::from(t.coeff.as_i64().expect("checked"))))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(ElementData::Int(RingElement::from_terms(group, pairs)?))
    } else {
        let pairs = terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let g = word_element(desc, &t.word, &format!("f[{i}].word"))?;
                let c = t
                    .coeff
                    .as_f64()
                    .ok_or_else(|| anyhow!("field `f[{i}].coeff`: not representable as f64"))?;
                Ok((g, c))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(ElementData::Float(RingElement::from_terms(group, pairs)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_config() {
        let cfg = JobConfig::from_json(
            r#"{
                "group": {"kind": "free_abelian", "rank": 1},
                "f": [{"word": [], "coeff": 2}, {"word": [["x", 1]], "coeff": -1}],
                "chain": [2, 4, 8]
            }"#,
        )
        .unwrap();
        let desc = cfg.group.descriptor().unwrap();
        let f = build_element(&desc, &cfg.f).unwrap();
        let fi = f.as_int().unwrap();
        assert_eq!(fi.support_size(), 2);
        assert_eq!(fi.norm_l1(), BigInt::from(3));
    }

    #[test]
    fn undeclared_generator_is_named_in_error() {
        let cfg = JobConfig::from_json(
            r#"{
                "group": {"kind": "free_abelian", "rank": 1},
                "f": [{"word": [["c", 1]], "coeff": 1}]
            }"#,
        )
        .unwrap();
        let desc = cfg.group.descriptor().unwrap();
        let err = build_element(&desc, &cfg.f).unwrap_err().to_string();
        assert!(err.contains("unknown generator \"c\""), "{err}");
        assert!(err.contains("f[0].word"), "{err}");
    }

    #[test]
    fn heisenberg_words_multiply_in_order() {
        let desc = GroupDescriptor::Heisenberg3;
        let w = word_element(&desc, &[("a".into(), 1), ("b".into(), 1)], "f[0].word").unwrap();
        assert_eq!(w, GroupElement::new(vec![1, 1, 1]));
        let w = word_element(&desc, &[("b".into(), 1), ("a".into(), 1)], "f[0].word").unwrap();
        assert_eq!(w, GroupElement::new(vec![1, 1, 0]));
    }

    #[test]
    fn float_coefficients_switch_domain() {
        let cfg = JobConfig::from_json(
            r#"{
                "group": {"kind": "free_abelian", "rank": 1},
                "f": [{"word": [], "coeff": 2.5}, {"word": [["x", 1]], "coeff": -1}]
            }"#,
        )
        .unwrap();
        let desc = cfg.group.descriptor().unwrap();
        let f = build_element(&desc, &cfg.f).unwrap();
        assert!(f.as_int().is_none());
        assert_eq!(f.to_float().norm_l1_f64(), 3.5);
    }

    #[test]
    fn chain_must_increase() {
        let err = JobConfig::from_json(
            r#"{
                "group": {"kind": "free_abelian", "rank": 1},
                "f": [{"word": [], "coeff": 2}],
                "chain": [4, 4]
            }"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("strictly increasing"));
    }

    #[test]
    fn unknown_config_field_is_rejected() {
        let err = JobConfig::from_json(
            r#"{
                "group": {"kind": "free_abelian", "rank": 1},
                "f": [{"word": [], "coeff": 2}],
                "chians": [2]
            }"#,
        )
        .unwrap_err();
        let msg = format!("{err:#}");
        assert!(
            msg.contains("chians") || msg.contains("unknown field"),
            "{msg}"
        );
    }
}
