//! JSON documents for spaces, functions, vectors, pair weights, slices and
//! probe systems, plus exact rational parsing.
//!
//! Numbers may be JSON numbers or strings. Strings take the forms `"p/q"`,
//! `"-3"` or a decimal such as `"0.125"` or `"1e-3"`, always converted
//! exactly. Output always uses canonical strings (`"p/q"` in lowest terms
//! with a positive denominator, or a bare integer).

use std::collections::BTreeMap;
use std::path::Path;

use lipfree_core::free::FreeError;
use lipfree_core::lip::LipError;
use lipfree_core::metric::Violation;
use lipfree_core::probes::{Cmp, ProbeError, ProbeSystem, Slice, Term};
use lipfree_core::transfer::{PairWeights, TransferError};
use lipfree_core::{FreeVector, LipFunction, MetricSpace, Rational, Scalar, StructureError};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("cannot parse `{0}` as a rational number")]
    BadNumber(String),
    #[error("expected a number or a string, got {0}")]
    NotANumber(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("the base point `{0}` must map to 0")]
    NonZeroBase(String),
    #[error("not a metric: {0}")]
    NotAMetric(String),
    #[error("term needs either `unknown` with `point`, or `scalar`")]
    BadTerm,
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

/// Parses `p/q`, an integer, or a decimal with optional exponent.
pub fn parse_rational(text: &str) -> Result<Rational, FormatError> {
    let s = text.trim();
    let bad = || FormatError::BadNumber(text.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_int(p.trim()).ok_or_else(bad)?;
        let q: BigInt = parse_int(q.trim()).ok_or_else(bad)?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let all_digits = |t: &str| t.chars().all(|c| c.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty()
        || !all_digits(int_part)
        || !all_digits(frac_part)
        || exp.unsigned_abs() > 10_000
    {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let num: BigInt = joined.parse().map_err(|_| bad())?;
    let scale = exp - i32::try_from(frac_part.len()).map_err(|_| bad())?;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(if neg { -value } else { value })
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn number(v: &Value) -> Result<Rational, FormatError> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(FormatError::NotANumber(other.to_string())),
    }
}

/// Canonical string for any scalar: `p/q` for exact values, the shortest
/// round-trip decimal for floats.
pub fn fmt<S: Scalar>(v: &S) -> String {
    format!("{v}")
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDoc {
    pub labels: Vec<String>,
    pub base: String,
    pub dist: Vec<Vec<Value>>,
}

impl MetricDoc {
    /// Builds the space without checking the metric axioms.
    pub fn build_unchecked(&self) -> Result<MetricSpace, FormatError> {
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(number).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let base = self
            .labels
            .iter()
            .position(|l| *l == self.base)
            .ok_or_else(|| FormatError::UnknownLabel(self.base.clone()))?;
        Ok(MetricSpace::from_parts(self.labels.clone(), base, dist)?)
    }

    /// Builds the space and rejects it unless every metric axiom holds.
    pub fn build(&self) -> Result<MetricSpace, FormatError> {
        let space = self.build_unchecked()?;
        let report = space.validate();
        match report.violations.first() {
            None => Ok(space),
            Some(v) => Err(FormatError::NotAMetric(describe_violation(&space, v))),
        }
    }

    pub fn from_space(space: &MetricSpace) -> Self {
        Self {
            labels: space.labels().to_vec(),
            base: space.label(space.base()).to_string(),
            dist: space
                .distances()
                .iter()
                .map(|row| row.iter().map(|d| Value::String(fmt(d))).collect())
                .collect(),
        }
    }
}

pub fn describe_violation<S: Scalar>(space: &MetricSpace<S>, v: &Violation) -> String {
    let l = |i: usize| space.label(i);
    match *v {
        Violation::NonZeroDiagonal { i } => format!("d({0}, {0}) is not zero", l(i)),
        Violation::Asymmetric { i, j } => format!("d({}, {}) != d({}, {})", l(i), l(j), l(j), l(i)),
        Violation::NonPositive { i, j } => format!("d({}, {}) is not positive", l(i), l(j)),
        Violation::Triangle { i, j, k } => format!(
            "d({}, {}) > d({}, {}) + d({}, {})",
            l(i),
            l(k),
            l(i),
            l(j),
            l(j),
            l(k)
        ),
    }
}

pub fn violation_json<S: Scalar>(space: &MetricSpace<S>, v: &Violation) -> Value {
    let l = |i: usize| space.label(i).to_string();
    match *v {
        Violation::NonZeroDiagonal { i } => json!({"kind": "nonzero-diagonal", "points": [l(i)]}),
        Violation::Asymmetric { i, j } => json!({"kind": "asymmetric", "points": [l(i), l(j)]}),
        Violation::NonPositive { i, j } => json!({"kind": "non-positive", "points": [l(i), l(j)]}),
        Violation::Triangle { i, j, k } => {
            json!({"kind": "triangle", "points": [l(i), l(j), l(k)]})
        }
    }
}

fn index(space: &MetricSpace, label: &str) -> Result<usize, FormatError> {
    space
        .index_of(label)
        .ok_or_else(|| FormatError::UnknownLabel(label.to_string()))
}

fn label_map(
    space: &MetricSpace,
    map: &BTreeMap<String, Value>,
) -> Result<Vec<(usize, Rational)>, FormatError> {
    map.iter()
        .map(|(k, v)| Ok((index(space, k)?, number(v)?)))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub values: BTreeMap<String, Value>,
}

impl FunctionDoc {
    pub fn build(&self, space: &MetricSpace) -> Result<LipFunction, FormatError> {
        let mut values = vec![Rational::zero(); space.len()];
        for (i, v) in label_map(space, &self.values)? {
            values[i] = v;
        }
        if !values[space.base()].is_zero() {
            return Err(FormatError::NonZeroBase(
                space.label(space.base()).to_string(),
            ));
        }
        Ok(LipFunction::new(space, values)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDoc {
    pub coeffs: BTreeMap<String, Value>,
}

impl VectorDoc {
    pub fn build(&self, space: &MetricSpace) -> Result<FreeVector, FormatError> {
        Ok(FreeVector::from_coeffs(
            space,
            label_map(space, &self.coeffs)?,
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub x: String,
    pub y: String,
    pub w: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsDoc {
    pub weights: Vec<WeightEntry>,
}

impl WeightsDoc {
    pub fn build(&self, space: &MetricSpace) -> Result<PairWeights, FormatError> {
        let entries = self
            .weights
            .iter()
            .map(|e| Ok(((index(space, &e.x)?, index(space, &e.y)?), number(&e.w)?)))
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(PairWeights::from_entries(space, entries)?)
    }
}

/// `{"coeffs": {...}, "alpha": "1/10", "closed": false}`; the functional is
/// normalized on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceDoc {
    pub coeffs: BTreeMap<String, Value>,
    pub alpha: Value,
    #[serde(default)]
    pub closed: bool,
}

impl SliceDoc {
    pub fn build(&self, space: &MetricSpace) -> Result<Slice, FormatError> {
        let mu = FreeVector::from_coeffs(space, label_map(space, &self.coeffs)?)?;
        Ok(Slice::new(space, &mu, number(&self.alpha)?, self.closed)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    #[serde(default)]
    pub unknown: Option<usize>,
    #[serde(default)]
    pub point: Option<String>,
    #[serde(default)]
    pub scalar: Option<usize>,
    pub coeff: Value,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CmpDoc {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RowDoc {
    LipBall {
        combo: Vec<(usize, Value)>,
        bound: Value,
    },
    Slice {
        combo: Vec<(usize, Value)>,
        slice: SliceDoc,
    },
    Linear {
        terms: Vec<TermDoc>,
        cmp: CmpDoc,
        rhs: Value,
        #[serde(default)]
        strict: bool,
    },
}

/// A probe system: unknown functions `0..functions`, scalars
/// `0..scalars`, rows, and an objective to maximize.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub functions: usize,
    #[serde(default)]
    pub scalars: usize,
    pub rows: Vec<RowDoc>,
    #[serde(default)]
    pub maximize: Vec<TermDoc>,
}

fn combo(c: &[(usize, Value)]) -> Result<Vec<(usize, Rational)>, FormatError> {
    c.iter().map(|(k, v)| Ok((*k, number(v)?))).collect()
}

fn term(space: &MetricSpace, t: &TermDoc) -> Result<(Term, Rational), FormatError> {
    let coeff = number(&t.coeff)?;
    let term = match (t.unknown, &t.point, t.scalar) {
        (Some(unknown), Some(p), None) => Term::Value {
            unknown,
            point: index(space, p)?,
        },
        (None, None, Some(s)) => Term::Scalar(s),
        _ => return Err(FormatError::BadTerm),
    };
    Ok((term, coeff))
}

impl SystemDoc {
    pub fn build(&self, space: &MetricSpace) -> Result<ProbeSystem, FormatError> {
        let mut sys = ProbeSystem::new(self.functions, self.scalars);
        for row in &self.rows {
            match row {
                RowDoc::LipBall { combo: c, bound } => {
                    sys.lip_ball(combo(c)?, number(bound)?);
                }
                RowDoc::Slice { combo: c, slice } => {
                    sys.slice(combo(c)?, slice.build(space)?);
                }
                RowDoc::Linear {
                    terms,
                    cmp,
                    rhs,
                    strict,
                } => {
                    let t = terms
                        .iter()
                        .map(|t| term(space, t))
                        .collect::<Result<Vec<_>, _>>()?;
                    let cmp = match cmp {
                        CmpDoc::Le => Cmp::Le,
                        CmpDoc::Ge => Cmp::Ge,
                        CmpDoc::Eq => Cmp::Eq,
                    };
                    if *strict {
                        sys.strict_linear(t, cmp, number(rhs)?);
                    } else {
                        sys.linear(t, cmp, number(rhs)?);
                    }
                }
            }
        }
        let obj = self
            .maximize
            .iter()
            .map(|t| term(space, t))
            .collect::<Result<Vec<_>, _>>()?;
        sys.maximize(obj);
        Ok(sys)
    }
}

/// `{"values": {label: value}}` with every label present.
pub fn function_json<S: Scalar>(space: &MetricSpace<S>, f: &LipFunction<S>) -> Value {
    let values: serde_json::Map<String, Value> = space
        .labels()
        .iter()
        .zip(f.values())
        .map(|(l, v)| (l.clone(), Value::String(fmt(v))))
        .collect();
    json!({ "values": values })
}

pub fn vector_json<S: Scalar>(space: &MetricSpace<S>, mu: &FreeVector<S>) -> Value {
    let coeffs: serde_json::Map<String, Value> = mu
        .iter()
        .map(|(i, c)| (space.label(i).to_string(), Value::String(fmt(c))))
        .collect();
    json!({ "coeffs": coeffs })
}

pub fn labels<S: Scalar>(space: &MetricSpace<S>, pts: impl IntoIterator<Item = usize>) -> Value {
    Value::Array(
        pts.into_iter()
            .map(|i| Value::String(space.label(i).to_string()))
            .collect(),
    )
}

/// Serializes with sorted keys and a trailing newline.
pub fn to_canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipfree_core::ratio;

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("1/10").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational("-2.50").unwrap(), ratio(-5, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("1.5E2").unwrap(), ratio(150, 1));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), ratio(7, 1));
        for bad in [
            "", "1/0", "abc", "1/2/3", "--1", "1.2.3", "nan", "inf", "1e", "1/-",
        ] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn canonical_output() {
        assert_eq!(fmt(&ratio(6, -4)), "-3/2");
        assert_eq!(fmt(&ratio(4, 2)), "2");
        assert_eq!(number(&json!(0.25)).unwrap(), ratio(1, 4));
        assert!(number(&json!(true)).is_err());
    }
}
