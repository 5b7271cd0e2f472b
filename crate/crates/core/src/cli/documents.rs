//! Versioned JSON documents: series, function specs, divisors, monodromy
//! results and oracle reports. Every document carries `format: 1` and a
//! `kind` tag; serializing a parsed canonical document reproduces it byte for
//! byte.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::coeffs::{ConstantSymbol, ExactCoeff, GaussianRational, Monomial};
use crate::continuation::{AnalyticElement, OracleReport, OracleRow, RationalFn};
use crate::logpoly::LogLaurentPoly;
use crate::monodromy::{Divisor, FunctionSpec, GermPart, MonodromyResult, ProductKind, Singularity};
use crate::series::{AnySeries, TruncatedSeries};

pub const FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0}")]
    Format(u64),
    #[error("expected a {expected} document, found {found}")]
    Kind { expected: &'static str, found: String },
    #[error("invalid document: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, DocError>;

fn invalid(e: impl std::fmt::Display) -> DocError {
    DocError::Invalid(e.to_string())
}

// ---------------------------------------------------------------------------
// Shared pieces

/// One term of an exact coefficient: a Gaussian rational times a product of
/// named constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffTerm {
    pub coeff: String,
    #[serde(default)]
    pub symbols: BTreeMap<String, i32>,
}

pub fn exact_to_doc(c: &ExactCoeff) -> Vec<CoeffTerm> {
    c.terms()
        .map(|(m, v)| CoeffTerm {
            coeff: v.to_string(),
            symbols: m.powers().map(|(s, e)| (s.key(), e)).collect(),
        })
        .collect()
}

pub fn exact_from_doc(terms: &[CoeffTerm]) -> Result<ExactCoeff> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let v = GaussianRational::from_str(&t.coeff).map_err(invalid)?;
        let mut powers = Vec::with_capacity(t.symbols.len());
        for (k, &e) in &t.symbols {
            powers.push((ConstantSymbol::from_key(k).map_err(invalid)?, e));
        }
        out.push((Monomial::from_powers(powers), v));
    }
    Ok(ExactCoeff::from_terms(out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogTerm {
    pub zpow: i32,
    pub logpow: u32,
    pub coeff: Vec<CoeffTerm>,
}

pub fn logpoly_to_doc(p: &LogLaurentPoly) -> Vec<LogTerm> {
    p.canonical_terms()
        .iter()
        .map(|(m, l, c)| LogTerm { zpow: *m, logpow: *l, coeff: exact_to_doc(c) })
        .collect()
}

pub fn logpoly_from_doc(terms: &[LogTerm]) -> Result<LogLaurentPoly> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        out.push(((t.zpow, t.logpow), exact_from_doc(&t.coeff)?));
    }
    Ok(LogLaurentPoly::from_terms(out))
}

fn location(s: &str) -> Result<GaussianRational> {
    GaussianRational::from_str(s).map_err(invalid)
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn from_c2(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// Series coefficient in any of the three supported fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffValue {
    Rational(String),
    Exact(Vec<CoeffTerm>),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBody {
    pub field: String,
    pub order: usize,
    pub coeffs: Vec<CoeffValue>,
}

fn rational_text(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl SeriesBody {
    pub fn from_series(s: &AnySeries) -> Self {
        let coeffs = match s {
            AnySeries::Rational(t) => t.coeffs().iter().map(|q| CoeffValue::Rational(rational_text(q))).collect(),
            AnySeries::Exact(t) => t.coeffs().iter().map(|c| CoeffValue::Exact(exact_to_doc(c))).collect(),
            AnySeries::Complex(t) => t.coeffs().iter().map(|z| CoeffValue::Complex(c2(*z))).collect(),
        };
        SeriesBody { field: s.field().to_string(), order: s.order(), coeffs }
    }

    pub fn to_series(&self) -> Result<AnySeries> {
        if self.coeffs.len() > self.order + 1 {
            return Err(invalid(format!("{} coefficients exceed order {}", self.coeffs.len(), self.order)));
        }
        let mismatch = || invalid(format!("coefficient does not belong to field {}", self.field));
        Ok(match self.field.as_str() {
            "rational" => {
                let mut v = Vec::with_capacity(self.coeffs.len());
                for c in &self.coeffs {
                    let CoeffValue::Rational(s) = c else { return Err(mismatch()) };
                    let q = GaussianRational::from_str(s).map_err(invalid)?;
                    if !q.is_real() {
                        return Err(mismatch());
                    }
                    v.push(q.re().clone());
                }
                AnySeries::Rational(TruncatedSeries::from_coeffs(v, self.order))
            }
            "exact" => {
                let mut v = Vec::with_capacity(self.coeffs.len());
                for c in &self.coeffs {
                    let CoeffValue::Exact(t) = c else { return Err(mismatch()) };
                    v.push(exact_from_doc(t)?);
                }
                AnySeries::Exact(TruncatedSeries::from_coeffs(v, self.order))
            }
            "complex" => {
                let mut v = Vec::with_capacity(self.coeffs.len());
                for c in &self.coeffs {
                    let CoeffValue::Complex(z) = c else { return Err(mismatch()) };
                    v.push(from_c2(*z));
                }
                AnySeries::Complex(TruncatedSeries::from_coeffs(v, self.order))
            }
            other => return Err(invalid(format!("unknown field {other:?}"))),
        })
    }
}

// ---------------------------------------------------------------------------
// Documents

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub format: u32,
    pub kind: String,
    #[serde(flatten)]
    pub body: SeriesBody,
}

impl SeriesDoc {
    pub fn new(s: &AnySeries) -> Self {
        SeriesDoc { format: FORMAT, kind: "series".into(), body: SeriesBody::from_series(s) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GermDoc {
    TotallyHolomorphic,
    /// `coeffs[k−1]` multiplies `(z − α)^{−k}`.
    Polar { coeffs: Vec<Vec<CoeffTerm>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityDoc {
    pub location: String,
    pub monodromy: Vec<LogTerm>,
    pub germ: GermDoc,
}

/// Numeric realization of a function for the contour oracle; complex numbers
/// are `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ElementDoc {
    Rational { num: Vec<[f64; 2]>, den: Vec<[f64; 2]> },
    LogBranch { location: [f64; 2], prefactor: Vec<[f64; 2]> },
    Polylog { k: u32 },
    Series { coeffs: Vec<[f64; 2]>, radius: f64 },
    Sum { terms: Vec<ElementDoc> },
    Scaled { num: Vec<[f64; 2]>, den: Vec<[f64; 2]>, inner: Box<ElementDoc> },
}

fn cvec(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| c2(*z)).collect()
}

fn from_cvec(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|z| from_c2(*z)).collect()
}

impl ElementDoc {
    pub fn from_element(e: &AnalyticElement) -> Self {
        match e {
            AnalyticElement::Rational(r) => ElementDoc::Rational { num: cvec(r.num()), den: cvec(r.den()) },
            AnalyticElement::LogBranch { location, prefactor } => {
                ElementDoc::LogBranch { location: c2(*location), prefactor: cvec(prefactor) }
            }
            AnalyticElement::Polylog(k) => ElementDoc::Polylog { k: *k },
            AnalyticElement::Series { series, radius } => {
                ElementDoc::Series { coeffs: cvec(series.coeffs()), radius: *radius }
            }
            AnalyticElement::Sum(v) => ElementDoc::Sum { terms: v.iter().map(Self::from_element).collect() },
            AnalyticElement::Scaled { factor, inner } => ElementDoc::Scaled {
                num: cvec(factor.num()),
                den: cvec(factor.den()),
                inner: Box::new(Self::from_element(inner)),
            },
        }
    }

    pub fn to_element(&self) -> Result<AnalyticElement> {
        Ok(match self {
            ElementDoc::Rational { num, den } => {
                AnalyticElement::rational(from_cvec(num), from_cvec(den)).map_err(invalid)?
            }
            ElementDoc::LogBranch { location, prefactor } => {
                AnalyticElement::log_branch(from_c2(*location), from_cvec(prefactor)).map_err(invalid)?
            }
            ElementDoc::Polylog { k } => AnalyticElement::polylog(*k).map_err(invalid)?,
            ElementDoc::Series { coeffs, radius } => {
                if radius.is_nan() || *radius <= 0.0 {
                    return Err(invalid("series radius must be positive"));
                }
                AnalyticElement::Series { series: TruncatedSeries::new(from_cvec(coeffs)), radius: *radius }
            }
            ElementDoc::Sum { terms } => {
                AnalyticElement::Sum(terms.iter().map(Self::to_element).collect::<Result<_>>()?)
            }
            ElementDoc::Scaled { num, den, inner } => AnalyticElement::Scaled {
                factor: RationalFn::new(from_cvec(num), from_cvec(den)).map_err(invalid)?,
                inner: Box::new(inner.to_element()?),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDoc {
    pub format: u32,
    pub kind: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub germ: Option<SeriesBody>,
    pub singularities: Vec<SingularityDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementDoc>,
}

impl FunctionDoc {
    pub fn new(spec: &FunctionSpec, element: Option<&AnalyticElement>) -> Self {
        let singularities = spec
            .singularities()
            .iter()
            .map(|s| SingularityDoc {
                location: s.location.to_string(),
                monodromy: logpoly_to_doc(&s.monodromy),
                germ: match &s.germ {
                    GermPart::TotallyHolomorphic => GermDoc::TotallyHolomorphic,
                    GermPart::Polar(c) => GermDoc::Polar { coeffs: c.iter().map(exact_to_doc).collect() },
                },
            })
            .collect();
        FunctionDoc {
            format: FORMAT,
            kind: "function".into(),
            name: spec.name.clone(),
            germ: spec.germ_at_zero.as_ref().map(SeriesBody::from_series),
            singularities,
            element: element.map(ElementDoc::from_element),
        }
    }

    pub fn spec(&self) -> Result<FunctionSpec> {
        let mut sings = Vec::with_capacity(self.singularities.len());
        for s in &self.singularities {
            let germ = match &s.germ {
                GermDoc::TotallyHolomorphic => GermPart::TotallyHolomorphic,
                GermDoc::Polar { coeffs } => {
                    GermPart::polar(coeffs.iter().map(|c| exact_from_doc(c)).collect::<Result<_>>()?)
                        .map_err(invalid)?
                }
            };
            let loc = location(&s.location)?;
            sings.push(Singularity::new(loc, logpoly_from_doc(&s.monodromy)?, germ).map_err(invalid)?);
        }
        let germ = self.germ.as_ref().map(SeriesBody::to_series).transpose()?;
        FunctionSpec::new(self.name.clone(), germ, sings).map_err(invalid)
    }

    pub fn element(&self) -> Result<Option<AnalyticElement>> {
        self.element.as_ref().map(ElementDoc::to_element).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    pub location: String,
    pub multiplicity: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorDoc {
    pub format: u32,
    pub kind: String,
    pub points: Vec<DivisorPoint>,
}

impl DivisorDoc {
    pub fn new(d: &Divisor) -> Self {
        let points =
            d.points().map(|(l, n)| DivisorPoint { location: l.to_string(), multiplicity: n }).collect();
        DivisorDoc { format: FORMAT, kind: "divisor".into(), points }
    }

    pub fn divisor(&self) -> Result<Divisor> {
        let pts = self
            .points
            .iter()
            .map(|p| Ok((location(&p.location)?, p.multiplicity)))
            .collect::<Result<Vec<_>>>()?;
        Divisor::new(pts).map_err(invalid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDoc {
    pub alpha: String,
    pub beta: String,
    pub value: Vec<LogTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyDoc {
    pub format: u32,
    pub kind: String,
    pub product: String,
    pub formula: String,
    pub gamma: String,
    pub pairs: Vec<PairDoc>,
    pub value: Vec<LogTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advisory: Option<String>,
}

impl MonodromyDoc {
    pub fn new(r: &MonodromyResult, formula: &str) -> Self {
        MonodromyDoc {
            format: FORMAT,
            kind: "monodromy".into(),
            product: r.product.as_str().into(),
            formula: formula.into(),
            gamma: r.gamma.to_string(),
            pairs: r
                .pairs
                .iter()
                .map(|p| PairDoc { alpha: p.alpha.to_string(), beta: p.beta.to_string(), value: logpoly_to_doc(&p.value) })
                .collect(),
            value: logpoly_to_doc(&r.value),
            advisory: r.advisory.clone(),
        }
    }

    pub fn product_kind(&self) -> Result<ProductKind> {
        parse_product(&self.product)
    }

    pub fn gamma(&self) -> Result<GaussianRational> {
        location(&self.gamma)
    }

    pub fn value(&self) -> Result<LogLaurentPoly> {
        logpoly_from_doc(&self.value)
    }
}

pub fn parse_product(s: &str) -> Result<ProductKind> {
    match s {
        "hadamard" => Ok(ProductKind::Hadamard),
        "ene" => Ok(ProductKind::Ene),
        other => Err(invalid(format!("unknown product {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDoc {
    pub z: [f64; 2],
    pub winding: i64,
    pub symbolic: [f64; 2],
    pub numeric: [f64; 2],
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub format: u32,
    pub kind: String,
    pub product: String,
    pub gamma: String,
    pub tolerance: f64,
    pub nodes: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub pass: bool,
    pub rows: Vec<RowDoc>,
}

impl ReportDoc {
    pub fn new(r: &OracleReport, threshold: f64) -> Self {
        let row = |x: &OracleRow| RowDoc {
            z: c2(x.z),
            winding: x.winding,
            symbolic: c2(x.symbolic),
            numeric: c2(x.numeric),
            abs_error: x.abs_error,
            rel_error: x.rel_error,
        };
        ReportDoc {
            format: FORMAT,
            kind: "oracle_report".into(),
            product: r.product.as_str().into(),
            gamma: r.gamma.to_string(),
            tolerance: threshold,
            nodes: r.nodes,
            max_abs_error: r.max_abs_error,
            max_rel_error: r.max_rel_error,
            pass: r.passes(threshold),
            rows: r.rows.iter().map(row).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Reading and writing

/// Any document, dispatched on its `kind`.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Series(SeriesDoc),
    Function(FunctionDoc),
    Divisor(DivisorDoc),
    Monodromy(MonodromyDoc),
    OracleReport(ReportDoc),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Series(_) => "series",
            Document::Function(_) => "function",
            Document::Divisor(_) => "divisor",
            Document::Monodromy(_) => "monodromy",
            Document::OracleReport(_) => "oracle_report",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        match v.get("format").and_then(serde_json::Value::as_u64) {
            Some(1) => {}
            Some(n) => return Err(DocError::Format(n)),
            None => return Err(invalid("missing format field")),
        }
        let kind = v.get("kind").and_then(serde_json::Value::as_str).unwrap_or("").to_string();
        fn typed<T: DeserializeOwned>(v: serde_json::Value) -> Result<T> {
            Ok(serde_json::from_value(v)?)
        }
        Ok(match kind.as_str() {
            "series" => Document::Series(typed(v)?),
            "function" => Document::Function(typed(v)?),
            "divisor" => Document::Divisor(typed(v)?),
            "monodromy" => Document::Monodromy(typed(v)?),
            "oracle_report" => Document::OracleReport(typed(v)?),
            _ => return Err(invalid(format!("unknown kind {kind:?}"))),
        })
    }

    pub fn to_json(&self) -> String {
        let s = match self {
            Document::Series(d) => serde_json::to_string_pretty(d),
            Document::Function(d) => serde_json::to_string_pretty(d),
            Document::Divisor(d) => serde_json::to_string_pretty(d),
            Document::Monodromy(d) => serde_json::to_string_pretty(d),
            Document::OracleReport(d) => serde_json::to_string_pretty(d),
        };
        s.expect("documents serialize") + "\n"
    }

    fn wrong(&self, expected: &'static str) -> DocError {
        DocError::Kind { expected, found: self.kind().into() }
    }

    /// The series of a series document or the germ of a function document.
    pub fn series(&self) -> Result<AnySeries> {
        match self {
            Document::Series(d) => d.body.to_series(),
            Document::Function(d) => match &d.germ {
                Some(g) => g.to_series(),
                None => Err(invalid(format!("function {} has no germ at 0", d.name))),
            },
            other => Err(other.wrong("series")),
        }
    }

    pub fn function(&self) -> Result<&FunctionDoc> {
        match self {
            Document::Function(d) => Ok(d),
            other => Err(other.wrong("function")),
        }
    }

    pub fn divisor(&self) -> Result<Divisor> {
        match self {
            Document::Divisor(d) => d.divisor(),
            other => Err(other.wrong("divisor")),
        }
    }

    pub fn monodromy(&self) -> Result<&MonodromyDoc> {
        match self {
            Document::Monodromy(d) => Ok(d),
            other => Err(other.wrong("monodromy")),
        }
    }
}
