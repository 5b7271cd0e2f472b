//! Exact constants field.
//!
//! Elements are Gaussian-rational Laurent polynomials in a set of named
//! transcendental constants: `2πi`, `log c` and bare locations `c`, with `c` a
//! nonzero Gaussian rational. Only monomials can be inverted, which is enough
//! for every prefactor the monodromy formulas divide by (rationals, `2πi`,
//! powers of locations).
//!
//! Equality is structural after normalization. No relation between constants
//! is ever detected (`log 4` and `2 log 2` are different elements).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("element is not a unit: {0}")]
    NotAUnit(String),
    #[error("no value assigned to symbol `{0}`")]
    UnassignedSymbol(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid constant symbol: {0}")]
    InvalidSymbol(String),
    #[error("cannot parse `{0}`")]
    Parse(String),
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        // huge numerators and denominators: shift both down before dividing
        _ => {
            let bits = q.numer().bits().max(q.denom().bits()) as i64 - 900;
            let shift = bits.max(0) as usize;
            let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
            n / d
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational, CoeffError> {
    let t = s.strip_prefix('+').unwrap_or(s);
    if t.is_empty() {
        return Err(CoeffError::Parse(s.to_string()));
    }
    let q = match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n).map_err(|_| CoeffError::Parse(s.to_string()))?;
            let d = BigInt::from_str(d).map_err(|_| CoeffError::Parse(s.to_string()))?;
            if d.is_zero() {
                return Err(CoeffError::Parse(s.to_string()));
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(
            BigInt::from_str(t).map_err(|_| CoeffError::Parse(s.to_string()))?,
        ),
    };
    Ok(q)
}

/// `re + im·i` with exact rational parts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussianRational {
    re: BigRational,
    im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(rational(num, den), BigRational::zero())
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::new(&self.re * q, &self.im * q)
    }

    pub fn inv(&self) -> Result<Self, CoeffError> {
        if self.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        let n = self.norm_sqr();
        Ok(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn div(&self, other: &Self) -> Result<Self, CoeffError> {
        Ok(self * &other.inv()?)
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn powi(&self, k: i32) -> Result<Self, CoeffError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        let mut b = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    pub fn is_integer(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::from_int(1)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

macro_rules! forward_owned_binops {
    ($t:ty, $($tr:ident :: $m:ident),*) => {$(
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t {
                (&self).$m(&o)
            }
        }
    )*
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -(&self)
            }
        }
    };
}

forward_owned_binops!(GaussianRational, Add::add, Sub::sub, Mul::mul);

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Canonical text form: `p/q`, `r/si`, or `p/q+r/si` (zero parts omitted,
/// unit imaginary parts written `i` / `-i`).
impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_part = |q: &BigRational| -> String {
            if q.is_one() {
                "i".to_string()
            } else if *q == -BigRational::one() {
                "-i".to_string()
            } else {
                format!("{}i", fmt_rational(q))
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{}", im_part(&self.im)),
            (false, false) => {
                let im = im_part(&self.im);
                if im.starts_with('-') {
                    write!(f, "{}{}", fmt_rational(&self.re), im)
                } else {
                    write!(f, "{}+{}", fmt_rational(&self.re), im)
                }
            }
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for GaussianRational {
    type Err = CoeffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(CoeffError::Parse(s.to_string()));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Self::new(parse_rational(&t)?, BigRational::zero()));
        };
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(k, _)| k)
            .last();
        let (re, im) = match split {
            Some(k) => (parse_rational(&body[..k])?, &body[k..]),
            None => (BigRational::zero(), body),
        };
        let im = match im {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        Ok(Self::new(re, im))
    }
}

/// Named constant generating the exact field.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ConstantSymbol {
    TwoPiI,
    Log(GaussianRational),
    Loc(GaussianRational),
}

impl ConstantSymbol {
    pub fn log(base: GaussianRational) -> Result<Self, CoeffError> {
        if base.is_zero() {
            return Err(CoeffError::InvalidSymbol("log(0)".into()));
        }
        Ok(ConstantSymbol::Log(base))
    }

    pub fn loc(value: GaussianRational) -> Result<Self, CoeffError> {
        if value.is_zero() {
            return Err(CoeffError::InvalidSymbol("loc(0)".into()));
        }
        Ok(ConstantSymbol::Loc(value))
    }

    /// Unique key per constant: `2pii`, `log(<c>)`, `loc(<c>)`.
    pub fn key(&self) -> String {
        match self {
            ConstantSymbol::TwoPiI => "2pii".to_string(),
            ConstantSymbol::Log(c) => format!("log({c})"),
            ConstantSymbol::Loc(c) => format!("loc({c})"),
        }
    }

    pub fn from_key(key: &str) -> Result<Self, CoeffError> {
        let k = key.trim();
        if k == "2pii" {
            return Ok(ConstantSymbol::TwoPiI);
        }
        let inner = |prefix: &str| {
            k.strip_prefix(prefix)
                .and_then(|r| r.strip_suffix(')'))
                .map(GaussianRational::from_str)
        };
        if let Some(c) = inner("log(") {
            return Self::log(c?);
        }
        if let Some(c) = inner("loc(") {
            return Self::loc(c?);
        }
        Err(CoeffError::InvalidSymbol(key.to_string()))
    }

    pub fn default_value(&self) -> Complex64 {
        match self {
            ConstantSymbol::TwoPiI => Complex64::new(0.0, std::f64::consts::TAU),
            ConstantSymbol::Log(c) => c.to_c64().ln(),
            ConstantSymbol::Loc(c) => c.to_c64(),
        }
    }
}

impl fmt::Display for ConstantSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Numeric values for constant symbols.
#[derive(Clone, Debug)]
pub struct Assignment {
    values: BTreeMap<ConstantSymbol, Complex64>,
    use_defaults: bool,
}

impl Assignment {
    /// `2πi ↦ 2πi`, `log c ↦` principal log, `loc c ↦ c`.
    pub fn standard() -> Self {
        Assignment { values: BTreeMap::new(), use_defaults: true }
    }

    /// Only the listed symbols are assigned.
    pub fn explicit(values: BTreeMap<ConstantSymbol, Complex64>) -> Self {
        Assignment { values, use_defaults: false }
    }

    pub fn with(mut self, sym: ConstantSymbol, value: Complex64) -> Self {
        self.values.insert(sym, value);
        self
    }

    pub fn value(&self, sym: &ConstantSymbol) -> Result<Complex64, CoeffError> {
        match self.values.get(sym) {
            Some(v) => Ok(*v),
            None if self.use_defaults => Ok(sym.default_value()),
            None => Err(CoeffError::UnassignedSymbol(sym.key())),
        }
    }
}

impl Default for Assignment {
    fn default() -> Self {
        Self::standard()
    }
}

/// Product of constant symbols with nonzero integer exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(BTreeMap<ConstantSymbol, i32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn from_powers<I: IntoIterator<Item = (ConstantSymbol, i32)>>(powers: I) -> Self {
        let mut m = Monomial::one();
        for (s, e) in powers {
            m.accumulate(s, e);
        }
        m
    }

    fn accumulate(&mut self, s: ConstantSymbol, e: i32) {
        let slot = self.0.entry(s.clone()).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.0.remove(&s);
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powers(&self) -> impl Iterator<Item = (&ConstantSymbol, i32)> {
        self.0.iter().map(|(s, e)| (s, *e))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.clone();
        for (s, e) in &other.0 {
            m.accumulate(s.clone(), *e);
        }
        m
    }

    pub fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|(s, e)| (s.clone(), -e)).collect())
    }
}

/// Element of the exact constants field.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactCoeff {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl ExactCoeff {
    pub fn from_terms<I: IntoIterator<Item = (Monomial, GaussianRational)>>(terms: I) -> Self {
        let mut c = ExactCoeff::default();
        for (m, v) in terms {
            c.add_term(m, &v);
        }
        c
    }

    fn add_term(&mut self, m: Monomial, v: &GaussianRational) {
        if v.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(GaussianRational::zero);
        *slot = &*slot + v;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn constant(v: GaussianRational) -> Self {
        Self::from_terms([(Monomial::one(), v)])
    }

    pub fn int(n: i64) -> Self {
        Self::constant(GaussianRational::from_int(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::constant(GaussianRational::from_ratio(num, den))
    }

    pub fn i() -> Self {
        Self::constant(GaussianRational::i())
    }

    pub fn symbol(s: ConstantSymbol) -> Self {
        Self::symbol_pow(s, 1)
    }

    pub fn symbol_pow(s: ConstantSymbol, e: i32) -> Self {
        Self::from_terms([(Monomial::from_powers([(s, e)]), GaussianRational::one())])
    }

    pub fn two_pi_i() -> Self {
        Self::symbol(ConstantSymbol::TwoPiI)
    }

    /// `log c`, with `log 1` simplified to zero.
    pub fn log_of(c: &GaussianRational) -> Result<Self, CoeffError> {
        if c.is_one() {
            return Ok(Self::zero());
        }
        Ok(Self::symbol(ConstantSymbol::log(c.clone())?))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the element has no symbolic part.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn symbols(&self) -> BTreeSet<ConstantSymbol> {
        self.terms.keys().flat_map(|m| m.0.keys().cloned()).collect()
    }

    pub fn scale(&self, q: &GaussianRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ExactCoeff { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * q)).collect() }
    }

    pub fn div_int(&self, n: i64) -> Self {
        assert!(n != 0, "division of an exact coefficient by zero");
        self.scale(&GaussianRational::from_ratio(1, n))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Inverse of a single monomial with nonzero coefficient.
    pub fn invert_monomial(&self) -> Result<Self, CoeffError> {
        if self.terms.len() != 1 {
            return Err(CoeffError::NotAUnit(format!("{self}")));
        }
        let (m, v) = self.terms.iter().next().expect("one term");
        Ok(ExactCoeff::from_terms([(m.inv(), v.inv()?)]))
    }

    pub fn eval(&self, assignment: &Assignment) -> Result<Complex64, CoeffError> {
        let mut acc = Complex64::zero();
        for (m, v) in &self.terms {
            let mut t = v.to_c64();
            for (s, e) in m.powers() {
                t *= assignment.value(s)?.powi(e);
            }
            acc += t;
        }
        Ok(acc)
    }
}

impl Zero for ExactCoeff {
    fn zero() -> Self {
        ExactCoeff::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for ExactCoeff {
    fn one() -> Self {
        Self::int(1)
    }
}

impl<'a> Add<&'a ExactCoeff> for &'a ExactCoeff {
    type Output = ExactCoeff;
    fn add(self, o: &ExactCoeff) -> ExactCoeff {
        let mut r = self.clone();
        for (m, v) in &o.terms {
            r.add_term(m.clone(), v);
        }
        r
    }
}

impl<'a> Sub<&'a ExactCoeff> for &'a ExactCoeff {
    type Output = ExactCoeff;
    fn sub(self, o: &ExactCoeff) -> ExactCoeff {
        let mut r = self.clone();
        for (m, v) in &o.terms {
            r.add_term(m.clone(), &-v);
        }
        r
    }
}

impl<'a> Mul<&'a ExactCoeff> for &'a ExactCoeff {
    type Output = ExactCoeff;
    fn mul(self, o: &ExactCoeff) -> ExactCoeff {
        let mut r = ExactCoeff::zero();
        for (m1, v1) in &self.terms {
            for (m2, v2) in &o.terms {
                r.add_term(m1.mul(m2), &(v1 * v2));
            }
        }
        r
    }
}

impl Neg for &ExactCoeff {
    type Output = ExactCoeff;
    fn neg(self) -> ExactCoeff {
        ExactCoeff { terms: self.terms.iter().map(|(m, v)| (m.clone(), -v)).collect() }
    }
}

forward_owned_binops!(ExactCoeff, Add::add, Sub::sub, Mul::mul);

impl From<GaussianRational> for ExactCoeff {
    fn from(v: GaussianRational) -> Self {
        ExactCoeff::constant(v)
    }
}

impl fmt::Display for ExactCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, v)| {
                let mut s = format!("({v})");
                for (sym, e) in m.powers() {
                    if e == 1 {
                        s.push_str(&format!("·{sym}"));
                    } else {
                        s.push_str(&format!("·{sym}^{e}"));
                    }
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for ExactCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Numeric value of a rational, for callers outside this module.
pub fn rational_value(q: &BigRational) -> f64 {
    rational_to_f64(q)
}
