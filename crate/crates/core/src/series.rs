//! Truncated power series: Hadamard product, exponential eñe product and the
//! multiplicative eñe product through `exp`/`log`.
//!
//! Every binary operation truncates to the smaller of the two orders.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::coeffs::{ExactCoeff, GaussianRational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("coefficient fields differ: {0} vs {1}")]
    FieldMismatch(FieldTag, FieldTag),
    #[error("bad constant term: {0}")]
    BadConstantTerm(String),
    #[error("roots must be nonzero")]
    ZeroRoot,
    #[error("polylogarithm index must be at least 1")]
    InvalidIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    Rational,
    Exact,
    Complex,
}

impl FieldTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldTag::Rational => "rational",
            FieldTag::Exact => "exact",
            FieldTag::Complex => "complex",
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ring coefficients that can be divided by nonzero integers, which is all the
/// `exp`/`log` recurrences need.
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const FIELD: FieldTag;
    fn from_i64(n: i64) -> Self;
    fn div_int(&self, n: i64) -> Self;
}

/// Coefficients with a multiplicative inverse.
pub trait FieldCoefficient: Coefficient {
    fn inv(&self) -> Option<Self>;
}

impl Coefficient for BigRational {
    const FIELD: FieldTag = FieldTag::Rational;
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn div_int(&self, n: i64) -> Self {
        self / BigRational::from_integer(BigInt::from(n))
    }
}

impl FieldCoefficient for BigRational {
    fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
}

impl Coefficient for Complex64 {
    const FIELD: FieldTag = FieldTag::Complex;
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn div_int(&self, n: i64) -> Self {
        self / n as f64
    }
}

impl FieldCoefficient for Complex64 {
    fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.inv())
    }
}

impl Coefficient for ExactCoeff {
    const FIELD: FieldTag = FieldTag::Exact;
    fn from_i64(n: i64) -> Self {
        ExactCoeff::int(n)
    }
    fn div_int(&self, n: i64) -> Self {
        ExactCoeff::div_int(self, n)
    }
}

impl Coefficient for GaussianRational {
    const FIELD: FieldTag = FieldTag::Exact;
    fn from_i64(n: i64) -> Self {
        GaussianRational::from_int(n)
    }
    fn div_int(&self, n: i64) -> Self {
        self * &GaussianRational::from_ratio(1, n)
    }
}

impl FieldCoefficient for GaussianRational {
    fn inv(&self) -> Option<Self> {
        GaussianRational::inv(self).ok()
    }
}

/// Conversion to a complex double for numeric evaluation.
pub trait ToComplex {
    fn to_complex(&self) -> Complex64;
}

impl ToComplex for BigRational {
    fn to_complex(&self) -> Complex64 {
        Complex64::new(crate::coeffs::rational_value(self), 0.0)
    }
}

impl ToComplex for Complex64 {
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

impl ToComplex for GaussianRational {
    fn to_complex(&self) -> Complex64 {
        self.to_c64()
    }
}

/// Power series `c_0 + c_1 z + … + c_N z^N + O(z^{N+1})`.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> TruncatedSeries<C> {
    /// Series of order `coeffs.len() - 1`. An empty list is read as the zero
    /// series of order 0.
    pub fn new(mut coeffs: Vec<C>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(C::zero());
        }
        TruncatedSeries { coeffs }
    }

    /// Pads with zeros or truncates to order `order`.
    pub fn from_coeffs(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.resize(order + 1, C::zero());
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::from_coeffs(vec![], order)
    }

    pub fn one(order: usize) -> Self {
        Self::from_coeffs(vec![C::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> C {
        self.coeffs.get(n).cloned().unwrap_or_else(C::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs[..=order.min(self.order())].to_vec(), order)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(usize, &C, &C) -> C) -> Self {
        let n = self.order().min(other.order());
        TruncatedSeries {
            coeffs: (0..=n).map(|k| f(k, &self.coeffs[k], &other.coeffs[k])).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |_, a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |_, a, b| a.clone() - b.clone())
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn scale(&self, s: &C) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| {
                (0..=k).fold(C::zero(), |acc, j| {
                    acc + self.coeffs[j].clone() * other.coeffs[k - j].clone()
                })
            })
            .collect();
        TruncatedSeries { coeffs }
    }

    /// Coefficientwise product `Σ A_n B_n z^n`.
    pub fn hadamard(&self, other: &Self) -> Self {
        self.zip_with(other, |_, a, b| a.clone() * b.clone())
    }

    /// Exponential eñe product `-Σ n A_n B_n z^n`.
    pub fn ene_exp(&self, other: &Self) -> Self {
        self.zip_with(other, |n, a, b| -(C::from_i64(n as i64) * a.clone() * b.clone()))
    }

    pub fn derivative(&self) -> Self {
        let n = self.order();
        let coeffs = (0..=n)
            .map(|k| match self.coeffs.get(k + 1) {
                Some(c) => C::from_i64(k as i64 + 1) * c.clone(),
                None => C::zero(),
            })
            .collect();
        TruncatedSeries { coeffs }
    }

    /// `exp F` for `F(0) = 0`, from `f' = F' f`.
    pub fn exp_series(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::BadConstantTerm("exp requires c_0 = 0".into()));
        }
        let n = self.order();
        let mut f = Vec::with_capacity(n + 1);
        f.push(C::one());
        for m in 1..=n {
            let s = (1..=m).fold(C::zero(), |acc, k| {
                acc + C::from_i64(k as i64) * self.coeffs[k].clone() * f[m - k].clone()
            });
            f.push(s.div_int(m as i64));
        }
        Ok(TruncatedSeries { coeffs: f })
    }

    /// `log f` for `f(0) = 1`, from `F' f = f'`.
    pub fn log_series(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::BadConstantTerm("log requires c_0 = 1".into()));
        }
        let n = self.order();
        let mut big_f: Vec<C> = Vec::with_capacity(n + 1);
        big_f.push(C::zero());
        for m in 1..=n {
            let s = (1..m).fold(C::zero(), |acc, k| {
                acc + C::from_i64(k as i64) * big_f[k].clone() * self.coeffs[m - k].clone()
            });
            let v = C::from_i64(m as i64) * self.coeffs[m].clone() - s;
            big_f.push(v.div_int(m as i64));
        }
        Ok(TruncatedSeries { coeffs: big_f })
    }

    /// Eñe product `exp(log f ⋆_e log g)` for `f(0) = g(0) = 1`.
    pub fn ene(&self, other: &Self) -> Result<Self, SeriesError> {
        let lf = self.log_series()?;
        let lg = other.log_series()?;
        lf.ene_exp(&lg).exp_series()
    }
}

impl<C: FieldCoefficient> TruncatedSeries<C> {
    /// Truncation of `∏ (1 - z/α)`.
    pub fn poly_from_roots(roots: &[C], order: usize) -> Result<Self, SeriesError> {
        let mut acc = Self::one(order);
        for r in roots {
            let inv = r.inv().ok_or(SeriesError::ZeroRoot)?;
            let factor = Self::from_coeffs(vec![C::one(), -inv], order);
            acc = acc.mul(&factor);
        }
        Ok(acc)
    }
}

impl<C: Coefficient + ToComplex> TruncatedSeries<C> {
    /// Horner evaluation of the partial sum.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c.to_complex())
    }
}

impl<C: fmt::Debug> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries{:?}", self.coeffs)
    }
}

/// Expansion of the Koebe function `z/(1-z)^2 = Σ n z^n`.
pub fn koebe<C: Coefficient>(order: usize) -> TruncatedSeries<C> {
    TruncatedSeries::new((0..=order).map(|n| C::from_i64(n as i64)).collect())
}

/// Geometric series `Σ z^n`.
pub fn geometric<C: Coefficient>(order: usize) -> TruncatedSeries<C> {
    TruncatedSeries::new(vec![C::one(); order + 1])
}

/// `Li_k(z) = Σ_{n≥1} z^n / n^k`.
pub fn polylog_series<C: Coefficient>(k: u32, order: usize) -> Result<TruncatedSeries<C>, SeriesError> {
    if k == 0 {
        return Err(SeriesError::InvalidIndex);
    }
    let coeffs = (0..=order)
        .map(|n| {
            if n == 0 {
                C::zero()
            } else {
                (0..k).fold(C::one(), |acc, _| acc.div_int(n as i64))
            }
        })
        .collect();
    Ok(TruncatedSeries::new(coeffs))
}

/// Series whose coefficient field is chosen at run time (documents, CLI).
#[derive(Clone, Debug, PartialEq)]
pub enum AnySeries {
    Rational(TruncatedSeries<BigRational>),
    Exact(TruncatedSeries<ExactCoeff>),
    Complex(TruncatedSeries<Complex64>),
}

macro_rules! dispatch_binary {
    ($a:expr, $b:expr, |$x:ident, $y:ident| $body:expr) => {
        match ($a, $b) {
            (AnySeries::Rational($x), AnySeries::Rational($y)) => Ok(AnySeries::Rational($body?)),
            (AnySeries::Exact($x), AnySeries::Exact($y)) => Ok(AnySeries::Exact($body?)),
            (AnySeries::Complex($x), AnySeries::Complex($y)) => Ok(AnySeries::Complex($body?)),
            (a, b) => Err(SeriesError::FieldMismatch(a.field(), b.field())),
        }
    };
}

impl AnySeries {
    pub fn field(&self) -> FieldTag {
        match self {
            AnySeries::Rational(_) => FieldTag::Rational,
            AnySeries::Exact(_) => FieldTag::Exact,
            AnySeries::Complex(_) => FieldTag::Complex,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            AnySeries::Rational(s) => s.order(),
            AnySeries::Exact(s) => s.order(),
            AnySeries::Complex(s) => s.order(),
        }
    }

    pub fn truncate(&self, order: usize) -> AnySeries {
        match self {
            AnySeries::Rational(s) => AnySeries::Rational(s.truncate(order)),
            AnySeries::Exact(s) => AnySeries::Exact(s.truncate(order)),
            AnySeries::Complex(s) => AnySeries::Complex(s.truncate(order)),
        }
    }

    pub fn hadamard(&self, other: &AnySeries) -> Result<AnySeries, SeriesError> {
        dispatch_binary!(self, other, |a, b| Ok::<_, SeriesError>(a.hadamard(b)))
    }

    pub fn ene_exp(&self, other: &AnySeries) -> Result<AnySeries, SeriesError> {
        dispatch_binary!(self, other, |a, b| Ok::<_, SeriesError>(a.ene_exp(b)))
    }

    pub fn ene(&self, other: &AnySeries) -> Result<AnySeries, SeriesError> {
        dispatch_binary!(self, other, |a, b| a.ene(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::rational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        rational(n, d)
    }

    fn qs(v: &[(i64, i64)], order: usize) -> TruncatedSeries<Q> {
        TruncatedSeries::from_coeffs(v.iter().map(|&(n, d)| q(n, d)).collect(), order)
    }

    #[test]
    fn hadamard_with_geometric_is_identity() {
        let g = geometric::<Q>(10);
        assert_eq!(g.hadamard(&g), g);
        let f = qs(&[(3, 1), (-1, 2), (0, 1), (7, 5)], 10);
        assert_eq!(f.hadamard(&g), f);
    }

    #[test]
    fn polylog_hadamard_recursion() {
        let l1 = polylog_series::<Q>(1, 12).unwrap();
        assert_eq!(l1.hadamard(&l1), polylog_series::<Q>(2, 12).unwrap());
        for (k, l) in [(1, 3), (2, 2), (3, 4)] {
            let a = polylog_series::<Q>(k, 15).unwrap();
            let b = polylog_series::<Q>(l, 15).unwrap();
            assert_eq!(a.hadamard(&b), polylog_series::<Q>(k + l, 15).unwrap());
        }
        assert_eq!(polylog_series::<Q>(2, 6).unwrap().coeff(4), q(1, 16));
        assert!(polylog_series::<Q>(0, 3).is_err());
    }

    #[test]
    fn ene_exp_of_log_series() {
        let l1 = polylog_series::<Q>(1, 12).unwrap();
        assert_eq!(l1.ene_exp(&l1), l1.neg());
        let zero = TruncatedSeries::<Q>::zero(12);
        assert_eq!(l1.ene_exp(&zero), zero);
    }

    #[test]
    fn koebe_expansion() {
        // z/(1-z)^2 by long division: z + 2z^2 + 3z^3 + ...
        assert_eq!(koebe::<Q>(3), qs(&[(0, 1), (1, 1), (2, 1), (3, 1)], 3));
        assert_eq!(koebe::<Q>(0), qs(&[(0, 1)], 0));
        let v = koebe::<Complex64>(60).eval(Complex64::new(0.5, 0.0));
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exp_log_basics() {
        let one_plus_z = qs(&[(1, 1), (1, 1)], 6);
        let mercator = one_plus_z.log_series().unwrap();
        for n in 1..=6i64 {
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(mercator.coeff(n as usize), q(sign, n));
        }
        let z = qs(&[(0, 1), (1, 1)], 7);
        let e = z.exp_series().unwrap();
        let mut fact = 1i64;
        for n in 0..=7i64 {
            if n > 0 {
                fact *= n;
            }
            assert_eq!(e.coeff(n as usize), q(1, fact));
        }
        assert!(matches!(one_plus_z.exp_series(), Err(SeriesError::BadConstantTerm(_))));
        assert!(matches!(z.log_series(), Err(SeriesError::BadConstantTerm(_))));
    }

    #[test]
    fn ene_root_product_examples() {
        let one_plus_z = qs(&[(1, 1), (1, 1)], 12);
        assert_eq!(one_plus_z.ene(&one_plus_z).unwrap(), qs(&[(1, 1), (-1, 1)], 12));
        let f = qs(&[(1, 1), (-1, 1)], 12);
        let g = qs(&[(1, 1), (-1, 2)], 12);
        assert_eq!(f.ene(&g).unwrap(), g);
    }

    #[test]
    fn roots_expansion() {
        let p = TruncatedSeries::<Q>::poly_from_roots(&[q(1, 1)], 4).unwrap();
        assert_eq!(p, qs(&[(1, 1), (-1, 1)], 4));
        // (1 - z/2)(1 - z/3) = 1 - 5z/6 + z^2/6
        let p = TruncatedSeries::<Q>::poly_from_roots(&[q(2, 1), q(3, 1)], 4).unwrap();
        assert_eq!(p, qs(&[(1, 1), (-5, 6), (1, 6)], 4));
        assert_eq!(TruncatedSeries::<Q>::poly_from_roots(&[], 3).unwrap(), TruncatedSeries::one(3));
        assert_eq!(
            TruncatedSeries::<Q>::poly_from_roots(&[q(0, 1)], 3),
            Err(SeriesError::ZeroRoot)
        );
    }

    #[test]
    fn horner_evaluation() {
        let g = geometric::<Q>(60);
        let v = g.eval(Complex64::new(0.3, 0.0));
        assert!((v.re - 1.0 / 0.7).abs() < 1e-12);
        let f = qs(&[(5, 3), (1, 1)], 4);
        assert_eq!(f.eval(Complex64::zero()), Complex64::new(5.0 / 3.0, 0.0));
    }

    #[test]
    fn truncation_to_min_order() {
        let a = geometric::<Q>(5);
        let b = geometric::<Q>(3);
        assert_eq!(a.hadamard(&b).order(), 3);
        assert_eq!(a.mul(&b).order(), 3);
    }

    #[test]
    fn any_series_field_mismatch() {
        let a = AnySeries::Rational(geometric(3));
        let b = AnySeries::Complex(geometric(3));
        assert_eq!(a.hadamard(&b), Err(SeriesError::FieldMismatch(FieldTag::Rational, FieldTag::Complex)));
        assert!(a.hadamard(&a).is_ok());
    }
}
