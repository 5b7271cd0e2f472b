//! The ring `K[z^{±1}, log z]` and its bivariate extension in an integration
//! variable `u`.
//!
//! `log(z/u)` is rewritten formally as `log z − log u`, and endpoint values
//! `log α` stay symbolic (`log 1` is dropped). Numeric validity of those
//! rewrites on concrete paths is checked by the contour oracle, not here.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::coeffs::{Assignment, CoeffError, ConstantSymbol, ExactCoeff, GaussianRational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogPolyError {
    #[error("log z evaluated at z = 0")]
    ZeroArgument,
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

fn gr_int(n: BigInt) -> GaussianRational {
    GaussianRational::new(BigRational::from_integer(n), BigRational::zero())
}

fn coeff_scaled(c: &ExactCoeff, n: BigInt) -> ExactCoeff {
    c.scale(&gr_int(n))
}

/// `(L + shift)^l` as a list of `(power of L, coefficient)`.
fn shifted_powers(l: u32, shift: &ExactCoeff) -> Vec<(u32, ExactCoeff)> {
    let mut pow = ExactCoeff::one();
    let mut out = Vec::with_capacity(l as usize + 1);
    for j in 0..=l {
        // coefficient of L^(l-j) is C(l, j) shift^j
        out.push((l - j, coeff_scaled(&pow, binomial(l, j))));
        pow = &pow * shift;
    }
    out
}

/// A point of the log-Riemann surface of `log z`: `log z = Log z + 2πi·winding`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub z: Complex64,
    pub winding: i64,
}

impl BranchPoint {
    pub fn principal(z: Complex64) -> Self {
        BranchPoint { z, winding: 0 }
    }

    pub fn log(&self) -> Result<Complex64, LogPolyError> {
        if self.z == Complex64::zero() {
            return Err(LogPolyError::ZeroArgument);
        }
        Ok(self.z.ln() + Complex64::new(0.0, std::f64::consts::TAU * self.winding as f64))
    }
}

/// `Σ c_{m,l} z^m (log z)^l` with `m ∈ ℤ`, `l ≥ 0`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LogLaurentPoly {
    terms: BTreeMap<(i32, u32), ExactCoeff>,
}

impl LogLaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(ExactCoeff::one())
    }

    pub fn constant(c: ExactCoeff) -> Self {
        Self::term(0, 0, c)
    }

    pub fn term(zpow: i32, logpow: u32, c: ExactCoeff) -> Self {
        let mut p = Self::zero();
        p.add_term(zpow, logpow, c);
        p
    }

    pub fn z() -> Self {
        Self::term(1, 0, ExactCoeff::one())
    }

    pub fn log_z() -> Self {
        Self::term(0, 1, ExactCoeff::one())
    }

    pub fn from_terms<I: IntoIterator<Item = ((i32, u32), ExactCoeff)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for ((m, l), c) in terms {
            p.add_term(m, l, c);
        }
        p
    }

    fn add_term(&mut self, zpow: i32, logpow: u32, c: ExactCoeff) {
        if c.is_zero() {
            return;
        }
        let key = (zpow, logpow);
        let slot = self.terms.entry(key).or_default();
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, u32, &ExactCoeff)> {
        self.terms.iter().map(|(&(m, l), c)| (m, l, c))
    }

    pub fn coeff(&self, zpow: i32, logpow: u32) -> ExactCoeff {
        self.terms.get(&(zpow, logpow)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_zpow(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.0).min()
    }

    pub fn max_logpow(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    pub fn symbols(&self) -> BTreeSet<ConstantSymbol> {
        self.terms.values().flat_map(|c| c.symbols()).collect()
    }

    /// Terms in graded lexicographic order on `(zpow, logpow)`.
    pub fn canonical_terms(&self) -> Vec<(i32, u32, ExactCoeff)> {
        let mut v: Vec<_> = self.terms().map(|(m, l, c)| (m, l, c.clone())).collect();
        v.sort_by_key(|&(m, l, _)| (m as i64 + l as i64, m, l));
        v
    }

    pub fn scale(&self, c: &ExactCoeff) -> Self {
        Self::from_terms(self.terms().map(|(m, l, v)| ((m, l), v * c)))
    }

    pub fn mul_z_pow(&self, k: i32) -> Self {
        Self::from_terms(self.terms().map(|(m, l, v)| ((m + k, l), v.clone())))
    }

    /// `d/dz [z^m (log z)^l] = m z^{m-1} (log z)^l + l z^{m-1} (log z)^{l-1}`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, l, c) in self.terms() {
            if m != 0 {
                out.add_term(m - 1, l, c.scale(&GaussianRational::from_int(m as i64)));
            }
            if l > 0 {
                out.add_term(m - 1, l - 1, c.scale(&GaussianRational::from_int(l as i64)));
            }
        }
        out
    }

    /// `z d/dz`.
    pub fn euler_derivative(&self) -> Self {
        self.derivative().mul_z_pow(1)
    }

    /// Substitutes `log z ↦ log z + shift`.
    pub fn shift_log(&self, shift: &ExactCoeff) -> Self {
        let mut out = Self::zero();
        for (m, l, c) in self.terms() {
            for (j, b) in shifted_powers(l, shift) {
                out.add_term(m, j, c * &b);
            }
        }
        out
    }

    /// Continuation once around the origin: `log z ↦ log z + 2πi`.
    pub fn sigma(&self) -> Self {
        self.sigma_power(1)
    }

    /// `Σⁿ p`: `log z ↦ log z + n·2πi`.
    pub fn sigma_power(&self, n: u32) -> Self {
        let shift = ExactCoeff::two_pi_i().scale(&GaussianRational::from_int(n as i64));
        self.shift_log(&shift)
    }

    /// Monodromy at the origin, `Σp − p`.
    pub fn monodromy_at_zero(&self) -> Self {
        &self.sigma() - self
    }

    /// Value at an exact point `z = a ≠ 0`, with `log a` kept symbolic.
    pub fn eval_at(&self, a: &GaussianRational) -> Result<ExactCoeff, CoeffError> {
        let log_a = ExactCoeff::log_of(a)?;
        let mut acc = ExactCoeff::zero();
        for (m, l, c) in self.terms() {
            let t = c.scale(&a.powi(m)?);
            acc = &acc + &(&t * &log_a.pow(l));
        }
        Ok(acc)
    }

    /// `p(z/c)`: `z^m ↦ c^{-m} z^m`, `log z ↦ log z − log c`.
    pub fn rescale_argument(&self, c: &GaussianRational) -> Result<Self, CoeffError> {
        let shift = -ExactCoeff::log_of(c)?;
        let mut out = Self::zero();
        for (m, l, v) in self.terms() {
            let scaled = v.scale(&c.powi(-m)?);
            for (j, b) in shifted_powers(l, &shift) {
                out.add_term(m, j, &scaled * &b);
            }
        }
        Ok(out)
    }

    /// The same polynomial written in the integration variable `u`.
    pub fn in_u(&self) -> BiLogPoly {
        BiLogPoly::from_terms(self.terms().map(|(m, l, c)| (BiKey::new(m, l, 0, 0), c.clone())))
    }

    /// The same polynomial as a `u`-free element of the bivariate ring.
    pub fn in_z(&self) -> BiLogPoly {
        BiLogPoly::from_terms(self.terms().map(|(m, l, c)| (BiKey::new(0, 0, m, l), c.clone())))
    }

    /// `q(z/u)` with `log(z/u)` rewritten as `log z − log u`.
    pub fn substitute_z_over_u(&self) -> BiLogPoly {
        let mut out = BiLogPoly::zero();
        for (m, l, c) in self.terms() {
            // (L_z - L_u)^l = Σ_j C(l,j) L_z^(l-j) (-L_u)^j
            for j in 0..=l {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                let b = coeff_scaled(c, binomial(l, j) * sign);
                out.add_term(BiKey::new(-m, j, m, l - j), b);
            }
        }
        out
    }

    /// Numeric value on the sheet selected by `at.winding`.
    pub fn eval(&self, at: BranchPoint, assignment: &Assignment) -> Result<Complex64, LogPolyError> {
        let log = at.log()?;
        let mut acc = Complex64::zero();
        for (m, l, c) in self.terms() {
            acc += c.eval(assignment)? * at.z.powi(m) * log.powu(l);
        }
        Ok(acc)
    }
}

impl<'a> Add<&'a LogLaurentPoly> for &'a LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn add(self, o: &LogLaurentPoly) -> LogLaurentPoly {
        let mut r = self.clone();
        for (m, l, c) in o.terms() {
            r.add_term(m, l, c.clone());
        }
        r
    }
}

impl<'a> Sub<&'a LogLaurentPoly> for &'a LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn sub(self, o: &LogLaurentPoly) -> LogLaurentPoly {
        let mut r = self.clone();
        for (m, l, c) in o.terms() {
            r.add_term(m, l, -c);
        }
        r
    }
}

impl<'a> Mul<&'a LogLaurentPoly> for &'a LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn mul(self, o: &LogLaurentPoly) -> LogLaurentPoly {
        let mut r = LogLaurentPoly::zero();
        for (m1, l1, c1) in self.terms() {
            for (m2, l2, c2) in o.terms() {
                r.add_term(m1 + m2, l1 + l2, c1 * c2);
            }
        }
        r
    }
}

impl Neg for &LogLaurentPoly {
    type Output = LogLaurentPoly;
    fn neg(self) -> LogLaurentPoly {
        LogLaurentPoly::from_terms(self.terms().map(|(m, l, c)| ((m, l), -c)))
    }
}

macro_rules! forward_owned {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -(&self)
            }
        }
    };
}

forward_owned!(LogLaurentPoly);

impl fmt::Display for LogLaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .canonical_terms()
            .into_iter()
            .map(|(m, l, c)| {
                let mut s = format!("[{c}]");
                match m {
                    0 => {}
                    1 => s.push_str("·z"),
                    _ => s.push_str(&format!("·z^{m}")),
                }
                match l {
                    0 => {}
                    1 => s.push_str("·log(z)"),
                    _ => s.push_str(&format!("·log(z)^{l}")),
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for LogLaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Exponents of `u^upow (log u)^ulog z^zpow (log z)^zlog`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BiKey {
    pub upow: i32,
    pub ulog: u32,
    pub zpow: i32,
    pub zlog: u32,
}

impl BiKey {
    pub fn new(upow: i32, ulog: u32, zpow: i32, zlog: u32) -> Self {
        BiKey { upow, ulog, zpow, zlog }
    }
}

/// Element of `K[u^{±1}, log u, z^{±1}, log z]`, the home of the integrands.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BiLogPoly {
    terms: BTreeMap<BiKey, ExactCoeff>,
}

impl BiLogPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(key: BiKey, c: ExactCoeff) -> Self {
        let mut p = Self::zero();
        p.add_term(key, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (BiKey, ExactCoeff)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, key: BiKey, c: ExactCoeff) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_default();
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (BiKey, &ExactCoeff)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &ExactCoeff) -> Self {
        Self::from_terms(self.terms().map(|(k, v)| (k, v * c)))
    }

    pub fn mul_u_pow(&self, k: i32) -> Self {
        Self::from_terms(self.terms().map(|(key, v)| {
            (BiKey { upow: key.upow + k, ..key }, v.clone())
        }))
    }

    pub fn mul_z_pow(&self, k: i32) -> Self {
        Self::from_terms(self.terms().map(|(key, v)| {
            (BiKey { zpow: key.zpow + k, ..key }, v.clone())
        }))
    }

    /// Partial derivative in `u`.
    pub fn u_derivative(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in self.terms() {
            if k.upow != 0 {
                out.add_term(
                    BiKey { upow: k.upow - 1, ..k },
                    c.scale(&GaussianRational::from_int(k.upow as i64)),
                );
            }
            if k.ulog > 0 {
                out.add_term(
                    BiKey { upow: k.upow - 1, ulog: k.ulog - 1, ..k },
                    c.scale(&GaussianRational::from_int(k.ulog as i64)),
                );
            }
        }
        out
    }

    /// Termwise antiderivative in `u`:
    /// `∫ u^{-1} (log u)^l = (log u)^{l+1}/(l+1)` and, for `k ≠ −1`,
    /// `∫ u^k (log u)^l = u^{k+1} Σ_j (−1)^j l!/(l−j)! (log u)^{l−j} / (k+1)^{j+1}`.
    pub fn antiderivative_u(&self) -> Self {
        let mut out = Self::zero();
        for (key, c) in self.terms() {
            let l = key.ulog;
            if key.upow == -1 {
                out.add_term(
                    BiKey { upow: 0, ulog: l + 1, ..key },
                    c.scale(&GaussianRational::from_ratio(1, l as i64 + 1)),
                );
                continue;
            }
            let kp1 = BigInt::from(key.upow + 1);
            let mut falling = BigInt::one();
            let mut denom = kp1.clone();
            for j in 0..=l {
                let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                let q = BigRational::new(sign * &falling, denom.clone());
                out.add_term(
                    BiKey { upow: key.upow + 1, ulog: l - j, ..key },
                    c.scale(&GaussianRational::new(q, BigRational::zero())),
                );
                falling *= BigInt::from(l - j);
                denom *= &kp1;
            }
        }
        out
    }

    /// Substitutes `u = a` (exact), keeping `log a` symbolic.
    pub fn eval_u_at(&self, a: &GaussianRational) -> Result<LogLaurentPoly, CoeffError> {
        let log_a = ExactCoeff::log_of(a)?;
        let mut out = LogLaurentPoly::zero();
        for (k, c) in self.terms() {
            let v = &c.scale(&a.powi(k.upow)?) * &log_a.pow(k.ulog);
            out.add_term(k.zpow, k.zlog, v);
        }
        Ok(out)
    }

    /// Substitutes `u = z/b`: `u^k ↦ b^{-k} z^k`, `log u ↦ log z − log b`.
    pub fn eval_u_at_z_over(&self, b: &GaussianRational) -> Result<LogLaurentPoly, CoeffError> {
        let shift = -ExactCoeff::log_of(b)?;
        let mut out = LogLaurentPoly::zero();
        for (k, c) in self.terms() {
            let scaled = c.scale(&b.powi(-k.upow)?);
            for (j, coef) in shifted_powers(k.ulog, &shift) {
                out.add_term(k.upow + k.zpow, j + k.zlog, &scaled * &coef);
            }
        }
        Ok(out)
    }

    /// `∫_α^{z/β} p du`, closed form, result in `K[z^{±1}, log z]`.
    pub fn integrate_u(
        &self,
        lower: &GaussianRational,
        upper_divisor: &GaussianRational,
    ) -> Result<LogLaurentPoly, CoeffError> {
        let anti = self.antiderivative_u();
        Ok(&anti.eval_u_at_z_over(upper_divisor)? - &anti.eval_u_at(lower)?)
    }

    pub fn symbols(&self) -> BTreeSet<ConstantSymbol> {
        self.terms.values().flat_map(|c| c.symbols()).collect()
    }
}

impl<'a> Add<&'a BiLogPoly> for &'a BiLogPoly {
    type Output = BiLogPoly;
    fn add(self, o: &BiLogPoly) -> BiLogPoly {
        let mut r = self.clone();
        for (k, c) in o.terms() {
            r.add_term(k, c.clone());
        }
        r
    }
}

impl<'a> Sub<&'a BiLogPoly> for &'a BiLogPoly {
    type Output = BiLogPoly;
    fn sub(self, o: &BiLogPoly) -> BiLogPoly {
        let mut r = self.clone();
        for (k, c) in o.terms() {
            r.add_term(k, -c);
        }
        r
    }
}

impl<'a> Mul<&'a BiLogPoly> for &'a BiLogPoly {
    type Output = BiLogPoly;
    fn mul(self, o: &BiLogPoly) -> BiLogPoly {
        let mut r = BiLogPoly::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in o.terms() {
                let key = BiKey::new(a.upow + b.upow, a.ulog + b.ulog, a.zpow + b.zpow, a.zlog + b.zlog);
                r.add_term(key, ca * cb);
            }
        }
        r
    }
}

impl Neg for &BiLogPoly {
    type Output = BiLogPoly;
    fn neg(self) -> BiLogPoly {
        BiLogPoly::from_terms(self.terms().map(|(k, c)| (k, -c)))
    }
}

forward_owned!(BiLogPoly);

impl fmt::Debug for BiLogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms()
            .map(|(k, c)| {
                format!("[{c}]·u^{}·log(u)^{}·z^{}·log(z)^{}", k.upow, k.ulog, k.zpow, k.zlog)
            })
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}
