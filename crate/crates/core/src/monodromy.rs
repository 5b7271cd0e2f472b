//! Monodromy of Hadamard and exponential eñe products from the monodromies and
//! polar parts of the factors.
//!
//! For a pair `αβ = γ` with monodromies `Δ_αF`, `Δ_βG` given as global elements
//! of `K[z^{±1}, log z]`:
//!
//! * Hadamard, totally holomorphic:
//!   `−(1/2πi) ∫_α^{z/β} Δ_αF(u) Δ_βG(z/u) du/u`.
//! * Hadamard, polar parts: add
//!   `−Res_{u=α}(F₀(u) Δ_βG(z/u)/u) − Res_{u=β}(G₀(u) Δ_αF(z/u)/u)`.
//! * Eñe, totally holomorphic:
//!   `(1/2πi) Δ_αF(α) Δ_βG(z/α) + (1/2πi) ∫_α^{z/β} (Δ_αF)′(u) Δ_βG(z/u) du`.
//! * Eñe, polar parts: add
//!   `Res_{u=α}(F₀′(u) Δ_βG(z/u)) + Res_{u=β}(G₀(u) (Δ_αF)′(z/u) z/u²)`.
//!
//! The `z/u²` factor in the last residue is the Jacobian of `u ↦ z/u` applied
//! to `F′(u) du`; without it the formula disagrees with `F ⋆_e G = −K₀ ⊙ F ⊙ G`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::coeffs::{CoeffError, ExactCoeff, GaussianRational};
use crate::logpoly::{BiLogPoly, LogLaurentPoly};
use crate::series::AnySeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonodromyError {
    #[error("singularity {location} of {function} has a polar germ part; the totally holomorphic formula does not apply")]
    GermNotTotallyHolomorphic { function: String, location: Box<GaussianRational> },
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// Uniform part `F₀` of a singularity: holomorphic, or a polar part
/// `Σ_{k=1}^d a_k (z−α)^{−k}` plus a holomorphic remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GermPart {
    TotallyHolomorphic,
    Polar(Vec<ExactCoeff>),
}

impl GermPart {
    pub fn polar(coeffs: Vec<ExactCoeff>) -> Result<Self, MonodromyError> {
        match coeffs.last() {
            None => Err(MonodromyError::InvalidSpec("empty polar part".into())),
            Some(c) if c.is_zero() => {
                Err(MonodromyError::InvalidSpec("leading polar coefficient is zero".into()))
            }
            Some(_) => Ok(GermPart::Polar(coeffs)),
        }
    }

    pub fn polar_coeffs(&self) -> &[ExactCoeff] {
        match self {
            GermPart::TotallyHolomorphic => &[],
            GermPart::Polar(c) => c,
        }
    }

    /// Polar part of `F₀′`: `b₁ = 0`, `b_{k+1} = −k a_k`.
    pub fn derivative_polar_coeffs(&self) -> Vec<ExactCoeff> {
        let a = self.polar_coeffs();
        if a.is_empty() {
            return Vec::new();
        }
        let mut b = vec![ExactCoeff::zero()];
        for (idx, ak) in a.iter().enumerate() {
            b.push(ak.scale(&GaussianRational::from_int(-(idx as i64 + 1))));
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Singularity {
    pub location: GaussianRational,
    pub monodromy: LogLaurentPoly,
    pub germ: GermPart,
}

impl Singularity {
    pub fn new(location: GaussianRational, monodromy: LogLaurentPoly, germ: GermPart) -> Result<Self, MonodromyError> {
        if location.is_zero() {
            return Err(MonodromyError::InvalidSpec("singularity at the origin".into()));
        }
        Ok(Singularity { location, monodromy, germ })
    }

    pub fn totally_holomorphic(location: GaussianRational, monodromy: LogLaurentPoly) -> Result<Self, MonodromyError> {
        Self::new(location, monodromy, GermPart::TotallyHolomorphic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub name: String,
    pub germ_at_zero: Option<AnySeries>,
    singularities: Vec<Singularity>,
}

impl FunctionSpec {
    pub fn new(name: impl Into<String>, germ_at_zero: Option<AnySeries>, singularities: Vec<Singularity>) -> Result<Self, MonodromyError> {
        for (i, s) in singularities.iter().enumerate() {
            if s.location.is_zero() {
                return Err(MonodromyError::InvalidSpec("singularity at the origin".into()));
            }
            if singularities[..i].iter().any(|t| t.location == s.location) {
                return Err(MonodromyError::InvalidSpec(format!("duplicate singularity {}", s.location)));
            }
            if let GermPart::Polar(c) = &s.germ {
                GermPart::polar(c.clone())?;
            }
        }
        Ok(FunctionSpec { name: name.into(), germ_at_zero, singularities })
    }

    pub fn singularities(&self) -> &[Singularity] {
        &self.singularities
    }

    /// `Li_k`: one totally holomorphic singularity at 1 with
    /// `Δ₁ Li_k = −(2πi/(k−1)!) (log z)^{k−1}`.
    pub fn polylog(k: u32) -> Self {
        assert!(k >= 1, "polylogarithm index starts at 1");
        let c = (-ExactCoeff::two_pi_i()).scale(&inv_factorial(k - 1));
        let s = Singularity::totally_holomorphic(GaussianRational::one(), LogLaurentPoly::term(0, k - 1, c))
            .expect("nonzero location");
        FunctionSpec { name: format!("Li_{k}"), germ_at_zero: None, singularities: vec![s] }
    }

    /// `−K₀ = −1/(z−1) − 1/(z−1)²`, uniform at 1.
    pub fn neg_koebe() -> Self {
        let germ = GermPart::Polar(vec![ExactCoeff::int(-1), ExactCoeff::int(-1)]);
        let s = Singularity::new(GaussianRational::one(), LogLaurentPoly::zero(), germ).expect("nonzero location");
        FunctionSpec { name: "-K0".into(), germ_at_zero: None, singularities: vec![s] }
    }
}

/// Zeros (positive) and poles (negative) with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Divisor {
    points: BTreeMap<GaussianRational, i64>,
}

impl Divisor {
    pub fn new<I: IntoIterator<Item = (GaussianRational, i64)>>(points: I) -> Result<Self, MonodromyError> {
        let mut d = Divisor::default();
        for (loc, n) in points {
            if loc.is_zero() {
                return Err(MonodromyError::InvalidSpec("divisor point at the origin".into()));
            }
            d.add(loc, n);
        }
        Ok(d)
    }

    fn add(&mut self, loc: GaussianRational, n: i64) {
        let slot = self.points.entry(loc.clone()).or_insert(0);
        *slot += n;
        if *slot == 0 {
            self.points.remove(&loc);
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (&GaussianRational, i64)> {
        self.points.iter().map(|(l, n)| (l, *n))
    }

    pub fn multiplicity(&self, loc: &GaussianRational) -> i64 {
        self.points.get(loc).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `log f` for `f = ∏ (1 − z/α)^{n_α}`: constant monodromy `2πi n_α` at each `α`.
    pub fn log_spec(&self, name: impl Into<String>) -> FunctionSpec {
        let singularities = self
            .points()
            .map(|(loc, n)| {
                let m = LogLaurentPoly::constant(ExactCoeff::two_pi_i().scale(&GaussianRational::from_int(n)));
                Singularity::totally_holomorphic(loc.clone(), m).expect("nonzero location")
            })
            .collect();
        FunctionSpec { name: name.into(), germ_at_zero: None, singularities }
    }
}

/// `n_γ = Σ_{αβ=γ} n_α n_β`.
pub fn divisor_ene(f: &Divisor, g: &Divisor) -> Divisor {
    let mut out = Divisor::default();
    for (a, na) in f.points() {
        for (b, nb) in g.points() {
            out.add(a * b, na * nb);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    Hadamard,
    Ene,
}

impl ProductKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProductKind::Hadamard => "hadamard",
            ProductKind::Ene => "ene",
        }
    }
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairContribution {
    pub alpha: GaussianRational,
    pub beta: GaussianRational,
    pub value: LogLaurentPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonodromyResult {
    pub gamma: GaussianRational,
    pub product: ProductKind,
    pub pairs: Vec<PairContribution>,
    pub value: LogLaurentPoly,
    pub advisory: Option<String>,
}

/// All products `αβ`, grouped by value, pairs in sorted order.
pub fn product_set(f: &FunctionSpec, g: &FunctionSpec) -> Vec<(GaussianRational, Vec<(GaussianRational, GaussianRational)>)> {
    let mut groups: BTreeMap<GaussianRational, Vec<(GaussianRational, GaussianRational)>> = BTreeMap::new();
    for s in f.singularities() {
        for t in g.singularities() {
            groups
                .entry(&s.location * &t.location)
                .or_default()
                .push((s.location.clone(), t.location.clone()));
        }
    }
    groups
        .into_iter()
        .map(|(gamma, mut pairs)| {
            pairs.sort();
            (gamma, pairs)
        })
        .collect()
}

fn inv_factorial(n: u32) -> GaussianRational {
    let mut f = BigInt::one();
    for j in 2..=n {
        f *= BigInt::from(j);
    }
    GaussianRational::new(BigRational::new(BigInt::one(), f), BigRational::zero())
}

fn inv_two_pi_i() -> ExactCoeff {
    ExactCoeff::two_pi_i().invert_monomial().expect("2πi is a unit")
}

/// `Res_{u=p} (Σ_k a_k (u−p)^{−k} · H(u)) = Σ_k a_k H^{(k−1)}(p)/(k−1)!` for `H`
/// holomorphic at `p`.
pub fn residue(polar: &[ExactCoeff], pole: &GaussianRational, h: &BiLogPoly) -> Result<LogLaurentPoly, CoeffError> {
    let mut acc = LogLaurentPoly::zero();
    let mut deriv = h.clone();
    for (idx, a) in polar.iter().enumerate() {
        if !a.is_zero() {
            let v = deriv.eval_u_at(pole)?;
            acc = &acc + &v.scale(&a.scale(&inv_factorial(idx as u32)));
        }
        deriv = deriv.u_derivative();
    }
    Ok(acc)
}

fn contributing<'a>(
    f: &'a FunctionSpec,
    g: &'a FunctionSpec,
    gamma: &GaussianRational,
) -> Vec<(&'a Singularity, &'a Singularity)> {
    let mut pairs = Vec::new();
    for s in f.singularities() {
        for t in g.singularities() {
            if &(&s.location * &t.location) == gamma {
                pairs.push((s, t));
            }
        }
    }
    pairs.sort_by(|a, b| (&a.0.location, &a.1.location).cmp(&(&b.0.location, &b.1.location)));
    pairs
}

fn require_totally_holomorphic(spec: &FunctionSpec, s: &Singularity) -> Result<(), MonodromyError> {
    match s.germ {
        GermPart::TotallyHolomorphic => Ok(()),
        GermPart::Polar(_) => Err(MonodromyError::GermNotTotallyHolomorphic {
            function: spec.name.clone(),
            location: Box::new(s.location.clone()),
        }),
    }
}

fn hadamard_pair_integral(s: &Singularity, t: &Singularity) -> Result<LogLaurentPoly, CoeffError> {
    let integrand = (&s.monodromy.in_u() * &t.monodromy.substitute_z_over_u()).mul_u_pow(-1);
    let integral = integrand.integrate_u(&s.location, &t.location)?;
    Ok(integral.scale(&-inv_two_pi_i()))
}

fn hadamard_pair_residues(s: &Singularity, t: &Singularity) -> Result<LogLaurentPoly, CoeffError> {
    let mut acc = LogLaurentPoly::zero();
    if let GermPart::Polar(a) = &s.germ {
        let h = t.monodromy.substitute_z_over_u().mul_u_pow(-1);
        acc = &acc - &residue(a, &s.location, &h)?;
    }
    if let GermPart::Polar(b) = &t.germ {
        let h = s.monodromy.substitute_z_over_u().mul_u_pow(-1);
        acc = &acc - &residue(b, &t.location, &h)?;
    }
    Ok(acc)
}

fn ene_pair_total(s: &Singularity, t: &Singularity) -> Result<LogLaurentPoly, CoeffError> {
    let at_alpha = s.monodromy.eval_at(&s.location)?;
    let point_term = t.monodromy.rescale_argument(&s.location)?.scale(&at_alpha);
    let integrand = &s.monodromy.derivative().in_u() * &t.monodromy.substitute_z_over_u();
    let integral = integrand.integrate_u(&s.location, &t.location)?;
    Ok((&point_term + &integral).scale(&inv_two_pi_i()))
}

fn ene_pair_residues(s: &Singularity, t: &Singularity) -> Result<LogLaurentPoly, CoeffError> {
    let mut acc = LogLaurentPoly::zero();
    if matches!(s.germ, GermPart::Polar(_)) {
        let h = t.monodromy.substitute_z_over_u();
        acc = &acc + &residue(&s.germ.derivative_polar_coeffs(), &s.location, &h)?;
    }
    if let GermPart::Polar(b) = &t.germ {
        let h = s.monodromy.derivative().substitute_z_over_u().mul_u_pow(-2).mul_z_pow(1);
        acc = &acc + &residue(b, &t.location, &h)?;
    }
    Ok(acc)
}

fn assemble<P>(
    f: &FunctionSpec,
    g: &FunctionSpec,
    gamma: &GaussianRational,
    product: ProductKind,
    total_only: bool,
    pair_value: P,
) -> Result<MonodromyResult, MonodromyError>
where
    P: Fn(&Singularity, &Singularity) -> Result<LogLaurentPoly, CoeffError>,
{
    let pairs = contributing(f, g, gamma);
    if total_only {
        for (s, t) in &pairs {
            require_totally_holomorphic(f, s)?;
            require_totally_holomorphic(g, t)?;
        }
    }
    let mut contributions = Vec::with_capacity(pairs.len());
    let mut value = LogLaurentPoly::zero();
    for (s, t) in pairs {
        let v = pair_value(s, t)?;
        value = &value + &v;
        contributions.push(PairContribution { alpha: s.location.clone(), beta: t.location.clone(), value: v });
    }
    let advisory = contributions
        .is_empty()
        .then(|| format!("{gamma} is not a product of declared singularities of {} and {}", f.name, g.name));
    Ok(MonodromyResult { gamma: gamma.clone(), product, pairs: contributions, value, advisory })
}

pub fn hadamard_monodromy_total(f: &FunctionSpec, g: &FunctionSpec, gamma: &GaussianRational) -> Result<MonodromyResult, MonodromyError> {
    assemble(f, g, gamma, ProductKind::Hadamard, true, hadamard_pair_integral)
}

pub fn hadamard_monodromy_general(f: &FunctionSpec, g: &FunctionSpec, gamma: &GaussianRational) -> Result<MonodromyResult, MonodromyError> {
    assemble(f, g, gamma, ProductKind::Hadamard, false, |s, t| {
        Ok(&hadamard_pair_integral(s, t)? + &hadamard_pair_residues(s, t)?)
    })
}

pub fn ene_monodromy_total(f: &FunctionSpec, g: &FunctionSpec, gamma: &GaussianRational) -> Result<MonodromyResult, MonodromyError> {
    assemble(f, g, gamma, ProductKind::Ene, true, ene_pair_total)
}

pub fn ene_monodromy_general(f: &FunctionSpec, g: &FunctionSpec, gamma: &GaussianRational) -> Result<MonodromyResult, MonodromyError> {
    assemble(f, g, gamma, ProductKind::Ene, false, |s, t| {
        Ok(&ene_pair_total(s, t)? + &ene_pair_residues(s, t)?)
    })
}

pub fn ene_symmetry_check(f: &FunctionSpec, g: &FunctionSpec, gamma: &GaussianRational) -> Result<bool, MonodromyError> {
    Ok(ene_monodromy_total(f, g, gamma)?.value == ene_monodromy_total(g, f, gamma)?.value)
}

/// `Δ₁ Li_k` by iterating `Li_{j+1} = Li_j ⊙ Li_1` from `Δ₁ Li_1 = −2πi`.
pub fn polylog_monodromy(k: u32) -> LogLaurentPoly {
    assert!(k >= 1, "polylogarithm index starts at 1");
    let one = GaussianRational::one();
    let li1 = FunctionSpec::polylog(1);
    let mut current = li1.singularities()[0].monodromy.clone();
    for j in 1..k {
        let s = Singularity::totally_holomorphic(one.clone(), current).expect("nonzero location");
        let spec = FunctionSpec { name: format!("Li_{j}"), germ_at_zero: None, singularities: vec![s] };
        current = hadamard_monodromy_total(&spec, &li1, &one).expect("totally holomorphic").value;
    }
    current
}
