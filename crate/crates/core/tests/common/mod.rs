//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use hadene::coeffs::{rational, ConstantSymbol, ExactCoeff, GaussianRational, Monomial};
use hadene::logpoly::LogLaurentPoly;
use hadene::monodromy::{FunctionSpec, GermPart, Singularity};
use hadene::series::TruncatedSeries;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(r: &mut impl Rng) -> BigRational {
    rational(r.gen_range(-6..=6), r.gen_range(1..=4))
}

pub fn nonzero_rational(r: &mut impl Rng) -> BigRational {
    loop {
        let q = small_rational(r);
        if q != rational(0, 1) {
            return q;
        }
    }
}

pub fn gaussian(r: &mut impl Rng) -> GaussianRational {
    GaussianRational::new(small_rational(r), small_rational(r))
}

/// Nonzero and off the closed negative real axis.
pub fn location(r: &mut impl Rng) -> GaussianRational {
    loop {
        let re = rational(r.gen_range(-4..=4), r.gen_range(1..=3));
        let im = if r.gen_bool(0.5) { rational(0, 1) } else { rational(r.gen_range(-3..=3), r.gen_range(1..=3)) };
        let z = GaussianRational::new(re.clone(), im.clone());
        if im == rational(0, 1) && re <= rational(0, 1) {
            continue;
        }
        return z;
    }
}

/// A relation-free set of constants.
pub fn symbol(r: &mut impl Rng) -> ConstantSymbol {
    match r.gen_range(0..4) {
        0 => ConstantSymbol::TwoPiI,
        1 => ConstantSymbol::Log(GaussianRational::from_int(2)),
        2 => ConstantSymbol::Log(GaussianRational::from_int(3)),
        _ => ConstantSymbol::Loc(GaussianRational::from_ratio(5, 7)),
    }
}

pub fn exact_coeff(r: &mut impl Rng) -> ExactCoeff {
    let n = r.gen_range(0..=3);
    ExactCoeff::from_terms((0..n).map(|_| {
        let k = r.gen_range(0..=2);
        let m = Monomial::from_powers((0..k).map(|_| (symbol(r), r.gen_range(-1..=2))).collect::<Vec<_>>());
        (m, gaussian(r))
    }))
}

pub fn nonzero_exact(r: &mut impl Rng) -> ExactCoeff {
    loop {
        let c = exact_coeff(r);
        if !c.is_empty() {
            return c;
        }
    }
}

/// Random element with `zpow ∈ zpows`, `logpow ≤ max_log`.
pub fn logpoly(r: &mut impl Rng, zpows: std::ops::RangeInclusive<i32>, max_log: u32) -> LogLaurentPoly {
    let n = r.gen_range(1..=4);
    LogLaurentPoly::from_terms((0..n).map(|_| {
        ((r.gen_range(zpows.clone()), r.gen_range(0..=max_log)), nonzero_exact(r))
    }))
}

pub fn rational_series(r: &mut impl Rng, order: usize) -> TruncatedSeries<BigRational> {
    TruncatedSeries::from_coeffs((0..=order).map(|_| small_rational(r)).collect(), order)
}

/// Integer coefficients with constant term 1.
pub fn unit_integer_series(r: &mut impl Rng, degree: usize, order: usize) -> TruncatedSeries<BigRational> {
    let mut c = vec![rational(1, 1)];
    c.extend((0..degree).map(|_| rational(r.gen_range(-5..=5), 1)));
    TruncatedSeries::from_coeffs(c, order)
}

/// Root with `1/2 ≤ |α| ≤ 2`.
pub fn root(r: &mut impl Rng) -> GaussianRational {
    loop {
        let a = GaussianRational::new(rational(r.gen_range(-8..=8), 4), rational(r.gen_range(-8..=8), 4));
        let n2 = a.norm_sqr();
        if n2 >= rational(1, 4) && n2 <= rational(4, 1) {
            return a;
        }
    }
}

pub fn totally_holomorphic_spec(name: &str, sings: Vec<(GaussianRational, LogLaurentPoly)>) -> FunctionSpec {
    let s = sings
        .into_iter()
        .map(|(l, m)| Singularity::totally_holomorphic(l, m).expect("nonzero location"))
        .collect();
    FunctionSpec::new(name, None, s).expect("distinct locations")
}

pub fn spec_with_germs(name: &str, sings: Vec<(GaussianRational, LogLaurentPoly, GermPart)>) -> FunctionSpec {
    let s = sings
        .into_iter()
        .map(|(l, m, g)| Singularity::new(l, m, g).expect("nonzero location"))
        .collect();
    FunctionSpec::new(name, None, s).expect("distinct locations")
}

pub fn inv_factorial(n: u32) -> GaussianRational {
    let f: i64 = (1..=n as i64).product();
    GaussianRational::from_ratio(1, f)
}
