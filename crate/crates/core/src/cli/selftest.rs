//! Fixed-input fixtures covering each exact identity and the numeric oracle.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coeffs::{rational, ExactCoeff, GaussianRational};
use crate::continuation::{self, AnalyticElement, ContourSpec, OracleOptions, QuadratureOptions};
use crate::logpoly::LogLaurentPoly;
use crate::monodromy::{self, Divisor, FunctionSpec, GermPart, ProductKind, Singularity};
use crate::series::{koebe, polylog_series, TruncatedSeries};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{status}  {:width$}  {}", c.name, c.detail);
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(s, "{passed}/{} passed", self.checks.len());
        s
    }
}

type Q = BigRational;

fn gr(n: i64, d: i64) -> GaussianRational {
    GaussianRational::from_ratio(n, d)
}

fn tpi() -> ExactCoeff {
    ExactCoeff::two_pi_i()
}

fn inv_factorial(n: u32) -> GaussianRational {
    let f: i64 = (1..=n as i64).product();
    gr(1, f)
}

fn th(name: &str, sings: Vec<(GaussianRational, LogLaurentPoly)>) -> FunctionSpec {
    let s = sings.into_iter().map(|(l, m)| Singularity::totally_holomorphic(l, m).expect("nonzero")).collect();
    FunctionSpec::new(name, None, s).expect("valid spec")
}

fn sample_logpolys() -> Vec<LogLaurentPoly> {
    let t = |m, l, c: ExactCoeff| LogLaurentPoly::term(m, l, c);
    vec![
        &t(2, 1, ExactCoeff::ratio(3, 2)) + &t(-1, 0, tpi()),
        &t(0, 2, ExactCoeff::i()) - &t(1, 0, ExactCoeff::int(5)),
        &(&t(3, 3, ExactCoeff::ratio(-1, 7)) + &t(0, 1, tpi().pow(2))) + &t(-2, 2, ExactCoeff::int(1)),
    ]
}

fn polylog_closed_form(k: u32) -> LogLaurentPoly {
    LogLaurentPoly::term(0, k - 1, (-tpi()).scale(&inv_factorial(k - 1)))
}

fn check_polylog_monodromy() -> (bool, String) {
    let one = GaussianRational::one();
    for k in 1..=8 {
        if monodromy::polylog_monodromy(k) != polylog_closed_form(k) {
            return (false, format!("closed form, k = {k}"));
        }
        if k >= 2 {
            let r = monodromy::hadamard_monodromy_total(&FunctionSpec::polylog(k - 1), &FunctionSpec::polylog(1), &one);
            if r.map(|r| r.value) != Ok(polylog_closed_form(k)) {
                return (false, format!("Li_{} ⊙ Li_1, k = {k}", k - 1));
            }
        }
    }
    (true, "k = 1..8".into())
}

fn check_ene_polylogs() -> (bool, String) {
    for k in 2..=5 {
        for l in 2..=5 {
            let r = monodromy::ene_monodromy_total(&FunctionSpec::polylog(k), &FunctionSpec::polylog(l), &GaussianRational::one());
            let want = LogLaurentPoly::term(0, k + l - 2, tpi().scale(&inv_factorial(k + l - 2)));
            if r.map(|r| r.value) != Ok(want) {
                return (false, format!("k = {k}, l = {l}"));
            }
        }
    }
    (true, "2 ≤ k, l ≤ 5".into())
}

fn check_koebe_relation() -> (bool, String) {
    let n = 64;
    let f: TruncatedSeries<Q> = polylog_series(3, n).expect("k ≥ 1");
    let g = TruncatedSeries::from_coeffs(vec![rational(1, 1), rational(2, 1), Q::zero(), rational(-1, 3)], n);
    let neg_k = koebe::<Q>(n).scale(&rational(-1, 1));
    let ok = f.ene_exp(&g) == neg_k.hadamard(&f).hadamard(&g);
    (ok, format!("N = {n}"))
}

fn poly_with_roots(roots: &[GaussianRational], n: usize) -> TruncatedSeries<GaussianRational> {
    TruncatedSeries::poly_from_roots(roots, n).expect("nonzero roots")
}

fn check_root_product() -> (bool, String) {
    let a = [gr(2, 1), gr(-1, 2), GaussianRational::new(rational(1, 2), rational(1, 1))];
    let b = [gr(3, 2), gr(-1, 1)];
    let n = 32;
    let prod: Vec<GaussianRational> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
    let ok = poly_with_roots(&a, n).ene(&poly_with_roots(&b, n)) == Ok(poly_with_roots(&prod, n));
    (ok, format!("{} × {} roots, N = {n}", a.len(), b.len()))
}

fn check_integrality() -> (bool, String) {
    let n = 20;
    let int = |v: &[i64]| TruncatedSeries::from_coeffs(v.iter().map(|&c| rational(c, 1)).collect::<Vec<Q>>(), n);
    let pairs = [(int(&[1, 1, -2]), int(&[1, -3, 0, 1])), (int(&[1, 4, 0, 0, 7]), int(&[1, -1, -1, 2]))];
    for (f, g) in &pairs {
        match f.ene(g) {
            Ok(h) if h.coeffs().iter().all(|c| c.is_integer()) => {}
            _ => return (false, "non-integer coefficient".into()),
        }
    }
    (true, format!("{} pairs, n ≤ {n}", pairs.len()))
}

fn check_koebe_derivative() -> (bool, String) {
    let one = GaussianRational::one();
    for m in sample_logpolys() {
        let g = th("G", vec![(one.clone(), m.clone())]);
        let r = monodromy::hadamard_monodromy_general(&FunctionSpec::neg_koebe(), &g, &one);
        if r.map(|r| r.value) != Ok(-m.euler_derivative()) {
            return (false, format!("input {m}"));
        }
    }
    (true, "Δ(−K₀ ⊙ G) = −z (ΔG)′".into())
}

fn check_plm_closure() -> (bool, String) {
    let t = |m, l, c: ExactCoeff| LogLaurentPoly::term(m, l, c);
    let f = th("F", vec![(gr(2, 1), &t(2, 0, tpi()) + &t(1, 1, ExactCoeff::int(3)))]);
    let g = th("G", vec![(gr(1, 3), &t(0, 2, ExactCoeff::ratio(1, 2)) + &t(4, 0, ExactCoeff::i()))]);
    let fp = th("P", vec![(gr(2, 1), &t(3, 0, tpi()) + &t(0, 0, ExactCoeff::int(1)))]);
    let gp = th("R", vec![(gr(1, 3), t(1, 0, ExactCoeff::int(-2)))]);
    let gamma = gr(2, 3);
    let r = monodromy::hadamard_monodromy_total(&f, &g, &gamma).map(|r| r.value);
    let rp = monodromy::hadamard_monodromy_total(&fp, &gp, &gamma).map(|r| r.value);
    let ok = matches!(&r, Ok(v) if v.min_zpow().unwrap_or(0) >= 0)
        && matches!(&rp, Ok(v) if v.min_zpow().unwrap_or(0) >= 0 && v.max_logpow().unwrap_or(0) <= 1);
    (ok, "zpow ≥ 0; polynomial inputs give logpow ≤ 1".into())
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j + 1) as i64)
}

fn check_operator_algebra() -> (bool, String) {
    let ps = sample_logpolys();
    for p in &ps {
        for q in &ps {
            let d = |x: &LogLaurentPoly| x.monodromy_at_zero();
            let lhs = d(&(p * q));
            let rhs = &(&(&d(p) * q) + &(p * &d(q))) + &(&d(p) * &d(q));
            if lhs != rhs {
                return (false, "Leibniz".into());
            }
        }
        if p.derivative().monodromy_at_zero() != p.monodromy_at_zero().derivative() {
            return (false, "commutation with d/dz".into());
        }
        for n in 0..=6 {
            let mut acc = LogLaurentPoly::zero();
            let mut dk = p.clone();
            for k in 0..=n {
                acc = &acc + &dk.scale(&ExactCoeff::int(binomial(n, k)));
                dk = dk.monodromy_at_zero();
            }
            if acc != p.sigma_power(n) {
                return (false, format!("binomial, n = {n}"));
            }
        }
    }
    (true, format!("{} polynomials, n ≤ 6", ps.len()))
}

fn check_ene_symmetry() -> (bool, String) {
    let t = |m, l, c: ExactCoeff| LogLaurentPoly::term(m, l, c);
    let f = th("F", vec![(gr(2, 1), &t(1, 1, tpi()) + &t(0, 0, ExactCoeff::int(2))), (gr(1, 1), t(0, 1, ExactCoeff::int(1)))]);
    let g = th("G", vec![(gr(1, 1), t(2, 0, ExactCoeff::ratio(1, 3))), (gr(2, 1), t(-1, 2, ExactCoeff::i()))]);
    let ok = [gr(2, 1), gr(1, 1), gr(4, 1)]
        .iter()
        .all(|gamma| monodromy::ene_symmetry_check(&f, &g, gamma) == Ok(true));
    (ok, "γ ∈ {1, 2, 4}".into())
}

fn check_dual_engine() -> (bool, String) {
    let li1 = AnalyticElement::Polylog(1);
    let samples = continuation::sample_points(Complex64::new(1.0, 0.0), 0.1, 5);
    let spec = FunctionSpec::polylog(1);
    match continuation::crosscheck(
        ProductKind::Hadamard,
        &spec,
        &li1,
        &spec,
        &li1,
        &GaussianRational::one(),
        &samples,
        &[0],
        &OracleOptions::default(),
    ) {
        Ok(r) => (r.passes(1e-6), format!("max error {:.1e}", r.max_abs_error)),
        Err(e) => (false, e.to_string()),
    }
}

fn check_pincherle() -> (bool, String) {
    let g = AnalyticElement::geometric(Complex64::new(1.0, 0.0));
    let opts = QuadratureOptions { tol: 1e-12, ..Default::default() };
    let mut worst: f64 = 0.0;
    for (z, r) in [(Complex64::new(0.3, 0.2), 0.6), (Complex64::new(-0.5, 0.1), 0.8), (Complex64::new(0.1, -0.6), 0.75)] {
        let value = ContourSpec::circle(r).and_then(|c| continuation::pincherle_eval(&g, &g, z, &c, &opts));
        match value {
            Ok(v) => worst = worst.max((v - 1.0 / (1.0 - z)).norm()),
            Err(e) => return (false, e.to_string()),
        }
    }
    (worst <= 1e-10, format!("max error {worst:.1e}"))
}

fn check_divisor() -> (bool, String) {
    let d = |v: &[(i64, i64)]| Divisor::new(v.iter().map(|&(l, n)| (gr(l, 1), n))).expect("valid");
    let got = monodromy::divisor_ene(&d(&[(2, 1), (3, 1)]), &d(&[(3, 1), (2, 1)]));
    let ok = got == d(&[(6, 2), (4, 1), (9, 1)]);
    let n = 16;
    let poly = |roots: &[i64]| poly_with_roots(&roots.iter().map(|&r| gr(r, 1)).collect::<Vec<_>>(), n);
    let series_ok = poly(&[2, 3]).ene(&poly(&[3, 2])) == Ok(poly(&[6, 6, 4, 9]));
    (ok && series_ok, "{2,3} ⋆ {3,2} = {6:2, 4:1, 9:1}".into())
}

fn check_borel() -> (bool, String) {
    // F = (1 + z/2)/(1 − z/2) = −1 − 4/(z − 2), G = 1/(1 − z) = −1/(z − 1)
    let pole = |loc: i64, c: i64| {
        let s = Singularity::new(gr(loc, 1), LogLaurentPoly::zero(), GermPart::polar(vec![ExactCoeff::int(c)]).expect("valid"))
            .expect("nonzero");
        FunctionSpec::new("P", None, vec![s]).expect("valid")
    };
    let (fs, gs) = (pole(2, -4), pole(1, -1));
    let gamma = gr(2, 1);
    let exact = [
        monodromy::hadamard_monodromy_general(&fs, &gs, &gamma),
        monodromy::ene_monodromy_general(&fs, &gs, &gamma),
    ]
    .iter()
    .all(|r| matches!(r, Ok(r) if r.value.is_zero() && r.pairs.len() == 1));
    let c = |re: f64| Complex64::new(re, 0.0);
    let f = AnalyticElement::rational(vec![c(1.0), c(0.5)], vec![c(1.0), c(-0.5)]).expect("valid");
    let g = AnalyticElement::geometric(c(1.0));
    let opts = OracleOptions { quad: QuadratureOptions { tol: 1e-11, ..Default::default() }, ..Default::default() };
    let mut worst: f64 = 0.0;
    for kind in [ProductKind::Hadamard, ProductKind::Ene] {
        match continuation::monodromy_numeric(kind, &f, &g, c(2.0), Complex64::new(1.9, 0.2), &opts) {
            Ok(n) => worst = worst.max(n.value.norm()),
            Err(e) => return (false, e.to_string()),
        }
    }
    (exact && worst < 1e-10, format!("oracle {worst:.1e}"))
}

type Fixture = (&'static str, fn() -> (bool, String));

pub fn run() -> SelftestReport {
    let fixtures: [Fixture; 13] = [
        ("polylog monodromy", check_polylog_monodromy),
        ("ene polylog monodromy", check_ene_polylogs),
        ("Koebe relation", check_koebe_relation),
        ("ene root product", check_root_product),
        ("integer universality", check_integrality),
        ("Koebe derivative", check_koebe_derivative),
        ("PLM closure", check_plm_closure),
        ("operator algebra", check_operator_algebra),
        ("ene symmetry", check_ene_symmetry),
        ("dual engine", check_dual_engine),
        ("Pincherle quadrature", check_pincherle),
        ("divisor multiplicity", check_divisor),
        ("uniform singularities", check_borel),
    ];
    let checks = fixtures
        .iter()
        .map(|(name, f)| {
            let (pass, detail) = f();
            Check { name, pass, detail }
        })
        .collect();
    SelftestReport { checks }
}
