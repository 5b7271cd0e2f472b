//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every line is printed. The process
//! fails if any criterion outside `KNOWN_RED` fails, or if a known-red one
//! starts passing.

mod common;

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use hadene::coeffs::{ExactCoeff, GaussianRational};
use hadene::continuation::{self, AnalyticElement, ContourSpec, OracleOptions, QuadratureOptions};
use hadene::logpoly::{BranchPoint, LogLaurentPoly};
use hadene::monodromy::{self, Divisor, FunctionSpec, GermPart, ProductKind};
use hadene::series::{koebe, TruncatedSeries};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use common::*;

type Q = BigRational;

/// Criteria whose literal statement is false; see the analysis printed with them.
const KNOWN_RED: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome { pass: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { pass: false, detail: detail.into() }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tpi() -> ExactCoeff {
    ExactCoeff::two_pi_i()
}

// 1 -------------------------------------------------------------------------

fn polylog_monodromy() -> Outcome {
    for k in 1..=8u32 {
        let want = LogLaurentPoly::term(0, k - 1, (-tpi()).scale(&inv_factorial(k - 1)));
        if monodromy::polylog_monodromy(k) != want {
            return fail(format!("k = {k}: {}", monodromy::polylog_monodromy(k)));
        }
        // second route: Li_k = Li_{k−1} ⊙ Li_1 through the integral formula
        if k >= 2 {
            let r = monodromy::hadamard_monodromy_total(
                &FunctionSpec::polylog(k - 1),
                &FunctionSpec::polylog(1),
                &GaussianRational::one(),
            )
            .expect("totally holomorphic");
            if r.value != want {
                return fail(format!("Li_{} ⊙ Li_1 gives {}", k - 1, r.value));
            }
        }
    }
    ok("k = 1..8 closed form and Li_{k-1} ⊙ Li_1 route")
}

// 2 -------------------------------------------------------------------------

fn ene_polylog_monodromy() -> Outcome {
    for k in 2..=5u32 {
        for l in 2..=5u32 {
            let want = LogLaurentPoly::term(0, k + l - 2, tpi().scale(&inv_factorial(k + l - 2)));
            let r = monodromy::ene_monodromy_total(&FunctionSpec::polylog(k), &FunctionSpec::polylog(l), &GaussianRational::one())
                .expect("totally holomorphic");
            if r.value != want {
                return fail(format!("k = {k}, l = {l}: {}", r.value));
            }
        }
    }
    ok("2 <= k, l <= 5")
}

// 3 -------------------------------------------------------------------------

fn koebe_relation() -> Outcome {
    let n = 64;
    let mut r = rng(3);
    for trial in 0..100 {
        let f = rational_series(&mut r, n);
        let g = rational_series(&mut r, n);
        let got = f.ene_exp(&g);
        // −K₀ ⊙ F ⊙ G coefficientwise: −n a_n b_n
        let want: Vec<Q> = (0..=n).map(|j| -(Q::from_integer((j as i64).into()) * f.coeff(j) * g.coeff(j))).collect();
        if got.coeffs() != want.as_slice() {
            return fail(format!("trial {trial}"));
        }
        let via_lib = koebe::<Q>(n).hadamard(&f.hadamard(&g));
        if got.add(&via_lib) != TruncatedSeries::zero(n) {
            return fail(format!("trial {trial}: ene_exp + K₀⊙F⊙G ≠ 0"));
        }
    }
    ok("100 pairs, N = 64")
}

// 4 -------------------------------------------------------------------------

/// `∏ (1 − z/γ)` expanded directly.
fn expand_roots(roots: &[GaussianRational], n: usize) -> Vec<GaussianRational> {
    let mut p = vec![GaussianRational::one()];
    for g in roots {
        let inv = g.inv().expect("nonzero root");
        let mut next = vec![GaussianRational::zero(); p.len() + 1];
        for (j, a) in p.iter().enumerate() {
            next[j] = &next[j] + a;
            next[j + 1] = &next[j + 1] - &(a * &inv);
        }
        p = next;
    }
    p.resize(n + 1, GaussianRational::zero());
    p.truncate(n + 1);
    p
}

fn ene_root_product() -> Outcome {
    let n = 32;
    let mut r = rng(4);
    for trial in 0..50 {
        let a: Vec<GaussianRational> = (0..r.gen_range(1..=5)).map(|_| root(&mut r)).collect();
        let b: Vec<GaussianRational> = (0..r.gen_range(1..=5)).map(|_| root(&mut r)).collect();
        let prod: Vec<GaussianRational> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        let f = TruncatedSeries::from_coeffs(expand_roots(&a, n), n);
        let g = TruncatedSeries::from_coeffs(expand_roots(&b, n), n);
        let got = match f.ene(&g) {
            Ok(h) => h,
            Err(e) => return fail(format!("trial {trial}: {e}")),
        };
        if got.coeffs() != expand_roots(&prod, n).as_slice() {
            return fail(format!("trial {trial}: differs from direct expansion"));
        }
        if Ok(&got) != TruncatedSeries::poly_from_roots(&prod, n).as_ref() {
            return fail(format!("trial {trial}: differs from poly_from_roots"));
        }
    }
    ok("50 pairs, deg <= 5, N = 32")
}

// 5 -------------------------------------------------------------------------

fn integer_universality() -> Outcome {
    let n = 20;
    let mut r = rng(5);
    for trial in 0..20 {
        let deg_f = r.gen_range(1..=6);
        let f = unit_integer_series(&mut r, deg_f, n);
        let deg_g = r.gen_range(1..=6);
        let g = unit_integer_series(&mut r, deg_g, n);
        match f.ene(&g) {
            Ok(h) => {
                if let Some(j) = h.coeffs().iter().position(|c| !c.is_integer()) {
                    return fail(format!("trial {trial}: c_{j} = {}", h.coeff(j)));
                }
            }
            Err(e) => return fail(format!("trial {trial}: {e}")),
        }
    }
    ok("20 pairs, n <= 20")
}

// 6 -------------------------------------------------------------------------

fn koebe_derivative() -> Outcome {
    let one = GaussianRational::one();
    let mut r = rng(6);
    let mut literal = 0;
    let mut euler = 0;
    let trials = 50;
    for _ in 0..trials {
        let m = logpoly(&mut r, -2..=4, 3);
        let g = totally_holomorphic_spec("G", vec![(one.clone(), m.clone())]);
        let res = monodromy::hadamard_monodromy_general(&FunctionSpec::neg_koebe(), &g, &one).expect("valid");
        if res.value == m.derivative() {
            literal += 1;
        }
        if res.value == -m.euler_derivative() {
            euler += 1;
        }
    }
    let detail = format!(
        "result = lp_derivative(ΔG) in {literal}/{trials}; result = −z·lp_derivative(ΔG) in {euler}/{trials}. \
         The residue of (−1/(u−1) − 1/(u−1)²)·ΔG(z/u)/u at u = 1 is −z·(ΔG)′(z): \
         differentiating ΔG(z/u) in u brings down −z/u², so the literal identity cannot hold"
    );
    Outcome { pass: literal == trials, detail }
}

// 7 -------------------------------------------------------------------------

fn plm_closure() -> Outcome {
    let mut r = rng(7);
    for trial in 0..50 {
        let polynomial = trial % 2 == 1;
        let max_log = if polynomial { 0 } else { 2 };
        let (a, b) = (location(&mut r), location(&mut r));
        let f = totally_holomorphic_spec("F", vec![(a.clone(), logpoly(&mut r, 0..=4, max_log))]);
        let g = totally_holomorphic_spec("G", vec![(b.clone(), logpoly(&mut r, 0..=4, max_log))]);
        let res = match monodromy::hadamard_monodromy_total(&f, &g, &(&a * &b)) {
            Ok(v) => v.value,
            Err(e) => return fail(format!("trial {trial}: {e}")),
        };
        if res.min_zpow().is_some_and(|m| m < 0) {
            return fail(format!("trial {trial}: negative z power in {res}"));
        }
        if polynomial && res.max_logpow().is_some_and(|l| l > 1) {
            return fail(format!("trial {trial}: log power above 1 in {res}"));
        }
    }
    ok("50 pairs, deg <= 4, logpow <= 2")
}

// 8 -------------------------------------------------------------------------

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j + 1) as i64)
}

fn operator_algebra() -> Outcome {
    let mut r = rng(8);
    let d = |p: &LogLaurentPoly| p.monodromy_at_zero();
    for trial in 0..200 {
        let p = logpoly(&mut r, -3..=3, 3);
        let q = logpoly(&mut r, -3..=3, 3);
        let leibniz = &(&(&d(&p) * &q) + &(&p * &d(&q))) + &(&d(&p) * &d(&q));
        if d(&(&p * &q)) != leibniz {
            return fail(format!("trial {trial}: Leibniz"));
        }
        if d(&p.derivative()) != d(&p).derivative() {
            return fail(format!("trial {trial}: commutation"));
        }
        for n in 1..=6 {
            let mut sum = LogLaurentPoly::zero();
            let mut dk = p.clone();
            for k in 1..=n {
                dk = d(&dk);
                sum = &sum + &dk.scale(&ExactCoeff::int(binomial(n, k)));
            }
            if &p.sigma_power(n) - &p != sum {
                return fail(format!("trial {trial}: binomial, n = {n}"));
            }
        }
    }
    ok("200 values, n <= 6")
}

// 9 -------------------------------------------------------------------------

fn ene_symmetry() -> Outcome {
    let mut r = rng(9);
    for trial in 0..20 {
        let (a, b) = (location(&mut r), location(&mut r));
        let mut fs = vec![(a.clone(), logpoly(&mut r, -2..=3, 2))];
        let mut gs = vec![(b.clone(), logpoly(&mut r, -2..=3, 2))];
        // a second pair sharing γ
        if trial % 3 == 0 && a != b {
            fs.push((b.clone(), logpoly(&mut r, 0..=2, 1)));
            gs.push((a.clone(), logpoly(&mut r, 0..=2, 1)));
        }
        let f = totally_holomorphic_spec("F", fs);
        let g = totally_holomorphic_spec("G", gs);
        let gamma = &a * &b;
        let fg = monodromy::ene_monodromy_total(&f, &g, &gamma).expect("valid");
        let gf = monodromy::ene_monodromy_total(&g, &f, &gamma).expect("valid");
        if fg.value != gf.value {
            return fail(format!("trial {trial}: {} vs {}", fg.value, gf.value));
        }
    }
    ok("20 pairs")
}

// 10 ------------------------------------------------------------------------

fn dual_engine() -> Outcome {
    let opts = OracleOptions::default();
    let one = GaussianRational::one();
    let li1 = AnalyticElement::Polylog(1);
    let samples = continuation::sample_points(c(1.0, 0.0), 0.1, 5);
    let mut worst: f64 = 0.0;
    for kind in [ProductKind::Hadamard, ProductKind::Ene] {
        let spec = FunctionSpec::polylog(1);
        let report = match continuation::crosscheck(kind, &spec, &li1, &spec, &li1, &one, &samples, &[0], &opts) {
            Ok(v) => v,
            Err(e) => return fail(format!("Li_1, Li_1 {kind}: {e}")),
        };
        worst = worst.max(report.max_abs_error);
    }
    // independent closed form for the Hadamard case: −2πi log z
    for &z in &samples {
        let sym = monodromy::hadamard_monodromy_general(&FunctionSpec::polylog(1), &FunctionSpec::polylog(1), &one)
            .expect("valid")
            .value
            .eval(BranchPoint::principal(z), &Default::default())
            .expect("evaluable");
        worst = worst.max((sym - c(0.0, -TAU) * z.ln()).norm());
    }

    // F = (1 + z)·log(1 − z/2), ΔF = 2πi(1 + z) at 2; G = Li_1; γ = 2
    let two = GaussianRational::from_int(2);
    let f_elem = AnalyticElement::log_branch(c(2.0, 0.0), vec![c(1.0, 0.0), c(1.0, 0.0)]).expect("valid");
    let f_mon = &LogLaurentPoly::constant(tpi()) + &LogLaurentPoly::term(1, 0, tpi());
    let f_spec = totally_holomorphic_spec("F", vec![(two.clone(), f_mon)]);
    let samples2 = continuation::sample_points(c(2.0, 0.0), 0.2, 5);
    for kind in [ProductKind::Hadamard, ProductKind::Ene] {
        let g_spec = FunctionSpec::polylog(1);
        match continuation::crosscheck(kind, &f_spec, &f_elem, &g_spec, &li1, &two, &samples2, &[0], &opts) {
            Ok(v) => worst = worst.max(v.max_abs_error),
            Err(e) => return fail(format!("polynomial pair {kind}: {e}")),
        }
    }
    let detail = format!("max |symbolic − numeric| = {worst:.2e} over 20 rows");
    Outcome { pass: worst <= 1e-6, detail }
}

// 11 ------------------------------------------------------------------------

fn pincherle() -> Outcome {
    let g = AnalyticElement::geometric(c(1.0, 0.0));
    let opts = QuadratureOptions { tol: 1e-12, ..Default::default() };
    let radii = [0.6, 0.75, 0.9];
    let mut worst: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for j in 0..10 {
        let z = Complex64::from_polar(0.05 + 0.045 * j as f64, 0.7 * j as f64);
        let exact = 1.0 / (1.0 - z);
        let mut vals = Vec::new();
        for &rad in &radii {
            let v = ContourSpec::circle(rad).and_then(|cs| continuation::pincherle_eval(&g, &g, z, &cs, &opts));
            match v {
                Ok(v) => vals.push(v),
                Err(e) => return fail(format!("z = {z}, r = {rad}: {e}")),
            }
        }
        worst = worst.max((vals[0] - exact).norm());
        for v in &vals[1..] {
            spread = spread.max((v - vals[0]).norm());
        }
    }
    Outcome {
        pass: worst <= 1e-10 && spread <= 1e-10,
        detail: format!("max error {worst:.2e}, radius spread {spread:.2e}"),
    }
}

// 12 ------------------------------------------------------------------------

fn divisor_multiplicity() -> Outcome {
    let d = |v: &[(i64, i64)]| Divisor::new(v.iter().map(|&(l, n)| (GaussianRational::from_int(l), n))).expect("valid");
    let got = monodromy::divisor_ene(&d(&[(2, 1), (3, 1)]), &d(&[(3, 1), (2, 1)]));
    if got != d(&[(6, 2), (4, 1), (9, 1)]) {
        return fail(format!("{got:?}"));
    }
    let n = 16;
    let gr = |v: &[i64]| v.iter().map(|&x| GaussianRational::from_int(x)).collect::<Vec<_>>();
    let f = TruncatedSeries::from_coeffs(expand_roots(&gr(&[2, 3]), n), n);
    let g = TruncatedSeries::from_coeffs(expand_roots(&gr(&[3, 2]), n), n);
    let want = TruncatedSeries::poly_from_roots(&gr(&[6, 6, 4, 9]), n).expect("nonzero roots");
    match f.ene(&g) {
        Ok(h) if h == want => ok("{6:2, 4:1, 9:1}; series agree at N = 16"),
        Ok(_) => fail("series disagree"),
        Err(e) => fail(e.to_string()),
    }
}

// 13 ------------------------------------------------------------------------

fn borel() -> Outcome {
    let mut r = rng(13);
    for trial in 0..20 {
        let (a, b) = (location(&mut r), location(&mut r));
        let gamma = &a * &b;
        let zero = LogLaurentPoly::zero();
        let f = totally_holomorphic_spec("F", vec![(a.clone(), zero.clone())]);
        let g = totally_holomorphic_spec("G", vec![(b.clone(), zero.clone())]);
        let polar = |r: &mut _| GermPart::polar(vec![exact_coeff(r), nonzero_exact(r)]).expect("valid");
        let fp = spec_with_germs("F", vec![(a.clone(), zero.clone(), polar(&mut r))]);
        let gp = spec_with_germs("G", vec![(b.clone(), zero.clone(), polar(&mut r))]);
        let results = [
            monodromy::hadamard_monodromy_total(&f, &g, &gamma),
            monodromy::ene_monodromy_total(&f, &g, &gamma),
            monodromy::hadamard_monodromy_general(&fp, &gp, &gamma),
            monodromy::ene_monodromy_general(&fp, &gp, &gamma),
        ];
        for res in results {
            match res {
                Ok(v) if v.value.is_zero() => {}
                Ok(v) => return fail(format!("trial {trial}: {}", v.value)),
                Err(e) => return fail(format!("trial {trial}: {e}")),
            }
        }
    }
    let f = AnalyticElement::rational(vec![c(1.0, 0.0), c(0.5, 0.0)], vec![c(1.0, 0.0), c(-0.5, 0.0)]).expect("valid");
    let g = AnalyticElement::geometric(c(1.0, 0.0));
    let k = AnalyticElement::neg_koebe();
    let opts = OracleOptions { quad: QuadratureOptions { tol: 1e-11, ..Default::default() }, ..Default::default() };
    let mut worst: f64 = 0.0;
    for kind in [ProductKind::Hadamard, ProductKind::Ene] {
        for (x, y, gamma, z0) in [(&f, &g, 2.0, c(1.9, 0.2)), (&f, &g, 2.0, c(1.85, -0.1)), (&k, &k, 1.0, c(0.85, 0.2))] {
            match continuation::monodromy_numeric(kind, x, y, c(gamma, 0.0), z0, &opts) {
                Ok(n) => worst = worst.max(n.value.norm()),
                Err(e) => return fail(format!("{kind} at {z0}: {e}")),
            }
        }
    }
    Outcome { pass: worst < 1e-10, detail: format!("exact zero in 80 symbolic cases; oracle max {worst:.2e}") }
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 13] = [
        (1, "polylog monodromy (exact)", polylog_monodromy, Some(Duration::from_secs(1))),
        (2, "ene polylog monodromy (exact)", ene_polylog_monodromy, Some(Duration::from_secs(2))),
        (3, "Koebe relation (exact)", koebe_relation, Some(Duration::from_secs(5))),
        (4, "ene root product", ene_root_product, Some(Duration::from_secs(10))),
        (5, "integer universality", integer_universality, None),
        (6, "Koebe-derivative property (exact)", koebe_derivative, None),
        (7, "PLM closure (structural)", plm_closure, None),
        (8, "monodromy-operator algebra (exact)", operator_algebra, None),
        (9, "ene symmetry (exact)", ene_symmetry, None),
        (10, "dual-engine agreement", dual_engine, Some(Duration::from_secs(30))),
        (11, "Pincherle quadrature", pincherle, None),
        (12, "divisor multiplicity", divisor_multiplicity, None),
        (13, "Borel degenerate case", borel, None),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if let Some(lim) = limit {
            if elapsed > lim {
                out.pass = false;
                out.detail = format!("{} (runtime {:.2?} exceeds {:.0?})", out.detail, elapsed, lim);
            }
        }
        let status = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status}  {name}  [{elapsed:.2?}]  {}", out.detail);
        if out.pass == KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
