//! Command-line surface. Exit codes: 0 success, 2 parse or I/O error,
//! 3 precondition violation, 4 verification failure, 5 quadrature or geometry
//! failure.

pub mod documents;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use thiserror::Error;

use crate::coeffs::GaussianRational;
use crate::continuation::{self, ContinuationError, OracleOptions, QuadratureOptions};
use crate::monodromy::{self, FunctionSpec, ProductKind};
use crate::series::{polylog_series, AnySeries, SeriesError};
use documents::{DocError, Document, DivisorDoc, FunctionDoc, MonodromyDoc, ReportDoc, SeriesDoc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Document(#[from] DocError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Numeric(ContinuationError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Document(_) | CliError::Usage(_) => EXIT_PARSE,
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<monodromy::MonodromyError> for CliError {
    fn from(e: monodromy::MonodromyError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<ContinuationError> for CliError {
    fn from(e: ContinuationError) -> Self {
        match e {
            ContinuationError::PathTooCloseToSingularity { .. }
            | ContinuationError::QuadratureNotConverged { .. }
            | ContinuationError::GeometryInfeasible(_)
            | ContinuationError::OnBranchCut(_) => CliError::Numeric(e),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesOp {
    Hadamard,
    EneExp,
    Ene,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Product {
    Hadamard,
    Ene,
}

impl From<Product> for ProductKind {
    fn from(p: Product) -> Self {
        match p {
            Product::Hadamard => ProductKind::Hadamard,
            Product::Ene => ProductKind::Ene,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    /// Integral term only; every singularity must be totally holomorphic.
    Total,
    /// Integral term plus residues of the polar parts.
    General,
}

#[derive(Debug, Parser)]
#[command(name = "hadene", version, about = "Hadamard and ene products: series, exact monodromy, numeric verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Truncation order N.
    #[arg(long, global = true, default_value_t = 64)]
    pub order: usize,
    /// Verification tolerance; the quadrature runs at a tenth of it.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Node budget per quadrature.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Windings of the evaluation points, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub winding: Vec<i64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficientwise products of two series documents.
    Series {
        #[arg(value_enum)]
        op: SeriesOp,
        f: PathBuf,
        g: PathBuf,
    },
    /// Exact monodromy of a product at γ from two function documents.
    Monodromy {
        f: PathBuf,
        g: PathBuf,
        /// Gaussian rational such as `1`, `3/2+i` or `-1/2-2i`.
        #[arg(long)]
        gamma: String,
        #[arg(long, value_enum, default_value_t = Product::Hadamard)]
        product: Product,
        #[arg(long, value_enum, default_value_t = Formula::General)]
        formula: Formula,
    },
    /// Divisor of the ene product of two divisor documents.
    Divisor { f: PathBuf, g: PathBuf },
    /// Function document for the polylogarithm `Li_k`.
    Polylog {
        #[arg(long)]
        k: u32,
    },
    /// Compares the exact monodromy with a contour-integral measurement.
    Verify {
        f: PathBuf,
        g: PathBuf,
        /// Gaussian rational such as `1`, `3/2+i` or `-1/2-2i`.
        #[arg(long)]
        gamma: String,
        #[arg(long, value_enum, default_value_t = Product::Hadamard)]
        product: Product,
        /// Sample count on the circle `|z − γ| = |γ|/10`.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Explicit sample point `re,im`; repeatable, replaces the circle.
        #[arg(long = "at", allow_hyphen_values = true)]
        at: Vec<String>,
        /// Monodromy document to check instead of recomputing it.
        #[arg(long)]
        symbolic: Option<PathBuf>,
    },
    /// Runs the embedded fixtures and prints a pass/fail table.
    Selftest,
}

/// Validated job parameters shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub order: usize,
    pub tol: f64,
    pub nodes: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub windings: Vec<i64>,
}

impl JobConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let (command, inputs) = match &cli.command {
            Command::Series { f, g, .. } => ("series", vec![f.clone(), g.clone()]),
            Command::Monodromy { f, g, .. } => ("monodromy", vec![f.clone(), g.clone()]),
            Command::Divisor { f, g } => ("divisor", vec![f.clone(), g.clone()]),
            Command::Polylog { .. } => ("polylog", vec![]),
            Command::Verify { f, g, .. } => ("verify", vec![f.clone(), g.clone()]),
            Command::Selftest => ("selftest", vec![]),
        };
        if cli.order < 1 {
            return Err(CliError::Usage("--order must be at least 1".into()));
        }
        if cli.tol.is_nan() || cli.tol <= 0.0 {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        if cli.nodes == Some(0) {
            return Err(CliError::Usage("--nodes must be positive".into()));
        }
        let windings = if cli.winding.is_empty() { vec![0] } else { cli.winding.clone() };
        Ok(JobConfig {
            command: command.into(),
            inputs,
            order: cli.order,
            tol: cli.tol,
            nodes: cli.nodes,
            out: cli.out.clone(),
            format: cli.format,
            windings,
        })
    }

    fn oracle_options(&self) -> OracleOptions {
        let mut quad = QuadratureOptions { tol: (self.tol / 10.0).max(1e-13), ..Default::default() };
        if let Some(n) = self.nodes {
            quad.max_nodes = n;
        }
        OracleOptions { quad, ..Default::default() }
    }
}

fn read_doc(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    Document::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_gamma(s: &str) -> Result<GaussianRational> {
    GaussianRational::from_str(s).map_err(|e| CliError::Usage(format!("--gamma: {e}")))
}

fn parse_point(s: &str) -> Result<Complex64> {
    let bad = || CliError::Usage(format!("--at expects re,im: {s:?}"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok(Complex64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
}

/// What a command produces: a document, with an optional table for CSV.
pub struct Output {
    pub doc: Document,
    pub csv: Option<Vec<Vec<String>>>,
    /// Exit code to report after writing, for verification outcomes.
    pub status: i32,
}

impl Output {
    fn new(doc: Document, csv: Vec<Vec<String>>) -> Self {
        Output { doc, csv: Some(csv), status: EXIT_OK }
    }
}

fn series_rows(s: &AnySeries) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["n".to_string(), "re".into(), "im".into(), "exact".into()]];
    let push = |rows: &mut Vec<Vec<String>>, n: usize, z: Complex64, exact: String| {
        rows.push(vec![n.to_string(), z.re.to_string(), z.im.to_string(), exact])
    };
    match s {
        AnySeries::Rational(t) => t.coeffs().iter().enumerate().for_each(|(n, q)| {
            push(&mut rows, n, Complex64::new(crate::coeffs::rational_value(q), 0.0), q.to_string())
        }),
        AnySeries::Exact(t) => t.coeffs().iter().enumerate().for_each(|(n, c)| {
            let z = c.eval(&crate::coeffs::Assignment::standard()).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            push(&mut rows, n, z, c.to_string())
        }),
        AnySeries::Complex(t) => t.coeffs().iter().enumerate().for_each(|(n, z)| push(&mut rows, n, *z, String::new())),
    }
    rows
}

fn monodromy_rows(d: &MonodromyDoc) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["alpha".to_string(), "beta".into(), "zpow".into(), "logpow".into(), "coeff".into()]];
    let mut push = |a: &str, b: &str, terms: &[documents::LogTerm]| {
        for t in terms {
            let c = documents::exact_from_doc(&t.coeff).map(|c| c.to_string()).unwrap_or_default();
            rows.push(vec![a.into(), b.into(), t.zpow.to_string(), t.logpow.to_string(), c]);
        }
    };
    for p in &d.pairs {
        push(&p.alpha, &p.beta, &p.value);
    }
    push("", "", &d.value);
    rows
}

fn report_rows(d: &ReportDoc) -> Vec<Vec<String>> {
    let mut rows = vec![[
        "z_re", "z_im", "winding", "symbolic_re", "symbolic_im", "numeric_re", "numeric_im", "abs_error", "rel_error",
    ]
    .map(String::from)
    .to_vec()];
    for r in &d.rows {
        rows.push(vec![
            r.z[0].to_string(),
            r.z[1].to_string(),
            r.winding.to_string(),
            r.symbolic[0].to_string(),
            r.symbolic[1].to_string(),
            r.numeric[0].to_string(),
            r.numeric[1].to_string(),
            r.abs_error.to_string(),
            r.rel_error.to_string(),
        ]);
    }
    rows
}

pub fn cmd_series(op: SeriesOp, f: &Document, g: &Document, order: usize) -> Result<Output> {
    let n = order.min(f.series()?.order()).min(g.series()?.order());
    let a = f.series()?.truncate(n);
    let b = g.series()?.truncate(n);
    let r = match op {
        SeriesOp::Hadamard => a.hadamard(&b)?,
        SeriesOp::EneExp => a.ene_exp(&b)?,
        SeriesOp::Ene => a.ene(&b)?,
    };
    Ok(Output::new(Document::Series(SeriesDoc::new(&r)), series_rows(&r)))
}

pub fn cmd_monodromy(
    product: ProductKind,
    formula: Formula,
    f: &FunctionSpec,
    g: &FunctionSpec,
    gamma: &GaussianRational,
) -> Result<Output> {
    let r = match (product, formula) {
        (ProductKind::Hadamard, Formula::Total) => monodromy::hadamard_monodromy_total(f, g, gamma)?,
        (ProductKind::Hadamard, Formula::General) => monodromy::hadamard_monodromy_general(f, g, gamma)?,
        (ProductKind::Ene, Formula::Total) => monodromy::ene_monodromy_total(f, g, gamma)?,
        (ProductKind::Ene, Formula::General) => monodromy::ene_monodromy_general(f, g, gamma)?,
    };
    let doc = MonodromyDoc::new(&r, formula.to_possible_value().expect("named").get_name());
    let rows = monodromy_rows(&doc);
    Ok(Output::new(Document::Monodromy(doc), rows))
}

pub fn cmd_divisor(f: &Document, g: &Document) -> Result<Output> {
    let d = monodromy::divisor_ene(&f.divisor()?, &g.divisor()?);
    let mut rows = vec![vec!["location".to_string(), "multiplicity".into()]];
    rows.extend(d.points().map(|(l, n)| vec![l.to_string(), n.to_string()]));
    Ok(Output::new(Document::Divisor(DivisorDoc::new(&d)), rows))
}

pub fn cmd_polylog(k: u32, order: usize) -> Result<Output> {
    if k == 0 {
        return Err(CliError::Precondition("polylogarithm index starts at 1".into()));
    }
    let germ = AnySeries::Rational(polylog_series(k, order)?);
    let mut spec = FunctionSpec::polylog(k);
    spec.germ_at_zero = Some(germ.clone());
    let element = continuation::AnalyticElement::polylog(k)?;
    Ok(Output::new(Document::Function(FunctionDoc::new(&spec, Some(&element))), series_rows(&germ)))
}

/// Sample points and windings to verify at.
pub struct VerifyPlan {
    pub samples: Vec<Complex64>,
    pub windings: Vec<i64>,
    pub threshold: f64,
    pub options: OracleOptions,
}

pub fn cmd_verify(
    product: ProductKind,
    f: &FunctionDoc,
    g: &FunctionDoc,
    gamma: &GaussianRational,
    symbolic: Option<&MonodromyDoc>,
    plan: &VerifyPlan,
) -> Result<Output> {
    let missing = |d: &FunctionDoc| CliError::Precondition(format!("function {} has no numeric element", d.name));
    let fe = f.element()?.ok_or_else(|| missing(f))?;
    let ge = g.element()?.ok_or_else(|| missing(g))?;
    let report = match symbolic {
        Some(s) => {
            if s.product_kind()? != product || s.gamma()? != *gamma {
                return Err(CliError::Precondition("monodromy document is for a different product or γ".into()));
            }
            continuation::compare(product, &s.value()?, &fe, &ge, gamma, &plan.samples, &plan.windings, &plan.options)?
        }
        None => continuation::crosscheck(
            product,
            &f.spec()?,
            &fe,
            &g.spec()?,
            &ge,
            gamma,
            &plan.samples,
            &plan.windings,
            &plan.options,
        )?,
    };
    let doc = ReportDoc::new(&report, plan.threshold);
    let rows = report_rows(&doc);
    let status = if doc.pass { EXIT_OK } else { EXIT_VERIFICATION };
    Ok(Output { doc: Document::OracleReport(doc), csv: Some(rows), status })
}

fn emit(out: &Output, cfg: &JobConfig, stdout: &mut dyn Write) -> Result<()> {
    let text = match cfg.format {
        OutputFormat::Json => out.doc.to_json(),
        OutputFormat::Csv => {
            let rows = out.csv.as_ref().ok_or_else(|| CliError::Usage("no CSV form for this output".into()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.write_record(r).map_err(|e| CliError::Usage(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?).expect("csv is utf-8")
        }
    };
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.clone(), source }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn execute(cli: &Cli, cfg: &JobConfig, stdout: &mut dyn Write) -> Result<i32> {
    let out = match &cli.command {
        Command::Series { op, f, g } => cmd_series(*op, &read_doc(f)?, &read_doc(g)?, cfg.order)?,
        Command::Monodromy { f, g, gamma, product, formula } => {
            let (fd, gd) = (read_doc(f)?, read_doc(g)?);
            let gamma = parse_gamma(gamma)?;
            cmd_monodromy((*product).into(), *formula, &fd.function()?.spec()?, &gd.function()?.spec()?, &gamma)?
        }
        Command::Divisor { f, g } => cmd_divisor(&read_doc(f)?, &read_doc(g)?)?,
        Command::Polylog { k } => cmd_polylog(*k, cfg.order)?,
        Command::Verify { f, g, gamma, product, samples, at, symbolic } => {
            let (fd, gd) = (read_doc(f)?, read_doc(g)?);
            let gamma = parse_gamma(gamma)?;
            let sym = symbolic.as_deref().map(read_doc).transpose()?;
            let points = if at.is_empty() {
                if *samples == 0 {
                    return Err(CliError::Usage("--samples must be positive".into()));
                }
                let c = gamma.to_c64();
                continuation::sample_points(c, 0.1 * c.norm(), *samples)
            } else {
                at.iter().map(|s| parse_point(s)).collect::<Result<_>>()?
            };
            let plan = VerifyPlan {
                samples: points,
                windings: cfg.windings.clone(),
                threshold: cfg.tol,
                options: cfg.oracle_options(),
            };
            let sym = sym.as_ref().map(Document::monodromy).transpose()?;
            cmd_verify((*product).into(), fd.function()?, gd.function()?, &gamma, sym, &plan)?
        }
        Command::Selftest => {
            let report = selftest::run();
            let text = report.table();
            match &cfg.out {
                Some(p) => std::fs::write(p, &text).map_err(|source| CliError::Io { path: p.clone(), source })?,
                None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
            }
            return Ok(if report.all_pass() { EXIT_OK } else { EXIT_VERIFICATION });
        }
    };
    emit(&out, cfg, stdout)?;
    Ok(out.status)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_PARSE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = JobConfig::from_cli(&cli).and_then(|cfg| execute(&cli, &cfg, stdout));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
