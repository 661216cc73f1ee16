//! The `freud` command line: every computation as a CSV or JSON table.
//!
//! Exit codes: 0 on success, 2 when the input is invalid, 3 when the numerics
//! fail (or a verification suite does not pass). Failures print a one-line
//! JSON diagnostic on stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::{FreudError, Result};
use crate::hankel::{Method, RecurrenceTable};
use crate::moments::{MomentTable, WeightParams};
use crate::oracle::{self, QuadratureSpec};
use crate::painleve::beta_forward;
use crate::polynomials::{generate, quadratic_decompose};
use crate::scalar::{self, BigReal, DEFAULT_PRECISION};
use crate::verify::{run_suites, Suite};
use crate::zeros::{zeros, DensityLaw};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "freud", version, about = "Orthogonal polynomials for the weight |x|^(2λ+1) exp(t x² − x^(2m))")]
pub struct Cli {
    /// Exponent m ≥ 2 of the weight; `verify` accepts it several times.
    #[arg(long = "m", global = true, action = ArgAction::Append)]
    pub m: Vec<u32>,
    /// Deformation parameter t, as an exact decimal or fraction.
    #[arg(long, global = true, default_value = "0", allow_hyphen_values = true)]
    pub t: String,
    /// Parameter λ > −1, as an exact decimal or fraction.
    #[arg(long, global = true, default_value = "0", allow_hyphen_values = true)]
    pub lambda: String,
    /// Working precision in bits; overrides the adaptive policy.
    #[arg(long, global = true, env = "FREUD_BITS")]
    pub bits: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Hankel,
    Painleve,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Hankel => Method::Hankel,
            MethodArg::Painleve => Method::Painleve,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// How many entries to produce.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Hankel)]
    pub method: MethodArg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Even moments μ_0, μ_2, …, μ_{2K}.
    Moments {
        /// Largest half-index K.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Compute by quadrature instead of the closed form.
        #[arg(long)]
        oracle: bool,
    },
    /// Recurrence coefficients β_1 … β_N.
    Beta(TableArgs),
    /// Coefficients of the monic polynomials P_0 … P_N.
    Polys(TableArgs),
    /// Zeros of P_n.
    Zeros {
        #[arg(long)]
        n: usize,
        /// Absolute accuracy of each zero; 2^(−bits/2) by default.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Hankel)]
        method: MethodArg,
    },
    /// The limiting zero density on a grid over its support.
    Density {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        ell: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Half-line families B_n and R_n of the quadratic decomposition.
    Decompose(TableArgs),
    /// Self-check suites; "all" selects every suite.
    Verify {
        #[arg(long, action = ArgAction::Append, value_delimiter = ',')]
        suite: Vec<String>,
    },
}

/// Parsed output of one command.
#[derive(Debug)]
pub struct Report {
    pub meta: Map<String, Value>,
    pub records: Vec<Value>,
    /// Explicit CSV layout for records that do not flatten to one row each.
    pub csv: Option<(Vec<String>, Vec<Vec<String>>)>,
    /// Set when the command produced data but the run must still fail.
    pub failure: Option<FreudError>,
}

fn number_or_string(text: &str) -> Value {
    text.trim()
        .parse::<serde_json::Number>()
        .map(Value::Number)
        .unwrap_or_else(|_| Value::String(text.to_string()))
}

fn big(v: &BigReal) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

impl Cli {
    fn single_m(&self) -> Result<u32> {
        match self.m.as_slice() {
            [m] => Ok(*m),
            [] => Err(FreudError::Parameter("--m is required".into())),
            _ => Err(FreudError::Parameter("--m may be repeated only for verify".into())),
        }
    }

    fn params(&self) -> Result<WeightParams> {
        WeightParams::parse(self.single_m()?, &self.t, &self.lambda, self.bits.unwrap_or(DEFAULT_PRECISION))
    }

    fn meta(&self, m: Value, bits: u32, method: &str) -> Map<String, Value> {
        let mut meta = Map::new();
        meta.insert("m".into(), m);
        meta.insert("t".into(), number_or_string(&self.t));
        meta.insert("lambda".into(), number_or_string(&self.lambda));
        meta.insert("precision_bits".into(), json!(bits));
        meta.insert("method".into(), json!(method));
        meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        meta
    }
}

/// β table by the requested route. With an explicit precision the Hankel
/// route runs at exactly that precision; otherwise it adapts.
fn build_table(cli: &Cli, params: &WeightParams, count: usize, method: Method) -> Result<RecurrenceTable> {
    match method {
        Method::Hankel => match cli.bits {
            Some(_) => RecurrenceTable::from_hankel_fixed(params, count),
            None => RecurrenceTable::from_hankel(params, count),
        },
        Method::Painleve => {
            let seeds_needed = (params.m() - 1) as usize;
            let seeds = RecurrenceTable::from_hankel(params, seeds_needed)?;
            let seeds: Vec<BigReal> = seeds.betas().to_vec();
            beta_forward(params, &seeds, count)
        }
        Method::Oracle => {
            let tol = 2f64.powi(-(params.precision_bits() as i32) / 2).max(1e-30);
            oracle::recurrence(params, count, &QuadratureSpec::with_tol(tol))
        }
    }
}

fn truncation_failure(table: &RecurrenceTable, count: usize) -> Option<FreudError> {
    (table.len() < count).then(|| {
        FreudError::range(
            "painleve",
            format!(
                "forward generation left the stable orbit after beta_{}; {} requested",
                table.len(),
                count
            ),
        )
    })
}

pub fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Moments { count, oracle: by_quadrature } => {
            let params = cli.params()?;
            let values = if *by_quadrature {
                let tol = 2f64.powi(-(params.precision_bits() as i32) / 2).max(1e-30);
                oracle::oracle_even_moments(&params, *count, &QuadratureSpec::with_tol(tol))?
                    .into_iter()
                    .map(|v| v.with_precision(params.precision_bits()))
                    .collect()
            } else {
                MomentTable::compute(&params, *count)?.even_moments().to_vec()
            };
            let records = values
                .iter()
                .enumerate()
                .map(|(j, v)| json!({"k": 2 * j, "moment": big(v)}))
                .collect();
            let method = if *by_quadrature { "oracle" } else { "hypergeometric" };
            Ok(Report {
                meta: cli.meta(json!(params.m()), params.precision_bits(), method),
                records,
                csv: None,
                failure: None,
            })
        }
        Command::Beta(args) => {
            let params = cli.params()?;
            if args.count == 0 {
                return Err(FreudError::Parameter("--count must be positive".into()));
            }
            let table = build_table(cli, &params, args.count, args.method.into())?;
            let bits = table.precision_bits();
            let records = table
                .betas()
                .iter()
                .enumerate()
                .map(|(i, b)| json!({"n": i + 1, "beta": big(b), "precision_bits": bits}))
                .collect();
            Ok(Report {
                meta: cli.meta(json!(params.m()), bits, table.method().as_str()),
                records,
                csv: None,
                failure: truncation_failure(&table, args.count),
            })
        }
        Command::Polys(args) => {
            let params = cli.params()?;
            let table = build_table(cli, &params, args.count.max(1), args.method.into())?;
            if let Some(e) = truncation_failure(&table, args.count.saturating_sub(1)) {
                return Err(e);
            }
            let polys = generate(&table, args.count)?;
            let mut rows = Vec::new();
            let records = polys
                .iter()
                .map(|p| {
                    for (k, c) in p.coeffs().iter().enumerate() {
                        rows.push(vec![p.degree().to_string(), k.to_string(), cell(&big(c))]);
                    }
                    json!({
                        "n": p.degree(),
                        "parity": p.parity(),
                        "coeffs": p.coeffs().iter().map(big).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(Report {
                meta: cli.meta(json!(params.m()), table.precision_bits(), table.method().as_str()),
                records,
                csv: Some((vec!["n".into(), "power".into(), "coeff".into()], rows)),
                failure: None,
            })
        }
        Command::Zeros { n, tol, method } => {
            let params = cli.params()?;
            if *n == 0 {
                return Err(FreudError::Parameter("--n must be positive".into()));
            }
            let table = build_table(cli, &params, *n, (*method).into())?;
            if let Some(e) = truncation_failure(&table, n - 1) {
                return Err(e);
            }
            let bits = table.precision_bits();
            let tol = tol.unwrap_or_else(|| 2f64.powi(-(bits as i32) / 2));
            let set = zeros(&table, *n, tol)?;
            let records = set
                .zeros
                .iter()
                .enumerate()
                .map(|(i, z)| json!({"index": i + 1, "x": big(&z.with_precision(bits))}))
                .collect();
            Ok(Report {
                meta: cli.meta(json!(params.m()), bits, table.method().as_str()),
                records,
                csv: None,
                failure: None,
            })
        }
        Command::Density { ell, samples } => {
            let m = cli.single_m()?;
            if *samples == 0 {
                return Err(FreudError::Parameter("--samples must be positive".into()));
            }
            let bits = cli.bits.unwrap_or(DEFAULT_PRECISION);
            let law = DensityLaw::new(m, *ell, bits)?;
            // Cell midpoints of a uniform partition of (−c, c).
            let records = (0..*samples)
                .map(|i| {
                    let u = BigReal::from_i64(2 * i as i64 + 1, bits) / (*samples as i64) - 1i64;
                    let x = &law.c * u;
                    let d = law.density(&x)?;
                    Ok(json!({"x": big(&x), "density": big(&d), "a": big(&law.a), "c": big(&law.c)}))
                })
                .collect::<Result<_>>()?;
            Ok(Report {
                meta: cli.meta(json!(m), bits, "closed-form"),
                records,
                csv: None,
                failure: None,
            })
        }
        Command::Decompose(args) => {
            let params = cli.params()?;
            let needed = 2 * args.count + 1;
            let table = build_table(cli, &params, needed, args.method.into())?;
            if let Some(e) = truncation_failure(&table, needed) {
                return Err(e);
            }
            let d = quadratic_decompose(&table, args.count)?;
            let mut rows = Vec::new();
            let mut records = Vec::new();
            for (name, family) in [("B", &d.b), ("R", &d.r)] {
                for p in family {
                    for (k, c) in p.coeffs.iter().enumerate() {
                        rows.push(vec![name.to_string(), p.degree.to_string(), k.to_string(), cell(&big(c))]);
                    }
                    records.push(json!({
                        "family": name,
                        "n": p.degree,
                        "coeffs": p.coeffs.iter().map(big).collect::<Vec<_>>(),
                    }));
                }
            }
            Ok(Report {
                meta: cli.meta(json!(params.m()), table.precision_bits(), table.method().as_str()),
                records,
                csv: Some((vec!["family".into(), "n".into(), "power".into(), "coeff".into()], rows)),
                failure: None,
            })
        }
        Command::Verify { suite } => {
            let suites = Suite::select(suite)?;
            let ms = if cli.m.is_empty() { vec![2, 3] } else { cli.m.clone() };
            let t = scalar::parse_exact(&cli.t)?;
            let lambda = scalar::parse_exact(&cli.lambda)?;
            let bits = cli.bits.unwrap_or(DEFAULT_PRECISION);
            let results = run_suites(&suites, &ms, &t, &lambda, bits)?;
            let failed: Vec<String> = results
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("{} (m = {})", r.suite, r.m))
                .collect();
            let records = results
                .iter()
                .map(|r| serde_json::to_value(r).unwrap_or(Value::Null))
                .collect();
            Ok(Report {
                meta: cli.meta(json!(ms), bits, "hankel"),
                records,
                csv: None,
                failure: (!failed.is_empty()).then(|| FreudError::Range {
                    module: "verify",
                    message: format!("failed: {}", failed.join(", ")),
                }),
            })
        }
    }
}

/// Writes the report in the requested format.
pub fn write_report(report: &Report, format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => {
            let doc = json!({"meta": report.meta, "data": report.records});
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            match &report.csv {
                Some((header, rows)) => {
                    w.write_record(header)?;
                    for row in rows {
                        w.write_record(row)?;
                    }
                }
                None => {
                    if let Some(Value::Object(first)) = report.records.first() {
                        w.write_record(first.keys())?;
                    }
                    for rec in &report.records {
                        if let Value::Object(map) = rec {
                            w.write_record(map.values().map(cell))?;
                        }
                    }
                }
            }
            w.flush()
        }
    }
}

fn diagnostic(e: &FreudError) -> String {
    let mut d = json!({"error": e.kind(), "message": e.to_string()});
    if let FreudError::Range { module, .. } = e {
        d["module"] = json!(module);
    }
    d.to_string()
}

fn exit_code(e: &FreudError) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}", diagnostic(&e));
            return exit_code(&e);
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_report(&report, cli.format, &mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_report(&report, cli.format, &mut lock)
        }
    };
    if let Err(e) = written {
        eprintln!("{}", json!({"error": "io", "message": e.to_string()}));
        return EXIT_NUMERICAL;
    }
    match &report.failure {
        Some(e) => {
            eprintln!("{}", diagnostic(e));
            EXIT_NUMERICAL
        }
        None => EXIT_OK,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (Report, Cli) {
        let cli = Cli::try_parse_from(std::iter::once("freud").chain(args.iter().copied())).unwrap();
        (execute(&cli).unwrap(), cli)
    }

    #[test]
    fn beta_records() {
        let (r, _) = run(&["beta", "--m", "2", "--t", "0", "--lambda", "-0.5", "--count", "20"]);
        assert_eq!(r.records.len(), 20);
        assert_eq!(r.meta["method"], "hankel");
        assert_eq!(r.records[0]["n"], 1);
        assert!(r.failure.is_none());
    }

    #[test]
    fn density_grid_and_csv() {
        let (r, cli) = run(&["density", "--m", "3", "--ell", "1", "--samples", "200", "--format", "csv"]);
        assert_eq!(r.records.len(), 200);
        let mut buf = Vec::new();
        write_report(&r, cli.format, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 201);
        assert_eq!(text.lines().next().unwrap(), "x,density,a,c");
    }

    #[test]
    fn validation_errors() {
        let cli = Cli::try_parse_from(["freud", "beta", "--m", "1"]).unwrap();
        assert!(execute(&cli).unwrap_err().is_validation());
        let cli = Cli::try_parse_from(["freud", "verify", "--m", "2"]).unwrap();
        assert!(execute(&cli).unwrap_err().is_validation());
        let cli = Cli::try_parse_from(["freud", "beta", "--m", "2", "--m", "3"]).unwrap();
        assert!(execute(&cli).unwrap_err().is_validation());
        assert_eq!(main_with_args(["freud", "beta", "--lambda", "-1.5", "--m", "2"]), EXIT_VALIDATION);
        assert_eq!(main_with_args(["freud", "beta", "--format", "xml"]), EXIT_VALIDATION);
    }

    #[test]
    fn painleve_route_matches_hankel() {
        let (h, _) = run(&["beta", "--m", "2", "--t", "0.5", "--count", "8"]);
        let (p, _) = run(&["beta", "--m", "2", "--t", "0.5", "--count", "8", "--method", "painleve"]);
        assert_eq!(p.meta["method"], "painleve");
        let a: f64 = cell(&h.records[7]["beta"]).parse().unwrap();
        let b: f64 = cell(&p.records[7]["beta"]).parse().unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
