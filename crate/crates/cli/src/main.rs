use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};
use squeeze_core::domains::{DVector, Domain, DomainSpec, Point};
use squeeze_core::gauge::GaugeOptions;
use squeeze_core::geometry::{constants_with, OracleOptions};
use squeeze_core::harness::{self, SuiteConfig, VerificationReport};
use squeeze_core::invariants::{caratheodory_star_origin, caratheodory_star_sandwich};
use squeeze_core::squeezing::{ball_product_example, BoundsQuery, Rule};
use squeeze_core::{json as fmt, Error};

const EXIT_VALIDATION: u8 = 1;
const EXIT_VERIFICATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

const SEED_ENV: &str = "SQUEEZE_KIT_SEED";

const SCHEMA: &str = r#"Input schemas (JSON files):

  domain   {"type": "ball", "n": 2, "radius": 1.0}
           {"type": "polydisk", "radii": [1.0, 0.5]}
           {"type": "gen_ellipsoid", "p": [2, 1], "m": [1.5, "inf"]}
           {"type": "weighted_power", "c": [1.0, 2.0], "s": [1.0, 1.5]}
           {"type": "product", "factors": [<domain>, ...]}
           {"type": "sublevel", "base": <domain>, "r": 0.5, "d": [1, 2]}
  point    [[re, im], ...]
           {"coords": [[re, im], ...], "block_sizes": [2, 1]}
  d        comma-separated positive integers, one per coordinate: 1,2,3
  rules    comma-separated names from:
           Prop2.1(1) Prop2.1(2) Cor2.3(1) Cor2.3(2) Prop3.2(1) Prop3.2(2)
           Cor3.3(1) Cor3.3(2) Thm3.5(1) Thm3.5(2)
  suites   gauge_homogeneity gauge_unit_level gauge_closed_vs_bisection lemma36
           sandwich_ordering caratheodory_domination constants_oracle
           interval_sanity corollary_composition ellipsoid_tightness
           prop_collapse_d1

All numbers are printed with 17 significant digits."#;

#[derive(Parser, Debug)]
#[command(name = "squeeze-kit", version, about = "Gauges, geometric constants and squeezing-function bounds")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minkowski or d-Minkowski gauge of a point.
    Gauge {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long, value_parser = parse_d)]
        d: Option<DVector>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Inner radius, outer radius, P and L of a domain.
    Constants {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_parser = parse_d)]
        d: Option<DVector>,
        #[arg(long, default_value_t = 100_000)]
        oracle_directions: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Carathéodory distance from the origin, in the tanh scale.
    Distance {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long, value_parser = parse_d)]
        d: Option<DVector>,
    },
    /// Squeezing-function bounds for a target domain relative to a model.
    Bounds {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = parse_d)]
        d: Option<DVector>,
        #[arg(long, value_parser = parse_d)]
        d2: Option<DVector>,
        #[arg(long, value_delimiter = ',', value_parser = parse_rule)]
        rules: Vec<Rule>,
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Generalized squeezing function of a product of balls relative to the unit ball.
    Example {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<usize>,
    },
    /// Run verification suites.
    #[command(group(ArgGroup::new("which").required(true).args(["suite", "all"])))]
    Verify {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = harness::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_d(s: &str) -> Result<DVector, String> {
    let exps = s
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    DVector::new(exps).map_err(|e| e.to_string())
}

fn parse_rule(s: &str) -> Result<Rule, String> {
    s.trim().parse().map_err(|e: Error| e.to_string())
}

/// Ways a run can fail, each with its own exit status.
enum Failure {
    Usage(String),
    Validation(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_domain(path: &Path) -> Result<Domain, Failure> {
    Ok(Domain::new(read_json::<DomainSpec>(path)?)?)
}

fn default_seed() -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(harness::DEFAULT_SEED),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output types serialize to JSON")
}

fn run(cli: Cli) -> Result<Vec<Value>, Failure> {
    match cli.command {
        Command::Gauge { domain, point, d, tol } => {
            let domain = read_domain(&domain)?;
            let z: Point = read_json(&point)?;
            let opts = GaugeOptions { tol, ..GaugeOptions::default() };
            let g = match d {
                Some(d) => opts.d_minkowski(&domain, &d, &z)?,
                None => opts.minkowski(&domain, &z)?,
            };
            Ok(vec![to_value(&g)])
        }
        Command::Constants { domain, d, oracle_directions, seed } => {
            let domain = read_domain(&domain)?;
            let d = d.unwrap_or_else(|| DVector::ones(domain.dim()));
            let oracle = OracleOptions { directions: oracle_directions, seed: seed.map_or_else(default_seed, Ok)? };
            Ok(vec![to_value(&constants_with(&domain, &d, &oracle)?)])
        }
        Command::Distance { domain, point, d } => {
            let domain = read_domain(&domain)?;
            let z: Point = read_json(&point)?;
            let bound = match d {
                Some(d) => caratheodory_star_sandwich(&domain, &d, &z)?,
                None => caratheodory_star_origin(&domain, &z)?,
            };
            Ok(vec![to_value(&bound)])
        }
        Command::Bounds { target, model, d, d2, rules, point } => {
            let query = BoundsQuery {
                target: read_domain(&target)?,
                model: read_domain(&model)?,
                d,
                d2,
                rules,
                point: point.as_deref().map(read_json).transpose()?,
            };
            let know = query.run()?;
            let mut out = match to_value(know.headline()) {
                Value::Object(m) => m,
                _ => unreachable!("intervals serialize as objects"),
            };
            out.insert("quantities".into(), to_value(&know));
            Ok(vec![Value::Object(out)])
        }
        Command::Example { n, p } => Ok(vec![to_value(&ball_product_example(n, &p)?)]),
        Command::Verify { suite, all, samples, seed, tol, out } => {
            let config = SuiteConfig { samples, seed: seed.map_or_else(default_seed, Ok)?, tolerance: tol };
            let reports: Vec<VerificationReport> = if all {
                harness::run_all(&config)?
            } else {
                let name = suite.expect("clap enforces --suite or --all");
                vec![harness::run_suite(&name, &config).map_err(|e| match e {
                    Error::UnknownSuite(_) => Failure::Usage(e.to_string()),
                    e => e.into(),
                })?]
            };
            if let Some(path) = out {
                let lines: String = reports.iter().map(|r| r.to_json_line() + "\n").collect();
                fs::write(&path, lines).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            }
            let values: Vec<Value> = reports.iter().map(to_value).collect();
            emit(cli.format, &values);
            if reports.iter().all(|r| r.passed) {
                Ok(Vec::new())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => fmt::format_f64(n.as_f64().expect("f64 number")),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) if items.iter().all(|i| i.get("rule").is_some()) => {
            items.iter().map(|i| csv_cell(&i["rule"])).collect::<Vec<_>>().join(";")
        }
        other => fmt::to_string(other),
    }
}

fn emit(format: Format, values: &[Value]) {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match format {
        Format::Json => {
            for v in values {
                writeln!(lock, "{}", fmt::to_string(v)).expect("stdout is writable");
            }
        }
        Format::Csv => {
            let empty = Map::new();
            let header: Vec<&String> = values.first().and_then(Value::as_object).unwrap_or(&empty).keys().collect();
            let mut w = csv::Writer::from_writer(lock);
            w.write_record(&header).expect("stdout is writable");
            for v in values {
                w.write_record(header.iter().map(|k| csv_cell(v.get(k.as_str()).unwrap_or(&Value::Null))))
                    .expect("stdout is writable");
            }
            w.flush().expect("stdout is writable");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{SCHEMA}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(values) => {
            if !values.is_empty() {
                emit(format, &values);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{SCHEMA}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Verification) => ExitCode::from(EXIT_VERIFICATION),
    }
}
