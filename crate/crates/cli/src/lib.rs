//! Command-line surface over the couponmax library.
//!
//! Results go to standard output as a JSON envelope or CSV table; wall time
//! and diagnostics go to standard error so identical invocations produce
//! byte-identical stdout. Floats are printed with 17 significant digits and
//! re-parse to the exact binary value that produced them.
//!
//! Exit codes: 0 success, 2 usage or domain error, 3 convergence failure
//! (partial results are still emitted, flagged as unconverged).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::ser::Serializer;
use serde::Serialize;

use couponmax::maxprob::{argmax_asymptotic, argmax_probability, hr_integral, table1};
use couponmax::moments::{moment_bernoulli, moment_hurwitz, moment_report, moment_series};
use couponmax::partition::{partition_asymptotic, partition_count};
use couponmax::quadrature::QuadratureSpec;
use couponmax::simulator::{simulate, Model, SimConfig};
use couponmax::zeta::{hurwitz_special_odd, hurwitz_zeta, SpecialPoint, ZetaEvalConfig};
use couponmax::{finite, Error as CoreError};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Result of one CLI invocation.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    All,
    Hurwitz,
    Bernoulli,
    Series,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Continuous,
    Discrete,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Continuous => Model::Continuous,
            ModelArg::Discrete => Model::Discrete,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "couponmax", version = VERSION, about = "Extreme-value statistics of the coupon collector problem")]
struct Cli {
    /// Output format for results on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Relative tolerance for zeta evaluation and quadrature (at most 1e-6).
    #[arg(long = "rel-tol", global = true)]
    rel_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Moments E(M^k) of the limiting maximum.
    Moments {
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
    },
    /// Hurwitz and Riemann zeta values.
    Zeta {
        #[command(subcommand)]
        cmd: ZetaCmd,
    },
    /// Argmax probability columns for one m.
    Maxprob {
        #[arg(long)]
        m: u32,
        /// Comma list drawn from exact,asymptotic,hr (default: all three).
        #[arg(long)]
        columns: Option<String>,
    },
    /// Argmax probability table for a list of m values.
    Table1 {
        /// Comma-separated m values; empty list gives an empty table.
        #[arg(long, allow_hyphen_values = false)]
        rows: String,
    },
    /// Three-route moment table for k = 1..=kmax.
    Table2 {
        #[arg(long)]
        kmax: u32,
    },
    /// Integer partition count and its asymptotic.
    Partition {
        #[arg(long)]
        m: u32,
    },
    /// Exact finite-n quantities.
    Finite {
        #[command(subcommand)]
        cmd: FiniteCmd,
    },
    /// Seeded Monte Carlo simulation.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
enum ZetaCmd {
    /// Closed-form ζ(2m+1, p/q) at a special point.
    Special {
        #[arg(long)]
        m: u32,
        /// Literal fraction p/q with q in {2,3,4,6}.
        #[arg(long)]
        a: String,
    },
    /// ζ(s, a) by the analytic continuation.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
    },
}

#[derive(Debug, Subcommand)]
enum FiniteCmd {
    /// E((W_(n)/n)^k).
    MaxMoment {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
    },
    /// P(gap n-m is the strict maximum).
    Argmax {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    trials: u32,
    #[arg(long)]
    seed: u64,
}

/// One table cell; the only value shapes the envelope emits.
#[derive(Debug, Clone)]
enum Cell {
    Null,
    UInt(u64),
    Float(f64),
    Text(String),
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Null => serializer.serialize_unit(),
            Cell::UInt(v) => serializer.serialize_u64(*v),
            Cell::Float(v) => serializer.serialize_f64(*v),
            Cell::Text(v) => serializer.serialize_str(v),
        }
    }
}

#[derive(Debug, Serialize)]
struct Results {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Serialize)]
struct Meta {
    version: String,
    tolerances: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
}

/// The single document every command prints: command name, parameters,
/// result table, and run metadata. Stable key order and fixed float
/// formatting make serialization deterministic.
#[derive(Debug, Serialize)]
struct OutputEnvelope {
    command: String,
    params: BTreeMap<String, String>,
    results: Results,
    meta: Meta,
}

struct Tolerances {
    quad: QuadratureSpec,
    zeta: ZetaEvalConfig,
}

impl Tolerances {
    fn map(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("quad_abs_tol".into(), format!("{:e}", self.quad.abs_tol));
        map.insert("quad_rel_tol".into(), format!("{:e}", self.quad.rel_tol));
        map.insert("zeta_rel_tol".into(), format!("{:e}", self.zeta.rel_tol));
        map.insert(
            "zeta_direct_terms".into(),
            self.zeta.direct_terms.to_string(),
        );
        map.insert(
            "zeta_correction_order".into(),
            self.zeta.correction_order.to_string(),
        );
        map
    }
}

/// Run the CLI against an argument list (without the binary name).
pub fn run(argv: &[String]) -> Outcome {
    let started = Instant::now();
    let mut full: Vec<String> = vec!["couponmax".to_string()];
    full.extend_from_slice(argv);

    let cli = match Cli::try_parse_from(&full) {
        Ok(cli) => cli,
        Err(err) => {
            let rendered = err.render().to_string();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    exit_code: 0,
                    stdout: rendered,
                    stderr: String::new(),
                },
                _ => Outcome {
                    exit_code: 2,
                    stdout: String::new(),
                    stderr: rendered,
                },
            };
        }
    };

    let mut tolerances = Tolerances {
        quad: QuadratureSpec::default(),
        zeta: ZetaEvalConfig::default(),
    };
    if let Some(rel_tol) = cli.rel_tol {
        if !(rel_tol > 0.0 && rel_tol <= 1e-6) {
            return usage_error(format!(
                "--rel-tol must lie in (0, 1e-6], got {rel_tol:e}\n"
            ));
        }
        tolerances.quad.rel_tol = rel_tol;
        tolerances.zeta.rel_tol = rel_tol;
    }

    let format = cli.format;
    let (name, params, result) = dispatch(cli.command, &tolerances);

    let (exit_code, results, converged) = match result {
        Ok(results) => (0, results, None),
        Err(CoreError::Convergence {
            reason,
            partial,
            error_estimate,
        }) => {
            let results = Results {
                columns: vec![
                    "partial_value".into(),
                    "error_estimate".into(),
                    "converged".into(),
                ],
                rows: vec![vec![
                    Cell::Float(partial),
                    Cell::Float(error_estimate),
                    Cell::Text("false".into()),
                ]],
            };
            return finish(
                3,
                name,
                params,
                results,
                &tolerances,
                Some(false),
                format,
                started,
                format!("convergence error: {reason}\n"),
            );
        }
        Err(err) => {
            return Outcome {
                exit_code: 2,
                stdout: String::new(),
                stderr: format!("error: {err}\n"),
            }
        }
    };

    finish(
        exit_code,
        name,
        params,
        results,
        &tolerances,
        converged,
        format,
        started,
        String::new(),
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    exit_code: i32,
    command: String,
    params: BTreeMap<String, String>,
    results: Results,
    tolerances: &Tolerances,
    converged: Option<bool>,
    format: Format,
    started: Instant,
    mut stderr: String,
) -> Outcome {
    let seed = params.get("seed").and_then(|s| s.parse().ok());
    let envelope = OutputEnvelope {
        command,
        params,
        results,
        meta: Meta {
            version: VERSION.to_string(),
            tolerances: tolerances.map(),
            seed,
            converged,
        },
    };
    let stdout = match format {
        Format::Json => render_json(&envelope),
        Format::Csv => render_csv(&envelope.results),
    };
    // Wall time is diagnostic only; stdout must be identical across runs.
    let _ = writeln!(
        stderr,
        "wall_time_ms={}",
        started.elapsed().as_secs_f64() * 1e3
    );
    Outcome {
        exit_code,
        stdout,
        stderr,
    }
}

fn usage_error(message: String) -> Outcome {
    Outcome {
        exit_code: 2,
        stdout: String::new(),
        stderr: message,
    }
}

type CmdResult = (String, BTreeMap<String, String>, Result<Results, CoreError>);

fn dispatch(command: Command, tol: &Tolerances) -> CmdResult {
    match command {
        Command::Moments { k, method } => {
            let mut params = BTreeMap::new();
            params.insert("k".into(), k.to_string());
            params.insert("method".into(), format!("{method:?}").to_lowercase());
            ("moments".into(), params, cmd_moments(k, method))
        }
        Command::Zeta { cmd } => match cmd {
            ZetaCmd::Special { m, a } => {
                let mut params = BTreeMap::new();
                params.insert("m".into(), m.to_string());
                params.insert("a".into(), a.clone());
                ("zeta special".into(), params, cmd_zeta_special(m, &a))
            }
            ZetaCmd::Eval { s, a } => {
                let mut params = BTreeMap::new();
                params.insert("s".into(), format!("{s}"));
                params.insert("a".into(), format!("{a}"));
                ("zeta eval".into(), params, cmd_zeta_eval(s, a, tol))
            }
        },
        Command::Maxprob { m, columns } => {
            let mut params = BTreeMap::new();
            params.insert("m".into(), m.to_string());
            params.insert(
                "columns".into(),
                columns.clone().unwrap_or_else(|| "exact,asymptotic,hr".into()),
            );
            ("maxprob".into(), params, cmd_maxprob(m, columns, tol))
        }
        Command::Table1 { rows } => {
            let mut params = BTreeMap::new();
            params.insert("rows".into(), rows.clone());
            ("table1".into(), params, cmd_table1(&rows, tol))
        }
        Command::Table2 { kmax } => {
            let mut params = BTreeMap::new();
            params.insert("kmax".into(), kmax.to_string());
            ("table2".into(), params, cmd_table2(kmax))
        }
        Command::Partition { m } => {
            let mut params = BTreeMap::new();
            params.insert("m".into(), m.to_string());
            ("partition".into(), params, cmd_partition(m))
        }
        Command::Finite { cmd } => match cmd {
            FiniteCmd::MaxMoment { n, k } => {
                let mut params = BTreeMap::new();
                params.insert("n".into(), n.to_string());
                params.insert("k".into(), k.to_string());
                (
                    "finite max-moment".into(),
                    params,
                    cmd_finite_max_moment(n, k, tol),
                )
            }
            FiniteCmd::Argmax { model, n, m } => {
                let mut params = BTreeMap::new();
                params.insert("model".into(), format!("{model:?}").to_lowercase());
                params.insert("n".into(), n.to_string());
                params.insert("m".into(), m.to_string());
                (
                    "finite argmax".into(),
                    params,
                    cmd_finite_argmax(model, n, m, tol),
                )
            }
        },
        Command::Simulate(args) => {
            let mut params = BTreeMap::new();
            params.insert("model".into(), format!("{:?}", args.model).to_lowercase());
            params.insert("n".into(), args.n.to_string());
            params.insert("trials".into(), args.trials.to_string());
            params.insert("seed".into(), args.seed.to_string());
            ("simulate".into(), params, cmd_simulate(&args))
        }
    }
}

fn cmd_moments(k: u32, method: MethodArg) -> Result<Results, CoreError> {
    match method {
        MethodArg::All => {
            let report = moment_report(k)?;
            Ok(Results {
                columns: moment_report_columns(),
                rows: vec![moment_report_row(&report)],
            })
        }
        single => {
            let (label, value) = match single {
                MethodArg::Hurwitz => ("hurwitz", moment_hurwitz(k)?),
                MethodArg::Bernoulli => ("bernoulli", moment_bernoulli(k)?),
                MethodArg::Series => ("series", moment_series(k)?),
                MethodArg::All => unreachable!(),
            };
            Ok(Results {
                columns: vec!["k".into(), "method".into(), "value".into()],
                rows: vec![vec![
                    Cell::UInt(k.into()),
                    Cell::Text(label.into()),
                    Cell::Float(value),
                ]],
            })
        }
    }
}

fn moment_report_columns() -> Vec<String> {
    vec![
        "k".into(),
        "via_series".into(),
        "via_hurwitz".into(),
        "via_bernoulli".into(),
        "max_rel_disagreement".into(),
    ]
}

fn moment_report_row(report: &couponmax::moments::MomentReport) -> Vec<Cell> {
    vec![
        Cell::UInt(report.k.into()),
        Cell::Float(report.via_series),
        Cell::Float(report.via_hurwitz),
        Cell::Float(report.via_bernoulli),
        Cell::Float(report.max_rel_disagreement),
    ]
}

fn cmd_zeta_special(m: u32, a: &str) -> Result<Results, CoreError> {
    let point: SpecialPoint = a.parse()?;
    let value = hurwitz_special_odd(m, point)?;
    Ok(Results {
        columns: vec!["s".into(), "a".into(), "value".into()],
        rows: vec![vec![
            Cell::UInt((2 * m + 1).into()),
            Cell::Text(point.to_string()),
            Cell::Float(value),
        ]],
    })
}

fn cmd_zeta_eval(s: f64, a: f64, tol: &Tolerances) -> Result<Results, CoreError> {
    let value = hurwitz_zeta(s, a, &tol.zeta)?;
    Ok(Results {
        columns: vec!["s".into(), "a".into(), "value".into()],
        rows: vec![vec![Cell::Float(s), Cell::Float(a), Cell::Float(value)]],
    })
}

fn cmd_maxprob(m: u32, columns: Option<String>, tol: &Tolerances) -> Result<Results, CoreError> {
    let selected = match columns {
        None => vec!["exact".to_string(), "asymptotic".to_string(), "hr".to_string()],
        Some(list) => {
            let cols: Vec<String> = list
                .split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect();
            for c in &cols {
                if !matches!(c.as_str(), "exact" | "asymptotic" | "hr") {
                    return Err(CoreError::Domain(format!(
                        "unknown column {c:?}; expected exact, asymptotic or hr"
                    )));
                }
            }
            cols
        }
    };
    let mut header = vec!["m".to_string()];
    let mut row = vec![Cell::UInt(m.into())];
    for c in &selected {
        match c.as_str() {
            "exact" => {
                header.push("exact".into());
                row.push(Cell::Float(argmax_probability(m, &tol.quad)?));
            }
            "asymptotic" => {
                header.push("asymptotic".into());
                row.push(Cell::Float(argmax_asymptotic(m)));
            }
            "hr" => {
                header.push("hr_integral".into());
                row.push(Cell::Float(hr_integral(m, &tol.quad)?));
            }
            _ => unreachable!(),
        }
    }
    Ok(Results {
        columns: header,
        rows: vec![row],
    })
}

fn parse_row_list(rows: &str) -> Result<Vec<u32>, CoreError> {
    rows.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u32>()
                .map_err(|_| CoreError::Domain(format!("invalid row index {s:?}")))
        })
        .collect()
}

fn cmd_table1(rows: &str, tol: &Tolerances) -> Result<Results, CoreError> {
    let ms = parse_row_list(rows)?;
    let table = table1(&ms, &tol.quad)?;
    Ok(Results {
        columns: vec![
            "m".into(),
            "exact".into(),
            "asymptotic".into(),
            "hr_integral".into(),
        ],
        rows: table
            .iter()
            .map(|row| {
                vec![
                    Cell::UInt(row.m.into()),
                    Cell::Float(row.exact),
                    Cell::Float(row.asymptotic),
                    Cell::Float(row.hr_integral),
                ]
            })
            .collect(),
    })
}

fn cmd_table2(kmax: u32) -> Result<Results, CoreError> {
    if kmax == 0 {
        return Err(CoreError::Range("kmax must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(kmax as usize);
    for k in 1..=kmax {
        rows.push(moment_report_row(&moment_report(k)?));
    }
    Ok(Results {
        columns: moment_report_columns(),
        rows,
    })
}

fn cmd_partition(m: u32) -> Result<Results, CoreError> {
    let exact = partition_count(m)?;
    let mut row = vec![Cell::UInt(m.into()), Cell::Text(exact.to_string())];
    if m >= 1 {
        row.push(Cell::Float(partition_asymptotic(m)));
    } else {
        row.push(Cell::Null);
    }
    Ok(Results {
        columns: vec!["m".into(), "exact".into(), "asymptotic".into()],
        rows: vec![row],
    })
}

fn cmd_finite_max_moment(n: u32, k: u32, tol: &Tolerances) -> Result<Results, CoreError> {
    let value = finite::finite_max_moment(n, k, &tol.quad)?;
    Ok(Results {
        columns: vec!["n".into(), "k".into(), "value".into()],
        rows: vec![vec![
            Cell::UInt(n.into()),
            Cell::UInt(k.into()),
            Cell::Float(value),
        ]],
    })
}

fn cmd_finite_argmax(model: ModelArg, n: u32, m: u32, tol: &Tolerances) -> Result<Results, CoreError> {
    let value = match model {
        ModelArg::Continuous => finite::finite_argmax_continuous(m, n, &tol.quad)?,
        ModelArg::Discrete => finite::discrete_argmax_probability(m, n, 1e-9)?,
    };
    Ok(Results {
        columns: vec!["model".into(), "n".into(), "m".into(), "value".into()],
        rows: vec![vec![
            Cell::Text(format!("{model:?}").to_lowercase()),
            Cell::UInt(n.into()),
            Cell::UInt(m.into()),
            Cell::Float(value),
        ]],
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Results, CoreError> {
    let config = SimConfig::new(args.model.into(), args.n, args.trials, args.seed);
    let summary = simulate(&config)?;
    let mut rows = Vec::new();
    for stat in &summary.moments {
        rows.push(vec![
            Cell::Text("moment".into()),
            Cell::UInt(stat.k.into()),
            Cell::Float(stat.mean),
            Cell::Float(stat.std_err),
        ]);
    }
    for (m, freq) in &summary.argmax_freq {
        rows.push(vec![
            Cell::Text("argmax".into()),
            Cell::UInt((*m).into()),
            Cell::Float(*freq),
            Cell::Null,
        ]);
    }
    if summary.model == Model::Discrete {
        for (m, freq) in &summary.weak_argmax_freq {
            rows.push(vec![
                Cell::Text("weak_argmax".into()),
                Cell::UInt((*m).into()),
                Cell::Float(*freq),
                Cell::Null,
            ]);
        }
    }
    rows.push(vec![
        Cell::Text("tie_rate".into()),
        Cell::Null,
        Cell::Float(summary.tie_rate),
        Cell::Null,
    ]);
    Ok(Results {
        columns: vec![
            "kind".into(),
            "index".into(),
            "value".into(),
            "std_err".into(),
        ],
        rows,
    })
}

/// serde_json formatter that prints every float with 17 significant digits.
/// Non-finite values (a single-trial standard error is infinite) become
/// null, keeping the document valid JSON.
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            write!(writer, "null")
        }
    }
}

fn render_json(envelope: &OutputEnvelope) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter);
    envelope
        .serialize(&mut ser)
        .expect("envelope serialization cannot fail");
    let mut out = String::from_utf8(buf).expect("serde_json emits UTF-8");
    out.push('\n');
    out
}

fn render_csv(results: &Results) -> String {
    let mut out = results.columns.join(",");
    out.push('\n');
    for row in &results.rows {
        let fields: Vec<String> = row
            .iter()
            .map(|cell| match cell {
                Cell::Null => String::new(),
                Cell::UInt(v) => v.to_string(),
                Cell::Float(v) => format!("{v:.16e}"),
                Cell::Text(v) => v.clone(),
            })
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
