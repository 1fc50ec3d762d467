//! Command-line interface: pairwise causality tests, causal graphs over
//! CSV datasets, synthetic-pair simulation, and the benchmark harness.
//!
//! Exit codes: 0 success, 2 usage or data errors, 3 numerical failure,
//! 4 i/o failure.

use clap::{Args, Parser, Subcommand};
use gls_granger::bench::{run_benchmark, sort_json, BenchConfig, Scenario};
use gls_granger::dataset::{ingest_csv, Dataset, IngestOptions};
use gls_granger::error::Error;
use gls_granger::pipeline::{
    build_causal_graph, classical_granger_test, estimate_residual_autocovariance,
    gls_granger_test_with, CausalGraph, CausalityResult, GlsGrangerOptions, GraphOptions,
    LagSelection, TestMethod,
};
use gls_granger::series::TimeSeries;
use gls_granger::simulation::{
    derive_seed, gen_ar1, gen_caused, gen_noncausal_pair, Ar1Config, CausedSeriesConfig,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "granger",
    about = "Granger causality tests with a GLS variant for heteroskedastic and regime-shifting series",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether one series causes another.
    Test(TestArgs),
    /// Run every ordered pair of a dataset and emit a causal graph.
    Graph(GraphArgs),
    /// Generate a synthetic pair and write it as CSV plus metadata.
    Simulate(SimulateArgs),
    /// Score the classical against the GLS test over simulated scenarios.
    Bench(BenchArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file of aligned series (header row required).
    data: PathBuf,
    /// Treat the first row as data, naming columns c0, c1, ...
    #[arg(long)]
    no_header: bool,
    /// Field delimiter.
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Column to keep as row labels instead of data (name, or index when
    /// there is no header).
    #[arg(long)]
    date_column: Option<String>,
    /// Difference every series this many times before testing.
    #[arg(long, default_value_t = 0)]
    diff: usize,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Label of the candidate cause.
    x: String,
    /// Label of the candidate effect.
    y: String,
    #[arg(long, default_value_t = 1)]
    lag: usize,
    /// Test to run: f (classical) or gls.
    #[arg(long, default_value = "gls")]
    method: String,
    /// Sliding-window length as a fraction of the usable observations.
    #[arg(long, default_value_t = 0.2)]
    tau_frac: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Skip the reflection padding; observations without a full window
    /// drop out of the GLS stage.
    #[arg(long)]
    no_reflect: bool,
    /// Write the raw sliding autocovariance of the OLS residuals (CSV
    /// matrix) to this path. GLS method only.
    #[arg(long)]
    dump_cov: Option<PathBuf>,
    /// Emit a machine-readable record instead of prose.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Test to run: f (classical) or gls.
    #[arg(long, default_value = "gls")]
    method: String,
    /// Fixed lag order for every pair.
    #[arg(long, default_value_t = 1, conflicts_with = "auto_lag")]
    lag: usize,
    /// Choose the lag per pair by AIC over 1..=P_MAX.
    #[arg(long, value_name = "P_MAX")]
    auto_lag: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    tau_frac: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    no_reflect: bool,
    /// Benjamini-Hochberg correction across the pairwise p-values.
    #[arg(long)]
    bh: bool,
    /// Write the graph in DOT syntax to this path.
    #[arg(long)]
    out_dot: Option<PathBuf>,
    /// Write the graph as a JSON record to this path.
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario: m1, m2, m3 or ar1.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 600)]
    n: usize,
    #[arg(long, default_value_t = 15)]
    lag: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path; metadata goes to <OUT>.meta.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 150)]
    pairs: usize,
    #[arg(long, default_value_t = 600)]
    n: usize,
    /// Lag used both to simulate and to test.
    #[arg(long, default_value_t = 15)]
    lag: usize,
    #[arg(long, default_value_t = 0.2)]
    tau_frac: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of m1,m2,m3,ar1.
    #[arg(long, default_value = "m1,m2,m3,ar1")]
    scenarios: String,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Graph(args) => cmd_graph(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn classify(e: Error) -> CliError {
    let code = match &e {
        Error::NotPositiveDefinite { .. }
        | Error::CollinearDesign { .. }
        | Error::NumericalInconsistency(_) => EXIT_NUMERICAL,
        Error::Io { .. } => EXIT_IO,
        Error::InvalidArgument(_) | Error::Parse { .. } => EXIT_USAGE,
    };
    CliError {
        code,
        message: e.to_string(),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: EXIT_IO,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

fn parse_method(s: &str) -> Result<TestMethod, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "f" | "classical" => Ok(TestMethod::ClassicalF),
        "gls" => Ok(TestMethod::GlsWald),
        other => Err(usage(format!(
            "unknown method '{other}' (expected 'f' or 'gls')"
        ))),
    }
}

fn resolve_date_column(args: &DataArgs) -> Result<Option<usize>, CliError> {
    let Some(dc) = &args.date_column else {
        return Ok(None);
    };
    if let Ok(i) = dc.parse::<usize>() {
        return Ok(Some(i));
    }
    if args.no_header {
        return Err(usage("without a header, --date-column must be an index"));
    }
    let text = std::fs::read_to_string(&args.data).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot read {}: {e}", args.data.display()),
    })?;
    let first = text.lines().next().unwrap_or_default();
    first
        .split(args.delimiter)
        .position(|h| h.trim() == dc)
        .map(Some)
        .ok_or_else(|| usage(format!("date column '{dc}' not found in header")))
}

fn load_dataset(args: &DataArgs) -> Result<Dataset, CliError> {
    let opts = IngestOptions {
        has_header: !args.no_header,
        date_column: resolve_date_column(args)?,
        delimiter: args.delimiter as u8,
    };
    let ds = ingest_csv(&args.data, &opts).map_err(classify)?;
    if args.diff > 0 {
        ds.differenced(args.diff).map_err(classify)
    } else {
        Ok(ds)
    }
}

fn lookup<'d>(ds: &'d Dataset, label: &str) -> Result<&'d TimeSeries, CliError> {
    ds.get(label).ok_or_else(|| {
        usage(format!(
            "column '{label}' not found; available: {}",
            ds.labels().join(", ")
        ))
    })
}

fn result_json(r: &CausalityResult) -> serde_json::Value {
    let mut v = json!({
        "cause": r.cause,
        "effect": r.effect,
        "lag": r.lag,
        "method": r.method.to_string(),
        "statistic": r.test.statistic,
        "df1": r.test.df1,
        "df2": r.test.df2,
        "p_value": r.test.p_value,
        "alpha": r.test.alpha,
        "reject": r.test.reject,
    });
    if let Some(tau) = r.tau {
        v["tau"] = json!(tau);
    }
    sort_json(v)
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let method = parse_method(&args.method)?;
    let ds = load_dataset(&args.data)?;
    let x = lookup(&ds, &args.x)?.clone();
    let y = lookup(&ds, &args.y)?.clone();
    if args.lag == 0 {
        return Err(usage("--lag must be positive"));
    }
    let n_eff = y.len().saturating_sub(args.lag);
    let result = match method {
        TestMethod::ClassicalF => {
            classical_granger_test(&x, &y, args.lag, args.alpha).map_err(classify)?
        }
        TestMethod::GlsWald => {
            let tau = (args.tau_frac * n_eff as f64).floor() as usize;
            let mut opts = GlsGrangerOptions::new(tau, args.alpha);
            opts.reflect = !args.no_reflect;
            if let Some(path) = &args.dump_cov {
                let cov =
                    estimate_residual_autocovariance(&x, &y, args.lag, tau, !args.no_reflect)
                        .map_err(classify)?;
                write_matrix_csv(path, &cov)?;
            }
            gls_granger_test_with(&x, &y, args.lag, &opts).map_err(classify)?
        }
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&result_json(&result)).expect("serializable")
        );
    } else {
        println!(
            "{} vs {}: method={} lag={} statistic={:.6} df=({:.0}, {:.0}) p={:.6}",
            result.cause,
            result.effect,
            result.method,
            result.lag,
            result.test.statistic,
            result.test.df1,
            result.test.df2,
            result.test.p_value
        );
        if result.causal() {
            println!(
                "verdict: {} causes {} (p < {})",
                result.cause, result.effect, result.test.alpha
            );
        } else {
            println!(
                "verdict: no evidence that {} causes {} (p >= {})",
                result.cause, result.effect, result.test.alpha
            );
        }
    }
    Ok(())
}

fn write_matrix_csv(
    path: &Path,
    m: &gls_granger::matrix::SymmetricMatrix,
) -> Result<(), CliError> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|j| m[(i, j)].to_string()).collect();
        writeln!(w, "{}", row.join(",")).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn graph_json(g: &CausalGraph) -> serde_json::Value {
    let edges: Vec<serde_json::Value> = g
        .edges
        .iter()
        .map(|e| {
            sort_json(json!({
                "from": e.from,
                "to": e.to,
                "p_value": e.p_value,
                "lag": e.lag,
            }))
        })
        .collect();
    sort_json(json!({
        "nodes": g.nodes,
        "edges": edges,
    }))
}

fn graph_dot(g: &CausalGraph) -> String {
    let mut out = String::from("digraph causal {\n");
    for node in &g.nodes {
        out.push_str(&format!("  \"{node}\";\n"));
    }
    for e in &g.edges {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [pvalue=\"{}\", lag={}];\n",
            e.from, e.to, e.p_value, e.lag
        ));
    }
    out.push_str("}\n");
    out
}

fn cmd_graph(args: GraphArgs) -> Result<(), CliError> {
    let method = parse_method(&args.method)?;
    let ds = load_dataset(&args.data)?;
    if ds.columns().len() < 2 {
        return Err(usage("a causal graph needs at least two columns"));
    }
    let lag = match args.auto_lag {
        Some(p_max) if p_max >= 1 => LagSelection::Auto { p_max },
        Some(_) => return Err(usage("--auto-lag must be positive")),
        None => {
            if args.lag == 0 {
                return Err(usage("--lag must be positive"));
            }
            LagSelection::Fixed(args.lag)
        }
    };
    let mut opts = GraphOptions::new(method, lag);
    opts.tau_fraction = args.tau_frac;
    opts.alpha = args.alpha;
    opts.reflect = !args.no_reflect;
    opts.bh_correction = args.bh;
    let graph = build_causal_graph(ds.columns(), &opts).map_err(classify)?;
    for d in &graph.diagnostics {
        eprintln!("warning: {d}");
    }
    println!(
        "{} nodes, {} causal edges ({} pairs tested)",
        graph.nodes.len(),
        graph.edges.len(),
        graph.lag_per_pair.len()
    );
    for e in &graph.edges {
        println!("  {} -> {}  p={:.6} lag={}", e.from, e.to, e.p_value, e.lag);
    }
    if let Some(path) = &args.out_dot {
        std::fs::write(path, graph_dot(&graph)).map_err(|e| io_error(path, e))?;
    }
    if let Some(path) = &args.out_json {
        let text = serde_json::to_string_pretty(&graph_json(&graph)).expect("serializable");
        std::fs::write(path, text).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let scenario: Scenario = args.scenario.parse().map_err(classify)?;
    if args.lag == 0 || args.lag >= args.n {
        return Err(usage("--lag must be positive and below --n"));
    }
    let x_seed = derive_seed(args.seed, 1);
    let y_seed = derive_seed(args.seed, 2);
    let (x, y, meta_extra) = match scenario {
        Scenario::Ar1 => {
            let cx = Ar1Config::new(0.9, 1.0, args.n, x_seed).map_err(classify)?;
            let cy = Ar1Config::new(0.5, 1.0, args.n, y_seed).map_err(classify)?;
            let (x, y) = gen_noncausal_pair(&cx, &cy).map_err(classify)?;
            (x, y, json!({ "phi_x": 0.9, "phi_y": 0.5, "sigma": 1.0 }))
        }
        _ => {
            let x = gen_ar1(&Ar1Config::new(0.9, 1.0, args.n, x_seed).map_err(classify)?)
                .map_err(classify)?;
            let cfg = match scenario {
                Scenario::M1 => CausedSeriesConfig::stationary(
                    args.lag,
                    gls_granger::bench::M1_NOISE_SIGMA,
                    y_seed,
                ),
                Scenario::M2 => CausedSeriesConfig::structural_break_default(
                    args.lag,
                    gls_granger::bench::M2_NOISE_SIGMA,
                    args.n,
                    y_seed,
                ),
                Scenario::M3 => CausedSeriesConfig::heteroskedastic_default(
                    args.lag,
                    gls_granger::bench::M3_NOISE_SIGMA,
                    y_seed,
                ),
                Scenario::Ar1 => unreachable!(),
            };
            let (y, beta) = gen_caused(&x, &cfg).map_err(classify)?;
            let extra = match cfg.residual {
                gls_granger::simulation::ResidualKind::Stationary => json!({
                    "sigma": cfg.sigma,
                    "beta": beta,
                    "driver_phi": 0.9,
                }),
                gls_granger::simulation::ResidualKind::StructuralBreak {
                    break_index,
                    break_shift,
                } => json!({
                    "sigma": cfg.sigma,
                    "beta": beta,
                    "driver_phi": 0.9,
                    "break_index": break_index,
                    "break_shift": break_shift,
                }),
                gls_granger::simulation::ResidualKind::Heteroskedastic { sigma_final } => json!({
                    "sigma": cfg.sigma,
                    "beta": beta,
                    "driver_phi": 0.9,
                    "sigma_final": sigma_final,
                }),
            };
            (x, y, extra)
        }
    };
    let ds = Dataset::from_series(vec![x.renamed("x"), y.renamed("y")], "generated")
        .map_err(classify)?;
    ds.write_csv(&args.out).map_err(classify)?;
    let mut meta = json!({
        "scenario": scenario.label(),
        "n": args.n,
        "lag": args.lag,
        "seed": args.seed,
    });
    if let serde_json::Value::Object(extra) = meta_extra {
        for (k, v) in extra {
            meta[k] = v;
        }
    }
    let meta_path = PathBuf::from(format!("{}.meta.json", args.out.display()));
    let text = serde_json::to_string_pretty(&sort_json(meta)).expect("serializable");
    std::fs::write(&meta_path, text).map_err(|e| io_error(&meta_path, e))?;
    println!("wrote {} and {}", args.out.display(), meta_path.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let scenarios = args
        .scenarios
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Scenario>, _>>()
        .map_err(classify)?;
    let cfg = BenchConfig {
        pairs: args.pairs,
        n: args.n,
        lag_sim: args.lag,
        lag_test: args.lag,
        tau_fraction: args.tau_frac,
        alpha: args.alpha,
        master_seed: args.seed,
        scenarios,
    };
    let report = run_benchmark(&cfg).map_err(classify)?;
    if args.json {
        println!("{}", report.to_json());
    } else {
        println!("{report}");
    }
    Ok(())
}
