//! Command-line interface: validation, analysis, Clifford corrections,
//! code search, simulation, and distillation planning.
//!
//! Exit codes: 0 on success, 1 on a domain failure (invalid matrix,
//! infeasible system, unreachable target), 2 on usage errors (unknown
//! builtin names, unreadable files, bad flags). `--json` switches every
//! subcommand to machine-readable output; human tables round floats to
//! four significant digits, JSON keeps full precision.

use std::fmt::Write as _;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use triortho::analysis::{self, AnalysisError};
use triortho::clifford::{self, VerifyMode};
use triortho::gf2::{parse_matrix_text, BitMatrix};
use triortho::ortho::{self, validate, TriorthogonalMatrix};
use triortho::planner::{self, ProtocolSpec};
use triortho::search::{self, Strategy};
use triortho::simulate::{self, Variant};

#[derive(Parser)]
#[command(name = "triortho", version, about = "Triorthogonal codes and magic state distillation toolkit")]
struct Cli {
    /// Emit machine-readable JSON instead of human tables.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for shot-parallel simulation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a matrix file for triorthogonality.
    Validate {
        /// Matrix file in the text format, or '-' for stdin.
        file: String,
    },
    /// Print a built-in matrix (BH49, RM15, or `G<k>` for even k).
    Dump { name: String },
    /// Weight enumerators, distance, series coefficients, threshold.
    Analyze {
        /// Matrix file, '-', or builtin name.
        input: String,
        /// Error rates at which to tabulate acceptance and output rates.
        #[arg(long = "p", value_name = "PROB")]
        probabilities: Vec<f64>,
    },
    /// Compute the transversal-T phase correction and verify it.
    Clifford {
        input: String,
        /// Verification strategy (default: exhaustive up to 24 rows,
        /// sampled beyond).
        #[arg(long, value_enum)]
        verify: Option<VerifyArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Solve the linear system for a minimum-column matrix.
    Search(SearchArgs),
    /// Monte Carlo estimate of acceptance and output error rates.
    Simulate {
        input: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Optimize a distillation sequence for one target error rate.
    Plan {
        #[arg(long)]
        p0: f64,
        /// Target output error rate, e.g. 1e-12.
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 5)]
        max_rounds: usize,
        /// Extra protocols (config file) appended to the built-in library.
        #[arg(long)]
        library: Option<String>,
    },
    /// Cost table over a list of target exponents.
    Table {
        #[arg(long)]
        p0: f64,
        /// Comma-separated -log10 targets, e.g. 4,6,12.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        max_rounds: usize,
        #[arg(long)]
        library: Option<String>,
        /// CSV output (target_exponent,sequence,achieved_exponent,cost).
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the matrix here (plus a `.json` sidecar); stdout otherwise.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyArg {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Randomized,
}

/// Usage failures exit 2, domain failures exit 1.
enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }
    fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = if cli.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        cli.threads
    };
    match run(cli.command, cli.json, threads) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Four significant digits, the table convention for human output.
fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = x.abs().log10().floor() as i32;
    let decimals = (3 - digits).max(0) as usize;
    format!("{x:.decimals$}")
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::usage(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("reading {path}: {e}")))
    }
}

fn load_raw_matrix(input: &str) -> Result<BitMatrix, CliError> {
    let text = read_input(input)?;
    parse_matrix_text(&text).map_err(CliError::usage)
}

/// Builtin name or matrix file. Names are tried first; anything else is
/// treated as a path.
fn load_matrix(input: &str) -> Result<TriorthogonalMatrix, CliError> {
    let looks_builtin = input == "BH49"
        || input == "RM15"
        || input
            .strip_prefix('G')
            .is_some_and(|r| r.parse::<usize>().is_ok());
    if looks_builtin {
        return ortho::builtin(input).map_err(|e| CliError::usage(e.to_string()));
    }
    let raw = load_raw_matrix(input)?;
    TriorthogonalMatrix::new(raw).map_err(|e| CliError::domain(e.to_string()))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::domain(format!("serializing output: {e}")))?;
    println!("{text}");
    Ok(())
}

fn run(command: Command, json: bool, threads: usize) -> Result<(), CliError> {
    match command {
        Command::Validate { file } => cmd_validate(&file, json),
        Command::Dump { name } => {
            let g = ortho::builtin(&name).map_err(|e| CliError::usage(e.to_string()))?;
            print!("{}", g.text());
            Ok(())
        }
        Command::Analyze {
            input,
            probabilities,
        } => cmd_analyze(&input, &probabilities, json),
        Command::Clifford {
            input,
            verify,
            seed,
            trials,
        } => cmd_clifford(&input, verify, seed, trials, json),
        Command::Search(args) => cmd_search(&args, json),
        Command::Simulate {
            input,
            p,
            shots,
            seed,
        } => cmd_simulate(&input, p, shots, seed, threads, json),
        Command::Plan {
            p0,
            target,
            max_rounds,
            library,
        } => cmd_plan(p0, target, max_rounds, library.as_deref(), json),
        Command::Table {
            p0,
            targets,
            max_rounds,
            library,
            csv,
        } => cmd_table(p0, &targets, max_rounds, library.as_deref(), csv, json),
    }
}

#[derive(Serialize)]
struct ValidateOutput {
    rows: usize,
    cols: usize,
    #[serde(flatten)]
    report: ortho::ValidationReport,
}

fn cmd_validate(file: &str, json: bool) -> Result<(), CliError> {
    let m = load_raw_matrix(file)?;
    let report = validate(&m);
    let out = ValidateOutput {
        rows: m.row_count(),
        cols: m.col_count(),
        report,
    };
    if json {
        print_json(&out)?;
    } else {
        let r = &out.report;
        println!(
            "{} x {} matrix: {}",
            out.rows,
            out.cols,
            if r.is_triorthogonal {
                "triorthogonal"
            } else {
                "NOT triorthogonal"
            }
        );
        println!(
            "odd rows (1-based): {:?}",
            r.odd_rows.iter().map(|i| i + 1).collect::<Vec<_>>()
        );
        for &(a, b) in &r.pair_violations {
            println!("pair violation: rows ({}, {})", a + 1, b + 1);
        }
        for &(a, b, c) in &r.triple_violations {
            println!("triple violation: rows ({}, {}, {})", a + 1, b + 1, c + 1);
        }
        if !r.zero_columns_in_g0.is_empty() {
            println!(
                "zero columns in even block (1-based): {:?}",
                r.zero_columns_in_g0
                    .iter()
                    .map(|i| i + 1)
                    .collect::<Vec<_>>()
            );
        }
    }
    if out.report.is_triorthogonal {
        Ok(())
    } else {
        Err(CliError::domain("matrix is not triorthogonal"))
    }
}

#[derive(Serialize)]
struct AnalyzeOutput {
    n: usize,
    k: usize,
    m: usize,
    distance: Option<usize>,
    g0_enumerator: String,
    g0_enumerator_terms: Vec<(usize, u128)>,
    coset_enumerator: Option<String>,
    q_leading_order: Option<usize>,
    q_leading_coefficient: Option<String>,
    ps_linear_coefficient: String,
    threshold: Option<f64>,
    rates: Vec<analysis::RateReport>,
}

fn cmd_analyze(input: &str, probabilities: &[f64], json: bool) -> Result<(), CliError> {
    let g = load_matrix(input)?;
    let domain = |e: AnalysisError| CliError::domain(e.to_string());

    let g0_enum = analysis::enumerator(&g.g0()).map_err(domain)?;
    let coset = if g.k() > 0 {
        Some(analysis::coset_enumerator(&g.g0(), g.logical_row(0)).map_err(domain)?)
    } else {
        None
    };
    let distance = match analysis::distance_z(&g) {
        Ok(d) => Some(d),
        Err(AnalysisError::NoLogicalQubits) => None,
        Err(e) => return Err(domain(e)),
    };
    let (q_leading_order, q_leading_coefficient) = match distance {
        Some(d) => {
            let series = analysis::q_series(&g, 0, d).map_err(domain)?;
            (Some(d), Some(series.coeff(d).to_string()))
        }
        None => (None, None),
    };
    let ps_linear = analysis::ps_series(&g, 1).map_err(domain)?.coeff(1);
    let threshold = match analysis::threshold(&g) {
        Ok(t) => Some(t),
        Err(AnalysisError::NoThreshold | AnalysisError::NoLogicalQubits) => None,
        Err(e) => return Err(domain(e)),
    };
    let rates = probabilities
        .iter()
        .map(|&p| analysis::rate_report(&g, p).map_err(domain))
        .collect::<Result<Vec<_>, _>>()?;

    let out = AnalyzeOutput {
        n: g.n(),
        k: g.k(),
        m: g.m(),
        distance,
        g0_enumerator: g0_enum.to_polynomial_string(),
        g0_enumerator_terms: g0_enum.terms().collect(),
        coset_enumerator: coset.map(|c| c.to_polynomial_string()),
        q_leading_order,
        q_leading_coefficient,
        ps_linear_coefficient: ps_linear.to_string(),
        threshold,
        rates,
    };

    if json {
        print_json(&out)
    } else {
        println!("n = {}, k = {}, rows = {}", out.n, out.k, out.m);
        match out.distance {
            Some(d) => println!("Z-distance: {d}"),
            None => println!("Z-distance: undefined (no logical qubits)"),
        }
        println!("even-block enumerator: {}", out.g0_enumerator);
        if let Some(c) = &out.coset_enumerator {
            println!("coset enumerator (qubit 1): {c}");
        }
        if let (Some(d), Some(c)) = (out.q_leading_order, &out.q_leading_coefficient) {
            println!("output error leading term: {c} p^{d}");
        }
        println!(
            "acceptance linear coefficient: {}",
            out.ps_linear_coefficient
        );
        match out.threshold {
            Some(t) => println!("threshold: {}", sig4(t)),
            None => println!("threshold: none"),
        }
        if !out.rates.is_empty() {
            println!("{:<12} {:<12} {:<12}", "p", "P_s", "q_max");
            for r in &out.rates {
                println!(
                    "{:<12} {:<12} {:<12}",
                    sig4(r.p),
                    sig4(r.success_probability),
                    if r.q_per_qubit.is_empty() {
                        "-".into()
                    } else {
                        sig4(r.q_max)
                    }
                );
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct CliffordOutput {
    n: usize,
    lambda_p: Vec<u8>,
    lambda_pq_pairs: Vec<(usize, usize)>,
    s_gates: usize,
    cz_gates: usize,
    verify_mode: String,
    verdict: clifford::VerifyOutcome,
}

fn cmd_clifford(
    input: &str,
    verify: Option<VerifyArg>,
    seed: u64,
    trials: u64,
    json: bool,
) -> Result<(), CliError> {
    let g = load_matrix(input)?;
    let correction = clifford::correction(&g).map_err(|e| CliError::domain(e.to_string()))?;
    let counts = clifford::gate_counts(&correction);
    let mode = match verify {
        Some(VerifyArg::Exhaustive) => VerifyMode::Exhaustive,
        Some(VerifyArg::Sampled) => VerifyMode::Sampled { seed, trials },
        None if g.m() <= 24 => VerifyMode::Exhaustive,
        None => VerifyMode::Sampled { seed, trials },
    };
    let verdict = clifford::verify_phase_identity(&g, &correction, mode)
        .map_err(|e| CliError::domain(e.to_string()))?;
    let pairs: Vec<(usize, usize)> = (0..g.n())
        .flat_map(|p| {
            let c = &correction;
            ((p + 1)..g.n()).filter_map(move |q| c.lambda_pq(p, q).then_some((p, q)))
        })
        .collect();
    let out = CliffordOutput {
        n: g.n(),
        lambda_p: correction.lambda_p().to_vec(),
        lambda_pq_pairs: pairs,
        s_gates: counts.s_gates,
        cz_gates: counts.cz_gates,
        verify_mode: match mode {
            VerifyMode::Exhaustive => "exhaustive".into(),
            VerifyMode::Sampled { seed, trials } => {
                format!("sampled(seed={seed},trials={trials})")
            }
        },
        verdict,
    };
    if json {
        print_json(&out)?;
    } else {
        println!(
            "lambda_p (mod 4): {}",
            out.lambda_p
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join("")
        );
        println!("S gates: {}, CZ gates: {}", out.s_gates, out.cz_gates);
        if out.cz_gates > 0 && out.cz_gates <= 64 {
            let mut line = String::from("lambda_pq pairs (1-based):");
            for &(p, q) in &out.lambda_pq_pairs {
                let _ = write!(line, " ({},{})", p + 1, q + 1);
            }
            println!("{line}");
        }
        println!(
            "verification [{}]: {} ({} checked, {} violations)",
            out.verify_mode,
            if out.verdict.ok { "PASS" } else { "FAIL" },
            out.verdict.checked,
            out.verdict.violations
        );
        if let Some(ce) = &out.verdict.counterexample {
            println!(
                "counterexample x = {} (lhs {} != rhs {})",
                ce.x, ce.lhs, ce.rhs
            );
        }
    }
    if out.verdict.ok {
        Ok(())
    } else {
        Err(CliError::domain("phase identity verification failed"))
    }
}

#[derive(Serialize)]
struct SearchOutput {
    m: usize,
    k: usize,
    variables: usize,
    constraints: usize,
    weight: usize,
    certified_minimal: bool,
    distance: usize,
    g0_enumerator: String,
    matrix: String,
}

fn cmd_search(args: &SearchArgs, json: bool) -> Result<(), CliError> {
    let system =
        search::build_system(args.m, args.k).map_err(|e| CliError::usage(e.to_string()))?;
    let strategy = match args.strategy {
        StrategyArg::Exhaustive => Strategy::Exhaustive,
        StrategyArg::Randomized => Strategy::Randomized {
            budget: args.budget,
            seed: args.seed,
        },
    };
    let outcome = search::min_weight_solution(&system, strategy)
        .map_err(|e| CliError::domain(e.to_string()))?;
    let g = search::materialize(&outcome.solution, args.k)
        .map_err(|e| CliError::domain(e.to_string()))?;
    let distance = analysis::distance_z(&g).map_err(|e| CliError::domain(e.to_string()))?;
    let enumerator =
        analysis::enumerator(&g.g0()).map_err(|e| CliError::domain(e.to_string()))?;
    let out = SearchOutput {
        m: args.m,
        k: args.k,
        variables: system.variables(),
        constraints: system.constraints(),
        weight: outcome.weight,
        certified_minimal: outcome.certified_minimal,
        distance,
        g0_enumerator: enumerator.to_polynomial_string(),
        matrix: g.text(),
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, &out.matrix)
                .map_err(|e| CliError::usage(format!("writing {path}: {e}")))?;
            let sidecar = format!("{path}.json");
            let payload =
                serde_json::to_string_pretty(&out).map_err(|e| CliError::domain(e.to_string()))?;
            std::fs::write(&sidecar, payload)
                .map_err(|e| CliError::usage(format!("writing {sidecar}: {e}")))?;
            if !json {
                println!(
                    "wrote {} x {} matrix (distance {}) to {path}",
                    args.m, out.weight, out.distance
                );
            }
        }
        None => {
            if json {
                print_json(&out)?;
            } else {
                println!(
                    "# m = {}, k = {}, columns = {}, distance = {}, minimal = {}",
                    args.m, args.k, out.weight, out.distance, out.certified_minimal
                );
                print!("{}", out.matrix);
            }
        }
    }
    Ok(())
}

fn cmd_simulate(
    input: &str,
    p: f64,
    shots: u64,
    seed: u64,
    threads: usize,
    json: bool,
) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::usage(format!("p must lie in [0, 1], got {p}")));
    }
    if shots == 0 {
        return Err(CliError::usage("shots must be positive"));
    }
    let g = load_matrix(input)?;
    let result = simulate::simulate_with_threads(&g, p, shots, seed, threads);
    #[derive(Serialize)]
    struct SimulateOutput {
        #[serde(flatten)]
        result: simulate::SimulationResult,
        resources_main: simulate::ResourceProfile,
        resources_measure_only: simulate::ResourceProfile,
    }
    let out = SimulateOutput {
        resources_main: simulate::resources(&g, Variant::Main),
        resources_measure_only: simulate::resources(&g, Variant::MeasureOnly),
        result,
    };
    if json {
        print_json(&out)
    } else {
        let r = &out.result;
        println!("shots: {}, accepted: {}", r.shots, r.accepted);
        println!("P_s: {} +/- {}", sig4(r.p_s_hat), sig4(r.p_s_se));
        for (a, (q, se)) in r.q_hat.iter().zip(&r.q_se).enumerate() {
            println!("q[{}]: {} +/- {}", a + 1, sig4(*q), sig4(*se));
        }
        println!(
            "resources: encode-and-measure {} ancillas / {} measurements, measure-only 0 / {}",
            out.resources_main.extra_qubits,
            out.resources_main.pauli_measurements,
            out.resources_measure_only.pauli_measurements
        );
        Ok(())
    }
}

fn load_library(extra: Option<&str>) -> Result<Vec<ProtocolSpec>, CliError> {
    let mut lib = planner::builtin_library();
    if let Some(path) = extra {
        let text = read_input(path)?;
        let externals =
            planner::parse_protocol_config(&text).map_err(|e| CliError::usage(e.to_string()))?;
        lib.extend(externals);
    }
    Ok(lib)
}

fn print_plan_text(plan: &planner::DistillationPlan) {
    println!("sequence: {}", plan.sequence_label());
    println!(
        "{:<10} {:<14} {:<14} {:<12} {:<12}",
        "protocol", "p_in", "p_out", "P_s", "factor"
    );
    for level in &plan.levels {
        println!(
            "{:<10} {:<14} {:<14} {:<12} {:<12}",
            level.protocol,
            format!("{:.4e}", level.p_in),
            format!("{:.4e}", level.p_out),
            sig4(level.success_probability),
            sig4(level.cost_factor)
        );
    }
    println!(
        "total cost: {}   final error: {:.4e}   (-log10: {})",
        sig4(plan.total_cost),
        plan.final_error,
        sig4(-plan.final_error.log10())
    );
    if plan.diverging {
        println!("warning: some level failed to reduce the error rate");
    }
    if plan.input_above_threshold {
        println!("warning: input error rate is at or above the first protocol's threshold");
    }
}

fn cmd_plan(
    p0: f64,
    target: f64,
    max_rounds: usize,
    library: Option<&str>,
    json: bool,
) -> Result<(), CliError> {
    let lib = load_library(library)?;
    let plan = planner::optimize(p0, target, max_rounds, &lib)
        .map_err(|e| CliError::domain(e.to_string()))?;
    if json {
        print_json(&plan)
    } else {
        print_plan_text(&plan);
        Ok(())
    }
}

fn cmd_table(
    p0: f64,
    target_exponents: &[f64],
    max_rounds: usize,
    library: Option<&str>,
    csv: bool,
    json: bool,
) -> Result<(), CliError> {
    if target_exponents.is_empty() {
        return Err(CliError::usage("at least one target exponent is required"));
    }
    let lib = load_library(library)?;
    let targets: Vec<f64> = target_exponents.iter().map(|d| 10f64.powf(-d)).collect();
    let table = planner::emit_table(p0, &targets, max_rounds, &lib)
        .map_err(|e| CliError::domain(e.to_string()))?;
    if json {
        print_json(&table)
    } else if csv {
        print!("{}", table.to_csv());
        Ok(())
    } else {
        println!(
            "{:<8} {:<20} {:<10} {:<10}",
            "target", "sequence", "achieved", "cost"
        );
        for row in &table.rows {
            match &row.plan {
                Some(plan) => println!(
                    "{:<8} {:<20} {:<10} {:<10}",
                    row.target_exponent,
                    plan.sequence_label(),
                    sig4(-plan.final_error.log10()),
                    sig4(plan.total_cost)
                ),
                None => println!(
                    "{:<8} {:<20} {:<10} {:<10}",
                    row.target_exponent, "unreachable", "-", "-"
                ),
            }
        }
        Ok(())
    }
}
