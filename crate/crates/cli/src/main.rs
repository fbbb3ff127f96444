//! `ksec`: runs the bound reproductions, the LP, simulations and the exact
//! enumeration oracle from the command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
//! errors.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use knapsack_secretary::analysis::{column_bound_reports, headline_reports, noboost_reports};
use knapsack_secretary::lp::{build_primal, convergence_report, dual_certificate, dual_objective, solve, MAX_SOLVER_K};
use knapsack_secretary::montecarlo::{estimate, sweep_alpha, AlgorithmSpec};
use knapsack_secretary::probability::{enumerate_exact, structural_identity_check};
use knapsack_secretary::{make_instance, Error, Instance, InstanceKind, INV_E};
use serde_json::json;

use output::{bounds_csv, Format, Sink};

#[derive(Parser)]
#[command(name = "ksec", version, about = "Knapsack secretary bounds, LP and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Upper bounds on theta_{j,k} for k = 3..10.
    ReproduceTable1,
    /// theta_y for y = 2..7 and the unboosted ratio at c = 0.26888.
    ReproduceAppendix,
    /// The remaining scalar constants: no-boost cap, theta_{1,5}, boosting interval.
    ReproduceBounds,
    /// Solve the factor-revealing LP and evaluate the dual certificate.
    Lp {
        /// Batch counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// Include the optimal primal vertex (JSON only).
        #[arg(long)]
        vertex: bool,
    },
    /// The closed-form dual certificate for one k.
    LpDual {
        #[arg(long)]
        k: usize,
    },
    /// Monte Carlo estimate of one algorithm on one instance.
    Simulate(SimulateArgs),
    /// Exact selection probabilities over all arrival orders.
    Enumerate(EnumerateArgs),
    /// Boosted algorithm across a grid of boosting factors.
    SweepAlpha(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    I1,
    I2,
    BoostTightUpper,
    BoostTightTheta15,
    OrdinalPairSmallOpt,
    OrdinalPairLargeOpt,
    UniformRandom,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Classic,
    Extended,
    Boosted,
    MixedOrdinal,
}

#[derive(Args)]
struct InstanceArgs {
    /// Named instance family.
    #[arg(long, value_enum)]
    instance: Option<KindArg>,
    /// Read the instance from a JSON file instead.
    #[arg(long, conflicts_with = "instance")]
    instance_file: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Knapsack capacity.
    #[arg(long = "B")]
    capacity: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Seed of the uniform-random family (defaults to --seed).
    #[arg(long)]
    instance_seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    alg: AlgArg,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Sample fraction.
    #[arg(long, default_value_t = INV_E)]
    c: f64,
    /// Boosting factor, also used to build boost-tight instances.
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "B")]
    capacity: usize,
    #[arg(long)]
    c: f64,
    /// Boost small items by this factor.
    #[arg(long)]
    alpha: Option<f64>,
    /// Item sizes by rank, comma separated; otherwise sizes are random.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Verify the structural identities instead of printing the table.
    #[arg(long)]
    check_lemmas: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Boosting factors, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = INV_E)]
    c: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverStalled { .. }
            | Error::Unbounded
            | Error::InfeasibleStart { .. }
            | Error::CertificateInfeasible { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn kind_of(arg: KindArg, alpha: f64, seed: u64) -> InstanceKind {
    match arg {
        KindArg::I1 => InstanceKind::I1,
        KindArg::I2 => InstanceKind::I2,
        KindArg::BoostTightUpper => InstanceKind::BoostTightUpper { alpha },
        KindArg::BoostTightTheta15 => InstanceKind::BoostTightTheta15 { alpha },
        KindArg::OrdinalPairSmallOpt => InstanceKind::OrdinalPairSmallOpt,
        KindArg::OrdinalPairLargeOpt => InstanceKind::OrdinalPairLargeOpt,
        KindArg::UniformRandom => InstanceKind::UniformRandom { seed },
    }
}

enum Source {
    Kind { kind: InstanceKind, n: usize, capacity: usize, epsilon: f64 },
    File(Instance),
}

impl InstanceArgs {
    fn source(&self, alpha: f64, seed: u64) -> Result<Source, Failure> {
        if let Some(path) = &self.instance_file {
            let text = std::fs::read_to_string(path)?;
            let inst: Instance = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            return Ok(Source::File(inst));
        }
        let arg = self
            .instance
            .ok_or_else(|| Failure::Usage("either --instance or --instance-file is required".into()))?;
        let (n, capacity) = match (self.n, self.capacity) {
            (Some(n), Some(b)) => (n, b),
            _ => return Err(Failure::Usage("--instance needs --n and --B".into())),
        };
        Ok(Source::Kind {
            kind: kind_of(arg, alpha, self.instance_seed.unwrap_or(seed)),
            n,
            capacity,
            epsilon: self.epsilon,
        })
    }
}

impl Source {
    fn build(&self) -> Result<Instance, Failure> {
        match self {
            Source::Kind { kind, n, capacity, epsilon } => Ok(make_instance(*kind, *n, *capacity, *epsilon)?),
            Source::File(inst) => Ok(inst.clone()),
        }
    }
}

fn reproduce(sink: &Sink, key: &str, reports: &[knapsack_secretary::analysis::BoundReport]) -> Outcome {
    let pass = reports.iter().all(|r| r.pass());
    match sink.format {
        Format::Csv => sink.write(&bounds_csv(key, reports))?,
        Format::Json => {
            let rows: Vec<_> = reports
                .iter()
                .map(|r| json!({ "report": r, "absErr": r.abs_err(), "pass": r.pass() }))
                .collect();
            sink.write_json(&json!({ "rows": rows, "pass": pass }))?
        }
    }
    Ok(pass)
}

fn lp(sink: &Sink, ks: &[usize], vertex: bool) -> Outcome {
    if vertex && sink.format != Format::Json {
        return Err(Failure::Usage("--vertex requires --format json".into()));
    }
    if vertex {
        if let Some(&k) = ks.iter().find(|&&k| k > MAX_SOLVER_K) {
            return Err(Failure::Usage(format!("--vertex needs k <= {MAX_SOLVER_K}, got {k}")));
        }
    }
    let rows = convergence_report(ks)?;
    let pass = rows.iter().all(|r| r.weak_duality_holds());
    match sink.format {
        Format::Csv => {
            let mut out = String::from("k,primal,dual,scale,tau,weak_duality\n");
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.k,
                    opt(r.primal),
                    opt(r.dual),
                    opt(r.scale),
                    r.tau.map(|t| t.to_string()).unwrap_or_default(),
                    r.weak_duality_holds()
                ));
            }
            sink.write(&out)?;
        }
        Format::Json => {
            let mut out = Vec::new();
            for r in &rows {
                let mut row = json!({ "row": r, "weakDuality": r.weak_duality_holds() });
                if vertex {
                    let model = build_primal(r.k)?;
                    let sol = solve(&model)?;
                    row["vertex"] = json!({
                        "c": sol.x[model.var_c()],
                        "p": (1..=r.k).map(|i| sol.x[model.var_p(i)]).collect::<Vec<_>>(),
                        "q": (1..=r.k).map(|i| sol.x[model.var_q(i)]).collect::<Vec<_>>(),
                        "pivots": sol.pivots,
                    });
                }
                out.push(row);
            }
            sink.write_json(&json!({ "rows": out, "pass": pass }))?;
        }
    }
    Ok(pass)
}

fn lp_dual(sink: &Sink, k: usize) -> Outcome {
    let cert = dual_certificate(k)?;
    let objective = dual_objective(&cert);
    let feasible = cert.is_feasible(cert.scale);
    match sink.format {
        Format::Csv => sink.write(&format!(
            "k,tau,dual_alpha,dual_beta,scale,dual_objective,feasible\n{},{},{},{},{},{},{}\n",
            cert.k, cert.tau, cert.dual_alpha, cert.dual_beta, cert.scale, objective, feasible
        ))?,
        Format::Json => sink.write_json(&json!({
            "certificate": cert,
            "dualObjective": objective,
            "feasible": feasible,
        }))?,
    }
    Ok(feasible)
}

fn simulate(sink: &Sink, args: &SimulateArgs) -> Outcome {
    let inst = args.instance.source(args.alpha, args.seed)?.build()?;
    let spec = match args.alg {
        AlgArg::Classic => AlgorithmSpec::Classic { c: args.c },
        AlgArg::Extended => AlgorithmSpec::Extended { c: args.c },
        AlgArg::Boosted => AlgorithmSpec::Boosted { alpha: args.alpha, c: args.c },
        AlgArg::MixedOrdinal => AlgorithmSpec::MixedOrdinal,
    };
    let report = estimate(&spec, &inst, args.trials, args.seed)?;
    match sink.format {
        Format::Csv => sink.write(&report.to_csv())?,
        Format::Json => sink.write_json(&report)?,
    }
    Ok(true)
}

fn enumerate(sink: &Sink, args: &EnumerateArgs) -> Outcome {
    let n = match (&args.sizes, args.n) {
        (Some(s), Some(n)) if s.len() != n => {
            return Err(Failure::Usage(format!("--sizes lists {} items but --n is {n}", s.len())))
        }
        (Some(s), _) => s.len(),
        (None, Some(n)) => n,
        (None, None) => return Err(Failure::Usage("enumerate needs --n or --sizes".into())),
    };
    let inst = match &args.sizes {
        Some(sizes) => Instance::new(args.capacity, sizes.iter().enumerate().map(|(i, &s)| ((n - i) as f64, s)))?,
        None => make_instance(InstanceKind::UniformRandom { seed: args.seed }, n, args.capacity, 0.0)?,
    };
    let table = enumerate_exact(&inst, args.c, args.alpha)?;
    if !args.check_lemmas {
        match sink.format {
            Format::Csv => sink.write(&output::table_csv(&table))?,
            Format::Json => sink.write_json(&json!({ "instance": inst, "table": table }))?,
        }
        return Ok(true);
    }
    let report = structural_identity_check(&table, &inst);
    match sink.format {
        Format::Csv => sink.write(&output::identity_csv(&report))?,
        Format::Json => sink.write_json(&json!({ "instance": inst, "report": report, "pass": report.all_exact() }))?,
    }
    if report.all_exact() {
        eprintln!("all identities exact ({} checks)", report.total_checked());
    } else {
        eprintln!("{} identity violations", report.violations.len());
        for v in report.violations.iter().take(10) {
            eprintln!("  {v}");
        }
    }
    Ok(report.all_exact())
}

fn sweep(sink: &Sink, args: &SweepArgs) -> Outcome {
    let first = args.alpha[0];
    let (kind, n, capacity, epsilon) = match args.instance.source(first, args.seed)? {
        Source::Kind { kind, n, capacity, epsilon } => (kind, n, capacity, epsilon),
        Source::File(_) => return Err(Failure::Usage("sweep-alpha needs a named --instance".into())),
    };
    let rows = sweep_alpha(kind, &args.alpha, n, capacity, epsilon, args.c, args.trials, args.seed)?;
    match sink.format {
        Format::Csv => sink.write(&knapsack_secretary::montecarlo::sweep_to_csv(&rows))?,
        Format::Json => sink.write_json(&rows)?,
    }
    Ok(true)
}

fn run(cli: &Cli) -> Outcome {
    let sink = Sink {
        format: cli.format,
        out: cli.out.clone(),
    };
    match &cli.command {
        Command::ReproduceTable1 => reproduce(&sink, "k", &column_bound_reports()),
        Command::ReproduceAppendix => reproduce(&sink, "y", &noboost_reports()),
        Command::ReproduceBounds => reproduce(&sink, "inputs", &headline_reports()),
        Command::Lp { k, vertex } => lp(&sink, k, *vertex),
        Command::LpDual { k } => lp_dual(&sink, *k),
        Command::Simulate(args) => simulate(&sink, args),
        Command::Enumerate(args) => enumerate(&sink, args),
        Command::SweepAlpha(args) => sweep(&sink, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
