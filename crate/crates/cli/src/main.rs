use clap::{Args, Parser, Subcommand, ValueEnum};
use dtp_core::closeness::ClosenessFamily;
use dtp_core::dist::OccurrenceVector;
use dtp_core::experiment::{
    calibrate, run_experiment, trial_csv, write_experiment_csv, Constants, ExperimentConfig, Grid, Protocol, RowKind,
};
use dtp_core::hardness::{bhh_generate, bhh_reduce, ghd_generate_inputs, ghd_reduce, GhdParams};
use dtp_core::io::{write_instance, InstanceFile, InstanceHeader};
use dtp_core::rng::{derive_seed, label_hash, stream};
use dtp_core::Error;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dtp", version, about = "Two-party distribution testing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closeness tester on uniform (same) and paired-bias (far) instances.
    Closeness(ClosenessArgs),
    /// Independence tester on uniform-product and diagonal instances.
    Independence(IndependenceArgs),
    /// Writes a reduction-generated hard instance.
    Hardgen(HardgenArgs),
    /// Parameter sweep with summary rows, or calibration of constants.
    Run(RunArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML constants fixture.
    #[arg(long)]
    constants: Option<PathBuf>,
    /// Constant override `section.key=value`, repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClosenessArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    /// Run the secure reference instead of the plaintext protocol.
    #[arg(long)]
    secure: bool,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct IndependenceArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Single Alice-to-Bob message instead of the secure evaluation.
    #[arg(long)]
    one_way: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Ghd,
    Bhh,
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    Same,
    Far,
    Product,
}

#[derive(Args)]
struct HardgenArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    /// ghd: same or far; bhh: product (b = 1) or far (b = 0).
    #[arg(long, value_enum)]
    case: Case,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    constants: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    protocol: String,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Ignored with --calibrate, which runs at the precondition-minimal t.
    #[arg(long, value_delimiter = ',')]
    t: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search constant multipliers and write the best as a fixture.
    #[arg(long)]
    calibrate: bool,
    #[arg(long)]
    constants: Option<PathBuf>,
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_constants(path: Option<&Path>, overrides: &[String]) -> CliResult<Constants> {
    let mut c = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            Constants::from_toml(&text)?
        }
        None => Constants::default(),
    };
    for o in overrides {
        c.apply_override(o)?;
    }
    Ok(c)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::Io(e.to_string())),
    }
}

/// Runs one cell and writes its per-trial CSV.
fn single_cell(protocol: Protocol, grid: Grid, common: &CommonArgs) -> CliResult<()> {
    let cfg = ExperimentConfig {
        protocol,
        grid,
        trials: common.trials,
        seed: common.seed,
        constants: load_constants(common.constants.as_deref(), &common.overrides)?,
    };
    let rows = run_experiment(&cfg)?;
    if let Some(skipped) = rows.iter().find(|r| r.kind == RowKind::Skipped) {
        return Err(Failure::Core(Error::Config(skipped.reason.clone())));
    }
    emit(common.out.as_deref(), trial_csv(&rows, protocol).as_bytes())
}

fn hardgen(args: &HardgenArgs) -> CliResult<()> {
    let mut rng = stream(derive_seed(args.seed, &[label_hash("hardgen")]));
    let (label, sections) = match (args.problem, args.case) {
        (Problem::Ghd, Case::Same | Case::Far) => {
            let case = if matches!(args.case, Case::Same) { ClosenessFamily::Same } else { ClosenessFamily::Far };
            let c = load_constants(args.constants.as_deref(), &[])?;
            let params = GhdParams::new(args.n, args.t, c.hardness.c_large, None)?;
            let input = ghd_generate_inputs(params.m, case, params.beta, &mut rng)?;
            let (a, b) = ghd_reduce(&input, &params, &mut rng)?;
            (case.label(), vec![("alice".to_string(), a), ("bob".to_string(), b)])
        }
        (Problem::Bhh, Case::Product | Case::Far) => {
            let b = matches!(args.case, Case::Product);
            let inst = bhh_generate(args.n, b, &mut rng)?;
            let joint = bhh_reduce(&inst, args.t, &mut rng)?;
            let mut counts = vec![0u64; args.n * args.n];
            for (&a, &b) in joint.alice.letters().iter().zip(joint.bob.letters()) {
                counts[a * args.n + b] += 1;
            }
            let label = if b { "product" } else { "far" };
            (label, vec![("joint".to_string(), OccurrenceVector::from_counts(counts))])
        }
        _ => {
            return Err(Failure::Core(Error::Config(
                "ghd cases are same/far and bhh cases are product/far".to_string(),
            )))
        }
    };
    let file = InstanceFile {
        header: InstanceHeader { case: label.to_string(), n: args.n, t: args.t, seed: args.seed },
        sections,
    };
    emit(args.out.as_deref(), write_instance(&file).as_bytes())
}

fn run(args: &RunArgs) -> CliResult<()> {
    let protocol: Protocol = args.protocol.parse()?;
    let constants = load_constants(args.constants.as_deref(), &args.overrides)?;
    if args.calibrate {
        let n = args.n[0];
        let m = args.m.first().copied().unwrap_or(n);
        let cal = calibrate(protocol, n, m, args.eps[0], args.k[0], args.trials, args.seed, &constants)?;
        for p in &cal.table {
            eprintln!("t={} accept={:.3} reject={:.3}", p.t, p.accept_rate, p.reject_rate);
        }
        return emit(args.out.as_deref(), cal.fixture().as_bytes());
    }
    let cfg = ExperimentConfig {
        protocol,
        grid: Grid {
            n: args.n.clone(),
            m: args.m.clone(),
            t: args.t.clone(),
            eps: args.eps.clone(),
            k: args.k.clone(),
        },
        trials: args.trials,
        seed: args.seed,
        constants,
    };
    let rows = run_experiment(&cfg)?;
    let mut buf = Vec::new();
    write_experiment_csv(&rows, protocol, &mut buf)?;
    emit(args.out.as_deref(), &buf)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Closeness(a) => single_cell(
            if a.secure { Protocol::ClosenessSecure } else { Protocol::Closeness },
            Grid { n: vec![a.n], m: vec![], t: vec![a.t], eps: vec![a.common.eps], k: vec![a.k] },
            &a.common,
        ),
        Command::Independence(a) => single_cell(
            if a.one_way { Protocol::IndependenceOneWay } else { Protocol::Independence },
            Grid { n: vec![a.n], m: a.m.into_iter().collect(), t: vec![a.t], eps: vec![a.common.eps], k: vec![a.k] },
            &a.common,
        ),
        Command::Hardgen(a) => hardgen(a),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = match &f {
                Failure::Core(Error::Config(_) | Error::InvalidArgument(_) | Error::Parse { .. }) => 2,
                Failure::Core(Error::Infeasible(_)) => 3,
                Failure::Core(Error::Execution(_)) | Failure::Io(_) => 1,
            };
            match f {
                Failure::Core(e) => eprintln!("dtp: {e}"),
                Failure::Io(msg) => eprintln!("dtp: {msg}"),
            }
            ExitCode::from(code)
        }
    }
}
