use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use dynsub::harness::{
    compare, read_stream, run, synthesize, write_compare, write_report, write_stream,
    AlgorithmKind, FunctionKind, MatroidKind, RunConfig, StreamSpec, SynthSpec, Universe,
};
use dynsub::Execution;

/// Fully dynamic submodular maximization under a matroid constraint.
#[derive(Parser)]
#[command(name = "dynsub", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an operation stream.
    Gen(GenArgs),
    /// Replay a stream through one algorithm and write a per-operation CSV.
    Run(RunArgs),
    /// Replay a stream through several algorithms and write their totals.
    Compare(CompareArgs),
    /// Write a random universe.
    Universe(UniverseArgs),
}

#[derive(Args)]
struct GenArgs {
    /// `appendix-c:n=N`, `random:n=N,p=P,seed=S` or `sliding-window:n=N,w=W`.
    #[arg(long)]
    spec: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Universe whose ids the random generator draws from.
    #[arg(long)]
    universe: Option<PathBuf>,
    /// Also write the matching appendix-c universe here.
    #[arg(long)]
    universe_out: Option<PathBuf>,
}

#[derive(Args)]
struct Replay {
    #[arg(long)]
    universe: PathBuf,
    #[arg(long)]
    stream: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Force sequential execution.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    replay: Replay,
    #[arg(long, default_value = "dynamic")]
    algorithm: AlgorithmKind,
    /// Brute-force OPT after every operation and check the approximation.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    replay: Replay,
    #[arg(long, value_delimiter = ',', default_value = "dynamic,dynamic-swapping,dynamic-greedy")]
    algorithms: Vec<AlgorithmKind>,
}

#[derive(Args)]
struct UniverseArgs {
    #[arg(long)]
    elements: usize,
    #[arg(long, default_value = "coverage")]
    function: FunctionKind,
    #[arg(long, default_value = "uniform")]
    matroid: MatroidKind,
    #[arg(long, default_value_t = 3)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Done,
    VerificationFailed,
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_universe(path: &Path) -> anyhow::Result<Universe> {
    Universe::load(path).with_context(|| format!("cannot load universe {}", path.display()))
}

fn load_stream(path: &Path) -> anyhow::Result<Vec<dynsub::Operation>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_stream(BufReader::new(file)).with_context(|| format!("in {}", path.display()))
}

impl Replay {
    fn config(&self, algorithm: AlgorithmKind, verify: bool) -> RunConfig {
        RunConfig {
            algorithm,
            epsilon: self.epsilon,
            seed: self.seed,
            verify,
            exec: if self.sequential {
                Execution::Sequential
            } else {
                Execution::preferred()
            },
        }
    }
}

fn gen(args: GenArgs) -> anyhow::Result<Outcome> {
    let spec: StreamSpec = args.spec.parse()?;
    let ids = match &args.universe {
        Some(p) => load_universe(p)?.ids(),
        None => spec.default_universe(),
    };
    let ops = spec.generate(&ids)?;
    if let Some(p) = &args.universe_out {
        let StreamSpec::AppendixC { n } = spec else {
            bail!("--universe-out is only defined for appendix-c streams");
        };
        Universe::appendix_c(n).save(p)?;
    }
    let mut out = output(&args.out)?;
    write_stream(&mut out, &ops, Some(&spec.to_string()))?;
    out.flush()?;
    Ok(Outcome::Done)
}

fn run_cmd(args: RunArgs) -> anyhow::Result<Outcome> {
    let instance = load_universe(&args.replay.universe)?.build()?;
    let ops = load_stream(&args.replay.stream)?;
    let config = args.replay.config(args.algorithm, args.verify);
    let report = run(&instance, &ops, &config)?;
    let mut out = output(&args.replay.out)?;
    write_report(&mut out, &report.rows)?;
    out.flush()?;
    let s = &report.summary;
    eprintln!(
        "{}: {} ops, {} value + {} independence calls, {:.2} per op",
        report.algorithm, s.ops, s.calls.value_calls, s.calls.independence_calls, s.amortized
    );
    if args.verify {
        eprintln!(
            "verified {} of {} ops against brute force; worst OPT/f = {}; allowed {}",
            s.verified,
            s.ops,
            s.worst_factor.map_or("n/a".to_string(), |w| format!("{w:.4}")),
            s.factor
        );
        if s.failures > 0 {
            eprintln!("{} operations violate the approximation bound", s.failures);
            return Ok(Outcome::VerificationFailed);
        }
    }
    Ok(Outcome::Done)
}

fn compare_cmd(args: CompareArgs) -> anyhow::Result<Outcome> {
    let instance = load_universe(&args.replay.universe)?.build()?;
    let ops = load_stream(&args.replay.stream)?;
    let config = args.replay.config(AlgorithmKind::Dynamic, false);
    let rows = compare(&instance, &ops, &args.algorithms, &config)?;
    let mut out = output(&args.replay.out)?;
    write_compare(&mut out, &rows)?;
    out.flush()?;
    Ok(Outcome::Done)
}

fn universe_cmd(args: UniverseArgs) -> anyhow::Result<Outcome> {
    let spec = SynthSpec {
        elements: args.elements,
        function: args.function,
        matroid: args.matroid,
        rank: args.rank,
    };
    let u = synthesize(&spec, args.seed)?;
    let mut out = output(&args.out)?;
    out.write_all(u.to_json()?.as_bytes())?;
    out.flush()?;
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Universe(a) => universe_cmd(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
