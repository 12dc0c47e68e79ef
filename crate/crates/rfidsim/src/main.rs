//! Command-line front end: single identification rounds, experiment
//! sweeps, trace verification, and the prefix-off false-positive demo.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 input error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rfidsim::experiment::{
    export_report, run_experiment, ExperimentSpec, OutputSpec, ReportFormat,
};
use rfidsim::population::{load_population, Distribution, Population, PopulationSpec};
use rfidsim::protocol_p::{render_trace, run_protocol_p, verify_trace};
use rfidsim::result::{Protocol, RunResult};
use rfidsim::tag::TagId;
use rfidsim::{run_binary_splitting, run_framed_slotted_aloha, run_query_tree};
use rfidsim::{superpose, decode_if_singleton, FsaConfig, FsaMode, SignalForm};

#[derive(Parser)]
#[command(
    name = "rfidsim",
    version,
    about = "RFID anti-collision protocol simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one identification round on a population file.
    Identify(IdentifyArgs),
    /// Run a seeded protocol sweep and write a report.
    Experiment(ExperimentArgs),
    /// Run the splitting protocol with trace retention and check the
    /// exact-query and tree-shape guarantees.
    Verify(VerifyArgs),
    /// Reproduce the prefix-off false positive: three colliding tags that
    /// sign-decode as a phantom ID.
    DemoFalsePositive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    P,
    Qt,
    Fsa,
    Bs,
}

impl From<ProtocolArg> for Protocol {
    fn from(arg: ProtocolArg) -> Protocol {
        match arg {
            ProtocolArg::P => Protocol::SuperpositionSplit,
            ProtocolArg::Qt => Protocol::QueryTree,
            ProtocolArg::Fsa => Protocol::FramedSlottedAloha,
            ProtocolArg::Bs => Protocol::BinarySplitting,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FsaModeArg {
    Fixed,
    DynamicDoubling,
}

impl From<FsaModeArg> for FsaMode {
    fn from(arg: FsaModeArg) -> FsaMode {
        match arg {
            FsaModeArg::Fixed => FsaMode::Fixed,
            FsaModeArg::DynamicDoubling => FsaMode::DynamicDoubling,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Uniform,
    Sequential,
    Clustered,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(arg: FormatArg) -> ReportFormat {
        match arg {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Args)]
struct FsaFlags {
    /// Slots per frame (initial size in dynamic mode).
    #[arg(long, default_value_t = 128)]
    frame_size: u32,
    #[arg(long, value_enum, default_value_t = FsaModeArg::Fixed)]
    fsa_mode: FsaModeArg,
    /// Frame-size cap for dynamic doubling.
    #[arg(long, default_value_t = 256)]
    max_frame_size: u32,
    /// Read-cycle bound before a run is declared starved.
    #[arg(long, default_value_t = 10_000)]
    max_cycles: u64,
}

impl FsaFlags {
    fn config(&self, seed: u64) -> FsaConfig {
        FsaConfig {
            frame_size: self.frame_size,
            mode: self.fsa_mode.into(),
            max_frame_size: self.max_frame_size,
            seed,
            max_cycles: self.max_cycles,
        }
    }
}

#[derive(Args)]
struct IdentifyArgs {
    /// Population file: one 0/1 ID per line, '#' comments.
    #[arg(long)]
    population: PathBuf,
    #[arg(long, value_enum)]
    protocol: ProtocolArg,
    /// Disable the forced +1 prefix bit (demonstration mode; the splitting
    /// protocol loses its guarantees without it).
    #[arg(long)]
    no_prefix: bool,
    /// Seed for the randomized baselines.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the execution tree here (protocol p only).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    fsa: FsaFlags,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment spec; command-line flags below are ignored except
    /// --out / --format, which override the spec's output block.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Comma-separated protocol list, e.g. p,qt,fsa,bs.
    #[arg(long, value_delimiter = ',', value_enum)]
    protocols: Vec<ProtocolArg>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 96)]
    k: usize,
    #[arg(long, value_enum, default_value_t = DistArg::Uniform)]
    dist: DistArg,
    /// Shared prefix length for the clustered distribution (default K/2).
    #[arg(long)]
    prefix_len: Option<usize>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_prefix: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[command(flatten)]
    fsa: FsaFlags,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    population: PathBuf,
}

/// An error plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn violation(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Identify(args) => identify(args),
        Command::Experiment(args) => experiment(args),
        Command::Verify(args) => verify(args),
        Command::DemoFalsePositive => demo_false_positive(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn load(path: &Path) -> Result<Population, Failure> {
    load_population(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn identify(args: IdentifyArgs) -> Result<(), Failure> {
    let population = load(&args.population)?;
    let protocol: Protocol = args.protocol.into();
    if args.trace.is_some() && protocol != Protocol::SuperpositionSplit {
        return Err(Failure::input(
            "--trace is only available for protocol p (the baselines build no tree)",
        ));
    }
    let prefix_enabled = !args.no_prefix;
    let result = match protocol {
        Protocol::SuperpositionSplit => {
            run_protocol_p(&population, prefix_enabled, args.trace.is_some())
                .map_err(|e| Failure::violation(e.to_string()))?
        }
        Protocol::QueryTree => run_query_tree(&population),
        Protocol::FramedSlottedAloha => {
            run_framed_slotted_aloha(&population, &args.fsa.config(args.seed)).map_err(|e| {
                Failure::violation(format!(
                    "{e} (partial results: {} queries, {} identified)",
                    e.partial.query_count,
                    e.partial.identified.len()
                ))
            })?
        }
        Protocol::BinarySplitting => run_binary_splitting(&population, args.seed)
            .map_err(|e| Failure::violation(e.to_string()))?,
    };
    if let Some(path) = &args.trace {
        let trace = result
            .trace
            .as_ref()
            .map(render_trace)
            .unwrap_or_default();
        fs::write(path, trace)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    }
    print_run(&population, &result);
    Ok(())
}

fn print_run(population: &Population, result: &RunResult) {
    println!("protocol: {}", result.protocol.label());
    println!("population: {} tags, K={}", population.len(), population.k());
    println!("queries: {}", result.query_count);
    match result.system_efficiency() {
        Ok(e) => println!("efficiency: {e:.6}"),
        Err(_) => println!("efficiency: undefined (nothing identified)"),
    }
    println!(
        "bits: reader={} tag={}",
        result.bits.reader_bits, result.bits.tag_bits
    );
    println!("identified ({}):", result.identified.len());
    for tag in &result.identified {
        println!("{tag}");
    }
}

fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentSpec>(&text)
                .map_err(|e| Failure::input(format!("{}: invalid spec: {e}", path.display())))?
        }
        None => {
            if args.protocols.is_empty() {
                return Err(Failure::input(
                    "select protocols with --protocols p,qt,fsa,bs or pass --spec",
                ));
            }
            let distribution = match args.dist {
                DistArg::Uniform => Distribution::UniformRandom,
                DistArg::Sequential => Distribution::SequentialFromBase,
                DistArg::Clustered => Distribution::ClusteredPrefix {
                    shared_prefix_len: args.prefix_len.unwrap_or(args.k / 2),
                },
            };
            ExperimentSpec {
                protocols: args.protocols.iter().map(|&p| p.into()).collect(),
                population: PopulationSpec {
                    n: args.n,
                    k: args.k,
                    distribution,
                    seed: 0,
                },
                repetitions: args.reps,
                prefix_enabled: !args.no_prefix,
                fsa: Some(args.fsa.config(0)),
                output: None,
                master_seed: args.seed,
            }
        }
    };
    if let Some(path) = args.out {
        let format = args
            .format
            .map(ReportFormat::from)
            .or_else(|| spec.output.as_ref().map(|o| o.format))
            .unwrap_or(ReportFormat::Csv);
        spec.output = Some(OutputSpec { format, path });
    } else if let Some(format) = args.format {
        if let Some(output) = &mut spec.output {
            output.format = format.into();
        }
    }

    let report = run_experiment(&spec).map_err(|e| Failure::input(e.to_string()))?;
    match &spec.output {
        Some(output) => {
            export_report(&report, output.format, &output.path)
                .map_err(|e| Failure::input(e.to_string()))?;
            eprintln!(
                "wrote {} rows to {}",
                report.rows.len(),
                output.path.display()
            );
        }
        None => print!("{}", report.to_csv()),
    }
    for aggregate in &report.aggregates {
        let mean = aggregate
            .mean_efficiency
            .map(|e| format!("{e:.6}"))
            .unwrap_or_else(|| "NA".to_string());
        eprintln!(
            "{}: {} runs, {} errors, mean efficiency {}",
            aggregate.protocol.label(),
            aggregate.completed_runs,
            aggregate.error_runs,
            mean
        );
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let population = load(&args.population)?;
    let result = run_protocol_p(&population, true, true)
        .map_err(|e| Failure::violation(e.to_string()))?;
    let n = population.len();
    if n == 0 {
        println!("empty population: 1 query spent, nothing to identify, nothing to verify");
        return Ok(());
    }
    if result.query_count != n as u64 {
        return Err(Failure::violation(format!(
            "query count {} differs from population size {n}",
            result.query_count
        )));
    }
    let got: BTreeSet<&TagId> = result.identified.iter().collect();
    let want: BTreeSet<&TagId> = population.tags().iter().collect();
    if got != want {
        return Err(Failure::violation(
            "identified set differs from the population".to_string(),
        ));
    }
    let trace = result.trace.as_ref().expect("trace retention was on");
    let stats = verify_trace(trace, n).map_err(|e| Failure::violation(e.to_string()))?;
    println!(
        "verified: {} tags, {} queries, tree nodes={} leaves={} queried-left={} depth={}",
        n,
        result.query_count,
        stats.nodes,
        stats.leaves,
        stats.queried_left_count,
        stats.max_depth
    );
    Ok(())
}

fn demo_false_positive() -> Result<(), Failure> {
    let ids = ["011001", "001010", "100100"];
    let tags: Vec<TagId> = ids.iter().map(|t| TagId::parse(t).unwrap()).collect();
    let population = Population::new(tags.clone()).expect("distinct demo tags");

    println!("population: {}", ids.join(", "));
    let signals: Vec<SignalForm> = tags.iter().map(|t| SignalForm::encode(t, false)).collect();
    let answer = superpose(&signals, 6);
    println!("prefix off: superposed answer = {}", answer.render());
    let phantom = decode_if_singleton(&answer, false).ok_or_else(|| {
        Failure::violation("expected the collision to sign-decode as a single ID".to_string())
    })?;
    println!(
        "sign-decode: {phantom} ({})",
        if population.contains(&phantom) {
            "present in the population"
        } else {
            "phantom, matches no tag"
        }
    );
    if phantom.to_string() != "001000" || population.contains(&phantom) {
        return Err(Failure::violation(
            "false positive did not reproduce as expected".to_string(),
        ));
    }

    let result = run_protocol_p(&population, true, false)
        .map_err(|e| Failure::violation(e.to_string()))?;
    println!(
        "prefix on: {} tags identified in {} queries",
        result.identified.len(),
        result.query_count
    );
    if result.query_count != 3 || result.identified.len() != 3 {
        return Err(Failure::violation(
            "prefix-on round should identify all three tags in three queries".to_string(),
        ));
    }
    Ok(())
}
