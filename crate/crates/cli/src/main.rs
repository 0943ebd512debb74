use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qmap_core::benchgen::Benchmark;
use qmap_core::hqa::BatchRule;
use qmap_core::lookahead::DEFAULT_HORIZON;
use qmap_core::oracle::optimal_communications;
use qmap_core::{
    count_communications, parse_qasm, serialize_qasm, timeslice, Architecture, Circuit,
};
use qmap_harness::{
    attraction_ratios, default_benchmarks, map_and_validate, mapper_ratios, run_grid,
    sweep_attraction_grid, sweep_cores_grid, sweep_qubits_grid, write_csv, write_json,
    HarnessError, Mapper, MapperOptions, RatioRow, RunRecord, SweepOptions, DEFAULT_REPLICAS,
    SWEEP_ATTRACTION_CAPACITY, SWEEP_ATTRACTION_LIST, SWEEP_CORES_LIST, SWEEP_CORES_QUBITS,
    SWEEP_QUBITS_CORES, SWEEP_QUBITS_LIST,
};
use serde::Serialize;

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "qmap",
    version,
    about = "Map quantum circuits onto multi-core architectures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark circuit as OpenQASM 2.0.
    Generate(GenerateArgs),
    /// Map one OpenQASM circuit and print its assignment path and metrics.
    Map(MapArgs),
    /// Fixed qubit count, varying number of cores.
    SweepCores(SweepCoresArgs),
    /// Fixed number of cores, varying qubit count.
    SweepQubits(SweepQubitsArgs),
    /// HQA with and without attraction at fixed core capacity.
    SweepAttraction(SweepAttractionArgs),
    /// Exact minimum communications for a tiny circuit, next to both mappers.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MapperChoice {
    Hqa,
    FgpRoee,
    Both,
}

impl MapperChoice {
    fn mappers(self) -> Vec<Mapper> {
        match self {
            MapperChoice::Hqa => vec![Mapper::Hqa],
            MapperChoice::FgpRoee => vec![Mapper::FgpRoee],
            MapperChoice::Both => vec![Mapper::Hqa, Mapper::FgpRoee],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AttractionChoice {
    On,
    Off,
    Both,
}

impl AttractionChoice {
    fn settings(self) -> Vec<bool> {
        match self {
            AttractionChoice::On => vec![true],
            AttractionChoice::Off => vec![false],
            AttractionChoice::Both => vec![true, false],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BatchChoice {
    GateOrder,
    SolverChoice,
}

#[derive(Args, Clone)]
struct MapperFlags {
    /// Number of future slices in the look-ahead weights.
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    /// How HQA picks operations when they outnumber cores with room.
    #[arg(long, value_enum, default_value_t = BatchChoice::GateOrder)]
    batch: BatchChoice,
    /// Let FGP-rOEE keep refining once a slice is valid.
    #[arg(long)]
    continue_after_valid: bool,
}

impl MapperFlags {
    fn options(&self) -> MapperOptions {
        MapperOptions {
            horizon: self.horizon,
            batch: match self.batch {
                BatchChoice::GateOrder => BatchRule::GateOrder,
                BatchChoice::SolverChoice => BatchRule::SolverChoice,
            },
            continue_after_valid: self.continue_after_valid,
        }
    }
}

#[derive(Args)]
struct SweepFlags {
    /// Comma-separated benchmarks, e.g. `ghz,qft,random:p=0.3`.
    #[arg(long, value_delimiter = ',')]
    benchmarks: Vec<String>,
    #[arg(long, value_enum)]
    mapper: Option<MapperChoice>,
    #[arg(long, value_enum)]
    attraction: Option<AttractionChoice>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeds per stochastic benchmark.
    #[arg(long, default_value_t = DEFAULT_REPLICAS)]
    replicas: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; ratio tables go next to it as `<stem>.ratios.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave wall_time_ms empty so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    mapper_flags: MapperFlags,
}

#[derive(Args)]
struct SweepCoresArgs {
    #[arg(long, default_value_t = SWEEP_CORES_QUBITS)]
    qubits: usize,
    #[arg(long, value_delimiter = ',', default_values_t = SWEEP_CORES_LIST)]
    cores: Vec<usize>,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct SweepQubitsArgs {
    #[arg(long, default_value_t = SWEEP_QUBITS_CORES)]
    cores: usize,
    #[arg(long, value_delimiter = ',', default_values_t = SWEEP_QUBITS_LIST)]
    qubits: Vec<usize>,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct SweepAttractionArgs {
    #[arg(long, default_value_t = SWEEP_ATTRACTION_CAPACITY)]
    capacity: usize,
    #[arg(long, value_delimiter = ',', default_values_t = SWEEP_ATTRACTION_LIST)]
    qubits: Vec<usize>,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    benchmarks: String,
    #[arg(long)]
    qubits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    /// OpenQASM file, or `-` for standard input.
    input: PathBuf,
    #[arg(long)]
    cores: usize,
    /// Qubits per core; defaults to the smallest even capacity that fits.
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long, value_enum, default_value_t = MapperChoice::Hqa)]
    mapper: MapperChoice,
    #[arg(long, value_enum, default_value_t = AttractionChoice::On)]
    attraction: AttractionChoice,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    mapper_flags: MapperFlags,
}

#[derive(Args)]
struct OracleArgs {
    /// OpenQASM file; when absent a benchmark is generated instead.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "random:p=0.5:cycles=6")]
    benchmarks: String,
    #[arg(long, default_value_t = 6)]
    qubits: usize,
    #[arg(long, default_value_t = 2)]
    cores: usize,
    #[arg(long, default_value_t = 3)]
    capacity: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    mapper_flags: MapperFlags,
}

/// An error caused by the arguments rather than by a run.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn parse_benchmark(text: &str) -> Result<Benchmark> {
    text.parse::<Benchmark>()
        .map_err(|e| usage(format!("bad benchmark `{text}`: {e}")))
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(io::BufWriter::new(
            fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

/// `results.csv` becomes `results.ratios.csv`.
fn ratios_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.ratios.csv"))
}

fn sweep_options(
    flags: &SweepFlags,
    default_mapper: MapperChoice,
    default_attraction: AttractionChoice,
) -> Result<SweepOptions> {
    let benchmarks = if flags.benchmarks.is_empty() {
        default_benchmarks()
    } else {
        flags
            .benchmarks
            .iter()
            .map(|b| parse_benchmark(b))
            .collect::<Result<_>>()?
    };
    if flags.replicas == 0 {
        return Err(usage("--replicas must be at least 1"));
    }
    Ok(SweepOptions {
        benchmarks,
        mappers: flags.mapper.unwrap_or(default_mapper).mappers(),
        attraction: flags.attraction.unwrap_or(default_attraction).settings(),
        seed: flags.seed,
        replicas: flags.replicas,
        timing: !flags.no_timing,
        mapper: flags.mapper_flags.options(),
    })
}

fn emit_sweep(flags: &SweepFlags, records: &[RunRecord], ratios: &[RatioRow]) -> Result<()> {
    let out = flags.out.as_deref();
    match flags.format {
        Format::Json => write_json(records, ratios, open_output(out)?)?,
        Format::Csv => match out {
            Some(path) => {
                write_csv(records, open_output(Some(path))?)?;
                write_csv(ratios, open_output(Some(&ratios_path(path)))?)?;
            }
            None => {
                let mut stdout = io::stdout().lock();
                write_csv(records, &mut stdout)?;
                writeln!(stdout)?;
                write_csv(ratios, &mut stdout)?;
            }
        },
    }
    Ok(())
}

fn sweep_cores(args: SweepCoresArgs) -> Result<()> {
    let options = sweep_options(&args.sweep, MapperChoice::Both, AttractionChoice::On)?;
    let grid = sweep_cores_grid(args.qubits, &args.cores)?;
    let records = run_grid(&grid, &options)?;
    emit_sweep(&args.sweep, &records, &mapper_ratios(&records))
}

fn sweep_qubits(args: SweepQubitsArgs) -> Result<()> {
    let options = sweep_options(&args.sweep, MapperChoice::Both, AttractionChoice::On)?;
    let grid = sweep_qubits_grid(args.cores, &args.qubits)?;
    let records = run_grid(&grid, &options)?;
    emit_sweep(&args.sweep, &records, &mapper_ratios(&records))
}

fn sweep_attraction(args: SweepAttractionArgs) -> Result<()> {
    let mut options = sweep_options(&args.sweep, MapperChoice::Hqa, AttractionChoice::Both)?;
    if args.sweep.benchmarks.is_empty() {
        options.benchmarks = vec![Benchmark::Cuccaro, parse_benchmark("random")?];
    }
    let grid = sweep_attraction_grid(args.capacity, &args.qubits)?;
    let records = run_grid(&grid, &options)?;
    emit_sweep(&args.sweep, &records, &attraction_ratios(&records))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let bench = parse_benchmark(&args.benchmarks)?;
    let circuit = bench
        .generate(args.qubits, args.seed)
        .map_err(|e| usage(format!("cannot generate {bench}: {e}")))?;
    let mut out = open_output(args.out.as_deref())?;
    out.write_all(serialize_qasm(&circuit).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    }
    parse_qasm(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct MapMetrics {
    mapper: Mapper,
    use_attraction: bool,
    num_qubits: usize,
    num_cores: usize,
    capacity: usize,
    num_slices: usize,
    num_2q_gates: usize,
    communications: usize,
}

#[derive(Serialize)]
struct MapOutput {
    metrics: MapMetrics,
    path: qmap_core::partition::PathDocument,
}

fn map(args: MapArgs) -> Result<()> {
    let mapper = match args.mapper {
        MapperChoice::Hqa => Mapper::Hqa,
        MapperChoice::FgpRoee => Mapper::FgpRoee,
        MapperChoice::Both => return Err(usage("map takes a single mapper")),
    };
    let use_attraction = match args.attraction {
        AttractionChoice::On => mapper == Mapper::Hqa,
        AttractionChoice::Off => false,
        AttractionChoice::Both => return Err(usage("map takes a single attraction setting")),
    };
    let circuit = read_circuit(&args.input)?;
    let q = circuit.num_qubits();
    if args.cores == 0 {
        return Err(usage("--cores must be positive"));
    }
    let capacity = args.capacity.unwrap_or_else(|| {
        let c = q.div_ceil(args.cores);
        c + c % 2
    });
    let arch = Architecture::new(args.cores, capacity).map_err(|e| usage(e.to_string()))?;
    arch.check_fits(q).map_err(|e| usage(e.to_string()))?;
    let slices = timeslice(&circuit);
    let name = args.input.display().to_string();
    let path = map_and_validate(
        &slices,
        &arch,
        mapper,
        use_attraction,
        &args.mapper_flags.options(),
        &name,
    )?;
    let output = MapOutput {
        metrics: MapMetrics {
            mapper,
            use_attraction,
            num_qubits: q,
            num_cores: arch.num_cores(),
            capacity: arch.capacity(),
            num_slices: slices.len(),
            num_2q_gates: circuit.num_two_qubit_gates(),
            communications: count_communications(&path),
        },
        path: path.to_document(),
    };
    let mut out = open_output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &output)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    circuit: String,
    num_qubits: usize,
    num_cores: usize,
    capacity: usize,
    num_slices: usize,
    optimum: usize,
    hqa: usize,
    hqa_no_attraction: usize,
    fgp_roee: usize,
}

fn oracle(args: OracleArgs) -> Result<()> {
    let (name, circuit) = match &args.input {
        Some(path) => (path.display().to_string(), read_circuit(path)?),
        None => {
            let bench = parse_benchmark(&args.benchmarks)?;
            let circuit = bench
                .generate(args.qubits, args.seed)
                .map_err(|e| usage(format!("cannot generate {bench}: {e}")))?;
            (bench.to_string(), circuit)
        }
    };
    let arch = Architecture::new(args.cores, args.capacity).map_err(|e| usage(e.to_string()))?;
    let slices = timeslice(&circuit);
    let optimum = optimal_communications(&slices, &arch).map_err(|e| usage(e.to_string()))?;
    let options = args.mapper_flags.options();
    let comms = |mapper, attraction| -> Result<usize> {
        let path = map_and_validate(&slices, &arch, mapper, attraction, &options, &name)?;
        Ok(count_communications(&path))
    };
    let row = OracleRow {
        circuit: name.clone(),
        num_qubits: circuit.num_qubits(),
        num_cores: arch.num_cores(),
        capacity: arch.capacity(),
        num_slices: slices.len(),
        optimum,
        hqa: comms(Mapper::Hqa, true)?,
        hqa_no_attraction: comms(Mapper::Hqa, false)?,
        fgp_roee: comms(Mapper::FgpRoee, false)?,
    };
    let mut out = open_output(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_csv(&[row], &mut out)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &row)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<HarnessError>() {
        Some(e) if e.is_usage() => EXIT_USAGE,
        _ => EXIT_VALIDATION,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Map(args) => map(args),
        Command::SweepCores(args) => sweep_cores(args),
        Command::SweepQubits(args) => sweep_qubits(args),
        Command::SweepAttraction(args) => sweep_attraction(args),
        Command::Oracle(args) => oracle(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
