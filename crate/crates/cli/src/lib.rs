//! Sweep harness: runs benchmark circuits through both mappers over ranges of
//! architectures and tabulates inter-core communications.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use qmap_core::benchgen::{BenchError, Benchmark, Family};
use qmap_core::fgp_roee::{fgp_map_slices, FgpConfig, FgpError};
use qmap_core::hqa::{map_slices, BatchRule, HqaConfig, HqaError};
use qmap_core::lookahead::DEFAULT_HORIZON;
use qmap_core::partition::{first_invalid_slice, Architecture, AssignmentPath, PartitionError};
use qmap_core::{count_communications, timeslice, TimeslicedCircuit};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const SWEEP_CORES_QUBITS: usize = 120;
pub const SWEEP_CORES_LIST: [usize; 7] = [2, 3, 4, 5, 6, 10, 12];
pub const SWEEP_QUBITS_CORES: usize = 10;
pub const SWEEP_QUBITS_LIST: [usize; 5] = [40, 80, 120, 160, 200];
pub const SWEEP_ATTRACTION_CAPACITY: usize = 16;
pub const SWEEP_ATTRACTION_LIST: [usize; 6] = [32, 48, 64, 80, 96, 112];
pub const DEFAULT_REPLICAS: usize = 5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{benchmark} on {num_qubits} qubits: {source}")]
    Generate {
        benchmark: String,
        num_qubits: usize,
        #[source]
        source: BenchError,
    },
    #[error(transparent)]
    Architecture(#[from] PartitionError),
    #[error("{benchmark} n={num_qubits} N={num_cores}: {source}")]
    Hqa {
        benchmark: String,
        num_qubits: usize,
        num_cores: usize,
        #[source]
        source: HqaError,
    },
    #[error("{benchmark} n={num_qubits} N={num_cores}: {source}")]
    Fgp {
        benchmark: String,
        num_qubits: usize,
        num_cores: usize,
        #[source]
        source: FgpError,
    },
    #[error("{mapper} produced an invalid assignment for slice {slice} of {benchmark}")]
    InvalidSlice {
        benchmark: String,
        mapper: Mapper,
        slice: usize,
    },
    #[error("{0}")]
    InvalidSweep(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot write JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// True for errors caused by bad arguments rather than by a run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            HarnessError::InvalidSweep(_)
                | HarnessError::Architecture(_)
                | HarnessError::Generate { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapper {
    Hqa,
    FgpRoee,
}

impl Mapper {
    pub fn name(&self) -> &'static str {
        match self {
            Mapper::Hqa => "hqa",
            Mapper::FgpRoee => "fgp_roee",
        }
    }
}

impl fmt::Display for Mapper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mapper {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hqa" => Ok(Mapper::Hqa),
            "fgp_roee" | "fgp-roee" => Ok(Mapper::FgpRoee),
            _ => Err(format!("unknown mapper `{s}`")),
        }
    }
}

/// Mapper settings shared by every run of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapperOptions {
    pub horizon: usize,
    pub batch: BatchRule,
    pub continue_after_valid: bool,
}

impl Default for MapperOptions {
    fn default() -> Self {
        MapperOptions {
            horizon: DEFAULT_HORIZON,
            batch: BatchRule::GateOrder,
            continue_after_valid: false,
        }
    }
}

/// One mapped circuit. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub benchmark: String,
    pub num_qubits: usize,
    pub num_cores: usize,
    pub capacity: usize,
    pub mapper: Mapper,
    /// Always false for `fgp_roee`, which has no attraction term.
    pub use_attraction: bool,
    pub seed: u64,
    pub num_slices: usize,
    pub num_2q_gates: usize,
    pub communications: usize,
    pub wall_time_ms: Option<f64>,
}

impl RunRecord {
    /// Record with the timing column cleared.
    pub fn untimed(&self) -> RunRecord {
        RunRecord {
            wall_time_ms: None,
            ..self.clone()
        }
    }
}

/// Maps already sliced circuit with the given mapper and checks every slice.
pub fn map_and_validate(
    slices: &TimeslicedCircuit,
    arch: &Architecture,
    mapper: Mapper,
    use_attraction: bool,
    options: &MapperOptions,
    benchmark: &str,
) -> Result<AssignmentPath, HarnessError> {
    let path = match mapper {
        Mapper::Hqa => {
            let config = HqaConfig {
                use_attraction,
                horizon: options.horizon,
                batch: options.batch,
            };
            map_slices(slices, arch, &config).map_err(|source| HarnessError::Hqa {
                benchmark: benchmark.to_string(),
                num_qubits: slices.num_qubits(),
                num_cores: arch.num_cores(),
                source,
            })?
        }
        Mapper::FgpRoee => {
            let config = FgpConfig {
                horizon: options.horizon,
                continue_after_valid: options.continue_after_valid,
                max_passes: None,
            };
            fgp_map_slices(slices, arch, &config).map_err(|source| HarnessError::Fgp {
                benchmark: benchmark.to_string(),
                num_qubits: slices.num_qubits(),
                num_cores: arch.num_cores(),
                source,
            })?
        }
    };
    if let Some(slice) = first_invalid_slice(&path, slices) {
        return Err(HarnessError::InvalidSlice {
            benchmark: benchmark.to_string(),
            mapper,
            slice,
        });
    }
    Ok(path)
}

/// Generates, slices, maps and validates one circuit.
pub fn run_single(
    benchmark: &Benchmark,
    num_qubits: usize,
    arch: &Architecture,
    mapper: Mapper,
    use_attraction: bool,
    seed: u64,
    options: &MapperOptions,
) -> Result<RunRecord, HarnessError> {
    arch.check_fits(num_qubits)?;
    let name = benchmark.to_string();
    let circuit =
        benchmark
            .generate(num_qubits, seed)
            .map_err(|source| HarnessError::Generate {
                benchmark: name.clone(),
                num_qubits,
                source,
            })?;
    let slices = timeslice(&circuit);
    let use_attraction = use_attraction && mapper == Mapper::Hqa;
    let start = Instant::now();
    let path = map_and_validate(&slices, arch, mapper, use_attraction, options, &name)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(RunRecord {
        benchmark: name,
        num_qubits,
        num_cores: arch.num_cores(),
        capacity: arch.capacity(),
        mapper,
        use_attraction,
        seed,
        num_slices: slices.len(),
        num_2q_gates: circuit.num_two_qubit_gates(),
        communications: count_communications(&path),
        wall_time_ms: Some((elapsed * 1e3).round() / 1e3),
    })
}

/// The benchmark list used when none is given: every family, with random
/// circuits at three densities.
pub fn default_benchmarks() -> Vec<Benchmark> {
    let mut out: Vec<Benchmark> = Family::ALL
        .iter()
        .filter(|f| **f != Family::Random)
        .map(|f| Benchmark::default_for(*f))
        .collect();
    for density in [0.3, 0.5, 0.8] {
        if let Benchmark::Random { cycles, .. } = Benchmark::default_for(Family::Random) {
            out.push(Benchmark::Random { cycles, density });
        }
    }
    out
}

/// Everything a sweep needs besides its architecture grid.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub benchmarks: Vec<Benchmark>,
    pub mappers: Vec<Mapper>,
    /// HQA attraction settings to run. FGP-rOEE ignores this.
    pub attraction: Vec<bool>,
    pub seed: u64,
    /// Seeds per stochastic benchmark; deterministic ones run once.
    pub replicas: usize,
    pub timing: bool,
    pub mapper: MapperOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            benchmarks: default_benchmarks(),
            mappers: vec![Mapper::Hqa, Mapper::FgpRoee],
            attraction: vec![true],
            seed: 0,
            replicas: DEFAULT_REPLICAS,
            timing: true,
            mapper: MapperOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    bench_index: usize,
    num_qubits: usize,
    arch: Architecture,
    mapper: Mapper,
    use_attraction: bool,
    seed: u64,
}

/// Runs every (benchmark, architecture, mapper, attraction, seed) job in
/// parallel and returns the records in a fixed order.
pub fn run_grid(
    grid: &[(usize, Architecture)],
    options: &SweepOptions,
) -> Result<Vec<RunRecord>, HarnessError> {
    if options.replicas == 0 {
        return Err(HarnessError::InvalidSweep(
            "--replicas must be at least 1".into(),
        ));
    }
    let mut jobs = Vec::new();
    for (bench_index, bench) in options.benchmarks.iter().enumerate() {
        let replicas = if bench.family().is_stochastic() {
            options.replicas
        } else {
            1
        };
        for &(num_qubits, arch) in grid {
            for &mapper in &options.mappers {
                let attraction: &[bool] = match mapper {
                    Mapper::Hqa => &options.attraction,
                    Mapper::FgpRoee => &[false],
                };
                for &use_attraction in attraction {
                    for r in 0..replicas {
                        jobs.push(Job {
                            bench_index,
                            num_qubits,
                            arch,
                            mapper,
                            use_attraction,
                            seed: options.seed + r as u64,
                        });
                    }
                }
            }
        }
    }
    jobs.sort_by_key(|j| {
        (
            j.bench_index,
            j.arch.num_cores(),
            j.num_qubits,
            j.mapper,
            std::cmp::Reverse(j.use_attraction),
            j.seed,
        )
    });
    jobs.par_iter()
        .map(|job| {
            let record = run_single(
                &options.benchmarks[job.bench_index],
                job.num_qubits,
                &job.arch,
                job.mapper,
                job.use_attraction,
                job.seed,
                &options.mapper,
            )?;
            Ok(if options.timing {
                record
            } else {
                record.untimed()
            })
        })
        .collect()
}

/// Qubits per core must be a positive even integer.
fn even_split(num_qubits: usize, num_cores: usize) -> Result<Architecture, HarnessError> {
    if num_cores == 0
        || !num_qubits.is_multiple_of(num_cores)
        || !(num_qubits / num_cores).is_multiple_of(2)
    {
        return Err(HarnessError::InvalidSweep(format!(
            "{num_qubits} qubits do not split into {num_cores} cores with an even number of qubits each"
        )));
    }
    Ok(Architecture::new(num_cores, num_qubits / num_cores)?)
}

/// Fixed qubit count, varying core count.
pub fn sweep_cores_grid(
    num_qubits: usize,
    cores: &[usize],
) -> Result<Vec<(usize, Architecture)>, HarnessError> {
    cores
        .iter()
        .map(|&n| Ok((num_qubits, even_split(num_qubits, n)?)))
        .collect()
}

/// Fixed core count, varying qubit count.
pub fn sweep_qubits_grid(
    num_cores: usize,
    qubits: &[usize],
) -> Result<Vec<(usize, Architecture)>, HarnessError> {
    qubits
        .iter()
        .map(|&q| Ok((q, even_split(q, num_cores)?)))
        .collect()
}

/// Fixed capacity, as many cores as the qubit count needs.
pub fn sweep_attraction_grid(
    capacity: usize,
    qubits: &[usize],
) -> Result<Vec<(usize, Architecture)>, HarnessError> {
    qubits
        .iter()
        .map(|&q| {
            if capacity == 0 || q == 0 || q % capacity != 0 {
                return Err(HarnessError::InvalidSweep(format!(
                    "{q} qubits are not a positive multiple of capacity {capacity}"
                )));
            }
            Ok((q, Architecture::new(q / capacity, capacity)?))
        })
        .collect()
}

/// Quotient of two medians with `inf` / `nan` for zero denominators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio(pub f64);

impl Ratio {
    pub fn of(numerator: f64, denominator: f64) -> Ratio {
        if denominator == 0.0 {
            Ratio(if numerator == 0.0 {
                f64::NAN
            } else {
                f64::INFINITY
            })
        } else {
            Ratio(numerator / denominator)
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_nan() {
            f.write_str("nan")
        } else if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{:.6}", self.0)
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn median(values: &[usize]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2] as f64,
        n => (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0,
    }
}

/// One row of a ratio table: median communications of two variants of the
/// same cell and their quotient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub benchmark: String,
    pub num_qubits: usize,
    pub num_cores: usize,
    pub capacity: usize,
    pub numerator: String,
    pub denominator: String,
    pub numerator_median: f64,
    pub denominator_median: f64,
    pub ratio: Ratio,
}

/// Label of a mapper variant in ratio tables.
pub fn variant_label(mapper: Mapper, use_attraction: bool) -> String {
    match (mapper, use_attraction) {
        (Mapper::Hqa, false) => "hqa_no_attraction".to_string(),
        (m, _) => m.name().to_string(),
    }
}

type Variant = (Mapper, bool);

/// Ratio rows for every cell and every `(numerator, denominator)` comparison
/// where both variants ran, in record order.
pub fn ratio_table(records: &[RunRecord], comparisons: &[(Variant, Variant)]) -> Vec<RatioRow> {
    let cell = |r: &RunRecord| (r.benchmark.clone(), r.num_qubits, r.num_cores);
    let mut cells: Vec<(String, usize, usize, usize)> = Vec::new();
    for r in records {
        let (b, q, n) = cell(r);
        if !cells.iter().any(|c| (&c.0, c.1, c.2) == (&b, q, n)) {
            cells.push((b, q, n, r.capacity));
        }
    }
    let comms = |(b, q, n, _): &(String, usize, usize, usize), (m, a): Variant| -> Vec<usize> {
        records
            .iter()
            .filter(|r| (&r.benchmark, r.num_qubits, r.num_cores) == (b, *q, *n))
            .filter(|r| r.mapper == m && r.use_attraction == (a && m == Mapper::Hqa))
            .map(|r| r.communications)
            .collect()
    };
    let mut rows = Vec::new();
    for c in &cells {
        for &(numerator, denominator) in comparisons {
            let (top, bottom) = (comms(c, numerator), comms(c, denominator));
            if top.is_empty() || bottom.is_empty() {
                continue;
            }
            let (nm, dm) = (median(&top), median(&bottom));
            rows.push(RatioRow {
                benchmark: c.0.clone(),
                num_qubits: c.1,
                num_cores: c.2,
                capacity: c.3,
                numerator: variant_label(numerator.0, numerator.1),
                denominator: variant_label(denominator.0, denominator.1),
                numerator_median: nm,
                denominator_median: dm,
                ratio: Ratio::of(nm, dm),
            });
        }
    }
    rows
}

/// FGP-rOEE over HQA, for each HQA attraction setting present.
pub fn mapper_ratios(records: &[RunRecord]) -> Vec<RatioRow> {
    let fgp = (Mapper::FgpRoee, false);
    ratio_table(
        records,
        &[(fgp, (Mapper::Hqa, true)), (fgp, (Mapper::Hqa, false))],
    )
}

/// HQA without attraction over HQA with it.
pub fn attraction_ratios(records: &[RunRecord]) -> Vec<RatioRow> {
    ratio_table(records, &[((Mapper::Hqa, false), (Mapper::Hqa, true))])
}

/// Geometric mean of the finite, positive ratios.
pub fn geometric_mean(ratios: impl IntoIterator<Item = f64>) -> Option<f64> {
    let logs: Vec<f64> = ratios
        .into_iter()
        .filter(|r| r.is_finite() && *r > 0.0)
        .map(f64::ln)
        .collect();
    (!logs.is_empty()).then(|| (logs.iter().sum::<f64>() / logs.len() as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    records: &'a [RunRecord],
    ratios: &'a [RatioRow],
}

pub fn write_json<W: Write>(
    records: &[RunRecord],
    ratios: &[RatioRow],
    mut out: W,
) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, &SweepDocument { records, ratios })?;
    writeln!(out)?;
    Ok(())
}
