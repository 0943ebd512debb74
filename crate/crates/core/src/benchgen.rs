//! Deterministic benchmark circuit generators.
//!
//! Every generator emits only one- and two-qubit gates. Three-qubit gates are
//! decomposed on the way out (Toffoli into the standard 6-CX network) and
//! Grover's multi-controlled Z is replaced by a CX ladder with the same
//! interaction structure. The ladder is not unitary-equivalent; only qubit
//! interactions matter for mapping.
//!
//! Stochastic families draw from xoshiro256** seeded through splitmix64 with
//! a per-(family, qubit count, seed) stream, so outputs are bit-reproducible.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};
use thiserror::Error;

use crate::circuit::{Circuit, Gate};

pub const DEFAULT_QV_DEPTH: usize = 10;
pub const DEFAULT_RANDOM_CYCLES: usize = 20;
pub const DEFAULT_GROVER_ITERATIONS: usize = 1;

/// Gates drawn for idle qubits in random circuits.
const RANDOM_ONE_QUBIT: &[&str] = &["h", "x", "y", "z", "s", "sdg", "t", "tdg"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("{family} needs at least {min} qubits, got {got}")]
    TooFewQubits {
        family: &'static str,
        min: usize,
        got: usize,
    },
    #[error("cuccaro needs an even qubit count (2 * bits + 2), got {0}")]
    OddCuccaro(usize),
    #[error("two-qubit gate density must lie in [0, 1], got {0}")]
    Density(f64),
    #[error("{0} must be at least 1")]
    ZeroParameter(&'static str),
    #[error("cannot parse benchmark `{0}`")]
    Parse(String),
}

/// The seeded generator used by all stochastic families.
pub struct Prng(Xoshiro256StarStar);

impl Prng {
    /// Stream for `(family, num_qubits, seed)`.
    pub fn for_stream(family: Family, num_qubits: usize, seed: u64) -> Self {
        let mut mixer = SplitMix64::seed_from_u64(seed);
        let base = mixer.next_u64();
        let key =
            base ^ (family.tag() << 56) ^ (num_qubits as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Prng(Xoshiro256StarStar::seed_from_u64(key))
    }

    pub fn from_seed(seed: u64) -> Self {
        Prng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-and-reject).
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "empty range");
        let n = bound as u64;
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
            }
        }
        (m >> 64) as usize
    }

    /// Uniform float in `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fisher–Yates shuffle, from the last position down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    fn angle(&mut self) -> f64 {
        self.unit() * TAU
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Ghz,
    Cuccaro,
    Qft,
    QuantumVolume,
    Grover,
    Random,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Ghz,
        Family::Cuccaro,
        Family::Qft,
        Family::QuantumVolume,
        Family::Grover,
        Family::Random,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Ghz => "ghz",
            Family::Cuccaro => "cuccaro",
            Family::Qft => "qft",
            Family::QuantumVolume => "quantum_volume",
            Family::Grover => "grover",
            Family::Random => "random",
        }
    }

    fn tag(&self) -> u64 {
        *self as u64 + 1
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Family::QuantumVolume | Family::Random)
    }
}

/// A benchmark family with its family-specific parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Benchmark {
    Ghz,
    Cuccaro,
    Qft,
    QuantumVolume { depth: usize },
    Grover { iterations: usize },
    Random { cycles: usize, density: f64 },
}

impl Benchmark {
    pub fn family(&self) -> Family {
        match self {
            Benchmark::Ghz => Family::Ghz,
            Benchmark::Cuccaro => Family::Cuccaro,
            Benchmark::Qft => Family::Qft,
            Benchmark::QuantumVolume { .. } => Family::QuantumVolume,
            Benchmark::Grover { .. } => Family::Grover,
            Benchmark::Random { .. } => Family::Random,
        }
    }

    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Ghz => Benchmark::Ghz,
            Family::Cuccaro => Benchmark::Cuccaro,
            Family::Qft => Benchmark::Qft,
            Family::QuantumVolume => Benchmark::QuantumVolume {
                depth: DEFAULT_QV_DEPTH,
            },
            Family::Grover => Benchmark::Grover {
                iterations: DEFAULT_GROVER_ITERATIONS,
            },
            Family::Random => Benchmark::Random {
                cycles: DEFAULT_RANDOM_CYCLES,
                density: 0.5,
            },
        }
    }

    /// Generates the circuit on `num_qubits` qubits.
    pub fn generate(&self, num_qubits: usize, seed: u64) -> Result<Circuit, BenchError> {
        match *self {
            Benchmark::Ghz => gen_ghz(num_qubits),
            Benchmark::Cuccaro => {
                if !num_qubits.is_multiple_of(2) {
                    return Err(BenchError::OddCuccaro(num_qubits));
                }
                if num_qubits < 4 {
                    return Err(BenchError::TooFewQubits {
                        family: "cuccaro",
                        min: 4,
                        got: num_qubits,
                    });
                }
                gen_cuccaro((num_qubits - 2) / 2)
            }
            Benchmark::Qft => gen_qft(num_qubits),
            Benchmark::QuantumVolume { depth } => gen_quantum_volume(num_qubits, depth, seed),
            Benchmark::Grover { iterations } => gen_grover(num_qubits, iterations),
            Benchmark::Random { cycles, density } => gen_random(num_qubits, cycles, density, seed),
        }
    }
}

/// `family[:key=value]*`, e.g. `random:p=0.3:cycles=20` or `quantum_volume:depth=8`.
impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Benchmark::Ghz | Benchmark::Cuccaro | Benchmark::Qft => {
                write!(f, "{}", self.family().name())
            }
            Benchmark::QuantumVolume { depth } => write!(f, "quantum_volume:depth={depth}"),
            Benchmark::Grover { iterations } => write!(f, "grover:iterations={iterations}"),
            Benchmark::Random { cycles, density } => {
                write!(f, "random:p={density}:cycles={cycles}")
            }
        }
    }
}

impl FromStr for Benchmark {
    type Err = BenchError;

    /// Accepts the [`Display`](fmt::Display) form; a bare value after `random:`
    /// is read as the density (`random:0.3`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BenchError::Parse(s.to_string());
        let mut parts = s.trim().split(':');
        let family = match parts.next().ok_or_else(bad)?.to_ascii_lowercase().as_str() {
            "ghz" => Family::Ghz,
            "cuccaro" => Family::Cuccaro,
            "qft" => Family::Qft,
            "quantum_volume" | "qv" => Family::QuantumVolume,
            "grover" => Family::Grover,
            "random" => Family::Random,
            _ => return Err(bad()),
        };
        let mut bench = Benchmark::default_for(family);
        for part in parts {
            let (key, value) = match part.split_once('=') {
                Some((k, v)) => (k, v),
                None if family == Family::Random => ("p", part),
                None => return Err(bad()),
            };
            let int = || value.parse::<usize>().map_err(|_| bad());
            match (&mut bench, key) {
                (Benchmark::QuantumVolume { depth }, "depth") => *depth = int()?,
                (Benchmark::Grover { iterations }, "iterations") => *iterations = int()?,
                (Benchmark::Random { cycles, .. }, "cycles") => *cycles = int()?,
                (Benchmark::Random { density, .. }, "p") => {
                    *density = value.parse().map_err(|_| bad())?;
                    if !(0.0..=1.0).contains(density) {
                        return Err(BenchError::Density(*density));
                    }
                }
                _ => return Err(bad()),
            }
        }
        Ok(bench)
    }
}

fn require_qubits(family: &'static str, min: usize, got: usize) -> Result<(), BenchError> {
    if got < min {
        return Err(BenchError::TooFewQubits { family, min, got });
    }
    Ok(())
}

fn build(num_qubits: usize, gates: Vec<Gate>) -> Circuit {
    Circuit::new(num_qubits, gates).expect("generators emit in-range, distinct qubits")
}

/// `h(0)` followed by `cx(0, i)` for every other qubit.
pub fn gen_ghz(n: usize) -> Result<Circuit, BenchError> {
    require_qubits("ghz", 2, n)?;
    let mut gates = vec![Gate::one("h", 0)];
    gates.extend((1..n).map(|i| Gate::two("cx", 0, i)));
    Ok(build(n, gates))
}

/// Textbook QFT with controlled phases and the final swap network.
pub fn gen_qft(n: usize) -> Result<Circuit, BenchError> {
    require_qubits("qft", 1, n)?;
    let mut gates = Vec::new();
    for i in 0..n {
        gates.push(Gate::one("h", i));
        for j in i + 1..n {
            let angle = std::f64::consts::PI / (1u64 << (j - i).min(62)) as f64;
            gates.push(Gate::two("cp", i, j).with_params(vec![angle]));
        }
    }
    for i in 0..n / 2 {
        gates.push(Gate::two("swap", i, n - 1 - i));
    }
    Ok(build(n, gates))
}

/// Toffoli on (c1, c2 -> target) as 6 CX, 2 H and 7 T/T† gates.
fn toffoli(gates: &mut Vec<Gate>, c1: usize, c2: usize, target: usize) {
    gates.extend([
        Gate::one("h", target),
        Gate::two("cx", c2, target),
        Gate::one("tdg", target),
        Gate::two("cx", c1, target),
        Gate::one("t", target),
        Gate::two("cx", c2, target),
        Gate::one("tdg", target),
        Gate::two("cx", c1, target),
        Gate::one("t", c2),
        Gate::one("t", target),
        Gate::one("h", target),
        Gate::two("cx", c1, c2),
        Gate::one("t", c1),
        Gate::one("tdg", c2),
        Gate::two("cx", c1, c2),
    ]);
}

fn majority(gates: &mut Vec<Gate>, c: usize, b: usize, a: usize) {
    gates.push(Gate::two("cx", a, b));
    gates.push(Gate::two("cx", a, c));
    toffoli(gates, c, b, a);
}

fn unmajority_add(gates: &mut Vec<Gate>, c: usize, b: usize, a: usize) {
    toffoli(gates, c, b, a);
    gates.push(Gate::two("cx", a, c));
    gates.push(Gate::two("cx", c, b));
}

/// Cuccaro ripple-carry adder on `2 * n_bits + 2` qubits.
///
/// Layout: `a_i = 2i`, `b_i = 2i + 1`, carry-in ancilla `2n`, carry-out `2n + 1`.
pub fn gen_cuccaro(n_bits: usize) -> Result<Circuit, BenchError> {
    if n_bits == 0 {
        return Err(BenchError::ZeroParameter("n_bits"));
    }
    let a = |i: usize| 2 * i;
    let b = |i: usize| 2 * i + 1;
    let carry_in = 2 * n_bits;
    let carry_out = 2 * n_bits + 1;
    let mut gates = Vec::new();
    majority(&mut gates, carry_in, b(0), a(0));
    for i in 1..n_bits {
        majority(&mut gates, a(i - 1), b(i), a(i));
    }
    gates.push(Gate::two("cx", a(n_bits - 1), carry_out));
    for i in (1..n_bits).rev() {
        unmajority_add(&mut gates, a(i - 1), b(i), a(i));
    }
    unmajority_add(&mut gates, carry_in, b(0), a(0));
    Ok(build(2 * n_bits + 2, gates))
}

/// Random-permutation layers of structural SU(4) blocks (3 CX each).
pub fn gen_quantum_volume(n: usize, depth: usize, seed: u64) -> Result<Circuit, BenchError> {
    require_qubits("quantum_volume", 2, n)?;
    if depth == 0 {
        return Err(BenchError::ZeroParameter("depth"));
    }
    let mut rng = Prng::for_stream(Family::QuantumVolume, n, seed);
    let mut gates = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..depth {
        rng.shuffle(&mut order);
        for pair in order.chunks_exact(2) {
            let (x, y) = (pair[0], pair[1]);
            for (k, (ctrl, tgt)) in [(x, y), (y, x), (x, y)].into_iter().enumerate() {
                for q in [x, y] {
                    let params = vec![rng.angle(), rng.angle(), rng.angle()];
                    gates.push(Gate::one("u3", q).with_params(params));
                }
                gates.push(Gate::two("cx", ctrl, tgt));
                if k == 2 {
                    for q in [x, y] {
                        let params = vec![rng.angle(), rng.angle(), rng.angle()];
                        gates.push(Gate::one("u3", q).with_params(params));
                    }
                }
            }
        }
    }
    Ok(build(n, gates))
}

fn cx_ladder_z(gates: &mut Vec<Gate>, n: usize) {
    for i in 0..n - 1 {
        gates.push(Gate::two("cx", i, i + 1));
    }
    gates.push(Gate::one("z", n - 1));
    for i in (0..n - 1).rev() {
        gates.push(Gate::two("cx", i, i + 1));
    }
}

/// Grover search with a structural CX-ladder multi-controlled Z in both the
/// oracle and the diffusion operator.
pub fn gen_grover(n: usize, iterations: usize) -> Result<Circuit, BenchError> {
    require_qubits("grover", 2, n)?;
    if iterations == 0 {
        return Err(BenchError::ZeroParameter("iterations"));
    }
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::one("h", q)).collect();
    for _ in 0..iterations {
        // Oracle marking |1...1>.
        cx_ladder_z(&mut gates, n);
        // Diffusion: H X (mcZ) X H.
        gates.extend((0..n).map(|q| Gate::one("h", q)));
        gates.extend((0..n).map(|q| Gate::one("x", q)));
        cx_ladder_z(&mut gates, n);
        gates.extend((0..n).map(|q| Gate::one("x", q)));
        gates.extend((0..n).map(|q| Gate::one("h", q)));
    }
    Ok(build(n, gates))
}

/// Number of CX pairs per cycle of a random circuit: `floor(p * n / 2)`.
pub fn random_pairs_per_cycle(n: usize, density: f64) -> usize {
    // The epsilon keeps e.g. 0.3 * 120 / 2 from flooring to 17.
    (density * n as f64 / 2.0 + 1e-9).floor() as usize
}

/// Per cycle, a random disjoint pairing of `2 * floor(p * n / 2)` qubits gets
/// CX gates and every other qubit a random one-qubit gate.
pub fn gen_random(n: usize, cycles: usize, density: f64, seed: u64) -> Result<Circuit, BenchError> {
    require_qubits("random", 2, n)?;
    if cycles == 0 {
        return Err(BenchError::ZeroParameter("cycles"));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(BenchError::Density(density));
    }
    let pairs = random_pairs_per_cycle(n, density);
    let mut rng = Prng::for_stream(Family::Random, n, seed);
    let mut gates = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..cycles {
        rng.shuffle(&mut order);
        let (paired, idle) = order.split_at(2 * pairs);
        for pair in paired.chunks_exact(2) {
            gates.push(Gate::two("cx", pair[0], pair[1]));
        }
        for &q in idle {
            let label = RANDOM_ONE_QUBIT[rng.below(RANDOM_ONE_QUBIT.len())];
            gates.push(Gate::one(label, q));
        }
    }
    Ok(build(n, gates))
}
