//! Interaction graphs with exponentially decaying look-ahead weights.
//!
//! For a slice `t`, the weight between two qubits is
//! `sum over m in (t, t + horizon] of I(m, qi, qj) * 2^-(m - t)`, where
//! `I(m, qi, qj)` is 1 when some two-qubit gate of slice `m` acts on both.
//! Pairs interacting in slice `t` itself get an [`Weight::Infinite`] edge.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::circuit::{QubitPair, TimeslicedCircuit};

/// Default number of future slices summed. `2^-32` is below any decision threshold.
pub const DEFAULT_HORIZON: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Finite(f64),
    Infinite,
}

impl Weight {
    pub const ZERO: Weight = Weight::Finite(0.0);

    pub fn is_infinite(&self) -> bool {
        matches!(self, Weight::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Weight::Finite(w) => Some(*w),
            Weight::Infinite => None,
        }
    }
}

impl Eq for Weight {}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Weight::Infinite, Weight::Infinite) => Ordering::Equal,
            (Weight::Infinite, Weight::Finite(_)) => Ordering::Greater,
            (Weight::Finite(_), Weight::Infinite) => Ordering::Less,
            (Weight::Finite(a), Weight::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl std::ops::Add for Weight {
    type Output = Weight;

    fn add(self, rhs: Weight) -> Weight {
        match (self, rhs) {
            (Weight::Finite(a), Weight::Finite(b)) => Weight::Finite(a + b),
            _ => Weight::Infinite,
        }
    }
}

impl std::iter::Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, |a, b| a + b)
    }
}

/// Undirected qubit graph. Absent pairs weigh `Finite(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    num_qubits: usize,
    adjacency: Vec<BTreeMap<usize, Weight>>,
}

impl InteractionGraph {
    pub fn new(num_qubits: usize) -> Self {
        InteractionGraph {
            num_qubits,
            adjacency: vec![BTreeMap::new(); num_qubits],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn set(&mut self, pair: QubitPair, weight: Weight) {
        let (a, b) = (pair.low(), pair.high());
        self.adjacency[a].insert(b, weight);
        self.adjacency[b].insert(a, weight);
    }

    fn add_finite(&mut self, pair: QubitPair, w: f64) {
        let (a, b) = (pair.low(), pair.high());
        let entry = self.adjacency[a].entry(b).or_insert(Weight::ZERO);
        *entry = *entry + Weight::Finite(w);
        let updated = *entry;
        self.adjacency[b].insert(a, updated);
    }

    pub fn weight(&self, a: usize, b: usize) -> Weight {
        self.adjacency[a].get(&b).copied().unwrap_or(Weight::ZERO)
    }

    pub fn neighbors(&self, q: usize) -> impl Iterator<Item = (usize, Weight)> + '_ {
        self.adjacency[q].iter().map(|(&n, &w)| (n, w))
    }

    /// Every stored edge once, in ascending `(low, high)` order.
    pub fn edges(&self) -> impl Iterator<Item = (QubitPair, Weight)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, row)| {
            row.range(a + 1..)
                .map(move |(&b, &w)| (QubitPair::new(a, b), w))
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges().count()
    }

    /// Sum of every finite edge weight.
    pub fn total_finite_weight(&self) -> f64 {
        self.edges().filter_map(|(_, w)| w.finite()).sum()
    }
}

/// Decayed interaction weights of the slices `first..first + horizon`,
/// where slice `first + k` contributes `2^-(k + 1)`.
///
/// This is the look-ahead graph "as seen from just before slice `first`",
/// so `future_weights(s, t + 1, h)` holds the finite weights of slice `t`.
pub fn future_weights(
    slices: &TimeslicedCircuit,
    first: usize,
    horizon: usize,
) -> InteractionGraph {
    let mut graph = InteractionGraph::new(slices.num_qubits());
    let end = slices.len().min(first.saturating_add(horizon));
    let mut decay = 0.5;
    for m in first..end {
        for pair in slices.slice(m).interacting_pairs() {
            graph.add_finite(pair, decay);
        }
        decay *= 0.5;
    }
    graph
}

/// Look-ahead weight of a single pair at slice `t`. Computed by direct scan.
pub fn lookahead_weight(
    slices: &TimeslicedCircuit,
    t: usize,
    qi: usize,
    qj: usize,
    horizon: usize,
) -> f64 {
    debug_assert!(t < slices.len());
    debug_assert_ne!(qi, qj);
    let target = QubitPair::new(qi, qj);
    let end = slices
        .len()
        .min(t.saturating_add(horizon).saturating_add(1));
    (t + 1..end)
        .filter(|&m| slices.slice(m).interacting_pairs().contains(&target))
        .map(|m| 2f64.powi(-((m - t) as i32)))
        .sum()
}

/// Graph of slice `t`: infinite edges for pairs interacting at `t`, decayed
/// look-ahead weights for every other pair that interacts within the horizon.
pub fn build_interaction_graph(
    slices: &TimeslicedCircuit,
    t: usize,
    horizon: usize,
) -> InteractionGraph {
    debug_assert!(t < slices.len());
    let mut graph = future_weights(slices, t + 1, horizon);
    for pair in slices.slice(t).interacting_pairs() {
        graph.set(pair, Weight::Infinite);
    }
    graph
}
