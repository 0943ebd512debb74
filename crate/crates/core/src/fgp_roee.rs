//! Fine-grained partitioning with relaxed Overall Extreme Exchange.
//!
//! Every timeslice gets its own interaction graph: infinite edges for the
//! gates of the slice, decayed look-ahead weights for later ones. The
//! previous slice's partition is refined by pairwise exchanges until no
//! infinite edge is cut. Parts always hold exactly `capacity` nodes; when
//! the circuit has fewer qubits than slots, edge-less dummy nodes fill the
//! gap and take part in exchanges like any other node.

use thiserror::Error;

use crate::circuit::{timeslice, Circuit, TimeslicedCircuit};
use crate::lookahead::{build_interaction_graph, InteractionGraph, Weight, DEFAULT_HORIZON};
use crate::partition::{
    initial_assignment, Architecture, Assignment, AssignmentPath, PartitionError,
};

const GAIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FgpError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("no valid partition reached after {passes} passes")]
    ValidityUnreachable { passes: usize },
    #[error("slice {slice}: no valid partition reached after {passes} passes")]
    SliceUnreachable { slice: usize, passes: usize },
    #[error("partition has {nodes} nodes, expected {parts} parts of {part_size}")]
    Unbalanced {
        nodes: usize,
        parts: usize,
        part_size: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FgpConfig {
    pub horizon: usize,
    /// Keep refining finite cut weight once the partition is valid.
    pub continue_after_valid: bool,
    /// Pass cap for the relaxed refinement; `None` means twice the qubit count.
    pub max_passes: Option<usize>,
}

impl Default for FgpConfig {
    fn default() -> Self {
        FgpConfig {
            horizon: DEFAULT_HORIZON,
            continue_after_valid: false,
            max_passes: None,
        }
    }
}

/// Balanced partition of `num_parts * part_size` nodes. Nodes at or above the
/// graph's qubit count are dummies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    part_of: Vec<usize>,
    num_parts: usize,
    part_size: usize,
}

impl Partition {
    pub fn new(part_of: Vec<usize>, num_parts: usize, part_size: usize) -> Result<Self, FgpError> {
        let unbalanced = FgpError::Unbalanced {
            nodes: part_of.len(),
            parts: num_parts,
            part_size,
        };
        if part_of.len() != num_parts * part_size {
            return Err(unbalanced);
        }
        let mut sizes = vec![0usize; num_parts];
        for &p in &part_of {
            if p >= num_parts {
                return Err(unbalanced);
            }
            sizes[p] += 1;
        }
        if sizes.iter().any(|&s| s != part_size) {
            return Err(unbalanced);
        }
        Ok(Partition {
            part_of,
            num_parts,
            part_size,
        })
    }

    /// Pads `assignment` with dummies, filling free slots core by core.
    pub fn from_assignment(assignment: &Assignment, arch: &Architecture) -> Result<Self, FgpError> {
        let mut part_of = assignment.as_slice().to_vec();
        let loads = assignment.loads(arch.num_cores());
        for (core, &load) in loads.iter().enumerate() {
            part_of.extend(std::iter::repeat_n(
                core,
                arch.capacity().saturating_sub(load),
            ));
        }
        Partition::new(part_of, arch.num_cores(), arch.capacity())
    }

    pub fn part_of(&self, node: usize) -> usize {
        self.part_of[node]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.part_of
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn part_size(&self) -> usize {
        self.part_size
    }

    pub fn num_nodes(&self) -> usize {
        self.part_of.len()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_parts];
        for &p in &self.part_of {
            sizes[p] += 1;
        }
        sizes
    }

    /// The first `num_qubits` nodes read as a qubit assignment.
    pub fn to_assignment(&self, num_qubits: usize) -> Assignment {
        Assignment::from_vec_unchecked(self.part_of[..num_qubits].to_vec())
    }
}

/// Total weight of edges whose endpoints lie in different parts.
pub fn cut_weight(graph: &InteractionGraph, partition: &Partition) -> Weight {
    graph
        .edges()
        .filter(|(pair, _)| partition.part_of(pair.low()) != partition.part_of(pair.high()))
        .map(|(_, w)| w)
        .sum()
}

/// Number of infinite edges cut by `partition`.
pub fn cut_infinite_edges(graph: &InteractionGraph, partition: &Partition) -> usize {
    graph
        .edges()
        .filter(|(pair, w)| {
            w.is_infinite() && partition.part_of(pair.low()) != partition.part_of(pair.high())
        })
        .count()
}

/// Finite stand-in for an infinite edge: one more than all finite weight
/// combined, so cutting one fewer infinite edge always wins.
pub fn infinite_substitute(graph: &InteractionGraph) -> f64 {
    graph.total_finite_weight() + 1.0
}

/// Cut weight with every infinite edge counted as [`infinite_substitute`].
pub fn substituted_cut(graph: &InteractionGraph, partition: &Partition) -> f64 {
    let m = infinite_substitute(graph);
    graph
        .edges()
        .filter(|(pair, _)| partition.part_of(pair.low()) != partition.part_of(pair.high()))
        .map(|(_, w)| w.finite().unwrap_or(m))
        .sum()
}

/// Dense working state for exchange passes.
struct Exchange {
    nodes: usize,
    parts: usize,
    weight: Vec<f64>,
    infinite: Vec<(usize, usize)>,
    part_of: Vec<usize>,
    /// `conn[u * parts + p]`: summed weight from `u` to the nodes of part `p`.
    conn: Vec<f64>,
    locked: Vec<bool>,
}

impl Exchange {
    fn new(graph: &InteractionGraph, partition: &Partition) -> Self {
        let nodes = partition.num_nodes();
        let parts = partition.num_parts();
        let m = infinite_substitute(graph);
        let mut weight = vec![0.0; nodes * nodes];
        let mut infinite = Vec::new();
        for (pair, w) in graph.edges() {
            let (a, b) = (pair.low(), pair.high());
            let value = match w {
                Weight::Finite(x) => x,
                Weight::Infinite => {
                    infinite.push((a, b));
                    m
                }
            };
            weight[a * nodes + b] = value;
            weight[b * nodes + a] = value;
        }
        let part_of = partition.as_slice().to_vec();
        let mut conn = vec![0.0; nodes * parts];
        for u in 0..nodes {
            for x in 0..nodes {
                conn[u * parts + part_of[x]] += weight[u * nodes + x];
            }
        }
        Exchange {
            nodes,
            parts,
            weight,
            infinite,
            part_of,
            conn,
            locked: vec![false; nodes],
        }
    }

    fn gain(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (self.part_of[u], self.part_of[v]);
        let k = self.parts;
        let du = self.conn[u * k + b] - self.conn[u * k + a];
        let dv = self.conn[v * k + a] - self.conn[v * k + b];
        du + dv - 2.0 * self.weight[u * self.nodes + v]
    }

    /// Highest-gain unlocked cross-part pair; ties keep the smallest `(u, v)`.
    fn best_swap(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for u in 0..self.nodes {
            if self.locked[u] {
                continue;
            }
            for v in u + 1..self.nodes {
                if self.locked[v] || self.part_of[u] == self.part_of[v] {
                    continue;
                }
                let g = self.gain(u, v);
                if best.is_none_or(|(_, _, b)| g > b + GAIN_TOLERANCE) {
                    best = Some((u, v, g));
                }
            }
        }
        best
    }

    fn swap(&mut self, u: usize, v: usize) {
        let (a, b) = (self.part_of[u], self.part_of[v]);
        let (n, k) = (self.nodes, self.parts);
        for x in 0..n {
            let (wu, wv) = (self.weight[x * n + u], self.weight[x * n + v]);
            if wu != wv {
                self.conn[x * k + a] += wv - wu;
                self.conn[x * k + b] += wu - wv;
            }
        }
        self.part_of[u] = b;
        self.part_of[v] = a;
    }

    fn cut_infinite(&self) -> usize {
        self.infinite
            .iter()
            .filter(|&&(a, b)| self.part_of[a] != self.part_of[b])
            .count()
    }

    fn unlock(&mut self) {
        self.locked.iter_mut().for_each(|l| *l = false);
    }

    fn into_partition(self, part_size: usize) -> Partition {
        Partition {
            part_of: self.part_of,
            num_parts: self.parts,
            part_size,
        }
    }
}

/// Kernighan-Lin style refinement. Each pass swaps the best unlocked pair
/// until none is left, then keeps the prefix with the largest cumulative
/// gain. Passes repeat while that gain is positive.
pub fn oee_refine(graph: &InteractionGraph, initial: &Partition) -> Partition {
    let mut state = Exchange::new(graph, initial);
    oee_passes(&mut state);
    state.into_partition(initial.part_size())
}

fn oee_passes(state: &mut Exchange) {
    loop {
        state.unlock();
        let mut swaps = Vec::new();
        let (mut total, mut best, mut best_len) = (0.0, 0.0, 0);
        while let Some((u, v, g)) = state.best_swap() {
            state.swap(u, v);
            state.locked[u] = true;
            state.locked[v] = true;
            swaps.push((u, v));
            total += g;
            if total > best + GAIN_TOLERANCE {
                best = total;
                best_len = swaps.len();
            }
        }
        for &(u, v) in swaps[best_len..].iter().rev() {
            state.swap(u, v);
        }
        if best_len == 0 {
            return;
        }
    }
}

/// Exchanges nodes until no infinite edge is cut, committing at the first
/// valid configuration even if finite cut weight grew. A pass that ends
/// without validity is committed whole and a fresh one starts.
pub fn roee_refine(
    graph: &InteractionGraph,
    initial: &Partition,
    max_passes: usize,
) -> Result<Partition, FgpError> {
    if cut_infinite_edges(graph, initial) == 0 {
        return Ok(initial.clone());
    }
    let mut state = Exchange::new(graph, initial);
    roee_passes(&mut state, max_passes)?;
    Ok(state.into_partition(initial.part_size()))
}

fn roee_passes(state: &mut Exchange, max_passes: usize) -> Result<(), FgpError> {
    for _ in 0..max_passes {
        state.unlock();
        while let Some((u, v, _)) = state.best_swap() {
            state.swap(u, v);
            state.locked[u] = true;
            state.locked[v] = true;
            if state.cut_infinite() == 0 {
                return Ok(());
            }
        }
    }
    Err(FgpError::ValidityUnreachable { passes: max_passes })
}

fn refine_slice(
    graph: &InteractionGraph,
    previous: &Partition,
    config: &FgpConfig,
    max_passes: usize,
) -> Result<Partition, FgpError> {
    let valid = roee_refine(graph, previous, max_passes)?;
    if config.continue_after_valid {
        Ok(oee_refine(graph, &valid))
    } else {
        Ok(valid)
    }
}

/// Maps a circuit by refining the previous slice's partition at every slice,
/// starting from the block layout.
pub fn fgp_map_circuit(
    circuit: &Circuit,
    arch: &Architecture,
    config: &FgpConfig,
) -> Result<AssignmentPath, FgpError> {
    fgp_map_slices(&timeslice(circuit), arch, config)
}

pub fn fgp_map_slices(
    slices: &TimeslicedCircuit,
    arch: &Architecture,
    config: &FgpConfig,
) -> Result<AssignmentPath, FgpError> {
    let num_qubits = slices.num_qubits();
    let max_passes = config.max_passes.unwrap_or(2 * num_qubits.max(1));
    let mut partition = Partition::from_assignment(&initial_assignment(num_qubits, arch)?, arch)?;
    let mut path = Vec::with_capacity(slices.len());
    for t in 0..slices.len() {
        let graph = build_interaction_graph(slices, t, config.horizon);
        partition = refine_slice(&graph, &partition, config, max_passes).map_err(|e| match e {
            FgpError::ValidityUnreachable { passes } => {
                FgpError::SliceUnreachable { slice: t, passes }
            }
            other => other,
        })?;
        path.push(partition.to_assignment(num_qubits));
    }
    Ok(AssignmentPath::new(num_qubits, *arch, path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, QubitPair};
    use crate::partition::{count_communications, is_valid};

    fn graph(n: usize, edges: &[(usize, usize, Weight)]) -> InteractionGraph {
        let mut g = InteractionGraph::new(n);
        for &(a, b, w) in edges {
            g.set(QubitPair::new(a, b), w);
        }
        g
    }

    fn part(v: &[usize], k: usize, c: usize) -> Partition {
        Partition::new(v.to_vec(), k, c).unwrap()
    }

    /// Every labelled balanced partition of `k * c` nodes.
    fn all_partitions(k: usize, c: usize) -> Vec<Partition> {
        let n = k * c;
        let mut out = Vec::new();
        let mut current = vec![0; n];
        fn fill(
            i: usize,
            k: usize,
            c: usize,
            cur: &mut Vec<usize>,
            sizes: &mut Vec<usize>,
            out: &mut Vec<Partition>,
        ) {
            if i == cur.len() {
                out.push(Partition::new(cur.clone(), k, c).unwrap());
                return;
            }
            for p in 0..k {
                if sizes[p] < c {
                    sizes[p] += 1;
                    cur[i] = p;
                    fill(i + 1, k, c, cur, sizes, out);
                    sizes[p] -= 1;
                }
            }
        }
        fill(0, k, c, &mut current, &mut vec![0; k], &mut out);
        out
    }

    #[test]
    fn cut_weight_cases() {
        let g = graph(4, &[(0, 1, Weight::Finite(0.5))]);
        assert_eq!(cut_weight(&g, &part(&[0, 0, 1, 1], 2, 2)), Weight::ZERO);
        assert_eq!(
            cut_weight(&g, &part(&[0, 1, 0, 1], 2, 2)),
            Weight::Finite(0.5)
        );
        let g = graph(4, &[(0, 1, Weight::Infinite), (2, 3, Weight::Finite(0.25))]);
        assert_eq!(cut_weight(&g, &part(&[0, 1, 0, 1], 2, 2)), Weight::Infinite);
    }

    #[test]
    fn rejects_unbalanced_partitions() {
        assert!(Partition::new(vec![0, 0, 0, 1], 2, 2).is_err());
        assert!(Partition::new(vec![0, 0, 1], 2, 2).is_err());
        assert!(Partition::new(vec![0, 2, 1, 1], 2, 2).is_err());
    }

    #[test]
    fn pads_with_dummies() {
        let arch = Architecture::new(3, 2).unwrap();
        let a = Assignment::new(vec![0, 0, 1], &arch).unwrap();
        let p = Partition::from_assignment(&a, &arch).unwrap();
        assert_eq!(p.as_slice(), &[0, 0, 1, 1, 2, 2]);
        assert_eq!(p.to_assignment(3), a);
    }

    #[test]
    fn oee_reaches_exhaustive_optimum_on_four_nodes() {
        // Two heavy edges cross the initial split.
        let g = graph(
            4,
            &[
                (0, 2, Weight::Finite(1.0)),
                (1, 3, Weight::Finite(1.0)),
                (0, 1, Weight::Finite(0.25)),
            ],
        );
        let start = part(&[0, 0, 1, 1], 2, 2);
        let refined = oee_refine(&g, &start);
        let best = all_partitions(2, 2)
            .iter()
            .map(|p| substituted_cut(&g, p))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, 0.25);
        assert_eq!(substituted_cut(&g, &refined), best);
        assert!(substituted_cut(&g, &refined) < substituted_cut(&g, &start));
    }

    #[test]
    fn oee_leaves_local_optimum_alone() {
        let g = graph(
            4,
            &[(0, 1, Weight::Finite(1.0)), (2, 3, Weight::Finite(1.0))],
        );
        let start = part(&[0, 0, 1, 1], 2, 2);
        assert_eq!(oee_refine(&g, &start), start);
        let empty = InteractionGraph::new(4);
        assert_eq!(oee_refine(&empty, &start), start);
    }

    #[test]
    fn roee_keeps_valid_input() {
        let g = graph(4, &[(0, 1, Weight::Infinite), (0, 2, Weight::Finite(0.5))]);
        let start = part(&[0, 0, 1, 1], 2, 2);
        assert_eq!(roee_refine(&g, &start, 8).unwrap(), start);
    }

    #[test]
    fn roee_fixes_one_split_pair_in_one_exchange() {
        let g = graph(4, &[(1, 2, Weight::Infinite)]);
        let start = part(&[0, 0, 1, 1], 2, 2);
        let out = roee_refine(&g, &start, 8).unwrap();
        assert_eq!(cut_infinite_edges(&g, &out), 0);
        let moved = (0..4)
            .filter(|&u| out.part_of(u) != start.part_of(u))
            .count();
        assert_eq!(moved, 2);
    }

    #[test]
    fn roee_fixes_two_split_pairs_within_two_exchanges() {
        // Three parts of two: pairs (0,2) and (1,4) start split.
        let g = graph(6, &[(0, 2, Weight::Infinite), (1, 4, Weight::Infinite)]);
        let start = part(&[0, 0, 1, 1, 2, 2], 3, 2);
        let out = roee_refine(&g, &start, 12).unwrap();
        assert_eq!(cut_infinite_edges(&g, &out), 0);
        let moved = (0..6)
            .filter(|&u| out.part_of(u) != start.part_of(u))
            .count();
        assert!(moved <= 4);
        // No single exchange of the start is valid, so two are needed.
        let one_swap_valid = all_partitions(3, 2).into_iter().any(|p| {
            let moved = (0..6).filter(|&u| p.part_of(u) != start.part_of(u)).count();
            moved == 2 && cut_infinite_edges(&g, &p) == 0
        });
        assert!(!one_swap_valid);
    }

    #[test]
    fn continue_after_valid_never_raises_cut() {
        let g = graph(
            6,
            &[
                (0, 3, Weight::Infinite),
                (1, 4, Weight::Finite(0.5)),
                (2, 5, Weight::Finite(0.25)),
            ],
        );
        let start = part(&[0, 0, 0, 1, 1, 1], 2, 3);
        let valid = roee_refine(&g, &start, 12).unwrap();
        let refined = oee_refine(&g, &valid);
        assert_eq!(cut_infinite_edges(&g, &refined), 0);
        assert!(substituted_cut(&g, &refined) <= substituted_cut(&g, &valid));
    }

    #[test]
    fn no_two_qubit_gates_means_no_moves() {
        let c = Circuit::new(
            4,
            vec![Gate::one("h", 0), Gate::one("h", 0), Gate::one("x", 2)],
        )
        .unwrap();
        let path =
            fgp_map_circuit(&c, &Architecture::new(2, 2).unwrap(), &FgpConfig::default()).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(count_communications(&path), 0);
    }

    #[test]
    fn ghz_four_on_two_cores_is_valid() {
        let gates = vec![
            Gate::one("h", 0),
            Gate::two("cx", 0, 1),
            Gate::two("cx", 1, 2),
            Gate::two("cx", 2, 3),
        ];
        let c = Circuit::new(4, gates).unwrap();
        let arch = Architecture::new(2, 2).unwrap();
        let path = fgp_map_circuit(&c, &arch, &FgpConfig::default()).unwrap();
        let slices = timeslice(&c);
        for (t, a) in path.assignments().iter().enumerate() {
            assert!(is_valid(a, slices.slice(t), &arch));
        }
    }

    #[test]
    fn dummies_stay_out_of_assignments() {
        let c = Circuit::new(3, vec![Gate::two("cx", 0, 2), Gate::two("cx", 1, 2)]).unwrap();
        let arch = Architecture::new(2, 2).unwrap();
        let path = fgp_map_circuit(&c, &arch, &FgpConfig::default()).unwrap();
        assert!(path.assignments().iter().all(|a| a.num_qubits() == 3));
    }
}
