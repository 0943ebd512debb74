//! Hungarian Qubit Assignment.
//!
//! Between two consecutive timeslices, the two-qubit gates of the next slice
//! whose qubits sit in different cores are *unfeasible operations*. Their
//! qubits are lifted out of the current assignment and the operations are
//! assigned to cores in rounds: each round builds an operation x core cost
//! matrix and a linear assignment gives each core with at least two free
//! slots at most one operation. Both qubits of an operation land in the same
//! core, so the next slice becomes executable.
//!
//! Placing operations two slots at a time fails when a core ends up with an
//! odd number of free slots. Before the rounds start, odd cores are paired
//! and an auxiliary operation joins one idle qubit from each core of a pair.

use thiserror::Error;

use crate::circuit::{Circuit, Timeslice, TimeslicedCircuit};
use crate::hungarian::{self, Cost, CostMatrix, HungarianError};
use crate::lookahead::{future_weights, InteractionGraph, DEFAULT_HORIZON};
use crate::partition::{
    initial_assignment, Architecture, Assignment, AssignmentPath, PartitionError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HqaError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("assignment solver failed on slice {slice}: {source}")]
    Solver {
        slice: usize,
        #[source]
        source: HungarianError,
    },
    #[error("slice {slice} cannot be made valid: {ops} operations need core pairs but only {pair_slots} are free")]
    Infeasible {
        slice: usize,
        ops: usize,
        pair_slots: usize,
    },
    #[error("slice {slice}: no qubit can be moved to fix the parity of core {core}")]
    Parity { slice: usize, core: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// A two-qubit gate of the next slice.
    Gate,
    /// An artificial pairing of idle qubits that evens out free slots.
    Auxiliary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnfeasibleOp {
    pub qa: usize,
    pub qb: usize,
    pub origin: Origin,
}

impl UnfeasibleOp {
    fn gate(qa: usize, qb: usize) -> Self {
        UnfeasibleOp {
            qa,
            qb,
            origin: Origin::Gate,
        }
    }
}

/// How operations are fed to the solver when there are more of them than
/// cores with room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchRule {
    /// Each round solves the next operations in slice gate order, as many as
    /// there are cores with at least two free slots.
    #[default]
    GateOrder,
    /// Each round lets the solver pick which operations the available cores
    /// take, from all remaining operations.
    SolverChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HqaConfig {
    pub use_attraction: bool,
    pub horizon: usize,
    pub batch: BatchRule,
}

impl Default for HqaConfig {
    fn default() -> Self {
        HqaConfig {
            use_attraction: true,
            horizon: DEFAULT_HORIZON,
            batch: BatchRule::GateOrder,
        }
    }
}

/// Two-qubit gates of `next` whose qubits are split across cores under `prev`.
pub fn collect_unfeasible(prev: &Assignment, next: &Timeslice) -> Vec<UnfeasibleOp> {
    next.interacting_pairs()
        .into_iter()
        .filter(|p| prev.core_of(p.low()) != prev.core_of(p.high()))
        .map(|p| UnfeasibleOp::gate(p.low(), p.high()))
        .collect()
}

/// Operations to place plus qubits moved directly to fix parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityFix {
    pub ops: Vec<UnfeasibleOp>,
    /// `(qubit, destination core)` moves applied before any operation is placed.
    pub relocations: Vec<(usize, usize)>,
}

/// Free slots per core once the operation endpoints are lifted.
fn free_after_lift(prev: &Assignment, ops: &[UnfeasibleOp], arch: &Architecture) -> Vec<usize> {
    let mut free: Vec<usize> = prev
        .loads(arch.num_cores())
        .iter()
        .map(|&l| arch.capacity() - l)
        .collect();
    for op in ops {
        free[prev.core_of(op.qa)] += 1;
        free[prev.core_of(op.qb)] += 1;
    }
    free
}

fn pair_slots(free: &[usize]) -> usize {
    free.iter().map(|f| f / 2).sum()
}

/// Adds auxiliary operations (or, when a core has nothing to give, direct
/// moves) until the free slots can absorb every operation two at a time.
///
/// Cores with an odd free count are sorted ascending and paired in order.
/// With full cores every odd core is paired; spare capacity elsewhere
/// reduces the number of pairs needed. Each paired core contributes its
/// lowest-index idle qubit, falling back to a qubit acting only in one-qubit
/// gates.
pub fn parity_fix(
    ops: Vec<UnfeasibleOp>,
    prev: &Assignment,
    next: &Timeslice,
    arch: &Architecture,
) -> Result<ParityFix, usize> {
    let num_qubits = prev.num_qubits();
    let slack = arch.total_capacity() - num_qubits;
    let mut free = free_after_lift(prev, &ops, arch);
    let odd: Vec<usize> = (0..arch.num_cores())
        .filter(|&j| free[j] % 2 == 1)
        .collect();
    // The odd count always has the parity of the slack.
    let needed = odd.len().saturating_sub(slack) / 2;

    let busy = next.busy(num_qubits);
    let partners = next.partners(num_qubits);
    let residents = prev.residents(arch.num_cores());
    let mut taken = vec![false; num_qubits];
    for op in &ops {
        taken[op.qa] = true;
        taken[op.qb] = true;
    }
    let pick = |core: usize, taken: &[bool]| -> Option<usize> {
        let mut movable = residents[core]
            .iter()
            .copied()
            .filter(|&q| !taken[q] && partners[q].is_none());
        let first = movable.clone().find(|&q| !busy[q]);
        first.or_else(|| movable.next())
    };

    let mut ops = ops;
    let mut relocations = Vec::new();
    for pair in odd[..2 * needed].chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        match (pick(a, &taken), pick(b, &taken)) {
            (Some(qa), Some(qb)) => {
                taken[qa] = true;
                taken[qb] = true;
                ops.push(UnfeasibleOp {
                    qa,
                    qb,
                    origin: Origin::Auxiliary,
                });
                free[a] += 1;
                free[b] += 1;
            }
            // Only one side can give: move its qubit into the other's odd slot.
            (None, Some(q)) | (Some(q), None) => {
                let (from, to) = if prev.core_of(q) == a { (a, b) } else { (b, a) };
                taken[q] = true;
                relocations.push((q, to));
                free[from] += 1;
                free[to] -= 1;
            }
            // Neither can give: fill both odd slots from one third core.
            (None, None) => {
                let donor = (0..arch.num_cores())
                    .filter(|&k| k != a && k != b)
                    .find_map(|k| {
                        let first = pick(k, &taken)?;
                        taken[first] = true;
                        let second = pick(k, &taken);
                        taken[first] = false;
                        Some((k, first, second?))
                    });
                let Some((k, x, y)) = donor else {
                    return Err(a);
                };
                taken[x] = true;
                taken[y] = true;
                relocations.push((x, a));
                relocations.push((y, b));
                free[k] += 2;
                free[a] -= 1;
                free[b] -= 1;
            }
        }
    }
    Ok(ParityFix { ops, relocations })
}

/// Cost of placing both qubits of `op` in `core`, without look-ahead.
///
/// Forbidden when the core has fewer than two free slots, 1 when either
/// qubit already lived there under `prev`, 2 otherwise.
pub fn cost_basic(op: &UnfeasibleOp, core: usize, prev: &Assignment, free: &[usize]) -> Cost {
    if free[core] < 2 {
        Cost::Forbidden
    } else if prev.core_of(op.qa) == core || prev.core_of(op.qb) == core {
        Cost::Finite(1.0)
    } else {
        Cost::Finite(2.0)
    }
}

/// Attraction of `qubit` to `core`: summed look-ahead weight to the qubits
/// currently placed there. Lifted qubits (`None`) exert no pull.
pub fn attraction_qubit(
    qubit: usize,
    core: usize,
    placed: &[Option<usize>],
    weights: &InteractionGraph,
) -> f64 {
    weights
        .neighbors(qubit)
        .filter(|(other, _)| placed[*other] == Some(core))
        .filter_map(|(_, w)| w.finite())
        .sum()
}

/// Mean attraction of both operation qubits to every core.
fn op_attraction(
    op: &UnfeasibleOp,
    num_cores: usize,
    placed: &[Option<usize>],
    weights: &InteractionGraph,
) -> Vec<f64> {
    let mut pull = vec![0.0; num_cores];
    for q in [op.qa, op.qb] {
        for (other, w) in weights.neighbors(q) {
            if let (Some(core), Some(w)) = (placed[other], w.finite()) {
                pull[core] += w;
            }
        }
    }
    pull.iter_mut().for_each(|p| *p /= 2.0);
    pull
}

/// [`cost_basic`] minus the operation's mean attraction to `core`.
pub fn cost_attraction(
    op: &UnfeasibleOp,
    core: usize,
    prev: &Assignment,
    free: &[usize],
    placed: &[Option<usize>],
    weights: &InteractionGraph,
) -> Cost {
    match cost_basic(op, core, prev, free) {
        Cost::Finite(base) => {
            let pull = (attraction_qubit(op.qa, core, placed, weights)
                + attraction_qubit(op.qb, core, placed, weights))
                / 2.0;
            Cost::Finite(base - pull)
        }
        Cost::Forbidden => Cost::Forbidden,
    }
}

/// State after lifting operation endpoints, before any round runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairPlan {
    pub ops: Vec<UnfeasibleOp>,
    /// Core of every qubit still placed; `None` for lifted qubits.
    pub placed: Vec<Option<usize>>,
    pub free: Vec<usize>,
}

/// Collects unfeasible operations for slice `next`, applies the parity fix
/// and lifts every operation endpoint.
pub fn plan_repair(
    prev: &Assignment,
    slices: &TimeslicedCircuit,
    next: usize,
    arch: &Architecture,
) -> Result<RepairPlan, HqaError> {
    let slice = slices.slice(next);
    let ops = collect_unfeasible(prev, slice);
    let mut placed: Vec<Option<usize>> = prev.as_slice().iter().map(|&c| Some(c)).collect();
    if ops.is_empty() {
        let free = prev
            .loads(arch.num_cores())
            .iter()
            .map(|&l| arch.capacity() - l)
            .collect();
        return Ok(RepairPlan { ops, placed, free });
    }
    let fix = parity_fix(ops, prev, slice, arch)
        .map_err(|core| HqaError::Parity { slice: next, core })?;
    for &(q, core) in &fix.relocations {
        placed[q] = Some(core);
    }
    for op in &fix.ops {
        placed[op.qa] = None;
        placed[op.qb] = None;
    }
    let mut free = vec![arch.capacity(); arch.num_cores()];
    for core in placed.iter().flatten() {
        free[*core] -= 1;
    }
    let slots = pair_slots(&free);
    if slots < fix.ops.len() {
        return Err(HqaError::Infeasible {
            slice: next,
            ops: fix.ops.len(),
            pair_slots: slots,
        });
    }
    Ok(RepairPlan {
        ops: fix.ops,
        placed,
        free,
    })
}

fn op_costs(
    op: &UnfeasibleOp,
    prev: &Assignment,
    plan: &RepairPlan,
    weights: Option<&InteractionGraph>,
) -> Vec<Cost> {
    let num_cores = plan.free.len();
    let pull = weights.map(|w| op_attraction(op, num_cores, &plan.placed, w));
    (0..num_cores)
        .map(
            |core| match (cost_basic(op, core, prev, &plan.free), &pull) {
                (Cost::Finite(base), Some(pull)) => Cost::Finite(base - pull[core]),
                (cost, _) => cost,
            },
        )
        .collect()
}

/// Repairs the transition into slice `next`: returns an assignment that is
/// valid for `slices[next]`, starting from `prev`.
///
/// Look-ahead weights are taken from just before `next`, so the slice being
/// repaired contributes weight 1/2, the one after it 1/4, and so on.
pub fn hqa_step(
    prev: &Assignment,
    slices: &TimeslicedCircuit,
    next: usize,
    arch: &Architecture,
    config: &HqaConfig,
) -> Result<Assignment, HqaError> {
    if collect_unfeasible(prev, slices.slice(next)).is_empty() {
        return Ok(prev.clone());
    }
    let mut plan = plan_repair(prev, slices, next, arch)?;
    let lookahead = config
        .use_attraction
        .then(|| future_weights(slices, next, config.horizon));
    let weights = lookahead.as_ref();
    let num_cores = arch.num_cores();
    let mut remaining = std::mem::take(&mut plan.ops);

    while !remaining.is_empty() {
        let open = plan.free.iter().filter(|&&f| f >= 2).count();
        if open == 0 {
            return Err(HqaError::Infeasible {
                slice: next,
                ops: remaining.len(),
                pair_slots: 0,
            });
        }
        let costs: Vec<Vec<Cost>> = remaining
            .iter()
            .map(|op| op_costs(op, prev, &plan, weights))
            .collect();
        let solver_err = |source| HqaError::Solver {
            slice: next,
            source,
        };

        // (operation index, core) placements for this round.
        let placements: Vec<(usize, usize)> = if remaining.len() > open
            && config.batch == BatchRule::SolverChoice
        {
            let open_cores: Vec<usize> = (0..num_cores).filter(|&j| plan.free[j] >= 2).collect();
            let matrix = CostMatrix::from_rows(
                open_cores
                    .iter()
                    .map(|&j| costs.iter().map(move |row| row[j])),
            )
            .map_err(solver_err)?;
            let solution =
                hungarian::solve(&hungarian::shift_to_nonnegative(&matrix)).map_err(solver_err)?;
            open_cores
                .iter()
                .zip(solution.col_of_row)
                .map(|(&core, op)| (op, core))
                .collect()
        } else {
            let batch = remaining.len().min(open);
            let matrix =
                CostMatrix::from_rows(costs[..batch].iter().map(|row| row.iter().copied()))
                    .map_err(solver_err)?;
            let solution =
                hungarian::solve(&hungarian::shift_to_nonnegative(&matrix)).map_err(solver_err)?;
            solution.col_of_row.into_iter().enumerate().collect()
        };

        let mut done = vec![false; remaining.len()];
        for (i, core) in placements {
            let op = remaining[i];
            plan.placed[op.qa] = Some(core);
            plan.placed[op.qb] = Some(core);
            plan.free[core] -= 2;
            done[i] = true;
        }
        let mut flags = done.into_iter();
        remaining.retain(|_| !flags.next().unwrap_or(false));
    }

    let core_of = plan
        .placed
        .into_iter()
        .map(|c| c.expect("every lifted qubit is placed by its operation"))
        .collect();
    Ok(Assignment::from_vec_unchecked(core_of))
}

/// Maps a whole circuit. Slice 0 is repaired from the block layout and is
/// not charged; every later transition is repaired from the previous slice.
pub fn map_circuit(
    circuit: &Circuit,
    arch: &Architecture,
    config: &HqaConfig,
) -> Result<AssignmentPath, HqaError> {
    let slices = crate::circuit::timeslice(circuit);
    map_slices(&slices, arch, config)
}

pub fn map_slices(
    slices: &TimeslicedCircuit,
    arch: &Architecture,
    config: &HqaConfig,
) -> Result<AssignmentPath, HqaError> {
    let mut current = initial_assignment(slices.num_qubits(), arch)?;
    let mut path = Vec::with_capacity(slices.len());
    for next in 0..slices.len() {
        current = hqa_step(&current, slices, next, arch, config)?;
        path.push(current.clone());
    }
    Ok(AssignmentPath::new(slices.num_qubits(), *arch, path)?)
}
