//! Exact minimum communications for tiny instances.
//!
//! Enumerates every capacity-respecting qubit map and runs a shortest-path
//! dynamic program over the slices, restricted at each slice to maps that
//! make it valid. Slice 0 is free, as in the mappers.

use thiserror::Error;

use crate::circuit::TimeslicedCircuit;
use crate::partition::{is_valid, Architecture, Assignment, AssignmentPath, PartitionError};

/// Largest number of candidate maps the oracle will enumerate.
pub const MAX_STATES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("{num_cores}^{num_qubits} candidate maps exceed the oracle limit")]
    TooLarge { num_qubits: usize, num_cores: usize },
    #[error("slice {slice} has no valid assignment")]
    NoValidAssignment { slice: usize },
}

/// Every map of `num_qubits` qubits to cores that respects capacity, in
/// lexicographic order of the core vector.
pub fn capacity_respecting_maps(
    num_qubits: usize,
    arch: &Architecture,
) -> Result<Vec<Assignment>, OracleError> {
    arch.check_fits(num_qubits)?;
    let k = arch.num_cores();
    let total = u32::try_from(num_qubits)
        .ok()
        .and_then(|n| k.checked_pow(n))
        .filter(|&t| t <= MAX_STATES)
        .ok_or(OracleError::TooLarge {
            num_qubits,
            num_cores: k,
        })?;
    let mut out = Vec::new();
    for code in 0..total {
        let mut cores = vec![0; num_qubits];
        let mut rest = code;
        for slot in cores.iter_mut().rev() {
            *slot = rest % k;
            rest /= k;
        }
        if let Ok(a) = Assignment::new(cores, arch) {
            out.push(a);
        }
    }
    Ok(out)
}

/// Minimum-communication valid path, with its cost.
pub fn optimal_path(
    slices: &TimeslicedCircuit,
    arch: &Architecture,
) -> Result<(usize, AssignmentPath), OracleError> {
    let maps = capacity_respecting_maps(slices.num_qubits(), arch)?;
    if slices.is_empty() {
        return Ok((
            0,
            AssignmentPath::new(slices.num_qubits(), *arch, Vec::new())?,
        ));
    }
    let valid_at = |t: usize| -> Result<Vec<usize>, OracleError> {
        let v: Vec<usize> = (0..maps.len())
            .filter(|&i| is_valid(&maps[i], slices.slice(t), arch))
            .collect();
        if v.is_empty() {
            Err(OracleError::NoValidAssignment { slice: t })
        } else {
            Ok(v)
        }
    };

    let mut layer = valid_at(0)?;
    let mut cost = vec![0usize; layer.len()];
    // back[t][j]: index into layer t - 1 of the predecessor of layer t entry j.
    let mut layers = vec![layer.clone()];
    let mut back: Vec<Vec<usize>> = vec![Vec::new()];
    for t in 1..slices.len() {
        let next = valid_at(t)?;
        let mut next_cost = Vec::with_capacity(next.len());
        let mut next_back = Vec::with_capacity(next.len());
        for &to in &next {
            let (arg, best) = layer
                .iter()
                .zip(&cost)
                .map(|(&from, &c)| c + maps[from].relocations(&maps[to]))
                .enumerate()
                .min_by_key(|&(_, c)| c)
                .expect("layers are never empty");
            next_cost.push(best);
            next_back.push(arg);
        }
        layer = next;
        cost = next_cost;
        layers.push(layer.clone());
        back.push(next_back);
    }

    let (mut j, &best) = cost
        .iter()
        .enumerate()
        .min_by_key(|&(_, c)| c)
        .expect("layers are never empty");
    let mut picks = vec![0; slices.len()];
    for t in (0..slices.len()).rev() {
        picks[t] = layers[t][j];
        if t > 0 {
            j = back[t][j];
        }
    }
    let path = picks.into_iter().map(|i| maps[i].clone()).collect();
    Ok((best, AssignmentPath::new(slices.num_qubits(), *arch, path)?))
}

pub fn optimal_communications(
    slices: &TimeslicedCircuit,
    arch: &Architecture,
) -> Result<usize, OracleError> {
    optimal_path(slices, arch).map(|(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{timeslice, Circuit, Gate};
    use crate::partition::count_communications;

    #[test]
    fn enumerates_balanced_maps() {
        let arch = Architecture::new(2, 2).unwrap();
        let maps = capacity_respecting_maps(4, &arch).unwrap();
        assert_eq!(maps.len(), 6);
        let arch = Architecture::new(2, 3).unwrap();
        // 2^4 minus the two maps putting all four qubits together.
        assert_eq!(capacity_respecting_maps(4, &arch).unwrap().len(), 14);
    }

    #[test]
    fn ghz_four_regroups_twice() {
        // cx(0,1) | cx(1,2) | cx(2,3) on two cores of two: each slice needs
        // a different pairing, and every change of pairing moves two qubits.
        let c = Circuit::new(
            4,
            vec![
                Gate::two("cx", 0, 1),
                Gate::two("cx", 1, 2),
                Gate::two("cx", 2, 3),
            ],
        )
        .unwrap();
        let arch = Architecture::new(2, 2).unwrap();
        let s = timeslice(&c);
        let (best, path) = optimal_path(&s, &arch).unwrap();
        assert_eq!(best, count_communications(&path));
        assert_eq!(best, 4);
    }

    #[test]
    fn rejects_large_instances() {
        let arch = Architecture::new(4, 8).unwrap();
        assert!(matches!(
            capacity_respecting_maps(20, &arch),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn reports_infeasible_slices() {
        let c = Circuit::new(
            6,
            vec![
                Gate::two("cx", 0, 1),
                Gate::two("cx", 2, 3),
                Gate::two("cx", 4, 5),
            ],
        )
        .unwrap();
        let arch = Architecture::new(2, 3).unwrap();
        assert_eq!(
            optimal_communications(&timeslice(&c), &arch),
            Err(OracleError::NoValidAssignment { slice: 0 })
        );
    }
}
