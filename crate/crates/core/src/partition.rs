//! Architecture and assignment model, validity, and the communication metric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Timeslice, TimeslicedCircuit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error(
        "architecture needs at least one core of positive capacity (got {num_cores} x {capacity})"
    )]
    EmptyArchitecture { num_cores: usize, capacity: usize },
    #[error("{num_qubits} qubits do not fit in {num_cores} cores of capacity {capacity}")]
    InsufficientCapacity {
        num_qubits: usize,
        num_cores: usize,
        capacity: usize,
    },
    #[error("qubit {qubit} is mapped to core {core}, but there are only {num_cores} cores")]
    CoreOutOfRange {
        qubit: usize,
        core: usize,
        num_cores: usize,
    },
    #[error("core {core} holds {load} qubits, exceeding capacity {capacity}")]
    OverCapacity {
        core: usize,
        load: usize,
        capacity: usize,
    },
    #[error("path assignments disagree on the number of qubits")]
    RaggedPath,
}

/// `num_cores` cores of uniform `capacity`, all-to-all connected inside and between cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    num_cores: usize,
    capacity: usize,
}

impl Architecture {
    pub fn new(num_cores: usize, capacity: usize) -> Result<Self, PartitionError> {
        if num_cores == 0 || capacity == 0 {
            return Err(PartitionError::EmptyArchitecture {
                num_cores,
                capacity,
            });
        }
        Ok(Architecture {
            num_cores,
            capacity,
        })
    }

    pub fn num_cores(&self) -> usize {
        self.num_cores
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total_capacity(&self) -> usize {
        self.num_cores * self.capacity
    }

    pub fn check_fits(&self, num_qubits: usize) -> Result<(), PartitionError> {
        if num_qubits > self.total_capacity() {
            return Err(PartitionError::InsufficientCapacity {
                num_qubits,
                num_cores: self.num_cores,
                capacity: self.capacity,
            });
        }
        Ok(())
    }
}

/// Total map from qubit index to core index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    core_of: Vec<usize>,
}

impl Assignment {
    /// Builds an assignment, checking core indices and per-core capacity.
    pub fn new(core_of: Vec<usize>, arch: &Architecture) -> Result<Self, PartitionError> {
        let mut load = vec![0usize; arch.num_cores()];
        for (qubit, &core) in core_of.iter().enumerate() {
            if core >= arch.num_cores() {
                return Err(PartitionError::CoreOutOfRange {
                    qubit,
                    core,
                    num_cores: arch.num_cores(),
                });
            }
            load[core] += 1;
        }
        if let Some((core, &l)) = load.iter().enumerate().find(|(_, &l)| l > arch.capacity()) {
            return Err(PartitionError::OverCapacity {
                core,
                load: l,
                capacity: arch.capacity(),
            });
        }
        Ok(Assignment { core_of })
    }

    /// Wraps a map the caller has already checked.
    pub(crate) fn from_vec_unchecked(core_of: Vec<usize>) -> Self {
        Assignment { core_of }
    }

    pub fn num_qubits(&self) -> usize {
        self.core_of.len()
    }

    pub fn core_of(&self, qubit: usize) -> usize {
        self.core_of[qubit]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.core_of
    }

    pub fn loads(&self, num_cores: usize) -> Vec<usize> {
        let mut load = vec![0; num_cores];
        for &c in &self.core_of {
            load[c] += 1;
        }
        load
    }

    pub fn respects_capacity(&self, arch: &Architecture) -> bool {
        self.core_of.iter().all(|&c| c < arch.num_cores())
            && self
                .loads(arch.num_cores())
                .iter()
                .all(|&l| l <= arch.capacity())
    }

    /// Qubits whose core differs between `self` and `next`.
    pub fn relocations(&self, next: &Assignment) -> usize {
        self.core_of
            .iter()
            .zip(&next.core_of)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Residents of each core, in ascending qubit order.
    pub fn residents(&self, num_cores: usize) -> Vec<Vec<usize>> {
        let mut residents = vec![Vec::new(); num_cores];
        for (q, &c) in self.core_of.iter().enumerate() {
            residents[c].push(q);
        }
        residents
    }
}

/// Block layout: qubit `i` goes to core `i / capacity`.
pub fn initial_assignment(
    num_qubits: usize,
    arch: &Architecture,
) -> Result<Assignment, PartitionError> {
    arch.check_fits(num_qubits)?;
    Ok(Assignment {
        core_of: (0..num_qubits).map(|q| q / arch.capacity()).collect(),
    })
}

/// True iff every two-qubit gate of `slice` is core-local and capacity holds.
pub fn is_valid(assignment: &Assignment, slice: &Timeslice, arch: &Architecture) -> bool {
    assignment.respects_capacity(arch)
        && slice
            .interacting_pairs()
            .iter()
            .all(|p| assignment.core_of(p.low()) == assignment.core_of(p.high()))
}

/// Index of the first slice whose assignment is invalid, if any.
pub fn first_invalid_slice(path: &AssignmentPath, slices: &TimeslicedCircuit) -> Option<usize> {
    if path.len() != slices.len() {
        return Some(path.len().min(slices.len()));
    }
    path.assignments()
        .iter()
        .zip(slices.slices())
        .position(|(a, s)| !is_valid(a, s, &path.arch))
}

/// One assignment per timeslice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentPath {
    num_qubits: usize,
    arch: Architecture,
    assignments: Vec<Assignment>,
}

impl AssignmentPath {
    pub fn new(
        num_qubits: usize,
        arch: Architecture,
        assignments: Vec<Assignment>,
    ) -> Result<Self, PartitionError> {
        arch.check_fits(num_qubits)?;
        for a in &assignments {
            if a.num_qubits() != num_qubits {
                return Err(PartitionError::RaggedPath);
            }
            if !a.respects_capacity(&arch) {
                // Rebuild through the checked constructor to report why.
                Assignment::new(a.core_of.clone(), &arch)?;
            }
        }
        Ok(AssignmentPath {
            num_qubits,
            arch,
            assignments,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Serializes as `{num_qubits, num_cores, capacity, slices}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&PathDocument::from(self)).expect("path documents always serialize")
    }

    pub fn to_document(&self) -> PathDocument {
        PathDocument::from(self)
    }
}

/// The JSON wire form of an [`AssignmentPath`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDocument {
    pub num_qubits: usize,
    pub num_cores: usize,
    pub capacity: usize,
    pub slices: Vec<Vec<usize>>,
}

impl From<&AssignmentPath> for PathDocument {
    fn from(path: &AssignmentPath) -> Self {
        PathDocument {
            num_qubits: path.num_qubits,
            num_cores: path.arch.num_cores(),
            capacity: path.arch.capacity(),
            slices: path.assignments.iter().map(|a| a.core_of.clone()).collect(),
        }
    }
}

impl TryFrom<PathDocument> for AssignmentPath {
    type Error = PartitionError;

    fn try_from(doc: PathDocument) -> Result<Self, Self::Error> {
        let arch = Architecture::new(doc.num_cores, doc.capacity)?;
        let assignments = doc
            .slices
            .into_iter()
            .map(|core_of| Assignment::new(core_of, &arch))
            .collect::<Result<Vec<_>, _>>()?;
        AssignmentPath::new(doc.num_qubits, arch, assignments)
    }
}

/// Total qubit relocations between consecutive assignments.
///
/// The first assignment is the free initial layout and is never charged.
pub fn count_communications(path: &AssignmentPath) -> usize {
    path.assignments
        .windows(2)
        .map(|w| w[0].relocations(&w[1]))
        .sum()
}

/// Relocations charged at each transition `t -> t + 1`.
pub fn communications_per_transition(path: &AssignmentPath) -> Vec<usize> {
    path.assignments
        .windows(2)
        .map(|w| w[0].relocations(&w[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{timeslice, Circuit, Gate};

    fn arch(n: usize, c: usize) -> Architecture {
        Architecture::new(n, c).unwrap()
    }

    fn assignment(v: &[usize], a: &Architecture) -> Assignment {
        Assignment::new(v.to_vec(), a).unwrap()
    }

    #[test]
    fn block_initial_layout() {
        let a = arch(2, 2);
        assert_eq!(initial_assignment(4, &a).unwrap().as_slice(), &[0, 0, 1, 1]);
        assert_eq!(initial_assignment(3, &a).unwrap().as_slice(), &[0, 0, 1]);
        assert_eq!(
            initial_assignment(5, &a),
            Err(PartitionError::InsufficientCapacity {
                num_qubits: 5,
                num_cores: 2,
                capacity: 2
            })
        );
    }

    #[test]
    fn validity_requires_co_located_pairs() {
        let a = arch(2, 2);
        let s = timeslice(&Circuit::new(4, vec![Gate::two("cx", 0, 1)]).unwrap());
        assert!(is_valid(&assignment(&[0, 0, 1, 1], &a), s.slice(0), &a));
        assert!(!is_valid(&assignment(&[0, 1, 0, 1], &a), s.slice(0), &a));

        let empty = Timeslice::default();
        assert!(is_valid(&assignment(&[1, 0, 1, 0], &a), &empty, &a));
    }

    #[test]
    fn capacity_is_enforced() {
        let a = arch(2, 2);
        assert_eq!(
            Assignment::new(vec![0, 0, 0], &a),
            Err(PartitionError::OverCapacity {
                core: 0,
                load: 3,
                capacity: 2
            })
        );
        assert!(matches!(
            Assignment::new(vec![0, 2], &a),
            Err(PartitionError::CoreOutOfRange { core: 2, .. })
        ));
    }

    fn path(rows: &[&[usize]], a: Architecture) -> AssignmentPath {
        let n = rows[0].len();
        AssignmentPath::new(n, a, rows.iter().map(|r| assignment(r, &a)).collect()).unwrap()
    }

    #[test]
    fn counts_relocations() {
        let a = arch(2, 2);
        assert_eq!(
            count_communications(&path(&[&[0, 0, 1, 1], &[0, 0, 1, 1]], a)),
            0
        );
        assert_eq!(count_communications(&path(&[&[0, 0, 1], &[0, 1, 1]], a)), 1);
        assert_eq!(
            count_communications(&path(&[&[0, 0, 1, 1], &[0, 1, 0, 1]], a)),
            2
        );
        assert_eq!(
            communications_per_transition(&path(&[&[0, 0, 1, 1], &[0, 1, 0, 1], &[0, 1, 0, 1]], a)),
            vec![2, 0]
        );
    }

    #[test]
    fn json_wire_format() {
        let p = path(&[&[0, 0, 1], &[0, 1, 1]], arch(2, 2));
        let json = p.to_json();
        assert_eq!(
            json,
            r#"{"num_qubits":3,"num_cores":2,"capacity":2,"slices":[[0,0,1],[0,1,1]]}"#
        );
        let doc: PathDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&doc).unwrap(), json);
        assert_eq!(AssignmentPath::try_from(doc).unwrap(), p);
    }
}
