//! Qubit-to-core mapping for multi-core quantum architectures.
//!
//! Two mappers are provided over a shared circuit/architecture model:
//!
//! * [`hqa`]: Hungarian Qubit Assignment, which repairs each timeslice
//!   transition by assigning the unfeasible two-qubit operations to cores
//!   with a minimum-cost linear assignment, optionally biased by look-ahead
//!   attraction towards cores.
//! * [`fgp_roee`]: fine-grained partitioning, which re-partitions the
//!   look-ahead interaction graph at every timeslice with relaxed overall
//!   extreme exchange.
//!
//! Both produce an [`partition::AssignmentPath`] whose cost is measured by
//! [`partition::count_communications`].

pub mod benchgen;
pub mod circuit;
pub mod fgp_roee;
pub mod hqa;
pub mod hungarian;
pub mod lookahead;
pub mod oracle;
pub mod partition;

pub use circuit::{parse_qasm, serialize_qasm, timeslice, Circuit, Gate, TimeslicedCircuit};
pub use partition::{count_communications, Architecture, Assignment, AssignmentPath};
