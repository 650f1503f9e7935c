//! Entanglement structure of small multipartite states, and teleportation
//! over shared ∣N¹⟩ = (∣0…0⟩ + ∣1…1⟩)/√2 channels with a symbolic graph
//! evolving alongside the exact state vector.
//!
//! The crate has three layers:
//!
//! * [`tensor`] + [`states`] — dense complex linear algebra over labeled
//!   registers (Kronecker products, partial trace/transpose, a cyclic Jacobi
//!   Hermitian eigensolver, Schmidt ranks) and constructors for the channel
//!   family, the Bell and rotated bases, and the four-qubit + qudit
//!   benchmark state;
//! * [`analyzer`] + [`graph`] — the partial-transpose sweep that decides
//!   which party subsets are entangled, the resulting entanglement
//!   polynomial with its redundancy rule, and the polynomial ↔ graph
//!   calculus with virtual nodes (DOT/JSON export);
//! * [`teleport`] — N-party teleportation protocols (pairwise reduced-Bell
//!   splitting, sequential rotations, hybrids) executed branch by branch on
//!   the exact state, with per-stage graph snapshots, a classical-bit
//!   ledger, receiver corrections, and residual-resource accounting.
//!
//! The [`mod@reference`] module rechecks every built-in reference table of
//! the benchmark state; the [`cli`] module backs the `entangraph` binary.

pub mod analyzer;
pub mod cli;
pub mod error;
pub mod graph;
pub mod reference;
pub mod states;
pub mod teleport;
pub mod tensor;

pub use error::{Error, Result};
