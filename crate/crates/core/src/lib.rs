//! Symmetry-protected boundary memory: a stabilizer-model toolkit for a
//! pair of 3d toric codes glued along a 2d toric code boundary.

pub mod barrier;
pub mod codes;
pub mod complex;
pub mod error;
pub mod pauli;
pub mod symmetry;
pub mod thermal;
pub mod verify;

pub use codes::{
    build_condensing_terms, build_logicals, build_spbm, build_symmetry_generators,
    build_toric_code_2d, build_z4_defect, LogicalKind, LogicalPair, ModelKind, StabilizerModel,
    SymmetryGenerator, Term, TermFamily, TermLabel,
};
pub use complex::{build_lattice, Axis, CellId, CellKind, LatticeGeometry};
pub use error::{Error, Result};
pub use pauli::{PauliOp, QuditId, QuditRegistry, Sector};
pub use symmetry::{enumerate_allowed_moves, is_allowed, Move, MoveSet};
pub use verify::{commutation_audit, factorization_audit, full_audit, logical_audit, z4_membrane_phase, AuditReport};
pub use thermal::{memory_experiment, run_trial, Dynamics, DynamicsParams, ErrorState, ModelParams, TrialRecord};
pub use barrier::{bare_schedule, canonical_schedule, min_barrier_subset_dp, BarrierReport, Schedule};
