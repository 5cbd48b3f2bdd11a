use thiserror::Error;

use crate::complex::CellId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry {lx}x{lz}x{depth}: every extent must be at least 2")]
    InvalidGeometry { lx: usize, lz: usize, depth: usize },

    #[error("cell {0} is not part of the lattice")]
    InvalidCell(CellId),

    #[error("cell {0} does not lie on the y=0 boundary plane")]
    NotOnBoundary(CellId),

    #[error("qudit {qudit} has dimension {left} in one operand and {right} in the other")]
    RegistryMismatch { qudit: u32, left: u8, right: u8 },

    #[error("qudit index {0} is not in the registry")]
    UnknownQudit(u32),

    #[error("GF(2) linear algebra requires qubits; qudit {0} has dimension 4")]
    UnsupportedDimension(u32),

    #[error("syndrome is not in the image of the commutation map")]
    InfeasibleSyndrome,

    #[error("model {0} has no boundary sector")]
    MissingBoundary(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown logical operator {0}")]
    UnknownLogical(String),

    #[error("no legal schedule for {logical}: step {step} violates the enforced symmetry")]
    NoLegalSchedule { logical: String, step: usize },

    #[error("move support of size {0} exceeds the oracle limit of 20")]
    SupportTooLarge(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
