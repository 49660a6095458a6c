use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("lattice is not integral")]
    NotIntegral,
    #[error("vector does not lie in the lattice")]
    NotInLattice,
    #[error("sublattice is not contained in the lattice")]
    NotSublattice,
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("invalid rational literal {0:?}")]
    ParseRational(String),
    #[error("rank {rank} exceeds the supported bound {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("bound must be positive")]
    NonPositiveBound,
    #[error("lattice has no ambient coordinates")]
    NoCoordinates,
    #[error("target rank {target} is smaller than the lattice rank {rank}")]
    RankBelowLattice { target: usize, rank: usize },
    #[error("no table entry: {0}")]
    NoTableEntry(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, LatticeError>;
