use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not an invertible polynomial: {0}")]
    NotInvertible(String),
    #[error("weight system has no positive solution")]
    NoPositiveSolution,
    #[error("weights {weights:?} with degree {degree} do not satisfy the Calabi-Yau condition")]
    NotCalabiYau { weights: Vec<i64>, degree: i64 },
    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("group is not contained in the maximal diagonal symmetry group")]
    GroupNotInMax,
    #[error("invalid form symbol: {0}")]
    InvalidSymbol(String),
    #[error("degenerate quadratic form")]
    DegenerateForm,
    #[error("unknown lattice: {0}")]
    UnknownLattice(String),
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("lattice is degenerate")]
    Degenerate,
    #[error("sublattice is not contained in the ambient lattice")]
    NotContained,
    #[error("invalid curve configuration: {0}")]
    InvalidConfiguration(String),
    #[error("not an automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("orbit divisors span rank {found}, expected {expected}")]
    RankDeficiency { expected: usize, found: usize },
    #[error("data error: {0}")]
    Data(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
