use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArithError {
    #[error("malformed rational literal {0:?}")]
    Parse(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("malformed tree text: {0}")]
    Parse(String),
    #[error("vertex {0} does not exist")]
    InvalidVertex(usize),
    #[error("parent links contain a cycle through vertex {0}")]
    Cycle(usize),
    #[error("the forest has {0} components; a single tree is required")]
    Disconnected(usize),
    #[error("empty forest")]
    Empty,
    #[error("branch index {index} out of range ({count} branches)")]
    InvalidBranch { index: usize, count: usize },
    #[error("copy count must be at least 1")]
    ZeroCopies,
    #[error("duplication changes the diameter from {before} to {after}")]
    DiameterChanged { before: usize, after: usize },
    #[error("invalid unfolding spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagError {
    #[error("level {j} out of range (depth {depth})")]
    LevelOutOfRange { j: usize, depth: usize },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("empty interval: lower end is not below upper end")]
    EmptyInterval,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealizationError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("coupling weight must be nonzero")]
    ZeroCoupling,
    #[error("certificate check failed: {0}")]
    Certificate(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("input must be strictly increasing")]
    Unsorted,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
}
