use thiserror::Error;

/// Errors raised while reading instances and matchings from text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown vertex `{name}`")]
    UnknownVertex { line: usize, name: String },
    #[error("line {line}: duplicate vertex `{name}`")]
    DuplicateVertex { line: usize, name: String },
    #[error("line {line}: `{name}` listed twice in the preference list of `{owner}`")]
    DuplicatePreference {
        line: usize,
        owner: String,
        name: String,
    },
    #[error("line {line}: `{name}` is on the same side as `{owner}`")]
    SameSidePreference {
        line: usize,
        owner: String,
        name: String,
    },
    #[error("line {line}: second preference list for `{name}`")]
    DuplicatePrefLine { line: usize, name: String },
    #[error("vertex `{name}` has no PREF line")]
    MissingPrefLine { name: String },
    #[error("non-mutual preference: `{from}` lists `{to}` but `{to}` does not list `{from}`")]
    NonMutual { from: String, to: String },
    #[error("vertex `{name}`: lower quota {lower} exceeds upper quota {upper}")]
    LowerExceedsUpper {
        name: String,
        lower: usize,
        upper: usize,
    },
    #[error("vertex `{name}`: upper quota must be positive")]
    ZeroUpper { name: String },
    #[error("line {line}: ({a}, {b}) is not an edge of the instance")]
    NotAnEdge { line: usize, a: String, b: String },
    #[error("line {line}: pair ({a}, {b}) listed twice")]
    DuplicatePair { line: usize, a: String, b: String },
    #[error("matching exceeds the upper quota of `{name}`")]
    OverQuota { name: String },
}

/// Errors raised by the matching, voting and certificate operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("({a}, {b}) is not an edge of the instance")]
    NotAnEdge { a: usize, b: usize },
    #[error("vertex {vertex} exceeds its upper quota")]
    OverQuota { vertex: String },
    #[error("{partner} is not acceptable to {vertex}")]
    NotAcceptable { vertex: String, partner: String },
    #[error("inconsistent correspondence at {vertex}: {reason}")]
    BadCorrespondence { vertex: String, reason: String },
    #[error("rival is not critical: deficiency ({def_a}, {def_b}) but the certificate has ({dummies_a}, {dummies_b}) dummies")]
    NotCritical {
        def_a: usize,
        def_b: usize,
        dummies_a: usize,
        dummies_b: usize,
    },
    #[error("matched edge ({a}, {b}) carries no level")]
    MissingLevel { a: usize, b: usize },
    #[error("level {level} outside 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("edge is not part of the cloned graph")]
    NotInClonedGraph,
    #[error("clone mapping failed: {0}")]
    CloneMapping(String),
}

/// Errors raised by random instance generation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("both sides need at least one vertex (got {n_a} x {n_b})")]
    EmptySide { n_a: usize, n_b: usize },
    #[error("max_upper must be positive")]
    ZeroUpper,
    #[error("lq_fraction {0} outside [0, 1]")]
    LqFraction(f64),
    #[error("edge_density {0} outside (0, 1]")]
    Density(f64),
}

/// Errors raised by the exhaustive oracle.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {edges} edges, budget allows {budget}")]
    BudgetExceeded { edges: usize, budget: usize },
}
