use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate identifier `{id}` at {location}")]
    DuplicateId { id: String, location: String },
    #[error("empty preset at {location}")]
    EmptyPreset { location: String },
    #[error("empty postset at {location}")]
    EmptyPostset { location: String },
    #[error("reference to undeclared place `{place}` at {location}")]
    DanglingPlace { place: String, location: String },
    #[error("net declares no {0}")]
    EmptyNet(&'static str),

    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("net is not 1-safe: firing {witness:?} puts a second token on place `{place}`")]
    NotSafe { witness: Vec<String>, place: String },
    #[error("reachable state count exceeds the limit of {0}")]
    StateLimit(usize),

    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("letters `{0}` and `{1}` are not independent")]
    NotIndependent(String, String),
    #[error("independence relation must be irreflexive (letter `{0}`)")]
    Reflexive(String),
    #[error("clique count exceeds the limit of {0}")]
    CliqueLimit(usize),
    #[error("{what} of {requested} exceeds the configured cap of {cap}")]
    Cap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("no root in the requested interval")]
    NoRootInRange,
    #[error("root cannot be isolated at the requested tolerance")]
    RootNotIsolable,
    #[error("tolerance must be positive")]
    BadTolerance,

    #[error("the action is not irreducible")]
    NotIrreducible,
    #[error("ill-defined action: letters `{a}` and `{b}` do not commute at state {state}")]
    IllDefinedAction { state: String, a: String, b: String },
    #[error("characteristic root is 1; cylinder probabilities do not decay")]
    DegenerateRoot,
    #[error("kernel of the Möbius matrix at q0 has dimension {dimension}")]
    KernelDimension {
        dimension: usize,
        basis: Vec<Vec<f64>>,
    },
    #[error("kernel vector of the Möbius matrix is not strictly positive: {0:?}")]
    NonPositiveKernel(Vec<f64>),
    #[error("residual {residual:e} of the state weights exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("negative first-clique weight {weight:e} for clique {clique} at state {state}")]
    NegativeWeight {
        state: String,
        clique: String,
        weight: f64,
    },
    #[error("zero continuation mass at pair ({state}, {clique})")]
    ZeroContinuation { state: String, clique: String },

    #[error("empty request: {0}")]
    EmptyRequest(&'static str),
    #[error("at least {min} runs are required, got {got}")]
    TooFewRuns { min: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
}
