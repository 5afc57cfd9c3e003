use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("element {element} is not in the {family} group")]
    ElementNotInGroup { element: String, family: &'static str },
    #[error("invalid Cayley table: {0}")]
    InvalidTable(String),
    #[error("bad group description at `{key}`: {reason}")]
    Parse { key: String, reason: String },
    #[error("operation not supported for the {0} family")]
    UnsupportedFamily(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("duplicate vertex label {0:?}")]
    DuplicateVertex(String),
    #[error("self-loop at {0:?}")]
    SelfLoop(String),
    #[error("partition does not match the twin classes: {0}")]
    PartitionMismatch(String),
    #[error("bad graph document: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error("window {window} does not fit the {family} family")]
    FamilyMismatch { window: String, family: &'static str },
    #[error("window carrier has {size} vertices, above the cap of {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("window is not valid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("operation not supported for the {0} family")]
    UnsupportedFamily(&'static str),
    #[error("component contains elements of finite order: {0}")]
    TorsionComponent(String),
    #[error("component splits into {count} N-power components inside the window, expected 2")]
    UnexpectedSplit { count: usize },
    #[error("second half is not the inverse image of the first: {0}")]
    InversionMismatch(String),
    #[error("not an isomorphism: {0}")]
    NotAnIsomorphism(String),
    #[error("expected a {expected} bundle, got {found}")]
    WrongVariant { expected: &'static str, found: &'static str },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DirectionError {
    #[error("operation not supported for the {0} family")]
    UnsupportedFamily(&'static str),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("{0} and {1} are not adjacent in the Z±-power graph")]
    NotAdjacent(String, String),
    #[error("degenerate pair: {0}")]
    DegeneratePair(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("mixed orientation verdict on {0}")]
    MixedVerdict(String),
    #[error("expected a {expected} bundle, got {found}")]
    WrongVariant { expected: &'static str, found: &'static str },
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("unknown check {0:?}")]
    Unknown(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Window(#[from] WindowError),
}

impl CheckError {
    /// Whether the failure is the resource cap rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, CheckError::Window(WindowError::TooLarge { .. }))
    }
}
