use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error("level has no rows or columns")]
    EmptyLevel,
    #[error("unknown tile character {ch:?} at row {row}, column {col}")]
    UnknownTileChar { row: usize, col: usize, ch: char },
    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRows { expected: usize, got: usize, row: usize },
    #[error("tile count {got} does not match grid size {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("column 0 has no Solid tile with Empty space above it")]
    NoSpawn,
    #[error("overlay mark at row {row}, column {col} is outside the level")]
    OverlayOutOfBounds { row: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error("cannot step a state that has already ended")]
    SteppedTerminalState,
    #[error("cannot plan from a state that has already ended")]
    PlanOnTerminalState,
    #[error("max_ticks must be positive")]
    ZeroTickLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("ability needs a perfect and a blind run of the same persona")]
    MismatchedPersona,
    #[error("coefficient of variation of an empty list")]
    EmptyList,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatentError {
    #[error("latent component {index} is not finite")]
    NonFiniteComponent { index: usize },
    #[error("latent vector has {got} components, expected {expected}")]
    WrongLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CmaError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("evaluation budget exhausted ({used} of {budget} used)")]
    BudgetExhausted { used: usize, budget: usize },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fitness {value} at index {index} is not finite")]
    NonFiniteFitness { index: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("rank-sum test needs at least one observation per sample")]
    EmptySample,
}
