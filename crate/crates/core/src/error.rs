use thiserror::Error;

/// Errors raised by the geometry kernels, scenario validation, the analytic
/// solvers and the catching-up integrator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("direction is undefined between coincident points or for a zero vector")]
    DegenerateDirection,
    #[error("identical circles intersect in infinitely many points")]
    InfiniteIntersections,
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("non-finite value in field `{0}`")]
    NonFinite(&'static str),
    #[error("invalid value for `{field}`: {reason}")]
    InvalidValue { field: &'static str, reason: String },
    #[error("start overlaps the obstacle: distance {distance} < {required}")]
    InfeasibleStart { distance: f64, required: f64 },
    #[error("destination lies inside the inflated obstacle")]
    DestinationInsideObstacle,
    #[error("agents and destination are not collinear (deviation {deviation})")]
    NotCollinear { deviation: f64 },
    #[error("agents {first} and {second} overlap initially (gap {gap})")]
    InitialOverlap {
        first: usize,
        second: usize,
        gap: f64,
    },
    #[error("corridor scenarios need 2 or 3 agents, got {0}")]
    BadAgentCount(usize),
    #[error("scenario kind `{found}` where `{expected}` was required")]
    WrongKind {
        expected: &'static str,
        found: String,
    },
    #[error("control must be positive, got {0}")]
    NonPositiveControl(f64),
    #[error("control {control} is below the contact bound {bound}")]
    BelowContactBound { control: f64, bound: f64 },
    #[error("controls would bring the agents into contact before T")]
    ContactWouldOccur,
    #[error("projection still violates constraints by {violation} after {iterations} passes")]
    ProjectionStalled { violation: f64, iterations: usize },
    #[error("empty feasible interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("quadratic is not strictly convex (leading coefficient {0})")]
    NotStrictlyConvex(f64),
    #[error("no feasible point for the quadratic program")]
    Infeasible,
    #[error("expected {expected} controls, got {found}")]
    ControlCount { expected: usize, found: usize },
    #[error("scenario document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
