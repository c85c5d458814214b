use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The truncated Fock box does not hold enough probability mass.
    #[error(
        "truncation failure: captured mass {captured:.3e} short of 1 by {deficit:.3e} \
         (tolerance {tolerance:.1e}, n_max = {n_max})"
    )]
    Truncation {
        captured: f64,
        deficit: f64,
        tolerance: f64,
        n_max: usize,
    },

    /// Captured mass above one: the amplitudes lost precision.
    #[error("numerical degeneracy: captured mass exceeds 1 by {excess:.3e}")]
    Unnormalized { excess: f64 },

    #[error("no herald events: probability of exactly one photon at the herald port is zero")]
    NoHeraldEvents,

    #[error(
        "insufficient bracket: found {found} of {wanted} roots below omega~ = {scanned_to:.3}"
    )]
    InsufficientBracket {
        found: usize,
        wanted: usize,
        scanned_to: f64,
    },

    #[error(
        "degenerate point at k~ = {k_tilde:.6e}, omega~ = {omega_tilde:.9}: dF/domega vanishes"
    )]
    DegeneratePoint { k_tilde: f64, omega_tilde: f64 },

    #[error(
        "group velocity v_g/c = {target:.4e} not reachable in band {band}; \
         band range is [0, {max:.4e}]"
    )]
    UnachievableGroupVelocity { band: usize, target: f64, max: f64 },

    #[error("group velocity is zero; squeeze parameter is singular at a band edge")]
    SingularGroupVelocity,

    #[error("empty session: n_pulses must be positive")]
    EmptySession,

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) | Error::EmptySession => 2,
            Error::Truncation { .. } => 3,
            Error::NoHeraldEvents
            | Error::Unnormalized { .. }
            | Error::InsufficientBracket { .. }
            | Error::DegeneratePoint { .. }
            | Error::UnachievableGroupVelocity { .. }
            | Error::SingularGroupVelocity => 4,
            Error::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
