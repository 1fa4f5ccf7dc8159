use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by all modules of the crate.
///
/// Scalar payloads are carried as `f64` regardless of the scalar type the
/// computation ran in, so the enum stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid counts (b={b}, g={g}) for n={n}")]
    InvalidCounts { b: u64, g: u64, n: u64 },

    #[error("event {event} cannot be applied at (b={b}, g={g})")]
    InvalidEvent {
        event: &'static str,
        b: u64,
        g: u64,
    },

    #[error("population n={n} exceeds capacity {max} for per-vertex simulation")]
    Capacity { n: u64, max: u64 },

    #[error("integration left the invariant region at t={t}: (b={b}, g={g}); reduce the step")]
    RegionExit { t: f64, b: f64, g: f64 },

    #[error("infeasible beta={beta} at lambda={lambda}: {reason}")]
    InfeasibleBeta {
        lambda: f64,
        beta: f64,
        reason: String,
    },

    #[error("alpha={alpha} violates the survival-design constraints: {reason}")]
    InfeasibleAlpha { alpha: f64, reason: String },

    #[error("no feasible alpha on the search grid for lambda={lambda}, beta={beta}")]
    InfeasibleDesign { lambda: f64, beta: f64 },

    #[error("state (B={b}, S={s}) lies outside the survival box scaled by n={n}")]
    OutsideBox { b: i64, s: i64, n: u64 },
}

impl Error {
    /// True for errors that mean "the requested supercritical design cannot
    /// be built", as opposed to bad arguments or I/O trouble.
    pub fn is_infeasible_design(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleBeta { .. } | Error::InfeasibleAlpha { .. } | Error::InfeasibleDesign { .. }
        )
    }
}
