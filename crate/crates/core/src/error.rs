//! Shared error type for model, control, simulation, and monitoring code.
//!
//! Parsing of TPTP text and prover process failures have their own types
//! in [`crate::fof`]; everything numeric funnels through [`Error`].

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor was handed a value that breaks a documented invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A non-finite number reached a place that requires finite input.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Pitch too close to ±π/2, where the Euler-rate transform loses rank.
    #[error("gimbal singularity: |theta| = {theta:.6} is within 1e-6 of pi/2")]
    GimbalSingularity { theta: f64 },

    /// J(η) is numerically unusable even though the state is inside the
    /// gimbal guard band.
    #[error("inertia matrix condition number {cond:.3e} exceeds the 1e8 cap")]
    IllConditioned { cond: f64 },

    /// A rotor speed at or above the hardware limit was passed to mixing.
    #[error("rotor {rotor} speed {omega:.3} exceeds omega_max = {omega_max:.3}")]
    RotorOverspeed {
        rotor: usize,
        omega: f64,
        omega_max: f64,
    },

    /// The requested torque/thrust combination needs a negative squared
    /// rotor speed; no physical speeds realize it.
    #[error("infeasible rotor mix: rotor {rotor} needs omega^2 = {squared:.6e}")]
    InfeasibleMix { rotor: usize, squared: f64 },

    /// The closed-loop error matrix A has an eigenvalue with Re ≥ 0, so
    /// no Lyapunov certificate exists.
    #[error("matrix is not Hurwitz: max Re(lambda) = {max_re:.6e}")]
    NonHurwitz { max_re: f64 },

    /// The Lyapunov solve produced a residual above tolerance, or a Q
    /// that is not positive definite.
    #[error("lyapunov solve failed: {0}")]
    LyapunovSolve(String),

    /// Scenario or configuration cross-validation failed.
    #[error("scenario rejected: {0}")]
    Scenario(String),

    /// The simulation hit a state it cannot integrate through; carries
    /// the time and the underlying cause as a diagnostic.
    #[error("simulation aborted at t = {t:.6}: {source}")]
    SimAbort {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// Monitor input went backwards in time.
    #[error("out-of-order sample: t = {t:.9} after t = {prev:.9}")]
    OutOfOrderSample { prev: f64, t: f64 },

    /// A trajectory CSV row that cannot be parsed; `line` is 1-based and
    /// counts the header.
    #[error("malformed CSV row at line {line}: {msg}")]
    MalformedCsv { line: usize, msg: String },
}

impl Error {
    /// True when the error is (or wraps) a state-space domain failure,
    /// the condition a simulation abort reports as a singularity.
    pub fn is_singularity(&self) -> bool {
        match self {
            Error::GimbalSingularity { .. } | Error::IllConditioned { .. } => true,
            Error::SimAbort { source, .. } => source.is_singularity(),
            _ => false,
        }
    }
}
