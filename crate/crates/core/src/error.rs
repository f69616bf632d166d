use std::path::PathBuf;

use thiserror::Error;

use crate::molecule::RovibronicLevel;

/// Errors raised by the simulation library.
///
/// Variants split into two families: invalid input (bad constants, bad
/// quantum numbers, unreadable files) and violated physics preconditions
/// (resonant laser, unstable integration). The CLI maps them onto different
/// exit codes through [`Error::is_physics`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),

    #[error("vibrational level nu={nu} is not bound (nu_max={nu_max})")]
    UnboundLevel { nu: u32, nu_max: u32 },

    #[error("forbidden Q branch: J'=J={0} in a Sigma-Sigma transition")]
    ForbiddenBranch(u32),

    #[error(
        "overlap quadrature did not converge for nu={nu}, nu'={nu_prime}: \
         grid halving changed the value by {change:.3e}"
    )]
    QuadratureNotConverged { nu: u32, nu_prime: u32, change: f64 },

    #[error(
        "nonresonance condition |delta| > {threshold} g violated for {level}: \
         delta={delta_cm1:.4e} cm^-1, g={g_cm1:.4e} cm^-1"
    )]
    Resonant {
        level: RovibronicLevel,
        delta_cm1: f64,
        g_cm1: f64,
        threshold: f64,
    },

    #[error(
        "trajectory integration unstable: halving the step count changed the \
         impulse by {relative_change:.3e} (relative)"
    )]
    IntegratorUnstable { relative_change: f64 },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for violated physics preconditions, as opposed to bad input.
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::Resonant { .. }
                | Error::IntegratorUnstable { .. }
                | Error::QuadratureNotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
