use std::path::PathBuf;

use thiserror::Error;

/// Why an allocation problem has no feasible point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Infeasibility {
    /// Neither peak-power pattern lets this pair reach its quality floors,
    /// no matter how much bandwidth it gets.
    #[error("pair {pair}: quality floors unreachable with the available peak powers")]
    PowerCeiling { pair: usize },
    /// Every pair is individually feasible but the minimum bandwidths add up
    /// to more than the system has.
    #[error("minimum bandwidths sum to {required:.6} Hz but only {available:.6} Hz are available")]
    TotalBandwidth { required: f64, available: f64 },
    /// A pair cannot reach its quality floors on a fixed bandwidth share.
    #[error("pair {pair}: quality floors unreachable on a bandwidth share of {bandwidth:.6} Hz")]
    FixedShare { pair: usize, bandwidth: f64 },
    /// A single link cannot reach a requested kernel value.
    #[error("target V = {target:.6e} unreachable (best attainable {attainable:.6e})")]
    Target { target: f64, attainable: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("infeasible: {0}")]
    Infeasible(#[from] Infeasibility),
    /// Every peak-power pattern violated a power cap during projection.
    #[error("no peak-power pattern reaches the projection origin")]
    NoFeasiblePattern,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("oracle guard: {0}")]
    Guard(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Infeasible(_) => "infeasible",
            Error::NoFeasiblePattern => "no_feasible_pattern",
            Error::Degenerate(_) => "degenerate",
            Error::Contract(_) => "contract",
            Error::Guard(_) => "guard",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
