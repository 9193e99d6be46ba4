use std::path::PathBuf;

use crate::kinematics::Zone;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("energy {energy} does not exceed the rest mass {mass}: no propagating incident wave")]
    NonPropagating { energy: f64, mass: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation requires zone {expected}, point lies in {found:?}")]
    Zone { expected: &'static str, found: Zone },

    #[error("rho(n) vanishes at a zone edge; use the linear-channel path")]
    EdgeDegenerate,

    #[error("barrier width is zero: traversal time vanishes and the normalized ratio is 0/0")]
    ZeroLength,

    #[error("finite-difference stencil around E = {energy} straddles a zone edge")]
    ZoneCrossing { energy: f64 },

    #[error("Richardson extrapolation did not converge (last relative change {last_change:e})")]
    NonConvergent { last_change: f64 },

    #[error("quadrature did not converge after {intervals} intervals")]
    QuadratureNonConvergent { intervals: usize },

    #[error("spectrum support reaches k <= 0 (k0 - W*sigma = {lower_edge})")]
    SupportCrossesThreshold { lower_edge: f64 },

    #[error("intensity maximum sits on the time-window boundary at t = {t}")]
    Clipped { t: f64 },

    #[error("intensity has no interior maximum in the sampled window")]
    NoPeak,

    #[error("no records to write")]
    EmptyRecords,

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

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
