use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distribution not normalized: sum = {sum}")]
    NotNormalized { sum: f64 },

    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("support length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("z too close to 1: z = {z} >= policy.z_max = {z_max}")]
    ZTooClose { z: f64, z_max: f64 },

    #[error("{name} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("dimension {dim} exceeds guard {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("integrator step underflow at tau = {tau}")]
    StepUnderflow { tau: f64 },

    #[error("no root in (0,1): {0}")]
    NoRoot(String),

    #[error("invalid setup: {0}")]
    InvalidSetup(String),

    #[error("tau = {tau} beyond the single-pulse window [0, {limit}]")]
    OutsideValidity { tau: f64, limit: f64 },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
