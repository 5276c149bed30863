use alloc::string::String;

/// Errors produced by the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unstable system: load {rho} is not below 1")]
    Unstable { rho: f64 },
    #[error("age {age} outside rank function domain [0, {end})")]
    Domain { age: f64, end: f64 },
    #[error("efficiency undefined on ({a}, {b}]: no completion mass")]
    UndefinedRatio { a: f64, b: f64 },
    #[error("policy {0} has no rank function")]
    NoRankFunction(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;
