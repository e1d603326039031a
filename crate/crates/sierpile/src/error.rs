use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("level {level} exceeds the configured maximum {max}")]
    Capacity { level: u32, max: u32 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Maximum level accepted by `op`, honouring `SIERPILE_MAX_LEVEL`.
pub fn max_level(default: u32) -> u32 {
    std::env::var("SIERPILE_MAX_LEVEL")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

pub(crate) fn check_level(level: u32, default: u32) -> Result<()> {
    let max = max_level(default);
    if level > max {
        return Err(Error::Capacity { level, max });
    }
    Ok(())
}
