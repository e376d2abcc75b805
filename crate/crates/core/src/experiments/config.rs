use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

/// Semantic checks run after a config is parsed.
pub trait Validate {
    fn validate(&self) -> Result<()>;
}

/// Parses a TOML config; missing keys take their defaults.
pub fn parse_config<T: DeserializeOwned + Validate>(text: &str) -> Result<T> {
    let cfg: T = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config<T: DeserializeOwned + Validate>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}
