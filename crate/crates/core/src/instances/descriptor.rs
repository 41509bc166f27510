//! Instance descriptors: `zmod:<n>` (free modules over `Z/n`) and
//! `pairs:<p>` (subspace pairs over `F_p`).

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ring::ZMod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum InstanceSpec {
    ZMod(u32),
    Pairs(u32),
}

/// A descriptor that failed to parse; `position` is a byte offset.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn fail(position: usize, message: impl Into<String>) -> ParseError {
    ParseError { position, message: message.into() }
}

impl FromStr for InstanceSpec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let Some(colon) = s.find(':') else {
            return Err(fail(s.len(), "expected ':' after the instance kind"));
        };
        let kind = &s[..colon];
        let arg = &s[colon + 1..];
        let start = colon + 1;
        if arg.is_empty() {
            return Err(fail(start, "expected a modulus"));
        }
        if let Some(bad) = arg.char_indices().find(|(_, c)| !c.is_ascii_digit()) {
            return Err(fail(start + bad.0, format!("unexpected character {:?}", bad.1)));
        }
        let value: u32 = arg.parse().map_err(|_| fail(start, "modulus out of range"))?;
        let ring = ZMod::new(value).map_err(|e| fail(start, e.to_string()))?;
        match kind {
            "zmod" => Ok(InstanceSpec::ZMod(value)),
            "pairs" if ring.is_field() => Ok(InstanceSpec::Pairs(value)),
            "pairs" => Err(fail(start, format!("{value} is not prime"))),
            _ => Err(fail(0, format!("unknown instance kind {kind:?}"))),
        }
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSpec::ZMod(n) => write!(f, "zmod:{n}"),
            InstanceSpec::Pairs(p) => write!(f, "pairs:{p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_kinds() {
        assert_eq!("zmod:6".parse::<InstanceSpec>().unwrap(), InstanceSpec::ZMod(6));
        assert_eq!("pairs:2".parse::<InstanceSpec>().unwrap(), InstanceSpec::Pairs(2));
        assert_eq!(InstanceSpec::ZMod(6).to_string(), "zmod:6");
    }

    #[test]
    fn reports_positions() {
        assert_eq!("zmod:".parse::<InstanceSpec>().unwrap_err().position, 5);
        assert_eq!("zmod:6x".parse::<InstanceSpec>().unwrap_err().position, 6);
        assert_eq!("zmod6".parse::<InstanceSpec>().unwrap_err().position, 5);
        assert_eq!("ring:6".parse::<InstanceSpec>().unwrap_err().position, 0);
        assert_eq!("pairs:4".parse::<InstanceSpec>().unwrap_err().position, 6);
        assert_eq!("zmod:1".parse::<InstanceSpec>().unwrap_err().position, 5);
    }
}
