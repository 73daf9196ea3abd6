use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagnostic group of a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "AD")]
    Ad,
    #[serde(rename = "HC")]
    Hc,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Ad => "AD",
            Group::Hc => "HC",
        }
    }

    /// Positive class for classification metrics is AD.
    pub fn is_positive(self) -> bool {
        self == Group::Ad
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AD" => Ok(Group::Ad),
            "HC" => Ok(Group::Hc),
            other => Err(Error::Data(format!("unknown group {other:?}"))),
        }
    }
}
