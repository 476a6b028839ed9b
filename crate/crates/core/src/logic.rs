use std::fmt;
use std::str::FromStr;

use crate::syntax::Language;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Logic {
    Pfl,
    Nfl,
    Pqfl,
    Nqfl,
    NqflMinus,
}

impl Logic {
    pub const ALL: [Logic; 5] = [Logic::Pfl, Logic::Nfl, Logic::Pqfl, Logic::Nqfl, Logic::NqflMinus];

    /// Atoms and identities require denoting arguments.
    pub fn is_negative(self) -> bool {
        matches!(self, Logic::Nfl | Logic::Nqfl | Logic::NqflMinus)
    }

    /// Parameters always denote existing objects.
    pub fn is_quasi(self) -> bool {
        matches!(self, Logic::Pqfl | Logic::Nqfl | Logic::NqflMinus)
    }

    pub fn language(self) -> Language {
        match self {
            Logic::NqflMinus => Language::LMinus,
            _ => Language::L,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Logic::Pfl => "pfl",
            Logic::Nfl => "nfl",
            Logic::Pqfl => "pqfl",
            Logic::Nqfl => "nqfl",
            Logic::NqflMinus => "nqflm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Logic::Pfl => "PFL",
            Logic::Nfl => "NFL",
            Logic::Pqfl => "PQFL",
            Logic::Nqfl => "NQFL",
            Logic::NqflMinus => "NQFL-",
        }
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for Logic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pfl" => Ok(Logic::Pfl),
            "nfl" => Ok(Logic::Nfl),
            "pqfl" => Ok(Logic::Pqfl),
            "nqfl" => Ok(Logic::Nqfl),
            "nqflm" | "nqfl-" => Ok(Logic::NqflMinus),
            _ => Err(format!("unknown logic `{s}` (expected pfl, nfl, pqfl, nqfl or nqflm)")),
        }
    }
}
