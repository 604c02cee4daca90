use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Two-letter FIPS 10-4 country code as used by GDELT's `ActionGeo_CountryCode`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 2]);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid FIPS country code {0:?}: expected two ASCII letters or digits")]
pub struct InvalidCountryCode(pub String);

impl CountryCode {
    /// Accepts exactly two ASCII alphanumerics; lowercase is folded to uppercase.
    pub fn from_bytes(raw: &[u8]) -> Option<Self> {
        match raw {
            [a, b] if a.is_ascii_alphanumeric() && b.is_ascii_alphanumeric() => {
                Some(CountryCode([a.to_ascii_uppercase(), b.to_ascii_uppercase()]))
            }
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        // both bytes are ASCII alphanumerics
        std::str::from_utf8(&self.0).expect("ascii country code")
    }
}

impl FromStr for CountryCode {
    type Err = InvalidCountryCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CountryCode::from_bytes(s.trim().as_bytes()).ok_or_else(|| InvalidCountryCode(s.to_string()))
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_uppercases() {
        let code: CountryCode = "pk".parse().unwrap();
        assert_eq!(code.as_str(), "PK");
        assert!("PAK".parse::<CountryCode>().is_err());
        assert!("P".parse::<CountryCode>().is_err());
        assert!("P-".parse::<CountryCode>().is_err());
    }
}
