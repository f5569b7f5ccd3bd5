//! `key=value` command parameters.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::ConfigParse(format!("{key}={value}: expected {what}"))
}

impl Params {
    /// Parses `key=value` words, rejecting keys outside `allowed`.
    pub fn parse(words: &[String], allowed: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| Error::ConfigParse(format!("expected key=value, got {w:?}")))?;
            if !allowed.contains(&k) {
                return Err(Error::ConfigParse(format!(
                    "unknown parameter {k:?} (accepted: {})",
                    allowed.join(", ")
                )));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::ConfigParse(format!("parameter {k:?} given twice")));
            }
        }
        Ok(Params { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.raw(key).ok_or_else(|| Error::ConfigParse(format!("missing parameter {key}=")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.trim().parse().map_err(|_| bad(key, v, std::any::type_name::<T>())))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn need<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.require(key)?;
        v.trim().parse().map_err(|_| bad(key, v, std::any::type_name::<T>()))
    }

    /// `a..b` (inclusive), `a..=b`, a comma list, or a single value.
    pub fn range(&self, key: &str) -> Result<Option<Vec<u64>>> {
        self.raw(key).map(|v| parse_range(key, v)).transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse().map_err(|_| bad(key, v, "a comma-separated list")))
                    .collect()
            })
            .transpose()
    }
}

pub fn parse_range(key: &str, v: &str) -> Result<Vec<u64>> {
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad(key, v, "a range a..b or a list"));
    if let Some((a, b)) = v.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad(key, v, "a non-empty range"));
        }
        return Ok((a..=b).collect());
    }
    v.split(',').map(num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(w: &[&str]) -> Vec<String> {
        w.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_range("n", "0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_range("n", "2..=4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_range("n", "1,5").unwrap(), vec![1, 5]);
        assert!(parse_range("n", "4..1").is_err());
        let p = Params::parse(&words(&["q=5,7", "Q=[0,1,1]"]), &["q", "Q"]).unwrap();
        assert_eq!(p.list::<u64>("q").unwrap(), Some(vec![5, 7]));
        assert_eq!(p.require("Q").unwrap(), "[0,1,1]");
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(Params::parse(&words(&["x=1"]), &["k"]), Err(Error::ConfigParse(_))));
        assert!(Params::parse(&words(&["k"]), &["k"]).is_err());
        assert!(Params::parse(&words(&["k=1", "k=2"]), &["k"]).is_err());
        let p = Params::parse(&words(&["k=two"]), &["k"]).unwrap();
        assert!(p.get::<u32>("k").is_err());
    }
}
