//! Structured-text payloads.
//!
//! Every certificate and report renders as `key: value` lines. Keys are
//! lowercase with dashes, values run to the end of the line, and exact
//! rationals are always written `p/q` with `q > 0` in lowest terms, so
//! `0` is `0/1` and `2` is `2/1`. Blank lines and lines starting with `#`
//! are ignored by the parser. Keys may repeat; order is preserved.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational number used throughout the crate.
pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders `r` as `p/q`, including the `/1` for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => BigInt::from_str(s).ok().map(Rational::from_integer),
    }
}

/// `p/q`, or just `p` when the value is an integer.
pub fn format_reduced(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format_rational(r)
    }
}

/// An ordered list of `key: value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Record {
    entries: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        let key = key.into();
        debug_assert!(!key.contains(':') && !key.contains('\n'));
        let value = value.to_string();
        debug_assert!(!value.contains('\n'));
        self.entries.push((key, value));
        self
    }

    pub fn push_rational(&mut self, key: impl Into<String>, r: &Rational) -> &mut Self {
        self.push(key, format_rational(r))
    }

    pub fn extend(&mut self, other: &Record) -> &mut Self {
        self.entries.extend(other.entries.iter().cloned());
        self
    }

    /// First value stored under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_rational(&self, key: &str) -> Option<Rational> {
        self.get(key).and_then(parse_rational)
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut record = Record::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once(':')
                .ok_or_else(|| Error::parse(i + 1, "expected `key: value`"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::parse(i + 1, "empty key"));
            }
            record
                .entries
                .push((key.to_string(), value.trim().to_string()));
        }
        Ok(record)
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

/// Space-separated rendering of a list of displayable values.
pub(crate) fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
