use crate::error::{Error, Result};
use std::fmt;

/// A Lebesgue exponent in [1, inf]. Infinity is a distinct variant, never a
/// sentinel float, so `Finite(f64::INFINITY)` is rejected at validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    pub fn validate(&self, name: &str) -> Result<()> {
        match self {
            Exponent::Finite(v) => {
                if !v.is_finite() || *v < 1.0 {
                    Err(Error::validation(
                        name,
                        format!("exponent must be finite and >= 1, got {v}"),
                    ))
                } else {
                    Ok(())
                }
            }
            Exponent::Inf => Ok(()),
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Exponent::Inf)
    }

    /// Finite value, panicking on infinity (callers branch on `is_inf` first).
    pub fn finite(&self) -> f64 {
        match self {
            Exponent::Finite(v) => *v,
            Exponent::Inf => panic!("finite() called on an infinite exponent"),
        }
    }

    /// 1/p, with 1/inf = 0.
    pub fn recip(&self) -> f64 {
        match self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Inf => 0.0,
        }
    }

    /// Parse "2", "4.0" or "inf".
    pub fn parse(s: &str, name: &str) -> Result<Exponent> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Inf);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::validation(name, format!("cannot parse exponent '{s}'")))?;
        let e = Exponent::Finite(v);
        e.validate(name)?;
        Ok(e)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Inf => write!(f, "inf"),
        }
    }
}

/// ell^r aggregation of a sequence of non-negative terms.
pub fn lr_aggregate(terms: &[f64], r: Exponent) -> f64 {
    match r {
        Exponent::Inf => terms.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(r) => {
            if r == 1.0 {
                terms.iter().sum()
            } else {
                terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
            }
        }
    }
}
