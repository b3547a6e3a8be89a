//! Integer power series truncated at a fixed degree cap.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `c_0, ..., c_cap` of a formal power series, exact integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    coeffs: Vec<BigInt>,
}

impl TruncatedSeries {
    pub fn zero(cap: usize) -> Self {
        Self {
            coeffs: vec![BigInt::zero(); cap + 1],
        }
    }

    pub fn one(cap: usize) -> Self {
        Self::monomial(cap, 0, 1)
    }

    /// `c * t^degree`, or zero if `degree > cap`.
    pub fn monomial(cap: usize, degree: usize, c: i64) -> Self {
        let mut s = Self::zero(cap);
        if degree <= cap {
            s.coeffs[degree] = BigInt::from(c);
        }
        s
    }

    /// Sum of `c * t^d` over `terms`; terms above the cap are dropped.
    pub fn polynomial(cap: usize, terms: &[(usize, i64)]) -> Self {
        let mut s = Self::zero(cap);
        for &(d, c) in terms {
            if d <= cap {
                s.coeffs[d] += c;
            }
        }
        s
    }

    /// Build from coefficients; `cap` is `coeffs.len() - 1`. Empty input is rejected.
    pub fn from_coeffs<T: Into<BigInt>>(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Structural("series needs at least one coefficient".into()));
        }
        Ok(Self {
            coeffs: coeffs.into_iter().map(Into::into).collect(),
        })
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, degree: usize) -> &BigInt {
        &self.coeffs[degree]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients as `i64`, if they all fit.
    pub fn to_i64_vec(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(|c| c.to_i64()).collect()
    }

    pub fn truncate(&self, cap: usize) -> Self {
        let cap = cap.min(self.cap());
        Self {
            coeffs: self.coeffs[..=cap].to_vec(),
        }
    }

    fn check_caps(&self, other: &Self) -> Result<()> {
        if self.cap() != other.cap() {
            return Err(Error::CapMismatch {
                left: self.cap(),
                right: other.cap(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_caps(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_caps(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Cauchy product truncated at the common cap.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_caps(other)?;
        let cap = self.cap();
        let mut out = vec![BigInt::zero(); cap + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=cap - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(Self { coeffs: out })
    }

    /// Multiplicative inverse; the constant term must be `+1` or `-1`.
    pub fn inv(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if !(c0.is_one() || (c0.is_negative() && c0.abs().is_one())) {
            return Err(Error::NonUnitConstant(c0.to_string()));
        }
        let cap = self.cap();
        let mut out: Vec<BigInt> = Vec::with_capacity(cap + 1);
        out.push(c0.clone());
        for d in 1..=cap {
            let mut acc = BigInt::zero();
            for i in 1..=d {
                let a = &self.coeffs[i];
                if !a.is_zero() {
                    acc += a * &out[d - i];
                }
            }
            // c0 is its own inverse
            out.push(-(acc * c0));
        }
        Ok(Self { coeffs: out })
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

// JSON form: {"cap": n, "coeffs": [...]}, coefficients as numbers when they fit in
// i64 and as decimal strings otherwise.
impl Serialize for TruncatedSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs: Vec<serde_json::Value> = self
            .coeffs
            .iter()
            .map(|c| match c.to_i64() {
                Some(v) => serde_json::Value::from(v),
                None => serde_json::Value::from(c.to_string()),
            })
            .collect();
        let mut st = serializer.serialize_struct("TruncatedSeries", 2)?;
        st.serialize_field("cap", &self.cap())?;
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            cap: usize,
            coeffs: Vec<serde_json::Value>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.coeffs.len() != raw.cap + 1 {
            return Err(de::Error::custom("series length must equal cap + 1"));
        }
        let coeffs = raw
            .coeffs
            .into_iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| de::Error::custom("non-integer coefficient")),
                serde_json::Value::String(s) => s
                    .parse::<BigInt>()
                    .map_err(|_| de::Error::custom("bad integer string")),
                _ => Err(de::Error::custom("coefficient must be a number or string")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { coeffs })
    }
}
