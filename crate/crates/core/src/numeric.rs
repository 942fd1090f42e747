//! Numeric tower: exact rationals for identity checks, `f64` for estimators.
//!
//! Conversion between the two is always explicit.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default cap on word length for exhaustive enumeration (3^16 words).
pub const DEFAULT_DEPTH_CAP: usize = 16;

/// Environment variable overriding every enumeration cap.
pub const DEPTH_CAP_ENV: &str = "OKAMOTO_DEPTH_CAP";

/// Returns the override from `OKAMOTO_DEPTH_CAP`, if set and valid.
pub fn depth_cap_override() -> Option<usize> {
    std::env::var(DEPTH_CAP_ENV).ok()?.trim().parse().ok()
}

/// Effective cap: the environment override if present, else `default`.
pub fn cap_or(default: usize) -> usize {
    depth_cap_override().unwrap_or(default)
}

pub fn check_depth(depth: usize, cap: usize) -> Result<()> {
    if depth > cap {
        Err(Error::DepthCap { depth, cap })
    } else {
        Ok(())
    }
}

/// Field operations shared by the exact and floating point paths.
pub trait Scalar: Clone + PartialOrd + Num + Signed + Debug + Send + Sync {
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Floor of a non-negative value.
    fn floor_usize(&self) -> usize;
    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }
    fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn floor_usize(&self) -> usize {
        self.floor().max(0.0) as usize
    }
    fn pow(&self, e: usize) -> Self {
        self.powi(e as i32)
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn floor_usize(&self) -> usize {
        self.floor().to_integer().to_usize().unwrap_or(0)
    }
}

/// Nearest `f64` to an exact rational, robust to huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both to ~60 significant bits before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

/// Parses `"p/q"` (q > 0) into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p = BigInt::from_str(p).map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let q = BigInt::from_str(q).map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if !q.is_positive() {
        return Err(Error::Parse(format!(
            "denominator must be positive in {s:?}"
        )));
    }
    let g = p.gcd(&q);
    Ok(BigRational::new_raw(&p / &g, &q / &g))
}

/// Formats a rational as `"p/q"` (or `"p"` when integral).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A parameter given either exactly (`"p/q"`) or as a decimal.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Exact(BigRational),
    Float(f64),
}

impl Param {
    pub fn to_f64(&self) -> f64 {
        match self {
            Param::Exact(r) => ratio_to_f64(r),
            Param::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Param::Exact(r) => Some(r),
            Param::Float(_) => None,
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.contains('/') {
            parse_rational(s).map(Param::Exact)
        } else {
            s.trim()
                .parse::<f64>()
                .map(Param::Float)
                .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
        }
    }
}

impl std::fmt::Display for Param {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Param::Exact(r) => f.write_str(&format_rational(r)),
            Param::Float(x) => write!(f, "{x}"),
        }
    }
}

fn describe<T: Scalar>(v: &T) -> String {
    format!("{}", v.to_f64())
}

/// Checks `a ∈ (1/2, 1)`.
pub fn check_a<T: Scalar>(a: &T) -> Result<()> {
    let half = T::from_ratio(1, 2);
    if *a > half && *a < T::one() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "a",
            value: describe(a),
            domain: "(1/2,1)",
        })
    }
}

/// Checks `b ∈ (0, 1)`.
pub fn check_b<T: Scalar>(b: &T) -> Result<()> {
    if *b > T::zero() && *b < T::one() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "b",
            value: describe(b),
            domain: "(0,1)",
        })
    }
}

/// Exact ternary digits of a float in `[0, 1)`, using its binary expansion.
pub fn ternary_digits(x: f64, n: usize) -> Vec<u8> {
    let r = BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    ternary_digits_exact(&r, n)
}

/// First `n` ternary digits of a rational in `[0, 1)` (terminating expansion).
pub fn ternary_digits_exact(x: &BigRational, n: usize) -> Vec<u8> {
    let den = x.denom().clone();
    let mut num = x.numer().clone();
    let three = BigInt::from(3);
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        num *= &three;
        let (d, rem) = num.div_rem(&den);
        digits.push(d.to_u8().unwrap_or(0));
        num = rem;
    }
    digits
}
