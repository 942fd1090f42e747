//! The three iterated function systems: the planar Okamoto system `F_a`,
//! its projection `S_a` to the `y` axis, and the conjugate system `Φ_b`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{check_a, check_b, format_rational, ternary_digits_exact, Param, Scalar};
use crate::symbolic::Word;

/// Default cap on the number of ternary digits used by [`evaluate_t`].
pub const DIGIT_CAP: usize = 1000;

/// `x ↦ ratio · x + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity1D<T> {
    pub ratio: T,
    pub translation: T,
}

impl<T: Scalar> Similarity1D<T> {
    pub fn new(ratio: T, translation: T) -> Result<Self> {
        if ratio.is_zero() || ratio.abs() >= T::one() {
            return Err(Error::Invalid(format!(
                "similarity ratio {} must satisfy 0 < |r| < 1",
                ratio.to_f64()
            )));
        }
        Ok(Self { ratio, translation })
    }

    /// Unchecked constructor for maps built by composition of contractions.
    pub(crate) fn raw(ratio: T, translation: T) -> Self {
        Self { ratio, translation }
    }

    pub fn identity() -> Self {
        Self::raw(T::one(), T::zero())
    }

    pub fn apply(&self, x: &T) -> T {
        self.ratio.clone() * x.clone() + self.translation.clone()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Self {
        Self::raw(
            self.ratio.clone() * inner.ratio.clone(),
            self.apply(&inner.translation),
        )
    }

    pub fn fixed_point(&self) -> T {
        self.translation.clone() / (T::one() - self.ratio.clone())
    }
}

impl<T: SerializeScalar> Serialize for Similarity1D<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Similarity1D", 2)?;
        st.serialize_field("ratio", &self.ratio.to_json())?;
        st.serialize_field("translation", &self.translation.to_json())?;
        st.end()
    }
}

/// JSON encoding of scalars: floats as numbers, rationals as `"p/q"` strings.
pub trait SerializeScalar {
    fn to_json(&self) -> serde_json::Value;
}

impl SerializeScalar for f64 {
    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
}

impl SerializeScalar for BigRational {
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
}

/// Diagonal planar affine map `(x, y) ↦ (x_ratio·x + x_shift, y_ratio·y + y_shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineDiag2D {
    pub x_ratio: f64,
    pub y_ratio: f64,
    pub x_shift: f64,
    pub y_shift: f64,
}

impl AffineDiag2D {
    pub fn new(x_ratio: f64, y_ratio: f64, x_shift: f64, y_shift: f64) -> Result<Self> {
        if !(x_ratio > 0.0 && x_ratio < 1.0) || !(y_ratio != 0.0 && y_ratio.abs() < 1.0) {
            return Err(Error::Invalid(format!(
                "affine ratios ({x_ratio}, {y_ratio}) not contracting"
            )));
        }
        Ok(Self {
            x_ratio,
            y_ratio,
            x_shift,
            y_shift,
        })
    }

    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        (
            self.x_ratio * p.0 + self.x_shift,
            self.y_ratio * p.1 + self.y_shift,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    OkamotoPlanar,
    Projection,
    Conjugate,
    Custom1d,
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "okamoto-planar" => Ok(SystemKind::OkamotoPlanar),
            "projection" => Ok(SystemKind::Projection),
            "conjugate" => Ok(SystemKind::Conjugate),
            "custom-1d" => Ok(SystemKind::Custom1d),
            _ => Err(Error::Parse(format!("unknown system kind {s:?}"))),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SystemKind::OkamotoPlanar => "okamoto-planar",
            SystemKind::Projection => "projection",
            SystemKind::Conjugate => "conjugate",
            SystemKind::Custom1d => "custom-1d",
        };
        f.write_str(s)
    }
}

/// A one-dimensional system of similarities over a chosen scalar type.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSystem<T> {
    pub kind: SystemKind,
    pub parameter: T,
    pub maps: Vec<Similarity1D<T>>,
}

/// `S_a = { a x, (1 − 2a) x + a, a x + 1 − a }`.
pub fn projection_system<T: Scalar>(a: &T) -> Result<LineSystem<T>> {
    check_a(a)?;
    let one = T::one();
    let two = T::from_usize(2);
    let maps = vec![
        Similarity1D::raw(a.clone(), T::zero()),
        Similarity1D::raw(one.clone() - two * a.clone(), a.clone()),
        Similarity1D::raw(a.clone(), one - a.clone()),
    ];
    Ok(LineSystem {
        kind: SystemKind::Projection,
        parameter: a.clone(),
        maps,
    })
}

/// `Φ_b = { ((1+b)/2) x − 1, −b x, ((1+b)/2) x + 1 }`.
pub fn conjugate_system<T: Scalar>(b: &T) -> Result<LineSystem<T>> {
    check_b(b)?;
    let one = T::one();
    let half_ratio = (one.clone() + b.clone()) / T::from_usize(2);
    let maps = vec![
        Similarity1D::raw(half_ratio.clone(), -one.clone()),
        Similarity1D::raw(-b.clone(), T::zero()),
        Similarity1D::raw(half_ratio, one),
    ];
    Ok(LineSystem {
        kind: SystemKind::Conjugate,
        parameter: b.clone(),
        maps,
    })
}

/// A caller-supplied system of similarities.
pub fn custom_system<T: Scalar>(maps: Vec<Similarity1D<T>>) -> Result<LineSystem<T>> {
    if maps.is_empty() {
        return Err(Error::Invalid("a system needs at least one map".into()));
    }
    let checked = maps
        .into_iter()
        .map(|m| Similarity1D::new(m.ratio, m.translation))
        .collect::<Result<Vec<_>>>()?;
    Ok(LineSystem {
        kind: SystemKind::Custom1d,
        parameter: T::zero(),
        maps: checked,
    })
}

impl<T: Scalar> LineSystem<T> {
    fn map(&self, symbol: u8) -> &Similarity1D<T> {
        &self.maps[(symbol - 1) as usize]
    }

    /// `S_{i₁} ∘ ⋯ ∘ S_{i_n}` as a single similarity.
    pub fn composed_map(&self, word: &Word) -> Similarity1D<T> {
        word.symbols()
            .iter()
            .fold(Similarity1D::identity(), |acc, &s| acc.compose(self.map(s)))
    }

    /// Finite-word natural projection: the composition applied to 0.
    pub fn project_word(&self, word: &Word) -> T {
        word.symbols()
            .iter()
            .rev()
            .fold(T::zero(), |x, &s| self.map(s).apply(&x))
    }

    /// Image of `base` under the composed map, endpoints sorted.
    pub fn image_interval(&self, word: &Word, base: (T, T)) -> (T, T) {
        let f = self.composed_map(word);
        let lo = f.apply(&base.0);
        let hi = f.apply(&base.1);
        if lo <= hi {
            (lo, hi)
        } else {
            (hi, lo)
        }
    }

    /// Supporting interval `I_b = [−2/(1−b), 2/(1−b)]` of the conjugate system,
    /// `[0, 1]` for the projection system.
    pub fn support(&self) -> (T, T) {
        match self.kind {
            SystemKind::Conjugate => {
                let e = T::from_usize(2) / (T::one() - self.parameter.clone());
                (-e.clone(), e)
            }
            SystemKind::Projection => (T::zero(), T::one()),
            // Crude invariant ball: radius max|t| / (1 − max|r|).
            _ => {
                let r = self
                    .maps
                    .iter()
                    .map(|m| m.ratio.abs())
                    .fold(T::zero(), |acc, x| if x > acc { x } else { acc });
                let t = self
                    .maps
                    .iter()
                    .map(|m| m.translation.abs())
                    .fold(T::zero(), |acc, x| if x > acc { x } else { acc });
                let radius = t / (T::one() - r);
                (-radius.clone(), radius)
            }
        }
    }
}

impl<T: Scalar + SerializeScalar> Serialize for LineSystem<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LineSystem", 3)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("parameter", &self.parameter.to_json())?;
        st.serialize_field("maps", &self.maps)?;
        st.end()
    }
}

/// Affine change of coordinates `ψ(y) = (4y − 2)/(1 − b)` carrying `S_a` to
/// `Φ_b` when `a = (1 + b)/2`.
pub fn conjugacy_map<T: Scalar>(b: &T) -> Similarity1D<T> {
    let d = T::one() - b.clone();
    Similarity1D::raw(T::from_usize(4) / d.clone(), -T::from_usize(2) / d)
}

/// The planar Okamoto system
/// `f₁ = (x/3, a y)`, `f₂ = ((x+1)/3, (1−2a) y + a)`, `f₃ = ((x+2)/3, a y + 1 − a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarSystem {
    pub kind: SystemKind,
    pub parameter: f64,
    pub maps: [AffineDiag2D; 3],
}

pub fn okamoto_planar(a: f64) -> Result<PlanarSystem> {
    check_a(&a)?;
    let third = 1.0 / 3.0;
    Ok(PlanarSystem {
        kind: SystemKind::OkamotoPlanar,
        parameter: a,
        maps: [
            AffineDiag2D::new(third, a, 0.0, 0.0)?,
            AffineDiag2D::new(third, 1.0 - 2.0 * a, third, a)?,
            AffineDiag2D::new(third, a, 2.0 * third, 1.0 - a)?,
        ],
    })
}

impl PlanarSystem {
    /// Composition applied to the origin.
    pub fn project_word(&self, word: &Word) -> (f64, f64) {
        word.symbols()
            .iter()
            .rev()
            .fold((0.0, 0.0), |p, &s| self.maps[(s - 1) as usize].apply(p))
    }
}

/// Result of [`build_system`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Planar(PlanarSystem),
    Exact(LineSystem<BigRational>),
    Float(LineSystem<f64>),
}

/// Builds the named family at the given parameter, exact when the parameter is.
pub fn build_system(kind: SystemKind, parameter: &Param) -> Result<SystemSpec> {
    match (kind, parameter) {
        (SystemKind::OkamotoPlanar, p) => okamoto_planar(p.to_f64()).map(SystemSpec::Planar),
        (SystemKind::Projection, Param::Exact(a)) => projection_system(a).map(SystemSpec::Exact),
        (SystemKind::Projection, Param::Float(a)) => projection_system(a).map(SystemSpec::Float),
        (SystemKind::Conjugate, Param::Exact(b)) => conjugate_system(b).map(SystemSpec::Exact),
        (SystemKind::Conjugate, Param::Float(b)) => conjugate_system(b).map(SystemSpec::Float),
        (SystemKind::Custom1d, _) => Err(Error::Invalid(
            "custom-1d systems are built from explicit maps".into(),
        )),
    }
}

/// Polynomial in `b` with exact rational coefficients; index = power of `b`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPoly {
    coefficients: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coefficients: Vec<BigRational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coefficients.len().max(other.coefficients.len());
        let c = (0..n)
            .map(|k| {
                let x = self
                    .coefficients
                    .get(k)
                    .cloned()
                    .unwrap_or_else(BigRational::zero);
                let y = other
                    .coefficients
                    .get(k)
                    .cloned()
                    .unwrap_or_else(BigRational::zero);
                x + y
            })
            .collect();
        Self::new(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c =
            vec![BigRational::zero(); self.coefficients.len() + other.coefficients.len() - 1];
        for (i, x) in self.coefficients.iter().enumerate() {
            for (j, y) in other.coefficients.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        Self::new(c)
    }

    pub fn eval(&self, b: &BigRational) -> BigRational {
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * b + c)
    }

    pub fn eval_f64(&self, b: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * b + c.to_f64())
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format_rational(c),
                1 => format!("({})b", format_rational(c)),
                _ => format!("({})b^{k}", format_rational(c)),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// `Π^Φ_b(word)` as a polynomial in `b`.
pub fn pi_polynomial(word: &Word) -> RationalPoly {
    let half = BigRational::from_ratio(1, 2);
    let a_poly = RationalPoly::new(vec![half.clone(), half]);
    let minus_b = RationalPoly::new(vec![BigRational::zero(), -BigRational::one()]);
    let one = RationalPoly::constant(BigRational::one());
    let minus_one = RationalPoly::constant(-BigRational::one());
    word.symbols()
        .iter()
        .rev()
        .fold(RationalPoly::zero(), |x, &s| match s {
            1 => a_poly.mul(&x).add(&minus_one),
            2 => minus_b.mul(&x),
            _ => a_poly.mul(&x).add(&one),
        })
}

/// `T_a(x)` with its guaranteed error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TValue {
    pub y: f64,
    pub error_bound: f64,
    pub digits: usize,
}

/// Number of ternary digits needed so that `a^n ≤ tolerance`.
pub fn digits_for_tolerance(a: f64, tolerance: f64) -> usize {
    (tolerance.ln() / a.ln()).ceil().max(0.0) as usize
}

/// Evaluates Okamoto's function from the first `n` ternary digits of `x`,
/// `n = ⌈log tolerance / log a⌉`. Digits are extracted exactly from the binary
/// representation of `x`; `x = 1` uses the coding `3^∞`.
///
/// Okamoto's function is only Hölder continuous, so `x` is taken at face
/// value: the float nearest to `1/3` is not `1/3`. Use [`evaluate_t_exact`]
/// for rational arguments.
pub fn evaluate_t(a: f64, x: f64, tolerance: f64) -> Result<TValue> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            name: "x",
            value: x.to_string(),
            domain: "[0,1]",
        });
    }
    let exact = BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    evaluate_t_exact(a, &exact, tolerance)
}

/// [`evaluate_t`] at an exact rational `x ∈ [0, 1]`.
pub fn evaluate_t_exact(a: f64, x: &BigRational, tolerance: f64) -> Result<TValue> {
    check_a(&a)?;
    if x < &BigRational::zero() || x > &BigRational::one() {
        return Err(Error::Domain {
            name: "x",
            value: x.to_f64().to_string(),
            domain: "[0,1]",
        });
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let n = digits_for_tolerance(a, tolerance);
    if n > DIGIT_CAP {
        return Err(Error::DepthCap {
            depth: n,
            cap: DIGIT_CAP,
        });
    }
    if x.is_one() {
        // Fixed point of the third map.
        return Ok(TValue {
            y: 1.0,
            error_bound: 0.0,
            digits: 0,
        });
    }
    let symbols: Vec<u8> = ternary_digits_exact(x, n)
        .into_iter()
        .map(|d| d + 1)
        .collect();
    let system = projection_system(&a)?;
    let y = system.project_word(&Word::new(symbols)?);
    Ok(TValue {
        y,
        error_bound: a.powi(n as i32),
        digits: n,
    })
}

/// Graph points `(x, T_a(x))` at the triadic grid `k / 3^depth`, exact up to
/// float rounding (trailing zero digits contribute nothing).
pub fn graph_points(a: f64, depth: usize) -> Result<Vec<(f64, f64)>> {
    let system = projection_system(&a)?;
    crate::numeric::check_depth(
        depth,
        crate::numeric::cap_or(crate::numeric::DEFAULT_DEPTH_CAP),
    )?;
    let mut out: Vec<(f64, f64)> = crate::symbolic::enumerate_words(depth)?
        .map(|w| (w.x_cylinder().0, system.project_word(&w)))
        .collect();
    out.push((1.0, 1.0));
    Ok(out)
}
