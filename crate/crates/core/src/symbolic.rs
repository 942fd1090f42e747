//! Words over the alphabet `{1,2,3}`, stopping-time covers and the
//! homogeneous subsystem alphabets.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{cap_or, check_a, check_depth, Scalar, DEFAULT_DEPTH_CAP};

/// A finite word over `{1,2,3}`. The empty word is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| !(1..=3).contains(&s)) {
            return Err(Error::Invalid(format!("symbol {bad} not in {{1,2,3}}")));
        }
        Ok(Word(symbols))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// `symbol` repeated `n` times.
    pub fn repeat(symbol: u8, n: usize) -> Result<Self> {
        Word::new(vec![symbol; n])
    }

    /// Word with lexicographic rank `index` among the words of length `len`.
    pub fn from_index(mut index: u64, len: usize) -> Self {
        let mut symbols = vec![1u8; len];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % 3) as u8 + 1;
            index /= 3;
        }
        Word(symbols)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    /// Number of occurrences of `symbol` (`#₂` for symbol 2).
    pub fn count(&self, symbol: u8) -> usize {
        self.0.iter().filter(|&&s| s == symbol).count()
    }

    /// The left shift σ: drops the first symbol.
    pub fn shift(&self) -> Word {
        self.shift_by(1)
    }

    pub fn shift_by(&self, k: usize) -> Word {
        Word(self.0.iter().skip(k).copied().collect())
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, symbol: u8) -> Result<()> {
        if !(1..=3).contains(&symbol) {
            return Err(Error::Invalid(format!("symbol {symbol} not in {{1,2,3}}")));
        }
        self.0.push(symbol);
        Ok(())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Left endpoint of the `x` cylinder: `Σ (i_k − 1) 3^{−k}`, exactly.
    pub fn x_left_exact(&self) -> BigRational {
        let mut num = BigInt::zero();
        for &s in &self.0 {
            num = num * 3 + BigInt::from(s - 1);
        }
        BigRational::new(num, BigInt::from(3).pow(self.len() as u32))
    }

    /// Closed `x` cylinder `[left, left + 3^{−n}]` in exact arithmetic.
    pub fn x_cylinder_exact(&self) -> (BigRational, BigRational) {
        let left = self.x_left_exact();
        let width = BigRational::new(BigInt::one(), BigInt::from(3).pow(self.len() as u32));
        let right = &left + width;
        (left, right)
    }

    pub fn x_cylinder(&self) -> (f64, f64) {
        let mut left = 0.0;
        let mut scale = 1.0;
        for &s in &self.0 {
            scale /= 3.0;
            left += (s - 1) as f64 * scale;
        }
        (left, left + scale)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                '3' => Ok(3),
                _ => Err(Error::Parse(format!("bad symbol {c:?} in word {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Word(symbols))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Longest common prefix `ī ∧ j̄` and its length.
pub fn common_prefix(i: &Word, j: &Word) -> (Word, usize) {
    let n = i
        .symbols()
        .iter()
        .zip(j.symbols())
        .take_while(|(x, y)| x == y)
        .count();
    (i.prefix(n), n)
}

/// Odometer over all words of a fixed length in lexicographic order.
#[derive(Debug, Clone)]
pub struct WordIter {
    current: Option<Vec<u8>>,
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        let mut pos = next.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            if next[pos] < 3 {
                next[pos] += 1;
                self.current = Some(next);
                break;
            }
            next[pos] = 1;
        }
        Some(Word(cur))
    }
}

/// All `3^n` words of length `n`, lexicographically, under the default cap.
pub fn enumerate_words(n: usize) -> Result<WordIter> {
    enumerate_words_capped(n, cap_or(DEFAULT_DEPTH_CAP))
}

pub fn enumerate_words_capped(n: usize, cap: usize) -> Result<WordIter> {
    check_depth(n, cap)?;
    Ok(WordIter {
        current: Some(vec![1; n]),
    })
}

/// Per-symbol ratios `λ₁ = λ₃ = a`, `λ₂ = 2a − 1`.
pub fn stopping_ratios(a: f64) -> [f64; 3] {
    [a, 2.0 * a - 1.0, a]
}

/// The symbolic cover `M_r`: words whose ratio product first drops to `≤ r`.
#[derive(Debug, Clone, Serialize)]
pub struct StoppingCover {
    pub a: f64,
    pub r: f64,
    pub words: Vec<Word>,
}

impl StoppingCover {
    pub fn product(&self, word: &Word) -> f64 {
        let l = stopping_ratios(self.a);
        word.symbols()
            .iter()
            .map(|&s| l[(s - 1) as usize])
            .product()
    }

    pub fn is_prefix_free(&self) -> bool {
        let set: HashSet<&[u8]> = self.words.iter().map(|w| w.symbols()).collect();
        self.words
            .iter()
            .all(|w| (0..w.len()).all(|k| !set.contains(&w.symbols()[..k])))
    }

    /// Every infinite sequence has a prefix in the set: each proper prefix of a
    /// member has all three children either members or proper prefixes.
    pub fn is_complete(&self) -> bool {
        if self.words.is_empty() {
            return false;
        }
        let members: HashSet<&[u8]> = self.words.iter().map(|w| w.symbols()).collect();
        let mut inner: HashSet<Vec<u8>> = HashSet::new();
        for w in &self.words {
            for k in 0..w.len() {
                inner.insert(w.symbols()[..k].to_vec());
            }
        }
        inner.iter().all(|u| {
            (1..=3u8).all(|c| {
                let mut child = u.clone();
                child.push(c);
                members.contains(child.as_slice()) || inner.contains(&child)
            })
        })
    }

    /// Sorted `x` cylinders of the words abut exactly and span `[0, 1]`.
    pub fn tiles_unit_interval(&self) -> bool {
        let mut cyl: Vec<(BigRational, BigRational)> =
            self.words.iter().map(Word::x_cylinder_exact).collect();
        cyl.sort();
        let mut cursor = BigRational::zero();
        for (lo, hi) in cyl {
            if lo != cursor {
                return false;
            }
            cursor = hi;
        }
        cursor == BigRational::one()
    }
}

/// Largest stopping cover [`stopping_cover`] will materialise.
pub const STOPPING_COVER_BUDGET: usize = 5_000_000;

/// Builds `M_r = { ī : λ_{i₁}⋯λ_{i_n} ≤ r < λ_{i₁}⋯λ_{i_{n−1}} }`.
///
/// The cover has roughly `r^{−s}` words where `2a^s + (2a−1)^s = 1`, which
/// grows quickly with `a`; construction fails past [`STOPPING_COVER_BUDGET`].
pub fn stopping_cover(a: f64, r: f64) -> Result<StoppingCover> {
    check_a(&a)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain {
            name: "r",
            value: r.to_string(),
            domain: "(0,1)",
        });
    }
    let l = stopping_ratios(a);
    let mut words = Vec::new();
    let mut stack: Vec<(Vec<u8>, f64)> = vec![(Vec::new(), 1.0)];
    while let Some((prefix, prod)) = stack.pop() {
        for s in (1..=3u8).rev() {
            let p = prod * l[(s - 1) as usize];
            let mut w = prefix.clone();
            w.push(s);
            if p <= r {
                words.push(Word(w));
            } else {
                stack.push((w, p));
            }
        }
        if words.len() + stack.len() > STOPPING_COVER_BUDGET {
            return Err(Error::Budget(format!(
                "stopping cover for a = {a}, r = {r} exceeds {STOPPING_COVER_BUDGET} words"
            )));
        }
    }
    words.sort();
    Ok(StoppingCover { a, r, words })
}

/// `p = (2a − 1)/(4a − 1)`, the natural weight of symbol 2.
pub fn two_weight<T: Scalar>(a: &T) -> T {
    let one = T::one();
    let two = T::from_usize(2);
    let four = T::from_usize(4);
    (two * a.clone() - one.clone()) / (four * a.clone() - one)
}

/// `⌊m p⌋`, the number of 2s in every word of `M_m`.
pub fn subsystem_two_count<T: Scalar>(a: &T, m: usize) -> usize {
    (T::from_usize(m) * two_weight(a)).floor_usize()
}

/// `|M_m| = 2^{m − t} · C(m, t)` with `t = ⌊m p⌋`.
pub fn alphabet_size(m: usize, twos: usize) -> u128 {
    if twos > m {
        return 0;
    }
    let mut binom: u128 = 1;
    for i in 0..twos {
        binom = binom * (m - i) as u128 / (i + 1) as u128;
    }
    binom.saturating_mul(1u128.checked_shl((m - twos) as u32).unwrap_or(u128::MAX))
}

/// `M_m`: the length-`m` words with exactly `⌊m p⌋` symbols equal to 2,
/// in lexicographic order.
pub fn subsystem_alphabet<T: Scalar>(a: &T, m: usize) -> Result<Vec<Word>> {
    check_a(a)?;
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    check_depth(m, cap_or(DEFAULT_DEPTH_CAP))?;
    Ok(words_with_twos(m, subsystem_two_count(a, m)))
}

/// All length-`m` words with exactly `twos` symbols 2, lexicographically.
pub fn words_with_twos(m: usize, twos: usize) -> Vec<Word> {
    fn rec(m: usize, twos: usize, cur: &mut Vec<u8>, out: &mut Vec<Word>) {
        let used = cur.iter().filter(|&&s| s == 2).count();
        let left = m - cur.len();
        if left == 0 {
            if used == twos {
                out.push(Word(cur.clone()));
            }
            return;
        }
        let need = twos - used;
        for s in 1..=3u8 {
            let ok = if s == 2 { need > 0 } else { left > need };
            if ok {
                cur.push(s);
                rec(m, twos, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if twos <= m {
        rec(m, twos, &mut Vec::with_capacity(m), &mut out);
    }
    out
}
