//! Homogeneous subsystems of higher iterates and the checks built on them:
//! the split into block systems, the γ conjugation, the convolution
//! structure of the uniform coding measure, the entropy ratio and the
//! empirical slice lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dimensions::okamoto_s0;
use crate::error::{Error, Result};
use crate::estimators::{level_set_estimates, sample_measure, LEVEL_SET_DEPTH_CAP};
use crate::numeric::{check_a, check_depth, Scalar};
use crate::stats::{ks_statistic, median, Quantiles};
use crate::symbolic::{alphabet_size, subsystem_alphabet, subsystem_two_count, two_weight, Word};
use crate::systems::{custom_system, projection_system, LineSystem, SerializeScalar, Similarity1D};

/// Largest alphabet `build_subsystem` will enumerate.
pub const ALPHABET_BUDGET: u128 = 10_000_000;
/// Largest number of block tuples checked one by one in [`gamma_conjugate`].
pub const GAMMA_PAIR_BUDGET: u128 = 1_000_000;
/// Tail bound that fixes the sampling depth.
pub const TAIL_TOLERANCE: f64 = 1e-9;

/// `S_m`: the compositions `S_ī`, `ī ∈ M_m`, all with ratio `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousSystem<T> {
    pub a: T,
    pub m: usize,
    pub twos: usize,
    pub alphabet: Vec<Word>,
    pub ratio: T,
    pub maps: Vec<Similarity1D<T>>,
}

impl<T: Scalar> HomogeneousSystem<T> {
    /// `S_ī(0)` for each word of the alphabet.
    pub fn translations(&self) -> Vec<T> {
        self.maps.iter().map(|f| f.translation.clone()).collect()
    }

    pub fn ratios_uniform(&self) -> bool {
        self.maps.iter().all(|f| f.ratio == self.ratio)
    }

    pub fn to_line_system(&self) -> Result<LineSystem<f64>> {
        custom_system(
            self.maps
                .iter()
                .map(|f| {
                    Similarity1D::new(Scalar::to_f64(&f.ratio), Scalar::to_f64(&f.translation))
                })
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

impl<T: Scalar + SerializeScalar> Serialize for HomogeneousSystem<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("HomogeneousSystem", 6)?;
        st.serialize_field("a", &self.a.to_json())?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("twos", &self.twos)?;
        st.serialize_field("ratio", &self.ratio.to_json())?;
        st.serialize_field("alphabet_size", &self.alphabet.len())?;
        st.serialize_field("maps", &self.maps)?;
        st.end()
    }
}

/// `λ = a^{m−t} (1 − 2a)^t`.
pub fn subsystem_ratio<T: Scalar>(a: &T, m: usize, twos: usize) -> T {
    let mid = T::one() - T::from_usize(2) * a.clone();
    Scalar::pow(a, m - twos) * Scalar::pow(&mid, twos)
}

pub fn build_subsystem<T: Scalar>(a: &T, m: usize) -> Result<HomogeneousSystem<T>> {
    check_a(a)?;
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let twos = subsystem_two_count(a, m);
    let size = alphabet_size(m, twos);
    if size > ALPHABET_BUDGET {
        return Err(Error::Budget(format!(
            "|M_{m}| = {size} exceeds {ALPHABET_BUDGET}"
        )));
    }
    let base = projection_system(a)?;
    let alphabet = subsystem_alphabet(a, m)?;
    let ratio = subsystem_ratio(a, m, twos);
    let tol = Scalar::to_f64(&ratio).abs() * 1e-12;
    let maps = alphabet
        .iter()
        .map(|w| {
            let f = base.composed_map(w);
            // Float products depend on the symbol order; snap them to λ.
            if Scalar::to_f64(&(f.ratio.clone() - ratio.clone())).abs() > tol {
                return Err(Error::Invalid(format!("word {w} has ratio off λ")));
            }
            if f.ratio == ratio {
                Ok(f)
            } else {
                Ok(Similarity1D::raw(ratio.clone(), f.translation))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HomogeneousSystem {
        a: a.clone(),
        m,
        twos,
        alphabet,
        ratio,
        maps,
    })
}

/// `S_(<k),m`: maps `λ^k x + Σ_{l=1}^{k−1} λ^{l−1} S_{j_l}(0)` indexed by
/// `(j_1, …, j_{k−1}) ∈ M_m^{k−1}`, generated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem<T> {
    pub lambda: T,
    pub blocks: usize,
    pub translations: Vec<T>,
}

impl<T: Scalar> BlockSystem<T> {
    pub fn ratio(&self) -> T {
        Scalar::pow(&self.lambda, self.blocks + 1)
    }

    pub fn len(&self) -> u128 {
        (self.translations.len() as u128).saturating_pow(self.blocks as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Block tuple of the map at `index`, most significant block first.
    pub fn blocks_of(&self, mut index: u128) -> Vec<usize> {
        let base = self.translations.len() as u128;
        let mut out = vec![0; self.blocks];
        for slot in out.iter_mut().rev() {
            *slot = (index % base) as usize;
            index /= base;
        }
        out
    }

    pub fn map_for(&self, blocks: &[usize]) -> Similarity1D<T> {
        let mut t = T::zero();
        let mut scale = T::one();
        for &j in blocks {
            t = t + scale.clone() * self.translations[j].clone();
            scale = scale * self.lambda.clone();
        }
        Similarity1D::raw(self.ratio(), t)
    }

    pub fn map(&self, index: u128) -> Similarity1D<T> {
        self.map_for(&self.blocks_of(index))
    }

    /// All maps, refused above `budget`.
    pub fn materialize(&self, budget: u128) -> Result<Vec<Similarity1D<T>>> {
        let n = self.len();
        if n > budget {
            return Err(Error::Budget(format!("{n} block maps exceed {budget}")));
        }
        Ok((0..n).map(|i| self.map(i)).collect())
    }
}

/// `S_(<k),m` lazily and `S_(=k),m` with maps `λ^k x + S_j(0)`.
pub fn split_systems<T: Scalar>(
    sub: &HomogeneousSystem<T>,
    k: usize,
) -> Result<(BlockSystem<T>, Vec<Similarity1D<T>>)> {
    if k < 2 {
        return Err(Error::Invalid(format!("k must be at least 2, got {k}")));
    }
    let lower = BlockSystem {
        lambda: sub.ratio.clone(),
        blocks: k - 1,
        translations: sub.translations(),
    };
    let rk = Scalar::pow(&sub.ratio, k);
    let equal = sub
        .maps
        .iter()
        .map(|f| Similarity1D::raw(rk.clone(), f.translation.clone()))
        .collect();
    Ok((lower, equal))
}

/// `ĩ = 1^{m−t} 2^t`.
pub fn tilde_word(m: usize, twos: usize) -> Word {
    let mut s = vec![1u8; m - twos];
    s.extend(std::iter::repeat_n(2u8, twos));
    Word::new(s).expect("valid symbols")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCheck {
    pub exponent: usize,
    /// Translation of `γ`: `S_ĩ(0) λ^e / (1 − λ^k)`.
    pub shift: serde_json::Value,
    pub identity_holds: bool,
    pub fixed_points_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaReport {
    pub m: usize,
    pub k: usize,
    pub tilde: Word,
    pub tilde_translation: serde_json::Value,
    pub lambda: serde_json::Value,
    pub maps_checked: u128,
    pub exhaustive: bool,
    pub ratios_hold: bool,
    pub candidates: Vec<ExponentCheck>,
    /// Smallest candidate exponent for which the identity holds.
    pub recorded_exponent: Option<usize>,
}

/// Conjugates each `g ∈ S_(<k),m` by the translation `γ` and compares
/// with `S_{j_1} ∘ ⋯ ∘ S_{j_{k−1}} ∘ S_ĩ`, for the exponents `k − 1` and `k`.
pub fn gamma_conjugate<T: Scalar + SerializeScalar>(
    a: &T,
    m: usize,
    k: usize,
) -> Result<GammaReport> {
    let sub = build_subsystem(a, m)?;
    let (lower, _) = split_systems(&sub, k)?;
    let base = projection_system(a)?;
    let tilde = tilde_word(m, sub.twos);
    let s_tilde = base.project_word(&tilde);
    let lam = sub.ratio.clone();
    let lam_k = Scalar::pow(&lam, k);
    let one_minus = T::one() - lam_k.clone();

    let total = lower.len();
    let exhaustive = total <= GAMMA_PAIR_BUDGET;
    let indices: Vec<u128> = if exhaustive {
        (0..total).collect()
    } else {
        // Deterministic spread of tuples across the index range.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        (0..GAMMA_PAIR_BUDGET)
            .map(|_| rng.gen_range(0..total))
            .collect()
    };

    let mut ratios_hold = true;
    let mut candidates = Vec::new();
    for e in [k - 1, k] {
        let shift = s_tilde.clone() * Scalar::pow(&lam, e) / one_minus.clone();
        let gamma = Similarity1D::raw(T::one(), shift.clone());
        let gamma_inv = Similarity1D::raw(T::one(), -shift.clone());
        let mut identity_holds = true;
        let mut fixed_points_hold = true;
        for &idx in &indices {
            let blocks = lower.blocks_of(idx);
            let g = lower.map_for(&blocks);
            let conj = gamma.compose(&g).compose(&gamma_inv);
            let mut target = Similarity1D::identity();
            for &j in &blocks {
                target = target.compose(&sub.maps[j]);
            }
            target = target.compose(&base.composed_map(&tilde));
            ratios_hold &= conj.ratio == lam_k;
            identity_holds &= conj == target;
            fixed_points_hold &= gamma.apply(&g.fixed_point()) == conj.fixed_point();
        }
        candidates.push(ExponentCheck {
            exponent: e,
            shift: shift.to_json(),
            identity_holds,
            fixed_points_hold,
        });
    }
    let recorded_exponent = candidates
        .iter()
        .find(|c| c.identity_holds)
        .map(|c| c.exponent);
    Ok(GammaReport {
        m,
        k,
        tilde,
        tilde_translation: s_tilde.to_json(),
        lambda: lam.to_json(),
        maps_checked: indices.len() as u128,
        exhaustive,
        ratios_hold,
        candidates,
        recorded_exponent,
    })
}

/// Smallest `D` with `|λ|^D / (1 − |λ|) < 1e−9`.
pub fn tail_depth(lambda_abs: f64) -> usize {
    let mut d = 1;
    while lambda_abs.powi(d as i32) / (1.0 - lambda_abs) >= TAIL_TOLERANCE {
        d += 1;
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvolutionReport {
    pub a: f64,
    pub m: usize,
    pub k: usize,
    pub count: usize,
    pub seed: u64,
    pub depth: usize,
    /// KS distance between `μ_{m,a}` and `ϱ ∗ (λ^{k−1} η)`.
    pub ks: f64,
    /// KS distance with `η` unscaled, as its maps are written.
    pub ks_unscaled: f64,
    /// KS distance for `(λ^{k−1} Z) + Y` summed in the other order.
    pub ks_swapped: f64,
}

/// Samples `X ~ μ_{m,a}`, `Y ~ ϱ` and `Z ~ η` on independent streams and
/// compares `X` with `Y + λ^{k−1} Z`.
pub fn convolution_check(
    a: f64,
    m: usize,
    k: usize,
    count: usize,
    seed: u64,
) -> Result<ConvolutionReport> {
    let sub = build_subsystem(&a, m)?;
    if k < 2 {
        return Err(Error::Invalid(format!("k must be at least 2, got {k}")));
    }
    if count == 0 {
        return Err(Error::Invalid("sample count must be positive".into()));
    }
    let t = sub.translations();
    let lam = sub.ratio;
    let depth = tail_depth(lam.abs());
    let blocks_depth = depth.div_ceil(k);
    let lam_k = lam.powi(k as i32);
    let scale = lam.powi(k as i32 - 1);
    let draw = |rng: &mut ChaCha8Rng| t[rng.gen_range(0..t.len())];
    let stream = |i: usize, which: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(3 * i as u64 + which);
        rng
    };
    let samples: Vec<(f64, f64, f64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rx = stream(i, 0);
            let mut x = 0.0;
            let mut p = 1.0;
            for _ in 0..blocks_depth * k {
                x += p * draw(&mut rx);
                p *= lam;
            }
            let mut ry = stream(i, 1);
            let mut y = 0.0;
            let mut p = 1.0;
            for _ in 0..blocks_depth {
                let mut q = p;
                for _ in 0..k - 1 {
                    y += q * draw(&mut ry);
                    q *= lam;
                }
                p *= lam_k;
            }
            let mut rz = stream(i, 2);
            let mut z = 0.0;
            let mut p = 1.0;
            for _ in 0..blocks_depth {
                z += p * draw(&mut rz);
                p *= lam_k;
            }
            (x, y, z)
        })
        .collect();
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let scaled: Vec<f64> = samples.iter().map(|s| s.1 + scale * s.2).collect();
    let swapped: Vec<f64> = samples.iter().map(|s| scale * s.2 + s.1).collect();
    let unscaled: Vec<f64> = samples.iter().map(|s| s.1 + s.2).collect();
    Ok(ConvolutionReport {
        a,
        m,
        k,
        count,
        seed,
        depth: blocks_depth * k,
        ks: ks_statistic(&xs, &scaled),
        ks_unscaled: ks_statistic(&xs, &unscaled),
        ks_swapped: ks_statistic(&xs, &swapped),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyRatio {
    pub a: f64,
    pub m: usize,
    pub k: usize,
    pub twos: usize,
    pub log_alphabet: f64,
    pub log_lambda: f64,
    pub ratio: f64,
    pub limit: f64,
    pub limit_exceeds_one: bool,
}

/// `ln C(n, r)` as a sum of logarithms.
pub fn ln_binomial(n: usize, r: usize) -> f64 {
    (0..r.min(n - r))
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// `(k−1) log|M_m| / (−k log|λ|)` and its limit
/// `(−p log p − (1−p) log((1−p)/2)) / (−p log(2a−1) − (1−p) log a)`.
pub fn entropy_ratio(a: f64, m: usize, k: usize) -> Result<EntropyRatio> {
    check_a(&a)?;
    if m == 0 || k == 0 {
        return Err(Error::Invalid("m and k must be at least 1".into()));
    }
    let twos = subsystem_two_count(&a, m);
    let log_alphabet = ln_binomial(m, twos) + (m - twos) as f64 * 2f64.ln();
    let log_lambda = (m - twos) as f64 * a.ln() + twos as f64 * (2.0 * a - 1.0).ln();
    let ratio = (k - 1) as f64 * log_alphabet / (-(k as f64) * log_lambda);
    let p: f64 = two_weight(&a);
    let limit = (-p * p.ln() - (1.0 - p) * ((1.0 - p) / 2.0).ln())
        / (-p * (2.0 * a - 1.0).ln() - (1.0 - p) * a.ln());
    Ok(EntropyRatio {
        a,
        m,
        k,
        twos,
        log_alphabet,
        log_lambda,
        ratio,
        limit,
        limit_exceeds_one: limit > 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub threshold: f64,
    pub fraction_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceReport {
    pub a: f64,
    pub m: usize,
    pub depth: usize,
    pub seed: u64,
    pub sampling_depth: usize,
    pub target: f64,
    pub excluded: Vec<f64>,
    pub ys: Vec<f64>,
    pub estimates: Vec<f64>,
    pub quantiles: Quantiles,
    pub median: f64,
    pub rows: Vec<EpsilonRow>,
}

/// Level-set dimension estimates at `y ~ μ_{m,a}`, against `s₀ − 1 − ε`.
/// Samples at the endpoints 0 and 1, where the level set is a single point,
/// are set aside.
pub fn slice_lower_bound_report(
    a: f64,
    m: usize,
    sample_count: usize,
    depth: usize,
    seed: u64,
) -> Result<SliceReport> {
    check_depth(depth, LEVEL_SET_DEPTH_CAP)?;
    let sub = build_subsystem(&a, m)?;
    let system = sub.to_line_system()?;
    let weights = vec![1.0 / sub.maps.len() as f64; sub.maps.len()];
    let sampling_depth = tail_depth(sub.ratio.abs());
    let sample = sample_measure(&system, &weights, sample_count, sampling_depth, seed)?;
    let (ys, excluded): (Vec<f64>, Vec<f64>) =
        sample.points.iter().partition(|&&y| y > 0.0 && y < 1.0);
    let estimates = level_set_estimates(a, &ys, depth)?;
    let target = okamoto_s0(a)? - 1.0;
    let rows = [0.05, 0.1]
        .iter()
        .map(|&epsilon| {
            let threshold = target - epsilon;
            let above = estimates.iter().filter(|&&e| e > threshold).count();
            EpsilonRow {
                epsilon,
                threshold,
                fraction_above: above as f64 / estimates.len().max(1) as f64,
            }
        })
        .collect();
    Ok(SliceReport {
        a,
        m,
        depth,
        seed,
        sampling_depth,
        target,
        excluded,
        quantiles: Quantiles::of(&estimates),
        median: median(&estimates),
        ys,
        estimates,
        rows,
    })
}
