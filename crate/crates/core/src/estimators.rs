//! Numerical estimators: graph box counts, level-set covers, seeded sampling
//! of self-similar measures, local dimension and Fourier probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{check_a, check_depth, Scalar};
use crate::stats::{least_squares, median, Quantiles};
use crate::symbolic::Word;
use crate::systems::{graph_points, okamoto_planar, LineSystem};

pub const COLUMN_DEPTH_CAP: usize = 20;
pub const GRID_DEPTH_CAP: usize = 14;
pub const LEVEL_SET_DEPTH_CAP: usize = 24;
pub const SAMPLE_COUNT_CAP: usize = 100_000_000;
pub const SAMPLE_DEPTH_CAP: usize = 60;
/// Extra depth of the template graph used inside each column by the grid count.
pub const GRID_REFINEMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Column,
    Grid,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "column" => Ok(Method::Column),
            "grid" => Ok(Method::Grid),
            _ => Err(Error::Parse(format!("unknown method {s:?} (column|grid)"))),
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of `3^{−n}` boxes meeting the graph of `T_a`.
pub fn box_count_graph(a: f64, n: usize, method: Method) -> Result<u128> {
    check_a(&a)?;
    match method {
        Method::Column => {
            check_depth(n, COLUMN_DEPTH_CAP)?;
            Ok(column_count(a, n))
        }
        Method::Grid => {
            check_depth(n, GRID_DEPTH_CAP)?;
            grid_count(a, n)
        }
    }
}

fn column_count(a: f64, n: usize) -> u128 {
    let b = 2.0 * a - 1.0;
    let scale = 3f64.powi(n as i32);
    (0..=n)
        .map(|j| {
            let height = a.powi((n - j) as i32) * b.powi(j as i32) * scale;
            // Shave rounding noise so exact integers do not round up.
            let cells = (height * (1.0 - 1e-12)).ceil().max(1.0) as u128;
            binomial(n, j) * (1u128 << (n - j)) * cells
        })
        .sum()
}

fn grid_count(a: f64, n: usize) -> Result<u128> {
    let template: Vec<f64> = graph_points(a, GRID_REFINEMENT)?
        .into_iter()
        .map(|(_, y)| y)
        .collect();
    let ratios = [a, 1.0 - 2.0 * a, a];
    let shifts = [0.0, a, 1.0 - a];
    let side = 3u64.pow(n as u32);
    let cells_per_side = side as f64;
    let total: u128 = (0..side)
        .into_par_iter()
        .map(|idx| {
            let (mut r, mut t) = (1.0, 0.0);
            let mut rest = idx;
            let mut digits = [0usize; GRID_DEPTH_CAP];
            for d in (0..n).rev() {
                digits[d] = (rest % 3) as usize;
                rest /= 3;
            }
            for &s in &digits[..n] {
                t += r * shifts[s];
                r *= ratios[s];
            }
            // The graph is connected over a column, so every cell between the
            // lowest and highest sampled cell is met.
            let (lo, hi) = template.iter().fold((u64::MAX, 0), |(lo, hi), &y| {
                let c = ((r * y + t) * cells_per_side).floor();
                let c = (c.max(0.0) as u64).min(side - 1);
                (lo.min(c), hi.max(c))
            });
            (hi - lo + 1) as u128
        })
        .sum();
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxRow {
    pub n: usize,
    pub delta: f64,
    pub count: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountSeries {
    pub a: f64,
    pub method: Method,
    pub rows: Vec<BoxRow>,
    pub fitted_slope: f64,
    pub fit_residual: f64,
}

/// Least squares slope of `log N` against `n log 3`, and the largest residual.
pub fn fit_dimension(rows: &[BoxRow]) -> Result<(f64, f64)> {
    if rows.len() < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 rows, got {}",
            rows.len()
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64 * 3f64.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.count as f64).ln()).collect();
    let fit = least_squares(&xs, &ys)?;
    Ok((fit.slope, fit.max_residual))
}

pub fn box_count_series(
    a: f64,
    min_n: usize,
    max_n: usize,
    method: Method,
) -> Result<BoxCountSeries> {
    if min_n > max_n {
        return Err(Error::Invalid(format!(
            "min depth {min_n} above max depth {max_n}"
        )));
    }
    let rows = (min_n..=max_n)
        .map(|n| {
            Ok(BoxRow {
                n,
                delta: 3f64.powi(-(n as i32)),
                count: box_count_graph(a, n, method)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (fitted_slope, fit_residual) = fit_dimension(&rows)?;
    Ok(BoxCountSeries {
        a,
        method,
        rows,
        fitted_slope,
        fit_residual,
    })
}

/// Depth-`n` words whose closed `y` interval contains `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetCover {
    pub a: f64,
    pub y: f64,
    pub depth: usize,
    pub words: Vec<Word>,
    pub count: u64,
}

impl LevelSetCover {
    /// `N · 3^{−n t}`.
    pub fn weighted_sum(&self, t: f64) -> f64 {
        self.count as f64 * 3f64.powf(-(self.depth as f64) * t)
    }

    pub fn dim_estimate(&self) -> f64 {
        dim_from_count(self.count, self.depth)
    }
}

fn dim_from_count(count: u64, depth: usize) -> f64 {
    if depth == 0 || count == 0 {
        return 0.0;
    }
    (count as f64).ln() / (depth as f64 * 3f64.ln())
}

fn check_level_args<T: Scalar>(a: &T, y: &T, n: usize) -> Result<()> {
    check_a(a)?;
    if *y < T::zero() || *y > T::one() {
        return Err(Error::Domain {
            name: "y",
            value: format!("{}", y.to_f64()),
            domain: "[0,1]",
        });
    }
    check_depth(n, LEVEL_SET_DEPTH_CAP)
}

/// Branch and bound over the symbolic tree: a word is extended only while
/// its `y` interval still contains `y`.
fn level_set_walk<T: Scalar>(a: &T, y: &T, n: usize, mut visit: impl FnMut(&[u8])) {
    let one = T::one();
    let two = T::from_usize(2);
    let ratios = [a.clone(), one.clone() - two * a.clone(), a.clone()];
    let shifts = [T::zero(), a.clone(), one - a.clone()];
    let mut path: Vec<u8> = Vec::with_capacity(n);
    // Entries: (depth, last symbol, ratio, translation) of S_ī.
    let mut stack: Vec<(usize, u8, T, T)> = Vec::new();
    for s in (0..3u8).rev() {
        stack.push((1, s, ratios[s as usize].clone(), shifts[s as usize].clone()));
    }
    if n == 0 {
        visit(&[]);
        return;
    }
    while let Some((d, s, r, t)) = stack.pop() {
        path.truncate(d - 1);
        path.push(s + 1);
        let end = r.clone() + t.clone();
        let (lo, hi) = if t <= end { (&t, &end) } else { (&end, &t) };
        if y < lo || y > hi {
            continue;
        }
        if d == n {
            visit(&path);
            continue;
        }
        for c in (0..3usize).rev() {
            let nt = t.clone() + r.clone() * shifts[c].clone();
            let nr = r.clone() * ratios[c].clone();
            stack.push((d + 1, c as u8, nr, nt));
        }
    }
}

pub fn level_set_cover<T: Scalar>(a: &T, y: &T, n: usize) -> Result<LevelSetCover> {
    check_level_args(a, y, n)?;
    let mut words = Vec::new();
    level_set_walk(a, y, n, |p| {
        words.push(Word::new(p.to_vec()).expect("valid symbols"))
    });
    Ok(LevelSetCover {
        a: a.to_f64(),
        y: y.to_f64(),
        depth: n,
        count: words.len() as u64,
        words,
    })
}

/// `N_n(y)` without storing the words.
pub fn level_set_count<T: Scalar>(a: &T, y: &T, n: usize) -> Result<u64> {
    check_level_args(a, y, n)?;
    let mut count = 0u64;
    level_set_walk(a, y, n, |_| count += 1);
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetScan {
    pub a: f64,
    pub depth: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub target: f64,
    pub ys: Vec<f64>,
    pub estimates: Vec<f64>,
    pub quantiles: Quantiles,
    pub fraction_above: f64,
    pub median_gap: f64,
}

/// `dim_estimate` at each given `y`.
pub fn level_set_estimates(a: f64, ys: &[f64], n: usize) -> Result<Vec<f64>> {
    ys.par_iter()
        .map(|y| Ok(dim_from_count(level_set_count(&a, y, n)?, n)))
        .collect()
}

/// Scans `samples` uniform `y` values against the bound `s₀ − 1`.
pub fn level_set_scan(
    a: f64,
    samples: usize,
    n: usize,
    seed: u64,
    tolerance: f64,
) -> Result<LevelSetScan> {
    let s0 = crate::dimensions::okamoto_s0(a)?;
    check_depth(n, LEVEL_SET_DEPTH_CAP)?;
    if samples == 0 {
        return Err(Error::Invalid("sample count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys: Vec<f64> = (0..samples).map(|_| rng.gen::<f64>()).collect();
    let estimates = level_set_estimates(a, &ys, n)?;
    let target = s0 - 1.0;
    let above = estimates
        .iter()
        .filter(|&&e| e > target + tolerance)
        .count();
    Ok(LevelSetScan {
        a,
        depth: n,
        seed,
        tolerance,
        target,
        quantiles: Quantiles::of(&estimates),
        fraction_above: above as f64 / samples as f64,
        median_gap: median(&estimates) - target,
        ys,
        estimates,
    })
}

/// Seeded draws from a self-similar measure on the line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSample {
    pub system: String,
    pub weights: Vec<f64>,
    pub points: Vec<f64>,
    pub seed: u64,
    pub depth: usize,
}

fn check_sampling(weights: &[f64], maps: usize, count: usize, depth: usize) -> Result<Vec<u64>> {
    if weights.len() != maps {
        return Err(Error::Invalid(format!(
            "{} weights for {maps} maps",
            weights.len()
        )));
    }
    if weights.iter().any(|w| w.is_nan() || *w < 0.0)
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::Invalid(
            "weights must form a probability vector".into(),
        ));
    }
    if count > SAMPLE_COUNT_CAP {
        return Err(Error::Budget(format!(
            "{count} samples exceeds {SAMPLE_COUNT_CAP}"
        )));
    }
    check_depth(depth, SAMPLE_DEPTH_CAP)?;
    // Cumulative thresholds on the 2^32 scale; the last symbol takes the remainder.
    let mut acc = 0.0;
    Ok(weights[..maps - 1]
        .iter()
        .map(|w| {
            acc += w;
            (acc * 4_294_967_296.0).round() as u64
        })
        .collect())
}

fn draw_symbol(rng: &mut ChaCha8Rng, thresholds: &[u64]) -> usize {
    let u = rng.gen::<u32>() as u64;
    thresholds
        .iter()
        .position(|&t| u < t)
        .unwrap_or(thresholds.len())
}

/// Point `i` uses stream `i` of the seeded generator, so the first symbols
/// of a point do not depend on the depth or on the other points.
fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn sample_measure(
    system: &LineSystem<f64>,
    weights: &[f64],
    count: usize,
    depth: usize,
    seed: u64,
) -> Result<MeasureSample> {
    let thresholds = check_sampling(weights, system.maps.len(), count, depth)?;
    let ratios: Vec<f64> = system.maps.iter().map(|m| m.ratio).collect();
    let shifts: Vec<f64> = system.maps.iter().map(|m| m.translation).collect();
    let points = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = point_rng(seed, i);
            let (mut r, mut t) = (1.0, 0.0);
            for _ in 0..depth {
                let s = draw_symbol(&mut rng, &thresholds);
                t += r * shifts[s];
                r *= ratios[s];
            }
            t
        })
        .collect();
    Ok(MeasureSample {
        system: system.kind.to_string(),
        weights: weights.to_vec(),
        points,
        seed,
        depth,
    })
}

/// Seeded draws from the natural measure on the graph.
pub fn sample_planar(
    a: f64,
    weights: &[f64],
    count: usize,
    depth: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let system = okamoto_planar(a)?;
    let thresholds = check_sampling(weights, 3, count, depth)?;
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = point_rng(seed, i);
            let symbols = (0..depth)
                .map(|_| draw_symbol(&mut rng, &thresholds) as u8 + 1)
                .collect();
            system.project_word(&Word::new(symbols).expect("valid symbols"))
        })
        .collect())
}

/// A sample sorted once for repeated ball-mass queries.
#[derive(Debug, Clone)]
pub struct SortedSample {
    points: Vec<f64>,
}

impl SortedSample {
    pub fn new(sample: &MeasureSample) -> Self {
        Self::from_points(sample.points.clone())
    }

    pub fn from_points(mut points: Vec<f64>) -> Self {
        points.par_sort_unstable_by(f64::total_cmp);
        SortedSample { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn width(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Empirical mass of the closed ball `[x − r, x + r]`.
    pub fn ball_mass(&self, x: f64, r: f64) -> f64 {
        let lo = self.points.partition_point(|&p| p < x - r);
        let hi = self.points.partition_point(|&p| p <= x + r);
        (hi - lo) as f64 / self.points.len() as f64
    }

    fn check_radii(&self, radii: &[f64]) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Invalid("empty sample".into()));
        }
        let w = self.width();
        if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && (w == 0.0 || r < w))) {
            return Err(Error::Domain {
                name: "radius",
                value: r.to_string(),
                domain: "(0, support width)",
            });
        }
        Ok(())
    }
}

/// `log μ(B(x, r)) / log r` per radius; `None` where the ball is empty.
pub fn local_dimension_estimate(
    sample: &SortedSample,
    x: f64,
    radii: &[f64],
) -> Result<Vec<Option<f64>>> {
    sample.check_radii(radii)?;
    Ok(radii
        .iter()
        .map(|&r| {
            let m = sample.ball_mass(x, r);
            (m > 0.0).then(|| m.ln() / r.ln())
        })
        .collect())
}

/// Slope of `log μ(B(x, r))` against `log r` over the nonempty balls,
/// `None` with fewer than three of them.
pub fn local_dimension_slope(sample: &SortedSample, x: f64, radii: &[f64]) -> Result<Option<f64>> {
    sample.check_radii(radii)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .filter_map(|&r| {
            let m = sample.ball_mass(x, r);
            (m > 0.0).then(|| (r.ln(), m.ln()))
        })
        .unzip();
    if xs.len() < 3 {
        return Ok(None);
    }
    Ok(Some(least_squares(&xs, &ys)?.slope))
}

/// `n` log-spaced values from `lo` to `hi`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierValue {
    pub t: f64,
    pub modulus: f64,
    pub stderr: f64,
}

const FOURIER_CHUNK: usize = 1 << 16;

/// Monte Carlo `|μ̂(t)|` with the standard error of the mean.
/// Chunks are summed in a fixed order so results do not depend on scheduling.
pub fn fourier_estimate(sample: &MeasureSample, t_values: &[f64]) -> Result<Vec<FourierValue>> {
    let points = &sample.points;
    if points.is_empty() {
        return Err(Error::Invalid("empty sample".into()));
    }
    let n = points.len() as f64;
    Ok(t_values
        .iter()
        .map(|&t| {
            let partial: Vec<(f64, f64)> = points
                .par_chunks(FOURIER_CHUNK)
                .map(|c| {
                    c.iter().fold((0.0, 0.0), |(re, im), x| {
                        let (s, co) = (t * x).sin_cos();
                        (re + co, im + s)
                    })
                })
                .collect();
            let (re, im) = partial
                .iter()
                .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
            let modulus = (re * re + im * im).sqrt() / n;
            let variance = (1.0 - modulus * modulus).max(0.0);
            FourierValue {
                t,
                modulus,
                stderr: (variance / n).sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub used: usize,
    pub values: Vec<FourierValue>,
}

pub const MIN_DECAY_POINTS: usize = 30;

/// Least squares slope of `log |μ̂|` against `log t` over log-spaced `t`,
/// ignoring values within three standard errors of zero.
pub fn fourier_decay(
    sample: &MeasureSample,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<DecayFit> {
    if points < MIN_DECAY_POINTS {
        return Err(Error::Invalid(format!(
            "need at least {MIN_DECAY_POINTS} t values"
        )));
    }
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::Invalid(format!("bad t window [{t_min}, {t_max}]")));
    }
    let values = fourier_estimate(sample, &log_spaced(t_min, t_max, points))?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = values
        .iter()
        .filter(|v| v.modulus > 3.0 * v.stderr)
        .map(|v| (v.t.ln(), v.modulus.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::Invalid(
            "too few values above the noise floor".into(),
        ));
    }
    Ok(DecayFit {
        slope: least_squares(&xs, &ys)?.slope,
        used: xs.len(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::enumerate_words;
    use crate::systems::{custom_system, projection_system, Similarity1D};
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn exhaustive_filter(a: &BigRational, y: &BigRational, n: usize) -> Vec<Word> {
        let sys = projection_system(a).unwrap();
        enumerate_words(n)
            .unwrap()
            .filter(|w| {
                let (lo, hi) = sys.image_interval(w, (q(0, 1), q(1, 1)));
                &lo <= y && y <= &hi
            })
            .collect()
    }

    #[test]
    fn column_count_examples() {
        assert_eq!(box_count_graph(0.75, 1, Method::Column).unwrap(), 8);
        assert_eq!(box_count_graph(0.75, 0, Method::Column).unwrap(), 1);
        assert!(box_count_graph(0.75, 21, Method::Column).is_err());
        assert!(box_count_graph(0.4, 3, Method::Column).is_err());
    }

    #[test]
    fn column_count_matches_word_enumeration() {
        for a in [0.6, 0.75, 0.9] {
            for n in 1..=7 {
                let brute: u128 = enumerate_words(n)
                    .unwrap()
                    .map(|w| {
                        let beta: f64 = w
                            .symbols()
                            .iter()
                            .map(|&s| if s == 2 { 2.0 * a - 1.0 } else { a })
                            .product();
                        let h = beta * 3f64.powi(n as i32);
                        (h * (1.0 - 1e-12)).ceil().max(1.0) as u128
                    })
                    .sum();
                assert_eq!(box_count_graph(a, n, Method::Column).unwrap(), brute);
            }
        }
    }

    #[test]
    fn grid_count_is_close_to_column_count() {
        for a in [0.6, 0.75, 0.9] {
            for n in 1..=6 {
                let g = box_count_graph(a, n, Method::Grid).unwrap();
                let c = box_count_graph(a, n, Method::Column).unwrap();
                // Each column can straddle at most one extra cell.
                assert!(
                    g <= c + 3u128.pow(n as u32),
                    "a={a} n={n} grid={g} column={c}"
                );
                assert!(g >= 3u128.pow(n as u32));
            }
        }
    }

    #[test]
    fn fit_dimension_power_laws() {
        let rows = |base: u128| -> Vec<BoxRow> {
            (1..6)
                .map(|n| BoxRow {
                    n,
                    delta: 3f64.powi(-(n as i32)),
                    count: base.pow(n as u32),
                })
                .collect()
        };
        let (s, r) = fit_dimension(&rows(9)).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && r < 1e-9);
        let (s, _) = fit_dimension(&rows(3)).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(fit_dimension(&rows(3)[..2]).is_err());
    }

    #[test]
    fn column_slopes_track_s0() {
        for a in [0.6, 0.75] {
            let s = box_count_series(a, 6, 14, Method::Column).unwrap();
            let s0 = crate::dimensions::okamoto_s0(a).unwrap();
            assert!((s.fitted_slope - s0).abs() < 0.05);
            assert!(s.rows.windows(2).all(|w| w[0].count < w[1].count));
        }
    }

    #[test]
    fn level_set_endpoints_are_singletons() {
        for n in 0..=12 {
            let c = level_set_cover(&0.75, &0.0, n).unwrap();
            assert_eq!(c.count, 1);
            assert_eq!(c.words[0], Word::repeat(1, n).unwrap());
            let c = level_set_cover(&0.75, &1.0, n).unwrap();
            assert_eq!(c.words, vec![Word::repeat(3, n).unwrap()]);
        }
    }

    #[test]
    fn level_set_matches_exhaustive_filter() {
        let a = q(3, 4);
        for y in [q(0, 1), q(1, 2), q(1, 3), q(7, 10), q(1, 1)] {
            for n in 0..=8 {
                let c = level_set_cover(&a, &y, n).unwrap();
                assert_eq!(c.words, exhaustive_filter(&a, &y, n), "y={y} n={n}");
            }
        }
    }

    #[test]
    fn level_set_cover_contains_the_level_set() {
        // Points on the level set found from a finer cover lie in some coarse x cylinder.
        let fine = level_set_cover(&q(3, 4), &q(1, 2), 8).unwrap();
        let coarse = level_set_cover(&q(3, 4), &q(1, 2), 5).unwrap();
        for w in &fine.words {
            assert!(coarse.words.iter().any(|c| c.is_prefix_of(w)));
        }
    }

    #[test]
    fn level_set_domain_errors() {
        assert!(level_set_cover(&0.75, &1.5, 3).is_err());
        assert!(level_set_cover(&0.45, &0.5, 3).is_err());
        assert!(level_set_cover(&0.75, &0.5, 25).is_err());
    }

    #[test]
    fn weighted_sum_stays_bounded() {
        let a = 0.75;
        let t = crate::dimensions::okamoto_s0(a).unwrap() - 1.0 + 0.1;
        for y in [0.3, 0.5, 0.61] {
            let sums: Vec<f64> = (6..=14)
                .map(|n| level_set_cover(&a, &y, n).unwrap().weighted_sum(t))
                .collect();
            assert!(sums.iter().all(|&s| s < 10.0), "{sums:?}");
        }
    }

    #[test]
    fn level_set_scan_forced_zero_and_reproducible() {
        assert_eq!(level_set_estimates(0.75, &[0.0], 10).unwrap(), vec![0.0]);
        let s1 = level_set_scan(0.75, 20, 10, 7, 0.08).unwrap();
        let s2 = level_set_scan(0.75, 20, 10, 7, 0.08).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.estimates.iter().all(|&e| e <= 1.0));
    }

    #[test]
    fn degenerate_weights_give_fixed_point() {
        let sys = projection_system(&0.75).unwrap();
        let s = sample_measure(&sys, &[0.0, 0.0, 1.0], 100, 60, 1).unwrap();
        // The fixed point of a x + 1 − a is 1.
        assert!(s.points.iter().all(|&p| (p - 1.0).abs() < 1e-7));
        let s = sample_measure(&sys, &[1.0, 0.0, 0.0], 10, 20, 1).unwrap();
        assert!(s.points.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn symmetric_weights_have_mean_half() {
        let sys = projection_system(&0.75).unwrap();
        let n = 100_000;
        let s = sample_measure(&sys, &[0.375, 0.25, 0.375], n, 40, 11).unwrap();
        let mean = s.points.iter().sum::<f64>() / n as f64;
        let var = s.points.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 3.0 * (var / n as f64).sqrt() + 1e-12);
    }

    #[test]
    fn sampling_is_reproducible_and_depth_coupled() {
        let sys = projection_system(&0.75).unwrap();
        let w = [0.375, 0.25, 0.375];
        let s1 = sample_measure(&sys, &w, 50_000, 40, 3).unwrap();
        let s2 = sample_measure(&sys, &w, 50_000, 40, 3).unwrap();
        assert_eq!(s1.points, s2.points);
        let s3 = sample_measure(&sys, &w, 50_000, 41, 3).unwrap();
        assert!(crate::stats::ks_statistic(&s1.points, &s3.points) < 1e-3);
        assert!(sample_measure(&sys, &w, 10, 61, 3).is_err());
        assert!(sample_measure(&sys, &[0.5, 0.5], 10, 10, 3).is_err());
    }

    #[test]
    fn planar_sample_lies_on_graph_box() {
        let p = sample_planar(0.75, &[0.375, 0.25, 0.375], 1000, 30, 5).unwrap();
        assert!(p
            .iter()
            .all(|&(x, y)| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)));
    }

    #[test]
    fn local_dimension_references() {
        let n = 1_000_000;
        let uniform =
            SortedSample::from_points((0..n).map(|i| (i as f64 + 0.5) / n as f64).collect());
        let r = local_dimension_estimate(&uniform, 0.5, &[1e-3, 1e-2]).unwrap();
        assert!(r.iter().all(|v| (v.unwrap() - 1.0).abs() < 0.2));
        let slope = local_dimension_slope(&uniform, 0.5, &log_spaced(1e-4, 1e-2, 8)).unwrap();
        assert!((slope.unwrap() - 1.0).abs() < 0.01);

        let atom = SortedSample::from_points(vec![0.25; 100]);
        let r = local_dimension_estimate(&atom, 0.25, &[1e-3, 1e-2]).unwrap();
        assert!(r.iter().all(|v| v.unwrap().abs() < 1e-12));
        let r = local_dimension_estimate(&atom, 0.9, &[1e-3]).unwrap();
        assert_eq!(r, vec![None]);
        assert!(local_dimension_estimate(&uniform, 0.5, &[2.0]).is_err());
    }

    #[test]
    fn fourier_basics() {
        let sys = projection_system(&0.75).unwrap();
        let s = sample_measure(&sys, &[0.375, 0.25, 0.375], 20_000, 40, 9).unwrap();
        let v = fourier_estimate(&s, &[0.0, 1.0, 100.0]).unwrap();
        assert!((v[0].modulus - 1.0).abs() < 1e-12);
        let bound = 1.0 + 3.0 / (20_000f64).sqrt();
        assert!(v
            .iter()
            .all(|x| x.modulus <= bound && x.stderr <= 1.0 / (20_000f64).sqrt()));
        assert!(fourier_decay(&s, 10.0, 1e4, 10).is_err());
    }

    #[test]
    fn custom_system_sampling() {
        let sys = custom_system(vec![
            Similarity1D::new(0.5, 0.0).unwrap(),
            Similarity1D::new(0.5, 0.5).unwrap(),
        ])
        .unwrap();
        let s = sample_measure(&sys, &[0.5, 0.5], 10_000, 30, 2).unwrap();
        assert!(s.points.iter().all(|p| (0.0..1.0).contains(p)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cover_words_contain_y(a in 0.55f64..0.95, y in 0.0f64..=1.0, n in 1usize..9) {
            let sys = projection_system(&a).unwrap();
            let c = level_set_cover(&a, &y, n).unwrap();
            prop_assert!(c.count >= 1);
            prop_assert!(c.dim_estimate() <= 1.0);
            for w in &c.words {
                let (lo, hi) = sys.image_interval(w, (0.0, 1.0));
                prop_assert!(lo - 1e-12 <= y && y <= hi + 1e-12);
            }
        }

        #[test]
        fn exact_cover_matches_filter(num in 0i64..=60, n in 1usize..7) {
            let a = q(2, 3);
            let y = q(num, 60);
            let c = level_set_cover(&a, &y, n).unwrap();
            prop_assert_eq!(c.words, exhaustive_filter(&a, &y, n));
        }
    }
}
