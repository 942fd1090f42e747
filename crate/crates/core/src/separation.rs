//! Exponential separation machinery for the conjugate system `Φ_b`.
//!
//! Minimal gaps are computed in exact arithmetic. The pruned path encodes all
//! depth-`n` projections as integers over the common denominator `(2q)^n`
//! (for `b = p/q`) and takes adjacent differences after sorting. The
//! exhaustive path projects every word independently and compares all pairs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{cap_or, check_b, check_depth, format_rational, Scalar};
use crate::symbolic::{common_prefix, Word};
use crate::systems::conjugate_system;

/// Default depth cap for the all-pairs oracle (`9^n` comparisons).
pub const EXHAUSTIVE_CAP: usize = 8;
/// Default depth cap for the sorted path (`3^n` values).
pub const PRUNED_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PairClass {
    A1,
    A2,
    A3,
}

/// Every class the pair belongs to; the classes overlap.
pub fn classify_pair(i: &Word, j: &Word) -> Result<Vec<PairClass>> {
    let (Some(i1), Some(j1)) = (i.first(), j.first()) else {
        return Err(Error::Invalid(
            "pair classification needs nonempty words".into(),
        ));
    };
    let mut out = Vec::with_capacity(2);
    if (i1, j1) != (1, 3) {
        out.push(PairClass::A1);
    }
    if (i1, j1) != (3, 1) {
        out.push(PairClass::A2);
    }
    if matches!((i1, j1), (1, 3) | (3, 1)) {
        out.push(PairClass::A3);
    }
    Ok(out)
}

/// `F¹ = bΠ(ī) + ((1+b)/2)Π(j̄) − 1`, `F² = … + 1`, `F³ = Π(ī) − Π(j̄)`.
pub fn f_function(k: u8, i: &Word, j: &Word, b: &BigRational) -> Result<BigRational> {
    let system = conjugate_system(b)?;
    let pi = system.project_word(i);
    let pj = system.project_word(j);
    let a = (BigRational::one() + b) / BigRational::from_ratio(2, 1);
    match k {
        1 => Ok(b * pi + a * pj - BigRational::one()),
        2 => Ok(b * pi + a * pj + BigRational::one()),
        3 => Ok(pi - pj),
        _ => Err(Error::Invalid(format!("F^k needs k in {{1,2,3}}, got {k}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMode {
    Exhaustive,
    Pruned,
}

impl std::str::FromStr for GapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(GapMode::Exhaustive),
            "pruned" => Ok(GapMode::Pruned),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

/// A minimal gap together with a pair of distinct words attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct Gap {
    pub value: BigRational,
    pub witness: (Word, Word),
}

/// All depth-`n` projections as numerators over `(2q)^n`, in lexicographic
/// word order.
pub(crate) fn scaled_projections(b: &BigRational, n: usize) -> (Vec<BigInt>, BigInt) {
    let p = b.numer().clone();
    let q = b.denom().clone();
    let d = BigInt::from(2) * &q;
    let ratio = &q + &p;
    let flip = BigInt::from(-2) * &p;
    let mut values = vec![BigInt::zero()];
    let mut dn = BigInt::one();
    for _ in 0..n {
        dn *= &d;
        let mut next = Vec::with_capacity(values.len() * 3);
        next.extend(values.iter().map(|v| &ratio * v - &dn));
        next.extend(values.iter().map(|v| &flip * v));
        next.extend(values.iter().map(|v| &ratio * v + &dn));
        values = next;
    }
    (values, dn)
}

/// `Δ_n(b) = min_{ī ≠ j̄ ∈ Σ_n} |Π(ī) − Π(j̄)|`, zero when two words coincide.
pub fn delta_n(b: &BigRational, n: usize, mode: GapMode) -> Result<Gap> {
    check_b(b)?;
    if n == 0 {
        return Err(Error::Invalid("Δ_n needs n ≥ 1".into()));
    }
    match mode {
        GapMode::Pruned => {
            check_depth(n, cap_or(PRUNED_CAP))?;
            Ok(pruned_gap(b, n))
        }
        GapMode::Exhaustive => {
            check_depth(n, cap_or(EXHAUSTIVE_CAP))?;
            Ok(exhaustive_gap(b, n))
        }
    }
}

fn pruned_gap(b: &BigRational, n: usize) -> Gap {
    let (values, dn) = scaled_projections(b, n);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.par_sort_by(|&x, &y| values[x].cmp(&values[y]).then(x.cmp(&y)));
    let mut best: Option<(BigInt, usize, usize)> = None;
    for pair in order.windows(2) {
        let d = &values[pair[1]] - &values[pair[0]];
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, pair[0].min(pair[1]), pair[0].max(pair[1])));
        }
    }
    let (best, i, j) = best.expect("at least three words");
    Gap {
        value: BigRational::new(best, dn),
        witness: (Word::from_index(i as u64, n), Word::from_index(j as u64, n)),
    }
}

/// All-pairs oracle over independently projected words.
fn exhaustive_gap(b: &BigRational, n: usize) -> Gap {
    let system = conjugate_system(b).expect("b checked by caller");
    let words: Vec<Word> = crate::symbolic::enumerate_words_capped(n, usize::MAX)
        .expect("uncapped")
        .collect();
    let values: Vec<BigRational> = words.par_iter().map(|w| system.project_word(w)).collect();
    // Compare numerators over a shared denominator; i128 when they fit.
    let common = values.iter().fold(BigInt::one(), |acc, v| {
        num_integer::Integer::lcm(&acc, v.denom())
    });
    let nums: Vec<BigInt> = values
        .iter()
        .map(|v| v.numer() * (&common / v.denom()))
        .collect();
    let small: Option<Vec<i128>> = nums
        .iter()
        .map(|v| v.to_i128().filter(|x| x.abs() < i128::MAX / 4))
        .collect();
    let (best, pair) = match small {
        Some(xs) => {
            let (d, i, j) = (0..xs.len())
                .into_par_iter()
                .map(|i| {
                    let mut best = (u128::MAX, i, i);
                    for j in i + 1..xs.len() {
                        let d = (xs[i] - xs[j]).unsigned_abs();
                        if d < best.0 {
                            best = (d, i, j);
                        }
                    }
                    best
                })
                .min()
                .expect("at least two words");
            (BigInt::from(d), (i, j))
        }
        None => {
            let (d, i, j) = (0..nums.len())
                .into_par_iter()
                .map(|i| {
                    let mut best: Option<(BigInt, usize, usize)> = None;
                    for j in i + 1..nums.len() {
                        let d = (&nums[i] - &nums[j]).abs();
                        if best.as_ref().is_none_or(|b| d < b.0) {
                            best = Some((d, i, j));
                        }
                    }
                    best
                })
                .flatten()
                .min()
                .expect("at least two words");
            (d, (i, j))
        }
    };
    Gap {
        value: BigRational::new(best, common),
        witness: (words[pair.0].clone(), words[pair.1].clone()),
    }
}

/// For a pair whose first differing symbols are `(1,3)` or `(3,1)`, returns
/// `(|Π(ī) − Π(j̄)|, b^m |Π(σ^m ī 2) − Π(σ^m j̄ 2)|)` with `m = |ī ∧ j̄|`.
/// The first component always dominates the second.
pub fn a3_prefix_bound(
    b: &BigRational,
    i: &Word,
    j: &Word,
) -> Result<Option<(BigRational, BigRational)>> {
    let system = conjugate_system(b)?;
    let (_, m) = common_prefix(i, j);
    let (Some(&x), Some(&y)) = (i.symbols().get(m), j.symbols().get(m)) else {
        return Ok(None);
    };
    if !matches!((x, y), (1, 3) | (3, 1)) {
        return Ok(None);
    }
    let two = Word::repeat(2, 1)?;
    let gap = (system.project_word(i) - system.project_word(j)).abs();
    let tail_i = i.shift_by(m).concat(&two);
    let tail_j = j.shift_by(m).concat(&two);
    let tail = (system.project_word(&tail_i) - system.project_word(&tail_j)).abs();
    Ok(Some((gap, Scalar::pow(b, m) * tail)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationRow {
    pub n: usize,
    /// Exact `Δ_n` as `"p/q"`.
    pub gap: String,
    pub gap_f64: f64,
    /// `Δ_n^{1/n}`.
    pub gap_root: f64,
    /// Comparison column `(b ε / 2)^n`.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub n: usize,
    pub i: Word,
    pub j: Word,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub b: String,
    pub n_max: usize,
    pub mode: GapMode,
    pub rows: Vec<SeparationRow>,
    /// `min_n Δ_n^{1/n}` over the tested range.
    pub epsilon: f64,
    pub pass: bool,
    /// `Δ_{n+1} ≤ Δ_n` over the run.
    pub monotone: bool,
    /// First depth with a zero gap and two words projecting to the same point.
    pub witness: Option<Witness>,
}

/// Computes `Δ_1, …, Δ_{n_max}` and summarises the empirical separation.
pub fn verify_sesc(b: &BigRational, n_max: usize, mode: GapMode) -> Result<SeparationReport> {
    check_b(b)?;
    if n_max == 0 {
        return Err(Error::Invalid("max depth must be at least 1".into()));
    }
    let cap = match mode {
        GapMode::Pruned => cap_or(PRUNED_CAP),
        GapMode::Exhaustive => cap_or(EXHAUSTIVE_CAP),
    };
    check_depth(n_max, cap)?;
    let gaps: Vec<Gap> = (1..=n_max)
        .map(|n| delta_n(b, n, mode))
        .collect::<Result<_>>()?;
    let roots: Vec<f64> = gaps
        .iter()
        .enumerate()
        .map(|(k, g)| Scalar::to_f64(&g.value).powf(1.0 / (k + 1) as f64))
        .collect();
    let epsilon = roots.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = gaps.iter().all(|g| g.value.is_positive());
    let monotone = gaps.windows(2).all(|w| w[1].value <= w[0].value);
    let witness = gaps
        .iter()
        .enumerate()
        .find(|(_, g)| g.value.is_zero())
        .map(|(k, g)| Witness {
            n: k + 1,
            i: g.witness.0.clone(),
            j: g.witness.1.clone(),
        });
    let bf = Scalar::to_f64(b);
    let rows = gaps
        .iter()
        .zip(&roots)
        .enumerate()
        .map(|(k, (g, &root))| SeparationRow {
            n: k + 1,
            gap: format_rational(&g.value),
            gap_f64: Scalar::to_f64(&g.value),
            gap_root: root,
            floor: (bf * epsilon / 2.0).powi((k + 1) as i32),
        })
        .collect();
    Ok(SeparationReport {
        b: format_rational(b),
        n_max,
        mode,
        rows,
        epsilon,
        pass,
        monotone,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::enumerate_words;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn classification() {
        use PairClass::*;
        assert_eq!(classify_pair(&w("13"), &w("31")).unwrap(), vec![A2, A3]);
        assert_eq!(classify_pair(&w("2"), &w("21")).unwrap(), vec![A1, A2]);
        assert_eq!(classify_pair(&w("3"), &w("1")).unwrap(), vec![A1, A3]);
        assert!(classify_pair(&Word::empty(), &w("1")).is_err());
    }

    #[test]
    fn f_function_examples() {
        let b = q(1, 2);
        assert_eq!(f_function(3, &w("3"), &w("1"), &b).unwrap(), q(2, 1));
        assert_eq!(f_function(2, &w("1"), &w("1"), &b).unwrap(), q(-1, 4));
        assert!(f_function(4, &w("1"), &w("1"), &b).is_err());
    }

    #[test]
    fn f1_vanishes_along_the_overlap() {
        // F¹(1^n, 3^n) = b(−Σa^l) + a Σa^l − 1 = −a^n: geometric decay to 0.
        for b in [q(1, 3), q(1, 2), q(3, 5)] {
            let a = (BigRational::one() + &b) / q(2, 1);
            let mut prev = q(1, 1);
            for n in 1..20 {
                let v = f_function(
                    1,
                    &Word::repeat(1, n).unwrap(),
                    &Word::repeat(3, n).unwrap(),
                    &b,
                )
                .unwrap();
                assert_eq!(v, -Scalar::pow(&a, n));
                assert!(v.abs() < prev);
                prev = v.abs();
            }
        }
    }

    #[test]
    fn f3_is_antisymmetric() {
        let b = q(2, 5);
        for i in enumerate_words(3).unwrap() {
            for j in enumerate_words(3).unwrap() {
                let f = f_function(3, &i, &j, &b).unwrap();
                assert_eq!(f, -f_function(3, &j, &i, &b).unwrap());
            }
        }
    }

    #[test]
    fn depth_one_gap_is_one() {
        for b in [q(1, 3), q(1, 2), q(3, 5), q(9, 10)] {
            for mode in [GapMode::Pruned, GapMode::Exhaustive] {
                assert_eq!(delta_n(&b, 1, mode).unwrap().value, q(1, 1));
            }
        }
    }

    #[test]
    fn depth_two_gap_at_half() {
        // Oracle: the nine values φ_i(φ_j(0)) at b = 1/2, computed by hand:
        // {-7/4, -1, -1/4, 1/2, 0, -1/2, 1/4, 1, 7/4}; sorted min spacing 1/4.
        let vals = [
            q(-7, 4),
            q(-1, 1),
            q(-1, 4),
            q(1, 2),
            q(0, 1),
            q(-1, 2),
            q(1, 4),
            q(1, 1),
            q(7, 4),
        ];
        let mut s = vals.to_vec();
        s.sort();
        let oracle = s.windows(2).map(|p| &p[1] - &p[0]).min().unwrap();
        assert_eq!(oracle, q(1, 4));
        assert_eq!(delta_n(&q(1, 2), 2, GapMode::Pruned).unwrap().value, oracle);
    }

    #[test]
    fn scaled_projections_match_exact_composition() {
        let b = q(3, 7);
        let system = conjugate_system(&b).unwrap();
        for n in 0..6 {
            let (nums, den) = scaled_projections(&b, n);
            for (k, word) in enumerate_words(n).unwrap().enumerate() {
                assert_eq!(
                    BigRational::new(nums[k].clone(), den.clone()),
                    system.project_word(&word)
                );
            }
        }
    }

    #[test]
    fn pruned_equals_exhaustive_small() {
        for b in [q(1, 3), q(1, 2), q(3, 5), q(2, 7)] {
            for n in 1..=5 {
                let p = delta_n(&b, n, GapMode::Pruned).unwrap();
                let e = delta_n(&b, n, GapMode::Exhaustive).unwrap();
                assert_eq!(p.value, e.value, "b={b} n={n}");
            }
        }
    }

    #[test]
    fn coincidences_are_reported_with_witness() {
        // φ₁(φ₃(0)) = a − 1 = −b = φ₂(φ₃(0)) exactly when b = 1/3.
        let b = q(1, 3);
        let g = delta_n(&b, 2, GapMode::Pruned).unwrap();
        assert!(g.value.is_zero());
        let system = conjugate_system(&b).unwrap();
        assert_ne!(g.witness.0, g.witness.1);
        assert_eq!(
            system.project_word(&g.witness.0),
            system.project_word(&g.witness.1)
        );
        let report = verify_sesc(&b, 4, GapMode::Pruned).unwrap();
        assert!(!report.pass);
        let wit = report.witness.unwrap();
        assert_eq!(wit.n, 2);
    }

    #[test]
    fn sesc_report_at_half() {
        // b = 1/2 is rational and carries an exact coincidence at depth 3.
        let report = verify_sesc(&q(1, 2), 8, GapMode::Pruned).unwrap();
        assert_eq!(report.rows.len(), 8);
        assert!(report.monotone);
        assert_eq!(report.rows[0].gap, "1");
        assert_eq!(report.rows[1].gap, "1/4");
        assert!(!report.pass);
        let wit = report.witness.unwrap();
        assert_eq!(wit.n, 3);
        let system = conjugate_system(&q(1, 2)).unwrap();
        assert_eq!(system.project_word(&wit.i), system.project_word(&wit.j));
        assert_eq!(report.epsilon, 0.0);
    }

    #[test]
    fn sesc_report_passes_where_gaps_stay_positive() {
        let b = q(3, 5);
        let report = verify_sesc(&b, 3, GapMode::Exhaustive).unwrap();
        assert!(report.pass);
        assert!(report.epsilon > 0.0);
        for row in &report.rows {
            assert!(row.gap_f64.ln() / row.n as f64 >= report.epsilon.ln() - 1e-12);
            assert!(row.floor <= row.gap_f64);
        }
    }

    #[test]
    fn appended_two_invariance_of_gap() {
        let b = q(2, 7);
        for n in 1..=5 {
            let (base, den) = scaled_projections(&b, n);
            let system = conjugate_system(&b).unwrap();
            let two = Word::repeat(2, 1).unwrap();
            let mut padded: Vec<BigRational> = enumerate_words(n)
                .unwrap()
                .map(|word| system.project_word(&word.concat(&two)))
                .collect();
            padded.sort();
            let mut orig: Vec<BigRational> = base
                .into_iter()
                .map(|v| BigRational::new(v, den.clone()))
                .collect();
            orig.sort();
            assert_eq!(orig, padded);
        }
    }

    #[test]
    fn a3_bound_chain_holds() {
        let b = q(2, 5);
        let mut checked = 0;
        for i in enumerate_words(5).unwrap() {
            for j in enumerate_words(5).unwrap().step_by(7) {
                if let Some((gap, bound)) = a3_prefix_bound(&b, &i, &j).unwrap() {
                    assert!(gap >= bound, "{i} {j}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn depth_caps() {
        assert!(matches!(
            delta_n(&q(1, 2), 9, GapMode::Exhaustive),
            Err(Error::DepthCap { .. })
        ));
        assert!(delta_n(&q(1, 2), 0, GapMode::Pruned).is_err());
        assert!(delta_n(&q(3, 2), 2, GapMode::Pruned).is_err());
    }

    fn word_strategy(len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(1u8..=3, len).prop_map(|s| Word::new(s).unwrap())
    }

    fn b_strategy() -> impl Strategy<Value = BigRational> {
        (2i64..30).prop_flat_map(|d| (1..d).prop_map(move |n| q(n, d)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn f3_antisymmetry(b in b_strategy(), i in word_strategy(5), j in word_strategy(5)) {
            let f = f_function(3, &i, &j, &b).unwrap();
            prop_assert_eq!(f, -f_function(3, &j, &i, &b).unwrap());
        }

        #[test]
        fn pruned_matches_exhaustive(b in b_strategy(), n in 1usize..5) {
            let pruned = delta_n(&b, n, GapMode::Pruned).unwrap();
            let full = delta_n(&b, n, GapMode::Exhaustive).unwrap();
            prop_assert_eq!(pruned.value, full.value);
        }
    }
}
