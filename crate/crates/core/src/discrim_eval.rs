//! Six-criterion evaluation of how well a distance function separates the
//! canonical patterns, and the ranking of distance functions on it.
//!
//! | # | criterion | better |
//! |---|-----------|--------|
//! | 1 | mean normalized distance at level 0 | lower |
//! | 2 | adjacent level means significantly increasing (pass/fail) | pass |
//! | 3 | mean rise between adjacent level means | higher |
//! | 4 | entropy of all normalized distances | higher |
//! | 5 | mean entropy within level sets | lower |
//! | 6 | macro-F1 of nearest-pattern classification | higher |

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::canonical::{ideal_l1, CanonicalPattern};
use crate::core_model::CorrelationMatrix;
use crate::distances::DistanceFunction;
use crate::error::{Error, Result};
use crate::mapping::classification_report;

pub const DEFAULT_BINS: usize = 50;
/// Individual confidence for each adjacent-level interval (Bonferroni over 5 for 95%).
pub const INDIVIDUAL_CONFIDENCE: f64 = 0.99;

pub const CRITERIA: [&str; 6] = [
    "level0_mean",
    "monotonic",
    "rate_of_increase",
    "overall_entropy",
    "level_set_entropy",
    "macro_f1",
];
const HIGHER_IS_BETTER: [bool; 6] = [false, true, true, true, false, true];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceSample {
    pub segment: usize,
    pub pattern: u64,
    pub generating: u64,
    pub level: u32,
    pub value: f64,
}

/// Distance of every segment matrix to every valid pattern.
pub fn distance_samples(
    matrices: &[CorrelationMatrix],
    labels: &[u64],
    patterns: &[CanonicalPattern],
    d: &DistanceFunction,
) -> Result<Vec<DistanceSample>> {
    if matrices.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: matrices.len(), got: labels.len() });
    }
    let valid: Vec<&CanonicalPattern> = patterns.iter().filter(|p| p.is_valid()).collect();
    let ideals: BTreeMap<u64, &[i8]> = valid.iter().map(|p| (p.id, p.ideal.as_slice())).collect();
    let mut out = Vec::with_capacity(matrices.len() * valid.len());
    for (m, (a, &gen)) in matrices.iter().zip(labels).enumerate() {
        let gen_ideal = ideals
            .get(&gen)
            .ok_or_else(|| Error::InvalidInput(format!("segment {m}: label {gen} is not a valid pattern")))?;
        for p in &valid {
            out.push(DistanceSample {
                segment: m,
                pattern: p.id,
                generating: gen,
                level: ideal_l1(gen_ideal, &p.ideal),
                value: d.distance(a, p.relaxed()?)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<f64>,
    /// All inputs were equal; every value is mapped to 0.
    pub degenerate: bool,
}

/// Min-max scaling onto [0, 1] over the whole multiset.
pub fn normalize_distances(values: &[f64]) -> Result<Normalized> {
    if values.is_empty() {
        return Err(Error::InvalidInput("no distances to normalize".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Numerical("non-finite distance".into()));
    }
    if hi == lo {
        return Ok(Normalized { values: vec![0.0; values.len()], degenerate: true });
    }
    let span = hi - lo;
    Ok(Normalized { values: values.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect(), degenerate: false })
}

/// Bin of a value in [0, 1] for `bins` equal-width bins; 1.0 falls in the last bin.
pub fn bin_index(x: f64, bins: usize) -> usize {
    ((x * bins as f64).floor() as usize).min(bins - 1)
}

/// Base-2 Shannon entropy of the histogram of `values` over [0, 1].
pub fn shannon_entropy(values: &[f64], bins: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("entropy of an empty sample".into()));
    }
    if bins == 0 {
        return Err(Error::Config("need at least one bin".into()));
    }
    let mut counts = vec![0usize; bins];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("value {v} outside [0, 1]")));
        }
        counts[bin_index(v, bins)] += 1;
    }
    let n = values.len() as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: u32,
    pub n: usize,
    pub mean: f64,
    /// Sample variance (n − 1 denominator).
    pub variance: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetSummary {
    pub levels: Vec<LevelStats>,
    pub average_entropy: f64,
    /// Mean absolute difference of consecutive level means.
    pub rate_of_increase: f64,
    pub notes: Vec<String>,
}

/// Per-level statistics of `(level, normalized value)` pairs. Levels `0..=max`
/// that are missing are skipped and noted.
pub fn level_set_stats(samples: &[(u32, f64)], bins: usize) -> Result<LevelSetSummary> {
    let mut by_level: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for &(l, v) in samples {
        by_level.entry(l).or_default().push(v);
    }
    let max = *by_level.keys().next_back().ok_or_else(|| Error::InvalidInput("no samples".into()))?;
    let notes = (0..=max)
        .filter(|l| !by_level.contains_key(l))
        .map(|l| format!("level {l} is empty and excluded"))
        .collect();
    let mut levels = Vec::with_capacity(by_level.len());
    for (level, vals) in &by_level {
        let n = vals.len();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        levels.push(LevelStats { level: *level, n, mean, variance, entropy: shannon_entropy(vals, bins)? });
    }
    let average_entropy = levels.iter().map(|l| l.entropy).sum::<f64>() / levels.len() as f64;
    let rate_of_increase = if levels.len() > 1 {
        levels.windows(2).map(|w| (w[1].mean - w[0].mean).abs()).sum::<f64>() / (levels.len() - 1) as f64
    } else {
        0.0
    };
    Ok(LevelSetSummary { levels, average_entropy, rate_of_increase, notes })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairInterval {
    pub from: u32,
    pub to: u32,
    pub difference: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityResult {
    pub passed: bool,
    pub intervals: Vec<PairInterval>,
    pub diagnostic: Option<String>,
}

/// Normal-approximation interval for `mean(b) − mean(a)` with pooled variance.
pub fn pooled_difference_interval(a: &LevelStats, b: &LevelStats, confidence: f64) -> Result<PairInterval> {
    if a.n < 2 || b.n < 2 {
        return Err(Error::InvalidInput("need two samples per level".into()));
    }
    let z = Normal::new(0.0, 1.0)
        .map_err(|e| Error::Numerical(e.to_string()))?
        .inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let pooled = ((a.n - 1) as f64 * a.variance + (b.n - 1) as f64 * b.variance) / (a.n + b.n - 2) as f64;
    let se = (pooled * (1.0 / a.n as f64 + 1.0 / b.n as f64)).sqrt();
    let difference = b.mean - a.mean;
    Ok(PairInterval { from: a.level, to: b.level, difference, lower: difference - z * se, upper: difference + z * se })
}

/// Passes iff every adjacent-level interval lies strictly above zero.
pub fn monotonicity_test(summary: &LevelSetSummary) -> Result<MonotonicityResult> {
    let mut intervals = Vec::new();
    let mut diagnostic = None;
    for w in summary.levels.windows(2) {
        if w[0].variance == 0.0 && w[1].variance == 0.0 {
            diagnostic.get_or_insert_with(|| format!("levels {} and {} have zero variance", w[0].level, w[1].level));
        }
        intervals.push(pooled_difference_interval(&w[0], &w[1], INDIVIDUAL_CONFIDENCE)?);
    }
    if intervals.is_empty() {
        diagnostic.get_or_insert_with(|| "fewer than two levels".into());
    }
    let passed = diagnostic.is_none() && intervals.iter().all(|i| i.lower > 0.0);
    Ok(MonotonicityResult { passed, intervals, diagnostic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionValues {
    pub level0_mean: f64,
    pub monotonic: bool,
    pub rate_of_increase: f64,
    pub overall_entropy: f64,
    pub level_set_entropy: f64,
    pub macro_f1: f64,
}

impl CriterionValues {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.level0_mean,
            if self.monotonic { 1.0 } else { 0.0 },
            self.rate_of_increase,
            self.overall_entropy,
            self.level_set_entropy,
            self.macro_f1,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceEvaluation {
    pub distance: String,
    pub criteria: CriterionValues,
    pub levels: LevelSetSummary,
    pub monotonicity: MonotonicityResult,
    pub degenerate: bool,
}

/// All six criteria for one distance function on one subject.
pub fn evaluate_distance(
    matrices: &[CorrelationMatrix],
    labels: &[u64],
    patterns: &[CanonicalPattern],
    d: &DistanceFunction,
    bins: usize,
) -> Result<DistanceEvaluation> {
    let samples = distance_samples(matrices, labels, patterns, d)?;
    let raw: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let norm = normalize_distances(&raw)?;
    let pairs: Vec<(u32, f64)> = samples.iter().zip(&norm.values).map(|(s, &v)| (s.level, v)).collect();
    let levels = level_set_stats(&pairs, bins)?;
    let monotonicity = monotonicity_test(&levels)?;
    let level0_mean = levels
        .levels
        .iter()
        .find(|l| l.level == 0)
        .map(|l| l.mean)
        .ok_or_else(|| Error::InvalidInput("level 0 is empty".into()))?;

    // nearest pattern per segment, ties to the smaller id
    let mut best: BTreeMap<usize, (f64, u64)> = BTreeMap::new();
    for s in &samples {
        let e = best.entry(s.segment).or_insert((s.value, s.pattern));
        if s.value < e.0 || (s.value == e.0 && s.pattern < e.1) {
            *e = (s.value, s.pattern);
        }
    }
    let predicted: Vec<u64> = best.values().map(|b| b.1).collect();
    let report = classification_report(labels, &predicted)?;

    Ok(DistanceEvaluation {
        distance: d.key(),
        criteria: CriterionValues {
            level0_mean,
            monotonic: monotonicity.passed,
            rate_of_increase: levels.rate_of_increase,
            overall_entropy: shannon_entropy(&norm.values, bins)?,
            level_set_entropy: levels.average_entropy,
            macro_f1: report.macro_f1,
        },
        levels,
        monotonicity,
        degenerate: norm.degenerate,
    })
}

/// Competition ranks ("1224"): equal values share the best rank and the next
/// distinct value skips the shared positions.
pub fn competition_ranks(values: &[f64], higher_is_better: bool) -> Vec<u32> {
    values
        .iter()
        .map(|v| {
            let better = values
                .iter()
                .filter(|o| if higher_is_better { *o > v } else { *o < v })
                .count();
            better as u32 + 1
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRanks {
    pub distance: String,
    pub values: [f64; 6],
    pub ranks: [u32; 6],
    pub average_rank: f64,
}

pub fn rank_distance_functions(evaluated: &[(String, CriterionValues)]) -> Vec<CriterionRanks> {
    let columns: Vec<Vec<u32>> = (0..6)
        .map(|c| {
            let col: Vec<f64> = evaluated.iter().map(|(_, v)| v.as_array()[c]).collect();
            competition_ranks(&col, HIGHER_IS_BETTER[c])
        })
        .collect();
    evaluated
        .iter()
        .enumerate()
        .map(|(i, (name, v))| {
            let ranks: [u32; 6] = std::array::from_fn(|c| columns[c][i]);
            CriterionRanks {
                distance: name.clone(),
                values: v.as_array(),
                ranks,
                average_rank: ranks.iter().sum::<u32>() as f64 / 6.0,
            }
        })
        .collect()
}

/// Rows of `subject,variant,distance,criterion,value,rank`, with one
/// `avg_rank` row per distance.
pub fn write_ranks_csv<W: std::io::Write>(w: W, rows: &[(String, String, CriterionRanks)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["subject", "variant", "distance", "criterion", "value", "rank"])?;
    for (subject, variant, r) in rows {
        for c in 0..6 {
            wr.write_record([
                subject.as_str(),
                variant.as_str(),
                r.distance.as_str(),
                CRITERIA[c],
                &r.values[c].to_string(),
                &r.ranks[c].to_string(),
            ])?;
        }
        wr.write_record([subject.as_str(), variant.as_str(), r.distance.as_str(), "avg_rank", "", &r.average_rank.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}
