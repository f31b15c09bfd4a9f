//! Synthetic subjects with known segmentations and pattern labels, their data
//! variants, and controlled degradations of the ground-truth clustering.
//!
//! Every random stream is a `ChaCha8Rng` keyed by `(seed, subject, purpose,
//! index)`, so outputs depend only on those values and not on thread count
//! or call order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, DiscreteCDF, NegativeBinomial, Normal};

use crate::canonical::{nearest_psd_correlation, valid_patterns};
use crate::core_model::{spearman_correlation, Clustering, CorrelationMatrix, SegmentedClustering, Segmentation, TimeSeries};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DOWNSAMPLE_FACTOR: usize = 60;
pub const N_LEVELS: u32 = 22;

const CHOLESKY_JITTER: f64 = 1e-10;

mod purpose {
    pub const ORDER: u64 = 1;
    pub const LENGTHS: u64 = 2;
    pub const SEGMENT: u64 = 3;
    pub const SHIFT: u64 = 4;
    pub const SPARSIFY: u64 = 5;
    pub const DEGRADE_WRONG: u64 = 6;
    pub const DEGRADE_SHIFT: u64 = 7;
    pub const REDUCE: u64 = 8;
}

/// Deterministic stream for one `(seed, subject, purpose, index)` tuple.
pub fn stream(seed: u64, subject: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, v) in key.chunks_exact_mut(8).zip([seed, subject, purpose, index]) {
        chunk.copy_from_slice(&v.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftParams {
    pub gev_shape: f64,
    pub gev_loc: f64,
    pub gev_scale: f64,
    pub nb_r: f64,
    pub nb_p: f64,
}

impl Default for ShiftParams {
    fn default() -> Self {
        Self { gev_shape: 0.2, gev_loc: 0.0, gev_scale: 1.0, nb_r: 5.0, nb_p: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSpec {
    pub seed: u64,
    pub subject: u64,
    pub n_vars: usize,
    pub n_segments: usize,
    pub segment_length_range: (usize, usize),
    /// Largest tolerated elementwise gap between empirical and target coefficients.
    pub tolerance: f64,
    pub max_attempts: u32,
    pub shift: ShiftParams,
}

impl SubjectSpec {
    pub fn desk(seed: u64, subject: u64) -> Self {
        Self {
            seed,
            subject,
            n_vars: 3,
            n_segments: 100,
            segment_length_range: (300, 3000),
            tolerance: 0.1,
            max_attempts: 20,
            shift: ShiftParams::default(),
        }
    }

    pub fn id(&self) -> String {
        format!("subject_{:03}", self.subject)
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.segment_length_range;
        if self.n_vars < 2 {
            return Err(Error::Config(format!("need V >= 2, got {}", self.n_vars)));
        }
        if self.n_segments < 1 {
            return Err(Error::Config("need at least one segment".into()));
        }
        if lo < 2 || lo > hi {
            return Err(Error::Config(format!("bad segment length range [{lo}, {hi}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Raw,
    Normal,
    NonNormal,
    Downsampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    Complete,
    Partial,
    Sparse,
}

impl Completeness {
    pub fn keep_fraction(&self) -> f64 {
        match self {
            Completeness::Complete => 1.0,
            Completeness::Partial => 0.7,
            Completeness::Sparse => 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variant {
    pub distribution: Distribution,
    pub completeness: Completeness,
}

impl Variant {
    pub const NORMAL_COMPLETE: Variant = Variant { distribution: Distribution::Normal, completeness: Completeness::Complete };

    pub fn new(distribution: Distribution, completeness: Completeness) -> Self {
        Self { distribution, completeness }
    }

    /// The twelve data variants, excluding `raw`.
    pub fn standard() -> Vec<Variant> {
        let mut out = Vec::new();
        for d in [Distribution::Normal, Distribution::NonNormal, Distribution::Downsampled] {
            for c in [Completeness::Complete, Completeness::Partial, Completeness::Sparse] {
                out.push(Variant::new(d, c));
            }
        }
        out
    }

    /// Directory-safe form, e.g. `non_normal_sparse`.
    pub fn slug(&self) -> String {
        self.to_string().replace(':', "_")
    }
}

fn serde_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_string)).unwrap_or_default()
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", serde_name(&self.distribution), serde_name(&self.completeness))
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown variant {s:?}, expected <distribution>:<completeness>"));
        let (d, c) = s.split_once(':').unwrap_or((s, "complete"));
        let distribution = serde_json::from_value(serde_json::Value::String(d.into())).map_err(|_| bad())?;
        let completeness = serde_json::from_value(serde_json::Value::String(c.into())).map_err(|_| bad())?;
        Ok(Variant { distribution, completeness })
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub id: String,
    pub variant: Variant,
    pub ts: TimeSeries,
    pub truth: SegmentedClustering,
    /// Generating pattern id of each segment.
    pub labels: Vec<u64>,
}

/// Pattern sequence: every pattern used ⌊M/L⌋ or ⌈M/L⌉ times, never twice in a row.
fn pattern_order(ids: &[u64], m: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let l = ids.len();
    let mut extra: Vec<usize> = (0..l).collect();
    extra.shuffle(rng);
    let mut counts = vec![m / l; l];
    for &i in &extra[..m % l] {
        counts[i] += 1;
    }
    let mut order = Vec::with_capacity(m);
    let mut prev: Option<usize> = None;
    for placed in 0..m {
        let remaining = m - placed;
        // a pattern holding more than half the remaining slots must go now
        let forced = (0..l).find(|&i| Some(i) != prev && 2 * counts[i] > remaining);
        let pick = forced.unwrap_or_else(|| {
            let candidates: Vec<usize> = (0..l).filter(|&i| Some(i) != prev && counts[i] > 0).collect();
            let total: usize = candidates.iter().map(|&i| counts[i]).sum();
            let mut r = rng.random_range(0..total);
            *candidates
                .iter()
                .find(|&&i| {
                    if r < counts[i] {
                        true
                    } else {
                        r -= counts[i];
                        false
                    }
                })
                .unwrap()
        });
        counts[pick] -= 1;
        order.push(ids[pick]);
        prev = Some(pick);
    }
    order
}

/// Lower Cholesky factor of the Gaussian-copula matrix reproducing the given
/// Spearman coefficients.
pub fn copula_factor(target: &CorrelationMatrix) -> Result<DMatrix<f64>> {
    let pearson = CorrelationMatrix::new(
        target.dim(),
        target
            .coefficients()
            .iter()
            .map(|r| 2.0 * (std::f64::consts::PI * r / 6.0).sin())
            .collect(),
    )?;
    let full = nearest_psd_correlation(&pearson.to_full());
    let n = full.nrows();
    let jittered = full + DMatrix::identity(n, n) * CHOLESKY_JITTER;
    Cholesky::new(jittered)
        .map(|c| c.unpack())
        .ok_or_else(|| Error::Generation("copula matrix not factorizable".into()))
}

fn draw_segment(factor: Option<&DMatrix<f64>>, n_vars: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(len * n_vars);
    for _ in 0..len {
        let z = DVector::from_fn(n_vars, |_, _| rng.sample::<f64, _>(StandardNormal));
        match factor {
            Some(l) => out.extend((l * z).iter()),
            None => out.extend(z.iter()),
        }
    }
    out
}

fn build_subject(spec: &SubjectSpec, structured: bool) -> Result<Subject> {
    spec.validate()?;
    let patterns = valid_patterns(spec.n_vars)?;
    let ids: Vec<u64> = patterns.iter().map(|p| p.id).collect();
    let targets: BTreeMap<u64, &CorrelationMatrix> =
        patterns.iter().map(|p| Ok((p.id, p.relaxed()?))).collect::<Result<_>>()?;
    let labels = pattern_order(&ids, spec.n_segments, &mut stream(spec.seed, spec.subject, purpose::ORDER, 0));
    let (lo, hi) = spec.segment_length_range;
    let mut len_rng = stream(spec.seed, spec.subject, purpose::LENGTHS, 0);
    let lengths: Vec<usize> = (0..spec.n_segments).map(|_| len_rng.random_range(lo..=hi)).collect();

    let mut data = Vec::with_capacity(lengths.iter().sum::<usize>() * spec.n_vars);
    let mut boundaries = vec![0];
    for (m, (&label, &len)) in labels.iter().zip(&lengths).enumerate() {
        let target = targets[&label];
        let factor = copula_factor(target)?;
        let mut accepted = None;
        for attempt in 0..spec.max_attempts {
            let mut rng = stream(spec.seed, spec.subject, purpose::SEGMENT, ((m as u64) << 16) | attempt as u64);
            let seg = draw_segment(structured.then_some(&factor), spec.n_vars, len, &mut rng);
            if !structured {
                accepted = Some(seg);
                break;
            }
            let emp = spearman_correlation(&seg, spec.n_vars)?;
            let dev = emp
                .coefficients()
                .iter()
                .zip(target.coefficients())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dev <= spec.tolerance {
                accepted = Some(seg);
                break;
            }
        }
        let seg = accepted.ok_or_else(|| {
            Error::Generation(format!(
                "segment {m} (pattern {label}, length {len}) missed tolerance {} after {} attempts",
                spec.tolerance, spec.max_attempts
            ))
        })?;
        data.extend(seg);
        boundaries.push(boundaries.last().unwrap() + len);
    }
    let n_obs = *boundaries.last().unwrap();
    let ts = TimeSeries::new(data, spec.n_vars, None, 1.0)?;
    let truth = SegmentedClustering::new(
        Segmentation::new(boundaries, n_obs)?,
        Clustering::new(labels.iter().map(|&l| l as u32).collect())?,
    )?;
    Ok(Subject {
        id: spec.id(),
        variant: Variant::new(if structured { Distribution::Normal } else { Distribution::Raw }, Completeness::Complete),
        ts,
        truth,
        labels,
    })
}

/// Normal complete subject: each segment is drawn from its pattern's Gaussian
/// copula and redrawn until its Spearman matrix is within tolerance.
pub fn generate_subject(spec: &SubjectSpec) -> Result<Subject> {
    build_subject(spec, true)
}

/// Builds any variant. Non-normal data is derived from the normal stage,
/// downsampled data from the non-normal stage, and row deletion comes last.
pub fn generate_variant(spec: &SubjectSpec, variant: Variant) -> Result<Subject> {
    let mut s = match variant.distribution {
        Distribution::Raw => build_subject(spec, false)?,
        _ => generate_subject(spec)?,
    };
    if matches!(variant.distribution, Distribution::NonNormal | Distribution::Downsampled) {
        s.ts = apply_distribution_shift(&s.ts, &spec.shift, spec.seed, spec.subject)?;
    }
    if variant.distribution == Distribution::Downsampled {
        let (ts, seg) = downsample(&s.ts, s.truth.segmentation(), DOWNSAMPLE_FACTOR)?;
        s.ts = ts;
        s.truth = SegmentedClustering::new(seg, s.truth.clustering().clone())?;
    }
    let keep = variant.completeness.keep_fraction();
    if keep < 1.0 {
        let mut rng = stream(spec.seed, spec.subject, purpose::SPARSIFY, variant.distribution as u64);
        let (ts, seg) = sparsify(&s.ts, s.truth.segmentation(), keep, &mut rng)?;
        s.ts = ts;
        s.truth = SegmentedClustering::new(seg, s.truth.clustering().clone())?;
    }
    s.variant = variant;
    Ok(s)
}

/// `(-ln Φ(x))` without losing precision when `Φ(x)` rounds to 1.
fn neg_log_cdf(x: f64, n: &Normal) -> f64 {
    -(-n.cdf(-x)).ln_1p()
}

pub fn gev_quantile_from_normal(x: f64, p: &ShiftParams, n: &Normal) -> f64 {
    let w = neg_log_cdf(x, n);
    if p.gev_shape == 0.0 {
        p.gev_loc - p.gev_scale * w.ln()
    } else {
        p.gev_loc + p.gev_scale * (w.powf(-p.gev_shape) - 1.0) / p.gev_shape
    }
}

/// Assignment of marginals to variates: index 0 → GEV, 1 → negative binomial,
/// the rest stay normal.
pub fn shift_assignment(n_vars: usize, seed: u64, subject: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_vars).collect();
    order.shuffle(&mut stream(seed, subject, purpose::SHIFT, 0));
    order
}

/// Monotone marginal transforms of normal data: one variate to GEV, one to
/// negative binomial, the rest unchanged.
pub fn apply_distribution_shift(ts: &TimeSeries, p: &ShiftParams, seed: u64, subject: u64) -> Result<TimeSeries> {
    let n = Normal::new(0.0, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
    let nb = NegativeBinomial::new(p.nb_r, p.nb_p).map_err(|e| Error::Config(format!("negative binomial: {e}")))?;
    let v = ts.n_vars();
    let order = shift_assignment(v, seed, subject);
    let mut data = ts.data().to_vec();
    for row in data.chunks_exact_mut(v) {
        row[order[0]] = gev_quantile_from_normal(row[order[0]], p, &n);
        if v > 1 {
            let x = row[order[1]];
            let u = n.cdf(x).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
            row[order[1]] = nb.inverse_cdf(u) as f64;
        }
    }
    TimeSeries::new(data, v, Some(ts.timestamps().to_vec()), ts.sample_interval())?
        .with_names(ts.variate_names().to_vec())
}

/// Means over non-overlapping windows of `factor` rows; trailing rows that do
/// not fill a window are dropped. Boundaries map by floor division.
pub fn downsample(ts: &TimeSeries, seg: &Segmentation, factor: usize) -> Result<(TimeSeries, Segmentation)> {
    if factor == 0 {
        return Err(Error::Config("downsample factor must be positive".into()));
    }
    let v = ts.n_vars();
    let n = ts.n_rows() / factor;
    let mut data = Vec::with_capacity(n * v);
    let mut stamps = Vec::with_capacity(n);
    for w in 0..n {
        let rows = ts.rows(w * factor..(w + 1) * factor);
        for j in 0..v {
            data.push(rows.iter().skip(j).step_by(v).sum::<f64>() / factor as f64);
        }
        stamps.push(ts.timestamps()[w * factor]);
    }
    let mut boundaries: Vec<usize> = seg.boundaries().iter().map(|b| b / factor).collect();
    *boundaries.last_mut().unwrap() = n;
    let seg = Segmentation::new(boundaries, n)?;
    let ts = TimeSeries::new(data, v, Some(stamps), ts.sample_interval() * factor as f64)?
        .with_names(ts.variate_names().to_vec())?;
    Ok((ts, seg))
}

/// Keeps exactly `round(keep·T)` uniformly chosen rows. Segments left with
/// fewer than two rows take rows back from segments that can spare them.
pub fn sparsify(ts: &TimeSeries, seg: &Segmentation, keep: f64, rng: &mut ChaCha8Rng) -> Result<(TimeSeries, Segmentation)> {
    if !(keep > 0.0 && keep <= 1.0) {
        return Err(Error::Config(format!("keep fraction {keep} outside (0, 1]")));
    }
    let t = ts.n_rows();
    let target = (keep * t as f64).round() as usize;
    let m = seg.n_segments();
    if target < 2 * m {
        return Err(Error::Config(format!("keeping {target} rows cannot leave 2 per segment for {m} segments")));
    }
    if target == t {
        return Ok((ts.clone(), seg.clone()));
    }
    let mut kept = vec![false; t];
    for i in rand::seq::index::sample(rng, t, target) {
        kept[i] = true;
    }
    let count = |kept: &[bool], s: usize| kept[seg.range(s)].iter().filter(|&&k| k).count();
    for s in 0..m {
        while count(&kept, s) < 2 {
            let missing: Vec<usize> = seg.range(s).filter(|&i| !kept[i]).collect();
            let add = missing[rng.random_range(0..missing.len())];
            let donors: Vec<usize> = (0..m).filter(|&o| o != s && count(&kept, o) > 2).collect();
            let donor = donors[rng.random_range(0..donors.len())];
            let present: Vec<usize> = seg.range(donor).filter(|&i| kept[i]).collect();
            kept[present[rng.random_range(0..present.len())]] = false;
            kept[add] = true;
        }
    }
    let rows: Vec<usize> = (0..t).filter(|&i| kept[i]).collect();
    let boundaries: Vec<usize> = seg.boundaries().iter().map(|&b| rows.partition_point(|&r| r < b)).collect();
    Ok((ts.select_rows(&rows)?, Segmentation::new(boundaries, rows.len())?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    ShiftBoundaries,
    WrongClusters,
    Combined,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::ShiftBoundaries, Strategy::WrongClusters, Strategy::Combined];

    pub fn name(&self) -> String {
        serde_name(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub strategy: Strategy,
    pub level: u32,
    pub seed: u64,
}

impl DegradationSpec {
    pub fn file_stem(&self) -> String {
        format!("{}_{:02}", self.strategy.name(), self.level)
    }
}

/// Number of wrongly assigned segments at a level: all `M` at level 1,
/// falling linearly towards zero at level 22.
pub fn wrong_count(m: usize, level: u32) -> usize {
    (m * (N_LEVELS + 1 - level) as usize).div_ceil(N_LEVELS as usize)
}

/// Largest boundary shift at a level.
pub fn max_shift(mean_len: f64, level: u32) -> usize {
    (level as f64 * mean_len / N_LEVELS as f64).ceil() as usize
}

/// Applies `wrong` wrong labels and boundary shifts of at most `max_shift`
/// rows. Both draws are fixed per `(seed, subject)`, so raising either
/// argument only adds damage on top of a smaller setting.
pub fn degrade_with(truth: &SegmentedClustering, wrong: usize, max_shift: usize, seed: u64, subject: u64) -> Result<SegmentedClustering> {
    let seg = truth.segmentation();
    let labels = truth.clustering().labels();
    let m = seg.n_segments();
    if wrong > m {
        return Err(Error::InvalidInput(format!("{wrong} wrong segments requested for {m} segments")));
    }
    let distinct: Vec<u32> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut rng = stream(seed, subject, purpose::DEGRADE_WRONG, 0);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let replacement: Vec<Option<u32>> = labels
        .iter()
        .map(|&l| {
            let others: Vec<u32> = distinct.iter().copied().filter(|&o| o != l).collect();
            (!others.is_empty()).then(|| others[rng.random_range(0..others.len())])
        })
        .collect();
    let mut new_labels = labels.to_vec();
    for &s in &order[..wrong] {
        if let Some(r) = replacement[s] {
            new_labels[s] = r;
        }
    }

    let b = seg.boundaries();
    let mut shift_rng = stream(seed, subject, purpose::DEGRADE_SHIFT, 0);
    let fractions: Vec<f64> = (0..b.len()).map(|_| shift_rng.random::<f64>()).collect();
    let mut nb = b.to_vec();
    if max_shift > 0 {
        for i in 1..b.len() - 1 {
            let s = 1 + (fractions[i] * max_shift as f64).floor() as usize;
            nb[i] = (b[i] + s).min(b[i + 1] - 2);
        }
    }
    SegmentedClustering::new(Segmentation::new(nb, seg.n_obs())?, Clustering::new(new_labels)?)
}

pub fn degrade_clustering(truth: &SegmentedClustering, spec: &DegradationSpec, subject: u64) -> Result<SegmentedClustering> {
    if !(1..=N_LEVELS).contains(&spec.level) {
        return Err(Error::Config(format!("level {} outside 1..={N_LEVELS}", spec.level)));
    }
    let m = truth.segmentation().n_segments();
    let mean_len = truth.segmentation().n_obs() as f64 / m as f64;
    let (wrong, shift) = match spec.strategy {
        Strategy::ShiftBoundaries => (0, max_shift(mean_len, spec.level)),
        Strategy::WrongClusters => (wrong_count(m, spec.level), 0),
        Strategy::Combined => (wrong_count(m, spec.level), max_shift(mean_len, spec.level)),
    };
    degrade_with(truth, wrong, shift, spec.seed, subject)
}

/// The 66 degraded clusterings: three strategies × 22 levels.
pub fn degraded_set(truth: &SegmentedClustering, seed: u64, subject: u64) -> Result<Vec<(DegradationSpec, SegmentedClustering)>> {
    let mut out = Vec::with_capacity(66);
    for strategy in Strategy::ALL {
        for level in 1..=N_LEVELS {
            let spec = DegradationSpec { strategy, level, seed };
            out.push((spec, degrade_clustering(truth, &spec, subject)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceMode {
    Clusters50,
    Clusters25,
    Segments50,
    Segments25,
}

impl FromStr for ReduceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| Error::Config(format!("unknown reduce mode {s:?}")))
    }
}

/// Half of `n` rounded down, and half of that rounded up: 23 → 11 → 6 and
/// 100 → 50 → 25.
pub fn reduced_count(n: usize, half: bool) -> usize {
    if half {
        (n / 2).max(1)
    } else {
        (n / 2).div_ceil(2).max(1)
    }
}

/// Keeps a random subset of clusters (11 or 6 of 23) or segments (50 or 25
/// of 100). Smaller subsets are prefixes of the same seeded permutation, so
/// the 25% variants are contained in the 50% ones.
pub fn reduce_variant(s: &Subject, mode: ReduceMode, seed: u64, subject: u64) -> Result<Subject> {
    let seg = s.truth.segmentation();
    let m = seg.n_segments();
    let labels = s.truth.clustering().labels();
    let keep_segments: Vec<usize> = match mode {
        ReduceMode::Clusters50 | ReduceMode::Clusters25 => {
            let mut clusters: Vec<u32> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
            clusters.shuffle(&mut stream(seed, subject, purpose::REDUCE, 0));
            let n = reduced_count(clusters.len(), mode == ReduceMode::Clusters50);
            let kept: BTreeSet<u32> = clusters[..n].iter().copied().collect();
            (0..m).filter(|&i| kept.contains(&labels[i])).collect()
        }
        ReduceMode::Segments50 | ReduceMode::Segments25 => {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut stream(seed, subject, purpose::REDUCE, 1));
            let n = reduced_count(m, mode == ReduceMode::Segments50);
            let mut kept = order[..n].to_vec();
            kept.sort_unstable();
            kept
        }
    };
    let mut rows = Vec::new();
    let mut boundaries = vec![0];
    for &i in &keep_segments {
        rows.extend(seg.range(i));
        boundaries.push(rows.len());
    }
    let ts = s.ts.select_rows(&rows)?;
    let truth = SegmentedClustering::new(
        Segmentation::new(boundaries, rows.len())?,
        Clustering::new(keep_segments.iter().map(|&i| labels[i]).collect())?,
    )?;
    Ok(Subject {
        id: s.id.clone(),
        variant: s.variant,
        ts,
        truth,
        labels: keep_segments.iter().map(|&i| s.labels[i]).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub timeseries: String,
    pub truth: String,
    pub labels: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub seed: u64,
    pub subject_id: String,
    pub variant: Variant,
    pub spec: SubjectSpec,
    pub n_obs: usize,
    pub n_segments: usize,
    pub files: ManifestFiles,
}

/// Writes `manifest.json`, `timeseries.csv`, `truth.json` and `labels.csv`.
pub fn write_subject(dir: &Path, spec: &SubjectSpec, s: &Subject) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let files = ManifestFiles {
        timeseries: "timeseries.csv".into(),
        truth: "truth.json".into(),
        labels: "labels.csv".into(),
    };
    s.ts.write_csv(std::fs::File::create(dir.join(&files.timeseries))?)?;
    std::fs::write(dir.join(&files.truth), s.truth.to_json()?)?;
    let mut wr = csv::Writer::from_path(dir.join(&files.labels))?;
    wr.write_record(["segment_index", "pattern_id"])?;
    for (m, l) in s.labels.iter().enumerate() {
        wr.write_record([m.to_string(), l.to_string()])?;
    }
    wr.flush()?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        seed: spec.seed,
        subject_id: s.id.clone(),
        variant: s.variant,
        spec: spec.clone(),
        n_obs: s.ts.n_rows(),
        n_segments: s.truth.segmentation().n_segments(),
        files,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn read_subject(dir: &Path) -> Result<(Manifest, Subject)> {
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "{}: schema version {} unsupported (expected {SCHEMA_VERSION})",
            dir.display(),
            manifest.schema_version
        )));
    }
    let ts = TimeSeries::read_csv_path(&dir.join(&manifest.files.timeseries))?;
    let truth = SegmentedClustering::from_json(&std::fs::read_to_string(dir.join(&manifest.files.truth))?)?;
    let mut labels = Vec::new();
    for rec in csv::Reader::from_path(dir.join(&manifest.files.labels))?.records() {
        let rec = rec?;
        labels.push(rec[1].parse().map_err(|_| Error::InvalidInput(format!("bad pattern id {:?}", &rec[1])))?);
    }
    if labels.len() != truth.segmentation().n_segments() {
        return Err(Error::DimensionMismatch { expected: truth.segmentation().n_segments(), got: labels.len() });
    }
    let subject = Subject { id: manifest.subject_id.clone(), variant: manifest.variant, ts, truth, labels };
    Ok((manifest, subject))
}

/// Writes `clusterings/<strategy>_<level>.json` for every degraded clustering.
pub fn write_degraded(dir: &Path, set: &[(DegradationSpec, SegmentedClustering)]) -> Result<()> {
    let dir = dir.join("clusterings");
    std::fs::create_dir_all(&dir)?;
    for (spec, sc) in set {
        std::fs::write(dir.join(format!("{}.json", spec.file_stem())), sc.to_json()?)?;
    }
    Ok(())
}
