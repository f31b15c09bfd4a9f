//! Canonical correlation patterns, their PSD-valid relaxations and level sets.
//!
//! A pattern's ideal vector has every coefficient in {-1, 0, 1}. Its id is the
//! base-3 number formed by the coefficients in lexicographic order, most
//! significant first, with digit 0 for 0, 1 for +1 and 2 for -1. For V=3 this
//! gives the familiar 0–26 numbering where (0,0,1)=1, (0,0,-1)=2 and (1,1,1)=13.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::core_model::{q_len, CorrelationMatrix};
use crate::error::{Error, Result};

/// Minimum eigenvalue accepted as positive semi-definite.
pub const PSD_TOLERANCE: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceBands {
    pub negative: (f64, f64),
    pub negligible: (f64, f64),
    pub positive: (f64, f64),
}

impl Default for ToleranceBands {
    fn default() -> Self {
        Self {
            negative: (-1.0, -0.7),
            negligible: (-0.2, 0.2),
            positive: (0.7, 1.0),
        }
    }
}

impl ToleranceBands {
    pub fn band(&self, sign: i8) -> (f64, f64) {
        match sign.signum() {
            1 => self.positive,
            -1 => self.negative,
            _ => self.negligible,
        }
    }

    fn violation(&self, ideal: &[i8], c: &[f64]) -> f64 {
        ideal
            .iter()
            .zip(c)
            .map(|(&s, &x)| {
                let (lo, hi) = self.band(s);
                (lo - x).max(x - hi).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPattern {
    pub id: u64,
    pub ideal: Vec<i8>,
    pub relaxed: Option<CorrelationMatrix>,
}

impl CanonicalPattern {
    pub fn is_valid(&self) -> bool {
        self.relaxed.is_some()
    }

    pub fn dim(&self) -> usize {
        (2..).find(|&v| q_len(v) >= self.ideal.len()).unwrap()
    }

    pub fn relaxed(&self) -> Result<&CorrelationMatrix> {
        self.relaxed
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("pattern {} is invalid", self.id)))
    }
}

pub fn pattern_id(ideal: &[i8]) -> u64 {
    ideal.iter().fold(0u64, |acc, &s| {
        acc * 3
            + match s.signum() {
                0 => 0,
                1 => 1,
                _ => 2,
            }
    })
}

pub fn ideal_from_id(mut id: u64, q: usize) -> Vec<i8> {
    let mut out = vec![0i8; q];
    for slot in out.iter_mut().rev() {
        *slot = match id % 3 {
            0 => 0,
            1 => 1,
            _ => -1,
        };
        id /= 3;
    }
    out
}

/// Published relaxed coefficients for the 23 valid V=3 patterns.
const TABLE_V3: [(u64, [f64; 3]); 23] = [
    (0, [0.0, 0.0, 0.0]),
    (1, [0.0, 0.0, 1.0]),
    (2, [0.0, 0.0, -1.0]),
    (3, [0.0, 1.0, 0.0]),
    (4, [0.0, 0.71, 0.7]),
    (5, [0.0, 0.71, -0.7]),
    (6, [0.0, -1.0, 0.0]),
    (7, [0.0, -0.71, 0.7]),
    (8, [0.0, -0.71, -0.7]),
    (9, [1.0, 0.0, 0.0]),
    (10, [0.71, 0.0, 0.7]),
    (11, [0.71, 0.0, -0.7]),
    (12, [0.71, 0.7, 0.0]),
    (13, [1.0, 1.0, 1.0]),
    (15, [0.71, -0.7, 0.0]),
    (17, [1.0, -1.0, -1.0]),
    (18, [-1.0, 0.0, 0.0]),
    (19, [-0.71, 0.0, 0.7]),
    (20, [-0.71, 0.0, -0.7]),
    (21, [-0.71, 0.7, 0.0]),
    (23, [-1.0, 1.0, -1.0]),
    (24, [-0.71, -0.7, 0.0]),
    (25, [-1.0, -1.0, 1.0]),
];

/// Agreement required between a computed relaxation and the published table.
pub const SNAP_TOLERANCE: f64 = 0.005;

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

pub fn is_psd(c: &CorrelationMatrix) -> bool {
    min_eigenvalue(&c.to_full()) >= PSD_TOLERANCE
}

/// Searches for a PSD matrix whose coefficients lie in the band of each ideal
/// coefficient's sign.
///
/// 1. The ideal matrix is returned unchanged if it is already PSD.
/// 2. Otherwise negligible coefficients start at 0 and strong ones at the band
///    edge nearest zero (±0.70). Walking the coefficients in lexicographic
///    order, each strong magnitude is raised to the largest value on the 0.01
///    grid that keeps the matrix PSD.
/// 3. If the band-edge start is not PSD, alternating projection between the
///    PSD cone and the band box (at most 1000 iterations, Frobenius change
///    below 1e-9) decides feasibility.
///
/// Returns `None` when no feasible matrix is found.
pub fn relax_pattern(ideal: &[i8], bands: &ToleranceBands) -> Option<CorrelationMatrix> {
    let dim = (2..=8).find(|&v| q_len(v) == ideal.len())?;
    let ideal_c: Vec<f64> = ideal.iter().map(|&s| s.signum() as f64).collect();
    let m = CorrelationMatrix::new(dim, ideal_c).ok()?;
    if is_psd(&m) {
        return Some(m);
    }

    // Work in integer hundredths so grid values are exact decimals.
    let mut hundredths: Vec<i64> = ideal
        .iter()
        .map(|&s| {
            let (lo, hi) = bands.band(s);
            match s.signum() {
                0 => 0,
                1 => (lo * 100.0).round() as i64,
                _ => (hi * 100.0).round() as i64,
            }
        })
        .collect();
    let build = |h: &[i64]| CorrelationMatrix::new(dim, h.iter().map(|&x| x as f64 / 100.0).collect()).ok();
    if build(&hundredths).is_some_and(|c| is_psd(&c)) {
        for q in 0..ideal.len() {
            let s = ideal[q].signum() as i64;
            if s == 0 {
                continue;
            }
            let (lo, hi) = bands.band(ideal[q]);
            let (start, end) = if s > 0 {
                ((lo * 100.0).round() as i64, (hi * 100.0).round() as i64)
            } else {
                ((-hi * 100.0).round() as i64, (-lo * 100.0).round() as i64)
            };
            for mag in (start..=end).rev() {
                let mut trial = hundredths.clone();
                trial[q] = s * mag;
                if build(&trial).is_some_and(|c| is_psd(&c)) {
                    hundredths = trial;
                    break;
                }
            }
        }
        return build(&hundredths);
    }

    alternating_projection(dim, ideal, bands)
}

fn alternating_projection(dim: usize, ideal: &[i8], bands: &ToleranceBands) -> Option<CorrelationMatrix> {
    let clamp_box = |c: &mut [f64]| {
        for (x, &s) in c.iter_mut().zip(ideal) {
            let (lo, hi) = bands.band(s);
            *x = x.clamp(lo, hi);
        }
    };
    let mut c: Vec<f64> = ideal.iter().map(|&s| s.signum() as f64).collect();
    clamp_box(&mut c);
    for _ in 0..1000 {
        let full = CorrelationMatrix::new(dim, c.clone()).ok()?.to_full();
        let projected = nearest_psd_correlation(&full);
        let mut next = CorrelationMatrix::from_full(&projected).ok()?.coefficients().to_vec();
        clamp_box(&mut next);
        let change: f64 = next.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        c = next;
        if change < 1e-9 {
            break;
        }
    }
    let m = CorrelationMatrix::new(dim, c).ok()?;
    (bands.violation(ideal, m.coefficients()) <= 1e-9 && is_psd(&m)).then_some(m)
}

/// Clips negative eigenvalues to zero and rescales to unit diagonal.
pub fn nearest_psd_correlation(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let clipped = eig.eigenvalues.map(|x| x.max(0.0));
    let u = &eig.eigenvectors;
    let p = u * DMatrix::from_diagonal(&clipped) * u.transpose();
    let d: Vec<f64> = (0..p.nrows()).map(|i| p[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
    DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| {
        if i == j {
            1.0
        } else {
            (p[(i, j)] / (d[i] * d[j])).clamp(-1.0, 1.0)
        }
    })
}

/// All `3^Q` patterns for `v` variates, ordered by id. For V=3 the relaxed
/// values are snapped to the published table once they agree within
/// [`SNAP_TOLERANCE`].
pub fn enumerate_patterns(v: usize) -> Result<Vec<CanonicalPattern>> {
    if !(2..=5).contains(&v) {
        return Err(Error::InvalidInput(format!("V={v} outside supported range 2..=5")));
    }
    let q = q_len(v);
    let bands = ToleranceBands::default();
    (0..3u64.pow(q as u32))
        .map(|id| {
            let ideal = ideal_from_id(id, q);
            let mut relaxed = relax_pattern(&ideal, &bands);
            if v == 3 {
                relaxed = snap_v3(id, relaxed)?;
            }
            Ok(CanonicalPattern { id, ideal, relaxed })
        })
        .collect()
}

fn snap_v3(id: u64, relaxed: Option<CorrelationMatrix>) -> Result<Option<CorrelationMatrix>> {
    let published = TABLE_V3.iter().find(|(i, _)| *i == id).map(|(_, c)| c);
    match (relaxed, published) {
        (None, None) => Ok(None),
        (Some(r), Some(p)) => {
            let dev = r
                .coefficients()
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dev > SNAP_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "pattern {id}: relaxation deviates {dev} from the reference table"
                )));
            }
            Ok(Some(CorrelationMatrix::new(3, p.to_vec())?))
        }
        _ => Err(Error::Numerical(format!(
            "pattern {id}: validity disagrees with the reference table"
        ))),
    }
}

pub fn valid_patterns(v: usize) -> Result<Vec<CanonicalPattern>> {
    Ok(enumerate_patterns(v)?.into_iter().filter(|p| p.is_valid()).collect())
}

pub fn pattern_l1_distance(x: &CanonicalPattern, y: &CanonicalPattern) -> Result<u32> {
    if !x.is_valid() || !y.is_valid() {
        return Err(Error::InvalidInput("level distance needs valid patterns".into()));
    }
    if x.ideal.len() != y.ideal.len() {
        return Err(Error::DimensionMismatch {
            expected: x.ideal.len(),
            got: y.ideal.len(),
        });
    }
    Ok(ideal_l1(&x.ideal, &y.ideal))
}

pub fn ideal_l1(x: &[i8], y: &[i8]) -> u32 {
    x.iter().zip(y).map(|(a, b)| (a - b).unsigned_abs() as u32).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetTable {
    pub achievable_distances: Vec<u32>,
    /// Ordered pattern-id pairs grouped by ideal L1 distance.
    pub pairs: BTreeMap<u32, Vec<(u64, u64)>>,
}

impl LevelSetTable {
    pub fn max_distance(&self) -> u32 {
        *self.achievable_distances.last().unwrap_or(&0)
    }
}

pub fn build_level_sets(patterns: &[CanonicalPattern]) -> Result<LevelSetTable> {
    let valid: Vec<&CanonicalPattern> = patterns.iter().filter(|p| p.is_valid()).collect();
    if valid.is_empty() {
        return Err(Error::InvalidInput("no valid patterns".into()));
    }
    let mut pairs: BTreeMap<u32, Vec<(u64, u64)>> = BTreeMap::new();
    for x in &valid {
        for y in &valid {
            pairs.entry(pattern_l1_distance(x, y)?).or_default().push((x.id, y.id));
        }
    }
    Ok(LevelSetTable {
        achievable_distances: pairs.keys().copied().collect(),
        pairs,
    })
}

#[derive(Serialize)]
struct PatternJson<'a> {
    id: u64,
    ideal: &'a [i8],
    relaxed: Option<&'a [f64]>,
}

/// JSON array of `{id, ideal, relaxed|null}`.
pub fn patterns_to_json(patterns: &[CanonicalPattern]) -> Result<String> {
    let rows: Vec<PatternJson> = patterns
        .iter()
        .map(|p| PatternJson {
            id: p.id,
            ideal: &p.ideal,
            relaxed: p.relaxed.as_ref().map(|r| r.coefficients()),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}
