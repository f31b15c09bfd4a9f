//! Time series, segmentations, clusterings and Spearman correlation.
//!
//! Observations are stored row-major so that a segment is a contiguous slice.
//! Correlation matrices are kept as their upper-triangle coefficient vector in
//! lexicographic order `a12, a13, …, a(V-1)V`.
//!
//! Constant variates follow a fixed convention: if exactly one of the two
//! variates is constant the coefficient is 0, if both are constant it is 1.
//! The second rule is unusual (most libraries return NaN) and is applied as is.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of upper-triangle coefficients for `v` variates.
pub fn q_len(v: usize) -> usize {
    v * v.saturating_sub(1) / 2
}

/// Position of `a_ij` (i < j, zero-based) in the coefficient vector.
pub fn q_index(v: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < v);
    i * (2 * v - i - 1) / 2 + (j - i - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    dim: usize,
    coefficients: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(dim: usize, coefficients: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
        }
        if coefficients.len() != q_len(dim) {
            return Err(Error::DimensionMismatch {
                expected: q_len(dim),
                got: coefficients.len(),
            });
        }
        if let Some(c) = coefficients.iter().find(|c| !(-1.0..=1.0).contains(*c)) {
            return Err(Error::InvalidInput(format!("coefficient {c} outside [-1, 1]")));
        }
        Ok(Self { dim, coefficients })
    }

    /// Infers the dimension from the coefficient count.
    pub fn from_coefficients(coefficients: Vec<f64>) -> Result<Self> {
        let q = coefficients.len();
        let dim = (2..=64)
            .find(|&v| q_len(v) == q)
            .ok_or_else(|| Error::InvalidInput(format!("{q} is not a triangular number")))?;
        Self::new(dim, coefficients)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            coefficients: vec![0.0; q_len(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => self.coefficients[q_index(self.dim, i, j)],
            std::cmp::Ordering::Greater => self.coefficients[q_index(self.dim, j, i)],
        }
    }

    pub fn to_full(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Reads the upper triangle of a square matrix; the diagonal and lower
    /// triangle are ignored.
    pub fn from_full(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        let v = m.nrows();
        let mut c = Vec::with_capacity(q_len(v));
        for i in 0..v {
            for j in i + 1..v {
                c.push(m[(i, j)]);
            }
        }
        Self::new(v, c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: Vec<f64>,
    n_vars: usize,
    timestamps: Vec<i64>,
    sample_interval: f64,
    variate_names: Vec<String>,
}

impl TimeSeries {
    /// Builds a series from row-major data. Timestamps default to
    /// `0, interval, 2·interval, …` in whole seconds.
    pub fn new(
        data: Vec<f64>,
        n_vars: usize,
        timestamps: Option<Vec<i64>>,
        sample_interval: f64,
    ) -> Result<Self> {
        if n_vars < 2 {
            return Err(Error::InvalidInput(format!("need V >= 2, got {n_vars}")));
        }
        if !data.len().is_multiple_of(n_vars) {
            return Err(Error::InvalidInput("data length not a multiple of V".into()));
        }
        let t = data.len() / n_vars;
        if t < n_vars {
            return Err(Error::InvalidInput(format!("need T >= V, got T={t} V={n_vars}")));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite observation".into()));
        }
        if !(sample_interval > 0.0) {
            return Err(Error::InvalidInput("sample interval must be positive".into()));
        }
        let timestamps = match timestamps {
            Some(ts) => {
                if ts.len() != t {
                    return Err(Error::DimensionMismatch {
                        expected: t,
                        got: ts.len(),
                    });
                }
                if ts.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidInput("timestamps not strictly ascending".into()));
                }
                ts
            }
            None => (0..t).map(|i| (i as f64 * sample_interval).round() as i64).collect(),
        };
        Ok(Self {
            data,
            n_vars,
            timestamps,
            sample_interval,
            variate_names: (1..=n_vars).map(|i| format!("v{i}")).collect(),
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                got: names.len(),
            });
        }
        self.variate_names = names;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_vars
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_vars..(t + 1) * self.n_vars]
    }

    pub fn rows(&self, r: Range<usize>) -> &[f64] {
        &self.data[r.start * self.n_vars..r.end * self.n_vars]
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn variate_names(&self) -> &[String] {
        &self.variate_names
    }

    /// New series made of the given rows, keeping their timestamps.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * self.n_vars);
        let mut ts = Vec::with_capacity(rows.len());
        for &r in rows {
            data.extend_from_slice(self.row(r));
            ts.push(self.timestamps[r]);
        }
        Self::new(data, self.n_vars, Some(ts), self.sample_interval)?.with_names(self.variate_names.clone())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["timestamp".to_string()];
        header.extend(self.variate_names.iter().cloned());
        wr.write_record(&header)?;
        let mut rec = Vec::with_capacity(self.n_vars + 1);
        for t in 0..self.n_rows() {
            rec.clear();
            rec.push(self.timestamps[t].to_string());
            rec.extend(self.row(t).iter().map(|x| x.to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `timestamp,<v1>,…,<vV>`; timestamps are integer seconds or ISO-8601.
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.len() < 3 || &header[0] != "timestamp" {
            return Err(Error::InvalidInput(
                "expected header `timestamp,<v1>,…,<vV>` with V >= 2".into(),
            ));
        }
        let n_vars = header.len() - 1;
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut data = Vec::new();
        let mut ts = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            ts.push(parse_timestamp(&rec[0]).ok_or_else(|| {
                Error::InvalidInput(format!("row {}: bad timestamp {:?}", line + 1, &rec[0]))
            })?);
            for field in rec.iter().skip(1) {
                let x: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("row {}: bad value {field:?}", line + 1))
                })?;
                data.push(x);
            }
        }
        let interval = ts
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|d| *d > 0)
            .min()
            .unwrap_or(1) as f64;
        Self::new(data, n_vars, Some(ts), interval)?.with_names(names)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|f| chrono::NaiveDateTime::parse_from_str(s, f).ok())
        .map(|dt| dt.and_utc().timestamp())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    boundaries: Vec<usize>,
}

impl Segmentation {
    pub fn new(boundaries: Vec<usize>, n_obs: usize) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidInput("need at least one segment".into()));
        }
        if boundaries[0] != 0 || *boundaries.last().unwrap() != n_obs {
            return Err(Error::InvalidInput(format!(
                "boundaries must start at 0 and end at T={n_obs}"
            )));
        }
        for (m, w) in boundaries.windows(2).enumerate() {
            if w[1] < w[0] + 2 {
                return Err(Error::SegmentTooShort {
                    segment: m,
                    len: w[1].saturating_sub(w[0]),
                });
            }
        }
        Ok(Self { boundaries })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn n_segments(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn n_obs(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    pub fn range(&self, m: usize) -> Range<usize> {
        self.boundaries[m]..self.boundaries[m + 1]
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Segment index of every observation.
    pub fn segment_of_each_obs(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_obs());
        for m in 0..self.n_segments() {
            out.extend(std::iter::repeat_n(m, self.range(m).len()));
        }
        out
    }
}

/// Assignment of segments to cluster labels. Labels are arbitrary integers
/// (pattern ids in practice) so that clusterings derived from the same truth
/// can be compared label-by-label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    labels: Vec<u32>,
}

impl Clustering {
    pub fn new(labels: Vec<u32>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("empty clustering".into()));
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, m: usize) -> u32 {
        self.labels[m]
    }

    pub fn n_segments(&self) -> usize {
        self.labels.len()
    }

    /// Members per cluster, ordered by label.
    pub fn members(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (m, &k) in self.labels.iter().enumerate() {
            out.entry(k).or_default().push(m);
        }
        out
    }

    pub fn n_clusters(&self) -> usize {
        self.members().len()
    }

    /// Relabels clusters to `1..=K` in ascending order of the original labels.
    pub fn compact(&self) -> Self {
        let ids: BTreeMap<u32, u32> = self
            .members()
            .keys()
            .enumerate()
            .map(|(i, &k)| (k, i as u32 + 1))
            .collect();
        Self {
            labels: self.labels.iter().map(|k| ids[k]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedClustering {
    segmentation: Segmentation,
    clustering: Clustering,
}

#[derive(Serialize, Deserialize)]
struct SegmentedClusteringJson {
    boundaries: Vec<usize>,
    assignment: BTreeMap<usize, u32>,
}

impl SegmentedClustering {
    pub fn new(segmentation: Segmentation, clustering: Clustering) -> Result<Self> {
        if segmentation.n_segments() != clustering.n_segments() {
            return Err(Error::DimensionMismatch {
                expected: segmentation.n_segments(),
                got: clustering.n_segments(),
            });
        }
        Ok(Self {
            segmentation,
            clustering,
        })
    }

    pub fn segmentation(&self) -> &Segmentation {
        &self.segmentation
    }

    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    /// Cluster label of every observation.
    pub fn observation_labels(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.segmentation.n_obs());
        for m in 0..self.segmentation.n_segments() {
            let k = self.clustering.label(m);
            out.extend(std::iter::repeat_n(k, self.segmentation.range(m).len()));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let j = SegmentedClusteringJson {
            boundaries: self.segmentation.boundaries.clone(),
            assignment: self.clustering.labels.iter().copied().enumerate().collect(),
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: SegmentedClusteringJson = serde_json::from_str(s)?;
        let n_obs = *j
            .boundaries
            .last()
            .ok_or_else(|| Error::InvalidInput("empty boundaries".into()))?;
        let seg = Segmentation::new(j.boundaries, n_obs)?;
        let m = seg.n_segments();
        if j.assignment.len() != m || j.assignment.keys().enumerate().any(|(i, &k)| i != k) {
            return Err(Error::InvalidInput(format!(
                "assignment must cover segments 0..{m} exactly once"
            )));
        }
        let cl = Clustering::new(j.assignment.into_values().collect())?;
        Self::new(seg, cl)
    }
}

/// Borrowed view of consecutive rows.
#[derive(Debug, Clone, Copy)]
pub struct SegmentView<'a> {
    data: &'a [f64],
    n_vars: usize,
}

impl<'a> SegmentView<'a> {
    pub fn new(data: &'a [f64], n_vars: usize) -> Self {
        Self { data, n_vars }
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_vars
    }

    pub fn data(&self) -> &'a [f64] {
        self.data
    }

    pub fn correlation(&self) -> Result<CorrelationMatrix> {
        spearman_correlation(self.data, self.n_vars)
    }
}

/// Average ranks (1-based), ties share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Spearman correlation of a row-major `R×V` block.
pub fn spearman_correlation(data: &[f64], n_vars: usize) -> Result<CorrelationMatrix> {
    if n_vars < 2 || !data.len().is_multiple_of(n_vars) {
        return Err(Error::InvalidInput("malformed observation block".into()));
    }
    let r = data.len() / n_vars;
    if r < 2 {
        return Err(Error::SegmentTooShort { segment: 0, len: r });
    }
    let mean = (r as f64 + 1.0) / 2.0;
    let mut centred = Vec::with_capacity(n_vars);
    let mut col = vec![0.0; r];
    for v in 0..n_vars {
        for (t, c) in col.iter_mut().enumerate() {
            *c = data[t * n_vars + v];
        }
        let ranks: Vec<f64> = average_ranks(&col).into_iter().map(|x| x - mean).collect();
        let ss: f64 = ranks.iter().map(|x| x * x).sum();
        centred.push((ranks, ss));
    }
    let mut coef = Vec::with_capacity(q_len(n_vars));
    for i in 0..n_vars {
        for j in i + 1..n_vars {
            let (xi, si) = &centred[i];
            let (xj, sj) = &centred[j];
            let c = match (*si == 0.0, *sj == 0.0) {
                (true, true) => 1.0,
                (true, false) | (false, true) => 0.0,
                _ => {
                    let sxy: f64 = xi.iter().zip(xj).map(|(a, b)| a * b).sum();
                    (sxy / (si.sqrt() * sj.sqrt())).clamp(-1.0, 1.0)
                }
            };
            coef.push(c);
        }
    }
    CorrelationMatrix::new(n_vars, coef)
}

pub fn segment_views<'a>(ts: &'a TimeSeries, seg: &Segmentation) -> Result<Vec<SegmentView<'a>>> {
    if seg.n_obs() != ts.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: ts.n_rows(),
            got: seg.n_obs(),
        });
    }
    Ok((0..seg.n_segments())
        .map(|m| SegmentView::new(ts.rows(seg.range(m)), ts.n_vars()))
        .collect())
}

pub fn segment_correlations(ts: &TimeSeries, seg: &Segmentation) -> Result<Vec<CorrelationMatrix>> {
    segment_views(ts, seg)?
        .iter()
        .enumerate()
        .map(|(m, v)| {
            v.correlation().map_err(|e| match e {
                Error::SegmentTooShort { len, .. } => Error::SegmentTooShort { segment: m, len },
                e => e,
            })
        })
        .collect()
}

/// Spearman correlation of all observations pooled across the cluster's segments.
pub fn cluster_centroid(ts: &TimeSeries, sc: &SegmentedClustering, k: u32) -> Result<CorrelationMatrix> {
    let seg = sc.segmentation();
    if seg.n_obs() != ts.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: ts.n_rows(),
            got: seg.n_obs(),
        });
    }
    let mut pooled = Vec::new();
    for (m, &label) in sc.clustering().labels().iter().enumerate() {
        if label == k {
            pooled.extend_from_slice(ts.rows(seg.range(m)));
        }
    }
    let count = pooled.len() / ts.n_vars();
    if count < 2 {
        return Err(Error::CentroidUndefined { cluster: k, count });
    }
    spearman_correlation(&pooled, ts.n_vars())
}

pub fn data_centroid(ts: &TimeSeries) -> Result<CorrelationMatrix> {
    spearman_correlation(ts.data(), ts.n_vars())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_col(x: &[f64], y: &[f64]) -> Vec<f64> {
        x.iter().zip(y).flat_map(|(a, b)| [*a, *b]).collect()
    }

    #[test]
    fn perfect_monotone_is_one() {
        let c = spearman_correlation(&two_col(&[1., 2., 3.], &[2., 4., 6.]), 2).unwrap();
        assert_relative_eq!(c.coefficients()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn one_constant_variate_gives_zero() {
        let c = spearman_correlation(&two_col(&[1., 2., 3.], &[5., 5., 5.]), 2).unwrap();
        assert_eq!(c.coefficients()[0], 0.0);
    }

    #[test]
    fn both_constant_gives_one() {
        let c = spearman_correlation(&two_col(&[4., 4., 4.], &[5., 5., 5.]), 2).unwrap();
        assert_eq!(c.coefficients()[0], 1.0);
    }

    #[test]
    fn ties_match_rank_then_pearson() {
        // reference value from an independent rank-then-Pearson implementation
        let c = spearman_correlation(&two_col(&[1., 2., 2., 4.], &[1., 3., 2., 4.]), 2).unwrap();
        assert_relative_eq!(c.coefficients()[0], 0.9486832980505139, epsilon = 1e-14);
    }

    #[test]
    fn rejects_single_row() {
        assert!(matches!(
            spearman_correlation(&[1.0, 2.0], 2),
            Err(Error::SegmentTooShort { .. })
        ));
    }

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(average_ranks(&[3., 1., 3., 2.]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn q_index_is_lexicographic() {
        assert_eq!(q_index(3, 0, 1), 0);
        assert_eq!(q_index(3, 0, 2), 1);
        assert_eq!(q_index(3, 1, 2), 2);
        assert_eq!(q_index(4, 2, 3), 5);
    }

    #[test]
    fn full_matrix_roundtrip() {
        let c = CorrelationMatrix::new(3, vec![0.1, -0.2, 0.3]).unwrap();
        let f = c.to_full();
        assert_eq!(f[(2, 1)], 0.3);
        assert_eq!(f[(1, 1)], 1.0);
        assert_eq!(CorrelationMatrix::from_full(&f).unwrap(), c);
    }

    fn series(t: usize) -> TimeSeries {
        let data = (0..t * 2).map(|i| ((i * 7919) % 101) as f64).collect();
        TimeSeries::new(data, 2, None, 1.0).unwrap()
    }

    #[test]
    fn segment_lengths() {
        let ts = series(10);
        let seg = Segmentation::new(vec![0, 4, 10], 10).unwrap();
        let v = segment_views(&ts, &seg).unwrap();
        assert_eq!(v.iter().map(|s| s.n_rows()).collect::<Vec<_>>(), vec![4, 6]);

        let seg = Segmentation::new(vec![0, 10], 10).unwrap();
        assert_eq!(segment_views(&ts, &seg).unwrap()[0].data(), ts.data());
    }

    #[test]
    fn segments_concatenate_to_series() {
        let ts = series(10);
        let seg = Segmentation::new(vec![0, 2, 5, 10], 10).unwrap();
        let v = segment_views(&ts, &seg).unwrap();
        assert_eq!(v.iter().map(|s| s.n_rows()).collect::<Vec<_>>(), vec![2, 3, 5]);
        let joined: Vec<f64> = v.iter().flat_map(|s| s.data().iter().copied()).collect();
        assert_eq!(joined, ts.data());
    }

    #[test]
    fn segmentation_rejects_short_segments() {
        assert!(Segmentation::new(vec![0, 1, 10], 10).is_err());
        assert!(Segmentation::new(vec![0, 5, 9], 10).is_err());
        assert!(Segmentation::new(vec![1, 10], 10).is_err());
    }

    #[test]
    fn single_segment_centroid_equals_segment() {
        let ts = series(20);
        let seg = Segmentation::new(vec![0, 8, 20], 20).unwrap();
        let sc = SegmentedClustering::new(seg.clone(), Clustering::new(vec![3, 5]).unwrap()).unwrap();
        let corr = segment_correlations(&ts, &seg).unwrap();
        assert_eq!(cluster_centroid(&ts, &sc, 3).unwrap(), corr[0]);
        assert_eq!(cluster_centroid(&ts, &sc, 5).unwrap(), corr[1]);
        assert!(matches!(
            cluster_centroid(&ts, &sc, 9),
            Err(Error::CentroidUndefined { cluster: 9, count: 0 })
        ));
    }

    #[test]
    fn one_cluster_centroid_equals_data_centroid() {
        let ts = series(20);
        let seg = Segmentation::new(vec![0, 8, 20], 20).unwrap();
        let sc = SegmentedClustering::new(seg, Clustering::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(cluster_centroid(&ts, &sc, 1).unwrap(), data_centroid(&ts).unwrap());
    }

    #[test]
    fn duplicated_column_correlates_perfectly() {
        let data: Vec<f64> = (0..50).flat_map(|i| {
            let x = ((i * 37) % 17) as f64 + i as f64 * 0.01;
            [x, x, -x]
        }).collect();
        let ts = TimeSeries::new(data, 3, None, 1.0).unwrap();
        let c = data_centroid(&ts).unwrap();
        assert_relative_eq!(c.get(0, 1), 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.get(0, 2), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn clustering_json_roundtrip() {
        let seg = Segmentation::new(vec![0, 4, 10, 13], 13).unwrap();
        let sc = SegmentedClustering::new(seg, Clustering::new(vec![9, 1, 9]).unwrap()).unwrap();
        let s = sc.to_json().unwrap();
        assert_eq!(s, r#"{"boundaries":[0,4,10,13],"assignment":{"0":9,"1":1,"2":9}}"#);
        assert_eq!(SegmentedClustering::from_json(&s).unwrap(), sc);
    }

    #[test]
    fn clustering_json_rejects_gaps() {
        let s = r#"{"boundaries":[0,4,10],"assignment":{"0":1,"2":1}}"#;
        assert!(SegmentedClustering::from_json(s).is_err());
    }

    #[test]
    fn compact_relabels_in_label_order() {
        let c = Clustering::new(vec![3, 9, 3]).unwrap().compact();
        assert_eq!(c.labels(), &[1, 2, 1]);
    }

    #[test]
    fn csv_roundtrip_with_iso_timestamps() {
        let csv = "timestamp,a,b\n2024-01-01T00:00:00Z,1.5,2\n2024-01-01T00:00:02Z,0.25,-3\n2024-01-01T00:00:03Z,4,5\n";
        let ts = TimeSeries::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(ts.n_rows(), 3);
        assert_eq!(ts.variate_names(), &["a", "b"]);
        assert_eq!(ts.sample_interval(), 1.0);
        assert_eq!(ts.timestamps()[1] - ts.timestamps()[0], 2);

        let mut out = Vec::new();
        ts.write_csv(&mut out).unwrap();
        let back = TimeSeries::read_csv(out.as_slice()).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn csv_rejects_unsorted_timestamps() {
        let csv = "timestamp,a,b\n2,1,2\n1,3,4\n3,5,6\n";
        assert!(TimeSeries::read_csv(csv.as_bytes()).is_err());
    }
}
