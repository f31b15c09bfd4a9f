//! Validity indices for segmented clusterings.
//!
//! The objects being clustered are per-segment correlation matrices. Cluster
//! centroids and the data centroid are correlations of the pooled raw
//! observations, not averages of segment matrices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::core_model::{
    cluster_centroid, data_centroid, segment_correlations, CorrelationMatrix, SegmentedClustering,
    TimeSeries,
};
use crate::distances::DistanceFunction;
use crate::error::{Error, Result};

/// Floor applied to DBI centroid separations and the PBM within-cluster sum.
pub const MIN_SEPARATION: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexName {
    Jaccard,
    Swc,
    Dbi,
    Vrc,
    Pbm,
}

impl IndexName {
    pub const ALL: [IndexName; 5] = [IndexName::Jaccard, IndexName::Swc, IndexName::Dbi, IndexName::Vrc, IndexName::Pbm];

    pub fn as_str(&self) -> &'static str {
        match self {
            IndexName::Jaccard => "jaccard",
            IndexName::Swc => "swc",
            IndexName::Dbi => "dbi",
            IndexName::Vrc => "vrc",
            IndexName::Pbm => "pbm",
        }
    }
}

impl fmt::Display for IndexName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown index {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexResult {
    pub index_name: IndexName,
    pub value: f64,
    pub distance_key: String,
    pub subject_id: String,
    pub variant_id: String,
}

/// Fraction of observations whose truth and candidate labels are equal.
pub fn jaccard_index(truth: &SegmentedClustering, candidate: &SegmentedClustering, n_obs: usize) -> Result<f64> {
    let (a, b) = (truth.segmentation().n_obs(), candidate.segmentation().n_obs());
    if a != n_obs || b != n_obs {
        return Err(Error::InvalidInput(format!(
            "coverage mismatch: truth covers {a}, candidate {b}, series has {n_obs}"
        )));
    }
    let tp = truth
        .observation_labels()
        .iter()
        .zip(candidate.observation_labels())
        .filter(|(x, y)| **x == *y)
        .count();
    Ok(tp as f64 / n_obs as f64)
}

/// Distance-independent pieces shared by the internal indices.
#[derive(Debug, Clone)]
pub struct ClusteringGeometry {
    pub segments: Vec<CorrelationMatrix>,
    pub members: BTreeMap<u32, Vec<usize>>,
    pub centroids: BTreeMap<u32, CorrelationMatrix>,
    pub data_centroid: CorrelationMatrix,
}

impl ClusteringGeometry {
    pub fn new(ts: &TimeSeries, sc: &SegmentedClustering) -> Result<Self> {
        let segments = segment_correlations(ts, sc.segmentation())?;
        let members = sc.clustering().members();
        let centroids = members
            .keys()
            .map(|&k| Ok((k, cluster_centroid(ts, sc, k)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            segments,
            members,
            centroids,
            data_centroid: data_centroid(ts)?,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.members.len()
    }

    fn need_two_clusters(&self) -> Result<()> {
        if self.n_clusters() < 2 {
            return Err(Error::InvalidInput(format!("need K >= 2, got {}", self.n_clusters())));
        }
        Ok(())
    }

    fn to_centroids(&self, d: &DistanceFunction) -> Result<BTreeMap<u32, Vec<f64>>> {
        self.members
            .iter()
            .map(|(k, ms)| {
                let c = &self.centroids[k];
                Ok((*k, ms.iter().map(|&m| d.distance(&self.segments[m], c)).collect::<Result<_>>()?))
            })
            .collect()
    }

    /// Silhouette of every segment; members of singleton clusters score 0.
    pub fn silhouettes(&self, d: &DistanceFunction) -> Result<Vec<f64>> {
        self.need_two_clusters()?;
        let n = self.segments.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = d.distance(&self.segments[i], &self.segments[j])?;
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        let mut out = vec![0.0; n];
        for (k, ms) in &self.members {
            if ms.len() == 1 {
                continue;
            }
            for &m in ms {
                let row = &dist[m * n..(m + 1) * n];
                let a = ms.iter().filter(|&&o| o != m).map(|&o| row[o]).sum::<f64>() / (ms.len() - 1) as f64;
                let b = self
                    .members
                    .iter()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, os)| os.iter().map(|&o| row[o]).sum::<f64>() / os.len() as f64)
                    .fold(f64::INFINITY, f64::min);
                let denom = a.max(b);
                if denom > 0.0 {
                    out[m] = (b - a) / denom;
                }
            }
        }
        Ok(out)
    }

    /// Mean silhouette over segments.
    pub fn swc(&self, d: &DistanceFunction) -> Result<f64> {
        let s = self.silhouettes(d)?;
        Ok(s.iter().sum::<f64>() / s.len() as f64)
    }

    pub fn dbi(&self, d: &DistanceFunction) -> Result<f64> {
        self.need_two_clusters()?;
        let scatter: BTreeMap<u32, f64> = self
            .to_centroids(d)?
            .into_iter()
            .map(|(k, v)| (k, v.iter().sum::<f64>() / v.len() as f64))
            .collect();
        let mut total = 0.0;
        for (k, ck) in &self.centroids {
            let mut worst = f64::NEG_INFINITY;
            for (j, cj) in &self.centroids {
                if j == k {
                    continue;
                }
                let sep = d.distance(ck, cj)?.max(MIN_SEPARATION);
                worst = worst.max((scatter[k] + scatter[j]) / sep);
            }
            total += worst;
        }
        Ok(total / self.n_clusters() as f64)
    }

    /// Between/within variance ratio; `+inf` when the within term is 0.
    pub fn vrc(&self, d: &DistanceFunction) -> Result<f64> {
        self.need_two_clusters()?;
        let (m, k) = (self.segments.len(), self.n_clusters());
        if m <= k {
            return Err(Error::InvalidInput(format!("need M > K, got M={m} K={k}")));
        }
        let mut bcv = 0.0;
        for (c, ms) in &self.members {
            bcv += ms.len() as f64 * d.distance(&self.centroids[c], &self.data_centroid)?.powi(2);
        }
        bcv /= (k - 1) as f64;
        let wcv: f64 = self.to_centroids(d)?.values().flatten().map(|x| x * x).sum::<f64>() / (m - k) as f64;
        if wcv == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(bcv / wcv)
    }

    pub fn pbm(&self, d: &DistanceFunction) -> Result<f64> {
        self.need_two_clusters()?;
        let e1: f64 = self
            .segments
            .iter()
            .map(|s| d.distance(s, &self.data_centroid))
            .sum::<Result<f64>>()?;
        let ec = self.to_centroids(d)?.values().flatten().sum::<f64>().max(MIN_SEPARATION);
        let cs: Vec<&CorrelationMatrix> = self.centroids.values().collect();
        let mut dc = 0.0f64;
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                dc = dc.max(d.distance(cs[i], cs[j])?);
            }
        }
        Ok((e1 / ec * dc / self.n_clusters() as f64).powi(2))
    }
}

pub fn swc(ts: &TimeSeries, sc: &SegmentedClustering, d: &DistanceFunction) -> Result<f64> {
    ClusteringGeometry::new(ts, sc)?.swc(d)
}

pub fn dbi(ts: &TimeSeries, sc: &SegmentedClustering, d: &DistanceFunction) -> Result<f64> {
    ClusteringGeometry::new(ts, sc)?.dbi(d)
}

pub fn vrc(ts: &TimeSeries, sc: &SegmentedClustering, d: &DistanceFunction) -> Result<f64> {
    ClusteringGeometry::new(ts, sc)?.vrc(d)
}

pub fn pbm(ts: &TimeSeries, sc: &SegmentedClustering, d: &DistanceFunction) -> Result<f64> {
    ClusteringGeometry::new(ts, sc)?.pbm(d)
}

pub fn write_results_csv<W: std::io::Write>(w: W, rows: &[(String, IndexResult)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["subject", "variant", "clustering_id", "index", "distance", "value"])?;
    for (clustering_id, r) in rows {
        wr.write_record([
            r.subject_id.as_str(),
            r.variant_id.as_str(),
            clustering_id.as_str(),
            r.index_name.as_str(),
            r.distance_key.as_str(),
            &r.value.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
