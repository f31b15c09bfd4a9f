//! Nearest-pattern mapping and the fixed-neighbour 1NN classification report.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::canonical::CanonicalPattern;
use crate::core_model::{Clustering, CorrelationMatrix};
use crate::distances::DistanceFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternAssignment {
    pub segment_index: usize,
    pub pattern_id: u64,
    pub distance: f64,
    /// Gap to the second-best pattern; infinite with a single candidate.
    pub runner_up_margin: f64,
}

/// Nearest valid pattern; ties go to the smallest id.
pub fn map_to_pattern(
    a: &CorrelationMatrix,
    patterns: &[CanonicalPattern],
    d: &DistanceFunction,
) -> Result<PatternAssignment> {
    let mut scored: Vec<(f64, u64)> = Vec::with_capacity(patterns.len());
    for p in patterns.iter().filter(|p| p.is_valid()) {
        scored.push((d.distance(a, p.relaxed()?)?, p.id));
    }
    if scored.is_empty() {
        return Err(Error::InvalidInput("no valid patterns to map to".into()));
    }
    // distances compare exactly; equal distances fall back to id order
    scored.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let (best, id) = scored[0];
    let margin = scored.get(1).map_or(f64::INFINITY, |s| s.0 - best);
    Ok(PatternAssignment {
        segment_index: 0,
        pattern_id: id,
        distance: best,
        runner_up_margin: margin,
    })
}

pub fn map_all(
    matrices: &[CorrelationMatrix],
    patterns: &[CanonicalPattern],
    d: &DistanceFunction,
) -> Result<Vec<PatternAssignment>> {
    matrices
        .iter()
        .enumerate()
        .map(|(m, a)| {
            let mut pa = map_to_pattern(a, patterns, d)?;
            pa.segment_index = m;
            Ok(pa)
        })
        .collect()
}

/// Groups segments by mapped pattern; cluster labels are the pattern ids.
pub fn derive_clustering(assignments: &[PatternAssignment]) -> Result<Clustering> {
    let mut sorted: Vec<&PatternAssignment> = assignments.iter().collect();
    sorted.sort_by_key(|a| a.segment_index);
    if sorted.iter().enumerate().any(|(i, a)| a.segment_index != i) {
        return Err(Error::InvalidInput("assignments must cover segments 0..M once".into()));
    }
    Clustering::new(sorted.iter().map(|a| a.pattern_id as u32).collect())
}

pub fn write_assignments_csv<W: std::io::Write>(w: W, assignments: &[PatternAssignment]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["segment_index", "pattern_id", "distance", "margin"])?;
    for a in assignments {
        wr.write_record([
            a.segment_index.to_string(),
            a.pattern_id.to_string(),
            a.distance.to_string(),
            a.runner_up_margin.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    /// Classes present in truth or predictions, ascending.
    pub classes: Vec<u64>,
    pub precision: BTreeMap<u64, f64>,
    pub recall: BTreeMap<u64, f64>,
    pub f1: BTreeMap<u64, f64>,
    pub macro_f1: f64,
    /// `confusion[i][j]`: truth `classes[i]` predicted as `classes[j]`.
    pub confusion: Vec<Vec<usize>>,
}

/// Per-class precision, recall and F1 with their unweighted mean.
///
/// Classes absent from both truth and predictions are left out of the mean.
/// A class in truth that is never predicted has precision 0 and F1 0.
pub fn classification_report(truth: &[u64], predicted: &[u64]) -> Result<ClassificationReport> {
    if truth.is_empty() {
        return Err(Error::InvalidInput("empty classification input".into()));
    }
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: predicted.len() });
    }
    let classes: Vec<u64> = truth
        .iter()
        .chain(predicted)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<u64, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (t, p) in truth.iter().zip(predicted) {
        confusion[index[t]][index[p]] += 1;
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let mut precision = BTreeMap::new();
    let mut recall = BTreeMap::new();
    let mut f1 = BTreeMap::new();
    for (i, &c) in classes.iter().enumerate() {
        let tp = confusion[i][i];
        let predicted_c: usize = (0..k).map(|r| confusion[r][i]).sum();
        let truth_c: usize = confusion[i].iter().sum();
        let p = ratio(tp, predicted_c);
        let r = ratio(tp, truth_c);
        precision.insert(c, p);
        recall.insert(c, r);
        f1.insert(c, if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 });
    }
    let macro_f1 = f1.values().sum::<f64>() / k as f64;
    Ok(ClassificationReport { classes, precision, recall, f1, macro_f1, confusion })
}

/// Maps every labelled matrix to its nearest pattern and scores the result.
pub fn classify_1nn(
    matrices: &[(CorrelationMatrix, u64)],
    patterns: &[CanonicalPattern],
    d: &DistanceFunction,
) -> Result<ClassificationReport> {
    if matrices.is_empty() {
        return Err(Error::InvalidInput("empty classification input".into()));
    }
    let valid: BTreeSet<u64> = patterns.iter().filter(|p| p.is_valid()).map(|p| p.id).collect();
    let mut truth = Vec::with_capacity(matrices.len());
    let mut pred = Vec::with_capacity(matrices.len());
    for (a, label) in matrices {
        if !valid.contains(label) {
            return Err(Error::InvalidInput(format!("label {label} is not a valid pattern")));
        }
        truth.push(*label);
        pred.push(map_to_pattern(a, patterns, d)?.pattern_id);
    }
    classification_report(&truth, &pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::valid_patterns;

    fn l1() -> DistanceFunction {
        "l1".parse().unwrap()
    }

    #[test]
    fn self_map() {
        let p = valid_patterns(3).unwrap();
        let nine = p.iter().find(|p| p.id == 9).unwrap();
        let a = map_to_pattern(nine.relaxed().unwrap(), &p, &l1()).unwrap();
        assert_eq!((a.pattern_id, a.distance), (9, 0.0));
    }

    #[test]
    fn midpoint_ties_go_to_smaller_id() {
        // midpoint of relaxed 1 = (0,0,1) and 2 = (0,0,-1), scored against those two only
        let p: Vec<_> = valid_patterns(3).unwrap().into_iter().filter(|p| p.id == 1 || p.id == 2).collect();
        let a = CorrelationMatrix::new(3, vec![0.0, 0.0, 0.0]).unwrap();
        let r = map_to_pattern(&a, &p, &l1()).unwrap();
        assert_eq!(r.pattern_id, 1);
        assert_eq!(r.runner_up_margin, 0.0);
    }

    #[test]
    fn derive_clustering_groups_by_pattern() {
        let mk = |m, id| PatternAssignment { segment_index: m, pattern_id: id, distance: 0.0, runner_up_margin: 1.0 };
        let c = derive_clustering(&[mk(0, 3), mk(1, 9), mk(2, 3)]).unwrap();
        assert_eq!(c.n_clusters(), 2);
        assert_eq!(c.members()[&3], vec![0, 2]);
        assert_eq!(c.compact().labels(), &[1, 2, 1]);
        let one = derive_clustering(&[mk(0, 4), mk(1, 4)]).unwrap();
        assert_eq!(one.n_clusters(), 1);
    }

    #[test]
    fn all_correct_is_one() {
        let r = classification_report(&[1, 2, 3, 3], &[1, 2, 3, 3]).unwrap();
        assert_eq!(r.macro_f1, 1.0);
    }

    #[test]
    fn one_class_misassigned() {
        // 23 classes, class 22 entirely predicted as class 0
        let truth: Vec<u64> = (0..23).collect();
        let mut pred = truth.clone();
        pred[22] = 0;
        let r = classification_report(&truth, &pred).unwrap();
        // brute-force tally: class 0 has P=1/2, R=1 → F1=2/3; class 22 F1=0
        let expected = (21.0 + 2.0 / 3.0) / 23.0;
        assert!((r.macro_f1 - expected).abs() < 1e-15);
        assert_eq!(r.f1[&22], 0.0);
        assert_eq!(r.confusion[22][0], 1);
    }

    #[test]
    fn predicted_only_class_counts() {
        let r = classification_report(&[1, 1], &[1, 5]).unwrap();
        assert_eq!(r.classes, vec![1, 5]);
        assert_eq!(r.f1[&5], 0.0);
        assert!((r.macro_f1 - (2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(classification_report(&[], &[]).is_err());
        assert!(classify_1nn(&[], &valid_patterns(3).unwrap(), &l1()).is_err());
    }

    #[test]
    fn assignment_csv_header() {
        let mut out = Vec::new();
        let a = PatternAssignment { segment_index: 0, pattern_id: 13, distance: 0.25, runner_up_margin: 0.5 };
        write_assignments_csv(&mut out, &[a]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "segment_index,pattern_id,distance,margin\n0,13,0.25,0.5\n");
    }
}
