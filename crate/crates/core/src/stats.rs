//! Wilcoxon signed-rank tests with effect size and achieved power, Pearson
//! correlation with a p-value, the correlation sample-size formula, and a
//! stop-at-first-failure confirmatory procedure.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::core_model::average_ranks;
use crate::error::{Error, Result};

/// Largest sample handled by the exact null distribution.
pub const EXACT_MAX_N: usize = 25;
/// Sample sizes beyond this are reported as divergent.
pub const SAMPLE_SIZE_LIMIT: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    /// Alternative: differences tend to be positive.
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonResult {
    pub n_nonzero: usize,
    /// Sum of the ranks of positive differences.
    pub statistic: f64,
    pub p_value: f64,
    pub sided: Sided,
    pub exact: bool,
    pub effect_size: f64,
    pub power: f64,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Upper critical value of the standard normal for level `alpha`.
pub fn z_alpha(alpha: f64, sided: Sided) -> f64 {
    let tail = match sided {
        Sided::One => alpha,
        Sided::Two => alpha / 2.0,
    };
    std_normal().inverse_cdf(1.0 - tail)
}

/// Z-score implied by a p-value; `p` is clamped away from 0 and 1 so the
/// result stays finite.
pub fn z_from_p(p: f64, sided: Sided) -> f64 {
    let tail = match sided {
        Sided::One => p,
        Sided::Two => p / 2.0,
    };
    std_normal().inverse_cdf(1.0 - tail.clamp(1e-300, 1.0 - 1e-16))
}

pub fn effect_size(p: f64, n_nonzero: usize, sided: Sided) -> f64 {
    z_from_p(p, sided) / (n_nonzero as f64).sqrt()
}

/// `Φ(e·√n − z_α)`.
pub fn achieved_power(e: f64, n_nonzero: usize, alpha: f64, sided: Sided) -> Result<f64> {
    if !e.is_finite() {
        return Err(Error::InvalidInput(format!("effect size {e} is not finite")));
    }
    Ok(std_normal().cdf(e * (n_nonzero as f64).sqrt() - z_alpha(alpha, sided)))
}

/// Counts of sign assignments by doubled positive-rank sum.
fn exact_counts(doubled: &[usize]) -> Vec<f64> {
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled {
        reach += r;
        for s in (r..=reach).rev() {
            counts[s] += counts[s - r];
        }
    }
    counts
}

/// Signed-rank test of `differences` against a zero median. Differences with
/// `|d| <= zero_threshold` are dropped; `Ok(None)` means nothing was left.
///
/// Up to [`EXACT_MAX_N`] remaining pairs the p-value comes from the exact
/// distribution of the (possibly tied) rank sum; above that from the normal
/// approximation with tie-corrected variance and no continuity correction.
pub fn wilcoxon_signed_rank(differences: &[f64], sided: Sided, alpha: f64, zero_threshold: f64) -> Result<Option<WilcoxonResult>> {
    if differences.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("non-finite difference".into()));
    }
    let kept: Vec<f64> = differences.iter().copied().filter(|d| d.abs() > zero_threshold).collect();
    let n = kept.len();
    if n == 0 {
        return Ok(None);
    }
    let abs: Vec<f64> = kept.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = kept.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let exact = n <= EXACT_MAX_N;
    let p_value = if exact {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let counts = exact_counts(&doubled);
        let total: f64 = counts.iter().sum();
        let w2 = (2.0 * w_plus).round() as usize;
        let upper = counts[w2..].iter().sum::<f64>() / total;
        let lower = counts[..=w2].iter().sum::<f64>() / total;
        match sided {
            Sided::One => upper,
            Sided::Two => (2.0 * upper.min(lower)).min(1.0),
        }
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut ties = 0.0;
        let mut i = 0;
        while i < n {
            let j = sorted[i..].iter().take_while(|&&x| x == sorted[i]).count();
            let t = j as f64;
            ties += t * t * t - t;
            i += j;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let z = (w_plus - mean) / var.sqrt();
        let nd = std_normal();
        match sided {
            Sided::One => nd.cdf(-z),
            Sided::Two => (2.0 * nd.cdf(-z.abs())).min(1.0),
        }
    };
    let e = effect_size(p_value, n, sided);
    Ok(Some(WilcoxonResult {
        n_nonzero: n,
        statistic: w_plus,
        p_value,
        sided,
        exact,
        effect_size: e,
        power: achieved_power(e, n, alpha, sided)?,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub p_value: f64,
}

/// Pearson correlation with a two-sided t-test p-value. A constant input gives
/// `r = 0, p = 1`.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 pairs, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in correlation input".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(CorrelationResult { r: 0.0, n, p_value: 1.0 });
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numerical(e.to_string()))?;
        2.0 * dist.cdf(-t.abs())
    };
    Ok(CorrelationResult { r, n, p_value })
}

/// Pearson correlation of an index's values with the Jaccard values of the
/// same clusterings.
pub fn pearson_with_jaccard(index_values: &[f64], jaccard_values: &[f64]) -> Result<CorrelationResult> {
    pearson_correlation(index_values, jaccard_values)
}

/// `Φ⁻¹(power)`, the quantity `correlation_sample_size` takes.
pub fn z_for_power(power: f64) -> f64 {
    std_normal().inverse_cdf(power)
}

/// Smallest sample that distinguishes correlation `rho1` from `rho0` with a
/// one-sided level-`alpha` test: `⌈3 + ((z_α + z_power)/(atanh ρ1 − atanh ρ0))²⌉`.
/// `z_power` is the normal quantile of the target power (0.84 for 80%).
pub fn correlation_sample_size(rho0: f64, rho1: f64, alpha: f64, z_power: f64) -> Result<u64> {
    if !(rho0.abs() < 1.0 && rho1.abs() < 1.0) {
        return Err(Error::InvalidInput("correlations must lie in (-1, 1)".into()));
    }
    if rho0 == rho1 {
        return Err(Error::InvalidInput("rho0 and rho1 must differ".into()));
    }
    let gap = rho1.atanh() - rho0.atanh();
    let n = 3.0 + ((z_alpha(alpha, Sided::One) + z_power) / gap).powi(2);
    if !(n <= SAMPLE_SIZE_LIMIT) {
        return Err(Error::Numerical(format!("required sample size {n:e} exceeds {SAMPLE_SIZE_LIMIT:e}")));
    }
    Ok(n.ceil() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub family: String,
    pub hypothesis: String,
    pub p: Option<f64>,
    pub effect: Option<f64>,
    pub n: usize,
    pub power: Option<f64>,
    pub passed: bool,
    /// Hypothesis at which the procedure stopped, if it stopped early.
    pub stopped_at: Option<String>,
}

/// Tests hypotheses in order of decreasing effect size and stops at the first
/// one that is not significant at `alpha`; later hypotheses are reported as
/// not passed. A hypothesis without a test (`None`) counts as a failure.
pub fn step_down(family: &str, tests: &[(String, Option<WilcoxonResult>)], alpha: f64) -> Vec<TestReport> {
    let mut order: Vec<usize> = (0..tests.len()).collect();
    let effect = |i: usize| tests[i].1.as_ref().map_or(f64::NEG_INFINITY, |r| r.effect_size);
    order.sort_by(|&a, &b| effect(b).total_cmp(&effect(a)).then(a.cmp(&b)));
    let stop = order
        .iter()
        .position(|&i| !tests[i].1.as_ref().is_some_and(|r| r.p_value < alpha));
    let stopped_at = stop.map(|k| tests[order[k]].0.clone());
    order
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let (name, res) = &tests[i];
            TestReport {
                family: family.to_string(),
                hypothesis: name.clone(),
                p: res.as_ref().map(|r| r.p_value),
                effect: res.as_ref().map(|r| r.effect_size),
                n: res.as_ref().map_or(0, |r| r.n_nonzero),
                power: res.as_ref().map(|r| r.power),
                passed: stop.is_none_or(|s| k < s),
                stopped_at: stopped_at.clone(),
            }
        })
        .collect()
}
