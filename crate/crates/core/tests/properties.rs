use corrval::canonical::{min_eigenvalue, valid_patterns};
use corrval::core_model::{spearman_correlation, CorrelationMatrix};
use corrval::discrim_eval::{competition_ranks, shannon_entropy};
use corrval::distances::{DistanceFunction, DISTANCE_KEYS};
use corrval::stats::{achieved_power, pearson_correlation, wilcoxon_signed_rank, Sided};
use proptest::prelude::*;

fn relaxed(i: usize) -> CorrelationMatrix {
    let p = valid_patterns(3).unwrap();
    p[i % p.len()].relaxed().unwrap().clone()
}

/// A well-conditioned 3×3 correlation matrix from a random 3×4 factor.
fn corr_strategy() -> impl Strategy<Value = CorrelationMatrix> {
    prop::collection::vec(-1.0f64..1.0, 12).prop_filter_map("degenerate factor", |f| {
        let rows: Vec<&[f64]> = f.chunks(4).collect();
        let norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        if norms.iter().any(|&n| n < 1e-3) {
            return None;
        }
        let dot = |i: usize, j: usize| rows[i].iter().zip(rows[j]).map(|(a, b)| a * b).sum::<f64>() / (norms[i] * norms[j]);
        let c = CorrelationMatrix::new(3, vec![dot(0, 1), dot(0, 2), dot(1, 2)].into_iter().map(|x| x.clamp(-1.0, 1.0)).collect()).ok()?;
        (min_eigenvalue(&c.to_full()) > 1e-3).then_some(c)
    })
}

fn lp_keys() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["l1", "l2", "l3", "l5", "linf"])
}

/// Brute-force one-sided p-value over all 2^n sign assignments.
fn enumerated_p(d: &[f64]) -> f64 {
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks = corrval::core_model::average_ranks(&abs);
    let observed: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let n = d.len();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if s >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spearman_invariant_under_monotone_maps(data in prop::collection::vec(-5.0f64..5.0, 30..90)) {
        let n = data.len() / 3 * 3;
        let data = &data[..n];
        let before = spearman_correlation(data, 3).unwrap();
        let mapped: Vec<f64> = data.iter().map(|x| x.exp() * 3.0 + 1.0).collect();
        let after = spearman_correlation(&mapped, 3).unwrap();
        for (a, b) in before.coefficients().iter().zip(after.coefficients()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lp_triangle_inequality(a in corr_strategy(), b in corr_strategy(), c in corr_strategy(), key in lp_keys()) {
        let d: DistanceFunction = key.parse().unwrap();
        let ab = d.distance(&a, &b).unwrap();
        let bc = d.distance(&b, &c).unwrap();
        let ac = d.distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn distances_symmetric_and_nonnegative(a in corr_strategy(), b in corr_strategy(), k in 0usize..15) {
        let d: DistanceFunction = DISTANCE_KEYS[k].parse().unwrap();
        let ab = d.distance(&a, &b).unwrap();
        let ba = d.distance(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        // ln(λ + 1) does not map to itself under λ ↦ 1/λ.
        prop_assume!(DISTANCE_KEYS[k] != "foerstner");
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab), "{}: {ab} vs {ba}", DISTANCE_KEYS[k]);
    }

    #[test]
    fn matrix_distances_permutation_invariant(i in 0usize..23, j in 0usize..23, perm in 0usize..6) {
        let (a, b) = (relaxed(i), relaxed(j));
        let order = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
        let permute = |m: &CorrelationMatrix| {
            let f = m.to_full();
            let p = nalgebra::DMatrix::from_fn(3, 3, |r, c| f[(order[r], order[c])]);
            CorrelationMatrix::from_full(&p).unwrap()
        };
        for key in ["foerstner", "log_frobenius"] {
            let d: DistanceFunction = key.parse().unwrap();
            let x = d.distance(&a, &b).unwrap();
            let y = d.distance(&permute(&a), &permute(&b)).unwrap();
            prop_assert!((x - y).abs() <= 1e-6 * (1.0 + x), "{key}: {x} vs {y}");
        }
    }

    #[test]
    fn entropy_bounded(values in prop::collection::vec(0.0f64..=1.0, 1..500)) {
        let h = shannon_entropy(&values, 50).unwrap();
        prop_assert!(h >= 0.0 && h <= 50f64.log2() + 1e-12);
    }

    #[test]
    fn ranking_invariant_under_increasing_maps(values in prop::collection::vec(-10.0f64..10.0, 2..15), higher in any::<bool>()) {
        let mapped: Vec<f64> = values.iter().map(|v| v.powi(3) + 2.0 * v).collect();
        let r = competition_ranks(&values, higher);
        prop_assert_eq!(&r, &competition_ranks(&mapped, higher));
        for &x in &r {
            let better = r.iter().filter(|&&y| y < x).count() as u32;
            prop_assert_eq!(x, better + 1);
        }
    }

    #[test]
    fn power_monotone(e in 0.0f64..2.0, de in 0.0f64..1.0, n in 1usize..60, dn in 0usize..40) {
        let p = achieved_power(e, n, 0.05, Sided::One).unwrap();
        prop_assert!(achieved_power(e + de, n, 0.05, Sided::One).unwrap() >= p);
        prop_assert!(achieved_power(e, n + dn, 0.05, Sided::One).unwrap() >= p - 1e-15);
    }

    #[test]
    fn wilcoxon_exact_matches_enumeration(d in prop::collection::vec((-20i32..=20).prop_filter("nonzero", |x| *x != 0), 1..=12)) {
        let d: Vec<f64> = d.into_iter().map(f64::from).collect();
        let r = wilcoxon_signed_rank(&d, Sided::One, 0.05, 0.0).unwrap().unwrap();
        prop_assert!((r.p_value - enumerated_p(&d)).abs() < 1e-12);
        prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }

    #[test]
    fn pearson_affine_invariant(x in prop::collection::vec(-5.0f64..5.0, 3..40), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * v - i as f64).collect();
        let r1 = pearson_correlation(&x, &y).unwrap().r;
        let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let r2 = pearson_correlation(&x2, &y).unwrap().r;
        prop_assert!((r1 - r2).abs() < 1e-9);
    }
}
