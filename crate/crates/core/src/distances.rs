//! Distance functions over correlation matrices.
//!
//! Five families, selected by string key:
//!
//! | key | definition |
//! |---|---|
//! | `l1` `l2` `l3` `l5` `linf` | Minkowski distance of the coefficient vectors |
//! | `l1_ref` … `linf_ref` | `d(a,b)·(d(a,r)+d(b,r))` with `r = (1,…,1)/√Q` |
//! | `l1_dot` `l2_dot` `linf_dot` | Minkowski distance of `(a, s(a))`, `s(a) = (a·r+1)/2` |
//! | `foerstner` | `sqrt(Σ ln²(λ_i+1))`, λ generalized eigenvalues of `(A+εI, B+εI)` |
//! | `log_frobenius` | `‖log(A+εI) − log(B+εI)‖_F` |
//!
//! The orientation scalar `s` is not clamped; it exceeds 1 when `a·r > 1`.
//! Förstner keeps the `+1` inside the logarithm, so identical matrices are at
//! distance `sqrt(V)·ln 2`, not 0.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::core_model::CorrelationMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-10;

pub const DISTANCE_KEYS: [&str; 15] = [
    "l1", "l2", "l3", "l5", "linf", "l1_ref", "l2_ref", "l3_ref", "l5_ref", "linf_ref", "l1_dot",
    "l2_dot", "linf_dot", "foerstner", "log_frobenius",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    P(f64),
    Inf,
}

impl Order {
    fn key(&self) -> String {
        match self {
            Order::Inf => "inf".into(),
            Order::P(p) if p.fract() == 0.0 => format!("{}", *p as i64),
            Order::P(p) => format!("{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lp,
    LpRef,
    LpDot,
    Foerstner,
    LogFrobenius,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceFunction {
    pub family: Family,
    pub order: Order,
    pub epsilon: f64,
}

impl DistanceFunction {
    pub fn lp(order: Order) -> Self {
        Self { family: Family::Lp, order, epsilon: DEFAULT_EPSILON }
    }

    pub fn all() -> Vec<Self> {
        DISTANCE_KEYS.iter().map(|k| k.parse().unwrap()).collect()
    }

    pub fn key(&self) -> String {
        let o = self.order.key();
        match self.family {
            Family::Lp => format!("l{o}"),
            Family::LpRef => format!("l{o}_ref"),
            Family::LpDot => format!("l{o}_dot"),
            Family::Foerstner => "foerstner".into(),
            Family::LogFrobenius => "log_frobenius".into(),
        }
    }

    /// Whether the order belongs to the evaluated set for its family.
    pub fn is_standard(&self) -> bool {
        let std_lp = [Order::P(1.0), Order::P(2.0), Order::P(3.0), Order::P(5.0), Order::Inf];
        match self.family {
            Family::Lp | Family::LpRef => std_lp.contains(&self.order),
            Family::LpDot => [Order::P(1.0), Order::P(2.0), Order::Inf].contains(&self.order),
            Family::Foerstner | Family::LogFrobenius => true,
        }
    }

    pub fn distance(&self, a: &CorrelationMatrix, b: &CorrelationMatrix) -> Result<f64> {
        match self.family {
            Family::Lp => lp_distance(a, b, self.order),
            Family::LpRef => lp_ref_distance(a, b, self.order),
            Family::LpDot => lp_dot_distance(a, b, self.order),
            Family::Foerstner => foerstner_distance(a, b, self.epsilon),
            Family::LogFrobenius => log_frobenius_distance(a, b, self.epsilon),
        }
    }
}

impl fmt::Display for DistanceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for DistanceFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown distance key {s:?}"));
        let eps = DEFAULT_EPSILON;
        match s {
            "foerstner" => return Ok(Self { family: Family::Foerstner, order: Order::P(2.0), epsilon: eps }),
            "log_frobenius" => {
                return Ok(Self { family: Family::LogFrobenius, order: Order::P(2.0), epsilon: eps })
            }
            _ => {}
        }
        let rest = s.strip_prefix('l').ok_or_else(bad)?;
        let (p, family) = if let Some(p) = rest.strip_suffix("_ref") {
            (p, Family::LpRef)
        } else if let Some(p) = rest.strip_suffix("_dot") {
            (p, Family::LpDot)
        } else {
            (rest, Family::Lp)
        };
        let order = match p {
            "inf" => Order::Inf,
            _ => {
                let v: f64 = p.parse().map_err(|_| bad())?;
                if !(v >= 1.0) || !v.is_finite() {
                    return Err(bad());
                }
                Order::P(v)
            }
        };
        Ok(Self { family, order, epsilon: eps })
    }
}

fn check_dims(a: &CorrelationMatrix, b: &CorrelationMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

/// Minkowski distance of two equal-length vectors.
pub fn minkowski(x: &[f64], y: &[f64], order: Order) -> f64 {
    let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
    match order {
        Order::Inf => diffs.fold(0.0, f64::max),
        Order::P(1.0) => diffs.sum(),
        Order::P(2.0) => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Order::P(p) => diffs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

pub fn reference_vector(q: usize) -> Vec<f64> {
    vec![1.0 / (q as f64).sqrt(); q]
}

pub fn lp_distance(a: &CorrelationMatrix, b: &CorrelationMatrix, order: Order) -> Result<f64> {
    check_dims(a, b)?;
    Ok(minkowski(a.coefficients(), b.coefficients(), order))
}

pub fn lp_ref_distance(a: &CorrelationMatrix, b: &CorrelationMatrix, order: Order) -> Result<f64> {
    check_dims(a, b)?;
    let r = reference_vector(a.q());
    let (x, y) = (a.coefficients(), b.coefficients());
    Ok(minkowski(x, y, order) * (minkowski(x, &r, order) + minkowski(y, &r, order)))
}

/// `(a·r + 1)/2` for the reference vector `r`.
pub fn orientation_scalar(a: &CorrelationMatrix) -> f64 {
    let r = 1.0 / (a.q() as f64).sqrt();
    (a.coefficients().iter().sum::<f64>() * r + 1.0) / 2.0
}

pub fn lp_dot_distance(a: &CorrelationMatrix, b: &CorrelationMatrix, order: Order) -> Result<f64> {
    check_dims(a, b)?;
    let aug = |m: &CorrelationMatrix| {
        let mut v = m.coefficients().to_vec();
        v.push(orientation_scalar(m));
        v
    };
    Ok(minkowski(&aug(a), &aug(b), order))
}

fn regularized(m: &CorrelationMatrix, epsilon: f64) -> DMatrix<f64> {
    let mut f = m.to_full();
    for i in 0..f.nrows() {
        f[(i, i)] += epsilon;
    }
    f
}

/// Eigenvalues of the symmetric-definite pencil `(a, b)` via Cholesky of `b`
/// and triangular solves, `L⁻¹ a L⁻ᵀ`. Sorted ascending.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<Vec<f64>> {
    let l = nalgebra::Cholesky::new(b.clone())?.unpack();
    let x = l.solve_lower_triangular(a)?;
    let c = l.solve_lower_triangular(&x.transpose())?;
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Some(ev)
}

pub fn foerstner_distance(a: &CorrelationMatrix, b: &CorrelationMatrix, epsilon: f64) -> Result<f64> {
    check_dims(a, b)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let fail = |reason: &str| Error::Eigen {
        reason: reason.into(),
        a: a.coefficients().to_vec(),
        b: b.coefficients().to_vec(),
    };
    let ev = generalized_eigenvalues(&regularized(a, epsilon), &regularized(b, epsilon))
        .ok_or_else(|| fail("regularized matrix not positive definite"))?;
    let s: f64 = ev.iter().map(|l| (l + 1.0).ln().powi(2)).sum();
    if !s.is_finite() {
        return Err(fail("non-finite generalized eigenvalue"));
    }
    Ok(s.sqrt())
}

/// Matrix logarithm of a symmetric positive definite matrix.
pub fn spd_log(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return None;
    }
    let u = &eig.eigenvectors;
    Some(u * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::ln)) * u.transpose())
}

pub fn log_frobenius_distance(a: &CorrelationMatrix, b: &CorrelationMatrix, epsilon: f64) -> Result<f64> {
    check_dims(a, b)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let fail = || Error::Eigen {
        reason: "non-positive eigenvalue after regularization".into(),
        a: a.coefficients().to_vec(),
        b: b.coefficients().to_vec(),
    };
    let la = spd_log(&regularized(a, epsilon)).ok_or_else(fail)?;
    let lb = spd_log(&regularized(b, epsilon)).ok_or_else(fail)?;
    Ok((la - lb).norm())
}

/// Generalized eigenvalues without regularization, computed as the
/// eigenvalues of `B⁻¹A` with `B⁻¹A` formed by an unguarded QR solve.
///
/// Only for reproducing what happens on singular input; every production
/// distance regularizes first.
#[cfg(feature = "pathology")]
pub fn unregularized_generalized_eigenvalues(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Option<Vec<nalgebra::Complex<f64>>> {
    let qr = b.clone().qr();
    let rhs = qr.q().transpose() * a;
    let m = qr.r().solve_upper_triangular(&rhs)?;
    if m.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some(m.complex_eigenvalues().iter().copied().collect())
}
