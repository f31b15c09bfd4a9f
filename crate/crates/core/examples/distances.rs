//! Evaluates all fifteen distance functions between two relaxed patterns and
//! an empirical-looking matrix, then shows the regularized generalized
//! eigenvalues of a nearly singular pair.

use corrval::canonical::valid_patterns;
use corrval::core_model::CorrelationMatrix;
use corrval::distances::{generalized_eigenvalues, DistanceFunction, DEFAULT_EPSILON};
use nalgebra::DMatrix;

fn main() -> corrval::Result<()> {
    let patterns = valid_patterns(3)?;
    let a = patterns.iter().find(|p| p.ideal == [1, 0, 0]).unwrap().relaxed()?;
    let b = patterns.iter().find(|p| p.ideal == [1, 1, 1]).unwrap().relaxed()?;
    let empirical = CorrelationMatrix::new(3, vec![0.82, 0.07, -0.11])?;

    println!("{:<14} {:>10} {:>10}", "distance", "d(P, P')", "d(A, P)");
    for d in DistanceFunction::all() {
        println!("{:<14} {:>10.4} {:>10.4}", d.key(), d.distance(a, b)?, d.distance(&empirical, a)?);
    }

    let x = DMatrix::from_row_slice(3, 3, &[1.0, -0.02, -0.02, -0.02, 1.0, 1.0, -0.02, 1.0, 1.0]);
    let y = DMatrix::from_row_slice(3, 3, &[1.0, -0.01, -0.01, -0.01, 1.0, 1.0, -0.01, 1.0, 1.0]);
    let eps = DMatrix::<f64>::identity(3, 3) * DEFAULT_EPSILON;
    let ev = generalized_eigenvalues(&(&x + &eps), &(&y + &eps)).unwrap();
    println!("\nregularized generalized eigenvalues of a singular pair: {ev:?}");
    Ok(())
}
