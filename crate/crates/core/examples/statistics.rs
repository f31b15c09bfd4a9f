//! Signed-rank tests with effect size and power, a correlation sample-size
//! calculation and a step-down family.

use corrval::stats::{achieved_power, correlation_sample_size, step_down, wilcoxon_signed_rank, z_for_power, Sided};

fn main() -> corrval::Result<()> {
    let strong = [0.8, 1.1, 0.4, 0.9, 1.3, 0.7, 0.2, 1.0, 0.6, 0.5, 1.2, 0.3];
    let weak = [0.1, -0.2, 0.3, -0.1, 0.2, 0.05, -0.3, 0.15, 0.0, 0.1, -0.05, 0.2];

    let tests = vec![
        ("strong > 0".to_string(), wilcoxon_signed_rank(&strong, Sided::One, 0.05, 0.0)?),
        ("weak > 0".to_string(), wilcoxon_signed_rank(&weak, Sided::One, 0.05, 0.0)?),
    ];
    for report in step_down("example", &tests, 0.05) {
        println!("{report:?}");
    }

    println!("\npower for e = 0.69, n = 25: {:.4}", achieved_power(0.69, 25, 0.05, Sided::One)?);
    println!("subjects to tell rho = 0.7 from 0.5: {}", correlation_sample_size(0.5, 0.7, 0.05, 0.84)?);
    println!("same at 90% power: {}", correlation_sample_size(0.5, 0.7, 0.05, z_for_power(0.9))?);
    Ok(())
}
