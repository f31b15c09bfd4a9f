//! Runs the six-criterion evaluation of all fifteen distance functions on one
//! subject and prints them ordered by average rank.

use corrval::canonical::valid_patterns;
use corrval::core_model::segment_correlations;
use corrval::datagen::{generate_subject, SubjectSpec};
use corrval::discrim_eval::{evaluate_distance, rank_distance_functions, DEFAULT_BINS};
use corrval::distances::DistanceFunction;

fn main() -> corrval::Result<()> {
    let subject = generate_subject(&SubjectSpec::desk(1, 0))?;
    let patterns = valid_patterns(3)?;
    let matrices = segment_correlations(&subject.ts, subject.truth.segmentation())?;

    let evaluated = DistanceFunction::all()
        .iter()
        .map(|d| Ok((d.key(), evaluate_distance(&matrices, &subject.labels, &patterns, d, DEFAULT_BINS)?.criteria)))
        .collect::<corrval::Result<Vec<_>>>()?;
    let mut ranks = rank_distance_functions(&evaluated);
    ranks.sort_by(|a, b| a.average_rank.total_cmp(&b.average_rank));

    println!("{:<14} {:>6}  ranks per criterion", "distance", "avg");
    for r in &ranks {
        println!("{:<14} {:>6.2}  {:?}", r.distance, r.average_rank, r.ranks);
    }
    Ok(())
}
