//! Generates one small subject, maps every segment to its nearest canonical
//! pattern with L1 and scores the mapping against the generating labels.

use corrval::canonical::valid_patterns;
use corrval::core_model::segment_correlations;
use corrval::datagen::{generate_subject, SubjectSpec};
use corrval::distances::DistanceFunction;
use corrval::mapping::{classification_report, derive_clustering, map_all};

fn main() -> corrval::Result<()> {
    let spec = SubjectSpec { n_segments: 46, ..SubjectSpec::desk(1, 0) };
    let subject = generate_subject(&spec)?;
    let patterns = valid_patterns(3)?;
    let l1: DistanceFunction = "l1".parse()?;

    let matrices = segment_correlations(&subject.ts, subject.truth.segmentation())?;
    let assignments = map_all(&matrices, &patterns, &l1)?;
    for a in assignments.iter().take(8) {
        println!(
            "segment {:>2}: pattern {:>2} (truth {:>2}) distance {:.3} margin {:.3}",
            a.segment_index, a.pattern_id, subject.labels[a.segment_index], a.distance, a.runner_up_margin
        );
    }

    let predicted: Vec<u64> = assignments.iter().map(|a| a.pattern_id).collect();
    let report = classification_report(&subject.labels, &predicted)?;
    let clustering = derive_clustering(&assignments)?;
    println!("\nmacro-F1 {:.4} over {} classes", report.macro_f1, report.classes.len());
    println!("derived clustering has {} clusters", clustering.n_clusters());
    Ok(())
}
