//! Scores the ground truth and a few degraded clusterings of one subject with
//! the Jaccard index and the four internal indices under L5.

use corrval::datagen::{degraded_set, generate_subject, SubjectSpec};
use corrval::distances::DistanceFunction;
use corrval::indices::{jaccard_index, ClusteringGeometry};

fn main() -> corrval::Result<()> {
    let spec = SubjectSpec { n_segments: 46, segment_length_range: (300, 900), ..SubjectSpec::desk(1, 0) };
    let subject = generate_subject(&spec)?;
    let l5: DistanceFunction = "l5".parse()?;
    let n = subject.ts.n_rows();

    let mut candidates = vec![("truth".to_string(), subject.truth.clone())];
    for (d, sc) in degraded_set(&subject.truth, spec.seed, spec.subject)? {
        if d.level % 7 == 1 {
            candidates.push((d.file_stem(), sc));
        }
    }

    println!("{:<22} {:>7} {:>7} {:>7} {:>10} {:>10}", "clustering", "jaccard", "swc", "dbi", "vrc", "pbm");
    for (name, sc) in &candidates {
        let g = ClusteringGeometry::new(&subject.ts, sc)?;
        println!(
            "{name:<22} {:>7.3} {:>7.3} {:>7.3} {:>10.2} {:>10.2}",
            jaccard_index(&subject.truth, sc, n)?,
            g.swc(&l5)?,
            g.dbi(&l5)?,
            g.vrc(&l5)?,
            g.pbm(&l5)?
        );
    }
    Ok(())
}
