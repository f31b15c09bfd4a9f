//! Generates one subject in each standard variant and writes them under a
//! directory (first argument, default `corrval-example`).

use std::path::PathBuf;

use corrval::datagen::{generate_variant, write_subject, SubjectSpec, Variant};

fn main() -> corrval::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corrval-example".into()));
    let spec = SubjectSpec { n_segments: 30, segment_length_range: (1500, 3000), ..SubjectSpec::desk(7, 0) };
    for variant in Variant::standard() {
        let s = generate_variant(&spec, variant)?;
        let dir = root.join(spec.id()).join(variant.slug());
        write_subject(&dir, &spec, &s)?;
        println!(
            "{:<24} {:>6} rows {:>3} segments -> {}",
            variant.to_string(),
            s.ts.n_rows(),
            s.truth.segmentation().n_segments(),
            dir.display()
        );
    }
    Ok(())
}
