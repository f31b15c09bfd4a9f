//! Enumerates the 27 canonical patterns for three variates, prints the
//! relaxed coefficients of the valid ones and the level-set sizes.

use corrval::canonical::{build_level_sets, enumerate_patterns};

fn main() -> corrval::Result<()> {
    let patterns = enumerate_patterns(3)?;
    println!("{:>3}  {:<12} relaxed (a12, a13, a23)", "id", "ideal");
    for p in &patterns {
        let relaxed = match &p.relaxed {
            Some(m) => format!("{:?}", m.coefficients()),
            None => "not PSD-attainable".into(),
        };
        println!("{:>3}  {:<12} {relaxed}", p.id, format!("{:?}", p.ideal));
    }
    let valid = patterns.iter().filter(|p| p.is_valid()).count();
    println!("\n{valid} valid patterns");

    let table = build_level_sets(&patterns)?;
    for (delta, pairs) in &table.pairs {
        println!("level {delta}: {} ordered pairs", pairs.len());
    }
    Ok(())
}
