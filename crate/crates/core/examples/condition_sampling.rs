//! Sample condition lists with guaranteed support.
//!
//! cargo run --example condition_sampling

use tablethink::condgen::{eligible_attributes, sample_conditions, support, ConditionPolicy};
use tablethink::dataset::Dataset;
use tablethink::oracle::Connective;
use tablethink::seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = Dataset::builtin("movie")?;
    let policy = ConditionPolicy::full().with_n(2);
    for (attr, ops) in eligible_attributes(&ds.relation, &policy.ops) {
        println!("{attr:>12}: {ops:?}");
    }
    let connectives = [Connective::And, Connective::Or, Connective::Diff];
    for pair in 0..4 {
        let mut rng = seed::rng(seed::derive(7, "pair", &[pair]));
        let sampled = sample_conditions(&ds.relation, &policy, &connectives, &mut rng)?;
        println!("\npair {pair} ({} resamples)", sampled.resamples);
        for c in connectives {
            let expr = sampled.join(c)?;
            println!("  {c:>4}: {} -> {} movies", expr.render(), support(&expr, &ds.relation)?);
        }
    }
    Ok(())
}
