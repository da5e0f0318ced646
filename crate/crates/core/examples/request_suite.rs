//! Generate a request suite and show one prompt per request type.
//!
//! cargo run --example request_suite

use tablethink::answer::format_gold;
use tablethink::dataset::Dataset;
use tablethink::oracle::Connective;
use tablethink::requestgen::{generate_suite, RequestType, SuiteConfig};
use tablethink::structurer::StructuringLevel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = Dataset::builtin("soccer")?.with_relation(Dataset::builtin("soccer")?.relation.sample_entities(8, 1)?);
    let config = SuiteConfig {
        seed: 1,
        pairs: 2,
        request_types: RequestType::ALL.to_vec(),
        connectives: vec![Connective::And, Connective::Or],
        levels: vec![StructuringLevel::TemplateBased],
        ..SuiteConfig::default()
    };
    let suite = generate_suite(&ds, &config)?;
    println!("{} instances (expected {})\n", suite.len(), config.expected_size());

    let mut shown = Vec::new();
    for inst in &suite {
        if shown.contains(&(inst.request_type, inst.negated)) {
            continue;
        }
        shown.push((inst.request_type, inst.negated));
        println!("---- {} {}{}", inst.id, inst.request_type, if inst.negated { " (negated)" } else { "" });
        println!("{}\n\nGold:\n{}\n", inst.prompt, format_gold(&inst.gold));
    }
    println!("---- context shared by every instance\n{}", suite[0].context);
    Ok(())
}
