//! Score mock-model results and print the aggregated reports.
//!
//! cargo run --example evaluate_suite

use tablethink::answer::parse;
use tablethink::dataset::Dataset;
use tablethink::evaluator::{self, Grouping};
use tablethink::gateway::{Gateway, Job, ModelSpec};
use tablethink::oracle::Connective;
use tablethink::requestgen::{generate_suite, RequestType, SuiteConfig};
use tablethink::structurer::StructuringLevel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = Dataset::builtin("soccer")?;
    let suite = generate_suite(
        &ds,
        &SuiteConfig {
            seed: 5,
            pairs: 10,
            request_types: RequestType::ALL.to_vec(),
            connectives: vec![Connective::And, Connective::Or, Connective::Diff],
            levels: vec![StructuringLevel::Natural, StructuringLevel::Table],
            ..SuiteConfig::default()
        },
    )?;
    let mut records = Vec::new();
    for spec in [ModelSpec::perfect(), ModelSpec::lossy(0.2, 0.1, 5)] {
        let gw = Gateway::new(&spec)?;
        for inst in &suite {
            let resp = gw.complete(&Job::from_instance(inst));
            let parsed = parse(resp.text(), inst.request_type);
            records.push(evaluator::score(inst, &parsed, &ds.relation, &spec.name));
        }
    }
    let rows = evaluator::aggregate(&records, Grouping::default());
    println!("{}", evaluator::markdown_report(&rows));
    println!("{}", evaluator::variance_markdown(&rows));
    println!("{}", evaluator::existence_markdown(&evaluator::existence_deltas(&records)));

    let by_connective = Grouping {
        by_connective: true,
        ..Grouping::default()
    };
    let rows = evaluator::aggregate(&records, by_connective);
    for r in rows.iter().filter(|r| r.key.model != "perfect" && r.key.request_type == RequestType::Retrieval) {
        println!("{:?} {:?}: {:.3}", r.key.level, r.key.connective, r.mean);
    }
    Ok(())
}
