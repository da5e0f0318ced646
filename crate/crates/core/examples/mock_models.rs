//! Run a suite through the perfect and lossy mock models.
//!
//! cargo run --example mock_models

use tablethink::dataset::Dataset;
use tablethink::gateway::{read_results, run_suite, Gateway, Job, ModelSpec};
use tablethink::requestgen::{generate_suite, RequestType, SuiteConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = Dataset::builtin("pii")?;
    let suite = generate_suite(
        &ds,
        &SuiteConfig {
            seed: 3,
            pairs: 5,
            request_types: vec![RequestType::Retrieval, RequestType::Count],
            ..SuiteConfig::default()
        },
    )?;
    let jobs: Vec<Job> = suite.iter().map(Job::from_instance).collect();
    let dir = std::env::temp_dir().join("tablethink-mock-models");
    std::fs::create_dir_all(&dir)?;

    for spec in [ModelSpec::perfect(), ModelSpec::lossy(0.3, 0.2, 3)] {
        let gw = Gateway::new(&spec)?;
        let out = dir.join(format!("results-{}.jsonl", spec.name));
        let _ = std::fs::remove_file(&out);
        let summary = run_suite(&jobs, &gw, &out)?;
        println!("{}: {summary:?}", spec.name);
        // A second run finds every id already answered.
        println!("  rerun: {:?}", run_suite(&jobs, &gw, &out)?);
        let first = &read_results(&out, false)?[0];
        println!("  {} replied:\n{}\n", first.id, first.text());
    }
    Ok(())
}
