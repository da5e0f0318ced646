//! Send one request to an OpenAI-compatible chat completions endpoint.
//!
//! TABLETHINK_ENDPOINT=https://api.example.com/v1/chat/completions \
//! TABLETHINK_MODEL=some-model TABLETHINK_API_KEY=... \
//! cargo run --example remote_provider
//!
//! The token is read from the environment variable named in `auth_env`;
//! it never appears in configuration files.

use tablethink::answer::parse;
use tablethink::dataset::Dataset;
use tablethink::evaluator::score;
use tablethink::gateway::{Gateway, Job, ModelKind, ModelSpec, ProviderConfig};
use tablethink::requestgen::{generate_suite, RequestType, SuiteConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (Ok(endpoint), Ok(model)) = (std::env::var("TABLETHINK_ENDPOINT"), std::env::var("TABLETHINK_MODEL")) else {
        eprintln!("set TABLETHINK_ENDPOINT, TABLETHINK_MODEL and TABLETHINK_API_KEY to run this example");
        return Ok(());
    };
    let mut cfg = ProviderConfig::new(&endpoint, &model);
    cfg.auth_env = Some("TABLETHINK_API_KEY".into());
    cfg.max_retries = 2;
    let spec = ModelSpec {
        name: model,
        kind: ModelKind::Remote(cfg),
    };
    let gw = Gateway::new(&spec)?;

    let ds = Dataset::builtin("soccer")?;
    let ds = ds.clone().with_relation(ds.relation.sample_entities(20, 0)?);
    let suite = generate_suite(
        &ds,
        &SuiteConfig {
            pairs: 1,
            request_types: vec![RequestType::Retrieval],
            ..SuiteConfig::default()
        },
    )?;
    let inst = &suite[0];
    let resp = gw.complete(&Job::from_instance(inst));
    println!("attempts {}, latency {} ms, error {:?}", resp.attempts, resp.latency_ms, resp.error);
    println!("{}\n", resp.text());
    let rec = score(inst, &parse(resp.text(), inst.request_type), &ds.relation, gw.name());
    println!("{} = {:.3}", rec.metric.as_str(), rec.value);
    Ok(())
}
