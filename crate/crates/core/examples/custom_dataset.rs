//! Load a dataset bundle from disk and sample entities from it.
//!
//! cargo run --example custom_dataset [dir]
//!
//! `dir` holds data.csv, schema.json, bank.json and templates.json; the
//! bundled soccer files are used when it is omitted.

use std::path::PathBuf;

use tablethink::dataset::{Dataset, DatasetPaths};
use tablethink::structurer::{render, StructuringLevel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/soccer"));
    let paths = DatasetPaths {
        name: "Custom".into(),
        csv: dir.join("data.csv"),
        schema: dir.join("schema.json"),
        bank: dir.join("bank.json"),
        templates: dir.join("templates.json"),
    };
    let ds = Dataset::load(&paths)?;
    println!("{} entities, attributes:", ds.relation.len());
    for a in ds.relation.schema() {
        println!("  {:<14} {:?}{}", a.name, a.kind, if a.is_key { " (key)" } else { "" });
    }
    let sample = ds.relation.sample_entities(3, 9)?;
    println!("\n{}", render(&sample, StructuringLevel::Natural, &ds.bank, 9)?);
    Ok(())
}
