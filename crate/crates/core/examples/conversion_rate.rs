//! Ask a model to turn natural text into a table and measure cell fill rate.
//!
//! cargo run --example conversion_rate

use tablethink::cli::convert_rate;
use tablethink::dataset::Dataset;
use tablethink::gateway::{Gateway, ModelSpec};
use tablethink::requestgen::make_pre_instruction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in Dataset::BUILTINS {
        let ds = Dataset::builtin(name)?;
        if name == "soccer" {
            println!("pre-instruction with columns:\n{}\n", make_pre_instruction(&ds, true));
        }
        for spec in [ModelSpec::perfect(), ModelSpec::lossy(0.25, 0.0, 1)] {
            let gw = Gateway::new(&spec)?;
            for cols in [false, true] {
                let rate = convert_rate(&ds, &gw, cols, 0)?;
                println!("{name:>7} {:<14} columns={cols:<5} fill rate {rate:.3}", spec.name);
            }
        }
    }
    Ok(())
}
