//! Compare natural-text and table scores from a CSV of averages.
//!
//! cargo run --example format_comparison [scores.csv]

use tablethink::cli::FORMAT_AVERAGES;
use tablethink::evaluator::{compare_formats, improvement_markdown, read_format_scores};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let csv = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => FORMAT_AVERAGES.to_string(),
    };
    let (text, table) = read_format_scores(csv.as_bytes())?;
    let summary = compare_formats(&text, &table)?;
    print!("{}", improvement_markdown(&summary));
    Ok(())
}
