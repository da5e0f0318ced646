//! Render the same facts at each structuring level, then as a partial table.
//!
//! cargo run --example structuring_levels

use tablethink::fixtures::{players, players_bank};
use tablethink::structurer::{parse_table, render, render_partial_split, Portion, StructuringLevel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rel = players();
    let bank = players_bank();
    for level in StructuringLevel::ALL {
        println!("== {level}\n{}\n", render(&rel, level, &bank, 42)?);
    }

    let table = render(&rel, StructuringLevel::Table, &bank, 42)?;
    assert_eq!(parse_table(&table)?.rows(), rel.rows());

    let (text, in_table) = render_partial_split(&rel, Portion::Half, &bank, 42)?;
    println!("== half as table ({in_table:?})\n{text}");
    Ok(())
}
