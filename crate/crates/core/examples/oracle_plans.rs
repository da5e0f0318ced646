//! Evaluate query plans against a small relation.
//!
//! cargo run --example oracle_plans

use tablethink::fixtures::players_extended;
use tablethink::oracle::{evaluate, Condition, ConditionExpr, Connective, Direction, QueryPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rel = players_extended();
    println!("{}\n", rel.to_csv());

    let ten = Condition::eq("Number", "10");
    let argentina = Condition::eq("Nationality", "Argentina");
    let plans = [
        ("and", QueryPlan::Retrieve {
            expr: ConditionExpr::join(Connective::And, vec![ten.clone(), argentina.clone()])?,
        }),
        ("or", QueryPlan::Retrieve {
            expr: ConditionExpr::join(Connective::Or, vec![ten.clone(), argentina.clone()])?,
        }),
        ("diff", QueryPlan::Retrieve {
            expr: ConditionExpr::join(Connective::Diff, vec![ten.clone(), argentina.clone()])?,
        }),
        ("count", QueryPlan::Count {
            expr: ConditionExpr::Atom(ten.clone()),
        }),
        ("superlative", QueryPlan::Superlative {
            target: "Number".into(),
            direction: Direction::Max,
            tiebreak: "Name".into(),
            expr: ConditionExpr::join(Connective::Or, vec![ten.clone(), Condition::eq("Club", "Sevilla")])?,
        }),
        ("negated exists", QueryPlan::Exists {
            expr: ConditionExpr::join(Connective::And, vec![ten, argentina])?,
            negated: true,
        }),
    ];
    for (label, plan) in plans {
        println!("{label:>15}: {}", serde_json::to_string(&evaluate(&plan, &rel)?)?);
    }
    Ok(())
}
