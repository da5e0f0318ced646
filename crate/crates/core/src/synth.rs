//! Seeded synthetic relations and query plans for differential and property
//! testing. Value pools are tiny so that ties, duplicates and empty supports
//! show up often.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::oracle::{CompareOp, Condition, ConditionExpr, Direction, QueryPlan, REDACTED};
use crate::relation::{AttributeKind, AttributeSpec, Relation};
use crate::seed::{self, HarnessRng};

const COUNTRIES: &[&str] = &["Argentina", "Portugal", "Brazil", "Spain", "France"];
const CLUBS: &[&str] = &["Juventus", "Barcelona", "PSG", "Sevilla"];
const DOMAINS: &[&str] = &["gmail.com", "yahoo.com", "proton.me"];
const WORDS: &[&str] = &["red", "blue", "green", "amber", "violet", "teal"];

pub fn synthetic_schema() -> Vec<AttributeSpec> {
    vec![
        AttributeSpec::key("Name", "name"),
        AttributeSpec::new("Number", AttributeKind::Numeric, "uniform number")
            .with_paraphrases(&["uniform number", "jersey number"]),
        AttributeSpec::new("Rating", AttributeKind::Numeric, "rating").with_paraphrases(&["rating", "score"]),
        AttributeSpec::new("Nationality", AttributeKind::Categorical, "nationality")
            .with_paraphrases(&["nationality", "country"]),
        AttributeSpec::new("Club", AttributeKind::Categorical, "club").with_paraphrases(&["club", "team"]),
        AttributeSpec::new("Email", AttributeKind::Freetext, "e-mail").with_paraphrases(&["e-mail", "mail address"]),
    ]
}

/// Random relation over [`synthetic_schema`] with `rows` entities.
pub fn relation(seed: u64, rows: usize) -> Relation {
    let mut rng = seed::rng(seed);
    let data: Vec<Vec<String>> = (0..rows)
        .map(|i| {
            let name = format!("{} {}", ["Ana", "Bo", "Cy", "Di", "Ed"][i % 5], i);
            let local = WORDS.choose(&mut rng).unwrap();
            vec![
                name,
                rng.gen_range(1..=12).to_string(),
                format!("{:.1}", f64::from(rng.gen_range(10..=50)) / 10.0),
                COUNTRIES.choose(&mut rng).unwrap().to_string(),
                CLUBS.choose(&mut rng).unwrap().to_string(),
                format!("{local}{}@{}", i % 3, DOMAINS.choose(&mut rng).unwrap()),
            ]
        })
        .collect();
    Relation::from_rows("Synthetic", synthetic_schema(), &data).expect("synthetic rows are valid")
}

/// Random atomic condition compatible with the schema. Values come from the
/// relation when it has rows, otherwise from the static pools.
pub fn condition(rng: &mut HarnessRng, rel: &Relation) -> Condition {
    let attrs = ["Number", "Rating", "Nationality", "Club", "Email"];
    let attr = *attrs.choose(rng).unwrap();
    let spec = rel.attribute(attr).expect("synthetic schema");
    let pick_row = |rng: &mut HarnessRng, col: usize| -> Option<String> {
        (!rel.is_empty()).then(|| rel.rows()[rng.gen_range(0..rel.len())].get(col).text().to_string())
    };
    let col = rel.attr_index(attr).unwrap();
    let (op, value) = match attr {
        "Number" | "Rating" => {
            let op = *[CompareOp::Eq, CompareOp::Gt, CompareOp::Lt].choose(rng).unwrap();
            let v = pick_row(rng, col).unwrap_or_else(|| rng.gen_range(1..=12).to_string());
            (op, v)
        }
        "Email" => (CompareOp::Contains, DOMAINS.choose(rng).unwrap().split('.').next().unwrap().to_string()),
        _ => {
            let op = *[CompareOp::Eq, CompareOp::Eq, CompareOp::Contains].choose(rng).unwrap();
            let v = if op == CompareOp::Contains {
                let full = pick_row(rng, col).unwrap_or_else(|| CLUBS[0].to_string());
                let n = rng.gen_range(1..=full.len().min(3));
                full[..n].to_lowercase()
            } else {
                pick_row(rng, col).unwrap_or_else(|| COUNTRIES.choose(rng).unwrap().to_string())
            };
            (op, v)
        }
    };
    Condition::new(attr, op, &value, &spec.canonical_phrase)
}

/// Random expression of depth ≤ 2 using every connective.
pub fn expr(rng: &mut HarnessRng, rel: &Relation, depth: u32) -> ConditionExpr {
    if depth == 0 || rng.gen_bool(0.35) {
        return ConditionExpr::Atom(condition(rng, rel));
    }
    match rng.gen_range(0..3) {
        0 => ConditionExpr::And((0..rng.gen_range(2..=3)).map(|_| expr(rng, rel, depth - 1)).collect()),
        1 => ConditionExpr::Or((0..rng.gen_range(2..=3)).map(|_| expr(rng, rel, depth - 1)).collect()),
        _ => ConditionExpr::Diff(Box::new(expr(rng, rel, depth - 1)), Box::new(expr(rng, rel, depth - 1))),
    }
}

/// Distinct plan shapes: the eight plan kinds, with Exists split by polarity.
pub const PLAN_SHAPES: usize = 9;

/// Random plan; `shape` selects one of [`PLAN_SHAPES`] (taken modulo).
pub fn plan(rng: &mut HarnessRng, rel: &Relation, shape: usize) -> QueryPlan {
    let expr = expr(rng, rel, 2);
    let numeric = *["Number", "Rating"].choose(rng).unwrap();
    match shape % PLAN_SHAPES {
        0 => QueryPlan::Retrieve { expr },
        1 => QueryPlan::Delete { expr },
        2 => QueryPlan::Update {
            target: ["Number", "Club", "Email"].choose(rng).unwrap().to_string(),
            replacement: REDACTED.to_string(),
            expr,
        },
        3 => QueryPlan::Count { expr },
        4 => QueryPlan::Sum {
            target: numeric.to_string(),
            expr,
        },
        5 => QueryPlan::Superlative {
            target: numeric.to_string(),
            direction: if rng.gen_bool(0.5) { Direction::Max } else { Direction::Min },
            tiebreak: "Name".to_string(),
            expr,
        },
        6 => QueryPlan::Exists { expr, negated: false },
        7 => QueryPlan::Exists { expr, negated: true },
        _ => {
            let mut attrs = vec!["Name", "Number", "Nationality", "Club"];
            attrs.shuffle(rng);
            attrs.truncate(rng.gen_range(1..=3));
            QueryPlan::Project {
                attrs: attrs.into_iter().map(str::to_string).collect(),
                expr,
            }
        }
    }
}
