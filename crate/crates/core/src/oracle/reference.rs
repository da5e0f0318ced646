//! Row-at-a-time reference evaluator. Deliberately naive: each row is tested
//! against the whole expression tree with boolean logic, and aggregates are
//! accumulated in a single scan.

use crate::relation::{AttributeKind, Cell, Relation, Tuple};

use super::{CompareOp, Condition, ConditionExpr, Direction, GoldAnswer, PlanError, QueryPlan};

const MAX_ROWS: usize = 10_000;

fn position(rel: &Relation, attr: &str) -> Result<usize, PlanError> {
    for (i, a) in rel.schema().iter().enumerate() {
        if a.name == attr {
            return Ok(i);
        }
    }
    Err(PlanError::UnknownAttribute(attr.to_string()))
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

fn to_number(s: &str) -> Option<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => None,
    }
}

fn type_error(attr: &str, what: &str) -> PlanError {
    PlanError::TypeMismatch {
        attr: attr.to_string(),
        op: what.to_string(),
    }
}

/// Schema-level validation of every leaf, independent of row content.
fn check_leaves(expr: &ConditionExpr, rel: &Relation) -> Result<(), PlanError> {
    match expr {
        ConditionExpr::Atom(c) => {
            let kind = rel.schema()[position(rel, &c.attr)?].kind;
            let ok = match c.op {
                CompareOp::Eq => true,
                CompareOp::Gt | CompareOp::Lt => kind == AttributeKind::Numeric && to_number(&c.value).is_some(),
                CompareOp::Contains => matches!(kind, AttributeKind::Categorical | AttributeKind::Freetext),
            };
            if ok {
                Ok(())
            } else {
                Err(type_error(&c.attr, &c.op.to_string()))
            }
        }
        ConditionExpr::And(xs) | ConditionExpr::Or(xs) => {
            for x in xs {
                check_leaves(x, rel)?;
            }
            Ok(())
        }
        ConditionExpr::Diff(a, b) => {
            check_leaves(a, rel)?;
            check_leaves(b, rel)
        }
    }
}

fn leaf_holds(c: &Condition, rel: &Relation, row: &Tuple) -> bool {
    let i = position(rel, &c.attr).expect("checked");
    let text = row.get(i).text();
    match c.op {
        CompareOp::Eq => {
            if rel.schema()[i].kind == AttributeKind::Numeric {
                if let (Some(a), Some(b)) = (to_number(text), to_number(&c.value)) {
                    return a == b;
                }
            }
            fold(text) == fold(&c.value)
        }
        CompareOp::Gt => match (to_number(text), to_number(&c.value)) {
            (Some(a), Some(b)) => a > b,
            _ => false,
        },
        CompareOp::Lt => match (to_number(text), to_number(&c.value)) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        },
        CompareOp::Contains => {
            let hay = text.to_lowercase();
            let value = c.value.to_lowercase();
            if hay.contains('@') {
                hay.contains(&format!("@{value}"))
            } else {
                hay.contains(&value)
            }
        }
    }
}

fn holds(expr: &ConditionExpr, rel: &Relation, row: &Tuple) -> bool {
    match expr {
        ConditionExpr::Atom(c) => leaf_holds(c, rel, row),
        ConditionExpr::And(xs) => xs.iter().all(|x| holds(x, rel, row)),
        ConditionExpr::Or(xs) => xs.iter().any(|x| holds(x, rel, row)),
        ConditionExpr::Diff(a, b) => holds(a, rel, row) && !holds(b, rel, row),
    }
}

fn require_numeric(rel: &Relation, attr: &str) -> Result<usize, PlanError> {
    let i = position(rel, attr)?;
    if rel.schema()[i].kind == AttributeKind::Numeric {
        Ok(i)
    } else {
        Err(type_error(attr, "numeric aggregate"))
    }
}

/// Same contract as [`super::evaluate`], computed by a direct scan.
pub fn brute_force_reference(plan: &QueryPlan, rel: &Relation) -> Result<GoldAnswer, PlanError> {
    if rel.len() > MAX_ROWS {
        return Err(PlanError::Malformed(format!("reference evaluator limited to {MAX_ROWS} rows")));
    }
    let expr = plan.expr();
    check_leaves(expr, rel)?;
    let key = rel.key_index();

    match plan {
        QueryPlan::Retrieve { .. } => {
            let mut keys = Vec::new();
            for row in rel.rows() {
                if holds(expr, rel, row) {
                    keys.push(row.get(key).text().to_string());
                }
            }
            Ok(GoldAnswer::EntitySet { keys, degenerate: false })
        }
        QueryPlan::Delete { .. } => {
            let mut kept = Vec::new();
            for row in rel.rows() {
                if !holds(expr, rel, row) {
                    kept.push(row.clone());
                }
            }
            Ok(GoldAnswer::RelationSnapshot {
                relation: rel.with_rows(kept),
            })
        }
        QueryPlan::Update {
            target, replacement, ..
        } => {
            let t = position(rel, target)?;
            let mut out = Vec::new();
            for row in rel.rows() {
                let mut cells: Vec<Cell> = row.cells().to_vec();
                if holds(expr, rel, row) {
                    cells[t] = Cell::new(replacement.clone());
                }
                out.push(Tuple::new(cells));
            }
            Ok(GoldAnswer::RelationSnapshot {
                relation: rel.with_rows(out),
            })
        }
        QueryPlan::Count { .. } => {
            let mut n = 0usize;
            for row in rel.rows() {
                if holds(expr, rel, row) {
                    n += 1;
                }
            }
            Ok(GoldAnswer::Number { value: n as f64 })
        }
        QueryPlan::Sum { target, .. } => {
            let t = require_numeric(rel, target)?;
            let mut total = 0.0;
            for row in rel.rows() {
                if holds(expr, rel, row) {
                    if let Some(v) = to_number(row.get(t).text()) {
                        total += v;
                    }
                }
            }
            Ok(GoldAnswer::Number { value: total })
        }
        QueryPlan::Superlative {
            target,
            direction,
            tiebreak,
            ..
        } => {
            let t = require_numeric(rel, target)?;
            let tb = position(rel, tiebreak)?;
            let mut best: Option<(f64, &Tuple)> = None;
            for row in rel.rows() {
                if !holds(expr, rel, row) {
                    continue;
                }
                let Some(v) = to_number(row.get(t).text()) else { continue };
                best = match best {
                    None => Some((v, row)),
                    Some((bv, brow)) => {
                        let better = match direction {
                            Direction::Max => v > bv,
                            Direction::Min => v < bv,
                        };
                        if better {
                            Some((v, row))
                        } else if v == bv {
                            let (a, b) = (row.get(tb).text(), brow.get(tb).text());
                            let earlier = (fold(a), a) < (fold(b), b);
                            if earlier {
                                Some((v, row))
                            } else {
                                Some((bv, brow))
                            }
                        } else {
                            Some((bv, brow))
                        }
                    }
                };
            }
            Ok(match best {
                Some((_, row)) => GoldAnswer::EntitySet {
                    keys: vec![row.get(key).text().to_string()],
                    degenerate: false,
                },
                None => GoldAnswer::EntitySet {
                    keys: Vec::new(),
                    degenerate: true,
                },
            })
        }
        QueryPlan::Exists { negated, .. } => {
            let mut witnesses = Vec::new();
            for row in rel.rows() {
                if holds(expr, rel, row) {
                    witnesses.push(row.get(key).text().to_string());
                }
            }
            Ok(GoldAnswer::Witnessed {
                exists: !witnesses.is_empty(),
                negated: *negated,
                witnesses,
            })
        }
        QueryPlan::Project { attrs, .. } => {
            if attrs.is_empty() {
                return Err(PlanError::Malformed("projection with no attributes".into()));
            }
            let mut cols = Vec::new();
            for a in attrs {
                cols.push(position(rel, a)?);
            }
            let mut tuples: Vec<Vec<String>> = Vec::new();
            for row in rel.rows() {
                if !holds(expr, rel, row) {
                    continue;
                }
                let t: Vec<String> = cols.iter().map(|&c| row.get(c).text().to_string()).collect();
                let dup = tuples
                    .iter()
                    .any(|u| u.iter().zip(&t).all(|(x, y)| fold(x) == fold(y)));
                if !dup {
                    tuples.push(t);
                }
            }
            Ok(GoldAnswer::TupleSet {
                attrs: attrs.clone(),
                tuples,
            })
        }
    }
}
