//! Relational-algebra oracle: condition expressions, query plans and gold
//! answers.
//!
//! [`evaluate`] works with row-index sets (intersection, union, difference).
//! [`brute_force_reference`] re-derives the same answers with a per-row
//! boolean filter and shares no evaluation code with it; the two are checked
//! against each other in the test suites.

mod reference;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relation::{normalize, AttributeKind, Cell, Relation, SchemaError};

pub use reference::brute_force_reference;

/// Literal written into updated cells.
pub const REDACTED: &str = "N/A";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareOp {
    Eq,
    Gt,
    Lt,
    Contains,
}

impl CompareOp {
    pub const ALL: [CompareOp; 4] = [CompareOp::Eq, CompareOp::Gt, CompareOp::Lt, CompareOp::Contains];

    /// Whether this operator may be applied to an attribute of `kind`.
    pub fn accepts(self, kind: AttributeKind) -> bool {
        match self {
            CompareOp::Eq => true,
            CompareOp::Gt | CompareOp::Lt => kind == AttributeKind::Numeric,
            CompareOp::Contains => kind != AttributeKind::Numeric,
        }
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompareOp::Eq => "=",
            CompareOp::Gt => ">",
            CompareOp::Lt => "<",
            CompareOp::Contains => "contains",
        })
    }
}

/// An atomic predicate over one attribute.
///
/// `value` is kept as source text; numeric comparisons parse it on demand so
/// thresholds such as "3.0" render exactly as drawn.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub attr: String,
    pub op: CompareOp,
    pub value: String,
    pub rendered: String,
    /// Phrase for the negated form, used on the right-hand side of a
    /// difference ("nationality is not Argentina").
    pub negated: String,
}

impl Condition {
    /// Condition with phrases derived from `attr_phrase`.
    pub fn new(attr: &str, op: CompareOp, value: &str, attr_phrase: &str) -> Self {
        let (rendered, negated) = phrase(op, attr_phrase, value, false);
        Condition {
            attr: attr.to_string(),
            op,
            value: value.to_string(),
            rendered,
            negated,
        }
    }

    /// Equality condition phrased with the lowercased attribute name.
    pub fn eq(attr: &str, value: &str) -> Self {
        Condition::new(attr, CompareOp::Eq, value, &attr.to_lowercase())
    }
}

/// Renders the positive and negated phrase of a condition. `domain` selects
/// the e-mail-domain wording for `Contains`.
pub fn phrase(op: CompareOp, attr_phrase: &str, value: &str, domain: bool) -> (String, String) {
    let p = attr_phrase;
    match op {
        CompareOp::Eq => (format!("{p} is {value}"), format!("{p} is not {value}")),
        CompareOp::Gt => (
            format!("{p} is higher than {value}"),
            format!("{p} is not higher than {value}"),
        ),
        CompareOp::Lt => (
            format!("{p} is lower than {value}"),
            format!("{p} is not lower than {value}"),
        ),
        CompareOp::Contains if domain => (
            format!("{p} domain is {value}"),
            format!("{p} domain is not {value}"),
        ),
        CompareOp::Contains => (
            format!("{p} contains {value}"),
            format!("{p} does not contain {value}"),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connective {
    And,
    Or,
    Diff,
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Diff => "diff",
        })
    }
}

/// Tree of conditions. `Diff(a, b)` means `a ∧ ¬b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionExpr {
    Atom(Condition),
    And(Vec<ConditionExpr>),
    Or(Vec<ConditionExpr>),
    Diff(Box<ConditionExpr>, Box<ConditionExpr>),
}

impl ConditionExpr {
    /// Joins conditions with a connective. A single condition stays bare.
    /// For `Diff` the last condition is subtracted from the conjunction of
    /// the others.
    pub fn join(connective: Connective, mut conds: Vec<Condition>) -> Result<Self, PlanError> {
        if conds.is_empty() {
            return Err(PlanError::Malformed("no conditions to join".into()));
        }
        if conds.len() == 1 {
            return Ok(ConditionExpr::Atom(conds.pop().unwrap()));
        }
        let atoms = |cs: Vec<Condition>| cs.into_iter().map(ConditionExpr::Atom).collect::<Vec<_>>();
        Ok(match connective {
            Connective::And => ConditionExpr::And(atoms(conds)),
            Connective::Or => ConditionExpr::Or(atoms(conds)),
            Connective::Diff => {
                let last = conds.pop().unwrap();
                let mut head = atoms(conds);
                let left = if head.len() == 1 {
                    head.pop().unwrap()
                } else {
                    ConditionExpr::And(head)
                };
                ConditionExpr::Diff(Box::new(left), Box::new(ConditionExpr::Atom(last)))
            }
        })
    }

    /// Leaves in left-to-right order, paired with `true` when the leaf sits
    /// under an odd number of difference right-hand sides.
    pub fn leaves(&self) -> Vec<(&Condition, bool)> {
        fn walk<'a>(e: &'a ConditionExpr, neg: bool, out: &mut Vec<(&'a Condition, bool)>) {
            match e {
                ConditionExpr::Atom(c) => out.push((c, neg)),
                ConditionExpr::And(xs) | ConditionExpr::Or(xs) => xs.iter().for_each(|x| walk(x, neg, out)),
                ConditionExpr::Diff(a, b) => {
                    walk(a, neg, out);
                    walk(b, !neg, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, false, &mut out);
        out
    }

    pub fn n_conditions(&self) -> usize {
        self.leaves().len()
    }

    /// Checks the structural invariants: And/Or carry at least two children.
    pub fn check_shape(&self) -> Result<(), PlanError> {
        match self {
            ConditionExpr::Atom(c) if c.rendered.trim().is_empty() => {
                Err(PlanError::Malformed(format!("condition on `{}` has no phrase", c.attr)))
            }
            ConditionExpr::Atom(_) => Ok(()),
            ConditionExpr::And(xs) | ConditionExpr::Or(xs) => {
                if xs.len() < 2 {
                    return Err(PlanError::Malformed("connective with fewer than two children".into()));
                }
                xs.iter().try_for_each(ConditionExpr::check_shape)
            }
            ConditionExpr::Diff(a, b) => {
                a.check_shape()?;
                b.check_shape()
            }
        }
    }

    /// Natural-language rendering used inside prompts.
    pub fn render(&self) -> String {
        fn inner(e: &ConditionExpr) -> String {
            match e {
                ConditionExpr::Atom(c) => c.rendered.clone(),
                _ => format!("({})", e.render()),
            }
        }
        match self {
            ConditionExpr::Atom(c) => c.rendered.clone(),
            ConditionExpr::And(xs) => xs.iter().map(inner).collect::<Vec<_>>().join(" and "),
            ConditionExpr::Or(xs) => xs.iter().map(inner).collect::<Vec<_>>().join(" or "),
            ConditionExpr::Diff(a, b) => {
                let right = match b.as_ref() {
                    ConditionExpr::Atom(c) => c.negated.clone(),
                    other => format!("not ({})", other.render()),
                };
                format!("{} and {}", a.render(), right)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Max,
    Min,
}

/// One plan shape per request type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum QueryPlan {
    Retrieve {
        expr: ConditionExpr,
    },
    Delete {
        expr: ConditionExpr,
    },
    Update {
        target: String,
        replacement: String,
        expr: ConditionExpr,
    },
    Count {
        expr: ConditionExpr,
    },
    Sum {
        target: String,
        expr: ConditionExpr,
    },
    Superlative {
        target: String,
        direction: Direction,
        tiebreak: String,
        expr: ConditionExpr,
    },
    Exists {
        expr: ConditionExpr,
        negated: bool,
    },
    Project {
        attrs: Vec<String>,
        expr: ConditionExpr,
    },
}

impl QueryPlan {
    pub fn expr(&self) -> &ConditionExpr {
        match self {
            QueryPlan::Retrieve { expr }
            | QueryPlan::Delete { expr }
            | QueryPlan::Update { expr, .. }
            | QueryPlan::Count { expr }
            | QueryPlan::Sum { expr, .. }
            | QueryPlan::Superlative { expr, .. }
            | QueryPlan::Exists { expr, .. }
            | QueryPlan::Project { expr, .. } => expr,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Oracle output.
///
/// `Witnessed` stores the underlying existence fact; the answer expected for
/// the request is `exists != negated`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoldAnswer {
    EntitySet {
        keys: Vec<String>,
        /// Set for a superlative whose condition has empty support.
        #[serde(default, skip_serializing_if = "is_false")]
        degenerate: bool,
    },
    TupleSet {
        attrs: Vec<String>,
        tuples: Vec<Vec<String>>,
    },
    RelationSnapshot {
        relation: Relation,
    },
    Number {
        value: f64,
    },
    Witnessed {
        exists: bool,
        negated: bool,
        witnesses: Vec<String>,
    },
}

impl GoldAnswer {
    pub fn entity_set(keys: Vec<String>) -> Self {
        GoldAnswer::EntitySet { keys, degenerate: false }
    }

    /// The yes/no answer a correct response gives, for existence golds.
    pub fn expected_judgement(&self) -> Option<bool> {
        match self {
            GoldAnswer::Witnessed { exists, negated, .. } => Some(exists != negated),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("operator {op} cannot be applied to `{attr}`")]
    TypeMismatch { attr: String, op: String },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("malformed plan: {0}")]
    Malformed(String),
}

impl From<SchemaError> for PlanError {
    fn from(e: SchemaError) -> Self {
        match e {
            SchemaError::UnknownAttribute(a) => PlanError::UnknownAttribute(a),
            other => PlanError::Malformed(other.to_string()),
        }
    }
}

fn mismatch(attr: &str, what: impl fmt::Display) -> PlanError {
    PlanError::TypeMismatch {
        attr: attr.to_string(),
        op: what.to_string(),
    }
}

/// Needle for a `Contains` test against one cell. E-mail cells match on
/// "@" + value so a domain is never confused with a local part.
pub(crate) fn contains_needle(cell: &str, value: &str) -> String {
    if cell.contains('@') {
        format!("@{}", value.to_lowercase())
    } else {
        value.to_lowercase()
    }
}

type RowSet = BTreeSet<usize>;

fn atom_rows(cond: &Condition, rel: &Relation) -> Result<RowSet, PlanError> {
    let idx = rel.attr_index(&cond.attr)?;
    let kind = rel.schema()[idx].kind;
    if !cond.op.accepts(kind) {
        return Err(mismatch(&cond.attr, cond.op));
    }
    let threshold = match cond.op {
        CompareOp::Gt | CompareOp::Lt => Some(
            crate::relation::parse_number(&cond.value).ok_or_else(|| mismatch(&cond.attr, cond.op))?,
        ),
        _ => None,
    };
    let literal_num = crate::relation::parse_number(&cond.value);
    let literal_norm = normalize(&cond.value);
    let matches = |cell: &Cell| -> bool {
        match cond.op {
            CompareOp::Eq => match (kind, cell.number(), literal_num) {
                (AttributeKind::Numeric, Some(a), Some(b)) => a == b,
                _ => normalize(cell.text()) == literal_norm,
            },
            CompareOp::Gt => cell.number().is_some_and(|v| v > threshold.unwrap()),
            CompareOp::Lt => cell.number().is_some_and(|v| v < threshold.unwrap()),
            CompareOp::Contains => cell
                .text()
                .to_lowercase()
                .contains(&contains_needle(cell.text(), &cond.value)),
        }
    };
    Ok(rel
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, r)| matches(r.get(idx)))
        .map(|(i, _)| i)
        .collect())
}

fn expr_rows(expr: &ConditionExpr, rel: &Relation) -> Result<RowSet, PlanError> {
    match expr {
        ConditionExpr::Atom(c) => atom_rows(c, rel),
        ConditionExpr::And(xs) => {
            let mut sets = xs.iter().map(|x| expr_rows(x, rel));
            let first = sets.next().ok_or_else(|| PlanError::Malformed("empty and".into()))??;
            sets.try_fold(first, |acc, s| Ok(&acc & &s?))
        }
        ConditionExpr::Or(xs) => xs
            .iter()
            .try_fold(RowSet::new(), |acc, x| Ok(&acc | &expr_rows(x, rel)?)),
        ConditionExpr::Diff(a, b) => Ok(&expr_rows(a, rel)? - &expr_rows(b, rel)?),
    }
}

/// Keys of the rows satisfying `expr`, in relation order.
pub fn eval_expr(expr: &ConditionExpr, rel: &Relation) -> Result<Vec<String>, PlanError> {
    let rows = expr_rows(expr, rel)?;
    Ok(rows.into_iter().map(|i| rel.key_of(&rel.rows()[i]).to_string()).collect())
}

fn numeric_attr(rel: &Relation, attr: &str) -> Result<usize, PlanError> {
    let idx = rel.attr_index(attr)?;
    if rel.schema()[idx].kind != AttributeKind::Numeric {
        return Err(mismatch(attr, "numeric aggregate"));
    }
    Ok(idx)
}

/// Computes the gold answer for a plan.
pub fn evaluate(plan: &QueryPlan, rel: &Relation) -> Result<GoldAnswer, PlanError> {
    let rows = expr_rows(plan.expr(), rel)?;
    let keys = || rows.iter().map(|&i| rel.key_of(&rel.rows()[i]).to_string()).collect::<Vec<_>>();
    Ok(match plan {
        QueryPlan::Retrieve { .. } => GoldAnswer::entity_set(keys()),
        QueryPlan::Delete { .. } => {
            let kept = rel
                .rows()
                .iter()
                .enumerate()
                .filter(|(i, _)| !rows.contains(i))
                .map(|(_, r)| r.clone())
                .collect();
            GoldAnswer::RelationSnapshot {
                relation: rel.with_rows(kept),
            }
        }
        QueryPlan::Update {
            target, replacement, ..
        } => {
            let idx = rel.attr_index(target)?;
            let updated = rel
                .rows()
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut r = r.clone();
                    if rows.contains(&i) {
                        r.set(idx, Cell::new(replacement.as_str()));
                    }
                    r
                })
                .collect();
            GoldAnswer::RelationSnapshot {
                relation: rel.with_rows(updated),
            }
        }
        QueryPlan::Count { .. } => GoldAnswer::Number {
            value: rows.len() as f64,
        },
        QueryPlan::Sum { target, .. } => {
            let idx = numeric_attr(rel, target)?;
            let value = rows
                .iter()
                .filter_map(|&i| rel.rows()[i].get(idx).number())
                .sum::<f64>();
            // empty float sums start at -0.0
            GoldAnswer::Number { value: value + 0.0 }
        }
        QueryPlan::Superlative {
            target,
            direction,
            tiebreak,
            ..
        } => {
            let idx = numeric_attr(rel, target)?;
            let tb = rel.attr_index(tiebreak)?;
            let candidates: Vec<(usize, f64)> = rows
                .iter()
                .filter_map(|&i| rel.rows()[i].get(idx).number().map(|v| (i, v)))
                .collect();
            let extreme = candidates.iter().map(|&(_, v)| v).reduce(|a, b| match direction {
                Direction::Max => a.max(b),
                Direction::Min => a.min(b),
            });
            match extreme {
                None => GoldAnswer::EntitySet {
                    keys: vec![],
                    degenerate: true,
                },
                Some(m) => {
                    let winner = candidates
                        .iter()
                        .filter(|&&(_, v)| v == m)
                        .map(|&(i, _)| i)
                        .min_by(|&a, &b| {
                            let ta = rel.rows()[a].get(tb).text();
                            let tb_ = rel.rows()[b].get(tb).text();
                            normalize(ta).cmp(&normalize(tb_)).then(ta.cmp(tb_)).then(a.cmp(&b))
                        })
                        .expect("non-empty tie set");
                    GoldAnswer::entity_set(vec![rel.key_of(&rel.rows()[winner]).to_string()])
                }
            }
        }
        QueryPlan::Exists { negated, .. } => {
            let witnesses = keys();
            GoldAnswer::Witnessed {
                exists: !witnesses.is_empty(),
                negated: *negated,
                witnesses,
            }
        }
        QueryPlan::Project { attrs, .. } => {
            if attrs.is_empty() {
                return Err(PlanError::Malformed("projection with no attributes".into()));
            }
            let idxs = attrs
                .iter()
                .map(|a| rel.attr_index(a))
                .collect::<Result<Vec<_>, _>>()?;
            let mut seen = BTreeSet::new();
            let tuples = rows
                .iter()
                .map(|&i| idxs.iter().map(|&j| rel.rows()[i].get(j).text().to_string()).collect::<Vec<_>>())
                .filter(|t| seen.insert(t.iter().map(|c| normalize(c)).collect::<Vec<_>>()))
                .collect();
            GoldAnswer::TupleSet {
                attrs: attrs.clone(),
                tuples,
            }
        }
    })
}
