//! Seeded sampling of conditions and condition expressions.
//!
//! Conditions never use the key attribute. An expression is only emitted when
//! the oracle finds at least `min_support` matching entities; otherwise the
//! draw is repeated up to `max_resample` times.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{self, phrase, CompareOp, Condition, ConditionExpr, Connective, PlanError};
use crate::relation::Relation;
use crate::seed::{self, HarnessRng};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("need {needed} distinct eligible attributes, relation offers {available}")]
    NoEligibleAttribute { needed: usize, available: usize },
    #[error("no condition set reached support {min_support} after {attempts} attempts")]
    UnsatisfiableConditions { min_support: usize, attempts: usize },
    #[error("template mismatch: {0}")]
    TemplateMismatch(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("render: {0}")]
    Render(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionPolicy {
    pub ops: Vec<CompareOp>,
    pub n_conditions: usize,
    pub connectives: Vec<Connective>,
    #[serde(default = "default_min_support")]
    pub min_support: usize,
    #[serde(default = "default_max_resample")]
    pub max_resample: usize,
}

fn default_min_support() -> usize {
    1
}

fn default_max_resample() -> usize {
    1000
}

impl ConditionPolicy {
    /// Two equality conditions joined by and/or.
    pub fn equality() -> Self {
        ConditionPolicy {
            ops: vec![CompareOp::Eq],
            n_conditions: 2,
            connectives: vec![Connective::And, Connective::Or],
            min_support: 1,
            max_resample: 1000,
        }
    }

    /// As [`ConditionPolicy::equality`] with all four operators.
    pub fn full() -> Self {
        ConditionPolicy {
            ops: CompareOp::ALL.to_vec(),
            ..Self::equality()
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n_conditions = n;
        self
    }

    pub fn with_connectives(mut self, cs: &[Connective]) -> Self {
        self.connectives = cs.to_vec();
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n_conditions == 0 {
            return Err(GenError::InvalidPolicy("n_conditions must be at least 1".into()));
        }
        if self.min_support == 0 {
            return Err(GenError::InvalidPolicy("min_support must be at least 1".into()));
        }
        if self.ops.is_empty() {
            return Err(GenError::InvalidPolicy("no operators allowed".into()));
        }
        if self.connectives.is_empty() {
            return Err(GenError::InvalidPolicy("no connectives allowed".into()));
        }
        if self.max_resample == 0 {
            return Err(GenError::InvalidPolicy("max_resample must be at least 1".into()));
        }
        Ok(())
    }
}

/// Substring needles offered for `Contains` on one attribute: the domain
/// label of e-mail cells, otherwise alphabetic words of three or more letters.
fn contains_tokens(rel: &Relation, col: usize) -> (Vec<String>, bool) {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let email = rel.rows().iter().any(|r| r.get(col).text().contains('@'));
    for row in rel.rows() {
        let text = row.get(col).text();
        let words: Vec<String> = if email {
            text.split_once('@')
                .and_then(|(_, d)| d.split('.').next())
                .filter(|d| !d.is_empty())
                .map(|d| vec![d.to_lowercase()])
                .unwrap_or_default()
        } else {
            text.split(|c: char| !c.is_alphabetic())
                .filter(|w| w.chars().count() >= 3)
                .map(str::to_lowercase)
                .collect()
        };
        for w in words {
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
    }
    (out, email)
}

/// Operators from `ops` that can be drawn for attribute `col`.
fn eligible_ops(rel: &Relation, col: usize, ops: &[CompareOp]) -> Vec<CompareOp> {
    let spec = &rel.schema()[col];
    ops.iter()
        .copied()
        .filter(|op| op.accepts(spec.kind))
        .filter(|op| match op {
            CompareOp::Contains => !contains_tokens(rel, col).0.is_empty(),
            CompareOp::Gt | CompareOp::Lt => rel.rows().iter().any(|r| r.get(col).number().is_some()),
            CompareOp::Eq => !rel.is_empty(),
        })
        .collect()
}

/// Non-key attributes with at least one drawable operator, paired with those
/// operators, in schema order.
pub fn eligible_attributes(rel: &Relation, ops: &[CompareOp]) -> Vec<(String, Vec<CompareOp>)> {
    (0..rel.schema().len())
        .filter(|&i| i != rel.key_index())
        .filter_map(|i| {
            let e = eligible_ops(rel, i, ops);
            (!e.is_empty()).then(|| (rel.schema()[i].name.clone(), e))
        })
        .collect()
}

/// Builds a condition with its phrases from the attribute's canonical phrase.
/// Used for forced draws and by the sampler itself.
pub fn make_condition(rel: &Relation, attr: &str, op: CompareOp, value: &str) -> Result<Condition, GenError> {
    let col = rel.attr_index(attr).map_err(PlanError::from)?;
    let spec = &rel.schema()[col];
    if !op.accepts(spec.kind) {
        return Err(PlanError::TypeMismatch {
            attr: attr.to_string(),
            op: op.to_string(),
        }
        .into());
    }
    let domain = op == CompareOp::Contains && contains_tokens(rel, col).1;
    let (rendered, negated) = phrase(op, &spec.canonical_phrase, value, domain);
    Ok(Condition {
        attr: spec.name.clone(),
        op,
        value: value.to_string(),
        rendered,
        negated,
    })
}

fn draw_value(rng: &mut HarnessRng, rel: &Relation, attr: &str, op: CompareOp) -> Result<String, GenError> {
    let col = rel.attr_index(attr).map_err(PlanError::from)?;
    let pool: Vec<String> = match op {
        CompareOp::Contains => contains_tokens(rel, col).0,
        CompareOp::Gt | CompareOp::Lt => {
            let mut seen = BTreeSet::new();
            rel.rows()
                .iter()
                .filter(|r| r.get(col).number().is_some())
                .map(|r| r.get(col).text().trim().to_string())
                .filter(|t| seen.insert(t.clone()))
                .collect()
        }
        CompareOp::Eq => rel.unique_values(attr).map_err(PlanError::from)?,
    };
    pool.choose(rng)
        .cloned()
        .ok_or(GenError::NoEligibleAttribute { needed: 1, available: 0 })
}

fn draw_condition(
    rng: &mut HarnessRng,
    rel: &Relation,
    attr: &str,
    ops: &[CompareOp],
) -> Result<Condition, GenError> {
    let op = *ops.choose(rng).expect("eligible attributes carry at least one op");
    let value = draw_value(rng, rel, attr, op)?;
    make_condition(rel, attr, op, &value)
}

/// One condition: attribute uniform over eligible attributes, then operator
/// uniform over that attribute's eligible operators, then value.
pub fn sample_condition(rel: &Relation, policy: &ConditionPolicy, seed: u64) -> Result<Condition, GenError> {
    policy.validate()?;
    let eligible = eligible_attributes(rel, &policy.ops);
    let mut rng = seed::rng(seed::derive(seed, "condition", &[]));
    let (attr, ops) = eligible
        .choose(&mut rng)
        .ok_or(GenError::NoEligibleAttribute { needed: 1, available: 0 })?;
    draw_condition(&mut rng, rel, attr, ops)
}

/// Number of entities satisfying `expr`.
pub fn support(expr: &ConditionExpr, rel: &Relation) -> Result<usize, GenError> {
    Ok(oracle::eval_expr(expr, rel)?.len())
}

/// A sampled condition list with the number of rejected draws before it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledConditions {
    pub conditions: Vec<Condition>,
    pub resamples: usize,
}

impl SampledConditions {
    pub fn join(&self, connective: Connective) -> Result<ConditionExpr, GenError> {
        Ok(ConditionExpr::join(connective, self.conditions.clone())?)
    }
}

/// Draws `policy.n_conditions` conditions over distinct attributes such that
/// joining them with *each* connective in `connectives` reaches
/// `policy.min_support`. Sharing the list across connectives keeps the
/// and/or/diff variants of a pair comparable.
pub fn sample_conditions(
    rel: &Relation,
    policy: &ConditionPolicy,
    connectives: &[Connective],
    rng: &mut HarnessRng,
) -> Result<SampledConditions, GenError> {
    policy.validate()?;
    let eligible = eligible_attributes(rel, &policy.ops);
    let n = policy.n_conditions;
    if eligible.len() < n {
        return Err(GenError::NoEligibleAttribute {
            needed: n,
            available: eligible.len(),
        });
    }
    for attempt in 0..policy.max_resample {
        let picks: Vec<&(String, Vec<CompareOp>)> = eligible.choose_multiple(rng, n).collect();
        let conditions = picks
            .iter()
            .map(|(attr, ops)| draw_condition(rng, rel, attr, ops))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ok = true;
        for &c in connectives {
            let expr = ConditionExpr::join(c, conditions.clone())?;
            if support(&expr, rel)? < policy.min_support {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(SampledConditions {
                conditions,
                resamples: attempt,
            });
        }
        log::debug!("condition draw {attempt} below support {}", policy.min_support);
    }
    Err(GenError::UnsatisfiableConditions {
        min_support: policy.min_support,
        attempts: policy.max_resample,
    })
}

/// Condition expression for one connective, reproducible from `seed`.
pub fn sample_condition_set(
    rel: &Relation,
    policy: &ConditionPolicy,
    connective: Connective,
    seed: u64,
) -> Result<ConditionExpr, GenError> {
    if !policy.connectives.contains(&connective) {
        return Err(GenError::InvalidPolicy(format!("connective {connective} not allowed")));
    }
    let mut rng = seed::rng(seed::derive(seed, "condition-set", &[policy.n_conditions as u64]));
    sample_conditions(rel, policy, &[connective], &mut rng)?.join(connective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::fixtures::{players, players_extended};
    use crate::relation::{AttributeKind, AttributeSpec};
    use proptest::prelude::*;

    #[test]
    fn forced_equality_draw() {
        let rel = players();
        let c = make_condition(&rel, "Nationality", CompareOp::Eq, "Argentina").unwrap();
        assert_eq!(c.rendered, "nationality is Argentina");
        assert_eq!(c.attr, "Nationality");
    }

    #[test]
    fn forced_threshold_draw() {
        let movie = Dataset::builtin("movie").unwrap().relation;
        let c = make_condition(&movie, "Rating", CompareOp::Gt, "3.0").unwrap();
        assert_eq!(c.rendered, "rating is higher than 3.0");
        assert!(make_condition(&movie, "Title", CompareOp::Gt, "3").is_err());
    }

    #[test]
    fn domain_wording_on_email() {
        let pii = Dataset::builtin("pii").unwrap().relation;
        let c = make_condition(&pii, "Email", CompareOp::Contains, "gmail").unwrap();
        assert!(c.rendered.ends_with("domain is gmail"), "{}", c.rendered);
    }

    #[test]
    fn single_attribute_is_always_chosen() {
        let schema = vec![
            AttributeSpec::key("Name", "name"),
            AttributeSpec::new("Club", AttributeKind::Categorical, "club"),
        ];
        let rel = Relation::from_rows("T", schema, &[vec!["a", "X"], vec!["b", "Y"]]).unwrap();
        for s in 0..20 {
            assert_eq!(sample_condition(&rel, &ConditionPolicy::equality(), s).unwrap().attr, "Club");
        }
    }

    #[test]
    fn forced_pair_accepted() {
        let rel = players();
        let conds = vec![
            make_condition(&rel, "Nationality", CompareOp::Eq, "Argentina").unwrap(),
            make_condition(&rel, "Number", CompareOp::Eq, "10").unwrap(),
        ];
        let expr = ConditionExpr::join(Connective::And, conds).unwrap();
        assert_eq!(oracle::eval_expr(&expr, &rel).unwrap(), vec!["Messi"]);
        assert!(support(&expr, &rel).unwrap() >= ConditionPolicy::equality().min_support);
    }

    #[test]
    fn too_many_conditions_for_schema() {
        let rel = players_extended();
        let policy = ConditionPolicy::equality().with_n(5).with_connectives(&[Connective::Or]);
        let err = sample_condition_set(&rel, &policy, Connective::Or, 1).unwrap_err();
        // F2 has four attributes, one of which is the key.
        assert_eq!(err, GenError::NoEligibleAttribute { needed: 5, available: 3 });
    }

    #[test]
    fn unsatisfiable_reported() {
        let schema = vec![
            AttributeSpec::key("Name", "name"),
            AttributeSpec::new("A", AttributeKind::Categorical, "a"),
            AttributeSpec::new("B", AttributeKind::Categorical, "b"),
        ];
        let rel = Relation::from_rows("T", schema, &[vec!["x", "1", "p"], vec!["y", "2", "q"]]).unwrap();
        let mut rng = seed::rng(3);
        let strict = ConditionPolicy {
            min_support: 3,
            max_resample: 20,
            ..ConditionPolicy::equality()
        };
        assert_eq!(
            sample_conditions(&rel, &strict, &[Connective::Or], &mut rng).unwrap_err(),
            GenError::UnsatisfiableConditions {
                min_support: 3,
                attempts: 20
            }
        );
    }

    #[test]
    fn connective_outside_policy() {
        let rel = players();
        let policy = ConditionPolicy::equality();
        assert!(matches!(
            sample_condition_set(&rel, &policy, Connective::Diff, 0),
            Err(GenError::InvalidPolicy(_))
        ));
    }

    #[test]
    fn invalid_policies() {
        assert!(ConditionPolicy::equality().with_n(0).validate().is_err());
        let p = ConditionPolicy {
            min_support: 0,
            ..ConditionPolicy::equality()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn n_one_is_bare() {
        let rel = Dataset::builtin("soccer").unwrap().relation;
        let policy = ConditionPolicy::equality().with_n(1);
        for s in 0..10 {
            let e = sample_condition_set(&rel, &policy, Connective::And, s).unwrap();
            assert!(matches!(e, ConditionExpr::Atom(_)));
        }
    }

    fn datasets() -> Vec<(Relation, ConditionPolicy)> {
        ["soccer", "movie", "pii"]
            .iter()
            .map(|n| {
                let ds = Dataset::builtin(n).unwrap();
                let ops = ds.default_ops();
                (
                    ds.relation,
                    ConditionPolicy {
                        ops,
                        connectives: vec![Connective::And, Connective::Or, Connective::Diff],
                        ..ConditionPolicy::equality()
                    },
                )
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn emitted_sets_meet_support(seed in any::<u64>(), d in 0usize..3, n in 1usize..=4, c in 0usize..3) {
            let (rel, policy) = &datasets()[d];
            let policy = policy.clone().with_n(n);
            let conn = [Connective::And, Connective::Or, Connective::Diff][c];
            match sample_condition_set(rel, &policy, conn, seed) {
                Ok(e) => {
                    prop_assert!(support(&e, rel).unwrap() >= policy.min_support);
                    let attrs: BTreeSet<_> = e.leaves().iter().map(|(c, _)| c.attr.clone()).collect();
                    prop_assert_eq!(attrs.len(), n);
                    prop_assert_eq!(e.n_conditions(), n);
                    let again = sample_condition_set(rel, &policy, conn, seed).unwrap();
                    prop_assert_eq!(e, again);
                }
                Err(GenError::UnsatisfiableConditions { .. }) => {}
                Err(other) => prop_assert!(false, "{other}"),
            }
        }

        #[test]
        fn soccer_conditions_are_equalities(seed in any::<u64>()) {
            let (rel, policy) = &datasets()[0];
            let c = sample_condition(rel, policy, seed).unwrap();
            prop_assert_eq!(c.op, CompareOp::Eq);
            prop_assert_ne!(c.attr.as_str(), "Name");
        }
    }
}
