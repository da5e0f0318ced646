use super::*;
use crate::answer::{format_gold, parse};
use crate::condgen::make_condition;
use crate::dataset::Dataset;
use crate::fixtures::{players_bank, PLAYERS_CSV};
use crate::oracle::{CompareOp, ConditionExpr};
use crate::requestgen::{generate_suite, instantiate, InstanceSpec, SuiteConfig};
use proptest::prelude::*;

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn f1_examples() {
    let p = f1(&set(&["A", "B", "C"]), &set(&["A", "B", "D"]));
    assert!(close(p.precision, 2.0 / 3.0) && close(p.recall, 2.0 / 3.0) && close(p.f1, 2.0 / 3.0));
    let p = f1(&set(&["A", "B"]), &set(&["A", "B"]));
    assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
    let p = f1(&set(&["A"]), &set(&[]));
    assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
    let p = f1(&set(&[]), &set(&[]));
    assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
    let p = f1(&set(&[]), &set(&["A"]));
    assert_eq!((p.precision, p.recall, p.f1), (0.0, 1.0, 0.0));
}

fn soccer_suite(types: &[RequestType]) -> (Dataset, Vec<RequestInstance>) {
    let ds = Dataset::builtin("soccer").unwrap();
    let cfg = SuiteConfig {
        seed: 9,
        pairs: 3,
        request_types: types.to_vec(),
        connectives: vec![Connective::And, Connective::Or, Connective::Diff],
        ..SuiteConfig::default()
    };
    let suite = generate_suite(&ds, &cfg).unwrap();
    (ds, suite)
}

#[test]
fn perfect_replies_score_perfectly() {
    let (ds, suite) = soccer_suite(&RequestType::ALL);
    for inst in &suite {
        let parsed = parse(&format_gold(&inst.gold), inst.request_type);
        let r = score(inst, &parsed, &ds.relation, "perfect");
        assert_eq!(r.value, r.metric.perfect(), "{} {:?}", inst.id, parsed);
        assert!(!r.diagnostics.unparsed);
        assert_eq!(r.diagnostics.collateral, 0);
        if inst.request_type == RequestType::Existence {
            assert_eq!(r.rationale, Some(1.0));
        }
    }
}

fn de_bruyne_dataset() -> Dataset {
    let csv = format!("{PLAYERS_CSV}\nKevin De Bruyne,17,Belgium,ManCity");
    let rel = crate::relation::load_csv(csv.as_bytes(), "Soccer", &crate::fixtures::players_schema())
        .unwrap()
        .relation;
    Dataset {
        relation: rel,
        bank: players_bank(),
        pack: Dataset::builtin("soccer").unwrap().pack,
    }
}

#[test]
fn judgement_wrong_rationale_right() {
    let ds = de_bruyne_dataset();
    let conds = vec![
        make_condition(&ds.relation, "Nationality", CompareOp::Eq, "Belgium").unwrap(),
        make_condition(&ds.relation, "Club", CompareOp::Eq, "ManCity").unwrap(),
        make_condition(&ds.relation, "Number", CompareOp::Eq, "17").unwrap(),
    ];
    let expr = ConditionExpr::join(Connective::And, conds).unwrap();
    let spec = InstanceSpec::new(RequestType::Existence, 0, expr, Connective::And).negated(true);
    let inst = instantiate(&ds, &spec, 0).unwrap();
    let reply = "Yes, it is true. According to the table, the player from Belgium playing for ManCity is \
                 Kevin De Bruyne and his uniform number is 17.";
    let r = score(&inst, &parse(reply, RequestType::Existence), &ds.relation, "m");
    assert_eq!(r.value, 0.0);
    assert_eq!(r.rationale, Some(1.0));
}

#[test]
fn rationale_when_nothing_exists() {
    let ds = de_bruyne_dataset();
    let gold = GoldAnswer::Witnessed {
        exists: false,
        negated: false,
        witnesses: vec![],
    };
    assert_eq!(rationale_accuracy(&gold, "No, none at all.", &ds.relation), 1.0);
    assert_eq!(rationale_accuracy(&gold, "No, only Messi comes close.", &ds.relation), 0.0);
}

#[test]
fn count_differences() {
    let (ds, suite) = soccer_suite(&[RequestType::Count]);
    let mut inst = suite[0].clone();
    inst.gold = GoldAnswer::Number { value: 5.0 };
    let r = score(&inst, &parse("ANSWER:\n3", RequestType::Count), &ds.relation, "m");
    assert_eq!(r.value, 2.0);
    let r = score(&inst, &parse("I cannot say.", RequestType::Count), &ds.relation, "m");
    assert_eq!(r.value, 5.0);
    assert!(r.diagnostics.unparsed);
}

#[test]
fn update_partial_credit_and_collateral() {
    let (ds, suite) = soccer_suite(&[RequestType::Update]);
    let inst = suite
        .iter()
        .find(|i| matches!(&i.gold, GoldAnswer::RelationSnapshot { relation } if relation.rows().iter().filter(|r| r.get(1).text() == "N/A").count() >= 2))
        .expect("an update touching two rows");
    let GoldAnswer::RelationSnapshot { relation: gold } = &inst.gold else { unreachable!() };
    let mut rows: Vec<Vec<String>> = gold
        .rows()
        .iter()
        .map(|r| r.cells().iter().map(|c| c.text().to_string()).collect())
        .collect();
    // Undo one redaction and damage an unrelated cell.
    let first = rows.iter().position(|r| r[1] == "N/A").unwrap();
    rows[first][1] = "99".into();
    let other = rows.iter().position(|r| r[1] != "N/A").unwrap();
    rows[other][2] = "Atlantis".into();
    let header: Vec<String> = gold.schema().iter().map(|a| a.name.clone()).collect();
    let reply = format!("ANSWER:\n{}", crate::structurer::pipe_table(&header, &rows));
    let r = score(inst, &parse(&reply, RequestType::Update), &ds.relation, "m");
    let n = rows.iter().filter(|r| r[1] == "N/A").count() as f64;
    // precision 1, recall n/(n+1)
    let recall = n / (n + 1.0);
    assert!(close(r.value, 2.0 * recall / (1.0 + recall)));
    assert_eq!(r.diagnostics.collateral, 1);
}

#[test]
fn superlative_needs_singleton() {
    let (ds, suite) = soccer_suite(&[RequestType::Superlative]);
    let inst = &suite[0];
    let GoldAnswer::EntitySet { keys, .. } = &inst.gold else { panic!() };
    let other = ds.relation.keys().find(|k| *k != keys[0]).unwrap();
    let reply = format!("ANSWER:\n{}\n{}", keys[0], other);
    assert_eq!(score(inst, &parse(&reply, RequestType::Superlative), &ds.relation, "m").value, 0.0);
}

fn record(model: &str, template: usize, value: f64) -> EvalRecord {
    EvalRecord {
        id: format!("{model}-{template}-{value}"),
        model: model.into(),
        dataset: "Soccer".into(),
        request_type: RequestType::Retrieval,
        level: StructuringLevel::Table,
        template_id: template,
        connective: Connective::And,
        n_conditions: 2,
        portion: None,
        negated: false,
        metric: MetricKind::F1,
        value,
        rationale: None,
        diagnostics: Diagnostics::default(),
    }
}

#[test]
fn aggregate_examples() {
    let rows = aggregate(&[record("m", 0, 0.5), record("m", 1, 0.5), record("m", 2, 0.5)], Grouping::default());
    assert_eq!(rows.len(), 1);
    assert!(close(rows[0].mean, 0.5) && rows[0].variance == 0.0);
    let rows = aggregate(&[record("m", 0, 0.2), record("m", 1, 0.4), record("m", 2, 0.6)], Grouping::default());
    assert!(close(rows[0].mean, 0.4));
    // ((0.2)^2 + 0 + (0.2)^2) / 3
    assert!(close(rows[0].variance, 0.08 / 3.0));
    assert!(aggregate(&[], Grouping::default()).is_empty());
    let rows = aggregate(&[record("m", 0, 0.2), record("m", 2, 0.6)], Grouping::default());
    assert!(rows[0].partial_coverage);
    assert!(close(rows[0].variance, 0.04));
}

fn averages() -> (Vec<FormatScore>, Vec<FormatScore>) {
    read_format_scores(include_str!("../../data/format_averages.csv").as_bytes()).unwrap()
}

#[test]
fn headline_improvement() {
    let (text, table) = averages();
    let s = compare_formats(&text, &table).unwrap();
    let pp = [62.1 - 55.5, 39.0 - 33.3, 20.5 - 8.5, 26.0 - 24.8, 13.3 - 12.1];
    assert!(close(s.mean_improvement, pp.iter().sum::<f64>() / 5.0));
    assert!((s.mean_improvement - 5.34).abs() < 1e-9);
    assert!((s.count_improvement.unwrap() - 0.90).abs() < 1e-9);
    assert!((s.count_relative.unwrap() - 0.90 / 6.42).abs() < 1e-9);
    assert_eq!(format!("{:.1}", s.count_relative.unwrap() * 100.0), "14.0");
}

#[test]
fn identical_formats_give_zero() {
    let (text, _) = averages();
    let s = compare_formats(&text, &text).unwrap();
    assert_eq!(s.mean_improvement, 0.0);
    assert!(s.cells.iter().all(|c| c.improvement == 0.0 && c.relative == Some(0.0)));
}

#[test]
fn misaligned_formats() {
    let (text, mut table) = averages();
    table.pop();
    assert!(matches!(compare_formats(&text, &table), Err(ReportError::Unaligned(_))));
}

#[test]
fn existence_delta_format() {
    let d = ExistenceDelta {
        model: "m".into(),
        original: 0.71,
        negated: 0.53,
        original_n: 1,
        negated_n: 1,
    };
    assert_eq!(d.cell(), "0.53 (0.18)");
}

#[test]
fn markdown_has_avg_column() {
    let rows = aggregate(&[record("a", 0, 1.0), record("b", 0, 0.5)], Grouping::default());
    let md = markdown_report(&rows);
    assert!(md.starts_with("| Request | Data | a | b | Avg. |"));
    assert!(md.contains("| retrieval | table | 100.0 | 50.0 | 75.0 |"), "{md}");
}

proptest! {
    #[test]
    fn f1_symmetry_and_range(g in proptest::collection::btree_set(0u8..20, 0..10), p in proptest::collection::btree_set(0u8..20, 0..10)) {
        let a = f1(&g, &p);
        let b = f1(&p, &g);
        if !g.is_empty() && !p.is_empty() {
            prop_assert!(close(a.precision, b.recall));
        }
        for v in [a.precision, a.recall, a.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn aggregate_order_free(values in proptest::collection::vec((0usize..3, 0.0f64..1.0), 1..30), seed in any::<u64>()) {
        let records: Vec<EvalRecord> = values.iter().map(|&(t, v)| record("m", t, v)).collect();
        let mut shuffled = records.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut crate::seed::rng(seed));
        prop_assert_eq!(aggregate(&records, Grouping::default()), aggregate(&shuffled, Grouping::default()));
    }
}

#[test]
fn projection_header_forms() {
    let (ds, suite) = soccer_suite(&[RequestType::Projection]);
    let inst = &suite[0];
    let GoldAnswer::TupleSet { attrs, tuples } = &inst.gold else { panic!() };
    let phrases: Vec<String> = attrs
        .iter()
        .map(|a| ds.relation.attribute(a).unwrap().canonical_phrase.clone())
        .collect();
    let bare: Vec<String> = tuples.iter().map(|t| format!("| {} |", t.join(" | "))).collect();
    for header in [Some(attrs.clone()), Some(phrases), None] {
        let mut lines: Vec<String> = header.iter().map(|h| format!("| {} |", h.join(" | "))).collect();
        lines.extend(bare.iter().cloned());
        let reply = format!("ANSWER:\n{}", lines.join("\n"));
        let r = score(inst, &parse(&reply, RequestType::Projection), &ds.relation, "m");
        assert_eq!(r.value, 1.0, "{reply}");
    }
}
