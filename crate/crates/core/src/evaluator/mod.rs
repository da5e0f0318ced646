//! Scoring of parsed answers, aggregation and summary reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::{match_entities, normalize_name, ParsedAnswer};
use crate::oracle::{GoldAnswer, REDACTED};
use crate::oracle::Connective;
use crate::relation::{normalize, Relation};
use crate::requestgen::{RequestInstance, RequestType};
use crate::structurer::{Portion, StructuringLevel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Set F1. Empty gold with empty prediction scores (1, 1, 1); empty gold
/// with a non-empty prediction scores (0, 1, 0).
pub fn f1<T: Ord>(gold: &BTreeSet<T>, pred: &BTreeSet<T>) -> Prf {
    if gold.is_empty() {
        return if pred.is_empty() {
            Prf { precision: 1.0, recall: 1.0, f1: 1.0 }
        } else {
            Prf { precision: 0.0, recall: 1.0, f1: 0.0 }
        };
    }
    let tp = gold.intersection(pred).count() as f64;
    let fp = pred.difference(gold).count() as f64;
    let fn_ = gold.difference(pred).count() as f64;
    let ratio = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Prf {
        precision,
        recall,
        f1: ratio(2.0 * precision * recall, precision + recall),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    F1,
    Accuracy,
    AbsDiff,
}

impl MetricKind {
    pub fn of(ty: RequestType) -> Self {
        match ty {
            RequestType::Retrieval | RequestType::Deletion | RequestType::Update | RequestType::Projection => {
                MetricKind::F1
            }
            RequestType::Superlative | RequestType::Sum | RequestType::Existence => MetricKind::Accuracy,
            RequestType::Count => MetricKind::AbsDiff,
        }
    }

    pub fn perfect(self) -> f64 {
        match self {
            MetricKind::AbsDiff => 0.0,
            _ => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::F1 => "f1",
            MetricKind::Accuracy => "accuracy",
            MetricKind::AbsDiff => "abs_diff",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub unparsed: bool,
    pub dropped_names: usize,
    pub substring_matches: usize,
    pub resamples: usize,
    /// Update: non-target cells that differ from gold in matched rows.
    pub collateral: usize,
    /// The model call itself failed.
    pub errored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub model: String,
    pub dataset: String,
    pub request_type: RequestType,
    pub level: StructuringLevel,
    pub template_id: usize,
    pub connective: Connective,
    pub n_conditions: usize,
    pub portion: Option<Portion>,
    pub negated: bool,
    pub metric: MetricKind,
    pub value: f64,
    /// Existence only: witness-name heuristic for the rationale.
    pub rationale: Option<f64>,
    pub diagnostics: Diagnostics,
}

fn names_set(names: &[String], rel: &Relation, diag: &mut Diagnostics) -> BTreeSet<String> {
    let m = match_entities(names, rel);
    diag.dropped_names += m.dropped;
    diag.substring_matches += m.substring;
    m.keys
}

fn key_column(snapshot: &Relation, rel: &Relation) -> usize {
    snapshot
        .attr_index_ci(&rel.key_attr().name)
        .unwrap_or(snapshot.key_index())
}

fn snapshot_keys(snapshot: &Relation, rel: &Relation, diag: &mut Diagnostics) -> BTreeSet<String> {
    let col = key_column(snapshot, rel);
    let names: Vec<String> = snapshot.rows().iter().map(|r| r.get(col).text().to_string()).collect();
    names_set(&names, rel, diag)
}

fn gold_keys(gold: &GoldAnswer) -> BTreeSet<String> {
    match gold {
        GoldAnswer::EntitySet { keys, .. } => keys.iter().cloned().collect(),
        GoldAnswer::RelationSnapshot { relation } => relation.keys().map(str::to_string).collect(),
        GoldAnswer::Witnessed { witnesses, .. } => witnesses.iter().cloned().collect(),
        _ => BTreeSet::new(),
    }
}

fn is_redacted(s: &str) -> bool {
    normalize_name(s) == normalize(REDACTED)
}

/// Target-cell F1 for Update plus a count of changed non-target cells.
fn score_update(
    inst: &RequestInstance,
    gold: &Relation,
    snapshot: &Relation,
    rel: &Relation,
    diag: &mut Diagnostics,
) -> f64 {
    let target = &inst.target[0];
    let gcol = gold.attr_index(target).expect("gold snapshot has the target");
    let gold_set: BTreeSet<String> = gold
        .rows()
        .iter()
        .filter(|r| is_redacted(r.get(gcol).text()))
        .map(|r| gold.key_of(r).to_string())
        .collect();
    let kcol = key_column(snapshot, rel);
    let tcol = snapshot.attr_index_ci(target);
    let mut pred_set = BTreeSet::new();
    for row in snapshot.rows() {
        let m = match_entities(&[row.get(kcol).text()], rel);
        diag.dropped_names += m.dropped;
        diag.substring_matches += m.substring;
        let Some(key) = m.keys.into_iter().next() else { continue };
        if tcol.is_some_and(|c| is_redacted(row.get(c).text())) {
            pred_set.insert(key.clone());
        }
        let Some(grow) = gold.find_key(&key) else { continue };
        for (j, spec) in gold.schema().iter().enumerate() {
            if j == gcol || j == gold.key_index() {
                continue;
            }
            let same = snapshot
                .attr_index_ci(&spec.name)
                .is_some_and(|c| normalize_name(row.get(c).text()) == normalize_name(grow.get(j).text()));
            if !same {
                diag.collateral += 1;
            }
        }
    }
    f1(&gold_set, &pred_set).f1
}

/// Rationale heuristic: when a witness exists every witness must be named;
/// otherwise no entity of the relation may be named.
pub fn rationale_accuracy(gold: &GoldAnswer, rationale: &str, rel: &Relation) -> f64 {
    let text = normalize(rationale);
    let named = |k: &str| text.contains(&normalize(k));
    let ok = match gold {
        GoldAnswer::Witnessed { exists: true, witnesses, .. } => witnesses.iter().all(|w| named(w)),
        GoldAnswer::Witnessed { witnesses, .. } => {
            let w: BTreeSet<&str> = witnesses.iter().map(String::as_str).collect();
            !rel.keys().any(|k| !w.contains(k) && named(k))
        }
        _ => false,
    };
    f64::from(u8::from(ok))
}

fn numbers_match(gold: f64, got: f64, integral: bool) -> bool {
    if integral {
        gold == got
    } else {
        (gold - got).abs() <= 1e-6 * gold.abs().max(1.0)
    }
}

/// Scores one parsed reply against the instance's gold answer. `rel` is the
/// relation the suite was generated from.
/// A row naming each projected attribute by name, phrase or paraphrase.
fn is_header(row: &[String], attrs: &[String], rel: &Relation) -> bool {
    row.len() == attrs.len()
        && row.iter().zip(attrs).all(|(cell, attr)| {
            normalize_name(attr) == *cell
                || rel.attribute(attr).is_ok_and(|a| {
                    normalize_name(&a.canonical_phrase) == *cell || a.paraphrases.iter().any(|p| normalize_name(p) == *cell)
                })
        })
}

pub fn score(inst: &RequestInstance, parsed: &ParsedAnswer, rel: &Relation, model: &str) -> EvalRecord {
    let metric = MetricKind::of(inst.request_type);
    let mut diag = Diagnostics {
        unparsed: parsed.is_unparseable(),
        resamples: inst.resamples,
        ..Diagnostics::default()
    };
    let mut rationale = None;
    let value = match (inst.request_type, &inst.gold, parsed) {
        (RequestType::Retrieval, gold, ParsedAnswer::EntityList { names }) => {
            f1(&gold_keys(gold), &names_set(names, rel, &mut diag)).f1
        }
        (RequestType::Deletion, gold, ParsedAnswer::TableSnapshot { relation }) => {
            f1(&gold_keys(gold), &snapshot_keys(relation, rel, &mut diag)).f1
        }
        (RequestType::Deletion, gold, ParsedAnswer::EntityList { names }) => {
            f1(&gold_keys(gold), &names_set(names, rel, &mut diag)).f1
        }
        (RequestType::Update, GoldAnswer::RelationSnapshot { relation: g }, ParsedAnswer::TableSnapshot { relation }) => {
            score_update(inst, g, relation, rel, &mut diag)
        }
        (RequestType::Superlative, gold, ParsedAnswer::EntityList { names }) => {
            let got = names_set(names, rel, &mut diag);
            f64::from(u8::from(got == gold_keys(gold) && got.len() <= 1))
        }
        (RequestType::Sum, GoldAnswer::Number { value: g }, ParsedAnswer::Number { value }) => {
            let integral = rel
                .attr_index(&inst.target[0])
                .map(|c| rel.rows().iter().all(|r| r.get(c).number().is_none_or(|v| v.fract() == 0.0)))
                .unwrap_or(false);
            f64::from(u8::from(numbers_match(*g, *value, integral)))
        }
        (RequestType::Count, GoldAnswer::Number { value: g }, ParsedAnswer::Number { value }) => (g - value).abs(),
        (RequestType::Count, GoldAnswer::Number { value: g }, _) => {
            diag.unparsed = true;
            g.abs()
        }
        (RequestType::Existence, gold, ParsedAnswer::Judgement { yes, rationale: text }) => {
            rationale = Some(rationale_accuracy(gold, text, rel));
            f64::from(u8::from(gold.expected_judgement() == Some(*yes)))
        }
        (RequestType::Existence, _, _) => {
            rationale = Some(0.0);
            0.0
        }
        (RequestType::Projection, GoldAnswer::TupleSet { attrs, tuples }, ParsedAnswer::TupleList { tuples: got }) => {
            let norm = |t: &Vec<String>| t.iter().map(|c| normalize_name(c)).collect::<Vec<_>>();
            let gold: BTreeSet<Vec<String>> = tuples.iter().map(norm).collect();
            let pred: BTreeSet<Vec<String>> = got
                .iter()
                .map(norm)
                .filter(|t| gold.contains(t) || !is_header(t, attrs, rel))
                .collect();
            f1(&gold, &pred).f1
        }
        _ => {
            diag.unparsed = true;
            0.0
        }
    };
    EvalRecord {
        id: inst.id.clone(),
        model: model.to_string(),
        dataset: inst.dataset.clone(),
        request_type: inst.request_type,
        level: inst.level,
        template_id: inst.template_id,
        connective: inst.connective,
        n_conditions: inst.n_conditions,
        portion: inst.portion,
        negated: inst.negated,
        metric,
        value,
        rationale,
        diagnostics: diag,
    }
}

/// Record for an instance whose model call failed: zero credit, or |gold|
/// for Count.
pub fn score_error(inst: &RequestInstance, rel: &Relation, model: &str) -> EvalRecord {
    let unparseable = ParsedAnswer::Unparseable {
        reason: "model call failed".into(),
    };
    let mut r = score(inst, &unparseable, rel, model);
    r.diagnostics.errored = true;
    r
}

/// Grouping keys of a report row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub model: String,
    pub request_type: RequestType,
    pub level: StructuringLevel,
    pub portion: Option<Portion>,
    pub connective: Option<Connective>,
    pub n_conditions: Option<usize>,
    pub negated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Grouping {
    pub by_connective: bool,
    pub by_n_conditions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub key: GroupKey,
    pub metric: MetricKind,
    pub mean: f64,
    /// Population variance of the per-template means.
    pub variance: f64,
    pub count: usize,
    pub templates: usize,
    /// Fewer than three templates contributed.
    pub partial_coverage: bool,
    pub rationale_mean: Option<f64>,
}

fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Groups records and reports means and template variance. Row order follows
/// the grouping key, so it does not depend on record order.
pub fn aggregate(records: &[EvalRecord], grouping: Grouping) -> Vec<ReportRow> {
    let mut groups: BTreeMap<GroupKey, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        let key = GroupKey {
            model: r.model.clone(),
            request_type: r.request_type,
            level: r.level,
            portion: r.portion,
            connective: grouping.by_connective.then_some(r.connective),
            n_conditions: grouping.by_n_conditions.then_some(r.n_conditions),
            negated: r.negated,
        };
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(key, rs)| {
            // Sort values before summing so the float result is order-free.
            let mut values: Vec<f64> = rs.iter().map(|r| r.value).collect();
            values.sort_by(f64::total_cmp);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let mut per_template: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for r in &rs {
                per_template.entry(r.template_id).or_default().push(r.value);
            }
            let template_means: Vec<f64> = per_template
                .values_mut()
                .map(|v| {
                    v.sort_by(f64::total_cmp);
                    v.iter().sum::<f64>() / v.len() as f64
                })
                .collect();
            let mut rationale: Vec<f64> = rs.iter().filter_map(|r| r.rationale).collect();
            rationale.sort_by(f64::total_cmp);
            let templates = template_means.len();
            if templates < 3 {
                log::warn!("{} {} {}: only {templates} template(s) present", key.model, key.request_type, key.level);
            }
            ReportRow {
                metric: rs[0].metric,
                mean,
                variance: population_variance(&template_means),
                count: rs.len(),
                templates,
                partial_coverage: templates < 3,
                rationale_mean: (!rationale.is_empty()).then(|| rationale.iter().sum::<f64>() / rationale.len() as f64),
                key,
            }
        })
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("rows are not aligned: {0}")]
    Unaligned(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// One aligned (model, request type) score under two data formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatScore {
    pub model: String,
    pub request_type: RequestType,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub model: String,
    pub request_type: RequestType,
    pub text: f64,
    pub table: f64,
    /// Table minus text, sign-flipped for Count so positive means better.
    pub improvement: f64,
    /// Improvement relative to the text value; `None` when text is zero.
    pub relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementSummary {
    pub cells: Vec<CellComparison>,
    /// Mean improvement over score-typed cells, in the input's units.
    pub mean_improvement: f64,
    /// Mean of per-cell relative changes over score-typed cells.
    pub mean_relative_per_cell: Option<f64>,
    /// Relative change of the mean table score over the mean text score.
    pub relative_of_means: Option<f64>,
    /// Mean improvement over Count cells (reduction of absolute difference).
    pub count_improvement: Option<f64>,
    pub count_relative: Option<f64>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.into_iter().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Compares text-format and table-format scores cell by cell. Both slices
/// must cover exactly the same (model, request type) cells.
pub fn compare_formats(text: &[FormatScore], table: &[FormatScore]) -> Result<ImprovementSummary, ReportError> {
    let index = |rows: &[FormatScore]| -> Result<BTreeMap<(String, RequestType), f64>, ReportError> {
        let mut m = BTreeMap::new();
        for r in rows {
            if m.insert((r.model.clone(), r.request_type), r.value).is_some() {
                return Err(ReportError::Unaligned(format!("duplicate cell {} {}", r.model, r.request_type)));
            }
        }
        Ok(m)
    };
    let t = index(text)?;
    let s = index(table)?;
    if t.keys().ne(s.keys()) {
        let missing: Vec<String> = t
            .keys()
            .filter(|k| !s.contains_key(*k))
            .chain(s.keys().filter(|k| !t.contains_key(*k)))
            .map(|(m, ty)| format!("{m}/{ty}"))
            .collect();
        return Err(ReportError::Unaligned(missing.join(", ")));
    }
    let cells: Vec<CellComparison> = t
        .iter()
        .map(|((model, ty), &tv)| {
            let sv = s[&(model.clone(), *ty)];
            let improvement = if *ty == RequestType::Count { tv - sv } else { sv - tv };
            CellComparison {
                model: model.clone(),
                request_type: *ty,
                text: tv,
                table: sv,
                improvement,
                relative: (tv != 0.0).then(|| improvement / tv.abs()),
            }
        })
        .collect();
    let scored = || cells.iter().filter(|c| c.request_type != RequestType::Count);
    let counts = || cells.iter().filter(|c| c.request_type == RequestType::Count);
    let mean_text = mean(scored().map(|c| c.text));
    let mean_table = mean(scored().map(|c| c.table));
    Ok(ImprovementSummary {
        mean_improvement: mean(scored().map(|c| c.improvement)).unwrap_or(0.0),
        mean_relative_per_cell: mean(scored().filter_map(|c| c.relative)),
        relative_of_means: match (mean_text, mean_table) {
            (Some(a), Some(b)) if a != 0.0 => Some((b - a) / a),
            _ => None,
        },
        count_improvement: mean(counts().map(|c| c.improvement)),
        count_relative: mean(counts().filter_map(|c| c.relative)),
        cells,
    })
}

/// Reads `model,request_type,level,value` rows and splits them into text
/// (natural level) and table scores.
pub fn read_format_scores(r: impl std::io::Read) -> Result<(Vec<FormatScore>, Vec<FormatScore>), ReportError> {
    #[derive(Deserialize)]
    struct Row {
        model: String,
        request_type: String,
        level: String,
        value: f64,
    }
    let mut text = Vec::new();
    let mut table = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize::<Row>() {
        let row = row.map_err(|e| ReportError::Csv(e.to_string()))?;
        let ty = row.request_type.parse().map_err(ReportError::Csv)?;
        let level: StructuringLevel = row.level.parse().map_err(|e: String| ReportError::Csv(e))?;
        let score = FormatScore {
            model: row.model,
            request_type: ty,
            value: row.value,
        };
        match level {
            StructuringLevel::Table => table.push(score),
            StructuringLevel::Natural => text.push(score),
            other => return Err(ReportError::Csv(format!("level {other} is neither text nor table"))),
        }
    }
    Ok((text, table))
}

/// Per-level mean scores of `rows` as format scores, for [`compare_formats`].
pub fn format_scores(rows: &[ReportRow], level: StructuringLevel) -> Vec<FormatScore> {
    let mut acc: BTreeMap<(String, RequestType), Vec<(f64, usize)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.key.level == level && r.key.portion.is_none()) {
        acc.entry((r.key.model.clone(), r.key.request_type))
            .or_default()
            .push((r.mean, r.count));
    }
    acc.into_iter()
        .map(|((model, request_type), parts)| {
            let n: usize = parts.iter().map(|p| p.1).sum();
            FormatScore {
                model,
                request_type,
                value: parts.iter().map(|(m, c)| m * *c as f64).sum::<f64>() / n as f64,
            }
        })
        .collect()
}

/// Existence accuracy under the original and the negated template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceDelta {
    pub model: String,
    pub original: f64,
    pub negated: f64,
    pub original_n: usize,
    pub negated_n: usize,
}

impl ExistenceDelta {
    pub fn delta(&self) -> f64 {
        (self.original - self.negated).abs()
    }

    /// "0.53 (0.18)": negated accuracy with the gap to the original.
    pub fn cell(&self) -> String {
        format!("{:.2} ({:.2})", self.negated, self.delta())
    }
}

/// Per-model existence accuracy split by polarity. Models lacking either
/// polarity are left out.
pub fn existence_deltas(records: &[EvalRecord]) -> Vec<ExistenceDelta> {
    let mut acc: BTreeMap<&str, [(f64, usize); 2]> = BTreeMap::new();
    for r in records.iter().filter(|r| r.request_type == RequestType::Existence) {
        let slot = &mut acc.entry(&r.model).or_default()[usize::from(r.negated)];
        slot.0 += r.value;
        slot.1 += 1;
    }
    acc.into_iter()
        .filter(|(_, s)| s[0].1 > 0 && s[1].1 > 0)
        .map(|(model, s)| ExistenceDelta {
            model: model.to_string(),
            original: s[0].0 / s[0].1 as f64,
            negated: s[1].0 / s[1].1 as f64,
            original_n: s[0].1,
            negated_n: s[1].1,
        })
        .collect()
}

pub fn existence_markdown(deltas: &[ExistenceDelta]) -> String {
    let mut out = String::from("| Model | Original | Negated (gap) |\n|---|---|---|\n");
    for d in deltas {
        let _ = writeln!(out, "| {} | {:.2} | {} |", d.model, d.original, d.cell());
    }
    out
}

fn fmt_value(metric: MetricKind, v: f64) -> String {
    match metric {
        MetricKind::AbsDiff => format!("{v:.2}"),
        _ => format!("{:.1}", v * 100.0),
    }
}

/// Markdown table with request type × level rows, one column per model and
/// a trailing `Avg.` column. Scores are shown as percentages, Count as the
/// mean absolute difference.
pub fn markdown_report(rows: &[ReportRow]) -> String {
    let models: BTreeSet<&str> = rows.iter().map(|r| r.key.model.as_str()).collect();
    type Row = (RequestType, bool, StructuringLevel, Option<Portion>);
    let mut cells: BTreeMap<Row, BTreeMap<&str, (f64, usize, MetricKind)>> = BTreeMap::new();
    for r in rows {
        let e = cells
            .entry((r.key.request_type, r.key.negated, r.key.level, r.key.portion))
            .or_default()
            .entry(&r.key.model)
            .or_insert((0.0, 0, r.metric));
        e.0 += r.mean * r.count as f64;
        e.1 += r.count;
    }
    let mut out = String::new();
    let header: Vec<&str> = models.iter().copied().collect();
    let _ = writeln!(out, "| Request | Data | {} | Avg. |", header.join(" | "));
    let _ = writeln!(out, "|---|---|{}---|", "---|".repeat(header.len()));
    for ((ty, negated, level, portion), by_model) in &cells {
        let name = request_label(*ty, *negated);
        let data = data_label(*level, *portion);
        let mut vals = Vec::new();
        let mut line = format!("| {name} | {data} |");
        let mut metric = MetricKind::F1;
        for m in &header {
            match by_model.get(m) {
                Some(&(sum, n, k)) => {
                    let v = sum / n as f64;
                    metric = k;
                    vals.push(v);
                    let _ = write!(line, " {} |", fmt_value(k, v));
                }
                None => line.push_str(" - |"),
            }
        }
        let avg = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        let _ = writeln!(line, " {} |", fmt_value(metric, avg));
        out.push_str(&line);
    }
    out
}

/// Markdown of per-cell template variance.
fn request_label(ty: RequestType, negated: bool) -> String {
    if negated {
        format!("{ty} (negated)")
    } else {
        ty.to_string()
    }
}

fn data_label(level: StructuringLevel, portion: Option<Portion>) -> String {
    match portion {
        Some(p) => format!("table portion {}", p.as_str()),
        None => level.as_str().to_string(),
    }
}

pub fn variance_markdown(rows: &[ReportRow]) -> String {
    let mut out = String::from("| Model | Request | Data | Mean | Variance | Templates |\n|---|---|---|---|---|---|\n");
    for r in rows {
        let flag = if r.partial_coverage { " (partial)" } else { "" };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {:.4} | {:.6} | {}{} |",
            r.key.model,
            request_label(r.key.request_type, r.key.negated),
            data_label(r.key.level, r.key.portion),
            r.mean,
            r.variance,
            r.templates,
            flag
        );
    }
    out
}

pub fn improvement_markdown(s: &ImprovementSummary) -> String {
    let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.2}%", v * 100.0));
    let mut out = String::from("| Model | Request | Text | Table | Improvement | Relative |\n|---|---|---|---|---|---|\n");
    for c in &s.cells {
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} | {:+.2} | {} |",
            c.model,
            c.request_type,
            c.text,
            c.table,
            c.improvement,
            pct(c.relative)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "mean improvement (score-typed): {:.2}", s.mean_improvement);
    let _ = writeln!(out, "relative, mean of per-cell changes: {}", pct(s.mean_relative_per_cell));
    let _ = writeln!(out, "relative, change of mean scores: {}", pct(s.relative_of_means));
    let _ = writeln!(
        out,
        "note: a relative figure depends on the averaging convention; quote it with the convention used"
    );
    if let Some(c) = s.count_improvement {
        let _ = writeln!(out, "count abs-diff reduction: {:.2} ({})", c, pct(s.count_relative));
    }
    out
}

pub fn records_csv(records: &[EvalRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "id",
        "model",
        "dataset",
        "request_type",
        "level",
        "portion",
        "template_id",
        "connective",
        "n_conditions",
        "negated",
        "metric",
        "value",
        "rationale",
        "unparsed",
        "errored",
        "dropped_names",
        "substring_matches",
        "collateral",
        "resamples",
    ])
    .expect("in-memory csv");
    for r in records {
        let d = &r.diagnostics;
        w.write_record([
            r.id.clone(),
            r.model.clone(),
            r.dataset.clone(),
            r.request_type.to_string(),
            r.level.to_string(),
            r.portion.map_or(String::new(), |p| p.as_str().to_string()),
            r.template_id.to_string(),
            r.connective.to_string(),
            r.n_conditions.to_string(),
            r.negated.to_string(),
            r.metric.as_str().to_string(),
            r.value.to_string(),
            r.rationale.map_or(String::new(), |v| v.to_string()),
            d.unparsed.to_string(),
            d.errored.to_string(),
            d.dropped_names.to_string(),
            d.substring_matches.to_string(),
            d.collateral.to_string(),
            d.resamples.to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "model",
        "request_type",
        "level",
        "portion",
        "connective",
        "n_conditions",
        "negated",
        "metric",
        "mean",
        "variance",
        "count",
        "templates",
        "rationale_mean",
    ])
    .expect("in-memory csv");
    for r in rows {
        let k = &r.key;
        w.write_record([
            k.model.clone(),
            k.request_type.to_string(),
            k.level.to_string(),
            k.portion.map_or(String::new(), |p| p.as_str().to_string()),
            k.connective.map_or(String::new(), |c| c.to_string()),
            k.n_conditions.map_or(String::new(), |n| n.to_string()),
            k.negated.to_string(),
            r.metric.as_str().to_string(),
            r.mean.to_string(),
            r.variance.to_string(),
            r.count.to_string(),
            r.templates.to_string(),
            r.rationale_mean.map_or(String::new(), |v| v.to_string()),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

#[cfg(test)]
mod tests;
