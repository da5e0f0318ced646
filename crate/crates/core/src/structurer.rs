//! Renders relations as text at four structuring levels and parses pipe
//! tables back into relations.
//!
//! | level          | fixed order | fixed wording | tabular |
//! |----------------|-------------|---------------|---------|
//! | Natural        | no          | no            | no      |
//! | OrderFixed     | yes         | no            | no      |
//! | TemplateBased  | yes         | yes           | no      |
//! | Table          | yes         | yes           | yes     |
//!
//! Every level carries each cell value verbatim, so the renderings differ in
//! form only.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relation::{normalize, AttributeKind, AttributeSpec, Relation, Tuple};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuringLevel {
    Natural,
    OrderFixed,
    TemplateBased,
    Table,
}

impl StructuringLevel {
    pub const ALL: [StructuringLevel; 4] = [
        StructuringLevel::Natural,
        StructuringLevel::OrderFixed,
        StructuringLevel::TemplateBased,
        StructuringLevel::Table,
    ];

    /// (fixed order, fixed expression, tabular format)
    pub fn flags(self) -> (bool, bool, bool) {
        match self {
            StructuringLevel::Natural => (false, false, false),
            StructuringLevel::OrderFixed => (true, false, false),
            StructuringLevel::TemplateBased => (true, true, false),
            StructuringLevel::Table => (true, true, true),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StructuringLevel::Natural => "natural",
            StructuringLevel::OrderFixed => "order_fixed",
            StructuringLevel::TemplateBased => "template_based",
            StructuringLevel::Table => "table",
        }
    }
}

impl fmt::Display for StructuringLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructuringLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        StructuringLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown structuring level `{s}`"))
    }
}

/// Share of entities rendered as a table in partial structuring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Portion {
    None,
    Quarter,
    Half,
    All,
}

impl Portion {
    pub const ALL: [Portion; 4] = [Portion::None, Portion::Quarter, Portion::Half, Portion::All];

    pub fn fraction(self) -> f64 {
        match self {
            Portion::None => 0.0,
            Portion::Quarter => 0.25,
            Portion::Half => 0.5,
            Portion::All => 1.0,
        }
    }

    pub fn from_fraction(f: f64) -> Result<Self, RenderError> {
        Portion::ALL
            .into_iter()
            .find(|p| p.fraction() == f)
            .ok_or(RenderError::BadPortion(f))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Portion::None => "none",
            Portion::Quarter => "quarter",
            Portion::Half => "half",
            Portion::All => "all",
        }
    }

    /// Number of entities out of `n` that go into the table block.
    pub fn table_count(self, n: usize) -> usize {
        match self {
            Portion::None => 0,
            Portion::Quarter => n / 4,
            Portion::Half => n / 2,
            Portion::All => n,
        }
    }
}

impl fmt::Display for Portion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("no paraphrase bank entry for attribute `{0}`")]
    NoBank(String),
    #[error("no sentence frame covers the attributes {0:?}")]
    NoFrame(Vec<String>),
    #[error("bank entry `{0}` is missing its slot")]
    BadTemplate(String),
    #[error("portion {0} is not one of 0, 1/4, 1/2, 1")]
    BadPortion(f64),
    #[error("cannot render an empty relation")]
    EmptyRelation,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("no pipe-delimited table found")]
    NoTable,
    #[error("table has no column matching key attribute `{0}`")]
    MissingKey(String),
}

/// Literal phrase templates for one dataset.
///
/// `frames` are whole-sentence templates with `{Attr}` slots; the first frame
/// whose slots match the relation's attributes is the template-based
/// sentence. `phrases` map each non-key attribute to clause templates with a
/// `{value}` slot, and `openers` start a sentence with the key slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphraseBank {
    #[serde(default)]
    pub openers: Vec<String>,
    pub frames: Vec<String>,
    pub phrases: BTreeMap<String, Vec<String>>,
}

fn slot(name: &str) -> String {
    format!("{{{name}}}")
}

fn frame_slots(frame: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = frame;
    while let Some(start) = rest.find('{') {
        let Some(len) = rest[start..].find('}') else { break };
        out.push(&rest[start + 1..start + len]);
        rest = &rest[start + len + 1..];
    }
    out
}

impl ParaphraseBank {
    /// Generic bank built from the schema's own phrases, for relations that
    /// ship without a hand-written bank.
    pub fn from_schema(schema: &[AttributeSpec]) -> Self {
        let key = schema.iter().find(|a| a.is_key).map(|a| a.name.as_str()).unwrap_or("Key");
        let others: Vec<&AttributeSpec> = schema.iter().filter(|a| !a.is_key).collect();
        let key_slot = slot(key);
        let frame = if others.is_empty() {
            format!("{key_slot} is listed.")
        } else {
            let parts: Vec<String> = others
                .iter()
                .map(|a| format!("{} {}", a.canonical_phrase, slot(&a.name)))
                .collect();
            format!("{key_slot} has {}.", join_clauses(&parts))
        };
        let phrases = others
            .iter()
            .map(|a| {
                let mut list: Vec<String> = a.paraphrases.iter().map(|p| format!("{p} {{value}}")).collect();
                list.push(format!("a {} of {{value}}", a.canonical_phrase));
                (a.name.clone(), list)
            })
            .collect();
        ParaphraseBank {
            openers: vec![
                format!("{key_slot} has"),
                format!("On record, {key_slot} has"),
                format!("We know that {key_slot} has"),
            ],
            frames: vec![frame],
            phrases,
        }
    }

    fn frame_for(&self, rel: &Relation) -> Result<&str, RenderError> {
        let mut want: Vec<&str> = rel.schema().iter().map(|a| a.name.as_str()).collect();
        want.sort_unstable();
        self.frames
            .iter()
            .find(|f| {
                let mut got = frame_slots(f);
                got.sort_unstable();
                got == want
            })
            .map(String::as_str)
            .ok_or_else(|| RenderError::NoFrame(rel.schema().iter().map(|a| a.name.clone()).collect()))
    }

    fn phrases_for(&self, attr: &str) -> Result<&[String], RenderError> {
        match self.phrases.get(attr) {
            Some(list) if !list.is_empty() => {
                if let Some(bad) = list.iter().find(|p| !p.contains("{value}")) {
                    return Err(RenderError::BadTemplate(bad.clone()));
                }
                Ok(list)
            }
            _ => Err(RenderError::NoBank(attr.to_string())),
        }
    }

    fn openers_for(&self, key: &str) -> Result<Vec<&str>, RenderError> {
        let key_slot = slot(key);
        if let Some(bad) = self.openers.iter().find(|o| !o.contains(&key_slot)) {
            return Err(RenderError::BadTemplate(bad.clone()));
        }
        if self.openers.is_empty() {
            return Err(RenderError::NoBank(key.to_string()));
        }
        Ok(self.openers.iter().map(String::as_str).collect())
    }
}

fn join_clauses(parts: &[String]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn fill_frame(frame: &str, rel: &Relation, row: &Tuple) -> String {
    let mut out = frame.to_string();
    for (attr, cell) in rel.schema().iter().zip(row.cells()) {
        out = out.replace(&slot(&attr.name), cell.text());
    }
    out
}

fn entity_rng(rel: &Relation, row: &Tuple, seed: u64) -> seed::HarnessRng {
    seed::rng(seed::derive_str(seed, "render-entity", &normalize(rel.key_of(row))))
}

/// One sentence per entity for the three text levels.
fn render_sentence(
    rel: &Relation,
    row: &Tuple,
    level: StructuringLevel,
    bank: &ParaphraseBank,
    seed: u64,
) -> Result<String, RenderError> {
    let key = rel.key_index();
    let attrs: Vec<usize> = (0..rel.schema().len()).filter(|&i| i != key).collect();
    if level == StructuringLevel::TemplateBased || attrs.is_empty() {
        return Ok(fill_frame(bank.frame_for(rel)?, rel, row));
    }
    let key_name = &rel.schema()[key].name;
    let openers = bank.openers_for(key_name)?;
    let mut rng = entity_rng(rel, row, seed);
    let mut order = attrs;
    let opener = if level == StructuringLevel::Natural {
        order.shuffle(&mut rng);
        openers[rng.gen_range(0..openers.len())]
    } else {
        openers[0]
    };
    let mut clauses = Vec::with_capacity(order.len());
    for i in order {
        let attr = &rel.schema()[i];
        let options = bank.phrases_for(&attr.name)?;
        let template = &options[rng.gen_range(0..options.len())];
        clauses.push(template.replace("{value}", row.get(i).text()));
    }
    let head = opener.replace(&slot(key_name), rel.key_of(row));
    Ok(format!("{head} {}.", join_clauses(&clauses)))
}

fn escape_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

fn table_lines<'a>(rel: &Relation, rows: impl Iterator<Item = &'a Tuple>) -> String {
    let mut lines = Vec::new();
    let header: Vec<String> = rel.schema().iter().map(|a| escape_cell(&a.name)).collect();
    lines.push(format!("| {} |", header.join(" | ")));
    for row in rows {
        let cells: Vec<String> = row.cells().iter().map(|c| escape_cell(c.text())).collect();
        lines.push(format!("| {} |", cells.join(" | ")));
    }
    lines.join("\n")
}

/// Pipe table from raw header and rows.
pub fn pipe_table<S: AsRef<str>>(header: &[S], rows: &[Vec<S>]) -> String {
    let line = |cells: &[S]| {
        let cells: Vec<String> = cells.iter().map(|c| escape_cell(c.as_ref())).collect();
        format!("| {} |", cells.join(" | "))
    };
    std::iter::once(line(header))
        .chain(rows.iter().map(|r| line(r)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Pipe table for any relation, header first. Never fails.
pub fn render_table(rel: &Relation) -> String {
    table_lines(rel, rel.rows().iter())
}

fn render_text<'a>(
    rel: &Relation,
    rows: impl Iterator<Item = &'a Tuple>,
    level: StructuringLevel,
    bank: &ParaphraseBank,
    seed: u64,
) -> Result<String, RenderError> {
    let lines = rows
        .map(|r| render_sentence(rel, r, level, bank, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(lines.join("\n"))
}

/// Renders `rel` at `level`. Draws for the text levels are keyed by
/// (seed, entity key), so a given entity reads the same wherever it appears.
pub fn render(
    rel: &Relation,
    level: StructuringLevel,
    bank: &ParaphraseBank,
    seed: u64,
) -> Result<String, RenderError> {
    if rel.is_empty() {
        return Err(RenderError::EmptyRelation);
    }
    match level {
        StructuringLevel::Table => Ok(render_table(rel)),
        _ => render_text(rel, rel.rows().iter(), level, bank, seed),
    }
}

/// Seeded split of the entities: the selected share becomes a table block
/// appended after the rest rendered as natural text. Returns the rendered
/// text and the keys placed in the table block.
pub fn render_partial(
    rel: &Relation,
    portion: Portion,
    bank: &ParaphraseBank,
    seed: u64,
) -> Result<String, RenderError> {
    Ok(render_partial_split(rel, portion, bank, seed)?.0)
}

/// As [`render_partial`], also returning which keys went into the table.
pub fn render_partial_split(
    rel: &Relation,
    portion: Portion,
    bank: &ParaphraseBank,
    seed: u64,
) -> Result<(String, Vec<String>), RenderError> {
    if rel.is_empty() {
        return Err(RenderError::EmptyRelation);
    }
    let n = rel.len();
    let k = portion.table_count(n);
    let mut rng = seed::rng(seed::derive(seed, "partial", &[n as u64, k as u64]));
    let mut in_table = vec![false; n];
    for i in index::sample(&mut rng, n, k) {
        in_table[i] = true;
    }
    let text_rows = rel.rows().iter().zip(&in_table).filter(|(_, t)| !**t).map(|(r, _)| r);
    let table_rows: Vec<&Tuple> = rel.rows().iter().zip(&in_table).filter(|(_, t)| **t).map(|(r, _)| r).collect();
    let table_keys = table_rows.iter().map(|r| rel.key_of(r).to_string()).collect();

    let mut blocks = Vec::new();
    if k < n {
        blocks.push(render_text(rel, text_rows, StructuringLevel::Natural, bank, seed)?);
    }
    if k > 0 {
        blocks.push(table_lines(rel, table_rows.into_iter()));
    }
    Ok((blocks.join("\n\n"), table_keys))
}

fn is_separator(cells: &[String]) -> bool {
    !cells.is_empty()
        && cells.iter().all(|c| {
            let c = c.trim();
            !c.is_empty() && c.trim_matches(':').chars().all(|ch| ch == '-') && c.contains('-')
        })
}

/// Splits on unescaped pipes.
fn split_pipes(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' if chars.peek() == Some(&'|') => {
                cur.push('|');
                chars.next();
            }
            '|' => cells.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    cells.push(cur);
    cells
}

fn table_row(line: &str) -> Option<Vec<String>> {
    let t = line.trim();
    let mut cells = split_pipes(t);
    if cells.len() < 2 {
        return None;
    }
    if t.starts_with('|') {
        cells.remove(0);
    }
    if t.ends_with('|') && !t.ends_with("\\|") {
        cells.pop();
    }
    if cells.is_empty() {
        return None;
    }
    Some(cells.into_iter().map(|c| c.trim().to_string()).collect())
}

/// Header names and data rows of the first pipe table in `text`.
pub fn extract_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), ParseError> {
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        match table_row(line) {
            Some(cells) if is_separator(&cells) => continue,
            Some(cells) => match header {
                None => header = Some(cells),
                Some(_) => rows.push(cells),
            },
            None if header.is_some() => break,
            None => continue,
        }
    }
    let header = header.ok_or(ParseError::NoTable)?;
    Ok((header, rows))
}

fn dedupe_header(header: Vec<String>) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    header
        .into_iter()
        .enumerate()
        .map(|(i, h)| {
            let base = if h.is_empty() { format!("column{}", i + 1) } else { h };
            let n = seen.entry(normalize(&base)).or_insert(0);
            *n += 1;
            if *n == 1 {
                base
            } else {
                format!("{base}_{n}")
            }
        })
        .collect()
}

/// Best-effort parse of the first pipe table in `text`. Tolerates leading
/// and trailing pipes, a dashed separator row and surrounding prose. The
/// first column becomes the key; rows repeating a key are dropped.
pub fn parse_table(text: &str) -> Result<Relation, ParseError> {
    let (header, rows) = extract_table(text)?;
    let header = dedupe_header(header);
    let schema = header
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let spec = AttributeSpec::new(h, AttributeKind::Categorical, &h.to_lowercase());
            if i == 0 {
                AttributeSpec { is_key: true, ..spec }
            } else {
                spec
            }
        })
        .collect();
    Ok(Relation::lenient("parsed", schema, rows))
}

/// Parses the first pipe table and aligns its columns to `schema` by
/// case-insensitive header match. Absent columns read as empty cells.
pub fn parse_table_as(text: &str, schema: &[AttributeSpec], name: &str) -> Result<Relation, ParseError> {
    let (header, rows) = extract_table(text)?;
    let header_norm: Vec<String> = header.iter().map(|h| normalize(h)).collect();
    let mapping: Vec<Option<usize>> = schema
        .iter()
        .map(|a| header_norm.iter().position(|h| *h == normalize(&a.name)))
        .collect();
    let key = schema.iter().position(|a| a.is_key).unwrap_or(0);
    if mapping[key].is_none() {
        return Err(ParseError::MissingKey(schema[key].name.clone()));
    }
    let rows = rows
        .into_iter()
        .map(|r| {
            mapping
                .iter()
                .map(|m| m.and_then(|j| r.get(j).cloned()).unwrap_or_default())
                .collect()
        })
        .collect();
    Ok(Relation::lenient(name, schema.to_vec(), rows))
}

/// Share of gold cells reproduced at the same (key, attribute) position in
/// `predicted`. Columns align by case-insensitive header; rows by
/// normalized key. An empty gold relation scores 1.
pub fn cell_fill_rate(predicted: &Relation, gold: &Relation) -> f64 {
    let total = gold.len() * gold.schema().len();
    if total == 0 {
        return 1.0;
    }
    let columns: Vec<Option<usize>> = gold.schema().iter().map(|a| predicted.attr_index_ci(&a.name)).collect();
    let pred_key = predicted
        .attr_index_ci(&gold.key_attr().name)
        .unwrap_or(predicted.key_index());
    let by_key: HashMap<String, &Tuple> = predicted
        .rows()
        .iter()
        .map(|r| (normalize(r.get(pred_key).text()), r))
        .collect();
    let mut filled = 0usize;
    for row in gold.rows() {
        let Some(pred_row) = by_key.get(&normalize(gold.key_of(row))) else { continue };
        for (j, col) in columns.iter().enumerate() {
            if let Some(c) = col {
                if normalize(pred_row.get(*c).text()) == normalize(row.get(j).text()) {
                    filled += 1;
                }
            }
        }
    }
    filled as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{players, players_bank, players_extended};
    use crate::relation::Cell;
    use crate::synth;
    use proptest::prelude::*;

    #[test]
    fn table_level_matches_players() {
        let text = render(&players(), StructuringLevel::Table, &players_bank(), 5).unwrap();
        assert_eq!(
            text,
            "| Name | Number | Nationality | Club |\n| Ronaldo | 7 | Portugal | Juventus |\n| Messi | 10 | Argentina | Barcelona |"
        );
    }

    #[test]
    fn template_level_first_line() {
        let text = render(&players(), StructuringLevel::TemplateBased, &players_bank(), 9).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "Ronaldo is a player from Portugal playing for Juventus with uniform number 7."
        );
    }

    #[test]
    fn natural_on_key_only_relation_is_canonical() {
        let rel = Relation::from_rows("One", vec![AttributeSpec::key("Name", "name")], &[vec!["Solo"]]).unwrap();
        let bank = ParaphraseBank::from_schema(rel.schema());
        let natural = render(&rel, StructuringLevel::Natural, &bank, 3).unwrap();
        assert_eq!(natural, "Solo is listed.");
        assert_eq!(natural, render(&rel, StructuringLevel::TemplateBased, &bank, 4).unwrap());
    }

    #[test]
    fn order_fixed_keeps_schema_order() {
        let rel = players_extended();
        let text = render(&rel, StructuringLevel::OrderFixed, &players_bank(), 11).unwrap();
        for (line, row) in text.lines().zip(rel.rows()) {
            let pos: Vec<usize> = row.cells()[1..].iter().map(|c| line.find(c.text()).unwrap()).collect();
            assert!(pos.windows(2).all(|w| w[0] < w[1]), "{line}");
        }
    }

    #[test]
    fn missing_bank_entry() {
        let mut bank = players_bank();
        bank.phrases.remove("Club");
        assert_eq!(
            render(&players(), StructuringLevel::OrderFixed, &bank, 1),
            Err(RenderError::NoBank("Club".into()))
        );
        bank.frames.clear();
        assert!(matches!(
            render(&players(), StructuringLevel::TemplateBased, &bank, 1),
            Err(RenderError::NoFrame(_))
        ));
    }

    #[test]
    fn partial_extremes_equal_full_levels() {
        let rel = players_extended();
        let bank = players_bank();
        for seed in 0..5 {
            assert_eq!(
                render_partial(&rel, Portion::None, &bank, seed).unwrap(),
                render(&rel, StructuringLevel::Natural, &bank, seed).unwrap()
            );
            assert_eq!(
                render_partial(&rel, Portion::All, &bank, seed).unwrap(),
                render(&rel, StructuringLevel::Table, &bank, seed).unwrap()
            );
        }
    }

    #[test]
    fn partial_half_partitions_players_extended() {
        let rel = players_extended();
        let (text, table_keys) = render_partial_split(&rel, Portion::Half, &players_bank(), 3).unwrap();
        let (prose, table) = text.split_once("\n\n").unwrap();
        let parsed = parse_table(table).unwrap();
        let mut in_table: Vec<&str> = parsed.keys().collect();
        assert_eq!(in_table, table_keys);
        let in_text: Vec<&str> = rel.keys().filter(|k| prose.contains(k)).collect();
        assert_eq!(in_text.len(), 2);
        assert_eq!(in_table.len(), 2);
        in_table.extend(in_text);
        in_table.sort_unstable();
        let mut all: Vec<&str> = rel.keys().collect();
        all.sort_unstable();
        assert_eq!(in_table, all);
    }

    #[test]
    fn bad_portion() {
        assert_eq!(Portion::from_fraction(0.3), Err(RenderError::BadPortion(0.3)));
        assert_eq!(Portion::from_fraction(0.25), Ok(Portion::Quarter));
    }

    #[test]
    fn parse_round_trip_and_separator() {
        let rel = players();
        let text = render_table(&rel);
        assert_eq!(parse_table_as(&text, rel.schema(), rel.name()).unwrap(), rel);
        let mut lines: Vec<&str> = text.lines().collect();
        lines.insert(1, "|---|---|---|---|");
        let with_sep = format!("Here is the table:\n\n{}\n\nHope this helps.", lines.join("\n"));
        assert_eq!(parse_table_as(&with_sep, rel.schema(), rel.name()).unwrap(), rel);
        let loose = parse_table(&with_sep).unwrap();
        assert_eq!(loose.keys().collect::<Vec<_>>(), ["Ronaldo", "Messi"]);
        assert_eq!(loose.schema().len(), 4);
    }

    #[test]
    fn parse_without_outer_pipes_and_prose_only() {
        let rel = parse_table("Name | Club\n:--|--:\nMessi | Barcelona").unwrap();
        assert_eq!(rel.rows()[0].get(1).text(), "Barcelona");
        assert_eq!(parse_table("No table in this answer."), Err(ParseError::NoTable));
        assert_eq!(
            parse_table_as("| Club |\n| PSG |", rel.schema(), "x"),
            Err(ParseError::MissingKey("Name".into()))
        );
    }

    #[test]
    fn fill_rate_examples() {
        let gold = players();
        assert_eq!(cell_fill_rate(&gold, &gold), 1.0);
        assert_eq!(cell_fill_rate(&gold.sample_entities(0, 0).unwrap(), &gold), 0.0);
        let mut rows: Vec<Tuple> = gold.rows().to_vec();
        rows[1].set(3, Cell::new(""));
        let blanked = gold.with_rows(rows);
        assert_eq!(cell_fill_rate(&blanked, &gold), 0.875);
        let upper = parse_table(&render_table(&gold).to_uppercase()).unwrap();
        assert_eq!(cell_fill_rate(&upper, &gold), 1.0);
    }

    fn contains_every_cell(text: &str, rel: &Relation) -> bool {
        rel.rows().iter().all(|r| r.cells().iter().all(|c| text.contains(c.text())))
    }

    proptest! {
        #[test]
        fn information_equivalence(seed_ in any::<u64>(), rows in 1usize..15) {
            let rel = synth::relation(seed_, rows);
            let bank = ParaphraseBank::from_schema(rel.schema());
            for level in StructuringLevel::ALL {
                let text = render(&rel, level, &bank, seed_).unwrap();
                prop_assert!(contains_every_cell(&text, &rel), "{level}");
                prop_assert_eq!(&text, &render(&rel, level, &bank, seed_).unwrap());
            }
            let back = parse_table_as(&render_table(&rel), rel.schema(), rel.name()).unwrap();
            prop_assert_eq!(back, rel);
        }

        #[test]
        fn partial_blocks_partition(seed_ in any::<u64>(), rows in 1usize..15) {
            let rel = synth::relation(seed_, rows);
            let bank = ParaphraseBank::from_schema(rel.schema());
            for portion in Portion::ALL {
                let (text, table_keys) = render_partial_split(&rel, portion, &bank, seed_).unwrap();
                prop_assert_eq!(table_keys.len(), portion.table_count(rel.len()));
                prop_assert!(contains_every_cell(&text, &rel));
                if !table_keys.is_empty() {
                    let parsed = parse_table(&text).unwrap();
                    prop_assert_eq!(parsed.keys().collect::<Vec<_>>(), table_keys.iter().map(String::as_str).collect::<Vec<_>>());
                }
            }
        }
    }

    #[test]
    fn natural_varies_with_seed() {
        let rel = players_extended();
        let bank = players_bank();
        let a = render(&rel, StructuringLevel::Natural, &bank, 1).unwrap();
        let differs = (2..10).any(|s| render(&rel, StructuringLevel::Natural, &bank, s).unwrap() != a);
        assert!(differs);
    }
}
