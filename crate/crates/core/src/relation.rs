//! In-memory relations: typed schema, keyed rows, CSV ingestion and seeded
//! entity sampling.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

/// Case-fold and trim. Used for key matching and value deduplication.
pub fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Categorical,
    Numeric,
    Freetext,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    pub canonical_phrase: String,
    /// Alternative phrases; entry 0 is conventionally the canonical phrase.
    pub paraphrases: Vec<String>,
    #[serde(default)]
    pub is_key: bool,
}

impl AttributeSpec {
    pub fn new(name: &str, kind: AttributeKind, phrase: &str) -> Self {
        AttributeSpec {
            name: name.to_string(),
            kind,
            canonical_phrase: phrase.to_string(),
            paraphrases: vec![phrase.to_string()],
            is_key: false,
        }
    }

    pub fn key(name: &str, phrase: &str) -> Self {
        AttributeSpec {
            is_key: true,
            ..AttributeSpec::new(name, AttributeKind::Freetext, phrase)
        }
    }

    pub fn with_paraphrases(mut self, phrases: &[&str]) -> Self {
        self.paraphrases = phrases.iter().map(|s| s.to_string()).collect();
        self
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("schema has no key attribute")]
    NoKey,
    #[error("schema has more than one key attribute")]
    MultipleKeys,
    #[error("attribute `{0}` has an empty paraphrase list")]
    EmptyParaphrases(String),
    #[error("attribute `{0}` declared twice")]
    DuplicateAttribute(String),
    #[error("schema json: {0}")]
    Json(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("row {row}: value in numeric column `{attr}` is not a finite number")]
    TypeMismatch { row: usize, attr: String },
    #[error("row {row}: expected {expected} cells, found {found}")]
    Arity { row: usize, expected: usize, found: usize },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("asked for {requested} entities but the relation has {available}")]
    TooFew { requested: usize, available: usize },
}

/// Non-fatal observations made while ingesting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    DroppedColumn(String),
}

/// Validates the schema invariants: unique names, exactly one key, non-empty
/// paraphrase lists on non-key attributes.
pub fn validate_schema(schema: &[AttributeSpec]) -> Result<usize, SchemaError> {
    let mut seen = HashSet::new();
    let mut key = None;
    for (i, attr) in schema.iter().enumerate() {
        if !seen.insert(normalize(&attr.name)) {
            return Err(SchemaError::DuplicateAttribute(attr.name.clone()));
        }
        if attr.is_key {
            if key.is_some() {
                return Err(SchemaError::MultipleKeys);
            }
            key = Some(i);
        } else if attr.paraphrases.is_empty() {
            return Err(SchemaError::EmptyParaphrases(attr.name.clone()));
        }
    }
    key.ok_or(SchemaError::NoKey)
}

/// Parses a schema file: a JSON array of attribute objects.
pub fn load_schema_json(source: impl Read) -> Result<Vec<AttributeSpec>, SchemaError> {
    let schema: Vec<AttributeSpec> =
        serde_json::from_reader(source).map_err(|e| SchemaError::Json(e.to_string()))?;
    validate_schema(&schema)?;
    Ok(schema)
}

/// A single cell. The source text is kept verbatim; cells that parse as a
/// finite number also carry the parsed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct Cell {
    text: String,
    number: Option<f64>,
}

impl Cell {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let number = parse_number(&text);
        Cell { text, number }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn number(&self) -> Option<f64> {
        self.number
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::new(s)
    }
}

impl From<Cell> for String {
    fn from(c: Cell) -> Self {
        c.text
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub(crate) fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple {
    cells: Vec<Cell>,
}

impl Tuple {
    pub fn new(cells: Vec<Cell>) -> Self {
        Tuple { cells }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn get(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn arity(&self) -> usize {
        self.cells.len()
    }

    pub(crate) fn set(&mut self, i: usize, cell: Cell) {
        self.cells[i] = cell;
    }
}

/// An immutable keyed table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RelationRepr", into = "RelationRepr")]
pub struct Relation {
    name: String,
    schema: Vec<AttributeSpec>,
    rows: Vec<Tuple>,
    key: usize,
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    name: String,
    schema: Vec<AttributeSpec>,
    rows: Vec<Tuple>,
}

impl TryFrom<RelationRepr> for Relation {
    type Error = SchemaError;

    fn try_from(r: RelationRepr) -> Result<Self, SchemaError> {
        let key = validate_schema(&r.schema)?;
        Ok(Relation {
            name: r.name,
            schema: r.schema,
            rows: r.rows,
            key,
        })
    }
}

impl From<Relation> for RelationRepr {
    fn from(r: Relation) -> Self {
        RelationRepr {
            name: r.name,
            schema: r.schema,
            rows: r.rows,
        }
    }
}

/// Result of [`load_csv`]: the relation plus any dropped-column warnings.
#[derive(Debug)]
pub struct Ingested {
    pub relation: Relation,
    pub warnings: Vec<IngestWarning>,
}

/// Reads a UTF-8 CSV with a header row. Header columns are matched to schema
/// attributes by exact name in any order; extra columns are dropped with a
/// warning.
pub fn load_csv(
    source: impl Read,
    name: &str,
    schema: &[AttributeSpec],
) -> Result<Ingested, IngestError> {
    validate_schema(schema)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let header_names: Vec<&str> = headers.iter().map(str::trim).collect();

    let mut positions = Vec::with_capacity(schema.len());
    for attr in schema {
        let pos = header_names
            .iter()
            .position(|h| *h == attr.name)
            .ok_or_else(|| IngestError::MissingColumn(attr.name.clone()))?;
        positions.push(pos);
    }
    let warnings: Vec<IngestWarning> = header_names
        .iter()
        .filter(|h| !schema.iter().any(|a| a.name == **h))
        .map(|h| {
            log::warn!("dropping column `{h}` not present in schema");
            IngestWarning::DroppedColumn(h.to_string())
        })
        .collect();

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header_names.len() {
            return Err(IngestError::Arity {
                row: i + 1,
                expected: header_names.len(),
                found: record.len(),
            });
        }
        let cells = positions
            .iter()
            .map(|&p| Cell::new(record.get(p).unwrap_or_default()))
            .collect();
        rows.push(Tuple::new(cells));
    }
    let relation = Relation::new(name, schema.to_vec(), rows)?;
    Ok(Ingested { relation, warnings })
}

impl Relation {
    /// Builds a relation and checks every ingestion invariant.
    pub fn new(name: &str, schema: Vec<AttributeSpec>, rows: Vec<Tuple>) -> Result<Self, IngestError> {
        let key = validate_schema(&schema)?;
        let mut keys = HashSet::new();
        for (i, row) in rows.iter().enumerate() {
            if row.arity() != schema.len() {
                return Err(IngestError::Arity {
                    row: i + 1,
                    expected: schema.len(),
                    found: row.arity(),
                });
            }
            if !keys.insert(normalize(row.get(key).text())) {
                return Err(IngestError::DuplicateKey(row.get(key).text().to_string()));
            }
            for (attr, cell) in schema.iter().zip(row.cells()) {
                if attr.kind == AttributeKind::Numeric && cell.number().is_none() {
                    return Err(IngestError::TypeMismatch {
                        row: i + 1,
                        attr: attr.name.clone(),
                    });
                }
            }
        }
        Ok(Relation {
            name: name.to_string(),
            schema,
            rows,
            key,
        })
    }

    /// Convenience constructor from string rows.
    pub fn from_rows<S: AsRef<str>>(
        name: &str,
        schema: Vec<AttributeSpec>,
        rows: &[Vec<S>],
    ) -> Result<Self, IngestError> {
        let rows = rows
            .iter()
            .map(|r| Tuple::new(r.iter().map(|c| Cell::new(c.as_ref())).collect()))
            .collect();
        Relation::new(name, schema, rows)
    }

    /// Same schema, different rows. Skips the numeric-kind check so that
    /// snapshots may hold placeholders such as "N/A".
    pub(crate) fn with_rows(&self, rows: Vec<Tuple>) -> Relation {
        Relation {
            name: self.name.clone(),
            schema: self.schema.clone(),
            rows,
            key: self.key,
        }
    }

    /// Loose constructor for tables recovered from model output: duplicate
    /// keys keep their first occurrence, ragged rows are padded or cut.
    pub(crate) fn lenient(name: &str, schema: Vec<AttributeSpec>, rows: Vec<Vec<String>>) -> Relation {
        let key = schema.iter().position(|a| a.is_key).unwrap_or(0);
        let arity = schema.len();
        let mut seen = HashSet::new();
        let rows = rows
            .into_iter()
            .filter_map(|mut r| {
                r.resize(arity, String::new());
                seen.insert(normalize(&r[key]))
                    .then(|| Tuple::new(r.into_iter().map(Cell::new).collect()))
            })
            .collect();
        Relation {
            name: name.to_string(),
            schema,
            rows,
            key,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &[AttributeSpec] {
        &self.schema
    }

    pub fn rows(&self) -> &[Tuple] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn key_index(&self) -> usize {
        self.key
    }

    pub fn key_attr(&self) -> &AttributeSpec {
        &self.schema[self.key]
    }

    pub fn key_of<'a>(&self, row: &'a Tuple) -> &'a str {
        row.get(self.key).text()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> + '_ {
        self.rows.iter().map(move |r| r.get(self.key).text())
    }

    pub fn attr_index(&self, attr: &str) -> Result<usize, SchemaError> {
        self.schema
            .iter()
            .position(|a| a.name == attr)
            .ok_or_else(|| SchemaError::UnknownAttribute(attr.to_string()))
    }

    /// Case-insensitive header lookup, used when aligning model-produced tables.
    pub fn attr_index_ci(&self, attr: &str) -> Option<usize> {
        let want = normalize(attr);
        self.schema.iter().position(|a| normalize(&a.name) == want)
    }

    pub fn attribute(&self, attr: &str) -> Result<&AttributeSpec, SchemaError> {
        Ok(&self.schema[self.attr_index(attr)?])
    }

    pub fn find_key(&self, key: &str) -> Option<&Tuple> {
        let want = normalize(key);
        self.rows.iter().find(|r| normalize(self.key_of(r)) == want)
    }

    /// Distinct values of `attr`, deduplicated after normalization, in order
    /// of first appearance. The first-seen spelling is returned.
    pub fn unique_values(&self, attr: &str) -> Result<Vec<String>, SchemaError> {
        let idx = self.attr_index(attr)?;
        let mut seen = HashSet::new();
        Ok(self
            .rows
            .iter()
            .map(|r| r.get(idx).text())
            .filter(|v| seen.insert(normalize(v)))
            .map(str::to_string)
            .collect())
    }

    /// Uniform sample of `n` rows without replacement; surviving rows keep
    /// their original relative order.
    pub fn sample_entities(&self, n: usize, seed: u64) -> Result<Relation, SampleError> {
        if n > self.rows.len() {
            return Err(SampleError::TooFew {
                requested: n,
                available: self.rows.len(),
            });
        }
        let mut rng = seed::rng(seed);
        let mut picked = index::sample(&mut rng, self.rows.len(), n).into_vec();
        picked.sort_unstable();
        Ok(self.with_rows(picked.into_iter().map(|i| self.rows[i].clone()).collect()))
    }

    /// Serializes back to CSV (header row, RFC-4180 quoting).
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.schema.iter().map(|a| a.name.as_str()))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.cells().iter().map(Cell::text)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_schema() -> Vec<AttributeSpec> {
        vec![
            AttributeSpec::key("Name", "name"),
            AttributeSpec::new("Number", AttributeKind::Numeric, "uniform number")
                .with_paraphrases(&["uniform number", "jersey No."]),
            AttributeSpec::new("Nationality", AttributeKind::Categorical, "nationality"),
            AttributeSpec::new("Club", AttributeKind::Categorical, "club"),
        ]
    }

    const F1_CSV: &str = "Name,Number,Nationality,Club\nRonaldo,7,Portugal,Juventus\nMessi,10,Argentina,Barcelona";

    fn f1() -> Relation {
        load_csv(F1_CSV.as_bytes(), "Soccer", &table1_schema()).unwrap().relation
    }

    fn f2() -> Relation {
        let csv = format!("{F1_CSV}\nNeymar,10,Brazil,PSG\nRamos,4,Spain,Sevilla");
        load_csv(csv.as_bytes(), "Soccer", &table1_schema()).unwrap().relation
    }

    #[test]
    fn loads_players_rows() {
        let rel = f1();
        assert_eq!(rel.len(), 2);
        assert_eq!(rel.key_attr().name, "Name");
        assert_eq!(rel.keys().collect::<Vec<_>>(), ["Ronaldo", "Messi"]);
        assert_eq!(rel.rows()[1].get(1).number(), Some(10.0));
    }

    #[test]
    fn header_only_is_empty_relation() {
        let rel = load_csv("Name,Number,Nationality,Club\n".as_bytes(), "Soccer", &table1_schema())
            .unwrap()
            .relation;
        assert!(rel.is_empty());
    }

    #[test]
    fn duplicate_key_after_normalization() {
        let csv = "Name,Number,Nationality,Club\nMessi,10,Argentina,Barcelona\n messi ,30,Argentina,PSG";
        let err = load_csv(csv.as_bytes(), "Soccer", &table1_schema()).unwrap_err();
        assert!(matches!(err, IngestError::DuplicateKey(k) if k.trim() == "messi"));
    }

    #[test]
    fn missing_column_and_type_mismatch() {
        let err = load_csv("Name,Number,Club\nA,1,X".as_bytes(), "S", &table1_schema()).unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn(c) if c == "Nationality"));
        let err = load_csv(
            "Name,Number,Nationality,Club\nA,1,X,Y\nB,seven,X,Y".as_bytes(),
            "S",
            &table1_schema(),
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::TypeMismatch { row: 2, ref attr } if attr == "Number"));
    }

    #[test]
    fn extra_columns_dropped_with_warning_and_order_insensitive() {
        let csv = "Club,Age,Name,Nationality,Number\nJuventus,39,Ronaldo,Portugal,7";
        let ing = load_csv(csv.as_bytes(), "Soccer", &table1_schema()).unwrap();
        assert_eq!(ing.warnings, vec![IngestWarning::DroppedColumn("Age".into())]);
        let row = &ing.relation.rows()[0];
        let texts: Vec<_> = row.cells().iter().map(Cell::text).collect();
        assert_eq!(texts, ["Ronaldo", "7", "Portugal", "Juventus"]);
    }

    #[test]
    fn schema_validation() {
        let mut s = table1_schema();
        s[0].is_key = false;
        assert_eq!(validate_schema(&s), Err(SchemaError::NoKey));
        let mut s = table1_schema();
        s[1].is_key = true;
        assert_eq!(validate_schema(&s), Err(SchemaError::MultipleKeys));
        let mut s = table1_schema();
        s[2].paraphrases.clear();
        assert_eq!(validate_schema(&s), Err(SchemaError::EmptyParaphrases("Nationality".into())));
    }

    #[test]
    fn sampling() {
        let rel = f1();
        assert_eq!(rel.sample_entities(2, 99).unwrap(), rel);
        assert!(rel.sample_entities(0, 99).unwrap().is_empty());
        assert_eq!(
            rel.sample_entities(3, 1),
            Err(SampleError::TooFew { requested: 3, available: 2 })
        );
        let f2 = f2();
        let a = f2.sample_entities(2, 7).unwrap();
        let b = f2.sample_entities(2, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        // order of first appearance preserved
        let pos: Vec<usize> = a
            .keys()
            .map(|k| f2.keys().position(|x| x == k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unique_values_examples() {
        assert_eq!(f1().unique_values("Nationality").unwrap(), ["Portugal", "Argentina"]);
        assert_eq!(f2().unique_values("Number").unwrap(), ["7", "10", "4"]);
        let empty = f1().with_rows(vec![]);
        assert!(empty.unique_values("Nationality").unwrap().is_empty());
        assert_eq!(
            f1().unique_values("Height"),
            Err(SchemaError::UnknownAttribute("Height".into()))
        );
    }

    #[test]
    fn csv_round_trip_with_quoting() {
        let rel = Relation::from_rows(
            "People",
            vec![
                AttributeSpec::key("Name", "name"),
                AttributeSpec::new("Address", AttributeKind::Freetext, "address"),
            ],
            &[vec!["Ann", "1 Elm Lane, \"Fairview\""], vec!["Bo", "2 Oak"]],
        )
        .unwrap();
        let back = load_csv(rel.to_csv().as_bytes(), "People", rel.schema()).unwrap().relation;
        assert_eq!(back, rel);
    }

    #[test]
    fn json_round_trip() {
        let rel = f2();
        let json = serde_json::to_string(&rel).unwrap();
        let back: Relation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rel);
    }
}
