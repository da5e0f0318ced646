//! Dataset bundles: a relation together with its paraphrase bank and prompt
//! template pack. Three small synthetic bundles (soccer, movie, pii) are
//! compiled in.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::CompareOp;
use crate::relation::{self, AttributeSpec, IngestError, Relation, SchemaError};
use crate::requestgen::RequestType;
use crate::structurer::ParaphraseBank;

/// Version tag of the built-in answer-format footers.
pub const FOOTER_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("{what}: {message}")]
    Json { what: String, message: String },
    #[error("template pack: {0}")]
    Template(String),
    #[error("unknown built-in dataset `{0}`")]
    UnknownBuiltin(String),
}

/// Target attributes used by the request types that need one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Targets {
    pub update: String,
    pub sum: String,
    pub superlative: String,
    pub projection: Vec<String>,
}

/// Three prompt patterns per request type. Negated existence has its own
/// three patterns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub retrieval: Vec<String>,
    pub deletion: Vec<String>,
    pub update: Vec<String>,
    pub superlative: Vec<String>,
    pub sum: Vec<String>,
    pub count: Vec<String>,
    pub existence: Vec<String>,
    pub existence_negated: Vec<String>,
    pub projection: Vec<String>,
}

impl TemplateSet {
    pub fn patterns(&self, ty: RequestType, negated: bool) -> &[String] {
        match ty {
            RequestType::Retrieval => &self.retrieval,
            RequestType::Deletion => &self.deletion,
            RequestType::Update => &self.update,
            RequestType::Superlative => &self.superlative,
            RequestType::Sum => &self.sum,
            RequestType::Count => &self.count,
            RequestType::Existence if negated => &self.existence_negated,
            RequestType::Existence => &self.existence,
            RequestType::Projection => &self.projection,
        }
    }
}

/// Answer-format instructions appended to every prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Footers {
    pub version: String,
    pub entity_list: String,
    pub table: String,
    pub number: String,
    pub judgement: String,
    pub tuples: String,
}

impl Default for Footers {
    fn default() -> Self {
        let lead = "Write the final answer after a line containing only \"ANSWER:\"";
        Footers {
            version: FOOTER_VERSION.to_string(),
            entity_list: format!(
                "{lead}, one {{Entity}} {{KeyPhrase}} per line. Leave it empty if there is none."
            ),
            table: format!("{lead} as a pipe table whose header row names the columns {{Columns}}."),
            number: format!("{lead} as a single number."),
            judgement: format!("{lead}, starting with Yes or No, followed by your rationale."),
            tuples: format!("{lead} as a pipe table with the columns {{Columns}}."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplatePack {
    pub entity_singular: String,
    pub entity_plural: String,
    pub targets: Targets,
    pub templates: TemplateSet,
    #[serde(default)]
    pub footers: Footers,
}

impl TemplatePack {
    /// Checks pack invariants against a schema: non-empty nouns, exactly three
    /// patterns per type each holding `{Conditions}` once, targets that exist.
    pub fn validate(&self, schema: &[AttributeSpec]) -> Result<(), DatasetError> {
        if self.entity_singular.trim().is_empty() || self.entity_plural.trim().is_empty() {
            return Err(DatasetError::Template("entity noun is empty".into()));
        }
        for ty in RequestType::ALL {
            for negated in [false, true] {
                let pats = self.templates.patterns(ty, negated);
                if pats.len() != 3 {
                    return Err(DatasetError::Template(format!("{ty} needs exactly three templates")));
                }
                if let Some(p) = pats.iter().find(|p| p.matches("{Conditions}").count() != 1) {
                    return Err(DatasetError::Template(format!(
                        "pattern must contain {{Conditions}} exactly once: {p}"
                    )));
                }
            }
        }
        let known = |a: &str| schema.iter().any(|s| s.name == a);
        let t = &self.targets;
        for a in [&t.update, &t.sum, &t.superlative].into_iter().chain(&t.projection) {
            if !known(a) {
                return Err(DatasetError::Template(format!("target `{a}` is not in the schema")));
            }
        }
        if t.projection.is_empty() {
            return Err(DatasetError::Template("projection target list is empty".into()));
        }
        Ok(())
    }
}

/// Everything needed to generate requests over one relation.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub relation: Relation,
    pub bank: ParaphraseBank,
    pub pack: TemplatePack,
}

/// Files that make up an on-disk dataset bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPaths {
    pub name: String,
    pub csv: PathBuf,
    pub schema: PathBuf,
    pub bank: PathBuf,
    pub templates: PathBuf,
}

impl DatasetPaths {
    pub fn all(&self) -> [&Path; 4] {
        [&self.csv, &self.schema, &self.bank, &self.templates]
    }
}

fn json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, DatasetError> {
    serde_json::from_str(text).map_err(|e| DatasetError::Json {
        what: what.to_string(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String, DatasetError> {
    std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl Dataset {
    pub fn from_parts(
        name: &str,
        csv: &str,
        schema_json: &str,
        bank_json: &str,
        templates_json: &str,
    ) -> Result<Self, DatasetError> {
        let schema = relation::load_schema_json(schema_json.as_bytes())?;
        let relation = relation::load_csv(csv.as_bytes(), name, &schema)?.relation;
        let bank: ParaphraseBank = json("paraphrase bank", bank_json)?;
        let pack: TemplatePack = json("template pack", templates_json)?;
        pack.validate(&schema)?;
        Ok(Dataset { relation, bank, pack })
    }

    pub fn load(paths: &DatasetPaths) -> Result<Self, DatasetError> {
        let schema = relation::load_schema_json(File::open(&paths.schema).map_err(|source| DatasetError::Io {
            path: paths.schema.clone(),
            source,
        })?)?;
        let csv = File::open(&paths.csv).map_err(|source| DatasetError::Io {
            path: paths.csv.clone(),
            source,
        })?;
        let relation = relation::load_csv(csv, &paths.name, &schema)?.relation;
        let bank: ParaphraseBank = json("paraphrase bank", &read(&paths.bank)?)?;
        let pack: TemplatePack = json("template pack", &read(&paths.templates)?)?;
        pack.validate(&schema)?;
        Ok(Dataset { relation, bank, pack })
    }

    /// One of the compiled-in bundles: `soccer`, `movie` or `pii`.
    pub fn builtin(name: &str) -> Result<Self, DatasetError> {
        macro_rules! bundle {
            ($dir:literal, $label:literal) => {
                Dataset::from_parts(
                    $label,
                    include_str!(concat!("../data/", $dir, "/data.csv")),
                    include_str!(concat!("../data/", $dir, "/schema.json")),
                    include_str!(concat!("../data/", $dir, "/bank.json")),
                    include_str!(concat!("../data/", $dir, "/templates.json")),
                )
            };
        }
        match name {
            "soccer" => bundle!("soccer", "Soccer"),
            "movie" => bundle!("movie", "Movie"),
            "pii" => bundle!("pii", "PII"),
            other => Err(DatasetError::UnknownBuiltin(other.to_string())),
        }
    }

    pub const BUILTINS: [&'static str; 3] = ["soccer", "movie", "pii"];

    /// Replaces the relation (e.g. with a sample of itself).
    pub fn with_relation(mut self, relation: Relation) -> Self {
        self.relation = relation;
        self
    }

    /// Condition operators used for this dataset by default: equality only
    /// for soccer, all four operators otherwise.
    pub fn default_ops(&self) -> Vec<CompareOp> {
        if self.relation.name().eq_ignore_ascii_case("soccer") {
            vec![CompareOp::Eq]
        } else {
            CompareOp::ALL.to_vec()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        for name in Dataset::BUILTINS {
            let ds = Dataset::builtin(name).unwrap();
            assert_eq!(ds.relation.len(), 100, "{name}");
        }
        assert!(matches!(Dataset::builtin("chess"), Err(DatasetError::UnknownBuiltin(_))));
    }

    #[test]
    fn pack_validation() {
        let ds = Dataset::builtin("soccer").unwrap();
        let mut pack = ds.pack.clone();
        pack.templates.count.pop();
        assert!(pack.validate(ds.relation.schema()).is_err());
        let mut pack = ds.pack.clone();
        pack.templates.sum[1] = "Sum it all.".into();
        assert!(pack.validate(ds.relation.schema()).is_err());
        let mut pack = ds.pack.clone();
        pack.entity_plural = " ".into();
        assert!(pack.validate(ds.relation.schema()).is_err());
        let mut pack = ds.pack;
        pack.targets.sum = "Salary".into();
        assert!(pack.validate(ds.relation.schema()).is_err());
    }
}
