//! Answer formatting for the mock models and parsing of free-text replies.
//!
//! Replies are expected to end with a block introduced by a line reading
//! `ANSWER:`. When several such markers appear the last one wins; without
//! any, the whole reply is parsed.

use std::collections::BTreeSet;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::oracle::GoldAnswer;
use crate::relation::{normalize, Relation};
use crate::requestgen::RequestType;
use crate::structurer::{self, pipe_table, render_table};

pub const MARKER: &str = "ANSWER:";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParsedAnswer {
    EntityList { names: Vec<String> },
    TupleList { tuples: Vec<Vec<String>> },
    TableSnapshot { relation: Relation },
    Number { value: f64 },
    Judgement { yes: bool, rationale: String },
    Unparseable { reason: String },
}

impl ParsedAnswer {
    pub fn is_unparseable(&self) -> bool {
        matches!(self, ParsedAnswer::Unparseable { .. })
    }

    fn unparseable(reason: &str) -> Self {
        ParsedAnswer::Unparseable {
            reason: reason.to_string(),
        }
    }
}

/// Writes a number the way the answer footer asks: integers without a
/// fractional part, other values in shortest round-trip form.
pub fn format_number(v: f64) -> String {
    let v = v + 0.0;
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

/// The reply a perfect model gives for `gold`.
pub fn format_gold(gold: &GoldAnswer) -> String {
    let body = match gold {
        GoldAnswer::EntitySet { keys, .. } => keys.join("\n"),
        GoldAnswer::TupleSet { attrs, tuples } => pipe_table(attrs, tuples),
        GoldAnswer::RelationSnapshot { relation } => render_table(relation),
        GoldAnswer::Number { value } => format_number(*value),
        GoldAnswer::Witnessed { exists, negated, witnesses } => {
            let verdict = if exists != negated { "Yes." } else { "No." };
            if witnesses.is_empty() {
                format!("{verdict} No entry satisfies the conditions.")
            } else {
                format!("{verdict} Entries satisfying the conditions: {}.", witnesses.join("; "))
            }
        }
    };
    if body.is_empty() {
        MARKER.to_string()
    } else {
        format!("{MARKER}\n{body}")
    }
}

/// The text after the last `ANSWER:` marker, or all of `response`.
pub fn answer_block(response: &str) -> &str {
    match response.rfind(MARKER) {
        Some(i) => &response[i + MARKER.len()..],
        None => response,
    }
}

/// Case-folds, trims and strips surrounding punctuation and markup.
pub fn normalize_name(s: &str) -> String {
    let trimmed = s.trim().trim_matches(|c: char| {
        c.is_whitespace() || matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '"' | '\'' | '`' | '*' | '_' | '(' | ')' | '[' | ']')
    });
    normalize(trimmed)
}

fn strip_bullet(line: &str) -> &str {
    let t = line.trim_start();
    let t = t
        .strip_prefix("- ")
        .or_else(|| t.strip_prefix("* "))
        .or_else(|| t.strip_prefix("• "))
        .unwrap_or(t);
    let digits = t.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        if let Some(rest) = t[digits..].strip_prefix(". ").or_else(|| t[digits..].strip_prefix(") ")) {
            return rest;
        }
    }
    t
}

/// First-column cells of a pipe table, header row included; [`match_entities`]
/// skips a cell naming the key column.
fn entity_list(block: &str) -> Vec<String> {
    if let Ok((header, rows)) = structurer::extract_table(block) {
        return std::iter::once(&header)
            .chain(&rows)
            .filter_map(|r| r.first())
            .map(|s| normalize_name(s))
            .filter(|s| !s.is_empty())
            .collect();
    }
    let lines: Vec<&str> = block.lines().map(strip_bullet).filter(|l| !l.trim().is_empty()).collect();
    let pieces: Vec<&str> = if lines.len() == 1 && lines[0].contains(',') {
        lines[0].split(',').collect()
    } else {
        lines
    };
    pieces.into_iter().map(normalize_name).filter(|s| !s.is_empty()).collect()
}

fn last_number(block: &str) -> Option<f64> {
    let re = Regex::new(r"-?\d{1,3}(?:,\d{3})+(?:\.\d+)?|-?\d+(?:\.\d+)?").unwrap();
    re.find_iter(block)
        .filter(|m| {
            // Skip digits glued to letters, as in "A1" or "3rd".
            let before = block[..m.start()].chars().next_back();
            let after = block[m.end()..].chars().next();
            !before.is_some_and(|c| c.is_alphabetic()) && !after.is_some_and(|c| c.is_alphabetic())
        })
        .last()
        .and_then(|m| m.as_str().replace(',', "").parse::<f64>().ok())
        .filter(|v| v.is_finite())
}

fn judgement(block: &str) -> Option<(bool, String)> {
    let text = block.trim();
    let first: String = text
        .split(|c: char| !c.is_alphanumeric())
        .find(|w| !w.is_empty())?
        .to_lowercase();
    let yes = match first.as_str() {
        "yes" | "true" => true,
        "no" | "false" => false,
        _ => return None,
    };
    Some((yes, text.to_string()))
}

/// Pipe rows are all kept, the first included: without the schema a header
/// cannot be told from data, so the scorer drops header-like rows instead.
fn tuple_list(block: &str) -> Vec<Vec<String>> {
    if let Ok((header, rows)) = structurer::extract_table(block) {
        return std::iter::once(header)
            .chain(rows)
            .map(|r| r.iter().map(|c| normalize_name(c)).collect())
            .collect();
    }
    block
        .lines()
        .map(strip_bullet)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let sep = [';', '\t', ','].into_iter().find(|&c| l.contains(c));
            match sep {
                Some(c) => l.split(c).map(normalize_name).collect(),
                None => vec![normalize_name(l)],
            }
        })
        .collect()
}

/// Typed extraction of a reply. Never fails; anything unusable comes back
/// as [`ParsedAnswer::Unparseable`].
pub fn parse(response: &str, ty: RequestType) -> ParsedAnswer {
    let block = answer_block(response);
    match ty {
        RequestType::Retrieval | RequestType::Superlative => ParsedAnswer::EntityList {
            names: entity_list(block),
        },
        RequestType::Deletion | RequestType::Update => match structurer::parse_table(block) {
            Ok(relation) => ParsedAnswer::TableSnapshot { relation },
            Err(_) if ty == RequestType::Deletion => ParsedAnswer::EntityList {
                names: entity_list(block),
            },
            Err(_) => ParsedAnswer::unparseable("no table in reply"),
        },
        RequestType::Sum | RequestType::Count => match last_number(block) {
            Some(value) => ParsedAnswer::Number { value },
            None => ParsedAnswer::unparseable("no number in reply"),
        },
        RequestType::Existence => match judgement(block) {
            Some((yes, rationale)) => ParsedAnswer::Judgement { yes, rationale },
            None => ParsedAnswer::unparseable("reply does not start with yes or no"),
        },
        RequestType::Projection => {
            if block.trim().is_empty() {
                ParsedAnswer::TupleList { tuples: Vec::new() }
            } else {
                ParsedAnswer::TupleList {
                    tuples: tuple_list(block),
                }
            }
        }
    }
}

/// Result of mapping parsed names onto relation keys.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMatch {
    pub keys: BTreeSet<String>,
    /// Names matching no key, or several keys by substring.
    pub dropped: usize,
    /// Names resolved by the unique-substring rule.
    pub substring: usize,
}

/// Maps names to keys: exact normalized match first, then a unique key that
/// contains the name or is contained in it. A name that is the key column's
/// own label (a table header) is skipped unless it is also a key.
pub fn match_entities<S: AsRef<str>>(names: &[S], rel: &Relation) -> EntityMatch {
    let keys: Vec<(String, &str)> = rel.keys().map(|k| (normalize_name(k), k)).collect();
    let key_attr = rel.key_attr();
    let labels: BTreeSet<String> = std::iter::once(&key_attr.name)
        .chain(std::iter::once(&key_attr.canonical_phrase))
        .chain(&key_attr.paraphrases)
        .map(|l| normalize_name(l))
        .collect();
    let mut out = EntityMatch::default();
    for name in names {
        let n = normalize_name(name.as_ref());
        if n.is_empty() || (labels.contains(&n) && !keys.iter().any(|(nk, _)| *nk == n)) {
            continue;
        }
        if let Some((_, k)) = keys.iter().find(|(nk, _)| *nk == n) {
            out.keys.insert(k.to_string());
            continue;
        }
        let mut hits = keys.iter().filter(|(nk, _)| nk.contains(&n) || n.contains(nk.as_str()));
        match (hits.next(), hits.next()) {
            (Some((_, k)), None) => {
                out.keys.insert(k.to_string());
                out.substring += 1;
            }
            _ => out.dropped += 1,
        }
    }
    if out.substring > 0 || out.dropped > 0 {
        log::debug!("entity match: {} by substring, {} dropped", out.substring, out.dropped);
    }
    out
}
