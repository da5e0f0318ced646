//! Small hand-written relations used by tests and examples.
//!
//! `players()` holds two players, Ronaldo and Messi;
//! `players_extended()` adds Neymar (sharing number 10 with Messi) and
//! Ramos.

use crate::relation::{AttributeKind, AttributeSpec, Relation};
use crate::structurer::ParaphraseBank;

pub fn players_schema() -> Vec<AttributeSpec> {
    vec![
        AttributeSpec::key("Name", "name").with_paraphrases(&["name", "player name"]),
        AttributeSpec::new("Number", AttributeKind::Numeric, "uniform number")
            .with_paraphrases(&["uniform number", "jersey number", "jersey No."]),
        AttributeSpec::new("Nationality", AttributeKind::Categorical, "nationality")
            .with_paraphrases(&["nationality", "country"]),
        AttributeSpec::new("Club", AttributeKind::Categorical, "club").with_paraphrases(&["club", "team"]),
    ]
}

pub const PLAYERS_CSV: &str =
    "Name,Number,Nationality,Club\nRonaldo,7,Portugal,Juventus\nMessi,10,Argentina,Barcelona";

pub fn players() -> Relation {
    crate::relation::load_csv(PLAYERS_CSV.as_bytes(), "Soccer", &players_schema())
        .expect("fixture is valid")
        .relation
}

pub fn players_extended() -> Relation {
    let csv = format!("{PLAYERS_CSV}\nNeymar,10,Brazil,PSG\nRamos,4,Spain,Sevilla");
    crate::relation::load_csv(csv.as_bytes(), "Soccer", &players_schema())
        .expect("fixture is valid")
        .relation
}

/// Paraphrase bank for the two-player schema; the first frame is the
/// template-based sentence.
pub fn players_bank() -> ParaphraseBank {
    serde_json::from_str(
        r#"{
        "openers": ["{Name} is a player", "Meet {Name}, a player"],
        "frames": ["{Name} is a player from {Nationality} playing for {Club} with uniform number {Number}."],
        "phrases": {
            "Number": ["with uniform number {value}", "wearing jersey No. {value}", "who wore jersey number {value}"],
            "Nationality": ["from {value}", "who represents {value}"],
            "Club": ["playing for {value}", "who was with {value}", "signed to {value}"]
        }
    }"#,
    )
    .expect("fixture bank parses")
}
