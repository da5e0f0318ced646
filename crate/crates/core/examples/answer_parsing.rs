//! Parse free-text model replies into typed answers.
//!
//! cargo run --example answer_parsing

use tablethink::answer::{match_entities, parse, ParsedAnswer};
use tablethink::fixtures::players_extended;
use tablethink::requestgen::RequestType;

fn main() {
    let rel = players_extended();
    let replies = [
        (RequestType::Retrieval, "Let me check the table.\n\nANSWER:\nL. Messi\nNeymar Jr.\nPelé"),
        (RequestType::Retrieval, "ANSWER: Messi, Ramos"),
        (RequestType::Count, "Two players match, so the count is\nANSWER:\n2"),
        (RequestType::Sum, "The total comes to 1,024."),
        (RequestType::Existence, "No. Nobody from France plays for Sevilla."),
        (
            RequestType::Deletion,
            "ANSWER:\n| Name | Number | Nationality | Club |\n|---|---|---|---|\n| Ronaldo | 7 | Portugal | Juventus |",
        ),
        (RequestType::Projection, "ANSWER:\nMessi | Barcelona\nNeymar | PSG"),
        (RequestType::Superlative, "I don't know."),
    ];
    for (ty, reply) in replies {
        let parsed = parse(reply, ty);
        println!("{ty:>12}: {}", serde_json::to_string(&parsed).unwrap());
        if let ParsedAnswer::EntityList { names } = &parsed {
            let m = match_entities(names, &rel);
            println!("{:>12}  keys {:?}, dropped {}, via substring {}", "", m.keys, m.dropped, m.substring);
        }
    }
}
