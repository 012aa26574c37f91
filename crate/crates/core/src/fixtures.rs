//! Bundled example corpora (see `fixtures/README.md`).

use std::path::Path;

use crate::corpus::{read_corpus, Example};

pub const DATA_GENERATION: &str = include_str!("../fixtures/dance_scores.jsonl");
pub const REPRESENTATIONS: &str = include_str!("../fixtures/war_losses.jsonl");
pub const UNION_VS_GOLD: &str = include_str!("../fixtures/engines.jsonl");

fn single(text: &str) -> Example {
    read_corpus(text.as_bytes(), Path::new("."), false)
        .expect("bundled fixture parses")
        .examples
        .remove(0)
}

/// Dance-scores table with three condition columns and one answer column.
pub fn data_generation() -> Example {
    single(DATA_GENERATION)
}

/// 3x3 window whose condition value sits inside a cell.
pub fn representations() -> Example {
    single(REPRESENTATIONS)
}

/// Engine table with two condition columns that never share a 4-wide window.
pub fn union_vs_gold() -> Example {
    single(UNION_VS_GOLD)
}

/// Looks a fixture up by its table id.
pub fn by_name(name: &str) -> Option<Example> {
    match name {
        "dance-scores" => Some(data_generation()),
        "war-losses" => Some(representations()),
        "engines" => Some(union_vs_gold()),
        _ => None,
    }
}
