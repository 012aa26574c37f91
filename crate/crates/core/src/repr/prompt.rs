use std::fs;
use std::io;
use std::path::Path;

use super::{join_row, ReprError};
use crate::table::{Question, Window};

/// Default selector instruction, with `{question}` and `{table}` slots.
pub const DEFAULT_TEMPLATE: &str = include_str!("../../templates/selector_prompt.txt");

const QUESTION_SLOT: &str = "{question}";
const TABLE_SLOT: &str = "{table}";

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Question,
    Table,
}

/// A fixed instruction text with one question slot and one table slot.
///
/// Slots are resolved once at parse time, so placeholder-like text inside a
/// question or a cell is never substituted again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    segments: Vec<Segment>,
}

impl PromptTemplate {
    pub fn parse(text: &str) -> Result<Self, ReprError> {
        for slot in [QUESTION_SLOT, TABLE_SLOT] {
            match text.matches(slot).count() {
                0 => return Err(ReprError::MissingPlaceholder(slot)),
                1 => {}
                _ => return Err(ReprError::DuplicatePlaceholder(slot)),
            }
        }
        let mut segments = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let q = rest.find(QUESTION_SLOT);
            let t = rest.find(TABLE_SLOT);
            let (at, slot, segment) = match (q, t) {
                (Some(q), Some(t)) if q < t => (q, QUESTION_SLOT, Segment::Question),
                (Some(q), None) => (q, QUESTION_SLOT, Segment::Question),
                (_, Some(t)) => (t, TABLE_SLOT, Segment::Table),
                (None, None) => {
                    segments.push(Segment::Text(rest.to_string()));
                    break;
                }
            };
            if at > 0 {
                segments.push(Segment::Text(rest[..at].to_string()));
            }
            segments.push(segment);
            rest = &rest[at + slot.len()..];
        }
        Ok(Self { segments })
    }

    pub fn from_file(path: impl AsRef<Path>) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Builds the selector prompt for one window.
    pub fn render(&self, window: &Window<'_>, question: &Question) -> String {
        let table = serialize_window(window);
        let mut out = String::new();
        for segment in &self.segments {
            match segment {
                Segment::Text(text) => out.push_str(text),
                Segment::Question => out.push_str(question.text()),
                Segment::Table => out.push_str(&table),
            }
        }
        out
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::parse(DEFAULT_TEMPLATE).expect("bundled template is valid")
    }
}

/// Header line then one line per row; cells joined by `" | "`.
pub fn serialize_window(window: &Window<'_>) -> String {
    let mut lines = Vec::with_capacity(window.height() + 1);
    lines.push(join_row(window.headers()));
    for r in 0..window.height() {
        lines.push(join_row(window.row(r)));
    }
    lines.join("\n")
}
