//! JSON-lines corpus ingestion and the subtable output format.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::condition::{Annotation, AnnotationError, Condition, Op};
use crate::table::{Question, Table, TableError};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error("column reference {0} does not resolve against the headers")]
    UnresolvedColumn(String),
    #[error("record needs either headers and rows or table_csv")]
    MissingTable,
    #[error("reading {path}: {message}")]
    Csv { path: PathBuf, message: String },
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: RecordError,
    },
}

/// A column named by 0-based index or by exact header text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnRef {
    fn resolve(&self, headers: &[String]) -> Result<usize, RecordError> {
        match self {
            ColumnRef::Index(i) if *i < headers.len() => Ok(*i),
            ColumnRef::Index(i) => Err(RecordError::UnresolvedColumn(i.to_string())),
            ColumnRef::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| RecordError::UnresolvedColumn(format!("'{name}'"))),
        }
    }
}

/// Condition values may be written as JSON strings or numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarValue {
    Text(String),
    Number(serde_json::Number),
}

impl ScalarValue {
    fn into_string(self) -> String {
        match self {
            ScalarValue::Text(s) => s,
            ScalarValue::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub column: ColumnRef,
    pub op: String,
    pub value: ScalarValue,
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub table_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headers: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<ScalarValue>>>,
    /// CSV file with a header row, relative to the corpus file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_csv: Option<String>,
    pub question: String,
    #[serde(default)]
    pub conditions: Vec<ConditionRecord>,
    pub answer_columns: Vec<ColumnRef>,
    #[serde(default)]
    pub answers: Vec<String>,
}

/// A validated corpus entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub table_id: String,
    pub question_id: String,
    pub table: Table,
    pub question: Question,
    pub annotation: Annotation,
}

impl Example {
    pub fn to_record(&self) -> CorpusRecord {
        CorpusRecord {
            table_id: self.table_id.clone(),
            question_id: Some(self.question_id.clone()),
            headers: Some(self.table.headers().to_vec()),
            rows: Some(
                self.table
                    .rows()
                    .iter()
                    .map(|r| r.iter().cloned().map(ScalarValue::Text).collect())
                    .collect(),
            ),
            table_csv: None,
            question: self.question.text().to_string(),
            conditions: self
                .annotation
                .conditions
                .iter()
                .map(|c| ConditionRecord {
                    column: ColumnRef::Index(c.column),
                    op: c.op.as_str().to_string(),
                    value: ScalarValue::Text(c.value.clone()),
                })
                .collect(),
            answer_columns: self
                .annotation
                .answer_columns
                .iter()
                .map(|&c| ColumnRef::Index(c))
                .collect(),
            answers: self.annotation.gold_answers.clone(),
        }
    }
}

fn read_csv_table(path: &Path) -> Result<Table, RecordError> {
    let csv_err = |message: String| RecordError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| csv_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(e.to_string()))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(Table::new(headers, rows)?)
}

impl CorpusRecord {
    /// Validates the record; `base_dir` resolves `table_csv` paths.
    pub fn into_example(self, line: usize, base_dir: &Path) -> Result<Example, RecordError> {
        let table = match (self.headers, self.rows, &self.table_csv) {
            (Some(headers), Some(rows), _) => Table::new(
                headers,
                rows.into_iter()
                    .map(|r| r.into_iter().map(ScalarValue::into_string).collect())
                    .collect(),
            )?,
            (_, _, Some(csv)) => read_csv_table(&base_dir.join(csv))?,
            _ => return Err(RecordError::MissingTable),
        };
        let headers = table.headers();
        let conditions = self
            .conditions
            .into_iter()
            .map(|c| {
                let column = c.column.resolve(headers)?;
                let op: Op = c.op.parse()?;
                Ok(Condition::new(column, op, c.value.into_string())?)
            })
            .collect::<Result<Vec<_>, RecordError>>()?;
        let answer_columns = self
            .answer_columns
            .iter()
            .map(|c| c.resolve(headers))
            .collect::<Result<BTreeSet<_>, _>>()?;
        let annotation = Annotation::new(conditions, answer_columns, self.answers)?;
        let question = Question::new(self.question)?;
        let question_id = self
            .question_id
            .unwrap_or_else(|| format!("{}#{line}", self.table_id));
        Ok(Example {
            table_id: self.table_id,
            question_id,
            table,
            question,
            annotation,
        })
    }
}

#[derive(Debug, Default)]
pub struct Corpus {
    pub examples: Vec<Example>,
    /// `(line, message)` for records skipped in lenient mode.
    pub skipped: Vec<(usize, String)>,
}

/// Reads a JSON-lines corpus. Blank lines are ignored. A malformed line is
/// fatal unless `lenient`, in which case it is recorded and skipped.
pub fn load_corpus(path: impl AsRef<Path>, lenient: bool) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    read_corpus(BufReader::new(file), base_dir, lenient).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn read_corpus(input: impl BufRead, base_dir: &Path, lenient: bool) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    for (index, line) in input.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: PathBuf::new(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<CorpusRecord>(&line)
            .map_err(RecordError::from)
            .and_then(|record| record.into_example(line_no, base_dir));
        match parsed {
            Ok(example) => corpus.examples.push(example),
            Err(e) if lenient => corpus.skipped.push((line_no, e.to_string())),
            Err(source) => {
                return Err(CorpusError::Record {
                    line: line_no,
                    source,
                })
            }
        }
    }
    Ok(corpus)
}

/// One selected subtable, as written by `select` and read by `eval`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtableRecord {
    pub table_id: String,
    pub question_id: String,
    pub row_ids: Vec<usize>,
    pub col_ids: Vec<usize>,
    pub headers: Vec<String>,
    pub cells: Vec<Vec<String>>,
    pub converged: bool,
    pub iterations: usize,
}

impl SubtableRecord {
    pub fn new(example: &Example, table: &Table, converged: bool, iterations: usize) -> Self {
        Self {
            table_id: example.table_id.clone(),
            question_id: example.question_id.clone(),
            row_ids: table.row_ids().to_vec(),
            col_ids: table.col_ids().to_vec(),
            headers: table.headers().to_vec(),
            cells: table.rows().to_vec(),
            converged,
            iterations,
        }
    }

    pub fn to_table(&self) -> Result<Table, TableError> {
        Table::from_parts(
            self.headers.clone(),
            self.cells.clone(),
            self.row_ids.clone(),
            self.col_ids.clone(),
        )
    }
}

/// A predicted answer for exact-match scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question_id: String,
    pub answer: String,
}

pub fn write_jsonl<T: Serialize>(mut out: impl Write, items: impl IntoIterator<Item = T>) -> io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_jsonl_file<T: Serialize>(path: impl AsRef<Path>, items: impl IntoIterator<Item = T>) -> io::Result<()> {
    write_jsonl(BufWriter::new(File::create(path)?), items)
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> io::Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut items = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", index + 1))
        })?;
        items.push(item);
    }
    Ok(items)
}
