//! Tables, windows and cell selections.
//!
//! Every table carries the global row and column indices of the original
//! input table it was cut from, so selections made on a shrunken table can
//! always be expressed in the coordinate frame of the original.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A global `(row, column)` coordinate in the original table.
pub type Coord = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("row {row} has {found} cells, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{axis} ids must have {expected} entries, found {found}")]
    IdCount {
        axis: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{axis} ids must be strictly increasing")]
    IdOrder { axis: &'static str },
    #[error("selection references column {0} which is not in the table")]
    UnknownColumn(usize),
    #[error("selection references cell ({0}, {1}) which is not in the table")]
    UnknownCell(usize, usize),
    #[error("selected cell ({0}, {1}) lies in a column that is not selected")]
    CellOutsideColumns(usize, usize),
    #[error("a selection must contain at least one column")]
    NoColumns,
    #[error("question text is empty")]
    EmptyQuestion,
}

/// A header row plus a rectangular grid of cells with provenance ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    headers: Vec<String>,
    cells: Vec<Vec<String>>,
    row_ids: Vec<usize>,
    col_ids: Vec<usize>,
}

impl Table {
    /// Builds an original input table: row ids `0..R`, column ids `0..C`.
    pub fn new(headers: Vec<String>, cells: Vec<Vec<String>>) -> Result<Self, TableError> {
        let row_ids = (0..cells.len()).collect();
        let col_ids = (0..headers.len()).collect();
        Self::from_parts(headers, cells, row_ids, col_ids)
    }

    pub fn from_parts(
        headers: Vec<String>,
        cells: Vec<Vec<String>>,
        row_ids: Vec<usize>,
        col_ids: Vec<usize>,
    ) -> Result<Self, TableError> {
        let width = headers.len();
        for (row, values) in cells.iter().enumerate() {
            if values.len() != width {
                return Err(TableError::Ragged {
                    row,
                    expected: width,
                    found: values.len(),
                });
            }
        }
        if row_ids.len() != cells.len() {
            return Err(TableError::IdCount {
                axis: "row",
                expected: cells.len(),
                found: row_ids.len(),
            });
        }
        if col_ids.len() != width {
            return Err(TableError::IdCount {
                axis: "column",
                expected: width,
                found: col_ids.len(),
            });
        }
        if !strictly_increasing(&row_ids) {
            return Err(TableError::IdOrder { axis: "row" });
        }
        if !strictly_increasing(&col_ids) {
            return Err(TableError::IdOrder { axis: "column" });
        }
        Ok(Self {
            headers,
            cells,
            row_ids,
            col_ids,
        })
    }

    /// A table with no columns and no rows, used as the empty pipeline result.
    pub fn empty() -> Self {
        Self {
            headers: Vec::new(),
            cells: Vec::new(),
            row_ids: Vec::new(),
            col_ids: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.headers.len()
    }

    pub fn n_cells(&self) -> usize {
        self.n_rows() * self.n_cols()
    }

    pub fn is_empty(&self) -> bool {
        self.n_cells() == 0
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.cells
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[usize] {
        &self.col_ids
    }

    /// Cell at local position `(row, col)`.
    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.cells[row][col]
    }

    pub fn local_row(&self, global_row: usize) -> Option<usize> {
        self.row_ids.binary_search(&global_row).ok()
    }

    pub fn local_col(&self, global_col: usize) -> Option<usize> {
        self.col_ids.binary_search(&global_col).ok()
    }

    /// Cell addressed by global coordinates.
    pub fn get(&self, (row, col): Coord) -> Option<&str> {
        let r = self.local_row(row)?;
        let c = self.local_col(col)?;
        Some(self.cell(r, c))
    }

    pub fn contains(&self, coord: Coord) -> bool {
        self.local_row(coord.0).is_some() && self.local_col(coord.1).is_some()
    }

    /// All global coordinates of the table in raster order.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        self.row_ids
            .iter()
            .flat_map(move |&r| self.col_ids.iter().map(move |&c| (r, c)))
    }

    /// Selection of every cell of the table.
    pub fn full_selection(&self) -> CellSelection {
        CellSelection {
            columns: self.col_ids.iter().copied().collect(),
            cells: self.coords().collect(),
        }
    }

    /// Window covering the whole table.
    pub fn as_window(&self) -> Window<'_> {
        Window {
            table: self,
            origin_row: 0,
            origin_col: 0,
            height: self.n_rows(),
            width: self.n_cols(),
        }
    }

    /// Builds the bounding-rectangle subtable of `selection`: selected
    /// columns crossed with every row owning at least one selected cell.
    /// Intersection cells that were not individually selected are copied
    /// from `self` as well.
    pub fn materialize(&self, selection: &CellSelection) -> Result<Table, TableError> {
        if selection.columns.is_empty() {
            return Err(TableError::NoColumns);
        }
        let mut local_cols = Vec::with_capacity(selection.columns.len());
        for &col in &selection.columns {
            local_cols.push(self.local_col(col).ok_or(TableError::UnknownColumn(col))?);
        }
        let mut rows = BTreeSet::new();
        for &(row, col) in &selection.cells {
            if !self.contains((row, col)) {
                return Err(TableError::UnknownCell(row, col));
            }
            if !selection.columns.contains(&col) {
                return Err(TableError::CellOutsideColumns(row, col));
            }
            rows.insert(row);
        }
        // BTreeSet iteration keeps both axes in original order.
        let local_rows: Vec<usize> = rows
            .iter()
            .map(|&r| self.local_row(r).expect("checked above"))
            .collect();
        let headers = local_cols.iter().map(|&c| self.headers[c].clone()).collect();
        let cells = local_rows
            .iter()
            .map(|&r| local_cols.iter().map(|&c| self.cells[r][c].clone()).collect())
            .collect();
        Ok(Table {
            headers,
            cells,
            row_ids: rows.into_iter().collect(),
            col_ids: selection.columns.iter().copied().collect(),
        })
    }

    /// Pipe-delimited rendering used by the CLI.
    pub fn to_pipe_text(&self) -> String {
        let mut out = self.headers.join(" | ");
        for row in &self.cells {
            out.push('\n');
            out.push_str(&row.join(" | "));
        }
        out
    }
}

/// True iff the tables have identical provenance, headers and cell strings.
pub fn table_equals(a: &Table, b: &Table) -> bool {
    a == b
}

fn strictly_increasing(ids: &[usize]) -> bool {
    ids.windows(2).all(|pair| pair[0] < pair[1])
}

/// A view of at most `w x w` cells into a parent table.
///
/// `origin_row` / `origin_col` are positions in the parent's local grid;
/// global coordinates come from the parent's provenance ids.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    table: &'a Table,
    origin_row: usize,
    origin_col: usize,
    height: usize,
    width: usize,
}

impl<'a> Window<'a> {
    /// Panics if the rectangle does not fit inside `table`.
    pub fn new(
        table: &'a Table,
        origin_row: usize,
        origin_col: usize,
        height: usize,
        width: usize,
    ) -> Self {
        assert!(origin_row + height <= table.n_rows(), "window rows out of bounds");
        assert!(origin_col + width <= table.n_cols(), "window columns out of bounds");
        Self {
            table,
            origin_row,
            origin_col,
            height,
            width,
        }
    }

    pub fn table(&self) -> &'a Table {
        self.table
    }

    pub fn origin(&self) -> (usize, usize) {
        (self.origin_row, self.origin_col)
    }

    /// Origin expressed in global coordinates.
    pub fn global_origin(&self) -> Coord {
        (self.global_row(0), self.global_col(0))
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn parent_dims(&self) -> (usize, usize) {
        (self.table.n_rows(), self.table.n_cols())
    }

    pub fn headers(&self) -> &'a [String] {
        &self.table.headers[self.origin_col..self.origin_col + self.width]
    }

    pub fn row(&self, r: usize) -> &'a [String] {
        &self.table.cells[self.origin_row + r][self.origin_col..self.origin_col + self.width]
    }

    pub fn cell(&self, r: usize, c: usize) -> &'a str {
        &self.table.cells[self.origin_row + r][self.origin_col + c]
    }

    pub fn global_row(&self, r: usize) -> usize {
        self.table.row_ids[self.origin_row + r]
    }

    pub fn global_col(&self, c: usize) -> usize {
        self.table.col_ids[self.origin_col + c]
    }

    pub fn global_rows(&self) -> &'a [usize] {
        &self.table.row_ids[self.origin_row..self.origin_row + self.height]
    }

    pub fn global_cols(&self) -> &'a [usize] {
        &self.table.col_ids[self.origin_col..self.origin_col + self.width]
    }

    /// Window-local position of a global coordinate, if inside the window.
    pub fn locate(&self, (row, col): Coord) -> Option<(usize, usize)> {
        let r = self.global_rows().binary_search(&row).ok()?;
        let c = self.global_cols().binary_search(&col).ok()?;
        Some((r, c))
    }

    pub fn local_col_of(&self, global_col: usize) -> Option<usize> {
        self.global_cols().binary_search(&global_col).ok()
    }

    pub fn contains(&self, coord: Coord) -> bool {
        self.locate(coord).is_some()
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        self.global_rows()
            .iter()
            .flat_map(move |&r| self.global_cols().iter().map(move |&c| (r, c)))
    }

    /// Copies the window into a standalone table that keeps global provenance.
    pub fn to_table(&self) -> Table {
        Table {
            headers: self.headers().to_vec(),
            cells: (0..self.height).map(|r| self.row(r).to_vec()).collect(),
            row_ids: self.global_rows().to_vec(),
            col_ids: self.global_cols().to_vec(),
        }
    }
}

/// A set of selected global cells plus the set of columns it spans.
///
/// `columns` may be non-empty while `cells` is empty: that is a
/// headers-only selection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSelection {
    columns: BTreeSet<usize>,
    cells: BTreeSet<Coord>,
}

impl CellSelection {
    pub fn new(columns: BTreeSet<usize>, cells: BTreeSet<Coord>) -> Result<Self, TableError> {
        if let Some(&(r, c)) = cells.iter().find(|(_, c)| !columns.contains(c)) {
            return Err(TableError::CellOutsideColumns(r, c));
        }
        Ok(Self { columns, cells })
    }

    /// Selection whose columns are exactly those owning a selected cell.
    pub fn from_cells(cells: impl IntoIterator<Item = Coord>) -> Self {
        let cells: BTreeSet<Coord> = cells.into_iter().collect();
        let columns = cells.iter().map(|&(_, c)| c).collect();
        Self { columns, cells }
    }

    pub fn headers_only(columns: impl IntoIterator<Item = usize>) -> Self {
        Self {
            columns: columns.into_iter().collect(),
            cells: BTreeSet::new(),
        }
    }

    pub fn columns(&self) -> &BTreeSet<usize> {
        &self.columns
    }

    pub fn cells(&self) -> &BTreeSet<Coord> {
        &self.cells
    }

    /// Distinct rows owning at least one selected cell.
    pub fn rows(&self) -> BTreeSet<usize> {
        self.cells.iter().map(|&(r, _)| r).collect()
    }

    /// No columns (and therefore no cells).
    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn is_headers_only(&self) -> bool {
        !self.columns.is_empty() && self.cells.is_empty()
    }

    pub fn insert_column(&mut self, col: usize) {
        self.columns.insert(col);
    }

    pub fn insert_cell(&mut self, coord: Coord) {
        self.columns.insert(coord.1);
        self.cells.insert(coord);
    }

    pub fn extend(&mut self, other: &CellSelection) {
        self.columns.extend(other.columns.iter().copied());
        self.cells.extend(other.cells.iter().copied());
    }

    /// Drops every column and cell that falls outside `window`.
    pub fn restrict_to(&self, window: &Window<'_>) -> CellSelection {
        let cols = window.global_cols();
        CellSelection {
            columns: self
                .columns
                .iter()
                .copied()
                .filter(|c| cols.binary_search(c).is_ok())
                .collect(),
            cells: self
                .cells
                .iter()
                .copied()
                .filter(|&coord| window.contains(coord))
                .collect(),
        }
    }

    /// True when the cells are exactly `rows(cells) x columns`.
    pub fn is_rectangular(&self) -> bool {
        let rows = self.rows();
        rows.len() * self.columns.len() == self.cells.len()
    }
}

/// A natural-language question; non-empty after trimming.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Question(String);

impl Question {
    pub fn new(text: impl Into<String>) -> Result<Self, TableError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(TableError::EmptyQuestion);
        }
        Ok(Self(text))
    }

    pub fn text(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Question {
    type Error = TableError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Question> for String {
    fn from(q: Question) -> Self {
        q.0
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
