//! Stride-1 sliding windows with edge clamping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{Table, Window};

pub const DEFAULT_WINDOW: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error("cannot divide a table with {rows} rows and {cols} columns")]
    EmptyInput { rows: usize, cols: usize },
    #[error("window size must be at least 1")]
    ZeroSize,
}

/// Window shape. `size` bounds rows and, unless `span_all_columns` is set,
/// columns too. The full-width variant is the `4 x n` ablation shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub size: usize,
    #[serde(default)]
    pub span_all_columns: bool,
}

impl WindowConfig {
    pub fn square(size: usize) -> Result<Self, WindowError> {
        if size == 0 {
            return Err(WindowError::ZeroSize);
        }
        Ok(Self {
            size,
            span_all_columns: false,
        })
    }

    pub fn full_width(rows: usize) -> Result<Self, WindowError> {
        Ok(Self {
            span_all_columns: true,
            ..Self::square(rows)?
        })
    }

    fn extent(&self, rows: usize, cols: usize) -> (usize, usize) {
        let height = self.size.min(rows);
        let width = if self.span_all_columns {
            cols
        } else {
            self.size.min(cols)
        };
        (height, width)
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            size: DEFAULT_WINDOW,
            span_all_columns: false,
        }
    }
}

/// Enumerates every distinct clamped window origin in raster order.
///
/// Origins past `R - w` clamp back to `R - w` and are therefore already
/// present, so each axis contributes `max(R - w, 0) + 1` origins.
pub fn divide_table<'a>(table: &'a Table, cfg: WindowConfig) -> Result<Vec<Window<'a>>, WindowError> {
    if cfg.size == 0 {
        return Err(WindowError::ZeroSize);
    }
    let (rows, cols) = (table.n_rows(), table.n_cols());
    if rows == 0 || cols == 0 {
        return Err(WindowError::EmptyInput { rows, cols });
    }
    let (height, width) = cfg.extent(rows, cols);
    let row_origins = rows - height + 1;
    let col_origins = cols - width + 1;
    let mut windows = Vec::with_capacity(row_origins * col_origins);
    for i in 0..row_origins {
        for j in 0..col_origins {
            windows.push(Window::new(table, i, j, height, width));
        }
    }
    Ok(windows)
}
