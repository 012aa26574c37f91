//! Iterative windowed subtable selection for table question answering.
//!
//! A table is cut into small overlapping windows, a selector picks the
//! relevant cells of each window, the picks are unioned into a smaller
//! table, and the process repeats until the table stops changing.

pub mod condition;
pub mod corpus;
pub mod datagen;
pub mod eval;
pub mod fixtures;
pub mod pipeline;
pub mod repr;
pub mod selector;
pub mod table;
pub mod window;

pub use condition::{condition_satisfied, Annotation, Condition, Op};
pub use pipeline::{select_subtable, PipelineConfig, PipelineOutcome, PipelineTrace};
pub use selector::{OracleSelector, RemoteSelector, RemoteSelectorConfig, Selector};
pub use table::{table_equals, CellSelection, Coord, Question, Table, Window};
pub use window::{divide_table, WindowConfig};
