//! The per-window selector contract and its implementations.

mod oracle;
mod remote;

use thiserror::Error;

use crate::table::{CellSelection, Question, Window};
use crate::condition::Annotation;

pub use oracle::{oracle_select, OracleSelector};
pub use remote::{RemoteSelector, RemoteSelectorConfig};

#[derive(Debug, Error)]
pub enum SelectorError {
    #[error("the oracle selector needs an annotation")]
    MissingAnnotation,
    #[error("selector unavailable after {attempts} attempt(s): {reason}")]
    Unavailable { attempts: usize, reason: String },
    #[error("invalid selector configuration: {0}")]
    Config(String),
}

/// One window's selection plus the number of parse warnings it produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WindowSelection {
    pub selection: CellSelection,
    pub warnings: usize,
}

/// Maps a window (and question) to a subwindow.
///
/// Implementations must be deterministic and callable from several threads
/// at once. `annotation` is only consulted by the oracle.
pub trait Selector: Send + Sync {
    fn select(
        &self,
        window: &Window<'_>,
        question: &Question,
        annotation: Option<&Annotation>,
    ) -> Result<WindowSelection, SelectorError>;
}

impl<S: Selector + ?Sized> Selector for &S {
    fn select(
        &self,
        window: &Window<'_>,
        question: &Question,
        annotation: Option<&Annotation>,
    ) -> Result<WindowSelection, SelectorError> {
        (**self).select(window, question, annotation)
    }
}

impl<S: Selector + ?Sized> Selector for Box<S> {
    fn select(
        &self,
        window: &Window<'_>,
        question: &Question,
        annotation: Option<&Annotation>,
    ) -> Result<WindowSelection, SelectorError> {
        (**self).select(window, question, annotation)
    }
}
