pub mod datagen;
pub mod eval;
pub mod select;
pub mod windows;
