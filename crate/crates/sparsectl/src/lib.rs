//! JSON formats, text rendering and the `sparsectl` command line built on
//! [`sparsectl_core`].

pub mod cli;
pub mod format;
pub mod render;

pub use format::{
    load_system, parse_system, parse_vector, system_to_json, FormatError, SolutionJson,
};
