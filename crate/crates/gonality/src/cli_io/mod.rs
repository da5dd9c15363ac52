//! Text formats, CLI driver, JSON reports, DOT export, and the bundled
//! example corpus.

pub mod cli;
pub mod corpus;
pub mod dot;
pub mod formats;

pub use cli::run;
pub use corpus::{corpus_entry, corpus_names, CorpusEntry};
pub use dot::{export_dot_certificate, export_dot_model};
pub use formats::{
    format_point, parse_divisor, parse_divisor_expr, parse_graph, parse_morphism, parse_point,
    serialize_divisor, serialize_graph, serialize_morphism, ParseError,
};
