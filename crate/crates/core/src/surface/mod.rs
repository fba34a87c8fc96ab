//! Concrete syntax: lexing, parsing, elaboration and printing.

pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod pretty;
