//! Kernel for a nullary internally parametric type theory.

pub mod datatypes;
pub mod diagnostic;
pub mod eval;
pub mod freshness;
pub mod signature;
pub mod stdlib;
pub mod surface;
pub mod syntax;
pub mod telescope;
pub mod typecheck;

pub use diagnostic::{Diagnostic, ErrorCode, Span};
pub use eval::{Machine, Rule, Strategy, TraceStep};
pub use signature::Signature;
pub use syntax::Term;
pub use telescope::{Entry, Telescope};
