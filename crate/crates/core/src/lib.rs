//! Consistent query answering for path queries under primary keys.
//!
//! A path query is a word over relation names; an instance is a set of
//! binary facts whose first position is the key. The crate classifies
//! words by the complexity of deciding whether every repair contains a
//! path with that trace, and implements a procedure per class.

pub mod automata;
pub mod error;
pub mod genqueries;
pub mod instance;
pub mod oracle;
pub mod reductions;
pub mod sample;
pub mod solvers;
pub mod words;

pub use error::{Error, ParseError, Result};
pub use instance::{Constant, Fact, Instance};
pub use words::{classify, Classification, Tier, Word};
