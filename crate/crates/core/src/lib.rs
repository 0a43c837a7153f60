//! Reversible typed-feature-structure grammars.
//!
//! Grammars in an ALE-like syntax are compiled to code for a small abstract
//! machine. One bottom-up chart interpreter runs that code for parsing; an
//! inverted copy of the grammar runs on the same interpreter for
//! generation.

pub mod artifact;
pub mod chart;
pub mod debug;
pub mod frontend;
pub mod fs;
pub mod grammar;
pub mod inversion;
pub mod machine;
pub mod signature;
