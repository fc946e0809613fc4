//! The linear quantum lambda-calculus: syntax, linear typing, a token
//! machine that runs typing derivations and extracts circuits, an equational
//! reference semantics, and the translation into multiplicative linear logic.

pub mod equational;
pub mod machine;
pub mod mll;
pub mod quantum;
pub mod syntax;
pub mod typing;
