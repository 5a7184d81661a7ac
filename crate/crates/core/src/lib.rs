//! Constraint Handling Rules toolchain: parse CHR programs, run them under
//! the refined operational semantics, instrument them so that every store
//! change is reported, and turn the resulting event log into a Jawaa
//! animation script driven by declarative annotations.

pub mod syntax;
pub mod normal_form;
pub mod engine;
pub mod transformer;
pub mod annotations;
pub mod animator;
pub mod cli;
