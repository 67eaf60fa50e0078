//! Combinatorial model of infinite connected sums with prescribed volume growth.
//!
//! The pipeline runs growth table → canonical form → growth tree → piece
//! assembly → discrete growth `z` → metric-graph ball volumes `w`, and
//! certifies that each stage stays in the growth class of the input.

pub mod assembly;
pub mod catalog;
pub mod cli;
pub mod growth;
pub mod io;
pub mod pieces;
pub mod pipeline;
pub mod simulate;
pub mod tree;
