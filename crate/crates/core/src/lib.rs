//! Rule-of-thumb matching over AMR trees.
//!
//! Sentences arrive as Penman AMR with token-aligned embeddings. Trees are
//! expanded into merged variants, converted to first-order logic, and a
//! resolution prover with similarity-gated unification decides whether a
//! rule's verdict follows from a situation.

pub mod amr;
pub mod harness;
pub mod logic;
pub mod merge;
pub mod prover;
pub mod similarity;
