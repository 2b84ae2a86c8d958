//! Nested limits and the least-tuple principle.

mod chain;
pub mod coding;
mod stabilize;

pub use chain::{brute_lex_min, lex_chain, nested_limit, LexChain, LexChainState, LimrError, NestedLimit};
pub use coding::{decode_tuple, encode_tuple, lex_compare, CodingError};
pub use stabilize::{component, locator_slot_names, stabilization_search, Stabilization, StabilizeError, ThetaData};
