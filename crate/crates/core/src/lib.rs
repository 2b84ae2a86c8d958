//! Ordinal notations, witness pairs for limit-computable sets, and the
//! constructions that produce them from term certificates and infinitary
//! derivations.

pub mod cli;
pub mod corpus;
pub mod ershov;
pub mod herbrand;
pub mod limr;
pub mod omega_deriv;
pub mod ordinal;
pub mod spec_lang;
