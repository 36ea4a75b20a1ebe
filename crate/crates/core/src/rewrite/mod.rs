//! Clause-level rewriting: expansion, reduction, (non-)equality
//! elimination and (extended) subsumption.

mod reduce;
mod subsume;

pub(crate) use reduce::replace_term;

pub use reduce::{
    eliminate_equality, eliminate_nonequality, expand, reduce, reduce_plain, reduce_with,
    reduces_to_true, Reducer, RewriteError, RewriteTrace, Site, TraceStep,
};
pub use subsume::{
    body_subsumes, extended_subsumes, extended_subsumes_with, strictly_extended_subsumes, subsumes,
    Subsumption,
};
