//! Simplified integrity checking for deductive databases.
//!
//! Given a schema of rules and (extended) denial constraints and a
//! parametric update, [`simplify::simp`] produces a conditional weakest
//! precondition: a theory to check before the update which, on a
//! consistent database, holds iff the constraints hold after it. The
//! [`oracle`] module checks such claims by brute force on small domains.

pub mod analysis;
pub mod kernel;
pub mod oracle;
pub mod resolution;
pub mod rewrite;
pub mod simplify;
pub mod syntax;
pub mod transform;
