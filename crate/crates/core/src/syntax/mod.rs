//! Concrete syntax: lexer, parser, safety checks and printer.

mod ast;
mod lexer;
mod parser;
mod print;
pub mod safety;

use thiserror::Error;

pub use ast::{Definition, Rule, Schema, Update, UpdateEntry};
pub use parser::{
    check_update, parse_denial, parse_denial_unchecked, parse_facts, parse_schema, parse_theory,
    parse_update,
};
pub use print::{
    canonical_rule, canonical_schema, print_definition, print_denial, print_listing, print_rule,
    print_schema, print_subst, print_theory, print_update,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("predicate {pred} used with arity {first} and {second}")]
    Arity {
        pred: String,
        first: usize,
        second: usize,
    },
    #[error("{what} is not range restricted: variable {var} is unbound")]
    Unsafe { what: String, var: String },
    #[error("predicate {0} is both defined by rules and given as facts")]
    KindClash(String),
    #[error("cannot update intensional predicate {0}")]
    IntensionalUpdate(String),
    #[error("update of unknown predicate {0}")]
    UnknownPredicate(String),
}
