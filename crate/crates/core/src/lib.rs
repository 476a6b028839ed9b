//! Tableau proof search for free logics with definite descriptions.

pub mod calculus;
pub mod cli;
pub mod countermodel;
pub mod engine;
pub mod logic;
pub mod oracle;
pub mod random;
pub mod semantics;
pub mod syntax;

pub use logic::Logic;
