pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod oracle;
pub mod output;
pub mod field;
pub mod kernel;
pub mod multiplier;
pub mod quadrature;
pub mod spherical;
pub mod symbol_poly;
