//! Exact zeta functions of varieties over finite fields, their slope
//! decompositions, moment and pure-slope L-functions of families, and
//! cycle-counting zeta identities.

pub mod arith;
pub mod cli;
pub mod count;
pub mod cycles;
pub mod error;
pub mod family;
pub mod input;
pub mod ffpoly;
pub mod ratfun;
pub mod series;
pub mod slope;

pub use error::{Error, Result};
