//! Finite field arithmetic and multivariate integer polynomials.
//!
//! Two representations coexist: [`FieldElement`] stores polynomial-basis
//! coordinates and is the reference implementation; [`tables::FieldTables`]
//! stores discrete logarithms and is what the point counter runs on. Both are
//! derived from the same canonical modulus, so element indices agree.

mod field;
mod poly;
pub mod tables;
pub mod unipoly;

pub use field::{frobenius_map, least_irreducible, make_extension_field, FieldDescriptor, FieldElement};
pub use poly::{evaluate_polynomial, parse_polynomial, parse_polynomial_at, var_list, MultiPoly};
