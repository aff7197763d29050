//! Moment L-functions of the Legendre family over F_5 at the largest
//! truncation that fits a single-core test run.

use std::path::Path;

use num_rational::Rational64;
use zetakit::family::{fiber_table, moment_l_rational, moment_l_series, FamilyConfig};
use zetakit::input::parse_family;
use zetakit::ratfun::RationalFunctionZ;

fn legendre() -> zetakit::family::FamilyDescriptor {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/legendre_f5.fam");
    parse_family(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn second_moment_at_seven() {
    let f = legendre();
    let cfg = FamilyConfig { guard: 3, budget: 1 << 30 };
    let table = fiber_table(&f, 7, &cfg).unwrap();
    let r = moment_l_rational(&f, &table, 2, 7, (2, 2), 3).unwrap();
    // (1 - T)(1 - 125T) / ((1 - 5T)(1 - 25T))
    let want = RationalFunctionZ::from_i64(&[1, -126, 125], &[1, -30, 125]).unwrap();
    assert_eq!(r.rational, want);
    assert_eq!(r.rational.expand(7), moment_l_series(&table, 2, 7).unwrap().series);
    let top = Rational64::from_integer(3);
    assert!(r.weights.rows.keys().all(|s| *s >= Rational64::from_integer(0) && *s <= top));
}

#[test]
fn third_moment_needs_more_terms() {
    // The third moment has irreducible factors beyond the reach of B = 6.
    let f = legendre();
    let table = fiber_table(&f, 6, &FamilyConfig::default()).unwrap();
    let err = moment_l_rational(&f, &table, 3, 6, (2, 1), 3).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}
