//! Univariate polynomials over a tabled field, used to count roots of the
//! last coordinate during point enumeration.

use super::tables::{Fe, FieldTables, ONE, ZERO};

/// Ascending coefficients, trailing zeros trimmed.
pub type UniPoly = Vec<Fe>;

#[inline]
pub fn trim(f: &mut UniPoly) {
    while f.last() == Some(&ZERO) {
        f.pop();
    }
}

fn make_monic(t: &FieldTables, f: &mut UniPoly) {
    if let Some(&l) = f.last() {
        let li = t.inv(l);
        for c in f.iter_mut() {
            *c = t.mul(*c, li);
        }
    }
}

/// Remainder of `f` modulo monic `m`, in place.
fn rem_monic(t: &FieldTables, f: &mut UniPoly, m: &[Fe]) {
    let dm = m.len() - 1;
    trim(f);
    while f.len() > dm {
        let top = f.len() - 1;
        let c = f[top];
        if c != ZERO {
            let nc = t.neg(c);
            for i in 0..dm {
                let idx = top - dm + i;
                f[idx] = t.add(f[idx], t.mul(nc, m[i]));
            }
        }
        f.pop();
        trim(f);
    }
}

fn rem(t: &FieldTables, f: &[Fe], g: &[Fe]) -> UniPoly {
    let mut m = g.to_vec();
    make_monic(t, &mut m);
    let mut r = f.to_vec();
    rem_monic(t, &mut r, &m);
    r
}

pub fn gcd(t: &FieldTables, a: &[Fe], b: &[Fe]) -> UniPoly {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(t, &a, &b);
        a = b;
        b = r;
    }
    make_monic(t, &mut a);
    a
}

fn mulmod(t: &FieldTables, a: &[Fe], b: &[Fe], m: &[Fe]) -> UniPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = t.add(out[i + j], t.mul(x, y));
        }
    }
    rem_monic(t, &mut out, m);
    out
}

/// Number of distinct roots of a nonzero `f` in the field.
pub fn count_distinct_roots(t: &FieldTables, f: &[Fe]) -> u64 {
    let mut f = f.to_vec();
    trim(&mut f);
    debug_assert!(!f.is_empty(), "zero polynomial has every element as a root");
    match f.len() {
        0 => t.order(),
        1 => 0,
        2 => 1,
        3 if t.p() != 2 => {
            // b^2 - 4ac
            let disc = t.sub(t.mul(f[1], f[1]), t.mul(t.from_int(4), t.mul(f[2], f[0])));
            match t.quadratic_character(disc) {
                0 => 1,
                1 => 2,
                _ => 0,
            }
        }
        _ => {
            make_monic(t, &mut f);
            // x^Q mod f by square-and-multiply
            let mut acc: UniPoly = vec![ONE];
            let mut base: UniPoly = vec![ZERO, ONE];
            rem_monic(t, &mut base, &f);
            let mut e = t.order();
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(t, &acc, &base, &f);
                }
                e >>= 1;
                if e > 0 {
                    base = mulmod(t, &base, &base, &f);
                }
            }
            // acc - x
            if acc.len() < 2 {
                acc.resize(2, ZERO);
            }
            acc[1] = t.sub(acc[1], ONE);
            trim(&mut acc);
            (gcd(t, &f, &acc).len() - 1) as u64
        }
    }
}
