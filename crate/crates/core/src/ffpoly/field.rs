//! Finite fields `F_{p^a}` in a polynomial basis.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::is_prime;
use crate::error::{Error, Result};

/// Dense polynomials over `F_p`, ascending coefficients.
pub(crate) mod fp_poly {
    pub fn trim(mut f: Vec<u64>) -> Vec<u64> {
        while f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    pub fn inv_mod(a: u64, p: u64) -> u64 {
        let mut r = 1u64;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    pub fn rem(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
        let g = trim(g.to_vec());
        let mut r = trim(f.to_vec());
        let dg = g.len() - 1;
        let lead_inv = inv_mod(g[dg], p);
        while r.len() > dg {
            let dr = r.len() - 1;
            let c = r[dr] * lead_inv % p;
            for i in 0..=dg {
                let idx = dr - dg + i;
                r[idx] = (r[idx] + p - c * g[i] % p) % p;
            }
            r = trim(r);
        }
        r
    }

    pub fn mul(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
        if f.is_empty() || g.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; f.len() + g.len() - 1];
        for (i, a) in f.iter().enumerate() {
            for (j, b) in g.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % p;
            }
        }
        trim(out)
    }

    pub fn mulmod(f: &[u64], g: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        rem(&mul(f, g, p), m, p)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        if let Some(&l) = a.last() {
            let li = inv_mod(l, p);
            a.iter_mut().for_each(|c| *c = *c * li % p);
        }
        a
    }

    pub fn sub(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
        let n = f.len().max(g.len());
        let out = (0..n)
            .map(|i| {
                let a = f.get(i).copied().unwrap_or(0);
                let b = g.get(i).copied().unwrap_or(0);
                (a + p - b) % p
            })
            .collect();
        trim(out)
    }

    /// `x^(p^k) mod m`.
    pub fn x_pow_p_pow(k: u32, m: &[u64], p: u64) -> Vec<u64> {
        let mut cur = rem(&[0, 1], m, p);
        for _ in 0..k {
            // raise to the p-th power by square-and-multiply
            let mut acc = vec![1u64];
            let mut base = cur.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &base, m, p);
                }
                base = mulmod(&base, &base, m, p);
                e >>= 1;
            }
            cur = acc;
        }
        cur
    }

    /// Rabin-style test: `f` monic of degree `n` is irreducible iff
    /// `gcd(f, x^(p^i) - x) = 1` for all `i <= n/2`.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let f = trim(f.to_vec());
        let n = f.len().saturating_sub(1);
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        for i in 1..=(n / 2) as u32 {
            let xp = x_pow_p_pow(i, &f, p);
            let h = sub(&xp, &[0, 1], p);
            if gcd(&f, &h, p).len() > 1 {
                return false;
            }
        }
        true
    }
}

/// The field `F_{p^a}` realised as `F_p[x]/(modulus)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldDescriptor {
    p: u64,
    a: u32,
    modulus: Vec<u64>,
}

impl fmt::Debug for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.p, self.a, self.modulus)
    }
}

fn descriptor_cache() -> &'static Mutex<HashMap<(u64, u32), Arc<FieldDescriptor>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<FieldDescriptor>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Lexicographically least monic irreducible polynomial of degree `a` over
/// `F_p`, comparing coefficients from `x^(a-1)` down to the constant term.
pub fn least_irreducible(p: u64, a: u32) -> Vec<u64> {
    let count = p.pow(a);
    for code in 0..count {
        let mut coeffs = Vec::with_capacity(a as usize + 1);
        let mut c = code;
        for _ in 0..a {
            coeffs.push(c % p);
            c /= p;
        }
        coeffs.push(1);
        if fp_poly::is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Builds (or fetches from cache) the canonical descriptor for `F_{p^a}`.
pub fn make_extension_field(p: u64, a: u32) -> Result<Arc<FieldDescriptor>> {
    if !is_prime(p) {
        return Err(Error::input(format!("{p} is not prime")));
    }
    if a == 0 {
        return Err(Error::input("extension degree must be at least 1"));
    }
    if (p as f64).powi(a as i32) > 4.0e18 {
        return Err(Error::input(format!("field F_{p}^{a} is too large")));
    }
    let mut cache = descriptor_cache().lock().unwrap();
    if let Some(d) = cache.get(&(p, a)) {
        return Ok(d.clone());
    }
    let d = Arc::new(FieldDescriptor {
        p,
        a,
        modulus: least_irreducible(p, a),
    });
    cache.insert((p, a), d.clone());
    Ok(d)
}

impl FieldDescriptor {
    /// Descriptor with an explicit modulus; irreducibility is verified.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::input(format!("{p} is not prime")));
        }
        let modulus = fp_poly::trim(modulus.into_iter().map(|c| c % p).collect());
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::input("modulus must be monic of degree >= 1"));
        }
        if !fp_poly::is_irreducible(&modulus, p) {
            return Err(Error::input(format!(
                "modulus {modulus:?} is reducible over F_{p}"
            )));
        }
        Ok(FieldDescriptor {
            p,
            a: (modulus.len() - 1) as u32,
            modulus,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.a
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.a)
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement {
            field: self.clone(),
            coords: vec![0; self.a as usize],
        }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> FieldElement {
        let mut e = self.zero();
        e.coords[0] = n.rem_euclid(self.p as i64) as u64;
        e
    }

    /// The class of `x` in `F_p[x]/(modulus)`.
    pub fn generator(self: &Arc<Self>) -> FieldElement {
        let mut v = vec![0, 1];
        v = fp_poly::rem(&v, &self.modulus, self.p);
        self.from_poly(&v)
    }

    fn from_poly(self: &Arc<Self>, v: &[u64]) -> FieldElement {
        let mut coords = vec![0; self.a as usize];
        for (i, c) in v.iter().enumerate() {
            coords[i] = *c;
        }
        FieldElement {
            field: self.clone(),
            coords,
        }
    }

    /// Element whose base-`p` digits (constant coordinate least significant)
    /// are `index`.
    pub fn element_from_index(self: &Arc<Self>, mut index: u64) -> FieldElement {
        let mut e = self.zero();
        for c in e.coords.iter_mut() {
            *c = index % self.p;
            index /= self.p;
        }
        e
    }

    /// All elements in index order.
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |i| self.element_from_index(i))
    }
}

/// An element of a [`FieldDescriptor`] in the polynomial basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Arc<FieldDescriptor>,
    coords: Vec<u64>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl FieldElement {
    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn index(&self) -> u64 {
        self.coords
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.field.p + c)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_same(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "field mismatch"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let p = self.field.p;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a + b) % p)
            .collect();
        FieldElement {
            field: self.field.clone(),
            coords,
        }
    }

    pub fn neg(&self) -> Self {
        let p = self.field.p;
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| (p - c) % p).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same(other);
        let p = self.field.p;
        let prod = fp_poly::mulmod(
            &fp_poly::trim(self.coords.clone()),
            &fp_poly::trim(other.coords.clone()),
            &self.field.modulus,
            p,
        );
        self.field.from_poly(&prod)
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(self.pow(self.field.order() as u128 - 2))
    }

    /// `x^(q^steps)` where `q = p^base_degree` is the size of the ground field.
    pub fn frobenius(&self, base_degree: u32, steps: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..(base_degree as u64 * steps as u64) {
            out = out.pow(self.field.p as u128);
        }
        out
    }
}

/// The q-th power Frobenius `σ`, iterated `steps` times, with `q = p^base_degree`.
pub fn frobenius_map(e: &FieldElement, base_degree: u32, steps: u32) -> FieldElement {
    e.frobenius(base_degree, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_irreducible_examples() {
        assert_eq!(least_irreducible(2, 3), vec![1, 1, 0, 1]);
        assert_eq!(least_irreducible(5, 1), vec![0, 1]);
        // x^2 + 1 over F_3
        assert_eq!(least_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
    }

    #[test]
    fn f8_by_enumeration() {
        // independent oracle: enumerate all monic cubics in the stated order and
        // test for roots (a cubic is irreducible iff it has no root in F_2).
        let mut found = None;
        for code in 0..4u64 {
            let c0 = code % 2;
            let c1 = (code / 2) % 2;
            let c2 = 0; // codes below 4 have zero x^2 coefficient
            let has_root = (0..2u64).any(|x| (x * x * x + c2 * x * x + c1 * x + c0) % 2 == 0);
            if !has_root {
                found = Some(vec![c0, c1, c2, 1]);
                break;
            }
        }
        let f = make_extension_field(2, 3).unwrap();
        assert_eq!(found.unwrap(), f.modulus());
    }

    #[test]
    fn non_prime_rejected() {
        assert!(make_extension_field(6, 1).is_err());
        assert!(make_extension_field(5, 0).is_err());
    }

    #[test]
    fn f9_cardinality_and_fermat() {
        let f = make_extension_field(3, 2).unwrap();
        let all: Vec<_> = f.elements().collect();
        assert_eq!(all.len(), 9);
        let distinct: std::collections::HashSet<_> = all.iter().map(|e| e.index()).collect();
        assert_eq!(distinct.len(), 9);
        for x in &all {
            assert_eq!(x.pow(9), *x);
        }
    }

    #[test]
    fn frobenius_examples() {
        let f = make_extension_field(3, 2).unwrap();
        let g = f.generator();
        let mut cubed = g.clone();
        cubed = cubed.mul(&g).mul(&g);
        assert_eq!(frobenius_map(&g, 1, 1), cubed);
        for x in f.elements() {
            assert_eq!(frobenius_map(&x, 1, 2), x);
        }
        let f5 = make_extension_field(5, 1).unwrap();
        for x in f5.elements() {
            assert_eq!(frobenius_map(&x, 1, 1), x);
        }
    }

    #[test]
    fn explicit_modulus_checked() {
        assert!(FieldDescriptor::with_modulus(2, vec![1, 0, 1]).is_err());
        assert!(FieldDescriptor::with_modulus(2, vec![1, 1, 1]).is_ok());
    }
}
