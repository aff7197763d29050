//! Logarithm / Zech-logarithm tables for fast arithmetic in small fields.
//!
//! Elements are stored as discrete logarithms to a fixed primitive element,
//! with [`ZERO`] as the sentinel for the additive identity. Every table is
//! derived from the canonical [`FieldDescriptor`], so element indices agree
//! with [`FieldElement::index`](super::FieldElement::index).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::field::{fp_poly, make_extension_field, FieldDescriptor};
use crate::arith::prime_factors;
use crate::error::{Error, Result};

/// A field element in logarithmic form.
pub type Fe = u32;

/// Sentinel log for the zero element.
pub const ZERO: Fe = u32::MAX;
/// Log of the multiplicative identity.
pub const ONE: Fe = 0;

/// Largest field order for which tables are built.
pub const MAX_TABLE_ORDER: u64 = 1 << 22;

pub struct FieldTables {
    p: u64,
    degree: u32,
    order: u64,
    qm1: u64,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    neg_one: Fe,
    descriptor: Arc<FieldDescriptor>,
}

impl std::fmt::Debug for FieldTables {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FieldTables(F_{}^{})", self.p, self.degree)
    }
}

type TableCache = Mutex<HashMap<(u64, u32), Arc<OnceLock<Arc<FieldTables>>>>>;

fn table_cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared tables for `F_{p^degree}`; built once per process.
pub fn field_tables(p: u64, degree: u32) -> Result<Arc<FieldTables>> {
    let order = (p as u128).checked_pow(degree).unwrap_or(u128::MAX);
    if order > MAX_TABLE_ORDER as u128 {
        return Err(Error::Budget {
            needed: order,
            budget: MAX_TABLE_ORDER,
            context: Some(format!("field F_{p}^{degree} exceeds the table size limit")),
        });
    }
    let cell = {
        let mut cache = table_cache().lock().unwrap();
        cache
            .entry((p, degree))
            .or_insert_with(|| Arc::new(OnceLock::new()))
            .clone()
    };
    let desc = make_extension_field(p, degree)?;
    Ok(cell.get_or_init(|| Arc::new(FieldTables::build(desc))).clone())
}

fn digits_of(mut idx: u64, p: u64, n: usize, out: &mut [u64]) {
    for d in out.iter_mut().take(n) {
        *d = idx % p;
        idx /= p;
    }
}

fn index_of(digits: &[u64], p: u64) -> u64 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn find_primitive(desc: &FieldDescriptor) -> Vec<u64> {
    let p = desc.p();
    let n = desc.degree() as usize;
    let qm1 = desc.order() - 1;
    let factors = prime_factors(qm1);
    let m = desc.modulus();
    let powmod = |base: &[u64], mut e: u64| {
        let mut acc = vec![1u64];
        let mut b = base.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = fp_poly::mulmod(&acc, &b, m, p);
            }
            b = fp_poly::mulmod(&b, &b, m, p);
            e >>= 1;
        }
        acc
    };
    let mut digits = vec![0u64; n];
    for idx in 1..desc.order() {
        digits_of(idx, p, n, &mut digits);
        let cand = fp_poly::trim(digits.clone());
        if qm1 == 1 || factors.iter().all(|r| powmod(&cand, qm1 / r) != vec![1]) {
            return cand;
        }
    }
    unreachable!("multiplicative group of a finite field is cyclic")
}

impl FieldTables {
    fn build(desc: Arc<FieldDescriptor>) -> Self {
        let p = desc.p();
        let n = desc.degree() as usize;
        let order = desc.order();
        let qm1 = order - 1;
        let gen = find_primitive(&desc);
        let m = desc.modulus().to_vec();
        let mut exp = vec![0u32; qm1 as usize];
        let mut log = vec![ZERO; order as usize];
        let mut cur = vec![0u64; n];
        cur[0] = 1;
        let mut buf = vec![0u64; n + gen.len()];
        for i in 0..qm1 as usize {
            let idx = index_of(&cur, p);
            exp[i] = idx as u32;
            log[idx as usize] = i as u32;
            // cur *= gen (mod m), with gen of low degree
            buf.iter_mut().for_each(|b| *b = 0);
            for (j, &g) in gen.iter().enumerate() {
                if g == 0 {
                    continue;
                }
                for (k, &c) in cur.iter().enumerate() {
                    buf[j + k] = (buf[j + k] + g * c) % p;
                }
            }
            for top in (n..buf.len()).rev() {
                let c = buf[top];
                if c != 0 {
                    for (k, &mk) in m.iter().enumerate().take(n) {
                        let t = top - n + k;
                        buf[t] = (buf[t] + (p - c) * mk) % p;
                    }
                    buf[top] = 0;
                }
            }
            cur.copy_from_slice(&buf[..n]);
        }
        let mut zech = vec![ZERO; qm1 as usize];
        for i in 0..qm1 as usize {
            let idx = exp[i] as u64;
            let idx1 = if idx % p == p - 1 { idx - (p - 1) } else { idx + 1 };
            zech[i] = log[idx1 as usize];
        }
        let neg_one = if p == 2 { 0 } else { (qm1 / 2) as u32 };
        FieldTables {
            p,
            degree: n as u32,
            order,
            qm1,
            exp,
            log,
            zech,
            neg_one,
            descriptor: desc,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn descriptor(&self) -> &Arc<FieldDescriptor> {
        &self.descriptor
    }

    #[inline]
    pub fn from_index(&self, idx: u64) -> Fe {
        self.log[idx as usize]
    }

    #[inline]
    pub fn to_index(&self, x: Fe) -> u64 {
        if x == ZERO {
            0
        } else {
            self.exp[x as usize] as u64
        }
    }

    #[inline]
    pub fn from_int(&self, n: i64) -> Fe {
        self.log[n.rem_euclid(self.p as i64) as usize]
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a == ZERO || b == ZERO {
            return ZERO;
        }
        let s = a as u64 + b as u64;
        (if s >= self.qm1 { s - self.qm1 } else { s }) as Fe
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if a == ZERO {
            return b;
        }
        if b == ZERO {
            return a;
        }
        let d = if b >= a { b - a } else { (b as u64 + self.qm1 - a as u64) as u32 };
        let z = self.zech[d as usize];
        if z == ZERO {
            ZERO
        } else {
            self.mul(a, z)
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.mul(a, self.neg_one)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn inv(&self, a: Fe) -> Fe {
        assert!(a != ZERO, "inverse of zero");
        ((self.qm1 - a as u64) % self.qm1) as Fe
    }

    #[inline]
    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return ONE;
        }
        if a == ZERO {
            return ZERO;
        }
        ((a as u128 * e as u128) % self.qm1 as u128) as Fe
    }

    /// `x^(p^j)`.
    #[inline]
    pub fn frob_p(&self, a: Fe, j: u32) -> Fe {
        if a == ZERO {
            return ZERO;
        }
        let mut e = 1u128;
        for _ in 0..(j % self.degree.max(1)) {
            e = e * self.p as u128 % self.qm1 as u128;
        }
        ((a as u128 * e) % self.qm1 as u128) as Fe
    }

    /// Quadratic character for odd `p`: 1, -1, or 0.
    #[inline]
    pub fn quadratic_character(&self, a: Fe) -> i32 {
        if a == ZERO {
            0
        } else if a % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Embedding of a subfield `F_{p^s}` (given by its tables) into this field.
    pub fn embedding_from(&self, small: &FieldTables) -> Result<Arc<Embedding>> {
        embedding(small, self)
    }
}

/// Field embedding `F_{p^s} -> F_{p^t}` sending the class of `x` to the
/// least-index root of the smaller modulus.
pub struct Embedding {
    /// Images of `x^i`, `i < s`.
    basis: Vec<Fe>,
    p: u64,
}

impl Embedding {
    pub fn apply(&self, small: &FieldTables, big: &FieldTables, x: Fe) -> Fe {
        let mut idx = small.to_index(x);
        let mut acc = ZERO;
        for &b in &self.basis {
            let c = idx % self.p;
            idx /= self.p;
            if c != 0 {
                acc = big.add(acc, big.mul(big.from_int(c as i64), b));
            }
        }
        acc
    }
}

type EmbeddingCache = Mutex<HashMap<(u64, u32, u32), Arc<Embedding>>>;

fn embedding(small: &FieldTables, big: &FieldTables) -> Result<Arc<Embedding>> {
    let (p, s, t) = (small.p, small.degree, big.degree);
    if big.p != p || t % s != 0 {
        return Err(Error::invariant(format!(
            "F_{p}^{s} does not embed in F_{}^{t}",
            big.p
        )));
    }
    static CACHE: OnceLock<EmbeddingCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(e) = cache.lock().unwrap().get(&(p, s, t)) {
        return Ok(e.clone());
    }
    let m = small.descriptor.modulus();
    let step = (big.qm1 / small.qm1) as u32;
    let eval = |z: Fe| {
        m.iter()
            .rev()
            .fold(ZERO, |acc, &c| big.add(big.mul(acc, z), big.from_int(c as i64)))
    };
    // degree-1 moduli may have the root 0
    let root = std::iter::once(ZERO)
        .chain((0..small.qm1 as u32).map(|j| j * step))
        .filter(|&z| eval(z) == ZERO)
        .min_by_key(|&z| big.to_index(z))
        .ok_or_else(|| Error::invariant("subfield modulus has no root"))?;
    let basis = (0..s as u64).map(|i| big.pow(root, i)).collect();
    let e = Arc::new(Embedding { basis, p });
    cache.lock().unwrap().insert((p, s, t), e.clone());
    Ok(e)
}
