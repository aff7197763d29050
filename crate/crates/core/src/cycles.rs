//! Counting zeta functions of r-cycles: prime counts `N`, effective counts
//! `M`, weighted counts `W(d) = sum_{k|d} k N(k)`, divisor counts on `P^n`,
//! and a p-adic probe of the pole order at `T = 1`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::arith::{big_pow, binomial, divisors, mobius};
use crate::count::{budget_check, checked_power};
use crate::error::{Error, Result};
use crate::ffpoly::tables::{field_tables, Fe, FieldTables, ONE, ZERO};
use crate::series::{series_exp, series_log, Ring, TruncatedSeries};

/// `N`, `M`, `W` to degree `B`; `n[d-1] = N(d)`, `m[d] = M(d)`, `w[d-1] = W(d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleCountTable {
    pub r: usize,
    pub b: usize,
    pub n: Vec<BigInt>,
    pub m: Vec<BigInt>,
    pub w: Vec<BigInt>,
}

impl CycleCountTable {
    pub fn from_n(r: usize, n: &[BigInt]) -> Result<Self> {
        let w = w_from_n(n);
        let m = m_from_w(&w)?;
        Ok(CycleCountTable { r, b: n.len(), n: n.to_vec(), m, w })
    }

    pub fn from_w(r: usize, w: &[BigInt]) -> Result<Self> {
        let n = n_from_w(w)?;
        let m = m_from_w(w)?;
        Ok(CycleCountTable { r, b: w.len(), n, m, w: w.to_vec() })
    }

    /// `m[0]` must be 1.
    pub fn from_m(r: usize, m: &[BigInt]) -> Result<Self> {
        let w = w_from_m(m)?;
        let n = n_from_w(&w)?;
        Ok(CycleCountTable { r, b: w.len(), n, m: m.to_vec(), w })
    }

    pub fn to_json(&self) -> Value {
        let s = |v: &[BigInt]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        json!({"r": self.r, "B": self.b, "N": s(&self.n), "M": s(&self.m), "W": s(&self.w)})
    }
}

/// `W(d) = sum_{k|d} k N(k)`.
pub fn w_from_n(n: &[BigInt]) -> Vec<BigInt> {
    (1..=n.len())
        .map(|d| divisors(d).into_iter().map(|k| BigInt::from(k) * &n[k - 1]).sum())
        .collect()
}

/// Möbius inversion of [`w_from_n`]; fails unless every `N(d)` is a
/// non-negative integer.
pub fn n_from_w(w: &[BigInt]) -> Result<Vec<BigInt>> {
    (1..=w.len())
        .map(|d| {
            let s: BigInt = divisors(d)
                .into_iter()
                .map(|k| BigInt::from(mobius(d / k)) * &w[k - 1])
                .sum();
            let (q, r) = s.div_rem(&BigInt::from(d));
            if !r.is_zero() || q.is_negative() {
                return Err(Error::input(format!(
                    "W is not a weighted cycle count: N({d}) = {s}/{d}"
                )));
            }
            Ok(q)
        })
        .collect()
}

/// `sum_d M(d) T^d = exp(sum_d W(d) T^d / d)`, returned with `M(0) = 1`.
pub fn m_from_w(w: &[BigInt]) -> Result<Vec<BigInt>> {
    let mut s = vec![BigRational::zero(); w.len() + 1];
    for (i, x) in w.iter().enumerate() {
        s[i + 1] = BigRational::new(x.clone(), BigInt::from(i + 1));
    }
    let e = series_exp(&TruncatedSeries::new(Ring::Q, s)?)?;
    e.coeffs()
        .iter()
        .enumerate()
        .map(|(d, c)| {
            if c.is_integer() {
                Ok(c.to_integer())
            } else {
                Err(Error::input(format!("M({d}) = {c} is not an integer")))
            }
        })
        .collect()
}

/// Inverse of [`m_from_w`]; `m[0]` must be 1.
pub fn w_from_m(m: &[BigInt]) -> Result<Vec<BigInt>> {
    if m.first().map(|x| !x.is_one()).unwrap_or(true) {
        return Err(Error::input("M(0) must be 1"));
    }
    let l = series_log(&TruncatedSeries::from_ints(Ring::Q, m)?)?;
    (1..m.len())
        .map(|d| {
            let c = &l.coeffs()[d] * BigRational::from_integer(d.into());
            if c.is_integer() {
                Ok(c.to_integer())
            } else {
                Err(Error::input(format!("W({d}) = {c} is not an integer")))
            }
        })
        .collect()
}

/// Effective divisors of degree `d` on `P^n_{F_q}`: nonzero degree-`d` forms up to scalar.
pub fn effective_divisor_count(n: usize, d: usize, q: u64) -> Result<BigInt> {
    if n == 0 || d == 0 {
        return Err(Error::input("effective divisor counts need n >= 1 and d >= 1"));
    }
    let dim = binomial((n + d) as u64, n as u64)
        .to_u64()
        .ok_or_else(|| Error::input("too many monomials"))?;
    Ok((big_pow(q, dim) - 1) / (q - 1))
}

/// Exponent vectors of degree `d` in `nv` variables, lexicographically descending.
fn monomials(nv: usize, d: u32) -> Vec<Vec<u32>> {
    if nv == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in monomials(nv - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct FormSpace {
    t: std::sync::Arc<FieldTables>,
    /// Monomials per degree `0..=d`.
    mons: Vec<Vec<Vec<u32>>>,
}

impl FormSpace {
    /// Forms of degree `e` with first nonzero coefficient 1.
    fn canonical_forms(&self, e: usize) -> Vec<Vec<Fe>> {
        let len = self.mons[e].len();
        let q = self.t.order();
        let mut out = Vec::new();
        for lead in 0..len {
            let free = len - lead - 1;
            for idx in 0..q.pow(free as u32) {
                let mut f = vec![ZERO; len];
                f[lead] = ONE;
                let mut k = idx;
                for c in f.iter_mut().skip(lead + 1) {
                    *c = self.t.from_index(k % q);
                    k /= q;
                }
                out.push(f);
            }
        }
        out
    }

    /// Product of canonical forms, as a canonical index of degree `e1 + e2`.
    fn product_key(&self, f: &[Fe], e1: usize, g: &[Fe], e2: usize) -> u64 {
        let target = &self.mons[e1 + e2];
        let mut out = vec![ZERO; target.len()];
        for (i, &a) in f.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in g.iter().enumerate() {
                if b == ZERO {
                    continue;
                }
                let m: Vec<u32> = self.mons[e1][i].iter().zip(&self.mons[e2][j]).map(|(x, y)| x + y).collect();
                let pos = target.binary_search_by(|t| m.cmp(t)).expect("monomial of the product degree");
                out[pos] = self.t.add(out[pos], self.t.mul(a, b));
            }
        }
        // leading coefficients multiply to 1, so the product is already canonical
        let q = self.t.order();
        out.iter().rev().fold(0u64, |acc, &c| acc * q + self.t.to_index(c))
    }
}

/// Prime divisors of degree `d` on `P^n_{F_q}`: canonical degree-`d` forms
/// that are not a product of two lower-degree forms.
pub fn prime_divisor_bruteforce(n: usize, d: usize, q: u64, budget: u64) -> Result<BigInt> {
    let total = effective_divisor_count(n, d, q)?;
    let dim = binomial((n + d) as u64, n as u64).to_usize().unwrap_or(usize::MAX);
    budget_check(checked_power(q, dim.min(u32::MAX as usize)), budget)
        .map_err(|e| e.with_context(format!("forms of degree {d} in {} variables over F_{q}", n + 1)))?;
    let (p, a) = prime_power(q)?;
    let t = field_tables(p, a)?;
    let mons: Vec<Vec<Vec<u32>>> = (0..=d as u32).map(|e| monomials(n + 1, e)).collect();
    let space = FormSpace { t, mons };
    let forms: Vec<Vec<Vec<Fe>>> = (0..d).map(|e| if e == 0 { Vec::new() } else { space.canonical_forms(e) }).collect();
    let mut reducible: HashSet<u64> = HashSet::new();
    for e1 in 1..=d / 2 {
        let e2 = d - e1;
        let keys: Vec<u64> = forms[e1]
            .par_iter()
            .flat_map_iter(|f| forms[e2].iter().map(|g| space.product_key(f, e1, g, e2)).collect::<Vec<_>>())
            .collect();
        reducible.extend(keys);
    }
    Ok(total - reducible.len())
}

fn prime_power(q: u64) -> Result<(u64, u32)> {
    let f = crate::arith::prime_factors(q);
    match f.as_slice() {
        [p] => {
            let mut a = 0;
            let mut x = q;
            while x > 1 {
                x /= p;
                a += 1;
            }
            Ok((*p, a))
        }
        _ => Err(Error::input(format!("{q} is not a prime power"))),
    }
}

/// `sum M(d) T^d`, after checking that the Euler product over prime cycles,
/// the grouped product `prod_d (1 - T^d)^(-N(d))`, the exponential of the
/// weighted counts, and the stored `M` all agree to `T^B`.
pub fn cycle_zeta_series(table: &CycleCountTable) -> Result<TruncatedSeries> {
    let b = table.b;
    if table.n.len() != b || table.w.len() != b || table.m.len() != b + 1 {
        return Err(Error::input("cycle table sequences have inconsistent lengths"));
    }
    if table.n.iter().chain(&table.m).chain(&table.w).any(|x| x.is_negative()) {
        return Err(Error::input("cycle counts must be non-negative"));
    }
    let direct = TruncatedSeries::from_ints(Ring::Z, &table.m)?;
    // (1 - T^d)^(-N) = sum_j C(N + j - 1, j) T^{dj}
    let mut grouped = TruncatedSeries::one(Ring::Z, b);
    for (i, nd) in table.n.iter().enumerate() {
        let d = i + 1;
        let mut c = vec![BigInt::zero(); b + 1];
        let mut coef = BigInt::one();
        for j in 0..=b / d {
            c[d * j] = coef.clone();
            coef = coef * (nd + j) / (j + 1);
        }
        grouped = grouped.mul(&TruncatedSeries::from_ints(Ring::Z, &c)?)?;
    }
    // one geometric factor per prime cycle, where that is cheap enough
    let per_prime = if table.n.iter().all(|x| x.to_u64().map(|v| v <= 4096).unwrap_or(false)) {
        let mut z = TruncatedSeries::one(Ring::Z, b);
        for (i, nd) in table.n.iter().enumerate() {
            let d = i + 1;
            let mut geo = vec![BigInt::zero(); b + 1];
            for j in (0..=b).step_by(d) {
                geo[j] = BigInt::one();
            }
            let g = TruncatedSeries::from_ints(Ring::Z, &geo)?;
            for _ in 0..nd.to_u64().unwrap_or(0) {
                z = z.mul(&g)?;
            }
        }
        Some(z)
    } else {
        None
    };
    let exp_form = TruncatedSeries::from_ints(Ring::Z, &m_from_w(&table.w)?)?;
    let mut forms = vec![("Euler product grouped by degree", &grouped), ("exponential of weighted counts", &exp_form)];
    if let Some(z) = &per_prime {
        forms.push(("Euler product over prime cycles", z));
    }
    for (name, s) in forms {
        if let Some(d) = (0..=b).find(|&d| s.coeff(d) != direct.coeff(d)) {
            return Err(Error::invariant(format!(
                "{name} disagrees with the effective counts at degree {d}: {} vs {}",
                s.coeff(d),
                direct.coeff(d)
            )));
        }
    }
    Ok(direct)
}

/// Numerical evidence (never proof) for the pole order of `sum M(d) T^d` at `T = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoleProbeReport {
    pub p: u64,
    pub m: u32,
    pub d_max: usize,
    pub window: usize,
    pub rho: Option<u32>,
    pub value: Option<BigInt>,
    /// Partial sums of `(1 - T)^ρ sum M(d) T^d` at `T = 1` mod `p^m`, for each tried `ρ`.
    pub traces: Vec<(u32, Vec<BigInt>)>,
}

impl PoleProbeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": "numerical evidence, not proof",
            "p": self.p,
            "m": self.m,
            "D_max": self.d_max,
            "window": self.window,
            "rho": self.rho,
            "value": self.value.as_ref().map(|v| v.to_string()),
            "traces": self.traces.iter().map(|(r, t)| json!({"rho": r, "partial_sums": t.iter().map(|x| x.to_string()).collect::<Vec<_>>()})).collect::<Vec<_>>(),
        })
    }
}

pub fn default_probe_window(d_max: usize) -> usize {
    d_max.div_ceil(4).max(1)
}

/// For `ρ = 0..=rho_max`, the least `ρ` whose partial sums at `T = 1` of
/// `(1 - T)^ρ sum_{d<=D} M(d) T^d` are constant mod `p^m` over the last
/// `window` values. `m_seq[d] = M(d)` for `d = 0..=D_max`.
pub fn pole_order_probe(m_seq: &[BigInt], p: u64, m: u32, rho_max: u32, window: usize) -> Result<PoleProbeReport> {
    if m_seq.is_empty() {
        return Err(Error::input("pole probe needs at least M(0)"));
    }
    let d_max = m_seq.len() - 1;
    if window == 0 || window > m_seq.len() {
        return Err(Error::input(format!("stabilization window {window} does not fit D_max = {d_max}")));
    }
    let modulus = big_pow(p, m as u64);
    let mut coeffs: Vec<BigInt> = m_seq.iter().map(|x| x.mod_floor(&modulus)).collect();
    let mut traces = Vec::new();
    for rho in 0..=rho_max {
        let mut sums = Vec::with_capacity(coeffs.len());
        let mut acc = BigInt::zero();
        for c in &coeffs {
            acc = (acc + c).mod_floor(&modulus);
            sums.push(acc.clone());
        }
        let tail = &sums[sums.len() - window..];
        let stable = tail.windows(2).all(|x| x[0] == x[1]);
        let value = tail[0].clone();
        traces.push((rho, sums));
        if stable {
            return Ok(PoleProbeReport { p, m, d_max, window, rho: Some(rho), value: Some(value), traces });
        }
        // multiply by (1 - T)
        let prev = coeffs.clone();
        for d in 1..coeffs.len() {
            coeffs[d] = (&prev[d] - &prev[d - 1]).mod_floor(&modulus);
        }
    }
    Ok(PoleProbeReport { p, m, d_max, window, rho: None, value: None, traces })
}

/// `M(d)` for divisors on `P^n_{F_q}`, `d = 0..=d_max`.
pub fn divisor_m_sequence(n: usize, q: u64, d_max: usize) -> Result<Vec<BigInt>> {
    let mut out = vec![BigInt::one()];
    for d in 1..=d_max {
        out.push(effective_divisor_count(n, d, q)?);
    }
    Ok(out)
}

/// Divisor table on `P^n_{F_q}` to degree `b` from the closed form.
pub fn divisor_table(n: usize, q: u64, b: usize) -> Result<CycleCountTable> {
    CycleCountTable::from_m(n - 1, &divisor_m_sequence(n, q, b)?)
}
