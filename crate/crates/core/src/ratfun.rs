//! Integer rational functions with constant term 1: reconstruction from a
//! truncated series, power sums of reciprocal roots, and Adams transforms.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::series::{Ring, TruncatedSeries};

pub const DEFAULT_GUARD: usize = 3;

/// Integer polynomial in `T`, ascending coefficients.
pub type IntPoly = Vec<BigInt>;

pub fn poly_from_i64(c: &[i64]) -> IntPoly {
    c.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn poly_trim(mut f: IntPoly) -> IntPoly {
    while f.len() > 1 && f.last().map(|c| c.is_zero()).unwrap_or(false) {
        f.pop();
    }
    f
}

pub fn poly_mul(f: &[BigInt], g: &[BigInt]) -> IntPoly {
    if f.is_empty() || g.is_empty() {
        return vec![BigInt::zero()];
    }
    let mut out = vec![BigInt::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    poly_trim(out)
}

pub fn poly_mod(f: &[BigInt], m: &BigInt) -> IntPoly {
    poly_trim(f.iter().map(|c| c.mod_floor(m)).collect())
}

fn degree(f: &[BigInt]) -> usize {
    poly_trim(f.to_vec()).len() - 1
}

type QPoly = Vec<BigRational>;

fn qtrim(mut f: QPoly) -> QPoly {
    while f.last().map(|c| c.is_zero()).unwrap_or(false) {
        f.pop();
    }
    f
}

/// Monic gcd over `Q` (empty vector for the zero polynomial).
fn qgcd(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut a = qtrim(a.to_vec());
    let mut b = qtrim(b.to_vec());
    while !b.is_empty() {
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() {
            let c = a.last().unwrap() / &lb;
            let shift = a.len() - b.len();
            for (i, x) in b.iter().enumerate() {
                a[i + shift] -= &c * x;
            }
            a.pop();
            a = qtrim(a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    if let Some(l) = a.last().cloned() {
        for c in a.iter_mut() {
            *c /= &l;
        }
    }
    a
}

/// Exact quotient `a / b` over `Q`; `b` must divide `a`.
fn qdiv(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut a = qtrim(a.to_vec());
    let b = qtrim(b.to_vec());
    let mut q = vec![BigRational::zero(); a.len().saturating_sub(b.len()) + 1];
    let lb = b.last().unwrap().clone();
    while a.len() >= b.len() && !a.is_empty() {
        let c = a.last().unwrap() / &lb;
        let shift = a.len() - b.len();
        for (i, x) in b.iter().enumerate() {
            a[i + shift] -= &c * x;
        }
        q[shift] = c;
        a.pop();
        a = qtrim(a);
    }
    q
}

fn to_q(f: &[BigInt]) -> QPoly {
    f.iter().cloned().map(BigRational::from_integer).collect()
}

/// Rescales to constant term 1 and requires integer coefficients.
fn normalise_const_one(f: QPoly) -> Result<IntPoly> {
    let c0 = f[0].clone();
    if c0.is_zero() {
        return Err(Error::invariant("factor vanishes at T = 0"));
    }
    f.iter()
        .map(|c| {
            let x = c / &c0;
            if x.is_integer() {
                Ok(x.to_integer())
            } else {
                Err(Error::invariant(format!("cancelled factor has non-integer coefficient {x}")))
            }
        })
        .collect()
}

/// `num / den` with `num(0) = den(0) = 1`, coprime over `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunctionZ {
    num: IntPoly,
    den: IntPoly,
}

impl RationalFunctionZ {
    /// Validates and cancels any common factor.
    pub fn new(num: IntPoly, den: IntPoly) -> Result<Self> {
        let num = poly_trim(num);
        let den = poly_trim(den);
        if num.is_empty() || den.is_empty() || !num[0].is_one() || !den[0].is_one() {
            return Err(Error::input("numerator and denominator need constant term 1"));
        }
        let g = qgcd(&to_q(&num), &to_q(&den));
        if g.len() <= 1 {
            return Ok(RationalFunctionZ { num, den });
        }
        let n = normalise_const_one(qdiv(&to_q(&num), &g))?;
        let d = normalise_const_one(qdiv(&to_q(&den), &g))?;
        Ok(RationalFunctionZ { num: n, den: d })
    }

    pub fn from_i64(num: &[i64], den: &[i64]) -> Result<Self> {
        Self::new(poly_from_i64(num), poly_from_i64(den))
    }

    pub fn one() -> Self {
        RationalFunctionZ {
            num: vec![BigInt::one()],
            den: vec![BigInt::one()],
        }
    }

    pub fn num(&self) -> &[BigInt] {
        &self.num
    }

    pub fn den(&self) -> &[BigInt] {
        &self.den
    }

    /// `deg num - deg den`.
    pub fn degree(&self) -> i64 {
        (self.num.len() as i64) - (self.den.len() as i64)
    }

    /// `deg num + deg den`.
    pub fn total_degree(&self) -> usize {
        self.num.len() + self.den.len() - 2
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::new(poly_mul(&self.num, &other.num), poly_mul(&self.den, &other.den))
    }

    pub fn inverse(&self) -> Self {
        RationalFunctionZ {
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    /// Power series to `T^b` over `Z`.
    pub fn expand(&self, b: usize) -> TruncatedSeries {
        let pad = |f: &[BigInt]| -> Vec<BigInt> {
            let mut v: Vec<BigInt> = f.iter().take(b + 1).cloned().collect();
            v.resize(b + 1, BigInt::zero());
            v
        };
        let n = TruncatedSeries::from_ints(Ring::Z, &pad(&self.num)).expect("integer series");
        let d = TruncatedSeries::from_ints(Ring::Z, &pad(&self.den)).expect("integer series");
        n.div(&d).expect("unit constant term")
    }

    pub fn to_json(&self) -> Value {
        json!({ "num": poly_to_json(&self.num), "den": poly_to_json(&self.den) })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        Self::new(poly_from_json(&v["num"])?, poly_from_json(&v["den"])?)
    }
}

impl fmt::Display for RationalFunctionZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", fmt_poly(&self.num), fmt_poly(&self.den))
    }
}

pub fn fmt_poly(p: &[BigInt]) -> String {
    let mut s = String::new();
    for (i, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        match i {
            0 => s.push_str(&a.to_string()),
            _ => {
                if !a.is_one() {
                    s.push_str(&format!("{a}*"));
                }
                s.push('T');
                if i > 1 {
                    s.push_str(&format!("^{i}"));
                }
            }
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Integers that fit in `i64` are emitted as JSON numbers, others as strings.
pub fn poly_to_json(p: &[BigInt]) -> Value {
    Value::Array(
        p.iter()
            .map(|c| match c.to_i64() {
                Some(x) => json!(x),
                None => json!(c.to_string()),
            })
            .collect(),
    )
}

pub fn poly_from_json(v: &Value) -> Result<IntPoly> {
    v.as_array()
        .ok_or_else(|| Error::input("expected a coefficient array"))?
        .iter()
        .map(|c| match c {
            Value::Number(n) => n
                .as_i64()
                .map(BigInt::from)
                .ok_or_else(|| Error::input(format!("bad coefficient {n}"))),
            Value::String(s) => s.parse().map_err(|_| Error::input(format!("bad coefficient {s}"))),
            _ => Err(Error::input(format!("bad coefficient {c}"))),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionReport {
    /// `None` when no candidate within the bounds matches every coefficient.
    pub result: Option<RationalFunctionZ>,
    /// Coefficients checked beyond those the winning candidate was fitted to
    /// (for no-match, beyond the largest candidate).
    pub guard_checked: usize,
    pub used_coeffs: usize,
}

/// Solves `M x = r` over `Q`; any solution, free variables set to zero.
fn solve_linear(rows: &[Vec<BigRational>], rhs: &[BigRational], n: usize) -> Option<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(pr) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..=n {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][n].clone();
    }
    Some(x)
}

/// Least-degree `num/den` whose expansion matches `c_0..c_B` exactly.
///
/// Candidates are tried by increasing total degree, then denominator
/// degree. Every coefficient past the fitted ones is a guard check.
pub fn reconstruct_rational(
    s: &TruncatedSeries,
    dn_max: usize,
    dd_max: usize,
    guard: usize,
) -> Result<ReconstructionReport> {
    if guard == 0 {
        return Err(Error::Usage("reconstruction needs a guard window of at least 1".into()));
    }
    let b = s.b();
    if b < dn_max + dd_max + guard {
        return Err(Error::input(format!(
            "truncation B={b} is too small for bounds ({dn_max},{dd_max}) with guard {guard}; need B >= {}",
            dn_max + dd_max + guard
        )));
    }
    if matches!(s.ring(), Ring::ZMod { .. }) {
        return Err(Error::input("reconstruction over residue rings is not supported"));
    }
    let c = s.coeffs();
    if !c[0].is_one() {
        return Err(Error::input("series must have constant term 1"));
    }
    for total in 0..=(dn_max + dd_max) {
        for dd in 0..=total.min(dd_max) {
            let dn = total - dd;
            if dn > dn_max {
                continue;
            }
            // c_j + sum_{i=1}^{dd} e_i c_{j-i} = 0 for j = dn+1 ..= B
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for j in (dn + 1)..=b {
                rows.push(
                    (1..=dd)
                        .map(|i| if j >= i { c[j - i].clone() } else { BigRational::zero() })
                        .collect(),
                );
                rhs.push(-c[j].clone());
            }
            let Some(e) = solve_linear(&rows, &rhs, dd) else {
                continue;
            };
            let mut den = vec![BigRational::one()];
            den.extend(e);
            let num: QPoly = (0..=dn)
                .map(|j| {
                    let mut acc = BigRational::zero();
                    for (i, di) in den.iter().enumerate() {
                        if i <= j {
                            acc += di * &c[j - i];
                        }
                    }
                    acc
                })
                .collect();
            if num.last().map(|x| x.is_zero()).unwrap_or(false) && dn > 0 {
                continue;
            }
            if den.last().map(|x| x.is_zero()).unwrap_or(false) && dd > 0 {
                continue;
            }
            let to_int = |p: &QPoly| -> Option<IntPoly> {
                p.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect()
            };
            let (Some(n), Some(d)) = (to_int(&num), to_int(&den)) else {
                return Err(Error::invariant(
                    "series matches a rational function with non-integer coefficients",
                ));
            };
            let r = RationalFunctionZ::new(n, d)?;
            return Ok(ReconstructionReport {
                result: Some(r),
                guard_checked: b - total,
                used_coeffs: b + 1,
            });
        }
    }
    Ok(ReconstructionReport {
        result: None,
        guard_checked: b - dn_max - dd_max,
        used_coeffs: b + 1,
    })
}

/// As [`reconstruct_rational`], turning no-match into an error.
pub fn reconstruct_or_fail(s: &TruncatedSeries, dn_max: usize, dd_max: usize, guard: usize) -> Result<RationalFunctionZ> {
    reconstruct_rational(s, dn_max, dd_max, guard)?
        .result
        .ok_or_else(|| Error::NoMatch {
            dn_max,
            dd_max,
            context: String::new(),
        })
}

/// Power sums `p_1..p_k` of the reciprocal roots of `g = prod (1 - a_i T)`,
/// by Newton's recurrence (no division).
pub fn power_sums(g: &[BigInt], k: usize) -> Vec<BigInt> {
    let c = |i: usize| -> BigInt { g.get(i).cloned().unwrap_or_default() };
    let mut p: Vec<BigInt> = Vec::with_capacity(k + 1);
    p.push(BigInt::from(degree(g)));
    for j in 1..=k {
        let mut acc = -(BigInt::from(j) * c(j));
        for i in 1..j {
            acc -= c(i) * &p[j - i];
        }
        p.push(acc);
    }
    p
}

/// `#X(F_{q^k}) = sum beta^k - sum alpha^k`.
pub fn counts_from_rational(r: &RationalFunctionZ, k: usize) -> BigInt {
    assert!(k >= 1, "k must be positive");
    &power_sums(&r.den, k)[k] - &power_sums(&r.num, k)[k]
}

type Matrix = Vec<Vec<BigInt>>;

fn mat_mul(a: &Matrix, b: &Matrix, modulus: Option<&BigInt>) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
        if let Some(m) = modulus {
            for x in out[i].iter_mut() {
                *x = x.mod_floor(m);
            }
        }
    }
    out
}

fn mat_pow(a: &Matrix, mut k: u64, modulus: Option<&BigInt>) -> Matrix {
    let n = a.len();
    let mut acc: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = mat_mul(&acc, &base, modulus);
        }
        k >>= 1;
        if k > 0 {
            base = mat_mul(&base, &base, modulus);
        }
    }
    acc
}

/// Coefficients of `det(xI - A)`, leading first, by Berkowitz's
/// division-free algorithm.
fn berkowitz(a: &Matrix, modulus: Option<&BigInt>) -> Vec<BigInt> {
    let red = |x: BigInt| match modulus {
        Some(m) => x.mod_floor(m),
        None => x,
    };
    let n = a.len();
    if n == 0 {
        return vec![BigInt::one()];
    }
    // transforms[k-1] is the (k+2) x (k+1) Toeplitz matrix for the leading (k+1)-block
    let mut transforms: Vec<Matrix> = vec![Vec::new(); n - 1];
    for size in (2..=n).rev() {
        let k = size - 1;
        let r: Vec<BigInt> = (0..k).map(|j| -&a[k][j]).collect();
        let mut items: Vec<BigInt> = vec![BigInt::one(), -&a[k][k]];
        // R * A_k^i * C for i = 0..size-2
        let mut v: Vec<BigInt> = (0..k).map(|i| a[i][k].clone()).collect();
        for step in 0..(size - 1) {
            let dot: BigInt = r.iter().zip(&v).map(|(x, y)| x * y).sum();
            items.push(red(dot));
            if step + 1 < size - 1 {
                v = (0..k)
                    .map(|i| red((0..k).map(|j| &a[i][j] * &v[j]).sum()))
                    .collect();
            }
        }
        let mut t = vec![vec![BigInt::zero(); size]; size + 1];
        for col in 0..size {
            for row in col..=size {
                t[row][col] = items[row - col].clone();
            }
        }
        transforms[k - 1] = t;
    }
    let mut poly = vec![BigInt::one(), -&a[0][0]];
    for t in &transforms {
        poly = t
            .iter()
            .map(|row| red(row.iter().zip(&poly).map(|(x, y)| x * y).sum()))
            .collect();
    }
    poly.into_iter().map(red).collect()
}

fn adams_impl(g: &[BigInt], k: u64, modulus: Option<&BigInt>) -> IntPoly {
    let g = poly_trim(g.to_vec());
    let n = g.len() - 1;
    if n == 0 {
        return vec![BigInt::one()];
    }
    // companion matrix of x^n + g_1 x^{n-1} + ... + g_n, whose roots are the a_i
    let mut c = vec![vec![BigInt::zero(); n]; n];
    for i in 1..n {
        c[i][i - 1] = BigInt::one();
    }
    for i in 0..n {
        c[i][n - 1] = -&g[n - i];
    }
    let ck = mat_pow(&c, k, modulus);
    // det(I - T M) = sum_i chi_i T^i with chi leading-first
    let chi = berkowitz(&ck, modulus);
    let out: IntPoly = chi
        .into_iter()
        .map(|x| match modulus {
            Some(m) => x.mod_floor(m),
            None => x,
        })
        .collect();
    poly_trim(out)
}

/// `prod (1 - a_i^k T)` for `g = prod (1 - a_i T)`, exactly over `Z`.
pub fn adams_transform(g: &[BigInt], k: u64) -> IntPoly {
    assert!(k >= 1, "k must be positive");
    adams_impl(g, k, None)
}

/// [`adams_transform`] with coefficients reduced into `[0, modulus)`.
pub fn adams_transform_mod(g: &[BigInt], k: u64, modulus: &BigInt) -> IntPoly {
    assert!(k >= 1, "k must be positive");
    adams_impl(g, k, Some(modulus))
}

/// Distinct reciprocal roots that collide under `a -> a^k` (detected as a
/// repeated factor of the transform but not of the input).
pub fn adams_collision(g: &[BigInt], k: u64) -> bool {
    let sqfree = |f: &[BigInt]| -> bool {
        let q = to_q(f);
        let d: QPoly = q
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(i.into()))
            .collect();
        qgcd(&q, &d).len() <= 1
    };
    sqfree(g) && !sqfree(&adams_transform(g, k))
}

/// Zeta function of a smooth projective curve of genus `g` over `F_q` from
/// `N_1..N_g`, using the functional equation `a_{2g-i} = q^{g-i} a_i`.
pub fn curve_zeta_from_counts(counts: &[BigInt], q: u64, genus: usize) -> Result<RationalFunctionZ> {
    if counts.len() < genus {
        return Err(Error::input(format!("genus {genus} needs {genus} point counts")));
    }
    let qb = BigInt::from(q);
    // power sums s_k = q^k + 1 - N_k of the numerator's reciprocal roots
    let s: Vec<BigInt> = (1..=genus)
        .map(|k| qb.pow(k as u32) + 1 - &counts[k - 1])
        .collect();
    // numerator 1 + a_1 T + ...: k a_k = -(s_k + sum_{i=1}^{k-1} a_i s_{k-i})
    let mut a = vec![BigInt::one()];
    for k in 1..=genus {
        let mut acc = s[k - 1].clone();
        for i in 1..k {
            acc += &a[i] * &s[k - i - 1];
        }
        let (quo, rem) = (-acc).div_rem(&BigInt::from(k));
        if !rem.is_zero() {
            return Err(Error::invariant("point counts are not those of a curve of this genus"));
        }
        a.push(quo);
    }
    let mut num = vec![BigInt::zero(); 2 * genus + 1];
    for i in 0..=genus {
        num[i] = a[i].clone();
        num[2 * genus - i] = &a[i] * qb.pow((genus - i) as u32);
    }
    RationalFunctionZ::new(num, vec![BigInt::one(), -(&qb + BigInt::one()), qb])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{series_exp, zeta_series_from_u64};
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPoly {
        poly_from_i64(c)
    }

    fn elliptic() -> RationalFunctionZ {
        RationalFunctionZ::from_i64(&[1, 3, 5], &[1, -6, 5]).unwrap()
    }

    /// Counts of `y^2 = x^3 + x + 1` over `F_{5^k}`, from `a = -3`.
    fn elliptic_counts(b: usize) -> Vec<u64> {
        // alpha + beta = -3, alpha beta = 5: s_k = -3 s_{k-1} - 5 s_{k-2}
        let mut s = vec![2i64, -3];
        for k in 2..=b {
            s.push(-3 * s[k - 1] - 5 * s[k - 2]);
        }
        (1..=b).map(|k| (5i64.pow(k as u32) + 1 - s[k]) as u64).collect()
    }

    #[test]
    fn geometric_series() {
        let s = TruncatedSeries::from_i64(Ring::Z, &[1, 7, 49, 343, 2401]).unwrap();
        let r = reconstruct_or_fail(&s, 0, 1, 2).unwrap();
        assert_eq!(r, RationalFunctionZ::from_i64(&[1], &[1, -7]).unwrap());
    }

    #[test]
    fn elliptic_reconstruction() {
        let counts = elliptic_counts(6);
        assert_eq!(&counts[..2], &[9, 27]);
        let z = zeta_series_from_u64(&counts).unwrap();
        let rep = reconstruct_rational(&z, 2, 2, 2).unwrap();
        assert_eq!(rep.result, Some(elliptic()));
        assert_eq!(rep.guard_checked, 2);
        assert_eq!(rep.used_coeffs, 7);
        assert_eq!(elliptic().expand(6), z);
    }

    #[test]
    fn exponential_is_rejected() {
        let mut c = vec![BigRational::zero(); 8];
        c[1] = BigRational::one();
        let e = series_exp(&TruncatedSeries::new(Ring::Q, c).unwrap()).unwrap();
        let rep = reconstruct_rational(&e, 2, 2, 3).unwrap();
        assert!(rep.result.is_none());
        assert!(matches!(reconstruct_or_fail(&e, 2, 2, 3), Err(Error::NoMatch { .. })));
    }

    #[test]
    fn bounds_and_guard_are_checked() {
        let s = TruncatedSeries::from_i64(Ring::Z, &[1, 2, 4]).unwrap();
        assert!(matches!(reconstruct_rational(&s, 1, 1, 1), Err(Error::Input(_))));
        assert!(matches!(reconstruct_rational(&s, 1, 1, 0), Err(Error::Usage(_))));
    }

    #[test]
    fn least_denominator_wins_ties() {
        // total degree 1 admits (1+T)/1 and 1/(1-T); only the first matches
        let s = TruncatedSeries::from_i64(Ring::Z, &[1, 1, 0, 0, 0, 0]).unwrap();
        let r = reconstruct_or_fail(&s, 1, 1, 3).unwrap();
        assert_eq!(r, RationalFunctionZ::from_i64(&[1, 1], &[1]).unwrap());
    }

    #[test]
    fn count_recovery() {
        let geo = RationalFunctionZ::from_i64(&[1], &[1, -5]).unwrap();
        assert_eq!(counts_from_rational(&geo, 3), BigInt::from(125));
        assert_eq!(counts_from_rational(&elliptic(), 2), BigInt::from(27));
        let r = RationalFunctionZ::from_i64(&[1, -1], &[1, -2]).unwrap();
        assert_eq!(counts_from_rational(&r, 1), BigInt::from(1));
        let counts = elliptic_counts(8);
        for k in 1..=8 {
            assert_eq!(counts_from_rational(&elliptic(), k), BigInt::from(counts[k - 1]));
        }
    }

    #[test]
    fn adams_examples() {
        assert_eq!(adams_transform(&p(&[1, 3, 5]), 2), p(&[1, 1, 25]));
        assert_eq!(adams_transform(&p(&[1, 3, 5]), 1), p(&[1, 3, 5]));
        assert_eq!(adams_transform(&p(&[1, -7]), 4), p(&[1, -2401]));
        assert_eq!(adams_transform(&p(&[1]), 3), p(&[1]));
        let m = BigInt::from(25);
        assert_eq!(adams_transform_mod(&p(&[1, 3, 5]), 2, &m), p(&[1, 1]));
    }

    #[test]
    fn adams_collisions_reported() {
        // roots 1 and -1 collide under squaring
        assert!(adams_collision(&p(&[1, 0, -1]), 2));
        assert!(!adams_collision(&p(&[1, 0, -1]), 3));
        assert!(!adams_collision(&p(&[1, 3, 5]), 2));
    }

    #[test]
    fn cancellation_on_construction() {
        let r = RationalFunctionZ::from_i64(&[1, -3, 2], &[1, -1]).unwrap();
        assert_eq!(r, RationalFunctionZ::from_i64(&[1, -2], &[1]).unwrap());
        assert!(RationalFunctionZ::from_i64(&[2, 1], &[1]).is_err());
    }

    #[test]
    fn json_shape() {
        let j = elliptic().to_json();
        assert_eq!(j.to_string(), r#"{"den":[1,-6,5],"num":[1,3,5]}"#);
        assert_eq!(RationalFunctionZ::from_json(&j).unwrap(), elliptic());
        let big = RationalFunctionZ::new(vec![BigInt::one(), BigInt::from(u64::MAX)], vec![BigInt::one()]).unwrap();
        assert_eq!(big.to_json()["num"][1], "18446744073709551615");
    }

    #[test]
    fn curve_helper_matches_reconstruction() {
        let c: Vec<BigInt> = elliptic_counts(1).into_iter().map(BigInt::from).collect();
        assert_eq!(curve_zeta_from_counts(&c, 5, 1).unwrap(), elliptic());
        // genus 2, numerator satisfying the functional equation for q = 3
        let g2 = RationalFunctionZ::from_i64(&[1, 1, 3, 3, 9], &[1, -4, 3]).unwrap();
        let counts: Vec<BigInt> = (1..=2).map(|k| counts_from_rational(&g2, k)).collect();
        assert_eq!(curve_zeta_from_counts(&counts, 3, 2).unwrap(), g2);
    }

    fn small_poly() -> impl Strategy<Value = IntPoly> {
        proptest::collection::vec(-4i64..=4, 0..=6).prop_map(|mut v| {
            v.insert(0, 1);
            poly_trim(poly_from_i64(&v))
        })
    }

    proptest! {
        #[test]
        fn adams_is_multiplicative(g in small_poly(), h in small_poly(), k in 1u64..4) {
            let lhs = adams_transform(&poly_mul(&g, &h), k);
            let rhs = poly_mul(&adams_transform(&g, k), &adams_transform(&h, k));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn adams_composes(g in small_poly(), j in 1u64..4, k in 1u64..4) {
            prop_assert_eq!(adams_transform(&adams_transform(&g, j), k), adams_transform(&g, j * k));
        }

        #[test]
        fn adams_mod_agrees(g in small_poly(), k in 1u64..40) {
            let m = BigInt::from(125);
            prop_assert_eq!(adams_transform_mod(&g, k, &m), poly_mod(&adams_transform(&g, k), &m));
        }

        #[test]
        fn adams_power_sums(g in small_poly(), k in 1usize..4) {
            // p_j(adams(g,k)) = p_{jk}(g)
            let a = adams_transform(&g, k as u64);
            let pa = power_sums(&a, 4);
            let pg = power_sums(&g, 4 * k);
            for j in 1..=4 {
                prop_assert_eq!(&pa[j], &pg[j * k]);
            }
        }

        #[test]
        fn reconstruction_round_trip(n in small_poly(), d in small_poly()) {
            let r = RationalFunctionZ::new(n, d).unwrap();
            let (dn, dd) = (r.num().len() - 1, r.den().len() - 1);
            let s = r.expand(dn + dd + 3);
            let rep = reconstruct_rational(&s, dn, dd, 3).unwrap();
            prop_assert_eq!(rep.result.as_ref(), Some(&r));
            prop_assert_eq!(rep.result.unwrap().expand(dn + dd + 3), s);
        }
    }
}
