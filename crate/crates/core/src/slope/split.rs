//! Factorisation of `g = prod (1 - αT)` into slope-pure factors modulo `p^m`.
//!
//! For a segment of slope `u/W` the reversed polynomial is rescaled by
//! `x = π^u y` over `Z_p[π]`, `π^W = p`, so that the roots of that slope
//! become units. Modulo `π` the rescaled polynomial is `c·y^k·Ū(y)` with `Ū`
//! the reduction of the wanted factor, and Hensel lifting in `π` recovers it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

use super::{newton_polygon, SlopeBase, SlopeKind};
use crate::arith::{big_pow, ord_p};
use crate::error::{Error, Result};
use crate::ratfun::{poly_mod, poly_mul, poly_trim, IntPoly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeFactor {
    pub slope: Rational64,
    /// Ascending coefficients in `[0, p^m)`, constant term 1; the length is
    /// the true degree plus one even when the top coefficient vanishes mod `p^m`.
    pub coeffs: Vec<BigInt>,
    pub p: u64,
    pub m: u32,
}

impl SlopeFactor {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `Z/p^M [π] / (π^W - p)`; elements are `W` coefficients of `1, π, ..., π^{W-1}`.
struct Ramified {
    p: BigInt,
    w: usize,
    modulus: BigInt,
}

type Elt = Vec<BigInt>;

impl Ramified {
    fn zero(&self) -> Elt {
        vec![BigInt::zero(); self.w]
    }

    fn from_int(&self, x: &BigInt) -> Elt {
        let mut e = self.zero();
        e[0] = x.mod_floor(&self.modulus);
        e
    }

    fn add(&self, a: &Elt, b: &Elt) -> Elt {
        a.iter().zip(b).map(|(x, y)| (x + y).mod_floor(&self.modulus)).collect()
    }

    fn sub(&self, a: &Elt, b: &Elt) -> Elt {
        a.iter().zip(b).map(|(x, y)| (x - y).mod_floor(&self.modulus)).collect()
    }

    fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        let mut out = self.zero();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let t = x * y;
                if i + j >= self.w {
                    out[i + j - self.w] += &self.p * t;
                } else {
                    out[i + j] += t;
                }
            }
        }
        out.into_iter().map(|x| x.mod_floor(&self.modulus)).collect()
    }

    fn mul_pi_pow(&self, a: &Elt, s: usize) -> Elt {
        let mut e = a.clone();
        for _ in 0..s {
            let top = e.pop().unwrap();
            e.insert(0, (&self.p * top).mod_floor(&self.modulus));
        }
        e
    }

    /// `π`-adic digit `j` in `[0, p)`.
    fn digit(&self, a: &Elt, j: usize) -> u64 {
        let (t, i) = (j / self.w, j % self.w);
        let pt = num_traits::pow(self.p.clone(), t);
        ((&a[i] / pt) % &self.p).to_u64().unwrap()
    }

    fn add_digit(&self, a: &mut Elt, j: usize, d: u64) {
        let (t, i) = (j / self.w, j % self.w);
        let pt = num_traits::pow(self.p.clone(), t);
        a[i] = (&a[i] + pt * d).mod_floor(&self.modulus);
    }

    fn poly_mul(&self, a: &[Elt], b: &[Elt]) -> Vec<Elt> {
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.add(&out[i + j], &self.mul(x, y));
            }
        }
        out
    }
}

/// Polynomials over `F_p`, ascending, trimmed.
mod fp {
    pub type P = Vec<u64>;

    pub fn trim(mut f: P) -> P {
        while f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    pub fn inv(a: u64, p: u64) -> u64 {
        let mut r = 1u64;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = (r as u128 * b as u128 % p as u128) as u64;
            }
            b = (b as u128 * b as u128 % p as u128) as u64;
            e >>= 1;
        }
        r
    }

    pub fn add(a: &[u64], b: &[u64], p: u64) -> P {
        let n = a.len().max(b.len());
        trim((0..n).map(|i| (a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)) % p).collect())
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> P {
        let n = a.len().max(b.len());
        trim((0..n).map(|i| (a.get(i).unwrap_or(&0) + p - b.get(i).unwrap_or(&0)) % p).collect())
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> P {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(out)
    }

    /// `(q, r)` with `a = q b + r`, `deg r < deg b`.
    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (P, P) {
        let mut r = trim(a.to_vec());
        let b = trim(b.to_vec());
        let lb = inv(*b.last().unwrap(), p);
        let mut q = vec![0u64; r.len().saturating_sub(b.len()) + 1];
        while r.len() >= b.len() {
            let c = r.last().unwrap() * lb % p;
            let shift = r.len() - b.len();
            q[shift] = c;
            for (i, y) in b.iter().enumerate() {
                r[i + shift] = (r[i + shift] + p - c * y % p) % p;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    /// `(s, t)` with `s a + t b = 1`; `a`, `b` coprime.
    pub fn bezout(a: &[u64], b: &[u64], p: u64) -> Option<(P, P)> {
        let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
        let (mut s0, mut s1): (P, P) = (vec![1], vec![]);
        let (mut t0, mut t1): (P, P) = (vec![], vec![1]);
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1, p);
            let s2 = sub(&s0, &mul(&q, &s1, p), p);
            let t2 = sub(&t0, &mul(&q, &t1, p), p);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r0.len() != 1 {
            return None;
        }
        let c = inv(r0[0], p);
        let scale = |f: &P| trim(f.iter().map(|x| x * c % p).collect());
        Some((scale(&s0), scale(&t0)))
    }
}

/// The factor of `g` whose reciprocal roots have `ord_p = u/w` exactly.
fn pure_factor(g: &[BigInt], p: u64, u: i64, w: usize, len: usize, m: u32) -> Result<IntPoly> {
    let n = g.len() - 1;
    let pb = BigInt::from(p);
    let ring = Ramified {
        p: pb.clone(),
        w,
        modulus: big_pow(p, m as u64 + 1),
    };
    // reversed monic G(x) = sum_j g_{n-j} x^j; rescaled coefficient of y^j is g_{n-j} π^{u j - v}
    let val = |j: usize| -> Option<i64> { ord_p(&g[n - j], p).map(|o| w as i64 * o as i64 + u * j as i64) };
    let v = (0..=n).filter_map(val).min().unwrap();
    let ghat: Vec<Elt> = (0..=n)
        .map(|j| {
            let c = &g[n - j];
            if c.is_zero() {
                return ring.zero();
            }
            let mut e = u * j as i64 - v;
            let mut c = c.clone();
            if e < 0 {
                let t = (-e + w as i64 - 1) / w as i64;
                c /= num_traits::pow(pb.clone(), t as usize);
                e += w as i64 * t;
            }
            ring.mul_pi_pow(&ring.from_int(&c), e as usize)
        })
        .collect();
    let gbar = fp::trim(ghat.iter().map(|e| ring.digit(e, 0)).collect());
    let k = gbar.iter().position(|&c| c != 0).unwrap();
    let top = gbar.len() - 1;
    if top - k != len {
        return Err(Error::invariant(format!(
            "residual factor has degree {} but the segment has length {len}",
            top - k
        )));
    }
    let lead = gbar[top];
    let li = fp::inv(lead, p);
    let ubar: fp::P = gbar[k..].iter().map(|c| c * li % p).collect();
    let mut hbar: fp::P = vec![0; k + 1];
    hbar[k] = lead;
    let (sig, tau) = fp::bezout(&ubar, &hbar, p).ok_or_else(|| Error::invariant("residual factors are not coprime"))?;

    let lift = |f: &[u64]| -> Vec<Elt> { f.iter().map(|&c| ring.from_int(&BigInt::from(c))).collect() };
    let mut a = lift(&ubar);
    let mut h = lift(&hbar);
    let precision = w * m as usize;
    for j in 1..precision {
        let prod = ring.poly_mul(&a, &h);
        let err: Vec<Elt> = (0..ghat.len().max(prod.len()))
            .map(|i| {
                let x = ghat.get(i).cloned().unwrap_or_else(|| ring.zero());
                let y = prod.get(i).cloned().unwrap_or_else(|| ring.zero());
                ring.sub(&x, &y)
            })
            .collect();
        debug_assert!(err.iter().all(|e| (0..j).all(|i| ring.digit(e, i) == 0)));
        let ebar = fp::trim(err.iter().map(|e| ring.digit(e, j)).collect());
        if ebar.is_empty() {
            continue;
        }
        let (q, r) = fp::divrem(&fp::mul(&tau, &ebar, p), &ubar, p);
        let dh = fp::add(&fp::mul(&sig, &ebar, p), &fp::mul(&q, &hbar, p), p);
        for (i, &c) in r.iter().enumerate() {
            ring.add_digit(&mut a[i], j, c);
        }
        if h.len() < dh.len() {
            h.resize(dh.len(), ring.zero());
        }
        for (i, &c) in dh.iter().enumerate() {
            ring.add_digit(&mut h[i], j, c);
        }
    }
    // x-coefficient of x^i is a_i π^{u(d-i)}; must lie in Z/p^m
    let d = len;
    let target = big_pow(p, m as u64);
    let mut xcoeffs = Vec::with_capacity(d + 1);
    for (i, ai) in a.iter().enumerate() {
        let e = ring.mul_pi_pow(ai, (u * (d - i) as i64) as usize);
        if e[1..].iter().any(|r| !(r % &target).is_zero()) {
            return Err(Error::invariant(format!(
                "slope {u}/{w} factor is not p-integral at x^{i}"
            )));
        }
        xcoeffs.push(e[0].mod_floor(&target));
    }
    xcoeffs.reverse();
    Ok(xcoeffs)
}

/// Whether `f` (known mod `p^m`) is consistent with every reciprocal root
/// having `ord_p = s`: `ord(c_i) >= s·i`, with equality at the top degree.
pub fn is_pure_mod(f: &[BigInt], s: Rational64, p: u64, m: u32) -> bool {
    let modulus = big_pow(p, m as u64);
    let cap = Rational64::from_integer(m as i64);
    let ordc = |c: &BigInt| -> Rational64 {
        ord_p(&c.mod_floor(&modulus), p)
            .map(|o| Rational64::from_integer(o as i64).min(cap))
            .unwrap_or(cap)
    };
    let d = f.len() - 1;
    let lower_ok = f.iter().enumerate().all(|(i, c)| ordc(c) >= (s * i as i64).min(cap));
    let top = s * d as i64;
    lower_ok && (top >= cap || ordc(&f[d]) == top)
}

/// Slope-pure factors of `g` (`g(0) = 1`), one per Newton polygon segment,
/// with product `≡ g (mod p^m)`.
pub fn slope_split(g: &[BigInt], base: &SlopeBase, m: u32) -> Result<Vec<SlopeFactor>> {
    if base.kind != SlopeKind::PAdic {
        return Err(Error::input("slope splitting needs a p-adic base"));
    }
    if m == 0 {
        return Err(Error::input("precision m must be positive"));
    }
    let g = poly_trim(g.to_vec());
    if g.is_empty() || !g[0].is_one() {
        return Err(Error::input("slope splitting needs constant term 1"));
    }
    let p = base.p;
    let modulus = big_pow(p, m as u64);
    let raw = newton_polygon(&g, &SlopeBase::p_adic(p, 1)?)?;
    let b = base.base_exponent as i64;
    let factors: Vec<SlopeFactor> = if raw.segments.len() <= 1 {
        vec![SlopeFactor {
            slope: raw.segments.first().map(|s| s.0 / b).unwrap_or_default(),
            coeffs: g.iter().map(|c| c.mod_floor(&modulus)).collect(),
            p,
            m,
        }]
    } else {
        raw.segments
            .iter()
            .map(|&(s, len)| {
                let coeffs = pure_factor(&g, p, *s.numer(), *s.denom() as usize, len, m)?;
                Ok(SlopeFactor {
                    slope: s / b,
                    coeffs,
                    p,
                    m,
                })
            })
            .collect::<Result<_>>()?
    };
    for f in &factors {
        if !is_pure_mod(&f.coeffs, f.slope * b, p, m) {
            return Err(Error::invariant(format!("factor of slope {} is not pure", f.slope)));
        }
    }
    let product = factors
        .iter()
        .fold(vec![BigInt::one()], |acc, f| poly_mod(&poly_mul(&acc, &f.coeffs), &modulus));
    let mut expect = poly_mod(&g, &modulus);
    expect.resize(product.len().max(expect.len()), BigInt::zero());
    let mut got = product;
    got.resize(expect.len(), BigInt::zero());
    if got != expect {
        return Err(Error::invariant("slope factors do not multiply back to the input"));
    }
    Ok(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::poly_from_i64;
    use crate::slope::newton_polygon;
    use proptest::prelude::*;

    fn coeffs(f: &SlopeFactor) -> Vec<i64> {
        f.coeffs.iter().map(|c| c.to_i64().unwrap()).collect()
    }

    /// Root of `x^2 + 3x + 5` in `Z_5` congruent to `2`, by Newton iteration.
    fn unit_root_oracle(m: u32) -> i64 {
        let md = 5i64.pow(m);
        let mut x = 2i64;
        for _ in 0..8 {
            let f = (x * x + 3 * x + 5).rem_euclid(md);
            let df = (2 * x + 3).rem_euclid(md);
            let inv = BigInt::from(df).modinv(&BigInt::from(md)).unwrap().to_i64().unwrap();
            x = (x - f * inv).rem_euclid(md);
        }
        x
    }

    #[test]
    fn elliptic_unit_root() {
        let base = SlopeBase::p_adic(5, 1).unwrap();
        let fs = slope_split(&poly_from_i64(&[1, 3, 5]), &base, 3).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[0].slope, Rational64::from_integer(0));
        assert_eq!(fs[1].slope, Rational64::from_integer(1));
        let u = unit_root_oracle(3);
        assert_eq!(coeffs(&fs[0]), vec![1, (-u).rem_euclid(125)]);
        // the unit root reduces to the nonzero root of x^2 + 3x mod 5
        assert_eq!(u % 5, 2);
        assert_eq!(newton_polygon(&fs[1].coeffs, &base).unwrap().segments.len(), 1);
    }

    #[test]
    fn pure_and_split_examples() {
        let base = SlopeBase::p_adic(5, 1).unwrap();
        let fs = slope_split(&poly_from_i64(&[1, 0, 5]), &base, 2).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].slope, Rational64::new(1, 2));
        assert_eq!(coeffs(&fs[0]), vec![1, 0, 5]);
        let fs = slope_split(&poly_from_i64(&[1, -6, 5]), &base, 2).unwrap();
        assert_eq!(coeffs(&fs[0]), vec![1, 24]);
        assert_eq!(coeffs(&fs[1]), vec![1, 20]);
    }

    #[test]
    fn ramified_segment() {
        // slopes 0 and 1/2 over p = 2
        let base = SlopeBase::p_adic(2, 1).unwrap();
        let g = poly_mul(&poly_from_i64(&[1, -1]), &poly_from_i64(&[1, 0, 2]));
        let fs = slope_split(&g, &base, 4).unwrap();
        assert_eq!(coeffs(&fs[0]), vec![1, 15]);
        assert_eq!(coeffs(&fs[1]), vec![1, 0, 2]);
        // slope 1/3 next to slope 1 over p = 3 with base exponent 2
        let base = SlopeBase::p_adic(3, 2).unwrap();
        let g = poly_mul(&poly_from_i64(&[1, 0, 3, 3]), &poly_from_i64(&[1, 9]));
        let fs = slope_split(&g, &base, 3).unwrap();
        assert_eq!(fs[0].slope, Rational64::new(1, 6));
        assert_eq!(fs[1].slope, Rational64::new(1, 1));
        assert_eq!(fs[0].degree(), 3);
    }

    fn unit_poly() -> impl Strategy<Value = IntPoly> {
        proptest::collection::vec(-9i64..=9, 1..=3).prop_map(|mut v| {
            v.insert(0, 1);
            poly_trim(poly_from_i64(&v))
        })
    }

    proptest! {
        #[test]
        fn product_identity(a in unit_poly(), b in unit_poly(), c in unit_poly(), p in prop::sample::select(vec![2u64, 3, 5]), m in 1u32..5) {
            // spread slopes by scaling T
            let scale = |f: &IntPoly, s: i64| -> IntPoly {
                f.iter().enumerate().map(|(i, x)| x * BigInt::from(s).pow(i as u32)).collect()
            };
            let pi = p as i64;
            let g = poly_mul(&poly_mul(&a, &scale(&b, pi)), &scale(&c, pi * pi));
            let base = SlopeBase::p_adic(p, 1).unwrap();
            let fs = slope_split(&g, &base, m).unwrap();
            let np = newton_polygon(&g, &base).unwrap();
            prop_assert_eq!(fs.len(), np.segments.len());
            for f in &fs {
                prop_assert!(is_pure_mod(&f.coeffs, f.slope, p, m));
            }
        }
    }
}
