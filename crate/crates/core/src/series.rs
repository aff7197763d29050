//! Power series truncated at `T^B` over `Q`, `Z` or `Z/p^m`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::arith::big_pow;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ring {
    Q,
    Z,
    /// `Z/p^m`; coefficients are kept in `[0, p^m)`.
    ZMod { p: u64, m: u32 },
}

impl Ring {
    pub fn modulus(&self) -> Option<BigInt> {
        match self {
            Ring::ZMod { p, m } => Some(big_pow(*p, *m as u64)),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Ring::Q => "Q".into(),
            Ring::Z => "Z".into(),
            Ring::ZMod { p, m } => format!("Z/{p}^{m}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "Q" => Ok(Ring::Q),
            "Z" => Ok(Ring::Z),
            _ => {
                let rest = s
                    .strip_prefix("Z/")
                    .ok_or_else(|| Error::input(format!("unknown ring `{s}`")))?;
                let (p, m) = rest
                    .split_once('^')
                    .ok_or_else(|| Error::input(format!("unknown ring `{s}`")))?;
                let p = p.parse().map_err(|_| Error::input(format!("bad prime in `{s}`")))?;
                let m = m.parse().map_err(|_| Error::input(format!("bad exponent in `{s}`")))?;
                Ok(Ring::ZMod { p, m })
            }
        }
    }
}

/// Reduces `x` (with denominator prime to `p`) into `[0, modulus)`.
pub fn reduce_rational(x: &BigRational, p: u64, modulus: &BigInt) -> Result<BigInt> {
    let den = x.denom();
    if (den % BigInt::from(p)).is_zero() {
        return Err(Error::invariant(format!("{x} is not {p}-integral")));
    }
    let inv = den
        .modinv(modulus)
        .ok_or_else(|| Error::invariant(format!("{den} not invertible mod {modulus}")))?;
    Ok((x.numer() * inv).mod_floor(modulus))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    ring: Ring,
    /// Coefficients of `T^0..=T^B`.
    coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    pub fn new(ring: Ring, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::input("a truncated series needs at least the constant term"));
        }
        let mut s = TruncatedSeries { ring, coeffs };
        s.normalize()?;
        Ok(s)
    }

    pub fn from_ints(ring: Ring, coeffs: &[BigInt]) -> Result<Self> {
        Self::new(ring, coeffs.iter().cloned().map(BigRational::from_integer).collect())
    }

    pub fn from_i64(ring: Ring, coeffs: &[i64]) -> Result<Self> {
        Self::new(ring, coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    /// `1 + 0 T + ... + 0 T^B`.
    pub fn one(ring: Ring, b: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); b + 1];
        coeffs[0] = BigRational::one();
        TruncatedSeries { ring, coeffs }
    }

    fn normalize(&mut self) -> Result<()> {
        match &self.ring {
            Ring::Q => {}
            Ring::Z => {
                for (i, c) in self.coeffs.iter().enumerate() {
                    if !c.is_integer() {
                        return Err(Error::invariant(format!("coefficient of T^{i} is {c}, not an integer")));
                    }
                }
            }
            Ring::ZMod { p, .. } => {
                let m = self.ring.modulus().unwrap();
                for c in self.coeffs.iter_mut() {
                    *c = BigRational::from_integer(reduce_rational(c, *p, &m)?);
                }
            }
        }
        Ok(())
    }

    pub fn b(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    /// Integer coefficients; fails over `Q` when some coefficient is not integral.
    pub fn int_coeffs(&self) -> Result<Vec<BigInt>> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.is_integer() {
                    Ok(c.to_integer())
                } else {
                    Err(Error::invariant(format!("coefficient of T^{i} is {c}, not an integer")))
                }
            })
            .collect()
    }

    pub fn truncate(&self, b: usize) -> Self {
        let mut s = self.clone();
        s.coeffs.resize(b + 1, BigRational::zero());
        s
    }

    pub fn with_ring(&self, ring: Ring) -> Result<Self> {
        Self::new(ring, self.coeffs.clone())
    }

    fn check_compatible(&self, other: &Self) -> Result<usize> {
        if self.ring != other.ring {
            return Err(Error::input(format!(
                "ring mismatch: {} vs {}",
                self.ring.name(),
                other.ring.name()
            )));
        }
        Ok(self.b().min(other.b()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let b = self.check_compatible(other)?;
        let c = (0..=b).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect();
        Self::new(self.ring.clone(), c)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let b = self.check_compatible(other)?;
        let c = (0..=b).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect();
        Self::new(self.ring.clone(), c)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let b = self.check_compatible(other)?;
        let mut c = vec![BigRational::zero(); b + 1];
        for i in 0..=b {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(b - i) {
                c[i + j] += &self.coeffs[i] * &other.coeffs[j];
            }
        }
        Self::new(self.ring.clone(), c)
    }

    /// Multiplicative inverse; the constant term must be a unit of the ring.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        let inv0 = match &self.ring {
            Ring::Q => {
                if c0.is_zero() {
                    return Err(Error::invariant("constant term is zero"));
                }
                c0.recip()
            }
            Ring::Z => {
                if c0.abs() != BigRational::one() {
                    return Err(Error::invariant(format!("constant term {c0} is not a unit in Z")));
                }
                c0.clone()
            }
            Ring::ZMod { p, .. } => {
                let m = self.ring.modulus().unwrap();
                let inv = c0
                    .to_integer()
                    .modinv(&m)
                    .ok_or_else(|| Error::invariant(format!("constant term {c0} is not a unit mod {p}")))?;
                BigRational::from_integer(inv)
            }
        };
        let b = self.b();
        let mut out = vec![BigRational::zero(); b + 1];
        out[0] = inv0.clone();
        for n in 1..=b {
            let mut acc = BigRational::zero();
            for k in 1..=n {
                acc += &self.coeffs[k] * &out[n - k];
            }
            out[n] = -(acc * &inv0);
            if let Some(m) = self.ring.modulus() {
                out[n] = BigRational::from_integer(out[n].to_integer().mod_floor(&m));
            }
        }
        Self::new(self.ring.clone(), out)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inverse()?)
    }

    /// `f(T^e)`, truncated at the same `B`.
    pub fn substitute_power(&self, e: usize) -> Self {
        let b = self.b();
        let mut c = vec![BigRational::zero(); b + 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            if i * e > b {
                break;
            }
            c[i * e] = x.clone();
        }
        TruncatedSeries { ring: self.ring.clone(), coeffs: c }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "B": self.b(),
            "ring": self.ring.name(),
            "coeffs": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ring = Ring::parse(v["ring"].as_str().ok_or_else(|| Error::input("missing ring"))?)?;
        let coeffs = v["coeffs"]
            .as_array()
            .ok_or_else(|| Error::input("missing coeffs"))?
            .iter()
            .map(|c| {
                c.as_str()
                    .and_then(|s| s.parse::<BigRational>().ok())
                    .ok_or_else(|| Error::input(format!("bad coefficient {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let s = Self::new(ring, coeffs)?;
        if let Some(b) = v["B"].as_u64() {
            if b as usize != s.b() {
                return Err(Error::input("B does not match the number of coefficients"));
            }
        }
        Ok(s)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*T")?,
                _ => write!(f, "{c}*T^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(T^{}) over {}", self.b() + 1, self.ring.name())
    }
}

/// `exp(s)` over `Q`; requires a zero constant term.
pub fn series_exp(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    if !s.coeffs[0].is_zero() {
        return Err(Error::invariant("exp needs a zero constant term"));
    }
    let b = s.b();
    // E' = s' E  =>  n e_n = sum_{k=1}^n k s_k e_{n-k}
    let mut e = vec![BigRational::zero(); b + 1];
    e[0] = BigRational::one();
    for n in 1..=b {
        let mut acc = BigRational::zero();
        for k in 1..=n {
            acc += BigRational::from_integer(k.into()) * &s.coeffs[k] * &e[n - k];
        }
        e[n] = acc / BigRational::from_integer(n.into());
    }
    TruncatedSeries::new(Ring::Q, e)
}

/// `log(s)` over `Q`; requires constant term 1.
pub fn series_log(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    if !s.coeffs[0].is_one() {
        return Err(Error::invariant("log needs constant term 1"));
    }
    let b = s.b();
    // L' = s'/s  =>  n l_n = n s_n - sum_{k=1}^{n-1} k l_k s_{n-k}
    let mut l = vec![BigRational::zero(); b + 1];
    for n in 1..=b {
        let mut acc = BigRational::from_integer(n.into()) * &s.coeffs[n];
        for k in 1..n {
            acc -= BigRational::from_integer(k.into()) * &l[k] * &s.coeffs[n - k];
        }
        l[n] = acc / BigRational::from_integer(n.into());
    }
    TruncatedSeries::new(Ring::Q, l)
}

/// `exp(sum_k N_k T^k / k)` truncated at `T^B`, `B = counts.len()`; fails
/// unless every coefficient is an integer.
pub fn zeta_series_from_counts(counts: &[BigInt]) -> Result<TruncatedSeries> {
    let b = counts.len();
    let mut s = vec![BigRational::zero(); b + 1];
    for (k, n) in counts.iter().enumerate() {
        s[k + 1] = BigRational::new(n.clone(), BigInt::from(k + 1));
    }
    let z = series_exp(&TruncatedSeries::new(Ring::Q, s)?)?;
    z.with_ring(Ring::Z).map_err(|e| match e {
        Error::Invariant(m) => Error::invariant(format!("point counts are not those of a zeta function: {m}")),
        e => e,
    })
}

pub fn zeta_series_from_u64(counts: &[u64]) -> Result<TruncatedSeries> {
    let c: Vec<BigInt> = counts.iter().map(|&n| n.into()).collect();
    zeta_series_from_counts(&c)
}

/// `prod_d (1 - T^d)^(-c_d)` truncated at `T^B`, where `c_d` is the number
/// of closed points of degree `d`.
pub fn euler_assemble(closed_counts: &[u64], b: usize) -> Result<TruncatedSeries> {
    let mut z = TruncatedSeries::one(Ring::Z, b);
    for (i, &c) in closed_counts.iter().enumerate() {
        let d = i + 1;
        if d > b {
            break;
        }
        // (1 - T^d)^(-1) = sum_j T^{dj}
        let mut geo = vec![BigRational::zero(); b + 1];
        for j in (0..=b).step_by(d) {
            geo[j] = BigRational::one();
        }
        let g = TruncatedSeries::new(Ring::Z, geo)?;
        for _ in 0..c {
            z = z.mul(&g)?;
        }
    }
    Ok(z)
}

/// The point counts `N_1..N_B` encoded by a zeta series with constant term 1.
pub fn counts_from_zeta_series(z: &TruncatedSeries) -> Result<Vec<BigInt>> {
    let l = series_log(&z.with_ring(Ring::Q)?)?;
    (1..=z.b())
        .map(|k| {
            let n = &l.coeffs[k] * BigRational::from_integer(k.into());
            if n.is_integer() {
                Ok(n.to_integer())
            } else {
                Err(Error::invariant(format!("N_{k} = {n} is not an integer")))
            }
        })
        .collect()
}
