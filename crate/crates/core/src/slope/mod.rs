//! Slopes of reciprocal roots: Newton polygons, pure degrees `(d_s, D_s)`,
//! the ℓ-adic unit test, complex weights, and slope-pure factorisation.

mod complex;
mod split;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::arith::{is_prime, ord_p};
use crate::error::{Error, Result};
use crate::ratfun::RationalFunctionZ;

pub use complex::{complex_weight_table, reciprocal_roots, DEFAULT_SNAP_TOL};
pub use split::{is_pure_mod, slope_split, SlopeFactor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlopeKind {
    Complex,
    LAdic(u64),
    PAdic,
}

/// How slopes are measured: `s(α) = ord(α) / b` or `log|α| / (b log p)`,
/// where the base field has `p^b` elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlopeBase {
    pub kind: SlopeKind,
    /// Characteristic of the base field.
    pub p: u64,
    /// `b` with base field `F_{p^b}`; `a·e·k` for `F_{q^{ek}}`, `q = p^a`.
    pub base_exponent: u32,
}

impl SlopeBase {
    pub fn new(kind: SlopeKind, p: u64, base_exponent: u32) -> Result<Self> {
        if base_exponent == 0 {
            return Err(Error::input("base exponent must be positive"));
        }
        if !is_prime(p) {
            return Err(Error::input(format!("{p} is not prime")));
        }
        if let SlopeKind::LAdic(l) = kind {
            if !is_prime(l) {
                return Err(Error::input(format!("ℓ = {l} is not prime")));
            }
            if l == p {
                return Err(Error::input(format!("ℓ must differ from the characteristic {p}")));
            }
        }
        Ok(SlopeBase { kind, p, base_exponent })
    }

    pub fn p_adic(p: u64, base_exponent: u32) -> Result<Self> {
        Self::new(SlopeKind::PAdic, p, base_exponent)
    }

    pub fn l_adic(l: u64, p: u64, base_exponent: u32) -> Result<Self> {
        Self::new(SlopeKind::LAdic(l), p, base_exponent)
    }

    pub fn complex(p: u64, base_exponent: u32) -> Result<Self> {
        Self::new(SlopeKind::Complex, p, base_exponent)
    }

    /// The prime whose valuation is used; `None` for complex slopes.
    pub fn valuation_prime(&self) -> Option<u64> {
        match self.kind {
            SlopeKind::Complex => None,
            SlopeKind::LAdic(l) => Some(l),
            SlopeKind::PAdic => Some(self.p),
        }
    }

    /// Same kind, relative to `F_{p^(b·k)}`.
    pub fn scaled(&self, k: u32) -> Self {
        SlopeBase {
            base_exponent: self.base_exponent * k,
            ..*self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// `(slope, length)`, slopes strictly increasing.
    pub segments: Vec<(Rational64, usize)>,
}

impl NewtonPolygon {
    pub fn degree(&self) -> usize {
        self.segments.iter().map(|s| s.1).sum()
    }

    /// Slope multiset, one entry per reciprocal root.
    pub fn slopes(&self) -> Vec<Rational64> {
        self.segments
            .iter()
            .flat_map(|&(s, l)| std::iter::repeat(s).take(l))
            .collect()
    }

    /// Height at integer abscissa `i` (vertex at `(0, 0)`).
    pub fn height_at(&self, i: usize) -> Rational64 {
        let mut h = Rational64::zero();
        let mut x = 0;
        for &(s, l) in &self.segments {
            let step = l.min(i.saturating_sub(x));
            h += s * step as i64;
            x += step;
        }
        h
    }

    pub fn vertices(&self) -> Vec<(usize, Rational64)> {
        let mut v = vec![(0, Rational64::zero())];
        for &(s, l) in &self.segments {
            let (x, y) = *v.last().unwrap();
            v.push((x + l, y + s * l as i64));
        }
        v
    }

    pub fn is_flat(&self) -> bool {
        self.segments.iter().all(|s| s.0.is_zero())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.segments
                .iter()
                .map(|(s, l)| json!({"slope": fmt_slope(s), "length": l}))
                .collect(),
        )
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .segments
            .iter()
            .map(|(s, l)| format!("({}, {l})", fmt_slope(s)))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Slopes print as `a/b` even when integral.
pub fn fmt_slope(s: &Rational64) -> String {
    format!("{}/{}", s.numer(), s.denom())
}

pub fn parse_slope(s: &str) -> Result<Rational64> {
    let bad = || Error::input(format!("bad slope `{s}`"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(a, b))
        }
        None => Ok(Rational64::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Lower convex hull of `(i, ord(a_i))` over the nonzero coefficients,
/// slopes divided by the base exponent.
pub fn newton_polygon(g: &[BigInt], base: &SlopeBase) -> Result<NewtonPolygon> {
    let prime = base
        .valuation_prime()
        .ok_or_else(|| Error::input("Newton polygons need a p-adic or ℓ-adic base"))?;
    let pts: Vec<(i64, i64)> = g
        .iter()
        .enumerate()
        .filter_map(|(i, c)| ord_p(c, prime).map(|o| (i as i64, o as i64)))
        .collect();
    if pts.is_empty() {
        return Err(Error::input("zero polynomial has no Newton polygon"));
    }
    if pts[0].0 != 0 {
        return Err(Error::input("Newton polygon needs a nonzero constant term"));
    }
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop the middle point unless it lies strictly below the chord
            if (y2 - y1) * (pt.0 - x1) >= (pt.1 - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let b = base.base_exponent as i64;
    let segments = hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            (Rational64::new(w[1].1 - w[0].1, len * b), len as usize)
        })
        .collect();
    Ok(NewtonPolygon { segments })
}

/// `slope -> (d_s, D_s)` with `d_s = #zeros - #poles` and `D_s = #zeros + #poles`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureDegreeTable {
    pub rows: BTreeMap<Rational64, (i64, u64)>,
    /// lcm of the slope denominators.
    pub denominator_report: u64,
}

impl PureDegreeTable {
    pub fn from_slopes(zeros: &[Rational64], poles: &[Rational64]) -> Self {
        let mut rows: BTreeMap<Rational64, (i64, u64)> = BTreeMap::new();
        for s in zeros {
            let e = rows.entry(*s).or_default();
            e.0 += 1;
            e.1 += 1;
        }
        for s in poles {
            let e = rows.entry(*s).or_default();
            e.0 -= 1;
            e.1 += 1;
        }
        let denominator_report = rows.keys().fold(1i64, |acc, s| acc.lcm(s.denom())) as u64;
        PureDegreeTable {
            rows,
            denominator_report,
        }
    }

    pub fn get(&self, s: Rational64) -> (i64, u64) {
        self.rows.get(&s).copied().unwrap_or((0, 0))
    }

    pub fn zeros_at(&self, s: Rational64) -> u64 {
        let (d, big_d) = self.get(s);
        ((big_d as i64 + d) / 2) as u64
    }

    pub fn poles_at(&self, s: Rational64) -> u64 {
        let (d, big_d) = self.get(s);
        ((big_d as i64 - d) / 2) as u64
    }

    /// Row sums and parity; `r` is the function the table was read from.
    pub fn check_invariants(&self, r: &RationalFunctionZ) -> Result<()> {
        let sd: i64 = self.rows.values().map(|x| x.0).sum();
        let sbig: u64 = self.rows.values().map(|x| x.1).sum();
        if sd != r.degree() || sbig as usize != r.total_degree() {
            return Err(Error::invariant(format!(
                "pure degree sums ({sd}, {sbig}) differ from ({}, {})",
                r.degree(),
                r.total_degree()
            )));
        }
        for (s, &(d, big_d)) in &self.rows {
            if (big_d as i64) < d.abs() || (big_d as i64 + d) % 2 != 0 {
                return Err(Error::invariant(format!("row {} = ({d}, {big_d}) is inconsistent", fmt_slope(s))));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows.iter().map(|(s, (d, big_d))| json!({"slope": fmt_slope(s), "d": d, "D": big_d})).collect::<Vec<_>>(),
            "denominator_report": self.denominator_report,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let mut rows = BTreeMap::new();
        for row in v["rows"].as_array().ok_or_else(|| Error::input("missing rows"))? {
            let s = parse_slope(row["slope"].as_str().ok_or_else(|| Error::input("missing slope"))?)?;
            let d = row["d"].as_i64().ok_or_else(|| Error::input("missing d"))?;
            let big_d = row["D"].as_u64().ok_or_else(|| Error::input("missing D"))?;
            rows.insert(s, (d, big_d));
        }
        let denominator_report = v["denominator_report"].as_u64().ok_or_else(|| Error::input("missing denominator_report"))?;
        Ok(PureDegreeTable {
            rows,
            denominator_report,
        })
    }
}

impl fmt::Display for PureDegreeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .rows
            .iter()
            .map(|(s, (d, big_d))| format!("{}:({d},{big_d})", fmt_slope(s)))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Pure degrees of `r`. With `dimension = Some(n)`, slopes outside `[0, n]`
/// (non-complex) or `{0, 1/2, ..., n}` (complex) are errors.
pub fn pure_degrees(r: &RationalFunctionZ, base: &SlopeBase, dimension: Option<usize>) -> Result<PureDegreeTable> {
    let table = match base.kind {
        SlopeKind::Complex => complex_weight_table(r, base, dimension, DEFAULT_SNAP_TOL)?,
        _ => {
            let zeros = newton_polygon(r.num(), base)?.slopes();
            let poles = newton_polygon(r.den(), base)?.slopes();
            let t = PureDegreeTable::from_slopes(&zeros, &poles);
            if let Some(n) = dimension {
                let top = Rational64::from_integer(n as i64);
                if let Some(s) = t.rows.keys().find(|s| **s < Rational64::zero() || **s > top) {
                    return Err(Error::invariant(format!(
                        "slope {} lies outside [0, {n}]",
                        fmt_slope(s)
                    )));
                }
            }
            t
        }
    };
    table.check_invariants(r)?;
    Ok(table)
}

/// True iff every zero and pole of `r` is an ℓ-adic unit.
pub fn ladic_unit_check(r: &RationalFunctionZ, l: u64, p: u64) -> Result<bool> {
    let base = SlopeBase::l_adic(l, p, 1)?;
    Ok(newton_polygon(r.num(), &base)?.is_flat() && newton_polygon(r.den(), &base)?.is_flat())
}
