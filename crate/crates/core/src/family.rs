//! Families `Y -> X` over an enumerable base: fiber zeta functions at closed
//! points, k-th power moment L-functions, slope-pure moment L-functions and
//! their p-adic congruences, Newton stratification, and ordinary-prime scans.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::arith::{big_pow, is_prime, ord_p};
use crate::count::{
    budget_check, checked_power, checked_q, closed_points_of_degree, count_points, count_sequence,
    count_specialized, counting_cost, rational_points, Ambient, ClosedPoint, SpecializedPoly, VarietyDescriptor,
    DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::ffpoly::tables::{field_tables, Fe, FieldTables};
use crate::ffpoly::MultiPoly;
use crate::ratfun::{
    adams_transform, adams_transform_mod, curve_zeta_from_counts, power_sums, reconstruct_or_fail,
    IntPoly, RationalFunctionZ, DEFAULT_GUARD,
};
use crate::series::{zeta_series_from_u64, Ring, TruncatedSeries};
use crate::slope::{fmt_slope, newton_polygon, pure_degrees, slope_split, NewtonPolygon, PureDegreeTable, SlopeBase};

/// `f : Y -> X`. The base is affine; fiber equations are written in the base
/// parameters followed by the fiber variables.
#[derive(Clone, Debug)]
pub struct FamilyDescriptor {
    pub base: VarietyDescriptor,
    pub fiber_vars: Vec<String>,
    pub fiber_ambient: Ambient,
    pub fiber_equations: Vec<MultiPoly>,
    /// `(dn_max, dd_max)` for reconstructing fiber zetas.
    pub fiber_bounds: (usize, usize),
    /// When set, every fiber is a smooth projective curve of this genus.
    pub fiber_genus: Option<usize>,
    /// Relative dimension; defaults to the fiber ambient dimension minus the
    /// number of fiber equations.
    pub fiber_dimension: Option<usize>,
}

impl FamilyDescriptor {
    pub fn new(
        base: VarietyDescriptor,
        fiber_vars: Vec<String>,
        fiber_ambient: Ambient,
        fiber_equations: Vec<MultiPoly>,
        fiber_bounds: (usize, usize),
    ) -> Result<Self> {
        let f = FamilyDescriptor {
            base,
            fiber_vars,
            fiber_ambient,
            fiber_equations,
            fiber_bounds,
            fiber_genus: None,
            fiber_dimension: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn all_vars(&self) -> Vec<String> {
        let mut v = self.base.vars.clone();
        v.extend(self.fiber_vars.iter().cloned());
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.base.ambient != Ambient::Affine {
            return Err(Error::input("the base of a family must be affine"));
        }
        if self.fiber_vars.is_empty() {
            return Err(Error::input("a family needs at least one fiber variable"));
        }
        if self.fiber_ambient == Ambient::Projective && self.fiber_vars.len() < 2 {
            return Err(Error::input("projective fibers need at least two variables"));
        }
        let all = self.all_vars();
        let nb = self.base.vars.len();
        for f in &self.fiber_equations {
            if f.vars() != all.as_slice() {
                return Err(Error::input("fiber equations must use the base parameters followed by the fiber variables"));
            }
            if self.fiber_ambient == Ambient::Projective {
                let degs: Vec<u32> = f.terms().keys().map(|e| e[nb..].iter().sum()).collect();
                if degs.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::input(format!("fiber equation `{f}` is not homogeneous in the fiber variables")));
                }
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn a(&self) -> u32 {
        self.base.a()
    }

    pub fn q(&self) -> u64 {
        self.base.q()
    }

    pub fn base_dimension(&self) -> usize {
        self.base.dimension()
    }

    pub fn fiber_dimension(&self) -> usize {
        self.fiber_dimension.unwrap_or_else(|| {
            let n = match self.fiber_ambient {
                Ambient::Affine => self.fiber_vars.len(),
                Ambient::Projective => self.fiber_vars.len() - 1,
            };
            n.saturating_sub(self.fiber_equations.len())
        })
    }

    /// Extensions `F_{Q^j}` counted per fiber, `Q` the residue field size.
    fn fiber_count_depth(&self, guard: usize) -> usize {
        match self.fiber_genus {
            Some(g) => g.max(1),
            None => self.fiber_bounds.0 + self.fiber_bounds.1 + guard,
        }
    }

    /// Prefix evaluations needed for one fiber over a residue field of size `qe`.
    fn fiber_cost(&self, qe: u64, guard: usize) -> u128 {
        (1..=self.fiber_count_depth(guard) as u32)
            .map(|j| counting_cost(self.fiber_ambient, self.fiber_vars.len(), checked_q(qe, j)))
            .sum()
    }

    /// `#Y_x(F_{p^t})` for a base point given in `small`, with `F_{p^t}` the field of `big`.
    fn count_fiber(&self, small: &FieldTables, point: &[Fe], big: &FieldTables) -> Result<u64> {
        let emb = big.embedding_from(small)?;
        let vals: Vec<(usize, Fe)> = point.iter().enumerate().map(|(i, &x)| (i, emb.apply(small, big, x))).collect();
        let keep: Vec<usize> = (self.base.vars.len()..self.base.vars.len() + self.fiber_vars.len()).collect();
        let eqs: Vec<SpecializedPoly> = self
            .fiber_equations
            .iter()
            .map(|f| SpecializedPoly::from_multipoly(f, big).substitute(big, &vals).project(&keep))
            .collect();
        count_specialized(big, self.fiber_ambient, self.fiber_vars.len(), &eqs, None, u64::MAX)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyConfig {
    pub guard: usize,
    /// Aggregate number of prefix evaluations allowed for one computation.
    pub budget: u64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            guard: DEFAULT_GUARD,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Zeta function of the fiber over a closed point, over its residue field.
pub fn fiber_zeta(f: &FamilyDescriptor, x: &ClosedPoint, cfg: &FamilyConfig) -> Result<RationalFunctionZ> {
    let (p, a, e) = (f.p(), f.a(), x.degree);
    let small = field_tables(p, a * e)?;
    let point: Vec<Fe> = x.coords.iter().map(|&i| small.from_index(i)).collect();
    let depth = f.fiber_count_depth(cfg.guard);
    let counts = (1..=depth as u32)
        .map(|j| {
            let big = field_tables(p, a * e * j)?;
            f.count_fiber(&small, &point, &big)
        })
        .collect::<Result<Vec<u64>>>()?;
    let qe = checked_q(f.q(), e);
    let r = match f.fiber_genus {
        Some(g) => {
            let c: Vec<BigInt> = counts.iter().map(|&n| n.into()).collect();
            curve_zeta_from_counts(&c, qe, g)
        }
        None => {
            let (dn, dd) = f.fiber_bounds;
            reconstruct_or_fail(&zeta_series_from_u64(&counts)?, dn, dd, cfg.guard)
        }
    };
    r.map_err(|err| err.with_context(format!("fiber over {}", x.key())))
}

/// Fiber zetas at every closed point of the base of degree `<= b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberTable {
    pub p: u64,
    pub a: u32,
    pub b: u32,
    pub entries: Vec<(ClosedPoint, RationalFunctionZ)>,
}

impl FiberTable {
    /// A table supplied directly (entries are sorted by point).
    pub fn from_entries(p: u64, a: u32, b: u32, mut entries: Vec<(ClosedPoint, RationalFunctionZ)>) -> Self {
        entries.sort_by(|x, y| x.0.cmp(&y.0));
        FiberTable { p, a, b, entries }
    }

    pub fn get(&self, x: &ClosedPoint) -> Option<&RationalFunctionZ> {
        self.entries
            .binary_search_by(|(pt, _)| pt.cmp(x))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    fn require(&self, b: usize) -> Result<()> {
        if b > self.b as usize {
            return Err(Error::input(format!(
                "fiber table covers closed points of degree <= {}, need {b}",
                self.b
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|(x, r)| json!({"point": x.key(), "degree": x.degree, "zeta": r.to_json()}))
                .collect(),
        )
    }
}

/// Computes the fiber table, stopping with a budget error as soon as the
/// accumulated enumeration and fiber-counting work exceeds the budget.
pub fn fiber_table(f: &FamilyDescriptor, b: u32, cfg: &FamilyConfig) -> Result<FiberTable> {
    let mut spent: u128 = 0;
    let mut entries = Vec::new();
    for e in 1..=b {
        let qe = checked_q(f.q(), e);
        spent += checked_power(qe, f.base.vars.len());
        budget_check(spent, cfg.budget).map_err(|err| err.with_context(format!("base points of degree {e}")))?;
        let pts = closed_points_of_degree(&f.base, e, cfg.budget)?;
        spent = spent.saturating_add((pts.len() as u128).saturating_mul(f.fiber_cost(qe, cfg.guard)));
        budget_check(spent, cfg.budget).map_err(|err| {
            err.with_context(format!(
                "fiber zetas over {} closed points of degree {e}; completed through degree {}",
                pts.len(),
                e - 1
            ))
        })?;
        let zetas = pts
            .par_iter()
            .map(|x| fiber_zeta(f, x, cfg))
            .collect::<Result<Vec<_>>>()?;
        entries.extend(pts.into_iter().zip(zetas));
    }
    Ok(FiberTable::from_entries(f.p(), f.a(), b, entries))
}

/// `S_{k,d} = sum over closed x with deg x | d of deg(x)·(p_{kd/deg x}(num_x) - p_{kd/deg x}(den_x))`.
pub fn moment_sum(table: &FiberTable, k: u64, d: usize) -> Result<BigInt> {
    table.require(d)?;
    let mut s = BigInt::zero();
    for (x, r) in &table.entries {
        let e = x.degree as usize;
        if d % e != 0 {
            continue;
        }
        let j = k as usize * d / e;
        s += BigInt::from(e) * (&power_sums(r.num(), j)[j] - &power_sums(r.den(), j)[j]);
    }
    Ok(s)
}

fn trunc_mul(a: &[BigInt], b: &[BigInt], n: usize, modulus: Option<&BigInt>) -> IntPoly {
    let mut out = vec![BigInt::zero(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    if let Some(m) = modulus {
        for c in out.iter_mut() {
            *c = c.mod_floor(m);
        }
    }
    out
}

fn substitute_power(g: &[BigInt], e: usize, n: usize) -> IntPoly {
    let mut out = vec![BigInt::zero(); n + 1];
    for (i, c) in g.iter().enumerate() {
        if i * e > n {
            break;
        }
        out[i * e] = c.clone();
    }
    out
}

/// `prod_x top_x(T^deg x) / bottom_x(T^deg x)` to `T^b`.
fn euler_assemble<F>(table: &FiberTable, b: usize, ring: Ring, factor: F) -> Result<TruncatedSeries>
where
    F: Fn(&ClosedPoint, &RationalFunctionZ) -> Result<(IntPoly, IntPoly)> + Sync,
{
    table.require(b)?;
    let modulus = ring.modulus();
    let parts = table
        .entries
        .par_iter()
        .filter(|(x, _)| x.degree as usize <= b)
        .map(|(x, r)| {
            let (top, bottom) = factor(x, r)?;
            let e = x.degree as usize;
            Ok((substitute_power(&top, e, b), substitute_power(&bottom, e, b)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut top = vec![BigInt::zero(); b + 1];
    top[0] = BigInt::one();
    let mut bottom = top.clone();
    for (t, u) in parts {
        top = trunc_mul(&top, &t, b, modulus.as_ref());
        bottom = trunc_mul(&bottom, &u, b, modulus.as_ref());
    }
    let t = TruncatedSeries::from_ints(ring.clone(), &top)?;
    let u = TruncatedSeries::from_ints(ring, &bottom)?;
    t.div(&u)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentLSeries {
    pub k: u64,
    pub series: TruncatedSeries,
}

/// `L^[k](f,T) = prod_x adams(den_x,k)(T^deg x) / adams(num_x,k)(T^deg x)` over `Z`.
pub fn moment_l_series(table: &FiberTable, k: u64, b: usize) -> Result<MomentLSeries> {
    let series = euler_assemble(table, b, Ring::Z, |_, r| {
        Ok((adams_transform(r.den(), k), adams_transform(r.num(), k)))
    })?;
    Ok(MomentLSeries { k, series })
}

/// `L^[k](f,T)` modulo `p^m`, using Adams transforms reduced mod `p^m`.
pub fn moment_l_series_mod(table: &FiberTable, k: u64, b: usize, m: u32) -> Result<TruncatedSeries> {
    let modulus = big_pow(table.p, m as u64);
    euler_assemble(table, b, Ring::ZMod { p: table.p, m }, |_, r| {
        Ok((adams_transform_mod(r.den(), k, &modulus), adams_transform_mod(r.num(), k, &modulus)))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentRational {
    pub k: u64,
    pub rational: RationalFunctionZ,
    /// Complex pure degrees relative to `q`, with slopes checked against
    /// `{0, 1/2, ..., k·m + n}`.
    pub weights: PureDegreeTable,
}

/// Reconstructs `L^[k]` and checks its complex slopes.
pub fn moment_l_rational(
    f: &FamilyDescriptor,
    table: &FiberTable,
    k: u64,
    b: usize,
    bounds: (usize, usize),
    guard: usize,
) -> Result<MomentRational> {
    let l = moment_l_series(table, k, b)?;
    let r = reconstruct_or_fail(&l.series, bounds.0, bounds.1, guard)
        .map_err(|e| e.with_context(format!("moment L-function k={k}")))?;
    let top = k as usize * f.fiber_dimension() + f.base_dimension();
    let weights = pure_degrees(&r, &SlopeBase::complex(f.p(), f.a())?, Some(top))?;
    Ok(MomentRational { k, rational: r, weights })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureMomentLSeries {
    pub k: u64,
    pub s: Rational64,
    pub m: u32,
    pub series: TruncatedSeries,
}

/// Slope-`s` part of `g` relative to `F_{p^base_exponent}`, mod `p^m`; 1 if absent.
fn slope_part(g: &[BigInt], p: u64, base_exponent: u32, s: Rational64, m: u32) -> Result<IntPoly> {
    if g.len() <= 1 {
        return Ok(vec![BigInt::one()]);
    }
    let factors = slope_split(g, &SlopeBase::p_adic(p, base_exponent)?, m)?;
    Ok(factors
        .into_iter()
        .find(|f| f.slope == s)
        .map(|f| f.coeffs)
        .unwrap_or_else(|| vec![BigInt::one()]))
}

/// `L^[k](s,f,T)` mod `p^m`: the Euler product restricted to slope-`s`
/// reciprocal roots, slopes taken relative to `q^{k·deg x}`.
pub fn pure_moment_l(table: &FiberTable, k: u64, s: Rational64, b: usize, m: u32) -> Result<PureMomentLSeries> {
    if m == 0 {
        return Err(Error::input("precision m must be positive"));
    }
    let (p, a) = (table.p, table.a);
    let series = euler_assemble(table, b, Ring::ZMod { p, m }, |x, r| {
        let be = a * x.degree * k as u32;
        let top = slope_part(&adams_transform(r.den(), k), p, be, s, m);
        let bottom = slope_part(&adams_transform(r.num(), k), p, be, s, m);
        match (top, bottom) {
            (Ok(t), Ok(u)) => Ok((t, u)),
            (Err(e), _) | (_, Err(e)) => Err(Error::invariant(format!("slope splitting at {}: {e}", x.key()))),
        }
    })?;
    Ok(PureMomentLSeries { k, s, m, series })
}

/// Slopes (relative to `q^{k·deg x}`) present among the Adams-transformed fibers.
pub fn moment_slopes(table: &FiberTable, k: u64) -> Result<Vec<Rational64>> {
    let mut out = std::collections::BTreeSet::new();
    for (x, r) in &table.entries {
        let base = SlopeBase::p_adic(table.p, table.a * x.degree * k as u32)?;
        for g in [r.num(), r.den()] {
            for (s, _) in newton_polygon(&adams_transform(g, k), &base)?.segments {
                out.insert(s);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Default `M`: `p - 1` for odd `p`, `2` for `p = 2`.
pub fn default_big_m(p: u64) -> u64 {
    if p == 2 {
        2
    } else {
        p - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceReport {
    pub passed: bool,
    /// Least p-adic valuation of the coefficient differences, capped at `cap`.
    pub min_valuation: u32,
    pub cap: u32,
    pub k_low: BigInt,
    pub k_high: BigInt,
}

/// Extra p-adic digits carried beyond `m` so the reported valuation is meaningful.
const CONGRUENCE_HEADROOM: u32 = 8;

fn min_valuation(a: &TruncatedSeries, b: &TruncatedSeries, p: u64, cap: u32) -> u32 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| {
            let d = (x - y).to_integer();
            ord_p(&d, p).map(|v| v.min(cap)).unwrap_or(cap)
        })
        .min()
        .unwrap_or(cap)
}

/// `L^[k + p^m M] ≡ L^[k + p^{m+1} M] (mod p^m)` coefficientwise to `T^b`.
pub fn congruence_check(table: &FiberTable, k: u64, big_m: u64, m: u32, b: usize) -> Result<CongruenceReport> {
    let p = table.p;
    let k_low = BigInt::from(k) + big_pow(p, m as u64) * big_m;
    let k_high = BigInt::from(k) + big_pow(p, m as u64 + 1) * big_m;
    let cap = m + CONGRUENCE_HEADROOM;
    if m == 0 {
        return Ok(CongruenceReport { passed: true, min_valuation: cap, cap, k_low, k_high });
    }
    let to_u64 = |x: &BigInt| -> Result<u64> {
        u64::try_from(x).map_err(|_| Error::input("moment exponent too large"))
    };
    let lo = moment_l_series_mod(table, to_u64(&k_low)?, b, cap)?;
    let hi = moment_l_series_mod(table, to_u64(&k_high)?, b, cap)?;
    let v = min_valuation(&lo, &hi, p, cap);
    Ok(CongruenceReport { passed: v >= m, min_valuation: v, cap, k_low, k_high })
}

/// `L^[k](0,f,T) ≡ L^[k + p^m M](f,T) (mod p^m)` coefficientwise to `T^b`.
pub fn unit_root_limit_check(table: &FiberTable, k: u64, big_m: u64, m: u32, b: usize) -> Result<bool> {
    if m == 0 {
        return Ok(true);
    }
    let kk = k + table.p.pow(m) * big_m;
    let pure = pure_moment_l(table, k, Rational64::zero(), b, m)?;
    let full = moment_l_series_mod(table, kk, b, m)?;
    Ok(pure.series == full)
}

/// Rational points of the base over `F_{q^d}` (log form in the returned tables).
fn rational_base_points(f: &FamilyDescriptor, d: u32) -> Result<(std::sync::Arc<FieldTables>, Vec<Vec<Fe>>)> {
    let t = field_tables(f.p(), f.a() * d)?;
    let eqs: Vec<SpecializedPoly> = f.base.equations.iter().map(|g| SpecializedPoly::from_multipoly(g, &t)).collect();
    let ex = f.base.exclusion.as_ref().map(|g| SpecializedPoly::from_multipoly(g, &t));
    let pts = rational_points(Ambient::Affine, f.base.vars.len(), &t, &eqs, ex.as_ref());
    Ok((t, pts))
}

/// `sum_{λ ∈ X(F_{q^d})} #Y_λ(F_{q^{d·k}})`, counted directly.
fn fiber_count_sum(f: &FamilyDescriptor, d: u32, k: u32, budget: u64) -> Result<BigInt> {
    let qd = checked_q(f.q(), d);
    let qdk = checked_q(f.q(), d * k);
    let enumerate = checked_power(qd, f.base.vars.len());
    budget_check(enumerate, budget)?;
    let (small, pts) = rational_base_points(f, d)?;
    let per = counting_cost(f.fiber_ambient, f.fiber_vars.len(), qdk);
    budget_check(enumerate + per * pts.len() as u128, budget)?;
    let big = field_tables(f.p(), f.a() * d * k)?;
    let counts = pts
        .par_iter()
        .map(|pt| f.count_fiber(&small, pt, &big))
        .collect::<Result<Vec<u64>>>()?;
    Ok(counts.into_iter().map(BigInt::from).sum())
}

/// `#Y(F_{q^d})` for `d = 1..=b`, summing fiber counts over rational base points.
pub fn total_space_counts(f: &FamilyDescriptor, b: usize, budget: u64) -> Result<Vec<BigInt>> {
    (1..=b as u32)
        .map(|d| fiber_count_sum(f, d, 1, budget).map_err(|e| e.with_context(format!("total space over F_q^{d}"))))
        .collect()
}

/// `S_{k,d} = -sum_{λ ∈ X(F_{q^d})} #Y_λ(F_{q^{kd}})`, by direct counting.
pub fn moment_sum_direct(f: &FamilyDescriptor, k: u32, d: u32, budget: u64) -> Result<BigInt> {
    Ok(-fiber_count_sum(f, d, k, budget)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratificationReport {
    pub entries: Vec<(ClosedPoint, PureDegreeTable)>,
}

impl StratificationReport {
    /// `X(d_s, m)`: points whose fiber has `d_s = m`, keyed by `(s, m)`.
    pub fn strata_d(&self) -> BTreeMap<(Rational64, i64), Vec<ClosedPoint>> {
        let mut out: BTreeMap<(Rational64, i64), Vec<ClosedPoint>> = BTreeMap::new();
        for (x, t) in &self.entries {
            for (s, (d, _)) in &t.rows {
                out.entry((*s, *d)).or_default().push(x.clone());
            }
        }
        out
    }

    /// `X(D_s, m)`.
    pub fn strata_big_d(&self) -> BTreeMap<(Rational64, u64), Vec<ClosedPoint>> {
        let mut out: BTreeMap<(Rational64, u64), Vec<ClosedPoint>> = BTreeMap::new();
        for (x, t) in &self.entries {
            for (s, (_, big_d)) in &t.rows {
                out.entry((*s, *big_d)).or_default().push(x.clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let keys = |v: &Vec<ClosedPoint>| v.iter().map(|x| x.key()).collect::<Vec<_>>();
        json!({
            "entries": self.entries.iter().map(|(x, t)| json!({"point": x.key(), "degree": x.degree, "table": t.to_json()})).collect::<Vec<_>>(),
            "strata_d": self.strata_d().iter().map(|((s, m), v)| json!({"slope": fmt_slope(s), "value": m, "points": keys(v)})).collect::<Vec<_>>(),
            "strata_D": self.strata_big_d().iter().map(|((s, m), v)| json!({"slope": fmt_slope(s), "value": m, "points": keys(v)})).collect::<Vec<_>>(),
        })
    }

    /// Rows `point,slope,d_s,D_s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,slope,d_s,D_s\n");
        for (x, t) in &self.entries {
            for (s, (d, big_d)) in &t.rows {
                out.push_str(&format!("\"{}\",{},{d},{big_d}\n", x.key(), fmt_slope(s)));
            }
        }
        out
    }
}

/// p-adic pure degrees of every fiber, relative to `q^{deg x}`.
pub fn stratify(table: &FiberTable) -> Result<StratificationReport> {
    let entries = table
        .entries
        .iter()
        .map(|(x, r)| {
            let base = SlopeBase::p_adic(table.p, table.a * x.degree)?;
            Ok((x.clone(), pure_degrees(r, &base, None)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StratificationReport { entries })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeStatus {
    /// Singular reduction (or the equation vanishes mod p).
    Bad,
    Good { polygon: NewtonPolygon, ordinary: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeRecord {
    pub p: u64,
    pub status: PrimeStatus,
    /// The observed lower envelope after this prime, heights at `0..=deg`.
    pub envelope: Option<Vec<Rational64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdinaryScanReport {
    pub hodge: NewtonPolygon,
    pub records: Vec<PrimeRecord>,
    pub good: usize,
    pub ordinary: usize,
    /// Pointwise minimum over good primes of the Newton polygon heights.
    pub envelope: Vec<Rational64>,
}

impl OrdinaryScanReport {
    pub fn ordinary_fraction(&self) -> Rational64 {
        Rational64::new(self.ordinary as i64, self.good.max(1) as i64)
    }

    pub fn envelope_equals_hodge(&self) -> bool {
        let deg = self.hodge.degree();
        (0..=deg).all(|i| self.envelope.get(i) == Some(&self.hodge.height_at(i)))
    }

    pub fn to_json(&self) -> Value {
        let heights = |h: &[Rational64]| h.iter().map(fmt_slope).collect::<Vec<_>>();
        json!({
            "hodge_polygon": self.hodge.to_json(),
            "primes": self.records.iter().map(|r| match &r.status {
                PrimeStatus::Bad => json!({"p": r.p, "bad": true}),
                PrimeStatus::Good { polygon, ordinary } => json!({
                    "p": r.p,
                    "bad": false,
                    "newton_polygon": polygon.to_json(),
                    "ordinary": ordinary,
                    "observed_lower_envelope": heights(r.envelope.as_deref().unwrap_or(&[])),
                }),
            }).collect::<Vec<_>>(),
            "good_primes": self.good,
            "ordinary_primes": self.ordinary,
            "ordinary_fraction": fmt_slope(&self.ordinary_fraction()),
            "observed_lower_envelope": heights(&self.envelope),
            "envelope_equals_hodge": self.envelope_equals_hodge(),
        })
    }
}

/// Singular points of a projective hypersurface over `F_p` or `F_{p^2}`.
pub fn has_bad_reduction(v: &VarietyDescriptor, budget: u64) -> Result<bool> {
    if v.ambient != Ambient::Projective || v.equations.len() != 1 {
        return Err(Error::input("reduction type is only checked for a single projective equation"));
    }
    let f = &v.equations[0];
    let pb = BigInt::from(v.p());
    if f.terms().values().all(|c| (c % &pb).is_zero()) {
        return Ok(true);
    }
    let mut system = vec![f.clone()];
    system.extend((0..v.vars.len()).map(|i| f.derivative(i)));
    let sing = VarietyDescriptor {
        equations: system,
        exclusion: None,
        ..v.clone()
    };
    for k in 1..=2 {
        if count_points(&sing, k, budget)? > 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Per-prime Newton polygons of the zeta numerator against a supplied Hodge
/// polygon, with the running pointwise-lowest envelope.
pub fn ordinary_scan(
    template: &VarietyDescriptor,
    primes: &[u64],
    hodge: &NewtonPolygon,
    bounds: (usize, usize),
    cfg: &FamilyConfig,
) -> Result<OrdinaryScanReport> {
    let deg = hodge.degree();
    let mut records = Vec::new();
    let mut envelope: Option<Vec<Rational64>> = None;
    let (mut good, mut ordinary) = (0, 0);
    for &p in primes {
        if !is_prime(p) {
            return Err(Error::input(format!("{p} is not prime")));
        }
        let v = template.reduce_mod(p)?;
        if has_bad_reduction(&v, cfg.budget)? {
            records.push(PrimeRecord { p, status: PrimeStatus::Bad, envelope: envelope.clone() });
            continue;
        }
        let zeta = match v.curve_genus {
            Some(g) => {
                let c = count_sequence(&v, g.max(1), cfg.budget)?.counts;
                let c: Vec<BigInt> = c.into_iter().map(BigInt::from).collect();
                curve_zeta_from_counts(&c, v.q(), g)?
            }
            None => {
                let c = count_sequence(&v, bounds.0 + bounds.1 + cfg.guard, cfg.budget)?.counts;
                reconstruct_or_fail(&zeta_series_from_u64(&c)?, bounds.0, bounds.1, cfg.guard)?
            }
        };
        let polygon = newton_polygon(zeta.num(), &SlopeBase::p_adic(p, v.a())?)?;
        if polygon.degree() != deg {
            return Err(Error::invariant(format!(
                "numerator at p={p} has degree {} but the Hodge polygon has length {deg}",
                polygon.degree()
            )));
        }
        let is_ord = polygon == *hodge;
        good += 1;
        ordinary += is_ord as usize;
        let heights: Vec<Rational64> = (0..=deg).map(|i| polygon.height_at(i)).collect();
        envelope = Some(match envelope {
            None => heights,
            Some(env) => env.iter().zip(&heights).map(|(a, b)| *a.min(b)).collect(),
        });
        records.push(PrimeRecord {
            p,
            status: PrimeStatus::Good { polygon, ordinary: is_ord },
            envelope: envelope.clone(),
        });
    }
    let envelope = envelope.ok_or_else(|| Error::input("every listed prime has bad reduction"))?;
    Ok(OrdinaryScanReport {
        hodge: hodge.clone(),
        records,
        good,
        ordinary,
        envelope,
    })
}
