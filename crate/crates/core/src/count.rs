//! Rational-point counting over extension fields and enumeration of closed
//! points.
//!
//! Counting enumerates every coordinate except one and counts the admissible
//! values of the remaining coordinate as the distinct roots of a univariate
//! polynomial (`deg gcd(F, y^Q - y)`), so an `r`-variable chart costs `Q^(r-1)`
//! evaluations. The result is the exact cardinality; nothing is sampled.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ffpoly::tables::{field_tables, Fe, FieldTables, ONE, ZERO};
use crate::ffpoly::unipoly::{self, UniPoly};
use crate::ffpoly::{make_extension_field, FieldDescriptor, FieldElement, MultiPoly};

pub const DEFAULT_BUDGET: u64 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ambient {
    Affine,
    Projective,
}

impl Ambient {
    pub fn as_str(&self) -> &'static str {
        match self {
            Ambient::Affine => "affine",
            Ambient::Projective => "projective",
        }
    }
}

/// A variety over `F_q`, `q = p^a`, presented as an affine or projective
/// subscheme, optionally with a locus removed.
#[derive(Clone, Debug)]
pub struct VarietyDescriptor {
    pub base: Arc<FieldDescriptor>,
    pub ambient: Ambient,
    /// Ambient dimension `n`: `A^n` or `P^n`.
    pub n: usize,
    pub vars: Vec<String>,
    pub equations: Vec<MultiPoly>,
    pub exclusion: Option<MultiPoly>,
    /// Dimension of the variety if known; defaults to `n - #equations`.
    pub dimension: Option<usize>,
    /// When set, the variety is a smooth projective curve of this genus.
    pub curve_genus: Option<usize>,
}

impl VarietyDescriptor {
    pub fn new(
        p: u64,
        a: u32,
        ambient: Ambient,
        vars: Vec<String>,
        equations: Vec<MultiPoly>,
        exclusion: Option<MultiPoly>,
    ) -> Result<Self> {
        let base = make_extension_field(p, a)?;
        let n = match ambient {
            Ambient::Affine => vars.len(),
            Ambient::Projective => vars.len().checked_sub(1).unwrap_or(0),
        };
        let v = VarietyDescriptor {
            base,
            ambient,
            n,
            vars,
            equations,
            exclusion,
            dimension: None,
            curve_genus: None,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::input("ambient dimension must be at least 1"));
        }
        let expected = match self.ambient {
            Ambient::Affine => self.n,
            Ambient::Projective => self.n + 1,
        };
        if self.vars.len() != expected {
            return Err(Error::input(format!(
                "{} space of dimension {} needs {} variables, got {}",
                self.ambient.as_str(),
                self.n,
                expected,
                self.vars.len()
            )));
        }
        for (i, f) in self.equations.iter().chain(self.exclusion.iter()).enumerate() {
            if f.vars() != self.vars.as_slice() {
                return Err(Error::input(format!("polynomial {} uses a different variable list", i + 1)));
            }
            if self.ambient == Ambient::Projective && !f.is_homogeneous() {
                return Err(Error::input(format!("polynomial `{f}` is not homogeneous")));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn a(&self) -> u32 {
        self.base.degree()
    }

    pub fn q(&self) -> u64 {
        self.base.order()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
            .unwrap_or_else(|| self.n.saturating_sub(self.equations.len()))
    }

    /// Same equations over another prime (coefficients are integers).
    pub fn reduce_mod(&self, p: u64) -> Result<Self> {
        let mut v = self.clone();
        v.base = make_extension_field(p, self.a())?;
        Ok(v)
    }
}

/// A Frobenius orbit, represented by its least member.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosedPoint {
    pub degree: u32,
    /// Element indices in `F_{q^degree}` (polynomial basis of the canonical modulus).
    pub coords: Vec<u64>,
}

impl PartialOrd for ClosedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ClosedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.degree, &self.coords).cmp(&(other.degree, &other.coords))
    }
}

impl ClosedPoint {
    /// Coordinates as field elements of `F_{p^(a*degree)}`.
    pub fn elements(&self, p: u64, a: u32) -> Result<Vec<FieldElement>> {
        let f = make_extension_field(p, a * self.degree)?;
        Ok(self.coords.iter().map(|&i| f.element_from_index(i)).collect())
    }

    pub fn key(&self) -> String {
        let c: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        format!("deg{}:[{}]", self.degree, c.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointCountSequence {
    pub counts: Vec<u64>,
}

impl PointCountSequence {
    pub fn truncation(&self) -> usize {
        self.counts.len()
    }
}

/// A polynomial with coefficients already mapped into a tabled field.
#[derive(Clone, Debug)]
pub struct SpecializedPoly {
    pub terms: Vec<(Vec<u32>, Fe)>,
}

impl SpecializedPoly {
    pub fn from_multipoly(f: &MultiPoly, t: &FieldTables) -> Self {
        let p = num_bigint::BigInt::from(t.p());
        let terms = f
            .terms()
            .iter()
            .filter_map(|(e, c)| {
                let r: i64 = num_traits::ToPrimitive::to_i64(&(((c % &p) + &p) % &p)).unwrap();
                let fe = t.from_int(r);
                (fe != ZERO).then(|| (e.clone(), fe))
            })
            .collect();
        SpecializedPoly { terms }
    }

    /// Substitutes values for some variables (exponents become zero).
    pub fn substitute(&self, t: &FieldTables, values: &[(usize, Fe)]) -> Self {
        let mut out: Vec<(Vec<u32>, Fe)> = Vec::new();
        for (e, c) in &self.terms {
            let mut e = e.clone();
            let mut c = *c;
            for &(i, v) in values {
                if e[i] > 0 {
                    c = t.mul(c, t.pow(v, e[i] as u64));
                    e[i] = 0;
                }
            }
            if c == ZERO {
                continue;
            }
            match out.iter_mut().find(|(f, _)| *f == e) {
                Some(entry) => entry.1 = t.add(entry.1, c),
                None => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| *c != ZERO);
        SpecializedPoly { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Keeps only the listed exponent columns (the others must already be zero).
    pub fn project(&self, keep: &[usize]) -> Self {
        let mut out: Vec<(Vec<u32>, Fe)> = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            debug_assert!(e.iter().enumerate().all(|(i, &k)| k == 0 || keep.contains(&i)));
            out.push((keep.iter().map(|&i| e[i]).collect(), *c));
        }
        SpecializedPoly { terms: out }
    }

    pub fn evaluate(&self, t: &FieldTables, point: &[Fe]) -> Fe {
        let mut acc = ZERO;
        for (e, c) in &self.terms {
            let mut term = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = t.mul(term, t.pow(point[i], k as u64));
                }
            }
            acc = t.add(acc, term);
        }
        acc
    }

    fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e[var]).max().unwrap_or(0)
    }
}

pub(crate) fn checked_power(q: u64, r: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..r {
        acc = acc.saturating_mul(q as u128);
    }
    acc
}

/// Number of prefix evaluations needed to count points in `nvars` variables.
pub fn counting_cost(ambient: Ambient, nvars: usize, q: u64) -> u128 {
    match ambient {
        Ambient::Affine => checked_power(q, nvars.saturating_sub(1)),
        Ambient::Projective => (0..nvars)
            .map(|i| checked_power(q, (nvars - i).saturating_sub(2)))
            .sum(),
    }
}

pub(crate) fn budget_check(needed: u128, budget: u64) -> Result<()> {
    if needed > budget as u128 {
        Err(Error::Budget {
            needed,
            budget,
            context: None,
        })
    } else {
        Ok(())
    }
}

struct Group {
    /// (exponents of the prefix variables, coefficient)
    terms: Vec<(Vec<u32>, Fe)>,
}

struct Compiled {
    /// groups[j] = coefficient of y^j
    groups: Vec<Group>,
}

fn compile(f: &SpecializedPoly, prefix: &[usize], last: usize) -> Compiled {
    let deg = f.degree_in(last) as usize;
    let mut groups: Vec<Group> = (0..=deg).map(|_| Group { terms: Vec::new() }).collect();
    for (e, c) in &f.terms {
        let pe: Vec<u32> = prefix.iter().map(|&i| e[i]).collect();
        groups[e[last] as usize].terms.push((pe, *c));
    }
    Compiled { groups }
}

#[inline]
fn eval_into(t: &FieldTables, c: &Compiled, vals: &[Fe], out: &mut UniPoly) {
    out.clear();
    for g in &c.groups {
        let mut acc = ZERO;
        for (e, coeff) in &g.terms {
            let mut term = *coeff;
            for (k, &x) in e.iter().enumerate() {
                if x > 0 {
                    term = t.mul(term, t.pow(vals[k], x as u64));
                    if term == ZERO {
                        break;
                    }
                }
            }
            acc = t.add(acc, term);
        }
        out.push(acc);
    }
    unipoly::trim(out);
}

fn count_last(t: &FieldTables, eqs: &[UniPoly], excl: Option<&UniPoly>) -> u64 {
    let mut g: Option<UniPoly> = None;
    for f in eqs {
        if f.is_empty() {
            continue;
        }
        g = Some(match g {
            None => f.clone(),
            Some(h) => unipoly::gcd(t, &h, f),
        });
    }
    match (g, excl) {
        (None, None) => t.order(),
        (Some(g), None) => unipoly::count_distinct_roots(t, &g),
        (_, Some(e)) if e.is_empty() => 0,
        (None, Some(e)) => t.order() - unipoly::count_distinct_roots(t, e),
        (Some(g), Some(e)) => {
            let both = unipoly::gcd(t, &g, e);
            unipoly::count_distinct_roots(t, &g) - unipoly::count_distinct_roots(t, &both)
        }
    }
}

/// Counts points of `{f = 0 for all f} \ {excl = 0}` in the affine space of
/// the `free` variables (all other variables must already be substituted).
fn count_affine(t: &FieldTables, eqs: &[SpecializedPoly], excl: Option<&SpecializedPoly>, free: &[usize]) -> u64 {
    if free.is_empty() {
        let width = eqs
            .iter()
            .chain(excl)
            .flat_map(|f| f.terms.iter().map(|(e, _)| e.len()))
            .max()
            .unwrap_or(0);
        let zeros = vec![ZERO; width];
        let ok = eqs.iter().all(|f| f.evaluate(t, &zeros) == ZERO)
            && excl.map(|e| e.evaluate(t, &zeros) != ZERO).unwrap_or(true);
        return ok as u64;
    }
    // solve for the variable of least degree
    let last = *free
        .iter()
        .rev()
        .min_by_key(|&&v| eqs.iter().map(|f| f.degree_in(v)).max().unwrap_or(0))
        .unwrap();
    let prefix: Vec<usize> = free.iter().copied().filter(|&v| v != last).collect();
    let ceqs: Vec<Compiled> = eqs.iter().map(|f| compile(f, &prefix, last)).collect();
    let cex: Option<Compiled> = excl.map(|f| compile(f, &prefix, last));
    let q = t.order();
    let r = prefix.len();

    let run_block = |first: Option<u64>| -> u64 {
        let mut vals = vec![ZERO; r];
        let mut digits = vec![0u64; r];
        let start = if first.is_some() { 1 } else { 0 };
        if let Some(f0) = first {
            digits[0] = f0;
            vals[0] = t.from_index(f0);
        }
        let mut bufs: Vec<UniPoly> = vec![Vec::new(); ceqs.len()];
        let mut ebuf: UniPoly = Vec::new();
        let mut total = 0u64;
        loop {
            for (c, b) in ceqs.iter().zip(bufs.iter_mut()) {
                eval_into(t, c, &vals, b);
            }
            let ex = cex.as_ref().map(|c| {
                eval_into(t, c, &vals, &mut ebuf);
                &ebuf
            });
            total += count_last(t, &bufs, ex);
            // odometer over digits[start..]
            let mut i = start;
            loop {
                if i == r {
                    return total;
                }
                digits[i] += 1;
                if digits[i] == q {
                    digits[i] = 0;
                    vals[i] = t.from_index(0);
                    i += 1;
                } else {
                    vals[i] = t.from_index(digits[i]);
                    break;
                }
            }
        }
    };

    if r == 0 {
        run_block(None)
    } else {
        (0..q).into_par_iter().map(|f0| run_block(Some(f0))).sum()
    }
}

/// Counts points of a system already specialised into `t`.
pub fn count_specialized(
    t: &FieldTables,
    ambient: Ambient,
    nvars: usize,
    eqs: &[SpecializedPoly],
    excl: Option<&SpecializedPoly>,
    budget: u64,
) -> Result<u64> {
    budget_check(counting_cost(ambient, nvars, t.order()), budget)?;
    match ambient {
        Ambient::Affine => {
            let free: Vec<usize> = (0..nvars).collect();
            Ok(count_affine(t, eqs, excl, &free))
        }
        Ambient::Projective => {
            let mut total = 0;
            for i in 0..nvars {
                let mut values: Vec<(usize, Fe)> = (0..i).map(|j| (j, ZERO)).collect();
                values.push((i, ONE));
                let se: Vec<SpecializedPoly> = eqs.iter().map(|f| f.substitute(t, &values)).collect();
                let sx = excl.map(|f| f.substitute(t, &values));
                let free: Vec<usize> = (i + 1..nvars).collect();
                total += count_affine(t, &se, sx.as_ref(), &free);
            }
            Ok(total)
        }
    }
}

/// `#V(F_{q^k})`.
pub fn count_points(v: &VarietyDescriptor, k: u32, budget: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::input("extension degree k must be positive"));
    }
    budget_check(counting_cost(v.ambient, v.vars.len(), checked_q(v.q(), k)), budget)?;
    let t = field_tables(v.p(), v.a() * k)?;
    let eqs: Vec<SpecializedPoly> = v.equations.iter().map(|f| SpecializedPoly::from_multipoly(f, &t)).collect();
    let ex = v.exclusion.as_ref().map(|f| SpecializedPoly::from_multipoly(f, &t));
    count_specialized(&t, v.ambient, v.vars.len(), &eqs, ex.as_ref(), budget)
}

pub(crate) fn checked_q(q: u64, k: u32) -> u64 {
    q.checked_pow(k).unwrap_or(u64::MAX)
}

/// `[#V(F_q), ..., #V(F_{q^B})]`.
pub fn count_sequence(v: &VarietyDescriptor, b: usize, budget: u64) -> Result<PointCountSequence> {
    let mut counts = Vec::with_capacity(b);
    for k in 1..=b {
        match count_points(v, k as u32, budget) {
            Ok(c) => counts.push(c),
            Err(e) => {
                return Err(e.with_context(format!(
                    "counting over F_q^{k}; completed through k={}",
                    k - 1
                )))
            }
        }
    }
    Ok(PointCountSequence { counts })
}

/// All rational points over `F_{q^e}` as log-form coordinates in `t`
/// (projective points normalised so the first nonzero coordinate is 1).
pub(crate) fn rational_points(
    v_ambient: Ambient,
    nvars: usize,
    t: &FieldTables,
    eqs: &[SpecializedPoly],
    excl: Option<&SpecializedPoly>,
) -> Vec<Vec<Fe>> {
    let q = t.order();
    let mut out = Vec::new();
    let charts: Vec<(usize, usize)> = match v_ambient {
        Ambient::Affine => vec![(0, 0)],
        Ambient::Projective => (0..nvars).map(|i| (i, i + 1)).collect(),
    };
    for (lead, free_from) in charts {
        let free = nvars - free_from;
        let total = checked_power(q, free) as u64;
        for code in 0..total {
            let mut pt = vec![ZERO; nvars];
            if v_ambient == Ambient::Projective {
                pt[lead] = ONE;
            }
            let mut c = code;
            for slot in pt.iter_mut().skip(free_from) {
                *slot = t.from_index(c % q);
                c /= q;
            }
            if eqs.iter().all(|f| f.evaluate(t, &pt) == ZERO)
                && excl.map(|e| e.evaluate(t, &pt) != ZERO).unwrap_or(true)
            {
                out.push(pt);
            }
        }
    }
    out
}

/// Closed points of exactly degree `e`, each represented by the
/// lexicographically least orbit member (by element index).
pub fn closed_points_of_degree(v: &VarietyDescriptor, e: u32, budget: u64) -> Result<Vec<ClosedPoint>> {
    let nvars = v.vars.len();
    budget_check(checked_power(checked_q(v.q(), e), nvars), budget)
        .map_err(|err| err.with_context(format!("closed points of degree {e}")))?;
    let t = field_tables(v.p(), v.a() * e)?;
    let eqs: Vec<SpecializedPoly> = v.equations.iter().map(|f| SpecializedPoly::from_multipoly(f, &t)).collect();
    let ex = v.exclusion.as_ref().map(|f| SpecializedPoly::from_multipoly(f, &t));
    let pts = rational_points(v.ambient, nvars, &t, &eqs, ex.as_ref());
    let mut out = Vec::new();
    for pt in pts {
        let idx: Vec<u64> = pt.iter().map(|&x| t.to_index(x)).collect();
        let mut orbit_min = idx.clone();
        let mut cur = pt.clone();
        let mut degree = e;
        for step in 1..=e {
            cur = cur.iter().map(|&x| t.frob_p(x, v.a())).collect();
            if cur == pt {
                degree = step;
                break;
            }
            let ci: Vec<u64> = cur.iter().map(|&x| t.to_index(x)).collect();
            if ci < orbit_min {
                orbit_min = ci;
            }
        }
        if degree == e && orbit_min == idx {
            out.push(ClosedPoint { degree: e, coords: idx });
        }
    }
    out.sort();
    Ok(out)
}

/// All closed points of degree `<= b`.
pub fn enumerate_closed_points(v: &VarietyDescriptor, b: u32, budget: u64) -> Result<Vec<ClosedPoint>> {
    let nvars = v.vars.len();
    let needed: u128 = (1..=b)
        .map(|e| checked_power(checked_q(v.q(), e), nvars))
        .sum();
    budget_check(needed, budget).map_err(|e| e.with_context("closed point enumeration"))?;
    let mut out = Vec::new();
    for e in 1..=b {
        out.extend(closed_points_of_degree(v, e, budget)?);
    }
    Ok(out)
}

/// Number of closed points of each degree `1..=b`.
pub fn closed_point_counts(points: &[ClosedPoint], b: u32) -> Vec<u64> {
    let mut c = vec![0u64; b as usize];
    for pt in points {
        if pt.degree <= b {
            c[pt.degree as usize - 1] += 1;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::divisors;
    use crate::ffpoly::{parse_polynomial, var_list};

    fn variety(p: u64, a: u32, amb: Ambient, vars: &[&str], eqs: &[&str], excl: Option<&str>) -> VarietyDescriptor {
        let vars = var_list(vars);
        let eqs = eqs.iter().map(|e| parse_polynomial(e, &vars).unwrap()).collect();
        let ex = excl.map(|e| parse_polynomial(e, &vars).unwrap());
        VarietyDescriptor::new(p, a, amb, vars, eqs, ex).unwrap()
    }

    /// Naive oracle: test every tuple with polynomial-basis arithmetic.
    fn naive_count(v: &VarietyDescriptor, k: u32) -> u64 {
        let f = make_extension_field(v.p(), v.a() * k).unwrap();
        let q = f.order();
        let nv = v.vars.len();
        let mut count = 0;
        let total = q.pow(nv as u32);
        for code in 0..total {
            let mut c = code;
            let pt: Vec<FieldElement> = (0..nv)
                .map(|_| {
                    let e = f.element_from_index(c % q);
                    c /= q;
                    e
                })
                .collect();
            if v.ambient == Ambient::Projective {
                // keep only normalised representatives
                match pt.iter().position(|x| !x.is_zero()) {
                    Some(i) if pt[i].index() == 1 => {}
                    _ => continue,
                }
            }
            let on = v.equations.iter().all(|g| g.evaluate(&pt).unwrap().is_zero());
            let kept = v.exclusion.as_ref().map(|g| !g.evaluate(&pt).unwrap().is_zero()).unwrap_or(true);
            if on && kept {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn spaces() {
        let a1 = variety(3, 1, Ambient::Affine, &["x"], &[], None);
        for k in 1..=4 {
            assert_eq!(count_points(&a1, k, DEFAULT_BUDGET).unwrap(), 3u64.pow(k));
        }
        let p1 = variety(2, 1, Ambient::Projective, &["x", "y"], &[], None);
        for k in 1..=5 {
            assert_eq!(count_points(&p1, k, DEFAULT_BUDGET).unwrap(), 2u64.pow(k) + 1);
        }
        let a2 = variety(2, 1, Ambient::Affine, &["x", "y"], &[], None);
        assert_eq!(count_sequence(&a2, 3, DEFAULT_BUDGET).unwrap().counts, vec![4, 16, 64]);
        let p1_3 = variety(3, 1, Ambient::Projective, &["x", "y"], &[], None);
        assert_eq!(count_sequence(&p1_3, 2, DEFAULT_BUDGET).unwrap().counts, vec![4, 10]);
        for (q, n) in [(2u64, 2usize), (3, 2), (2, 3)] {
            let names: Vec<String> = (0..=n).map(|i| format!("x{i}")).collect();
            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let pn = variety(q, 1, Ambient::Projective, &refs, &[], None);
            for k in 1..=3u32 {
                let qk = q.pow(k);
                let expect = (qk.pow(n as u32 + 1) - 1) / (qk - 1);
                assert_eq!(count_points(&pn, k, DEFAULT_BUDGET).unwrap(), expect);
            }
        }
    }

    #[test]
    fn elliptic_curve_over_f5() {
        let e = variety(5, 1, Ambient::Projective, &["x", "y", "z"], &["y^2*z - x^3 - x*z^2 - z^3"], None);
        assert_eq!(naive_count(&e, 1), 9);
        assert_eq!(naive_count(&e, 2), 27);
        assert_eq!(count_sequence(&e, 2, DEFAULT_BUDGET).unwrap().counts, vec![9, 27]);
    }

    #[test]
    fn fast_counter_matches_naive() {
        let cases = vec![
            variety(3, 1, Ambient::Affine, &["x", "y"], &["x^3 + y^3 + 1"], None),
            variety(2, 1, Ambient::Affine, &["x", "y"], &["y^2 + x*y + x^3 + 1"], None),
            variety(2, 2, Ambient::Affine, &["x", "y", "z"], &["x*y - z", "x + y + z + 1"], None),
            variety(5, 1, Ambient::Affine, &["x", "y"], &["y^2 - x^5 + x"], Some("x*y")),
            variety(3, 1, Ambient::Projective, &["x", "y", "z"], &["x^2 + y^2 - z^2", "x*y"], None),
            variety(7, 1, Ambient::Affine, &["x"], &[], Some("x*(x-1)")),
            variety(2, 1, Ambient::Projective, &["x", "y", "z"], &["x^4 + y^4 + z^4 + x*y*z^2"], None),
        ];
        for v in &cases {
            for k in 1..=2 {
                assert_eq!(count_points(v, k, DEFAULT_BUDGET).unwrap(), naive_count(v, k), "{:?} k={k}", v.equations);
            }
        }
    }

    #[test]
    fn exclusion_consistency() {
        let amb = variety(5, 1, Ambient::Affine, &["x", "y"], &["y^2 - x^3 - x - 1"], None);
        let open = variety(5, 1, Ambient::Affine, &["x", "y"], &["y^2 - x^3 - x - 1"], Some("x - y"));
        let locus = variety(5, 1, Ambient::Affine, &["x", "y"], &["y^2 - x^3 - x - 1", "x - y"], None);
        for k in 1..=3 {
            let a = count_points(&amb, k, DEFAULT_BUDGET).unwrap();
            let o = count_points(&open, k, DEFAULT_BUDGET).unwrap();
            let l = count_points(&locus, k, DEFAULT_BUDGET).unwrap();
            assert_eq!(o + l, a);
        }
    }

    #[test]
    fn closed_points_examples() {
        let a1 = variety(2, 1, Ambient::Affine, &["x"], &[], None);
        let pts = enumerate_closed_points(&a1, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(closed_point_counts(&pts, 2), vec![2, 1]);
        let open = variety(5, 1, Ambient::Affine, &["x"], &[], Some("x*(x-1)"));
        let pts = enumerate_closed_points(&open, 1, DEFAULT_BUDGET).unwrap();
        let reps: Vec<u64> = pts.iter().map(|p| p.coords[0]).collect();
        assert_eq!(reps, vec![2, 3, 4]);
        let p1 = variety(2, 1, Ambient::Projective, &["x", "y"], &[], None);
        assert_eq!(enumerate_closed_points(&p1, 1, DEFAULT_BUDGET).unwrap().len(), 3);
    }

    #[test]
    fn divisor_sum_identity() {
        let cases = vec![
            variety(2, 1, Ambient::Affine, &["x"], &["x^3 + x + 1"], None),
            variety(3, 1, Ambient::Projective, &["x", "y", "z"], &["y^2*z - x^3 + x*z^2"], None),
            variety(2, 2, Ambient::Affine, &["x", "y"], &["x*y + 1"], None),
            variety(5, 1, Ambient::Affine, &["x"], &[], Some("x*(x-1)")),
        ];
        for v in &cases {
            let b = 4;
            let pts = enumerate_closed_points(v, b, DEFAULT_BUDGET).unwrap();
            let c = closed_point_counts(&pts, b);
            let n = count_sequence(v, b as usize, DEFAULT_BUDGET).unwrap().counts;
            for d in 1..=b as usize {
                let s: u64 = divisors(d).iter().map(|&e| e as u64 * c[e - 1]).sum();
                assert_eq!(s, n[d - 1]);
            }
            // every representative really has an orbit of its stated size
            for pt in &pts {
                let els = pt.elements(v.p(), v.a()).unwrap();
                let moved: Vec<_> = els.iter().map(|x| x.frobenius(v.a(), pt.degree)).collect();
                assert_eq!(moved, els);
                if pt.degree > 1 {
                    let once: Vec<_> = els.iter().map(|x| x.frobenius(v.a(), 1)).collect();
                    assert_ne!(once, els);
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let a3 = variety(5, 1, Ambient::Affine, &["x", "y", "z"], &["x + y + z"], None);
        match count_points(&a3, 3, 1000) {
            Err(Error::Budget { needed, .. }) => assert_eq!(needed, 125 * 125),
            other => panic!("{other:?}"),
        }
        match count_sequence(&a3, 3, 1000) {
            Err(Error::Budget { context: Some(c), .. }) => assert!(c.contains("completed through k=2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projective_requires_homogeneous() {
        let vars = var_list(&["x", "y", "z"]);
        let f = parse_polynomial("y^2 - x^3 - 1", &vars).unwrap();
        assert!(VarietyDescriptor::new(5, 1, Ambient::Projective, vars, vec![f], None).is_err());
    }

    #[test]
    fn deterministic_across_pools() {
        let v = variety(3, 1, Ambient::Projective, &["x", "y", "z"], &["x^3 + y^3 + z^3 - x*y*z"], None);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| count_sequence(&v, 4, DEFAULT_BUDGET).unwrap());
        let b = many.install(|| count_sequence(&v, 4, DEFAULT_BUDGET).unwrap());
        assert_eq!(a, b);
    }
}
