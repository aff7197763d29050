//! Complex absolute values of reciprocal roots. Numerics here only verify
//! exact data; nothing computed in floating point is fed back.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use super::{fmt_slope, PureDegreeTable, SlopeBase};
use crate::error::{Error, Result};
use crate::ratfun::RationalFunctionZ;

pub const DEFAULT_SNAP_TOL: f64 = 1e-6;

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    // value and derivative of sum c_i z^i
    let mut v = Complex64::zero();
    let mut d = Complex64::zero();
    for &a in c.iter().rev() {
        d = d * z + v;
        v = v * z + a;
    }
    (v, d)
}

/// The `α_i` of `g = prod (1 - α_i T)`, via Aberth iteration on the
/// reversed polynomial followed by Newton polishing.
pub fn reciprocal_roots(g: &[BigInt]) -> Vec<Complex64> {
    let mut g: Vec<f64> = g.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect();
    while g.len() > 1 && *g.last().unwrap() == 0.0 {
        g.pop();
    }
    let n = g.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    // reversed: coefficient of x^j is g_{n-j}; monic since g_0 = 1
    let lead = g[0];
    let rev: Vec<Complex64> = (0..=n).map(|j| Complex64::new(g[n - j] / lead, 0.0)).collect();
    let radius = rev
        .iter()
        .take(n)
        .enumerate()
        .map(|(j, c)| c.norm().powf(1.0 / (n - j) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (i as f64 + 0.4) / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (v, d) = horner(&rev, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let repulse: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::zero()
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulse);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (v, d) = horner(&rev, *zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            if !step.is_finite() || step.norm() > 1e-6 * zi.norm().max(1.0) {
                break;
            }
            *zi -= step;
        }
    }
    z
}

fn snap(r: &Complex64, base: &SlopeBase, dimension: Option<usize>, tol: f64) -> Result<Rational64> {
    let s = r.norm().ln() / (base.base_exponent as f64 * (base.p as f64).ln());
    let k = (2.0 * s).round();
    let within_set = k >= 0.0 && dimension.map(|n| k <= 2.0 * n as f64).unwrap_or(true);
    if (s - k / 2.0).abs() > tol || !within_set {
        return Err(Error::invariant(format!(
            "reciprocal root of modulus {:.12e} has slope {s:.9}, not in {{0, 1/2, ..., {}}}",
            r.norm(),
            dimension.map(|n| n.to_string()).unwrap_or_else(|| "n".into())
        )));
    }
    Ok(Rational64::new(k as i64, 2))
}

/// Each cluster's `prod (1 - α T)` must be an integer polynomial up to `tol`.
fn cluster_integrality(roots: &[(Complex64, Rational64)], what: &str) -> Result<()> {
    let mut slopes: Vec<Rational64> = roots.iter().map(|x| x.1).collect();
    slopes.sort();
    slopes.dedup();
    for s in slopes {
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for (a, _) in roots.iter().filter(|x| x.1 == s) {
            let mut next = vec![Complex64::zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * a;
            }
            poly = next;
        }
        for (i, c) in poly.iter().enumerate() {
            let scale = c.norm().max(1.0);
            let off = (c.re - c.re.round()).abs().max(c.im.abs());
            if off > 1e-6 * scale {
                return Err(Error::invariant(format!(
                    "{what} slope-{} factor has non-integral coefficient {c} at T^{i}",
                    fmt_slope(&s)
                )));
            }
        }
    }
    Ok(())
}

/// Complex slopes `log_{p^b}|α|` snapped to half-integers.
pub fn complex_weight_table(
    r: &RationalFunctionZ,
    base: &SlopeBase,
    dimension: Option<usize>,
    tol: f64,
) -> Result<PureDegreeTable> {
    if !(tol > 0.0) {
        return Err(Error::input("snap tolerance must be positive"));
    }
    let tag = |g: &[BigInt]| -> Result<Vec<(Complex64, Rational64)>> {
        reciprocal_roots(g)
            .into_iter()
            .map(|a| Ok((a, snap(&a, base, dimension, tol)?)))
            .collect()
    };
    let zeros = tag(r.num())?;
    let poles = tag(r.den())?;
    cluster_integrality(&zeros, "numerator")?;
    cluster_integrality(&poles, "denominator")?;
    let z: Vec<Rational64> = zeros.iter().map(|x| x.1).collect();
    let p: Vec<Rational64> = poles.iter().map(|x| x.1).collect();
    Ok(PureDegreeTable::from_slopes(&z, &p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::poly_from_i64;

    #[test]
    fn roots_of_known_polynomials() {
        let mut r = reciprocal_roots(&poly_from_i64(&[1, -6, 5]));
        r.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        assert!((r[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(5.0, 0.0)).norm() < 1e-12);
        for a in reciprocal_roots(&poly_from_i64(&[1, 3, 5])) {
            assert!((a.norm() - 5f64.sqrt()).abs() < 1e-12);
        }
        // repeated roots still land within the snapping tolerance
        for a in reciprocal_roots(&poly_from_i64(&[1, -3, 3, -1])) {
            assert!((a.norm() - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn weight_examples() {
        let base = SlopeBase::complex(5, 1).unwrap();
        let f = RationalFunctionZ::from_i64(&[1], &[1, -6, 5]).unwrap();
        assert_eq!(complex_weight_table(&f, &base, Some(1), DEFAULT_SNAP_TOL).unwrap().to_string(), "{0/1:(-1,1), 1/1:(-1,1)}");
        let e = RationalFunctionZ::from_i64(&[1, 3, 5], &[1]).unwrap();
        let t = complex_weight_table(&e, &base, Some(1), 1e-9).unwrap();
        assert_eq!(t.to_string(), "{1/2:(2,2)}");
        let f4 = RationalFunctionZ::from_i64(&[1, -2], &[1]).unwrap();
        let t = complex_weight_table(&f4, &SlopeBase::complex(2, 2).unwrap(), None, DEFAULT_SNAP_TOL).unwrap();
        assert_eq!(t.to_string(), "{1/2:(1,1)}");
    }

    #[test]
    fn off_grid_modulus_rejected() {
        let base = SlopeBase::complex(5, 1).unwrap();
        let f = RationalFunctionZ::from_i64(&[1, -3], &[1]).unwrap();
        assert!(matches!(complex_weight_table(&f, &base, None, DEFAULT_SNAP_TOL), Err(Error::Invariant(_))));
        // slope 1 exceeds dimension 0
        let g = RationalFunctionZ::from_i64(&[1, -5], &[1]).unwrap();
        assert!(complex_weight_table(&g, &base, Some(0), DEFAULT_SNAP_TOL).is_err());
    }
}
