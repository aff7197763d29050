//! Command-line front end. Every report is a JSON object with sorted keys
//! that embeds the run configuration (worker count excluded) and the SHA-256
//! of the input file, so identical inputs give byte-identical reports.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::Rational64;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::arith::is_prime;
use crate::count::{count_sequence, DEFAULT_BUDGET};
use crate::cycles::{
    cycle_zeta_series, default_probe_window, divisor_m_sequence, divisor_table, n_from_w, pole_order_probe,
    prime_divisor_bruteforce, w_from_m, CycleCountTable,
};
use crate::error::{Error, Result};
use crate::family::{
    congruence_check, default_big_m, fiber_table, moment_l_rational, moment_l_series, moment_slopes, moment_sum,
    ordinary_scan, pure_moment_l, stratify, unit_root_limit_check, FamilyConfig,
};
use crate::input::{parse_family, parse_variety, validate_input};
use crate::ratfun::{poly_to_json, reconstruct_rational, IntPoly, RationalFunctionZ};
use crate::series::zeta_series_from_u64;
use crate::slope::{
    complex_weight_table, fmt_slope, ladic_unit_check, newton_polygon, parse_slope, pure_degrees, slope_split,
    NewtonPolygon, SlopeBase,
};

pub const BUDGET_ENV: &str = "ZETAKIT_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "zetakit", version, about = "Exact zeta functions, slopes and moment L-functions over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Series truncation order.
    #[arg(long = "B", default_value_t = 8)]
    pub b: usize,
    /// Extra coefficients a reconstruction must reproduce.
    #[arg(long, default_value_t = 3)]
    pub guard: usize,
    /// p-adic precision.
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Enumeration budget (integer or `2^k`); overrides ZETAKIT_BUDGET.
    #[arg(long)]
    pub budget: Option<String>,
    /// Reconstruction degree bounds `dn,dd`.
    #[arg(long)]
    pub bounds: Option<String>,
    /// Worker threads; never affects results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Point counts, zeta series and rational reconstruction of a variety.
    Zeta {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Newton polygon of a polynomial or of a zeta report.
    Np {
        /// Coefficients `c0,c1,...` of a polynomial with `c0 = 1`.
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        zeta: Option<PathBuf>,
        #[arg(long)]
        p: Option<u64>,
        /// Slopes are valuations divided by this exponent of p.
        #[arg(long = "base-exponent")]
        base_exponent: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Pure degree table of a zeta report for one absolute value.
    Slopes {
        zeta: PathBuf,
        /// `complex`, `l=<prime>` or `p`.
        #[arg(long = "abs")]
        abs: String,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long = "base-exponent")]
        base_exponent: Option<u32>,
        /// Bound the slope set by this dimension.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = crate::slope::DEFAULT_SNAP_TOL)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Factor a polynomial into slope-pure parts mod p^m.
    Split {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        p: u64,
        #[arg(long = "base-exponent", default_value_t = 1)]
        base_exponent: u32,
        #[command(flatten)]
        common: Common,
    },
    /// k-th moment L-function of a family.
    Moments {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Slope-s part of the k-th moment L-function mod p^m.
    Purelfn {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value = "0")]
        s: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compare L^[k + p^m M] and L^[k + p^(m+1) M] mod p^m.
    Congruence {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long = "M")]
        big_m: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the slope-0 L-function with L^[k + p^m M] mod p^m.
    Unitroot {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long = "M")]
        big_m: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Newton strata of the fibers of a family.
    Stratify {
        input: PathBuf,
        /// Also write the strata as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Cycle count tables and their zeta series.
    Cycles {
        /// Divisors on projective n-space over F_q.
        #[arg(long)]
        divisors: bool,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        dmax: Option<usize>,
        /// Also count prime divisors by brute force.
        #[arg(long)]
        bruteforce: bool,
        #[arg(long = "from-n")]
        from_n: Option<String>,
        #[arg(long = "from-w")]
        from_w: Option<String>,
        /// `M(0),M(1),...` with `M(0) = 1`.
        #[arg(long = "from-m")]
        from_m: Option<String>,
        #[arg(long, default_value_t = 0)]
        r: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Pole order at T = 1 from partial sums mod p^m (evidence only).
    Poleprobe {
        #[arg(long)]
        divisors: bool,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<u64>,
        /// `M(0),M(1),...`.
        #[arg(long = "m-seq")]
        m_seq: Option<String>,
        #[arg(long)]
        p: u64,
        #[arg(long = "rho-max", default_value_t = 3)]
        rho_max: u32,
        #[arg(long, default_value_t = 12)]
        dmax: usize,
        #[arg(long)]
        window: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Newton versus Hodge polygon across primes for an integral equation.
    OrdinaryScan {
        input: PathBuf,
        #[arg(long)]
        primes: Option<String>,
        /// Scan every prime up to this bound.
        #[arg(long)]
        pmax: Option<u64>,
        /// Hodge polygon as `slope:length,...`; defaults to `0:g,1:g` for genus g.
        #[arg(long)]
        hodge: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check an input file and list diagnostics.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Zeta { common, .. }
            | Command::Np { common, .. }
            | Command::Slopes { common, .. }
            | Command::Split { common, .. }
            | Command::Moments { common, .. }
            | Command::Purelfn { common, .. }
            | Command::Congruence { common, .. }
            | Command::Unitroot { common, .. }
            | Command::Stratify { common, .. }
            | Command::Cycles { common, .. }
            | Command::Poleprobe { common, .. }
            | Command::OrdinaryScan { common, .. }
            | Command::Validate { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Zeta { .. } => "zeta",
            Command::Np { .. } => "np",
            Command::Slopes { .. } => "slopes",
            Command::Split { .. } => "split",
            Command::Moments { .. } => "moments",
            Command::Purelfn { .. } => "purelfn",
            Command::Congruence { .. } => "congruence",
            Command::Unitroot { .. } => "unitroot",
            Command::Stratify { .. } => "stratify",
            Command::Cycles { .. } => "cycles",
            Command::Poleprobe { .. } => "poleprobe",
            Command::OrdinaryScan { .. } => "ordinary-scan",
            Command::Validate { .. } => "validate",
        }
    }
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub b: usize,
    pub guard: usize,
    pub m: u32,
    pub budget: u64,
    pub bounds: Option<(usize, usize)>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_common(c: &Common) -> Result<Self> {
        let budget = match &c.budget {
            Some(s) => parse_budget(s)?,
            None => match std::env::var(BUDGET_ENV) {
                Ok(s) => parse_budget(&s).map_err(|e| Error::Usage(format!("{BUDGET_ENV}: {e}")))?,
                Err(_) => DEFAULT_BUDGET,
            },
        };
        if c.b < 1 || c.guard < 1 || c.m < 1 {
            return Err(Error::Usage("B, guard and m must all be at least 1".into()));
        }
        let bounds = c.bounds.as_deref().map(parse_pair).transpose()?;
        Ok(RunConfig {
            b: c.b,
            guard: c.guard,
            m: c.m,
            budget,
            bounds,
            workers: c.workers,
        })
    }

    fn family(&self) -> FamilyConfig {
        FamilyConfig { guard: self.guard, budget: self.budget }
    }

    fn to_json(&self) -> Value {
        json!({
            "B": self.b,
            "guard": self.guard,
            "m": self.m,
            "budget": self.budget,
            "bounds": self.bounds.map(|(a, b)| json!([a, b])),
        })
    }
}

pub fn parse_budget(s: &str) -> Result<u64> {
    let s = s.trim();
    let v = match s.split_once('^') {
        Some((b, e)) => {
            let (b, e): (u64, u32) = (
                b.trim().parse().map_err(|_| Error::Usage(format!("bad budget '{s}'")))?,
                e.trim().parse().map_err(|_| Error::Usage(format!("bad budget '{s}'")))?,
            );
            b.checked_pow(e).ok_or_else(|| Error::Usage(format!("budget '{s}' overflows")))?
        }
        None => s.parse().map_err(|_| Error::Usage(format!("bad budget '{s}'")))?,
    };
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(Error::Usage(format!("expected dn,dd, got '{s}'"))),
        },
        _ => Err(Error::Usage(format!("expected dn,dd, got '{s}'"))),
    }
}

fn parse_int_list(s: &str) -> Result<Vec<BigInt>> {
    s.split(',')
        .map(|x| x.trim().parse::<BigInt>().map_err(|_| Error::Usage(format!("bad integer '{x}' in list"))))
        .collect()
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| Error::Usage(format!("bad integer '{x}' in list"))))
        .collect()
}

fn read_text(path: &Path) -> Result<(String, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    let hash = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Error::input(format!("{} is not UTF-8", path.display())))?;
    Ok((text, hash))
}

/// The rational function of a `zeta` report or of a bare `{"num", "den"}` object.
fn read_zeta(path: &Path) -> Result<(RationalFunctionZ, Value, String)> {
    let (text, hash) = read_text(path)?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
    if let Some(inner) = v.get("report").cloned() {
        v = inner;
    }
    let r = RationalFunctionZ::from_json(v.get("zeta").unwrap_or(&v))?;
    Ok((r, v, hash))
}

fn base_degree(b: usize) -> Result<u32> {
    u32::try_from(b).map_err(|_| Error::Usage("B is too large".into()))
}

/// Default reconstruction bounds: `(2g, 2)` for a curve model, else an even
/// split of the coefficients left after the guard.
fn default_bounds(cfg: &RunConfig, genus: Option<usize>) -> Result<(usize, usize)> {
    if let Some(b) = cfg.bounds {
        return Ok(b);
    }
    if let Some(g) = genus {
        return Ok((2 * g, 2));
    }
    if cfg.b <= cfg.guard {
        return Err(Error::Usage("B must exceed guard to reconstruct".into()));
    }
    let half = (cfg.b - cfg.guard) / 2;
    Ok((half, half))
}

fn parse_hodge(s: &str) -> Result<NewtonPolygon> {
    let mut segments = Vec::new();
    for part in s.split(',') {
        let (slope, len) = part
            .split_once(':')
            .ok_or_else(|| Error::Usage(format!("hodge segment '{part}' is not slope:length")))?;
        let len: usize = len.trim().parse().map_err(|_| Error::Usage(format!("bad length in '{part}'")))?;
        segments.push((parse_slope(slope.trim())?, len));
    }
    segments.sort();
    Ok(NewtonPolygon { segments })
}

fn poly_arg(s: &str) -> Result<IntPoly> {
    let g = parse_int_list(s)?;
    if g.first().map(|c| *c != BigInt::from(1)).unwrap_or(true) {
        return Err(Error::Usage("polynomial must have constant term 1".into()));
    }
    Ok(g)
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// Output of one command: the JSON report plus any side files.
pub struct CommandOutput {
    pub report: Value,
    pub files: Vec<(PathBuf, String)>,
}

fn execute_inner(cmd: &Command, cfg: &RunConfig) -> Result<(Value, Option<String>, Vec<(PathBuf, String)>)> {
    let mut files = Vec::new();
    let (body, hash) = match cmd {
        Command::Zeta { input, .. } => {
            let (text, hash) = read_text(input)?;
            let v = parse_variety(&text)?;
            let counts = count_sequence(&v, cfg.b, cfg.budget)?.counts;
            let series = zeta_series_from_u64(&counts)?;
            let (dn, dd) = default_bounds(cfg, v.curve_genus)?;
            let rep = reconstruct_rational(&series, dn, dd, cfg.guard)?;
            let r = rep.result.ok_or_else(|| Error::NoMatch {
                dn_max: dn,
                dd_max: dd,
                context: format!("zeta series to T^{}", cfg.b),
            })?;
            let body = json!({
                "p": v.p(),
                "a": v.a(),
                "q": v.q(),
                "dimension": v.dimension(),
                "counts": counts,
                "series": series.to_json(),
                "zeta": r.to_json(),
                "degree": r.degree(),
                "total_degree": r.total_degree(),
                "reconstruction": {"bounds": [dn, dd], "guard_checked": rep.guard_checked, "used_coeffs": rep.used_coeffs},
            });
            (body, Some(hash))
        }
        Command::Np { poly, zeta, p, base_exponent, .. } => {
            let (polys, meta, hash): (Vec<(&str, IntPoly)>, Option<Value>, Option<String>) = match (poly, zeta) {
                (Some(s), None) => (vec![("poly", poly_arg(s)?)], None, None),
                (None, Some(path)) => {
                    let (r, v, h) = read_zeta(path)?;
                    (vec![("num", r.num().to_vec()), ("den", r.den().to_vec())], Some(v), Some(h))
                }
                _ => return Err(Error::Usage("np needs exactly one of --poly or --zeta".into())),
            };
            let p = p
                .or_else(|| meta.as_ref().and_then(|v| v.get("p")).and_then(Value::as_u64))
                .ok_or_else(|| Error::Usage("np needs --p".into()))?;
            let a = base_exponent
                .or_else(|| meta.as_ref().and_then(|v| v.get("a")).and_then(Value::as_u64).map(|a| a as u32))
                .unwrap_or(1);
            let base = SlopeBase::p_adic(p, a)?;
            let mut body = Map::new();
            for (name, g) in polys {
                body.insert(name.into(), newton_polygon(&g, &base)?.to_json());
            }
            body.insert("p".into(), json!(p));
            body.insert("base_exponent".into(), json!(a));
            (Value::Object(body), hash)
        }
        Command::Slopes { zeta, abs, p, base_exponent, dim, tol, .. } => {
            let (r, meta, hash) = read_zeta(zeta)?;
            let p = p
                .or_else(|| meta.get("p").and_then(Value::as_u64))
                .ok_or_else(|| Error::Usage("slopes needs --p".into()))?;
            let a = base_exponent
                .or_else(|| meta.get("a").and_then(Value::as_u64).map(|a| a as u32))
                .unwrap_or(1);
            let dim = dim.or_else(|| meta.get("dimension").and_then(Value::as_u64).map(|d| d as usize));
            let mut body = Map::new();
            let table = if abs == "complex" {
                body.insert("tolerance".into(), json!(tol.to_string()));
                complex_weight_table(&r, &SlopeBase::complex(p, a)?, dim, *tol)?
            } else if abs == "p" {
                pure_degrees(&r, &SlopeBase::p_adic(p, a)?, dim)?
            } else if let Some(l) = abs.strip_prefix("l=") {
                let l: u64 = l.parse().map_err(|_| Error::Usage(format!("bad prime in --abs {abs}")))?;
                body.insert("unit_check".into(), json!(ladic_unit_check(&r, l, p)?));
                pure_degrees(&r, &SlopeBase::l_adic(l, p, a)?, dim)?
            } else {
                return Err(Error::Usage(format!("--abs must be complex, l=<prime> or p, got '{abs}'")));
            };
            body.insert("abs".into(), json!(abs));
            body.insert("p".into(), json!(p));
            body.insert("base_exponent".into(), json!(a));
            body.insert("table".into(), table.to_json());
            (Value::Object(body), Some(hash))
        }
        Command::Split { poly, p, base_exponent, .. } => {
            let g = poly_arg(poly)?;
            let factors = slope_split(&g, &SlopeBase::p_adic(*p, *base_exponent)?, cfg.m)?;
            let body = json!({
                "p": p,
                "base_exponent": base_exponent,
                "modulus": format!("{p}^{}", cfg.m),
                "input": poly_to_json(&g),
                "factors": factors.iter().map(|f| json!({"slope": fmt_slope(&f.slope), "coeffs": strings(&f.coeffs)})).collect::<Vec<_>>(),
            });
            (body, None)
        }
        Command::Moments { input, k, .. } => {
            let (text, hash) = read_text(input)?;
            let f = parse_family(&text)?;
            let table = fiber_table(&f, base_degree(cfg.b)?, &cfg.family())?;
            let l = moment_l_series(&table, *k, cfg.b)?;
            let sums: Vec<String> = (1..=cfg.b).map(|d| moment_sum(&table, *k, d).map(|s| s.to_string())).collect::<Result<_>>()?;
            let bounds = default_bounds(cfg, None)?;
            let r = moment_l_rational(&f, &table, *k, cfg.b, bounds, cfg.guard)?;
            let body = json!({
                "k": k,
                "p": f.p(),
                "a": f.a(),
                "closed_points": table.entries.len(),
                "moment_sums": sums,
                "series": l.series.to_json(),
                "rational": r.rational.to_json(),
                "weights": r.weights.to_json(),
                "weight_bound": *k as usize * f.fiber_dimension() + f.base_dimension(),
            });
            (body, Some(hash))
        }
        Command::Purelfn { input, k, s, .. } => {
            let (text, hash) = read_text(input)?;
            let f = parse_family(&text)?;
            let s = parse_slope(s)?;
            let table = fiber_table(&f, base_degree(cfg.b)?, &cfg.family())?;
            let l = pure_moment_l(&table, *k, s, cfg.b, cfg.m)?;
            let slopes: Vec<String> = moment_slopes(&table, *k)?.iter().map(fmt_slope).collect();
            let body = json!({
                "k": k,
                "s": fmt_slope(&s),
                "slopes_present": slopes,
                "series": l.series.to_json(),
            });
            (body, Some(hash))
        }
        Command::Congruence { input, k, big_m, .. } => {
            let (text, hash) = read_text(input)?;
            let f = parse_family(&text)?;
            let big_m = big_m.unwrap_or_else(|| default_big_m(f.p()));
            let table = fiber_table(&f, base_degree(cfg.b)?, &cfg.family())?;
            let rep = congruence_check(&table, *k, big_m, cfg.m, cfg.b)?;
            let body = json!({
                "k": k,
                "M": big_m,
                "k_low": rep.k_low.to_string(),
                "k_high": rep.k_high.to_string(),
                "passed": rep.passed,
                "min_valuation": rep.min_valuation,
                "valuation_cap": rep.cap,
            });
            (body, Some(hash))
        }
        Command::Unitroot { input, k, big_m, .. } => {
            let (text, hash) = read_text(input)?;
            let f = parse_family(&text)?;
            let big_m = big_m.unwrap_or_else(|| default_big_m(f.p()));
            let table = fiber_table(&f, base_degree(cfg.b)?, &cfg.family())?;
            let passed = unit_root_limit_check(&table, *k, big_m, cfg.m, cfg.b)?;
            let body = json!({"k": k, "M": big_m, "passed": passed});
            (body, Some(hash))
        }
        Command::Stratify { input, csv, .. } => {
            let (text, hash) = read_text(input)?;
            let f = parse_family(&text)?;
            let table = fiber_table(&f, base_degree(cfg.b)?, &cfg.family())?;
            let rep = stratify(&table)?;
            if let Some(path) = csv {
                files.push((path.clone(), rep.to_csv()));
            }
            (rep.to_json(), Some(hash))
        }
        Command::Cycles { divisors, n, q, dmax, bruteforce, from_n, from_w, from_m, r, .. } => {
            let table = if *divisors {
                let (n, q) = (n.ok_or_else(|| Error::Usage("--divisors needs --n".into()))?, q.ok_or_else(|| Error::Usage("--divisors needs --q".into()))?);
                if n == 0 {
                    return Err(Error::Usage("--n must be at least 1".into()));
                }
                divisor_table(n, q, dmax.unwrap_or(cfg.b))?
            } else if let Some(s) = from_n {
                CycleCountTable::from_n(*r, &parse_int_list(s)?)?
            } else if let Some(s) = from_w {
                CycleCountTable::from_w(*r, &parse_int_list(s)?)?
            } else if let Some(s) = from_m {
                CycleCountTable::from_m(*r, &parse_int_list(s)?)?
            } else {
                return Err(Error::Usage("cycles needs --divisors or one of --from-n/--from-w/--from-m".into()));
            };
            let series = cycle_zeta_series(&table)?;
            let mut checks = Map::new();
            checks.insert("n_w_round_trip".into(), json!(n_from_w(&table.w)? == table.n));
            checks.insert("m_w_round_trip".into(), json!(w_from_m(&table.m)? == table.w));
            checks.insert("four_forms_agree".into(), json!(true));
            if table.b >= 2 {
                let n1 = &table.n[0];
                checks.insert("euler_degree_2".into(), json!(table.m[2] == &table.n[1] + n1 * (n1 + 1) / 2));
            }
            let mut body = Map::new();
            if *divisors && *bruteforce {
                let (n, q) = (n.unwrap_or(0), q.unwrap_or(0));
                let brute: Vec<BigInt> = (1..=table.b).map(|d| prime_divisor_bruteforce(n, d, q, cfg.budget)).collect::<Result<_>>()?;
                checks.insert("bruteforce_matches".into(), json!(brute == table.n));
                body.insert("bruteforce_N".into(), json!(strings(&brute)));
            }
            body.insert("table".into(), table.to_json());
            body.insert("series".into(), series.to_json());
            body.insert("checks".into(), Value::Object(checks));
            (Value::Object(body), None)
        }
        Command::Poleprobe { divisors, n, q, m_seq, p, rho_max, dmax, window, .. } => {
            let seq = if *divisors {
                let (n, q) = (n.ok_or_else(|| Error::Usage("--divisors needs --n".into()))?, q.ok_or_else(|| Error::Usage("--divisors needs --q".into()))?);
                divisor_m_sequence(n, q, *dmax)?
            } else if let Some(s) = m_seq {
                parse_int_list(s)?
            } else {
                return Err(Error::Usage("poleprobe needs --divisors or --m-seq".into()));
            };
            if !is_prime(*p) {
                return Err(Error::Usage(format!("{p} is not prime")));
            }
            let d_max = seq.len() - 1;
            let rep = pole_order_probe(&seq, *p, cfg.m, *rho_max, window.unwrap_or_else(|| default_probe_window(d_max)))?;
            (rep.to_json(), None)
        }
        Command::OrdinaryScan { input, primes, pmax, hodge, .. } => {
            let (text, hash) = read_text(input)?;
            let v = parse_variety(&text)?;
            let list: Vec<u64> = match (primes, pmax) {
                (Some(s), None) => parse_u64_list(s)?,
                (None, Some(n)) => (2..=*n).filter(|&x| is_prime(x)).collect(),
                _ => return Err(Error::Usage("ordinary-scan needs exactly one of --primes or --pmax".into())),
            };
            let hp = match (hodge, v.curve_genus) {
                (Some(s), _) => parse_hodge(s)?,
                (None, Some(g)) => NewtonPolygon { segments: vec![(Rational64::from_integer(0), g), (Rational64::from_integer(1), g)] },
                (None, None) => return Err(Error::Usage("ordinary-scan needs --hodge without a curve model".into())),
            };
            let bounds = default_bounds(cfg, v.curve_genus)?;
            let rep = ordinary_scan(&v, &list, &hp, bounds, &cfg.family())?;
            (rep.to_json(), Some(hash))
        }
        Command::Validate { input, .. } => {
            let (text, hash) = read_text(input)?;
            let diags = validate_input(&text);
            let body = json!({
                "valid": diags.is_empty(),
                "diagnostics": diags.iter().map(|d| json!({"line": d.line, "col": d.col, "message": d.message})).collect::<Vec<_>>(),
            });
            (body, Some(hash))
        }
    };
    Ok((body, hash, files))
}

/// Runs a parsed command on the configured worker pool.
pub fn execute(cmd: &Command) -> Result<CommandOutput> {
    let cfg = RunConfig::from_common(cmd.common())?;
    let run = || execute_inner(cmd, &cfg);
    let (body, hash, files) = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {w} workers: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let report = json!({
        "command": cmd.name(),
        "config": cfg.to_json(),
        "input_sha256": hash,
        "report": body,
    });
    Ok(CommandOutput { report, files })
}

/// The report text for `argv` (including the program name).
pub fn run_to_string<I, T>(argv: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    let out = execute(&cli.command)?;
    Ok(render(&out.report))
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::input(format!("cannot write {}: {e}", path.display())))
}

/// Entry point: parses `argv`, writes the report, returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = execute(&cli.command).and_then(|out| {
        let text = render(&out.report);
        match &cli.command.common().out {
            Some(path) => write_file(path, &text)?,
            None => print!("{text}"),
        }
        for (path, body) in &out.files {
            write_file(path, body)?;
        }
        let invalid = matches!(cli.command, Command::Validate { .. }) && out.report["report"]["valid"] == json!(false);
        Ok(if invalid { 2 } else { 0 })
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_syntax() {
        assert_eq!(parse_budget("2^28").unwrap(), 1 << 28);
        assert_eq!(parse_budget("1000").unwrap(), 1000);
        assert!(parse_budget("2^x").is_err());
        assert!(parse_budget("2^80").is_err());
    }

    #[test]
    fn config_validation() {
        let cli = Cli::try_parse_from(["zetakit", "cycles", "--divisors", "--n", "2", "--q", "2", "--guard", "0"]).unwrap();
        assert!(matches!(execute(&cli.command), Err(Error::Usage(_))));
        assert_eq!(parse_pair("2, 3").unwrap(), (2, 3));
        assert!(parse_pair("2").is_err());
    }

    #[test]
    fn hodge_syntax() {
        let h = parse_hodge("1:1,0:1").unwrap();
        assert_eq!(h.segments, vec![(Rational64::from_integer(0), 1), (Rational64::from_integer(1), 1)]);
        assert!(parse_hodge("0-1").is_err());
    }

    #[test]
    fn cycles_report() {
        let s = run_to_string(["zetakit", "cycles", "--divisors", "--n", "2", "--q", "2", "--dmax", "3", "--bruteforce"]).unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        let t = &v["report"]["table"];
        assert_eq!(t["M"], json!(["1", "7", "63", "1023"]));
        assert_eq!(t["N"][0], json!("7"));
        assert_eq!(t["N"][1], json!("35"));
        assert_eq!(t["W"][1], json!("77"));
        for (_, ok) in v["report"]["checks"].as_object().unwrap() {
            assert_eq!(ok, &json!(true));
        }
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_command(["zetakit", "frobnicate"]), 1);
        assert_eq!(run_command(["zetakit", "poleprobe", "--p", "4", "--m-seq", "1,1"]), 1);
    }
}
