//! Text formats for varieties and families.
//!
//! A file is a sequence of `key=value` header lines followed by one
//! polynomial per line; `#` starts a comment. Variety keys: `p`, `a`,
//! `ambient`, `n`, `vars`, `exclude`, `model` (`curve:<genus>`), `dim`.
//! Families add `params` (base variables), `fiber_vars`, `fiber_ambient`,
//! `fiber_bounds`, `fiber_model`, `fiber_dim` and repeatable `base_equation`;
//! their polynomial lines are fiber equations in `params` then `fiber_vars`.

use std::collections::BTreeMap;
use std::fmt;

use crate::arith::is_prime;
use crate::count::{Ambient, VarietyDescriptor};
use crate::error::{Error, Result};
use crate::family::FamilyDescriptor;
use crate::ffpoly::{least_irreducible, parse_polynomial_at, FieldDescriptor, MultiPoly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based; 0 for problems that belong to the file as a whole.
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Clone, Debug)]
pub enum InputFile {
    Variety(VarietyDescriptor),
    Family(FamilyDescriptor),
}

const VARIETY_KEYS: &[&str] = &["p", "a", "ambient", "n", "vars", "exclude", "model", "dim"];
const FAMILY_KEYS: &[&str] = &[
    "params",
    "fiber_vars",
    "fiber_ambient",
    "fiber_bounds",
    "fiber_model",
    "fiber_dim",
    "base_equation",
];

struct Analyzer {
    diags: Vec<Diagnostic>,
    headers: BTreeMap<String, (usize, String)>,
    base_equations: Vec<(usize, String)>,
    bodies: Vec<(usize, String)>,
}

impl Analyzer {
    fn diag(&mut self, line: usize, col: usize, message: impl Into<String>) {
        self.diags.push(Diagnostic { line, col, message: message.into() });
    }

    fn error(&mut self, e: Error, line: usize) {
        match e {
            Error::Parse { line, col, msg } => self.diag(line, col, msg),
            other => self.diag(line, 1, other.to_string()),
        }
    }

    fn scan(text: &str) -> Self {
        let mut a = Analyzer {
            diags: Vec::new(),
            headers: BTreeMap::new(),
            base_equations: Vec::new(),
            bodies: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                a.bodies.push((line, content.to_string()));
                continue;
            };
            let key = key.trim();
            let value = value.trim().to_string();
            if !VARIETY_KEYS.contains(&key) && !FAMILY_KEYS.contains(&key) {
                a.diag(line, 1, format!("unknown header key '{key}'"));
            } else if key == "base_equation" {
                a.base_equations.push((line, value));
            } else if a.headers.contains_key(key) {
                a.diag(line, 1, format!("duplicate header key '{key}'"));
            } else {
                a.headers.insert(key.to_string(), (line, value));
            }
        }
        a
    }

    fn get(&self, key: &str) -> Option<(usize, String)> {
        self.headers.get(key).cloned()
    }

    fn required(&mut self, key: &str) -> Option<(usize, String)> {
        let v = self.get(key);
        if v.is_none() {
            self.diag(0, 0, format!("missing header '{key}'"));
        }
        v
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str) -> Option<T> {
        let (line, v) = self.get(key)?;
        match v.parse() {
            Ok(x) => Some(x),
            Err(_) => {
                self.diag(line, key.len() + 2, format!("{key} must be a non-negative integer, got '{v}'"));
                None
            }
        }
    }

    fn ambient(&mut self, key: &str) -> Option<Ambient> {
        let (line, v) = self.required(key)?;
        match v.as_str() {
            "affine" => Some(Ambient::Affine),
            "projective" => Some(Ambient::Projective),
            _ => {
                self.diag(line, key.len() + 2, format!("{key} must be affine or projective, got '{v}'"));
                None
            }
        }
    }

    fn var_names(&mut self, key: &str) -> Option<Vec<String>> {
        let (line, v) = self.get(key)?;
        let names: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            let ok = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                self.diag(line, key.len() + 2, format!("invalid variable name '{n}'"));
                return None;
            }
            if !seen.insert(n.clone()) {
                self.diag(line, key.len() + 2, format!("variable '{n}' is declared twice"));
                return None;
            }
        }
        if names.is_empty() {
            self.diag(line, key.len() + 2, format!("{key} lists no variables"));
            return None;
        }
        Some(names)
    }

    fn model(&mut self, key: &str) -> Option<usize> {
        let (line, v) = self.get(key)?;
        match v.strip_prefix("curve:").and_then(|g| g.parse().ok()) {
            Some(g) => Some(g),
            None => {
                self.diag(line, key.len() + 2, format!("{key} must be curve:<genus>, got '{v}'"));
                None
            }
        }
    }

    fn field(&mut self) -> Option<(u64, u32)> {
        let (line, _) = self.required("p")?;
        let p: u64 = self.number("p")?;
        if !is_prime(p) {
            self.diag(line, 3, format!("p={p} is not prime"));
            return None;
        }
        let a: u32 = if self.get("a").is_some() { self.number("a")? } else { 1 };
        if a == 0 {
            let line = self.get("a").map(|x| x.0).unwrap_or(0);
            self.diag(line, 3, "a must be at least 1");
            return None;
        }
        if (p as f64).powi(a as i32) > 4.0e18 {
            self.diag(line, 1, format!("field F_{p}^{a} is too large"));
            return None;
        }
        if let Err(e) = FieldDescriptor::with_modulus(p, least_irreducible(p, a)) {
            self.diag(line, 1, format!("field modulus check failed: {e}"));
            return None;
        }
        Some((p, a))
    }

    fn poly(&mut self, line: usize, text: &str, vars: &[String], homogeneous: bool) -> Option<MultiPoly> {
        match parse_polynomial_at(text, vars, line) {
            Ok(f) => {
                if homogeneous && !f.is_homogeneous() {
                    self.diag(line, 1, format!("polynomial `{text}` is not homogeneous"));
                    None
                } else {
                    Some(f)
                }
            }
            Err(e) => {
                self.error(e, line);
                None
            }
        }
    }

    fn check_dimension(&mut self, ambient: Ambient, nvars: usize) {
        let Some((line, _)) = self.get("n") else { return };
        let Some(n) = self.number::<usize>("n") else { return };
        let expected = match ambient {
            Ambient::Affine => n,
            Ambient::Projective => n + 1,
        };
        if expected != nvars {
            self.diag(line, 3, format!("{} space of dimension {n} needs {expected} variables, {nvars} declared", ambient.as_str()));
        }
    }

    fn variety(&mut self) -> Option<VarietyDescriptor> {
        let field = self.field();
        let ambient = self.ambient("ambient");
        self.required("vars");
        let vars = self.var_names("vars");
        let (Some((p, a)), Some(ambient), Some(vars)) = (field, ambient, vars) else {
            return None;
        };
        self.check_dimension(ambient, vars.len());
        let proj = ambient == Ambient::Projective;
        let bodies = std::mem::take(&mut self.bodies);
        let eqs: Vec<Option<MultiPoly>> = bodies.iter().map(|(l, t)| self.poly(*l, t, &vars, proj)).collect();
        let exclusion = match self.get("exclude") {
            Some((l, t)) => {
                self.poly(l, &t, &vars, proj).map(Some)
            }
            None => Some(None),
        };
        let genus = self.get("model").and_then(|_| self.model("model"));
        let dim = self.get("dim").and_then(|_| self.number::<usize>("dim"));
        if genus.is_some() && !proj {
            let line = self.get("model").map(|x| x.0).unwrap_or(0);
            self.diag(line, 1, "the curve model needs a projective ambient space");
        }
        let eqs: Option<Vec<MultiPoly>> = eqs.into_iter().collect();
        let (eqs, exclusion) = (eqs?, exclusion?);
        if !self.diags.is_empty() {
            return None;
        }
        match VarietyDescriptor::new(p, a, ambient, vars, eqs, exclusion) {
            Ok(mut v) => {
                v.curve_genus = genus;
                v.dimension = dim.or(genus.map(|_| 1));
                Some(v)
            }
            Err(e) => {
                self.error(e, 0);
                None
            }
        }
    }

    fn family(&mut self) -> Option<FamilyDescriptor> {
        let field = self.field();
        if let Some((line, v)) = self.get("ambient") {
            if v != "affine" {
                self.diag(line, 9, "the base of a family must be affine");
            }
        }
        self.required("params");
        let params = self.var_names("params");
        self.required("fiber_vars");
        let fvars = self.var_names("fiber_vars");
        let fambient = self.ambient("fiber_ambient");
        let bounds = match self.required("fiber_bounds") {
            Some((line, v)) => {
                let parts: Vec<Option<usize>> = v.split(',').map(|s| s.trim().parse().ok()).collect();
                match parts.as_slice() {
                    [Some(dn), Some(dd)] => Some((*dn, *dd)),
                    _ => {
                        self.diag(line, 14, format!("fiber_bounds must be <dn>,<dd>, got '{v}'"));
                        None
                    }
                }
            }
            None => None,
        };
        let (Some((p, a)), Some(params), Some(fvars), Some(fambient), Some(bounds)) = (field, params, fvars, fambient, bounds)
        else {
            return None;
        };
        if let Some(v) = self.get("vars") {
            let declared: Vec<String> = v.1.split(',').map(|s| s.trim().to_string()).collect();
            if declared != params {
                self.diag(v.0, 6, "vars must match params for a family base");
            }
        }
        if let Some(x) = fvars.iter().find(|x| params.contains(x)) {
            let line = self.get("fiber_vars").map(|l| l.0).unwrap_or(0);
            self.diag(line, 12, format!("'{x}' is both a parameter and a fiber variable"));
            return None;
        }
        self.check_dimension(Ambient::Affine, params.len());
        let base_lines = std::mem::take(&mut self.base_equations);
        let base_eqs: Vec<Option<MultiPoly>> = base_lines.iter().map(|(l, t)| self.poly(*l, t, &params, false)).collect();
        let exclusion = match self.get("exclude") {
            Some((l, t)) => {
                self.poly(l, &t, &params, false).map(Some)
            }
            None => Some(None),
        };
        let mut all = params.clone();
        all.extend(fvars.iter().cloned());
        let bodies = std::mem::take(&mut self.bodies);
        let fiber_eqs: Vec<Option<MultiPoly>> = bodies
            .iter()
            .map(|(l, t)| {
                let f = self.poly(*l, t, &all, false)?;
                if fambient == Ambient::Projective {
                    let degs: Vec<u32> = f.terms().keys().map(|e| e[params.len()..].iter().sum()).collect();
                    if degs.windows(2).any(|w| w[0] != w[1]) {
                        self.diag(*l, 1, format!("polynomial `{t}` is not homogeneous in the fiber variables"));
                        return None;
                    }
                }
                Some(f)
            })
            .collect();
        let genus = self.get("fiber_model").and_then(|_| self.model("fiber_model"));
        let fdim = self.get("fiber_dim").and_then(|_| self.number::<usize>("fiber_dim"));
        let base_eqs: Option<Vec<MultiPoly>> = base_eqs.into_iter().collect();
        let fiber_eqs: Option<Vec<MultiPoly>> = fiber_eqs.into_iter().collect();
        let (base_eqs, exclusion, fiber_eqs) = (base_eqs?, exclusion?, fiber_eqs?);
        if !self.diags.is_empty() {
            return None;
        }
        let built = VarietyDescriptor::new(p, a, Ambient::Affine, params, base_eqs, exclusion).and_then(|base| {
            let mut base = base;
            base.dimension = self.get("dim").and_then(|(_, v)| v.parse().ok());
            FamilyDescriptor::new(base, fvars, fambient, fiber_eqs, bounds)
        });
        match built {
            Ok(mut f) => {
                f.fiber_genus = genus;
                f.fiber_dimension = fdim.or(genus.map(|_| 1));
                Some(f)
            }
            Err(e) => {
                self.error(e, 0);
                None
            }
        }
    }
}

fn analyze(text: &str) -> (Option<InputFile>, Vec<Diagnostic>) {
    let mut a = Analyzer::scan(text);
    let is_family = a.headers.keys().any(|k| FAMILY_KEYS.contains(&k.as_str())) || !a.base_equations.is_empty();
    let out = if is_family {
        a.family().map(InputFile::Family)
    } else {
        a.variety().map(InputFile::Variety)
    };
    a.diags.sort_by_key(|d| (d.line, d.col));
    a.diags.dedup();
    (if a.diags.is_empty() { out } else { None }, a.diags)
}

/// All problems found in `text`; empty iff [`parse_input`] succeeds.
pub fn validate_input(text: &str) -> Vec<Diagnostic> {
    analyze(text).1
}

/// Parses a variety or family file, failing on the first diagnostic.
pub fn parse_input(text: &str) -> Result<InputFile> {
    match analyze(text) {
        (Some(f), _) => Ok(f),
        (None, diags) => {
            let d = diags
                .into_iter()
                .next()
                .unwrap_or(Diagnostic { line: 0, col: 0, message: "unreadable input".into() });
            Err(Error::parse(d.line, d.col, d.message))
        }
    }
}

pub fn parse_variety(text: &str) -> Result<VarietyDescriptor> {
    match parse_input(text)? {
        InputFile::Variety(v) => Ok(v),
        InputFile::Family(_) => Err(Error::input("expected a variety file, found a family")),
    }
}

pub fn parse_family(text: &str) -> Result<FamilyDescriptor> {
    match parse_input(text)? {
        InputFile::Family(f) => Ok(f),
        InputFile::Variety(_) => Err(Error::input("expected a family file, found a variety")),
    }
}
