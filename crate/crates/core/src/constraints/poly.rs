//! Integer-coefficient multivariate polynomials with exact evaluation and a
//! small text grammar.
//!
//! The text form writes each term as `coef * x1^e1 * ... * xn^en` with terms
//! joined by `+`/`-`; coefficient, `*`, and exponents are optional where the
//! value is 1 (`x1^2 + x2^2 - x3^2`, `2*x1*x2 - 7`). Whitespace is ignored.
//! Variables are numbered from `x1`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// One monomial: an integer coefficient and per-variable exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coef: i64,
    pub exponents: Vec<u32>,
}

/// Multivariate polynomial `P(x_1, …, x_n)` with integer coefficients.
///
/// Terms are kept merged (no two share an exponent vector), zero coefficients
/// dropped, and the term order canonical, so structurally equal polynomials
/// compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiophantinePolynomial {
    n_vars: usize,
    terms: Vec<Term>,
}

impl DiophantinePolynomial {
    /// Build from raw terms; duplicate exponent vectors are merged and zero
    /// coefficients dropped.
    pub fn new(n_vars: usize, terms: Vec<Term>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
        for term in terms {
            if term.exponents.len() != n_vars {
                return Err(Error::Shape(format!(
                    "term has {} exponents, polynomial has {} variables",
                    term.exponents.len(),
                    n_vars
                )));
            }
            let slot = merged.entry(term.exponents).or_insert(0);
            *slot = slot.checked_add(term.coef).ok_or_else(|| {
                Error::Overflow("coefficient sum exceeds 64 bits".into())
            })?;
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .filter(|&(_, coef)| coef != 0)
            .map(|(exponents, coef)| Term { coef, exponents })
            .collect();
        // Highest-degree terms first, then reverse-lexicographic exponents.
        terms.sort_by(|a, b| {
            let da: u32 = a.exponents.iter().sum();
            let db: u32 = b.exponents.iter().sum();
            db.cmp(&da).then_with(|| b.exponents.cmp(&a.exponents))
        });
        Ok(Self { n_vars, terms })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Re-target the polynomial at a wider variable space (extra variables
    /// get exponent zero everywhere).
    pub fn with_arity(self, n_vars: usize) -> Result<Self> {
        if n_vars < self.n_vars {
            return Err(Error::Shape(format!(
                "cannot narrow a {}-variable polynomial to {} variables",
                self.n_vars, n_vars
            )));
        }
        let terms = self
            .terms
            .into_iter()
            .map(|mut t| {
                t.exponents.resize(n_vars, 0);
                t
            })
            .collect();
        Self::new(n_vars, terms)
    }

    /// Exact integer evaluation with overflow checking (128-bit internally).
    pub fn eval_int(&self, x: &[i64]) -> Result<i128> {
        if x.len() != self.n_vars {
            return Err(Error::Shape(format!(
                "point has {} coordinates, polynomial has {} variables",
                x.len(),
                self.n_vars
            )));
        }
        let overflow = || Error::Overflow("polynomial evaluation exceeds 128 bits".into());
        let mut acc: i128 = 0;
        for term in &self.terms {
            let mut t = i128::from(term.coef);
            for (&xi, &e) in x.iter().zip(&term.exponents) {
                for _ in 0..e {
                    t = t.checked_mul(i128::from(xi)).ok_or_else(overflow)?;
                }
            }
            acc = acc.checked_add(t).ok_or_else(overflow)?;
        }
        Ok(acc)
    }

    /// Real-valued evaluation (used by the smooth constraint relaxation).
    pub fn eval_real(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_vars {
            return Err(Error::Shape(format!(
                "point has {} coordinates, polynomial has {} variables",
                x.len(),
                self.n_vars
            )));
        }
        let mut acc = 0.0;
        for term in &self.terms {
            let mut t = term.coef as f64;
            for (&xi, &e) in x.iter().zip(&term.exponents) {
                t *= xi.powi(e as i32);
            }
            acc += t;
        }
        if !acc.is_finite() {
            return Err(Error::NonFinite("polynomial value".into()));
        }
        Ok(acc)
    }

    /// Gradient of the real-valued evaluation.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_vars {
            return Err(Error::Shape(format!(
                "point has {} coordinates, polynomial has {} variables",
                x.len(),
                self.n_vars
            )));
        }
        let mut grad = vec![0.0; self.n_vars];
        for term in &self.terms {
            for j in 0..self.n_vars {
                let ej = term.exponents[j];
                if ej == 0 {
                    continue;
                }
                let mut t = term.coef as f64 * f64::from(ej) * x[j].powi(ej as i32 - 1);
                for (i, (&xi, &e)) in x.iter().zip(&term.exponents).enumerate() {
                    if i != j {
                        t *= xi.powi(e as i32);
                    }
                }
                grad[j] += t;
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("polynomial gradient".into()));
        }
        Ok(grad)
    }

    /// Parse the text grammar; the variable count is the highest index seen.
    pub fn parse(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let bytes = s.as_bytes();
        let mut raw: Vec<(i64, &str)> = Vec::new();
        let mut sign: i64 = 1;
        let mut start = 0;
        if bytes[0] == b'+' || bytes[0] == b'-' {
            sign = if bytes[0] == b'-' { -1 } else { 1 };
            start = 1;
        }
        let mut cur = start;
        for i in start..bytes.len() {
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if i == cur {
                    return Err(Error::Parse(format!("empty term in `{input}`")));
                }
                raw.push((sign, &s[cur..i]));
                sign = if bytes[i] == b'-' { -1 } else { 1 };
                cur = i + 1;
            }
        }
        if cur >= s.len() {
            return Err(Error::Parse(format!("trailing sign in `{input}`")));
        }
        raw.push((sign, &s[cur..]));

        let mut parsed: Vec<(i64, BTreeMap<usize, u32>)> = Vec::new();
        let mut n_vars = 0usize;
        for (sign, text) in raw {
            let (coef, vars) = parse_term(sign, text)?;
            if let Some(&max_var) = vars.keys().max() {
                n_vars = n_vars.max(max_var + 1);
            }
            parsed.push((coef, vars));
        }
        let terms = parsed
            .into_iter()
            .map(|(coef, vars)| {
                let mut exponents = vec![0u32; n_vars];
                for (var, e) in vars {
                    exponents[var] = e;
                }
                Term { coef, exponents }
            })
            .collect();
        Self::new(n_vars, terms)
    }
}

fn parse_term(sign: i64, text: &str) -> Result<(i64, BTreeMap<usize, u32>)> {
    let mut coef = sign;
    let mut vars: BTreeMap<usize, u32> = BTreeMap::new();
    for factor in text.split('*') {
        if factor.is_empty() {
            return Err(Error::Parse(format!("empty factor in term `{text}`")));
        }
        if let Some(rest) = factor.strip_prefix('x') {
            let (var_s, exp_s) = match rest.split_once('^') {
                Some((v, e)) => (v, Some(e)),
                None => (rest, None),
            };
            let var: usize = var_s
                .parse()
                .map_err(|_| Error::Parse(format!("bad variable `{factor}`")))?;
            if var == 0 {
                return Err(Error::Parse("variables are numbered from x1".into()));
            }
            let exp: u32 = match exp_s {
                Some(e) => e
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent `{factor}`")))?,
                None => 1,
            };
            let slot = vars.entry(var - 1).or_insert(0);
            *slot = slot
                .checked_add(exp)
                .ok_or_else(|| Error::Overflow("exponent exceeds 32 bits".into()))?;
        } else {
            let value: i64 = factor
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{factor}`")))?;
            coef = coef
                .checked_mul(value)
                .ok_or_else(|| Error::Overflow("coefficient exceeds 64 bits".into()))?;
        }
    }
    Ok((coef, vars))
}

impl fmt::Display for DiophantinePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            let coef = term.coef;
            if i == 0 {
                if coef < 0 {
                    write!(f, "-")?;
                }
            } else if coef < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = coef.unsigned_abs();
            let has_vars = term.exponents.iter().any(|&e| e > 0);
            if mag != 1 || !has_vars {
                write!(f, "{mag}")?;
                if has_vars {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (j, &e) in term.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", j + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
