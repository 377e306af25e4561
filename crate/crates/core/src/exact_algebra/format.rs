//! Text, LaTeX and JSON forms of localized expressions.
//!
//! The text form is what `parse` reads back; the JSON form carries the ring
//! name so it can be decoded without context.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::gens::Gen;
use super::localized::{LocalizedExpr, Ring};
use super::monomial::Monomial;
use super::poly::Poly;
use super::rational::{fmt_rational, parse_rational, Rational};
use crate::error::{Error, Result};

/// Generator display names for LaTeX output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NameTable {
    /// `v_k`, `r_k`, `u_k` as written.
    Jets,
    /// Jets with x-subscripts: `v`, `v_x`, `v_{xx}`, ...
    XJets,
    /// Hierarchy variables: `v` shown as `w`, `r` as `\rho`.
    Hierarchy,
}

fn x_subscript(base: &str, k: u32) -> String {
    match k {
        0 => base.to_string(),
        1..=3 => format!("{base}_{{{}}}", "x".repeat(k as usize)),
        _ => format!("{base}_{{{k}x}}"),
    }
}

impl NameTable {
    pub fn latex(self, g: Gen) -> String {
        let Some((c, k)) = g.family() else {
            let n = g.name();
            return match n.as_str() {
                "eps" => "\\epsilon".to_string(),
                "lambda" => "\\lambda".to_string(),
                _ => n,
            };
        };
        match (self, c) {
            (NameTable::XJets, 'v' | 'r' | 'u') => x_subscript(&c.to_string(), k),
            (NameTable::Hierarchy, 'v') => x_subscript("w", k),
            (NameTable::Hierarchy, 'r') => x_subscript("\\rho", k),
            (NameTable::Hierarchy, 'u') => x_subscript("u", k),
            (_, 'r') if k == 0 => "r".to_string(),
            (_, 'W') => format!("(1-J_{{{k}}})"),
            _ => format!("{c}_{{{k}}}"),
        }
    }
}

fn mono_text(m: &Monomial) -> String {
    m.iter()
        .map(|(g, e)| if e == 1 { g.name() } else { format!("{}^{}", g.name(), e) })
        .collect::<Vec<_>>()
        .join("*")
}

/// Parseable text for a polynomial, terms in descending order.
pub fn poly_text(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().iter().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&fmt_rational(&a));
        } else if a.is_one() {
            out.push_str(&mono_text(m));
        } else {
            out.push_str(&format!("{}*{}", fmt_rational(&a), mono_text(m)));
        }
    }
    out
}

impl LocalizedExpr {
    /// Text form, readable by [`super::parse::parse_expr`].
    pub fn to_text(&self) -> String {
        let num = poly_text(&self.scaled_num());
        if self.den().is_one() {
            return num;
        }
        format!("({num})/({})", mono_text(self.den()))
    }

    pub fn to_latex(&self, names: NameTable) -> String {
        let num = poly_latex(&self.scaled_num(), names);
        if self.den().is_one() {
            return num;
        }
        format!("\\frac{{{num}}}{{{}}}", mono_latex(self.den(), names))
    }

    pub fn to_json(&self) -> ExprJson {
        let gens = self.gens().into_iter().map(|g| g.name()).collect();
        let terms = self
            .scaled_num()
            .terms()
            .iter()
            .rev()
            .map(|(m, c)| TermJson {
                m: m.iter().map(|(g, e)| (g.name(), e)).collect(),
                c: fmt_rational(c),
            })
            .collect();
        ExprJson {
            ring: self.ring().name.to_string(),
            gens,
            terms,
            den: self.den().iter().map(|(g, e)| (g.name(), e)).collect(),
        }
    }

    pub fn from_json(j: &ExprJson) -> Result<LocalizedExpr> {
        let ring = Ring::by_name(&j.ring)
            .ok_or_else(|| Error::Parse(format!("unknown ring {:?}", j.ring)))?;
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            let m = Monomial::from_pairs(t.m.iter().map(|(g, e)| (Gen::named(g), *e)));
            terms.push((m, parse_rational(&t.c)?));
        }
        let den = Monomial::from_pairs(j.den.iter().map(|(g, e)| (Gen::named(g), *e)));
        ring.fraction(Poly::from_terms(terms), den)
    }
}

fn mono_latex(m: &Monomial, names: NameTable) -> String {
    m.iter()
        .map(|(g, e)| {
            let n = names.latex(g);
            if e == 1 {
                n
            } else {
                format!("{n}^{{{e}}}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn rational_latex(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

pub fn poly_latex(p: &Poly, names: NameTable) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().iter().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&rational_latex(&a));
        } else if a.is_one() {
            out.push_str(&mono_latex(m, names));
        } else {
            out.push_str(&format!("{} {}", rational_latex(&a), mono_latex(m, names)));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub m: BTreeMap<String, i32>,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExprJson {
    pub ring: String,
    pub gens: Vec<String>,
    pub terms: Vec<TermJson>,
    pub den: BTreeMap<String, i32>,
}

impl ExprJson {
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| parse_rational(&t.c).map(|c| c.is_zero()).unwrap_or(false))
    }
}
