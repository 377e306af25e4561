//! Infix expression parser: `+ - * / ^ ( )`, rational literals and
//! identifiers, evaluated directly in a ring.
//!
//! Grammar (`^` binds tighter than unary minus, `**` is accepted for `^`):
//!   sum   := term (('+'|'-') term)*
//!   term  := unary (('*'|'/') unary)*
//!   unary := '-' unary | power
//!   power := atom ('^' signed_int)?
//!   atom  := number | ident | '(' sum ')'

use num_bigint::BigInt;

use super::gens::Gen;
use super::localized::{LocalizedExpr, Ring};
use super::rational::big;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let n: String = cs[st..i].iter().collect();
            out.push(Tok::Num(n.parse().unwrap()));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if c == '*' && cs.get(i + 1) == Some(&'*') {
            out.push(Tok::Op('^'));
            i += 2;
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ring: &'static Ring,
    resolve: &'a dyn Fn(&str) -> Option<LocalizedExpr>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<LocalizedExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LocalizedExpr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                acc = acc.div(&self.unary()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<LocalizedExpr> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<LocalizedExpr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let paren = self.eat('(');
        let neg = self.eat('-');
        let e = match self.toks.get(self.pos) {
            Some(Tok::Num(n)) => i32::try_from(n.clone())
                .map_err(|_| Error::Parse("exponent too large".into()))?,
            t => return Err(Error::Parse(format!("expected integer exponent, got {t:?}"))),
        };
        self.pos += 1;
        if paren && !self.eat(')') {
            return Err(Error::Parse("unclosed exponent".into()));
        }
        base.pow(if neg { -e } else { e })
    }

    fn atom(&mut self) -> Result<LocalizedExpr> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match t {
            Some(Tok::Num(n)) => Ok(self.ring.constant(big(n))),
            Some(Tok::Ident(name)) => Ok(match (self.resolve)(&name) {
                Some(x) => x,
                None => self.ring.gen(Gen::named(&name)),
            }),
            Some(Tok::Op('(')) => {
                let x = self.sum()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(x)
            }
            t => Err(Error::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

/// Parse `s` in `ring`; identifiers are generators unless `resolve` maps them.
pub fn parse_with(
    ring: &'static Ring,
    s: &str,
    resolve: &dyn Fn(&str) -> Option<LocalizedExpr>,
) -> Result<LocalizedExpr> {
    let mut p = Parser {
        toks: lex(s)?,
        pos: 0,
        ring,
        resolve,
    };
    let x = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(x)
}

pub fn parse_expr(ring: &'static Ring, s: &str) -> Result<LocalizedExpr> {
    parse_with(ring, s, &|_| None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::poly::Poly;
    use crate::exact_algebra::rational::rat;
    use std::sync::OnceLock;

    fn ring() -> &'static Ring {
        static R: OnceLock<&'static Ring> = OnceLock::new();
        R.get_or_init(|| Ring::leak("parse-test", &[Gen::named("a")], &[]))
    }

    #[test]
    fn precedence() {
        let x = parse_expr(ring(), "1 + 2*b^2 - -b/2").unwrap();
        let b = ring().var("b");
        let expected = ring()
            .one()
            .add(&b.mul(&b).scale_by(&rat(2, 1)))
            .add(&b.scale_by(&rat(1, 2)));
        assert_eq!(x, expected);
        assert_eq!(parse_expr(ring(), "-a^2").unwrap(), ring().var("a").pow(2).unwrap().neg());
        assert_eq!(parse_expr(ring(), "2**3").unwrap(), ring().int(8));
    }

    #[test]
    fn negative_powers_need_invertibility() {
        assert!(parse_expr(ring(), "a^(-2)").is_ok());
        assert!(parse_expr(ring(), "1/b").is_err());
        assert!(parse_expr(ring(), "(1 + ").is_err());
    }

    #[test]
    fn text_roundtrip() {
        for s in ["(3*b^2 - 1/2*a)/(a^3)", "0", "-7/3", "b - b^2*a + 4"] {
            let x = parse_expr(ring(), s).unwrap();
            assert_eq!(parse_expr(ring(), &x.to_text()).unwrap(), x);
            let j = x.to_json();
            assert_eq!(LocalizedExpr::from_json(&j).unwrap(), x);
        }
        let p = parse_expr(ring(), "b*a").unwrap();
        assert_eq!(p.to_poly().unwrap(), &Poly::var(Gen::named("a")) * &Poly::var(Gen::named("b")));
    }
}
