//! The resolvent algebra spanned by `A^(a/2) B^b` over jet expressions, where
//! `A = 1/(lambda - v)` and `B = 1/(lambda - v - r^2/2)`.
//!
//! Exponents of `A` are stored doubled. Products are kept in the normal form
//! spanned by `A^(i/2)` (no `B`), `B^j`, and `A^(1/2) B^j`, using
//! `A B = (2/r^2) (B - A)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_algebra::format::ExprJson;
use crate::exact_algebra::{int, Rational};
use crate::jet_ring::{self, jet, JetExpr};

/// Key: (doubled exponent of A, exponent of B).
pub type Key = (i32, i32);

#[derive(Clone, Debug, PartialEq, Default)]
pub struct LambdaElem {
    terms: BTreeMap<Key, JetExpr>,
}

/// Expansion of `A^(a2/2) B^b` in the normal form: entries
/// `(key, c)` meaning `c * (2/r^2)^n * key` with `n` fixed by homogeneity.
fn reduction(key: Key) -> Vec<(Key, Rational)> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Vec<(Key, Rational)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let (a2, b) = key;
    let out = if a2 < 2 || b < 1 {
        vec![(key, int(1))]
    } else {
        // A^a B^b = (2/r^2) (A^(a-1) B^b - A^a B^(b-1))
        let mut acc: BTreeMap<Key, Rational> = BTreeMap::new();
        for (k, c) in reduction((a2 - 2, b)) {
            *acc.entry(k).or_insert_with(Rational::zero) += c;
        }
        for (k, c) in reduction((a2, b - 1)) {
            *acc.entry(k).or_insert_with(Rational::zero) -= c;
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    };
    cache.lock().unwrap().insert(key, out.clone());
    out
}

/// Power of `1/r^2 * 2` carried by a reduction from `from` to `to`.
fn reduction_depth(from: Key, to: Key) -> i32 {
    (from.0 - to.0) / 2 + (from.1 - to.1)
}

fn two_over_r2_pow(n: i32) -> JetExpr {
    static CACHE: OnceLock<Mutex<HashMap<i32, JetExpr>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(x) = cache.lock().unwrap().get(&n) {
        return x.clone();
    }
    let x = jet_ring::r(0)
        .pow(2)
        .unwrap()
        .inv()
        .unwrap()
        .scale_by(&int(2))
        .pow(n)
        .unwrap();
    cache.lock().unwrap().insert(n, x.clone());
    x
}

/// Basis decomposition returned by [`LambdaElem::extract_coeffs`].
#[derive(Clone, Debug, PartialEq)]
pub struct Coeffs {
    pub constant: JetExpr,
    /// `A^i`, `i >= 1`.
    pub a: BTreeMap<u32, JetExpr>,
    /// `B^j`, `j >= 1`.
    pub b: BTreeMap<u32, JetExpr>,
}

impl Coeffs {
    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.a.is_empty() && self.b.is_empty()
    }
}

#[derive(Serialize)]
struct DumpTerm {
    a: String,
    b: i32,
    c: ExprJson,
}

impl LambdaElem {
    pub fn zero() -> LambdaElem {
        LambdaElem::default()
    }

    pub fn constant(c: JetExpr) -> LambdaElem {
        LambdaElem::monomial((0, 0), c)
    }

    pub fn one() -> LambdaElem {
        LambdaElem::constant(jet().one())
    }

    /// `c * A^(a2/2) B^b`, reduced.
    pub fn monomial(key: Key, c: JetExpr) -> LambdaElem {
        let mut acc = BTreeMap::new();
        acc.insert(key, c);
        LambdaElem::reduce_map(acc)
    }

    /// `A^(a2/2)`.
    pub fn a_pow(a2: i32) -> LambdaElem {
        LambdaElem::monomial((a2, 0), jet().one())
    }

    pub fn b_pow(b: i32) -> LambdaElem {
        LambdaElem::monomial((0, b), jet().one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &JetExpr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: Key) -> JetExpr {
        self.terms.get(&key).cloned().unwrap_or_else(|| jet().zero())
    }

    fn reduce_map(raw: BTreeMap<Key, JetExpr>) -> LambdaElem {
        let mut out: BTreeMap<Key, JetExpr> = BTreeMap::new();
        let push = |k: Key, c: JetExpr, out: &mut BTreeMap<Key, JetExpr>| {
            if c.is_zero() {
                return;
            }
            match out.get_mut(&k) {
                Some(x) => *x = x.add(&c),
                None => {
                    out.insert(k, c);
                }
            }
        };
        for (k, c) in raw {
            if c.is_zero() {
                continue;
            }
            for (t, q) in reduction(k) {
                let n = reduction_depth(k, t);
                let f = if n == 0 {
                    c.scale_by(&q)
                } else {
                    c.mul(&two_over_r2_pow(n)).scale_by(&q)
                };
                push(t, f, &mut out);
            }
        }
        out.retain(|_, c| !c.is_zero());
        LambdaElem { terms: out }
    }

    pub fn add(&self, other: &LambdaElem) -> LambdaElem {
        let mut out = self.terms.clone();
        for (k, c) in &other.terms {
            match out.get_mut(k) {
                Some(x) => *x = x.add(c),
                None => {
                    out.insert(*k, c.clone());
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        LambdaElem { terms: out }
    }

    pub fn neg(&self) -> LambdaElem {
        LambdaElem {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &LambdaElem) -> LambdaElem {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &JetExpr) -> LambdaElem {
        if c.is_zero() {
            return LambdaElem::zero();
        }
        LambdaElem {
            terms: self.terms.iter().map(|(k, x)| (*k, x.mul(c))).collect(),
        }
    }

    pub fn scale_q(&self, q: &Rational) -> LambdaElem {
        if q.is_zero() {
            return LambdaElem::zero();
        }
        LambdaElem {
            terms: self.terms.iter().map(|(k, x)| (*k, x.scale_by(q))).collect(),
        }
    }

    pub fn mul(&self, other: &LambdaElem) -> LambdaElem {
        let mut raw: BTreeMap<Key, JetExpr> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let k = (ka.0 + kb.0, ka.1 + kb.1);
                let c = ca.mul(cb);
                match raw.get_mut(&k) {
                    Some(x) => *x = x.add(&c),
                    None => {
                        raw.insert(k, c);
                    }
                }
            }
        }
        LambdaElem::reduce_map(raw)
    }

    /// x-derivative: `dA = v1 A^2`, `dB = u1 B^2`, `d(A^(1/2)) = (v1/2) A^(3/2)`.
    pub fn d(&self) -> LambdaElem {
        let v1 = jet_ring::v(1);
        let u1 = jet_ring::u(1);
        let mut raw: BTreeMap<Key, JetExpr> = BTreeMap::new();
        let mut push = |k: Key, c: JetExpr| {
            if c.is_zero() {
                return;
            }
            match raw.get_mut(&k) {
                Some(x) => *x = x.add(&c),
                None => {
                    raw.insert(k, c);
                }
            }
        };
        for (&(a2, b), c) in &self.terms {
            push((a2, b), jet_ring::d_x(c));
            if a2 != 0 {
                push((a2 + 2, b), c.mul(&v1).scale_by(&num_rational::Ratio::new(a2.into(), 2.into())));
            }
            if b != 0 {
                push((a2, b + 1), c.mul(&u1).scale_by(&int(b as i64)));
            }
        }
        LambdaElem::reduce_map(raw)
    }

    pub fn d_n(&self, n: u32) -> LambdaElem {
        (0..n).fold(self.clone(), |acc, _| acc.d())
    }

    /// Coefficients on `{1, A^i, B^j}`; fails if a half-integer power of `A` survives.
    pub fn extract_coeffs(&self) -> Result<Coeffs> {
        let mut out = Coeffs {
            constant: jet().zero(),
            a: BTreeMap::new(),
            b: BTreeMap::new(),
        };
        for (&(a2, b), c) in &self.terms {
            if a2 % 2 != 0 {
                return Err(Error::HalfPowerResidue(a2, b));
            }
            match (a2 / 2, b) {
                (0, 0) => out.constant = c.clone(),
                (a, 0) => {
                    out.a.insert(a as u32, c.clone());
                }
                (0, b) => {
                    out.b.insert(b as u32, c.clone());
                }
                _ => unreachable!("integer mixed terms are reduced"),
            }
        }
        Ok(out)
    }

    /// JSON dump listing `(a, b)` exponents and coefficients.
    pub fn to_json(&self) -> serde_json::Value {
        let ts: Vec<DumpTerm> = self
            .terms
            .iter()
            .map(|(&(a2, b), c)| DumpTerm {
                a: if a2 % 2 == 0 { (a2 / 2).to_string() } else { format!("{a2}/2") },
                b,
                c: c.to_json(),
            })
            .collect();
        serde_json::to_value(ts).expect("dump serializes")
    }

    /// Evaluate at `lambda = v0 + s^2` and rational jet values.
    pub fn eval(&self, s: &Rational, jets: &dyn Fn(crate::exact_algebra::Gen) -> Rational) -> Result<Rational> {
        let v = jets(crate::exact_algebra::Gen::v(0));
        let r = jets(crate::exact_algebra::Gen::r(0));
        let lambda = &v + s * s;
        let sqrt_a = s.recip();
        let b = (&lambda - &v - &r * &r / int(2)).recip();
        let mut acc = Rational::zero();
        for (&(a2, bb), c) in &self.terms {
            let cv = c.eval(jets)?;
            acc += cv * num_traits::pow::Pow::pow(&sqrt_a, a2 as u32) * num_traits::pow::Pow::pow(&b, bb as u32);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::{parse_expr, rat, Gen};
    use crate::jet_ring::strategies::jet_expr;
    use proptest::prelude::*;

    fn p(s: &str) -> JetExpr {
        parse_expr(jet(), s).unwrap()
    }

    fn a() -> LambdaElem {
        LambdaElem::a_pow(2)
    }
    fn b() -> LambdaElem {
        LambdaElem::b_pow(1)
    }

    #[test]
    fn products() {
        let ab = a().mul(&b());
        let expected = b().scale(&p("2/r^2")).sub(&a().scale(&p("2/r^2")));
        assert_eq!(ab, expected);
        assert_eq!(LambdaElem::a_pow(1).mul(&LambdaElem::a_pow(1)), a());
        let a2b = a().mul(&a()).mul(&b());
        let expected = b()
            .sub(&a())
            .scale(&p("4/r^4"))
            .sub(&LambdaElem::a_pow(4).scale(&p("2/r^2")));
        assert_eq!(a2b, expected);
    }

    #[test]
    fn derivatives() {
        assert_eq!(a().d(), LambdaElem::a_pow(4).scale(&p("v1")));
        assert_eq!(b().d(), LambdaElem::b_pow(2).scale(&p("v1 + r*r1")));
        let x = LambdaElem::monomial((1, 1), p("r"));
        let expected = LambdaElem::monomial((1, 1), p("r1"))
            .add(&LambdaElem::monomial((3, 1), p("r*v1/2")))
            .add(&LambdaElem::monomial((1, 2), p("r*(v1 + r*r1)")));
        assert_eq!(x.d(), expected);
    }

    #[test]
    fn extraction() {
        let x = a().mul(&a()).add(&b().scale(&p("3")));
        let c = x.extract_coeffs().unwrap();
        assert_eq!(c.a[&2], p("1"));
        assert_eq!(c.b[&1], p("3"));
        let c = a().mul(&b()).extract_coeffs().unwrap();
        assert_eq!(c.a[&1], p("-2/r^2"));
        assert_eq!(c.b[&1], p("2/r^2"));
        assert_eq!(
            LambdaElem::a_pow(3).extract_coeffs(),
            Err(Error::HalfPowerResidue(3, 0))
        );
    }

    fn point(g: Gen) -> Rational {
        match g.family() {
            Some(('v', k)) => rat(3 + k as i64, 2 + k as i64),
            Some(('r', k)) => rat(-5 + 2 * k as i64, 3),
            _ => int(0),
        }
    }

    fn arb_elem() -> impl Strategy<Value = LambdaElem> {
        proptest::collection::vec(((0i32..5, 0i32..3), jet_expr()), 1..3).prop_map(|ts| {
            ts.into_iter()
                .fold(LambdaElem::zero(), |acc, (k, c)| acc.add(&LambdaElem::monomial(k, c)))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Numerical embedding: evaluating at `lambda = v + s^2` commutes with products.
        #[test]
        fn products_match_evaluation(x in arb_elem(), y in arb_elem(), sn in 1i64..7) {
            let s = rat(sn, 3);
            let prod = x.mul(&y);
            let lhs = prod.eval(&s, &point);
            let rhs = x.eval(&s, &point).and_then(|a| y.eval(&s, &point).map(|b| a * b));
            if let (Ok(l), Ok(r)) = (lhs, rhs) {
                prop_assert_eq!(l, r);
            }
        }

        #[test]
        fn product_is_associative(x in arb_elem(), y in arb_elem(), z in arb_elem()) {
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        }

        #[test]
        fn d_is_a_derivation(x in arb_elem(), y in arb_elem()) {
            let lhs = x.mul(&y).d();
            let rhs = x.d().mul(&y).add(&x.mul(&y.d()));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
