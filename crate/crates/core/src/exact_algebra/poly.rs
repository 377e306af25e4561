//! Sparse multivariate (Laurent) polynomials over the rationals.
//!
//! Invariants: terms are strictly increasing in the graded-lex monomial order
//! and no stored coefficient is zero. Two polynomials are equal iff their term
//! vectors are equal.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::gens::Gen;
use super::monomial::Monomial;
use super::rational::{content_of, int, Rational};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Rational)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Poly {
        Poly::term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(int(n))
    }

    pub fn var(g: Gen) -> Poly {
        Poly::term(Monomial::var(g), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: vec![(m, c)] }
    }

    /// Normalize an arbitrary list of terms (merges duplicates, drops zeros).
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Poly {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_insert_with(Rational::zero) += c;
        }
        Poly::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, Rational>) -> Poly {
        let mut terms: Vec<(Monomial, Rational)> =
            acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Poly { terms }
    }

    /// Trusts the caller: terms already sorted, distinct, nonzero.
    fn from_sorted(terms: Vec<(Monomial, Rational)>) -> Poly {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|t| !t.1.is_zero()));
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Rational)> {
        self.terms
    }

    /// Largest term in the monomial order.
    pub fn leading(&self) -> Option<&(Monomial, Rational)> {
        self.terms.last()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        match self.terms.binary_search_by(|t| t.0.cmp(m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Sorted list of generators occurring in any term.
    pub fn gens(&self) -> Vec<Gen> {
        let mut gs: Vec<Gen> = self.terms.iter().flat_map(|t| t.0.gens()).collect();
        gs.sort();
        gs.dedup();
        gs
    }

    pub fn contains_gen(&self, g: Gen) -> bool {
        self.terms.iter().any(|t| t.0.exp(g) != 0)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_sorted(self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect())
    }

    /// Multiply by a single term; order-preserving, so no re-sort is needed.
    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_sorted(
            self.terms
                .iter()
                .map(|(a, x)| (a.mul(m), x * c))
                .collect(),
        )
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly::from_sorted(self.terms.iter().map(|(a, x)| (a.mul(m), x.clone())).collect())
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative.
    pub fn partial(&self, g: Gen) -> Poly {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exp(g);
            if e != 0 {
                out.push((m.div(&Monomial::var(g)), c * int(e as i64)));
            }
        }
        Poly::from_terms(out)
    }

    pub fn degree_in(&self, g: Gen) -> i32 {
        self.terms.iter().map(|t| t.0.exp(g)).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, g: Gen) -> i32 {
        self.terms.iter().map(|t| t.0.exp(g)).min().unwrap_or(0)
    }

    pub fn total_degree(&self) -> i32 {
        self.terms.last().map(|t| t.0.degree()).unwrap_or(0)
    }

    /// Coefficients of `g^k` for `k = 0..=deg` (requires nonnegative exponents in `g`).
    pub fn coeffs_in(&self, g: Gen) -> Vec<Poly> {
        let d = self.degree_in(g).max(0) as usize;
        let mut buckets: Vec<Vec<(Monomial, Rational)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let e = m.exp(g);
            assert!(e >= 0, "coeffs_in on negative exponent");
            buckets[e as usize].push((m.without(g), c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    /// Keep only terms of total degree `<= max_deg`.
    pub fn truncate(&self, max_deg: i32) -> Poly {
        Poly::from_sorted(
            self.terms
                .iter()
                .filter(|t| t.0.degree() <= max_deg)
                .cloned()
                .collect(),
        )
    }

    /// Keep the terms for which `keep` holds.
    pub fn filter(&self, keep: impl Fn(&Monomial, &Rational) -> bool) -> Poly {
        Poly::from_sorted(self.terms.iter().filter(|t| keep(&t.0, &t.1)).cloned().collect())
    }

    /// Monomial gcd of all terms (componentwise minimum exponent).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let first = match it.next() {
            Some(t) => t.0.clone(),
            None => return Monomial::one(),
        };
        it.fold(first, |acc, t| acc.gcd(&t.0))
    }

    /// Positive rational content (gcd of numerators over lcm of denominators).
    pub fn content(&self) -> Rational {
        content_of(self.terms.iter().map(|t| &t.1))
    }

    /// Split as `c * p` with `p` integral, primitive, leading coefficient positive.
    pub fn primitive(&self) -> (Rational, Poly) {
        if self.is_zero() {
            return (Rational::zero(), Poly::zero());
        }
        let mut c = self.content();
        if self.terms.last().unwrap().1.is_negative() {
            c = -c;
        }
        if c.is_one() {
            return (c, self.clone());
        }
        let inv = c.recip();
        (c, self.scale(&inv))
    }

    /// Substitute generators by polynomials (unmapped generators stay).
    /// Negative exponents are only allowed on unmapped generators.
    pub fn substitute(&self, image: &dyn Fn(Gen) -> Option<Poly>) -> Poly {
        let mut cache: HashMap<(Gen, i32), Poly> = HashMap::new();
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut prod = Poly::constant(c.clone());
            for (g, e) in m.iter() {
                match image(g) {
                    Some(p) => {
                        assert!(e > 0, "negative power of substituted generator {g}");
                        let pe = cache
                            .entry((g, e))
                            .or_insert_with(|| p.pow(e as u32))
                            .clone();
                        prod = &prod * &pe;
                    }
                    None => kept.push((g, e)),
                }
            }
            let km = Monomial::from_pairs(kept);
            for (pm, pc) in prod.terms {
                *acc.entry(pm.mul(&km)).or_insert_with(Rational::zero) += pc;
            }
        }
        Poly::from_map(acc)
    }

    /// Exact division by a polynomial via the graded-lex division algorithm.
    pub fn exact_div(&self, d: &Poly) -> Result<Poly> {
        let (dm, dc) = d.leading().ok_or(Error::DivisionByZero)?.clone();
        let mut rem = self.clone();
        let mut quot: Vec<(Monomial, Rational)> = Vec::new();
        while let Some((rm, rc)) = rem.leading().cloned() {
            let qm = rm.div(&dm);
            if !(rm.divisible_by(&dm) || d.len() == 1) {
                return Err(Error::DivisionNotExact);
            }
            let qc = &rc / &dc;
            rem = &rem - &d.mul_term(&qm, &qc);
            quot.push((qm, qc));
        }
        Ok(Poly::from_terms(quot))
    }

    /// Divide by `c*x + rest` where `rest` does not involve `x` and `c` is a
    /// nonzero constant. Returns `None` if the division leaves a remainder.
    pub fn div_linear(&self, x: Gen, c: &Rational, rest: &Poly) -> Option<Poly> {
        let n = self.coeffs_in(x);
        let d = n.len() - 1;
        if d == 0 {
            return if self.is_zero() { Some(Poly::zero()) } else { None };
        }
        let cinv = c.recip();
        let mut q: Vec<Poly> = vec![Poly::zero(); d];
        q[d - 1] = n[d].scale(&cinv);
        for k in (1..d).rev() {
            q[k - 1] = (&n[k] - &(rest * &q[k])).scale(&cinv);
        }
        if !(&n[0] - &(rest * &q[0])).is_zero() {
            return None;
        }
        let xp = Poly::var(x);
        let mut acc = Poly::zero();
        for qk in q.into_iter().rev() {
            acc = &(&acc * &xp) + &qk;
        }
        Some(acc)
    }

    /// Evaluate modulo a prime at an integer point (used as a cheap
    /// nonvanishing witness before attempting exact divisions).
    pub fn eval_mod(&self, point: &dyn Fn(Gen) -> u64, p: u64) -> u64 {
        let pb = BigInt::from(p);
        let mut acc: u128 = 0;
        for (m, c) in &self.terms {
            let num = mod_big(c.numer(), &pb);
            let den = mod_big(c.denom(), &pb);
            let mut t = num as u128 * inv_mod(den, p) as u128 % p as u128;
            for (g, e) in m.iter() {
                let base = point(g) % p;
                let e = if e >= 0 {
                    e as u64
                } else {
                    // p is prime, so x^-k = x^(k(p-2)).
                    (-e) as u64 * (p - 2)
                };
                t = t * pow_mod(base, e, p) as u128 % p as u128;
            }
            acc = (acc + t) % p as u128;
        }
        acc as u64
    }
}

pub(crate) fn mod_big(x: &BigInt, p: &BigInt) -> u64 {
    let r = ((x % p) + p) % p;
    r.try_into().expect("residue fits in u64")
}

pub(crate) fn pow_mod(b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b128 = b as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b128 % p as u128;
        }
        b128 = b128 * b128 % p as u128;
        e >>= 1;
    }
    acc as u64
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn merge(a: &[(Monomial, Rational)], b: &[(Monomial, Rational)], negate_b: bool) -> Poly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                let c = if negate_b { -&b[j].1 } else { b[j].1.clone() };
                out.push((b[j].0.clone(), c));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let c = if negate_b { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                if !c.is_zero() {
                    out.push((a[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    for t in &b[j..] {
        let c = if negate_b { -&t.1 } else { t.1.clone() };
        out.push((t.0.clone(), c));
    }
    Poly::from_sorted(out)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        merge(&self.terms, &rhs.terms, false)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        merge(&self.terms, &rhs.terms, true)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_sorted(self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        if self.len() == 1 {
            let (m, c) = &self.terms[0];
            return rhs.mul_term(m, c);
        }
        if rhs.len() == 1 {
            let (m, c) = &rhs.terms[0];
            return self.mul_term(m, c);
        }
        let mut acc: HashMap<Monomial, Rational> =
            HashMap::with_capacity(self.len() * rhs.len() / 2 + 1);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.get_mut(&m) {
                    Some(x) => *x += c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Poly::from_map(acc)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: &Poly) -> Poly {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| format!("({c})*{m:?}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::rational::rat;
    use proptest::prelude::*;

    fn x() -> Poly {
        Poly::var(Gen::named("x"))
    }
    fn y() -> Poly {
        Poly::var(Gen::named("y"))
    }

    #[test]
    fn difference_of_squares() {
        let p = &(&x() + &Poly::one()) * &(&x() - &Poly::one());
        assert_eq!(p, &(&x() * &x()) - &Poly::one());
    }

    #[test]
    fn additive_identity_and_cancellation() {
        let p = &(&x() * &y()) + &Poly::int(3);
        assert_eq!(&p + &Poly::zero(), p);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn exact_division() {
        let a = &x() + &y();
        let b = &x() - &(&y() * &y());
        let p = &a * &b;
        assert_eq!(p.exact_div(&a).unwrap(), b);
        assert_eq!(p.exact_div(&b).unwrap(), a);
        let q = &p + &Poly::one();
        assert_eq!(q.exact_div(&a), Err(Error::DivisionNotExact));
    }

    #[test]
    fn linear_division() {
        let g = Gen::named("x");
        let rest = &y() * &Poly::var(Gen::named("z"));
        let d = &x() + &rest;
        let b = &(&x() * &x()) + &Poly::int(5);
        let p = &d * &b;
        assert_eq!(p.div_linear(g, &Rational::one(), &rest), Some(b.clone()));
        assert_eq!((&p + &y()).div_linear(g, &Rational::one(), &rest), None);
    }

    #[test]
    fn primitive_part() {
        let p = &x().scale(&rat(-2, 3)) + &Poly::constant(rat(4, 9));
        let (c, q) = p.primitive();
        assert_eq!(c, rat(-2, 9));
        assert_eq!(q, &x().scale(&int(3)) - &Poly::int(2));
    }

    #[test]
    fn substitute_and_partial() {
        let g = Gen::named("x");
        let p = &(&x() * &x()) * &y();
        let s = p.substitute(&|h| (h == g).then(|| &y() + &Poly::one()));
        assert_eq!(s, &(&y() + &Poly::one()).pow(2) * &y());
        assert_eq!(p.partial(g), (&x() * &y()).scale(&int(2)));
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        let gens = ["x", "y", "z"];
        prop::collection::vec(
            (prop::collection::vec(0i32..3, 3), -5i64..6, 1i64..4),
            0..5,
        )
        .prop_map(move |ts| {
            Poly::from_terms(ts.into_iter().map(|(es, n, d)| {
                let m = Monomial::from_pairs(
                    gens.iter().zip(es).map(|(g, e)| (Gen::named(g), e)),
                );
                (m, rat(n, d))
            }))
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn division_inverts_multiplication(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
        }
    }
}
