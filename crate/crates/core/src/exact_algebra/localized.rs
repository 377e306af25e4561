//! Polynomials localized at a declared set of invertible generators.
//!
//! Some invertible generators are "materialized": they stand for a polynomial
//! in the other generators (`u1 = v1 + r0*r1`, `U2 = 1 - I1 - J0*J1`, ...).
//! They only ever appear in denominators; in numerators they are expanded.
//!
//! Canonical form of `scale * num / den`:
//!   - `num` has integer coefficients, content 1, positive leading coefficient,
//!     and contains no materialized generator;
//!   - `den` is a monomial in invertible generators with positive exponents;
//!   - no generator of `den` divides `num` (for materialized ones: their
//!     defining polynomial does not divide `num`);
//!   - zero is `0 * 0 / 1`.
//!
//! All of `r`, `v1`, `v1 + r*r1` etc. are irreducible, so this form is unique.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};

use super::gens::Gen;
use super::monomial::Monomial;
use super::poly::{inv_mod, mod_big, Poly};
use super::rational::{int, Rational};
use crate::error::{Error, Result};

fn registry() -> &'static Mutex<Vec<&'static Ring>> {
    static REG: OnceLock<Mutex<Vec<&'static Ring>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(Vec::new()))
}

const PRIME: u64 = (1 << 61) - 1;

/// Defining relation `gen = c * pivot + rest` of a materialized generator.
#[derive(Debug)]
pub struct Rule {
    pub gen: Gen,
    pub poly: Poly,
    pivot: Gen,
    pivot_coeff: Rational,
    rest: Poly,
}

/// A localization of a polynomial ring: which generators may be inverted and
/// which of those are materialized polynomials.
#[derive(Debug)]
pub struct Ring {
    pub name: &'static str,
    invertible: Vec<Gen>,
    rules: Vec<Rule>,
}

impl Ring {
    /// Leak a new ring so expressions can hold a `&'static` reference.
    /// `rules` pairs a generator with its defining polynomial, which must be
    /// linear with constant coefficient in some generator (the pivot).
    pub fn leak(name: &'static str, plain: &[Gen], rules: &[(Gen, Poly)]) -> &'static Ring {
        let mut invertible: Vec<Gen> = plain.to_vec();
        let mut rs = Vec::new();
        for (g, p) in rules {
            invertible.push(*g);
            let pivot = p
                .gens()
                .into_iter()
                .find(|&x| {
                    let cs = p.coeffs_in(x);
                    cs.len() == 2 && cs[1].constant_value().is_some_and(|c| !c.is_zero())
                })
                .unwrap_or_else(|| panic!("rule for {g} has no linear pivot"));
            let cs = p.coeffs_in(pivot);
            rs.push(Rule {
                gen: *g,
                poly: p.clone(),
                pivot,
                pivot_coeff: cs[1].constant_value().unwrap(),
                rest: cs[0].clone(),
            });
        }
        invertible.sort();
        let ring: &'static Ring = Box::leak(Box::new(Ring {
            name,
            invertible,
            rules: rs,
        }));
        registry().lock().expect("ring registry poisoned").push(ring);
        ring
    }

    /// Look up a ring created with [`Ring::leak`] by name.
    pub fn by_name(name: &str) -> Option<&'static Ring> {
        registry()
            .lock()
            .expect("ring registry poisoned")
            .iter()
            .rev()
            .find(|r| r.name == name)
            .copied()
    }

    pub fn is_invertible(&self, g: Gen) -> bool {
        self.invertible.binary_search(&g).is_ok()
    }

    pub fn rule(&self, g: Gen) -> Option<&Rule> {
        self.rules.iter().find(|r| r.gen == g)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn invertible(&self) -> &[Gen] {
        &self.invertible
    }

    pub fn zero(&'static self) -> LocalizedExpr {
        LocalizedExpr {
            ring: self,
            scale: Rational::zero(),
            num: Poly::zero(),
            den: Monomial::one(),
        }
    }

    pub fn one(&'static self) -> LocalizedExpr {
        self.constant(Rational::one())
    }

    pub fn constant(&'static self, c: Rational) -> LocalizedExpr {
        if c.is_zero() {
            return self.zero();
        }
        LocalizedExpr {
            ring: self,
            scale: c,
            num: Poly::one(),
            den: Monomial::one(),
        }
    }

    pub fn int(&'static self, n: i64) -> LocalizedExpr {
        self.constant(int(n))
    }

    pub fn gen(&'static self, g: Gen) -> LocalizedExpr {
        self.poly(Poly::var(g))
    }

    pub fn var(&'static self, name: &str) -> LocalizedExpr {
        self.gen(Gen::named(name))
    }

    /// Embed a (Laurent) polynomial; negative exponents must be invertible.
    pub fn poly(&'static self, p: Poly) -> LocalizedExpr {
        self.fraction(p, Monomial::one())
            .expect("polynomial with non-invertible negative exponent")
    }

    pub fn fraction(&'static self, num: Poly, den: Monomial) -> Result<LocalizedExpr> {
        LocalizedExpr::canonical(self, Rational::one(), num, den)
    }

    fn expand_ruled(&self, m: &Monomial, cache: &mut HashMap<(Gen, i32), Poly>) -> Poly {
        let mut plain = Vec::new();
        let mut acc = Poly::one();
        for (g, e) in m.iter() {
            match self.rule(g) {
                Some(r) if e > 0 => {
                    let pe = cache.entry((g, e)).or_insert_with(|| r.poly.pow(e as u32));
                    acc = &acc * pe;
                }
                _ => plain.push((g, e)),
            }
        }
        acc.mul_monomial(&Monomial::from_pairs(plain))
    }
}

#[derive(Clone)]
pub struct LocalizedExpr {
    ring: &'static Ring,
    scale: Rational,
    num: Poly,
    den: Monomial,
}

impl PartialEq for LocalizedExpr {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.ring, other.ring)
            && self.scale == other.scale
            && self.den == other.den
            && self.num == other.num
    }
}
impl Eq for LocalizedExpr {}

impl std::hash::Hash for LocalizedExpr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ring.name.hash(state);
        self.scale.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn mod_rational(q: &Rational) -> u64 {
    let p = num_bigint::BigInt::from(PRIME);
    mulmod(mod_big(q.numer(), &p), inv_mod(mod_big(q.denom(), &p), PRIME))
}

fn mulmod(a: u64, b: u64) -> u64 {
    (a as u128 * b as u128 % PRIME as u128) as u64
}

impl Rule {
    /// Cheap necessary test: evaluate at a random point of the hypersurface
    /// `rule = 0`. A nonzero value proves non-divisibility.
    fn may_divide(&self, num: &Poly, salt: u64) -> bool {
        let base = |g: Gen| splitmix(g.id() as u64 ^ salt) % PRIME;
        let rest = self.rest.eval_mod(&base, PRIME);
        // pivot = -rest / c
        let c = mod_rational(&self.pivot_coeff);
        let pivot_val = mulmod((PRIME - rest) % PRIME, inv_mod(c, PRIME));
        let pivot = self.pivot;
        let point = |g: Gen| if g == pivot { pivot_val } else { base(g) };
        num.eval_mod(&point, PRIME) == 0
    }

    fn divide(&self, num: &Poly) -> Option<Poly> {
        if !num.contains_gen(self.pivot) {
            return None;
        }
        if !self.may_divide(num, 0x5eed) {
            return None;
        }
        num.div_linear(self.pivot, &self.pivot_coeff, &self.rest)
    }
}

impl LocalizedExpr {
    fn canonical(ring: &'static Ring, scale: Rational, num: Poly, den: Monomial) -> Result<Self> {
        if scale.is_zero() || num.is_zero() {
            return Ok(ring.zero());
        }
        for (g, e) in den.iter() {
            if !ring.is_invertible(g) {
                return Err(Error::NonInvertibleDenominator(format!("{g}^{e}")));
            }
        }
        let (mut num, mut den) = Self::cancel_monomials(ring, num, den)?;
        if ring.rules.iter().any(|r| num.contains_gen(r.gen)) {
            let mut cache = HashMap::new();
            let mut acc: HashMap<Monomial, Rational> = HashMap::new();
            for (m, c) in num.terms() {
                for (pm, pc) in ring.expand_ruled(m, &mut cache).into_terms() {
                    *acc.entry(pm).or_insert_with(Rational::zero) += pc * c;
                }
            }
            num = Poly::from_terms(acc);
            if num.is_zero() {
                return Ok(ring.zero());
            }
            (num, den) = Self::cancel_monomials(ring, num, den)?;
        }
        for rule in &ring.rules {
            let mut e = den.exp(rule.gen);
            while e > 0 {
                match rule.divide(&num) {
                    Some(q) => {
                        num = q;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e != den.exp(rule.gen) {
                den = den.without(rule.gen).mul(&Monomial::pow_of(rule.gen, e));
            }
        }
        let (c, prim) = num.primitive();
        Ok(LocalizedExpr {
            ring,
            scale: scale * c,
            num: prim,
            den,
        })
    }

    /// Move negative exponents into the denominator and cancel common
    /// monomial factors against it.
    fn cancel_monomials(ring: &Ring, num: Poly, den: Monomial) -> Result<(Poly, Monomial)> {
        let mc = num.monomial_content();
        if mc.is_one() {
            return Ok((num, den));
        }
        let mut shift = Vec::new();
        for (g, e) in mc.iter() {
            if e < 0 {
                if !ring.is_invertible(g) {
                    return Err(Error::NonInvertibleDenominator(format!("{g}^{e}")));
                }
                shift.push((g, e));
            } else if ring.is_invertible(g) {
                let c = e.min(den.exp(g));
                if c > 0 {
                    shift.push((g, c));
                }
            }
        }
        if shift.is_empty() {
            return Ok((num, den));
        }
        let shift = Monomial::from_pairs(shift);
        let num = num.mul_monomial(&Monomial::one().div(&shift));
        let den = den.div(&shift);
        Ok((num, den))
    }

    pub fn ring(&self) -> &'static Ring {
        self.ring
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Monomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.scale.is_one() && self.num == Poly::one()
    }

    /// Numerator with the scale folded in.
    pub fn scaled_num(&self) -> Poly {
        self.num.scale(&self.scale)
    }

    /// The value as a polynomial, if the denominator is trivial.
    pub fn to_poly(&self) -> Option<Poly> {
        self.den.is_one().then(|| self.scaled_num())
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if !self.den.is_one() {
            return None;
        }
        self.num.constant_value().map(|c| c * &self.scale)
    }

    /// All generators occurring in numerator or denominator.
    pub fn gens(&self) -> Vec<Gen> {
        let mut gs = self.num.gens();
        gs.extend(self.den.gens());
        gs.sort();
        gs.dedup();
        gs
    }

    /// Generators the value actually depends on (materialized denominators
    /// are replaced by the generators of their defining polynomial).
    pub fn support(&self) -> Vec<Gen> {
        let mut gs = self.num.gens();
        for g in self.den.gens() {
            match self.ring.rule(g) {
                Some(r) => gs.extend(r.poly.gens()),
                None => gs.push(g),
            }
        }
        gs.sort();
        gs.dedup();
        gs
    }

    fn check_ring(&self, other: &Self) {
        assert!(
            std::ptr::eq(self.ring, other.ring),
            "ring mismatch: {} vs {}",
            self.ring.name,
            other.ring.name
        );
    }

    fn lift_to(&self, den: &Monomial, cache: &mut HashMap<(Gen, i32), Poly>) -> Poly {
        let mult = den.div(&self.den);
        self.ring.expand_ruled(&mult, cache).mul_term(&Monomial::one(), &self.scale)
            * &self.num
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_ring(other);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let den = self.den.lcm(&other.den);
        let mut cache = HashMap::new();
        let a = self.lift_to(&den, &mut cache);
        let b = other.lift_to(&den, &mut cache);
        Self::canonical(self.ring, Rational::one(), &a + &b, den).expect("sum stays in ring")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LocalizedExpr {
            scale: -&self.scale,
            ..self.clone()
        }
    }

    pub fn scale_by(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return self.ring.zero();
        }
        LocalizedExpr {
            scale: &self.scale * c,
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_ring(other);
        if self.is_zero() || other.is_zero() {
            return self.ring.zero();
        }
        Self::canonical(
            self.ring,
            &self.scale * &other.scale,
            &self.num * &other.num,
            self.den.mul(&other.den),
        )
        .expect("product stays in ring")
    }

    /// Multiplicative inverse; requires the numerator to be a unit of the ring.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mc = self.num.monomial_content();
        for g in mc.gens() {
            if !self.ring.is_invertible(g) {
                return Err(Error::NonInvertibleDenominator(format!("{:?}", self.num)));
            }
        }
        let mut rest = self.num.mul_monomial(&Monomial::one().div(&mc));
        let mut factors = vec![mc];
        for rule in &self.ring.rules {
            let mut k = 0;
            while let Some(q) = rule.divide(&rest) {
                rest = q;
                k += 1;
            }
            if k > 0 {
                factors.push(Monomial::pow_of(rule.gen, k));
            }
        }
        let c = rest
            .constant_value()
            .ok_or_else(|| Error::NonInvertibleDenominator(format!("{:?}", rest)))?;
        let den = factors.iter().fold(Monomial::one(), |a, m| a.mul(m));
        Self::canonical(
            self.ring,
            (&self.scale * c).recip(),
            Poly::term(self.den.clone(), Rational::one()),
            den,
        )
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut acc = self.ring.one();
        let mut base = self.clone();
        let mut n = n as u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Apply the derivation determined by its values on generators. Images of
    /// materialized generators are derived from their defining polynomial.
    pub fn derive(&self, image: &dyn Fn(Gen) -> LocalizedExpr) -> Self {
        let ring = self.ring;
        if self.is_zero() {
            return ring.zero();
        }
        let d_poly = |p: &Poly| -> LocalizedExpr {
            let mut poly_part = Poly::zero();
            let mut frac_part = ring.zero();
            for g in p.gens() {
                let dg = image(g);
                if dg.is_zero() {
                    continue;
                }
                let pg = p.partial(g);
                match dg.to_poly() {
                    Some(q) => poly_part = &poly_part + &(&pg * &q),
                    None => frac_part = frac_part.add(&ring.poly(pg).mul(&dg)),
                }
            }
            ring.poly(poly_part).add(&frac_part)
        };
        let dn = d_poly(&self.num);
        let mut log_d = ring.zero();
        for (g, e) in self.den.iter() {
            let dg = match ring.rule(g) {
                Some(r) => d_poly(&r.poly),
                None => image(g),
            };
            if dg.is_zero() {
                continue;
            }
            let inv_g = ring
                .fraction(Poly::one(), Monomial::var(g))
                .expect("denominator generator is invertible");
            log_d = log_d.add(&dg.mul(&inv_g).scale_by(&int(e as i64)));
        }
        let base = LocalizedExpr {
            ring,
            scale: self.scale.clone(),
            num: Poly::one(),
            den: self.den.clone(),
        };
        let num_e = ring.poly(self.num.clone());
        base.mul(&dn.sub(&num_e.mul(&log_d)))
    }

    /// Formal partial derivative with respect to a (non-materialized) generator.
    pub fn partial(&self, x: Gen) -> Self {
        let ring = self.ring;
        self.derive(&|g| if g == x { ring.one() } else { ring.zero() })
    }

    /// Substitute generators by expressions of `target`. Unmapped plain
    /// generators map to themselves; unmapped materialized generators map to
    /// the image of their defining polynomial.
    pub fn substitute(
        &self,
        target: &'static Ring,
        image: &dyn Fn(Gen) -> Option<LocalizedExpr>,
    ) -> Result<Self> {
        if self.is_zero() {
            return Ok(target.zero());
        }
        let mut images: HashMap<Gen, LocalizedExpr> = HashMap::new();
        let get = |g: Gen, images: &mut HashMap<Gen, LocalizedExpr>| -> Result<LocalizedExpr> {
            if let Some(x) = images.get(&g) {
                return Ok(x.clone());
            }
            let x = match image(g) {
                Some(x) => x,
                None => match self.ring.rule(g) {
                    Some(r) => substitute_poly(&r.poly, target, &image)?,
                    None => target.gen(g),
                },
            };
            images.insert(g, x.clone());
            Ok(x)
        };
        let mut den_img = target.one();
        for (g, e) in self.den.iter() {
            den_img = den_img.mul(&get(g, &mut images)?.pow(e)?);
        }
        let num_img = substitute_poly(&self.num, target, &|g| match images.get(&g) {
            Some(x) => Some(x.clone()),
            None => image(g),
        })?;
        Ok(num_img.div(&den_img)?.scale_by(&self.scale))
    }

    /// Evaluate at rational values of every generator in the support.
    pub fn eval(&self, value: &dyn Fn(Gen) -> Rational) -> Result<Rational> {
        let mut num = Rational::zero();
        for (m, c) in self.num.terms() {
            let mut t = c.clone();
            for (g, e) in m.iter() {
                t *= pow_q(&value(g), e)?;
            }
            num += t;
        }
        let mut den = Rational::one();
        for (g, e) in self.den.iter() {
            let gv = match self.ring.rule(g) {
                Some(r) => eval_poly(&r.poly, value)?,
                None => value(g),
            };
            den *= pow_q(&gv, e)?;
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(num * &self.scale / den)
    }
}

fn pow_q(q: &Rational, e: i32) -> Result<Rational> {
    if e < 0 && q.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(num_traits::pow::Pow::pow(q, e))
}

fn eval_poly(p: &Poly, value: &dyn Fn(Gen) -> Rational) -> Result<Rational> {
    let mut acc = Rational::zero();
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for (g, e) in m.iter() {
            t *= pow_q(&value(g), e)?;
        }
        acc += t;
    }
    Ok(acc)
}

/// Substitute into a polynomial with images in `target`, bringing everything
/// over one common denominator before a single canonicalization.
fn substitute_poly(
    p: &Poly,
    target: &'static Ring,
    image: &dyn Fn(Gen) -> Option<LocalizedExpr>,
) -> Result<LocalizedExpr> {
    let mut imgs: HashMap<Gen, LocalizedExpr> = HashMap::new();
    let mut max_e: HashMap<Gen, i32> = HashMap::new();
    for (m, _) in p.terms() {
        for (g, e) in m.iter() {
            if e < 0 {
                return Err(Error::NonInvertibleDenominator(format!(
                    "negative power of {g} in substituted numerator"
                )));
            }
            let img = match imgs.get(&g) {
                Some(x) => x.clone(),
                None => {
                    let x = image(g).unwrap_or_else(|| target.gen(g));
                    imgs.insert(g, x.clone());
                    x
                }
            };
            if !img.den.is_one() {
                let me = max_e.entry(g).or_insert(0);
                *me = (*me).max(e);
            }
        }
    }
    let mut common = Monomial::one();
    for (g, e) in &max_e {
        common = common.mul(&imgs[g].den.pow(*e));
    }
    let mut ruled_cache = HashMap::new();
    let mut pow_cache: HashMap<(Gen, i32), Poly> = HashMap::new();
    let mut comp_cache: HashMap<(Gen, i32), Poly> = HashMap::new();
    let mut acc = Poly::zero();
    let mut batch: Vec<Poly> = Vec::new();
    for (m, c) in p.terms() {
        let mut t = Poly::constant(c.clone());
        let mut present: Vec<(Gen, i32)> = Vec::new();
        for (g, e) in m.iter() {
            let img = &imgs[&g];
            let pe = pow_cache
                .entry((g, e))
                .or_insert_with(|| img.num.pow(e as u32).scale(&num_traits::pow::Pow::pow(&img.scale, e as u32)));
            t = &t * pe;
            present.push((g, e));
        }
        for (g, me) in &max_e {
            let e = present.iter().find(|x| x.0 == *g).map(|x| x.1).unwrap_or(0);
            if *me > e {
                let img = &imgs[g];
                let comp = comp_cache
                    .entry((*g, *me - e))
                    .or_insert_with(|| target.expand_ruled(&img.den.pow(*me - e), &mut ruled_cache));
                t = &t * &*comp;
            }
        }
        batch.push(t);
        if batch.len() >= 64 {
            acc = &acc + &sum_polys(std::mem::take(&mut batch));
        }
    }
    acc = &acc + &sum_polys(batch);
    LocalizedExpr::canonical(target, Rational::one(), acc, common)
}

fn sum_polys(ps: Vec<Poly>) -> Poly {
    Poly::from_terms(ps.into_iter().flat_map(|p| p.into_terms()))
}

impl fmt::Debug for LocalizedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ({})*({:?})/({:?})", self.ring.name, self.scale, self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::rational::rat;

    /// Test ring: x invertible, w = x + y*z materialized.
    fn ring() -> &'static Ring {
        static R: OnceLock<&'static Ring> = OnceLock::new();
        R.get_or_init(|| {
            let x = Gen::named("x");
            let y = Gen::named("y");
            let z = Gen::named("z");
            let rule = &Poly::var(x) + &(&Poly::var(y) * &Poly::var(z));
            Ring::leak("test", &[x], &[(Gen::named("w"), rule)])
        })
    }

    fn e(name: &str) -> LocalizedExpr {
        ring().var(name)
    }

    #[test]
    fn monomial_cancellation() {
        // (x^2 + x y z)/x = x + y z
        let a = e("x").mul(&e("x")).add(&e("x").mul(&e("y")).mul(&e("z")));
        let q = a.div(&e("x")).unwrap();
        assert_eq!(q, e("x").add(&e("y").mul(&e("z"))));
        assert!(q.den().is_one());
    }

    #[test]
    fn materialized_generator_cancels() {
        let w = e("x").add(&e("y").mul(&e("z")));
        assert_eq!(w, e("w"));
        let inv = w.inv().unwrap();
        assert_eq!(inv.den(), &Monomial::var(Gen::named("w")));
        assert!(w.mul(&inv).is_one());
        let p = w.mul(&e("y").add(&ring().int(3)));
        assert_eq!(p.div(&w).unwrap(), e("y").add(&ring().int(3)));
    }

    #[test]
    fn non_invertible_is_rejected() {
        assert!(e("y").inv().is_err());
        assert!(e("x").add(&e("y")).inv().is_err());
    }

    #[test]
    fn content_is_factored() {
        let a = e("x").scale_by(&rat(2, 3)).add(&e("y").scale_by(&rat(4, 9)));
        assert_eq!(a.scale(), &rat(2, 9));
        assert_eq!(a.num(), &(&Poly::var(Gen::named("x")).scale(&int(3)) + &Poly::var(Gen::named("y")).scale(&int(2))));
    }

    #[test]
    fn partial_through_materialized_denominator() {
        // d/dx (1/w) = -1/w^2 ; d/dy (1/w) = -z/w^2
        let inv = e("w").inv().unwrap();
        let w2 = e("w").pow(2).unwrap();
        assert_eq!(inv.partial(Gen::named("x")), ring().int(-1).div(&w2).unwrap());
        assert_eq!(inv.partial(Gen::named("y")), e("z").neg().div(&w2).unwrap());
    }

    #[test]
    fn substitution() {
        // y -> y^2 in (y^2 + z)/x
        let y = Gen::named("y");
        let a = e("y").mul(&e("y")).add(&e("z")).div(&e("x")).unwrap();
        let s = a.substitute(ring(), &|g| (g == y).then(|| e("y").pow(2).unwrap())).unwrap();
        assert_eq!(s, e("y").pow(4).unwrap().add(&e("z")).div(&e("x")).unwrap());
        assert_eq!(a.substitute(ring(), &|_| None).unwrap(), a);
        // shifting y moves w out of the invertible set
        let b = e("w").inv().unwrap();
        let shifted = b.substitute(ring(), &|g| (g == y).then(|| e("y").add(&ring().one())));
        assert!(matches!(shifted, Err(Error::NonInvertibleDenominator(_))));
    }

    #[test]
    fn clearing_denominators_agrees() {
        // a/b + c/d == (ad + bc)/bd when cleared into plain polynomials
        let a = e("y").div(&e("x")).unwrap();
        let b = e("z").div(&e("w")).unwrap();
        let s = a.add(&b);
        let cleared = s.mul(&e("x")).mul(&e("w"));
        let direct = e("y").mul(&e("w")).add(&e("z").mul(&e("x")));
        assert_eq!(cleared, direct);
    }
}
