//! Sparse monomials with integer (possibly negative) exponents.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::gens::Gen;

type Exps = SmallVec<[(Gen, i32); 6]>;

/// Product of generator powers. Exponents are sorted by generator and never
/// zero; the total degree is cached because it leads the term order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    deg: i32,
    exps: Exps,
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn var(g: Gen) -> Monomial {
        Monomial::pow_of(g, 1)
    }

    pub fn pow_of(g: Gen, e: i32) -> Monomial {
        if e == 0 {
            return Monomial::one();
        }
        let mut exps = Exps::new();
        exps.push((g, e));
        Monomial { deg: e, exps }
    }

    /// Build from arbitrary (generator, exponent) pairs; repeated generators add.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Gen, i32)>) -> Monomial {
        let mut v: Vec<(Gen, i32)> = pairs.into_iter().collect();
        v.sort_by_key(|p| p.0);
        let mut exps = Exps::new();
        for (g, e) in v {
            match exps.last_mut() {
                Some(last) if last.0 == g => last.1 += e,
                _ => exps.push((g, e)),
            }
        }
        exps.retain(|p| p.1 != 0);
        let deg = exps.iter().map(|p| p.1).sum();
        Monomial { deg, exps }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> i32 {
        self.deg
    }

    pub fn exp(&self, g: Gen) -> i32 {
        match self.exps.binary_search_by_key(&g, |p| p.0) {
            Ok(i) => self.exps[i].1,
            Err(_) => 0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Gen, i32)> + '_ {
        self.exps.iter().copied()
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> + '_ {
        self.exps.iter().map(|p| p.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.exps.iter().all(|p| p.1 > 0)
    }

    fn merge_with(&self, other: &Monomial, sign: i32) -> Monomial {
        let mut exps = Exps::with_capacity(self.exps.len() + other.exps.len());
        let (a, b) = (&self.exps, &other.exps);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                exps.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                exps.push((b[j].0, sign * b[j].1));
                j += 1;
            } else {
                let e = a[i].1 + sign * b[j].1;
                if e != 0 {
                    exps.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
        Monomial {
            deg: self.deg + sign * other.deg,
            exps,
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.merge_with(other, 1)
    }

    /// Quotient with exponents allowed to go negative.
    pub fn div(&self, other: &Monomial) -> Monomial {
        self.merge_with(other, -1)
    }

    pub fn pow(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        Monomial {
            deg: self.deg * n,
            exps: self.exps.iter().map(|&(g, e)| (g, e * n)).collect(),
        }
    }

    /// True if `other` divides `self` with nonnegative quotient.
    pub fn divisible_by(&self, other: &Monomial) -> bool {
        other.exps.iter().all(|&(g, e)| self.exp(g) >= e)
    }

    /// Componentwise minimum (over the union of generators, absent = 0).
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        self.combine(other, i32::min)
    }

    /// Componentwise maximum.
    pub fn lcm(&self, other: &Monomial) -> Monomial {
        self.combine(other, i32::max)
    }

    fn combine(&self, other: &Monomial, f: fn(i32, i32) -> i32) -> Monomial {
        let mut gens: Vec<Gen> = self.gens().chain(other.gens()).collect();
        gens.sort();
        gens.dedup();
        Monomial::from_pairs(gens.into_iter().map(|g| (g, f(self.exp(g), other.exp(g)))))
    }

    /// Drop the generators for which `keep` is false.
    pub fn restrict(&self, keep: impl Fn(Gen) -> bool) -> Monomial {
        Monomial::from_pairs(self.iter().filter(|p| keep(p.0)))
    }

    /// Same monomial with `g` removed.
    pub fn without(&self, g: Gen) -> Monomial {
        self.restrict(|h| h != g)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order: total degree first, then the exponent of
    /// the smallest generator on which the two differ decides.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.deg.cmp(&other.deg) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (a, b) = (&self.exps, &other.exps);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, e)), None) => return e.cmp(&0),
                (None, Some(&(_, e))) => return 0.cmp(&e),
                (Some(&(ga, ea)), Some(&(gb, eb))) => {
                    if ga == gb {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    } else if ga < gb {
                        return ea.cmp(&0);
                    } else {
                        return 0.cmp(&eb);
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(g, e)| if e == 1 { g.name() } else { format!("{}^{}", g.name(), e) })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(pairs: &[(&str, i32)]) -> Monomial {
        Monomial::from_pairs(pairs.iter().map(|&(n, e)| (Gen::named(n), e)))
    }

    #[test]
    fn mul_div_cancel() {
        let a = m(&[("v1", 2), ("r0", 1)]);
        let b = m(&[("v1", -2), ("r2", 3)]);
        let p = a.mul(&b);
        assert_eq!(p, m(&[("r0", 1), ("r2", 3)]));
        assert_eq!(p.div(&b), a);
        assert_eq!(a.div(&a), Monomial::one());
    }

    #[test]
    fn graded_lex_is_multiplicative() {
        let x = m(&[("v0", 1)]);
        let y = m(&[("v1", 1)]);
        let z = m(&[("v2", 1)]);
        let xz = x.mul(&z);
        let yy = y.mul(&y);
        assert!(xz > yy);
        assert!(xz.mul(&y) > yy.mul(&y));
        assert!(x > y && y > z);
        assert!(Monomial::one() < z);
    }

    #[test]
    fn gcd_lcm() {
        let a = m(&[("v1", 2), ("r0", 1)]);
        let b = m(&[("v1", 1), ("r1", 3)]);
        assert_eq!(a.gcd(&b), m(&[("v1", 1)]));
        assert_eq!(a.lcm(&b), m(&[("v1", 2), ("r0", 1), ("r1", 3)]));
        assert!(a.divisible_by(&m(&[("v1", 2)])));
        assert!(!a.divisible_by(&b));
    }
}
