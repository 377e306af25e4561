//! Flow densities `K_n`, `R_n`, `Q_n` of the Burgers-KdV hierarchy and their
//! decomposition into powers of `w`.
//!
//! Densities are polynomials in the jet generators (`v_k` plays `w_k`, `r_k`
//! plays `rho_k`) and the formal parameter `eps`.

use std::collections::BTreeMap;

use num_traits::One;

use crate::error::{Error, Result};
use crate::exact_algebra::rational::{double_factorial, factorial, inv_factorial};
use crate::exact_algebra::{int, rat, Gen, Monomial, Poly, Rational};
use crate::jet_ring::dx_poly;

pub fn eps() -> Gen {
    Gen::named("eps")
}

pub fn w(k: u32) -> Poly {
    Poly::var(Gen::v(k))
}

pub fn rho(k: u32) -> Poly {
    Poly::var(Gen::r(k))
}

fn ep(n: i32) -> Poly {
    Poly::term(Monomial::pow_of(eps(), n), Rational::one())
}

fn dxn(p: &Poly, n: u32) -> Poly {
    (0..n).fold(p.clone(), |acc, _| dx_poly(&acc))
}

/// Polynomial in `eps` with differential-polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsSeries(pub Poly);

impl EpsSeries {
    /// Coefficients of the powers of `eps` present.
    pub fn coeffs(&self) -> BTreeMap<u32, Poly> {
        let e = eps();
        let mut out: BTreeMap<u32, Vec<(Monomial, Rational)>> = BTreeMap::new();
        for (m, c) in self.0.terms() {
            out.entry(m.exp(e) as u32)
                .or_default()
                .push((m.without(e), c.clone()));
        }
        out.into_iter().map(|(k, ts)| (k, Poly::from_terms(ts))).collect()
    }

    /// Smallest and largest `eps` power, `None` for zero.
    pub fn eps_range(&self) -> Option<(u32, u32)> {
        let cs = self.coeffs();
        Some((*cs.keys().next()?, *cs.keys().next_back()?))
    }

    pub fn at_eps_zero(&self) -> Poly {
        self.coeffs().remove(&0).unwrap_or_default()
    }
}

/// Inverse of the x-derivative on total derivatives, normalized to have no
/// constant term. Works by peeling the highest jet variable.
pub fn integrate_x(p: &Poly) -> Result<Poly> {
    let mut rest = p.clone();
    let mut acc = Poly::zero();
    loop {
        if rest.is_zero() {
            return Ok(acc);
        }
        let top = rest
            .gens()
            .into_iter()
            .filter_map(|g| g.jet_order().map(|k| (k, g)))
            .max_by_key(|&(k, g)| (k, std::cmp::Reverse(g)));
        let Some((n, z)) = top.filter(|t| t.0 > 0) else {
            return Err(Error::NotExact(format!("{rest:?}")));
        };
        if rest.degree_in(z) > 1 {
            return Err(Error::NotExact(format!("nonlinear in {z}: {rest:?}")));
        }
        let coeff = rest.coeffs_in(z).swap_remove(1);
        if coeff.gens().iter().any(|g| g.jet_order().is_some_and(|k| k >= n)) {
            return Err(Error::NotExact(format!("coefficient of {z} too high: {coeff:?}")));
        }
        let (c, k) = z.family().unwrap();
        let lower = Gen::indexed(c, k - 1);
        let g = Poly::from_terms(coeff.terms().iter().map(|(m, c)| {
            let e = m.exp(lower);
            (m.mul(&Monomial::var(lower)), c / int(e as i64 + 1))
        }));
        rest = &rest - &dx_poly(&g);
        acc = &acc + &g;
    }
}

/// The operator `w + rho^2/2 + eps (rho_x/2 + rho d) + eps^2/2 d^2`.
fn l_op(p: &Poly) -> Poly {
    let base = &w(0) + &(&rho(0) * &rho(0)).scale(&rat(1, 2));
    let px = dx_poly(p);
    let t1 = &base * p;
    let t2 = &ep(1) * &(&(&rho(1).scale(&rat(1, 2)) * p) + &(&rho(0) * &px));
    let t3 = &ep(2) * &dx_poly(&px).scale(&rat(1, 2));
    &(&t1 + &t2) + &t3
}

#[derive(Clone, Debug, Default)]
pub struct FlowDensities {
    pub k: Vec<Poly>,
    pub r: Vec<Poly>,
    pub q: Vec<Poly>,
}

impl FlowDensities {
    /// All densities with index `0..=n`.
    pub fn compute(n: usize) -> Result<FlowDensities> {
        let mut f = FlowDensities {
            k: vec![w(0)],
            r: vec![rho(0)],
            q: vec![&(&w(0) + &(&rho(0) * &rho(0)).scale(&rat(1, 2))) + &(&ep(1) * &rho(1)).scale(&rat(1, 2))],
        };
        for m in 1..=n {
            let kp = &f.k[m - 1];
            let c = rat(2, 2 * m as i64 + 1);
            let (knew, (rnew, qnew)) = rayon::join(
                || -> Result<Poly> {
                    let rhs = &(&(&w(0) * &dx_poly(kp)) + &(&w(1) * kp).scale(&rat(1, 2)))
                        + &(&ep(2) * &dxn(kp, 3)).scale(&rat(1, 8));
                    integrate_x(&rhs.scale(&c))
                },
                || {
                    let rp = &f.r[m - 1];
                    let r = &l_op(rp)
                        + &(&(&rho(0) * kp).scale(&rat(1, 2)) + &(&ep(1) * &dx_poly(kp)).scale(&rat(3, 4)));
                    let qn = l_op(&f.q[m - 1]).scale(&rat(1, m as i64 + 1));
                    (r.scale(&c), qn)
                },
            );
            f.k.push(knew?);
            f.r.push(rnew);
            f.q.push(qnew);
        }
        Ok(f)
    }
}

pub fn compute_k(n: usize) -> Result<EpsSeries> {
    Ok(EpsSeries(FlowDensities::compute(n)?.k.swap_remove(n)))
}

pub fn compute_r(n: usize) -> Result<EpsSeries> {
    Ok(EpsSeries(FlowDensities::compute(n)?.r.swap_remove(n)))
}

pub fn compute_q(n: usize) -> Result<EpsSeries> {
    Ok(EpsSeries(FlowDensities::compute(n)?.q.swap_remove(n)))
}

/// `w^n / n!` (zero for negative `n`).
fn w_pow(n: i64) -> Poly {
    if n < 0 {
        return Poly::zero();
    }
    Poly::term(Monomial::pow_of(Gen::v(0), n as i32), inv_factorial(n as u64))
}

/// `sum_j w^j rho^(2N-2j+1) / (j! (2N-2j+1)!!)`.
pub fn s_poly(n: i64) -> Poly {
    if n < 0 {
        return Poly::zero();
    }
    Poly::from_terms((0..=n).map(|j| {
        let m = Monomial::from_pairs([(Gen::v(0), j as i32), (Gen::r(0), (2 * n - 2 * j + 1) as i32)]);
        let d = factorial(j as u64) * double_factorial(2 * n - 2 * j + 1);
        (m, Rational::new(1.into(), d))
    }))
}

/// `u^n / n!` with `u = w + rho^2/2`.
fn u_pow(n: i64) -> Poly {
    if n < 0 {
        return Poly::zero();
    }
    (&w(0) + &(&rho(0) * &rho(0)).scale(&rat(1, 2)))
        .pow(n as u32)
        .scale(&inv_factorial(n as u64))
}

/// Coefficients `a_i`, `b_i` (of `R_n`, `Q_n`) and `c_i` (of `K_n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub a: Vec<Poly>,
    pub b: Vec<Poly>,
    pub c: Vec<Poly>,
}

fn get(v: &[Poly], i: i64) -> Poly {
    if i < 0 {
        Poly::zero()
    } else {
        v[i as usize].clone()
    }
}

impl Decomposition {
    /// `a_0..=a_n`, `b_0..=b_n`, `c_0..=c_n` from the differential recursions.
    pub fn by_recursion(n: usize) -> Result<Decomposition> {
        let ux = &w(1) + &(&rho(0) * &rho(1));
        let uxx = dx_poly(&ux);
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..=n as i64 {
            // (i - 1/2) d c_i = ((1-i) w_x + eps^2/8 d^3) c_{i-1}
            //   + eps^2/8 (w_xxx + 3 w_xx d + 3 w_x d^2) c_{i-2}
            //   + 3 eps^2/8 (w_x w_xx + w_x^2 d) c_{i-3} + eps^2/8 w_x^3 c_{i-4}
            let ci = if i == 0 {
                Poly::one()
            } else {
                let c1 = get(&c, i - 1);
                let c2 = get(&c, i - 2);
                let c3 = get(&c, i - 3);
                let c4 = get(&c, i - 4);
                let e2 = ep(2).scale(&rat(1, 8));
                let mut rhs = &(&w(1) * &c1).scale(&int(1 - i)) + &(&e2 * &dxn(&c1, 3));
                let t2 = &(&(&w(3) * &c2) + &(&w(2) * &dx_poly(&c2)).scale(&int(3)))
                    + &(&w(1) * &dxn(&c2, 2)).scale(&int(3));
                let t3 = &(&(&w(1) * &w(2)) * &c3) + &(&(&w(1) * &w(1)) * &dx_poly(&c3));
                let t4 = &w(1).pow(3) * &c4;
                rhs = &rhs + &(&e2 * &(&(&t2 + &t3.scale(&int(3))) + &t4));
                integrate_x(&rhs)?.scale(&rat(2, 2 * i - 1))
            };
            c.push(ci);

            // i a_i = (eps rho_x/2 + eps rho d + eps^2/2 d^2) a_{i-1}
            //   + (eps rho u_x + eps^2/2 u_xx + eps^2 u_x d) a_{i-2} + eps^2/2 u_x^2 a_{i-3}
            let ai = if i == 0 {
                Poly::one()
            } else {
                let a1 = get(&a, i - 1);
                let a2 = get(&a, i - 2);
                let a3 = get(&a, i - 3);
                let t1 = &(&ep(1) * &(&(&rho(1) * &a1).scale(&rat(1, 2)) + &(&rho(0) * &dx_poly(&a1))))
                    + &(&ep(2) * &dxn(&a1, 2)).scale(&rat(1, 2));
                let t2 = &(&(&ep(1) * &(&rho(0) * &ux)) + &(&ep(2) * &uxx).scale(&rat(1, 2))) * &a2;
                let t2 = &t2 + &(&ep(2) * &(&ux * &dx_poly(&a2)));
                let t3 = &(&ep(2) * &(&ux * &ux)).scale(&rat(1, 2)) * &a3;
                (&(&t1 + &t2) + &t3).scale(&rat(1, i))
            };
            a.push(ai);

            // (i + 1/2) b_i = (rho^2/2 + eps rho_x/2 + eps rho d + eps^2/2 d^2) b_{i-1}
            //   + (eps rho w_x + eps^2/2 w_xx + eps^2 w_x d) b_{i-2} + eps^2/2 w_x^2 b_{i-3}
            //   - rho/2 a_i + (eps rho rho_x + eps^2/2 rho_xx + eps^2 rho_x d) a_{i-1}
            //   + eps^2/2 rho_x (2 w_x + rho rho_x) a_{i-2}
            //   + (rho/2 + 3 eps/4 d) c_i + 3 eps/4 w_x c_{i-1}
            let b1 = get(&b, i - 1);
            let b2 = get(&b, i - 2);
            let b3 = get(&b, i - 3);
            let a1 = get(&a, i - 1);
            let a2 = get(&a, i - 2);
            let ai = get(&a, i);
            let ci = get(&c, i);
            let c1 = get(&c, i - 1);
            let half = rat(1, 2);
            let mut rhs = &(&(&rho(0) * &rho(0)).scale(&half) + &(&ep(1) * &rho(1)).scale(&half)) * &b1;
            rhs = &rhs + &(&ep(1) * &(&rho(0) * &dx_poly(&b1)));
            rhs = &rhs + &(&ep(2) * &dxn(&b1, 2)).scale(&half);
            rhs = &rhs + &(&(&(&ep(1) * &(&rho(0) * &w(1))) + &(&ep(2) * &w(2)).scale(&half)) * &b2);
            rhs = &rhs + &(&ep(2) * &(&w(1) * &dx_poly(&b2)));
            rhs = &rhs + &(&(&ep(2) * &(&w(1) * &w(1))).scale(&half) * &b3);
            rhs = &rhs - &(&rho(0) * &ai).scale(&half);
            rhs = &rhs
                + &(&(&(&ep(1) * &(&rho(0) * &rho(1))) + &(&ep(2) * &rho(2)).scale(&half)) * &a1);
            rhs = &rhs + &(&ep(2) * &(&rho(1) * &dx_poly(&a1)));
            let t = &rho(1) * &(&w(1).scale(&int(2)) + &(&rho(0) * &rho(1)));
            rhs = &rhs + &(&(&ep(2) * &t).scale(&half) * &a2);
            rhs = &rhs + &(&(&rho(0) * &ci).scale(&half) + &(&ep(1) * &dx_poly(&ci)).scale(&rat(3, 4)));
            rhs = &rhs + &(&ep(1) * &(&w(1) * &c1)).scale(&rat(3, 4));
            b.push(rhs.scale(&rat(2, 2 * i + 1)));
        }
        Ok(Decomposition { a, b, c })
    }

    /// Read the coefficients off the densities themselves: `c_i` from `K_n`,
    /// `a_i` from `Q_n` in the variable `u = w + rho^2/2`, then `b_i` from
    /// what remains of `R_n`.
    pub fn direct(f: &FlowDensities) -> Result<Decomposition> {
        let n = f.k.len() - 1;
        let v0 = Gen::v(0);
        let read = |p: &Poly, what: &str| -> Result<Vec<Poly>> {
            let cs = p.coeffs_in(v0);
            let mut out = vec![Poly::zero(); n + 2];
            for (e, c) in cs.into_iter().enumerate() {
                if e > n + 1 {
                    return Err(Error::DecompositionFailure(format!("{what}: w-degree {e}")));
                }
                out[n + 1 - e] = c.scale(&crate::exact_algebra::rational::big(factorial(e as u64)));
            }
            Ok(out)
        };
        let c = read(&f.k[n], "K")?;
        let u0 = Gen::u(0);
        let shifted = f.q[n].substitute(&|g| {
            (g == v0).then(|| &Poly::var(u0) - &(&rho(0) * &rho(0)).scale(&rat(1, 2)))
        });
        let a = read(&shifted.substitute(&|g| (g == u0).then(|| Poly::var(v0))), "Q")?;
        let mut rem = f.r[n].clone();
        for (i, ai) in a.iter().enumerate().take(n + 1) {
            rem = &rem - &(ai * &s_poly((n - i) as i64));
        }
        let mut b = read(&rem, "R")?;
        // the w-power n - i carries b_i, so realign from the n+1-slot layout
        b.remove(0);
        let mut c = c;
        c.truncate(n + 1);
        let mut a = a;
        a.truncate(n + 1);
        Ok(Decomposition { a, b, c })
    }

    /// Rebuild `K_n`, `R_n`, `Q_n` from the coefficients (needs index `n + 1`
    /// of `a` and `c`).
    pub fn reconstruct(&self, n: usize) -> (Poly, Poly, Poly) {
        let mut k = Poly::zero();
        let mut r = Poly::zero();
        let mut qn = Poly::zero();
        for i in 0..=n {
            let m = (n - i) as i64;
            k = &k + &(&self.c[i] * &w_pow(m + 1));
            r = &r + &(&(&self.a[i] * &s_poly(m)) + &(&self.b[i] * &w_pow(m)));
            qn = &qn + &(&self.a[i] * &u_pow(m + 1));
        }
        qn = &qn + &self.a[n + 1];
        k = &k + &self.c[n + 1];
        (k, r, qn)
    }
}

/// Verify that both routes agree and reproduce the densities up to index `n`.
pub fn check_decomposition(n: usize) -> Result<Decomposition> {
    let f = FlowDensities::compute(n + 1)?;
    let rec = Decomposition::by_recursion(n + 1)?;
    for m in 0..=n {
        let (k, r, qn) = rec.reconstruct(m);
        if k != f.k[m] || r != f.r[m] || qn != f.q[m] {
            return Err(Error::DecompositionFailure(format!("reconstruction at n={m}")));
        }
    }
    let trunc = FlowDensities {
        k: f.k[..=n].to_vec(),
        r: f.r[..=n].to_vec(),
        q: f.q[..=n].to_vec(),
    };
    let direct = Decomposition::direct(&trunc)?;
    for i in 0..=n {
        if direct.a[i] != rec.a[i] || direct.b[i] != rec.b[i] || direct.c[i] != rec.c[i] {
            return Err(Error::DecompositionFailure(format!("routes disagree at i={i}")));
        }
    }
    for i in 0..=n {
        for x in [&rec.a[i], &rec.b[i], &rec.c[i]] {
            if x.contains_gen(Gen::v(0)) {
                return Err(Error::DecompositionFailure(format!("coefficient {i} contains w")));
            }
        }
    }
    let mut out = rec;
    out.a.truncate(n + 1);
    out.b.truncate(n + 1);
    out.c.truncate(n + 1);
    Ok(out)
}

/// `eps`-support bounds: `a_i` in `[floor((i+1)/2), 2i-1]` for `i >= 1`,
/// `b_i` in `[floor((i+1)/2), 2i]`. Returns the violations found.
pub fn support_violations(d: &Decomposition) -> Vec<String> {
    let mut out = Vec::new();
    for (i, (a, b)) in d.a.iter().zip(&d.b).enumerate().skip(1) {
        let lo = (i as u32).div_ceil(2);
        if let Some((x, y)) = EpsSeries(a.clone()).eps_range() {
            if x < lo || y > 2 * i as u32 - 1 {
                out.push(format!("a_{i}: eps^{x}..eps^{y}"));
            }
        }
        if let Some((x, y)) = EpsSeries(b.clone()).eps_range() {
            if x < lo || y > 2 * i as u32 {
                out.push(format!("b_{i}: eps^{x}..eps^{y}"));
            }
        }
    }
    out
}

/// Evolutionary derivation of the flow with densities `(k, r)` applied to a
/// differential polynomial: `w_j -> d^(j+1) k`, `rho_j -> d^(j+1) r`.
pub fn evolve(p: &Poly, k: &Poly, r: &Poly) -> Poly {
    let mut acc = Poly::zero();
    for g in p.gens() {
        let img = match g.family() {
            Some(('v', j)) => dxn(k, j + 1),
            Some(('r', j)) => dxn(r, j + 1),
            _ => continue,
        };
        acc = &acc + &(&p.partial(g) * &img);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::parse_expr;
    use crate::jet_ring::jet;

    /// Parse with `w`, `rho`, `eps` spelled as in the hierarchy.
    fn h(s: &str) -> Poly {
        let s = s
            .replace("rho_xxxx", "r4")
            .replace("rho_xxx", "r3")
            .replace("rho_xx", "r2")
            .replace("rho_x", "r1")
            .replace("rho", "r0")
            .replace("w_xxx", "v3")
            .replace("w_xx", "v2")
            .replace("w_x", "v1")
            .replace('w', "v0");
        parse_expr(jet(), &s).unwrap().to_poly().unwrap()
    }

    #[test]
    fn integration() {
        assert_eq!(integrate_x(&h("w*w_x")).unwrap(), h("w^2/2"));
        assert_eq!(integrate_x(&h("w_xxx")).unwrap(), h("w_xx"));
        assert!(matches!(integrate_x(&h("w_x^2")), Err(Error::NotExact(_))));
        assert!(matches!(integrate_x(&h("w")), Err(Error::NotExact(_))));
        let f = h("w*rho_x^2 + eps*rho*w_xx");
        assert_eq!(integrate_x(&dx_poly(&f)).unwrap(), f);
    }

    #[test]
    fn first_densities() {
        let f = FlowDensities::compute(1).unwrap();
        assert_eq!(f.k[1], h("w^2/2 + eps^2/12*w_xx"));
        assert_eq!(f.r[1], h("w*rho + rho^3/3 + eps*(rho*rho_x + w_x/2) + eps^2/3*rho_xx"));
        assert_eq!(f.q[0], h("w + rho^2/2 + eps*rho_x/2"));
    }

    #[test]
    fn decomposition_examples() {
        let d = Decomposition::by_recursion(2).unwrap();
        assert_eq!(d.a[0], h("1"));
        assert_eq!(d.a[1], h("eps*rho_x/2"));
        assert_eq!(
            d.a[2],
            h("eps/2*(rho*w_x + rho^2*rho_x) + eps^2/8*(3*rho_x^2 + 2*w_xx + 4*rho*rho_xx) + eps^3/8*rho_xxx")
        );
        assert!(d.b[0].is_zero());
        assert_eq!(d.b[1], h("eps/2*(w_x + rho*rho_x) + eps^2/3*rho_xx"));
        assert_eq!(
            d.b[2],
            h("eps^2/24*(12*w_x*rho_x + 15*rho*rho_x^2 + 4*rho*w_xx + 4*rho^2*rho_xx) \
               + eps^3/24*(16*rho_x*rho_xx + 3*w_xxx + 5*rho*rho_xxx) + eps^4/15*rho_xxxx")
        );
        assert_eq!(d.c[1], Poly::zero());
        assert_eq!(d.c[2], h("eps^2/12*w_xx"));
    }

    #[test]
    fn routes_agree() {
        let d = check_decomposition(5).unwrap();
        assert!(support_violations(&d).is_empty(), "{:?}", support_violations(&d));
    }

    #[test]
    fn genus_zero_flows_commute() {
        let f = FlowDensities::compute(2).unwrap();
        let at0 = |p: &Poly| EpsSeries(p.clone()).at_eps_zero();
        for m in 0..=2 {
            for n in 0..=2 {
                let (km, rm) = (at0(&f.k[m]), at0(&f.r[m]));
                let (kn, rn) = (at0(&f.k[n]), at0(&f.r[n]));
                let lhs_w = evolve(&dx_poly(&kn), &km, &rm);
                let rhs_w = evolve(&dx_poly(&km), &kn, &rn);
                assert_eq!(lhs_w, rhs_w);
                let lhs_r = evolve(&dx_poly(&rn), &km, &rm);
                let rhs_r = evolve(&dx_poly(&rm), &kn, &rn);
                assert_eq!(lhs_r, rhs_r);
            }
        }
    }
}
