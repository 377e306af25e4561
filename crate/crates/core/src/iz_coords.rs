//! Itzykson–Zuber type coordinates `I_k`, `J_k`.
//!
//! On the genus-zero solution `I_0 = v`, `J_0 = r` and
//! `I_k = (d I_{k-1} - [k=1]) / v_1`, `J_k = (d J_{k-1} - r_1 I_k) / u_1`.
//! The IZ ring inverts `J_0`, `U_1 = 1 - I_1`, `U_2 = 1 - I_1 - J_0 J_1` and
//! `W_1 = 1 - J_1`; on the jet side `U_1 = 1/v_1` and `U_2 = 1/u_1`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_algebra::rational::{big, double_factorial, factorial, inv_factorial};
use crate::exact_algebra::{int, parse_with, rat, Gen, LocalizedExpr, Monomial, Poly, Rational, Ring};
use crate::jet_ring::{self, jet, JetExpr, LogSum};

pub type IzExpr = LocalizedExpr;

pub fn u1_gen() -> Gen {
    Gen::indexed('U', 1)
}

pub fn u2_gen() -> Gen {
    Gen::indexed('U', 2)
}

pub fn w1_gen() -> Gen {
    Gen::indexed('W', 1)
}

fn pv(g: Gen) -> Poly {
    Poly::var(g)
}

pub fn iz() -> &'static Ring {
    static R: OnceLock<&'static Ring> = OnceLock::new();
    R.get_or_init(|| {
        let one = Poly::one();
        let i1 = pv(Gen::i(1));
        let j0j1 = &pv(Gen::j(0)) * &pv(Gen::j(1));
        Ring::leak(
            "iz",
            &[Gen::j(0)],
            &[
                (u1_gen(), &one - &i1),
                (u2_gen(), &(&one - &i1) - &j0j1),
                (w1_gen(), &one - &pv(Gen::j(1))),
            ],
        )
    })
}

pub fn i(k: u32) -> IzExpr {
    iz().gen(Gen::i(k))
}

pub fn j(k: u32) -> IzExpr {
    iz().gen(Gen::j(k))
}

fn inv_gen(g: Gen) -> IzExpr {
    iz().fraction(Poly::one(), Monomial::var(g)).expect("invertible")
}

pub fn parse_iz(s: &str) -> Result<IzExpr> {
    parse_with(iz(), s, &|_| None)
}

/// `I_k`, `J_k` as jet expressions, `k = 0..=n`.
#[derive(Clone, Debug)]
pub struct IzInJets {
    pub i: Vec<JetExpr>,
    pub j: Vec<JetExpr>,
}

pub fn iz_from_jets(n: usize) -> IzInJets {
    let v1inv = jet_ring::v(1).inv().expect("v1 invertible");
    let u1inv = jet_ring::u(1).inv().expect("u1 invertible");
    let r1 = jet_ring::r(1);
    let mut is = vec![jet_ring::v(0)];
    let mut js = vec![jet_ring::r(0)];
    for k in 1..=n {
        let mut di = jet_ring::d_x(&is[k - 1]);
        if k == 1 {
            di = di.sub(&jet().one());
        }
        let ik = di.mul(&v1inv);
        let jk = jet_ring::d_x(&js[k - 1]).sub(&r1.mul(&ik)).mul(&u1inv);
        is.push(ik);
        js.push(jk);
    }
    IzInJets { i: is, j: js }
}

/// `v_k`, `r_k` as IZ expressions, `k = 0..=n`.
#[derive(Clone, Debug)]
pub struct JetsInIz {
    pub v: Vec<IzExpr>,
    pub r: Vec<IzExpr>,
}

/// `d_x` written in IZ coordinates:
/// `d I_0 = 1/U_1`, `d I_k = I_{k+1}/U_1`, `d J_k = (J_{k+1} + J_1 I_{k+1}/U_1)/U_2`.
pub fn d_x_iz(e: &IzExpr) -> IzExpr {
    let inv_u1 = inv_gen(u1_gen());
    let inv_u2 = inv_gen(u2_gen());
    let j1_over_u1 = j(1).mul(&inv_u1);
    e.derive(&|g| match g.family() {
        Some(('I', 0)) => inv_u1.clone(),
        Some(('I', k)) => i(k + 1).mul(&inv_u1),
        Some(('J', k)) => j(k + 1).add(&j1_over_u1.mul(&i(k + 1))).mul(&inv_u2),
        _ => iz().zero(),
    })
}

pub fn jets_from_iz(n: usize) -> JetsInIz {
    let mut v = vec![i(0)];
    let mut r = vec![j(0)];
    for k in 1..=n {
        v.push(d_x_iz(&v[k - 1]));
        r.push(d_x_iz(&r[k - 1]));
    }
    JetsInIz { v, r }
}

fn jets_cache(n: usize) -> JetsInIz {
    static C: OnceLock<std::sync::Mutex<Option<JetsInIz>>> = OnceLock::new();
    let m = C.get_or_init(Default::default);
    let mut g = m.lock().expect("cache poisoned");
    if g.as_ref().is_none_or(|c| c.v.len() <= n) {
        *g = Some(jets_from_iz(n));
    }
    g.clone().unwrap()
}

/// Rewrite a jet expression in IZ coordinates.
pub fn fo_to_iz(f: &JetExpr) -> Result<IzExpr> {
    let n = jet_ring::max_jet_order(f) as usize;
    let t = jets_cache(n.max(1));
    let inv_u2 = inv_gen(u2_gen());
    f.substitute(iz(), &|g| match g.family() {
        Some(('v', k)) => Some(t.v[k as usize].clone()),
        Some(('r', k)) => Some(t.r[k as usize].clone()),
        Some(('u', 1)) => Some(inv_u2.clone()),
        _ => None,
    })
}

/// Rewrite an IZ expression back into jets.
pub fn iz_to_jets(f: &IzExpr) -> Result<JetExpr> {
    let n = f
        .gens()
        .into_iter()
        .filter_map(|g| match g.family() {
            Some(('I' | 'J', k)) => Some(k as usize),
            _ => None,
        })
        .max()
        .unwrap_or(1);
    let t = iz_from_jets(n.max(1));
    let v1inv = jet_ring::v(1).inv()?;
    let u1inv = jet_ring::u(1).inv()?;
    let w1 = jet().one().sub(&t.j[1]);
    f.substitute(jet(), &|g| match g.family() {
        Some(('I', k)) => Some(t.i[k as usize].clone()),
        Some(('J', k)) => Some(t.j[k as usize].clone()),
        Some(('U', 1)) => Some(v1inv.clone()),
        Some(('U', 2)) => Some(u1inv.clone()),
        Some(('W', 1)) => Some(w1.clone()),
        _ => None,
    })
}

/// Logarithmic terms in IZ form; monomial arguments are split into generator logs.
pub fn log_to_iz(f: &LogSum) -> Result<LogSum> {
    let mut acc: BTreeMap<Gen, Rational> = BTreeMap::new();
    for (c, arg) in &f.terms {
        let a = fo_to_iz(arg)?;
        let terms = a.scaled_num().into_terms();
        let [(m, k)] = terms.as_slice() else {
            return Err(Error::NotExact(format!("log argument {}", a.to_text())));
        };
        if !k.is_one() {
            return Err(Error::NotExact(format!("log argument {}", a.to_text())));
        }
        for (g, e) in m.iter() {
            *acc.entry(g).or_insert_with(Rational::zero) += c * int(e as i64);
        }
        for (g, e) in a.den().iter() {
            *acc.entry(g).or_insert_with(Rational::zero) -= c * int(e as i64);
        }
    }
    Ok(LogSum::new(
        acc.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (c, iz().gen(g)))
            .collect(),
    ))
}

/// Restriction to `I_0 = I_1 = 0`, `J_0 = 1`.
pub fn star_restrict(f: &IzExpr) -> Result<IzExpr> {
    f.substitute(iz(), &|g| match g.family() {
        Some(('I', 0 | 1)) => Some(iz().zero()),
        Some(('J', 0)) => Some(iz().one()),
        Some(('U', 1)) => Some(iz().one()),
        Some(('U', 2)) => Some(iz().gen(w1_gen())),
        _ => None,
    })
}

/// Inverse of [`star_restrict`] on `F^o_p`, `p >= 2`:
/// `F = F*(I_k -> J_0^{2k-2} I_k/U_1, J_k -> J_0^{2k-1} J_k/U_1) / (J_0^{3p-3} U_1^{p-1})`.
pub fn star_reconstruct(fstar: &IzExpr, p: usize) -> Result<IzExpr> {
    let inv_u1 = inv_gen(u1_gen());
    let j0 = j(0);
    let w1_img = iz().gen(u2_gen()).mul(&inv_u1);
    let x = fstar.substitute(iz(), &|g| match g.family() {
        Some(('I', k)) if k >= 2 => Some(i(k).mul(&j0.pow(2 * k as i32 - 2).unwrap()).mul(&inv_u1)),
        Some(('J', k)) if k >= 1 => Some(j(k).mul(&j0.pow(2 * k as i32 - 1).unwrap()).mul(&inv_u1)),
        Some(('W', 1)) => Some(w1_img.clone()),
        _ => None,
    })?;
    let pre = j0.pow(3 * p as i32 - 3)?.mul(&iz().gen(u1_gen()).pow(p as i32 - 1)?);
    x.div(&pre)
}

/// The two grading operators for IZ expressions, as in the homogeneity
/// conditions of `F^o_p`: `-sum_{k>=1} ((I_k - [k=1]) d_{I_k} + J_k d_{J_k})` and
/// `sum_{k>=1} (k-1) I_k d_{I_k} + sum_{k>=0} (k - 1/2) J_k d_{J_k}`.
pub fn iz_gradings(f: &IzExpr) -> (IzExpr, IzExpr) {
    let e1 = f.derive(&|g| match g.family() {
        Some(('I', 1)) => iz().one().sub(&i(1)),
        Some(('I', k)) if k >= 2 => i(k).neg(),
        Some(('J', k)) if k >= 1 => j(k).neg(),
        _ => iz().zero(),
    });
    let e2 = f.derive(&|g| match g.family() {
        Some(('I', k)) if k >= 1 => i(k).scale_by(&int(k as i64 - 1)),
        Some(('J', k)) => j(k).scale_by(&rat(2 * k as i64 - 1, 2)),
        _ => iz().zero(),
    });
    (e1, e2)
}

pub fn iz_homogeneity_holds(f: &IzExpr, p: usize) -> bool {
    let (e1, e2) = iz_gradings(f);
    let w = int(p as i64 - 1);
    e1 == f.scale_by(&w) && e2 == f.scale_by(&(w * rat(3, 2)))
}

/// Does `F^{o,*}_p` have the form `(1-J_1)^{-(7p-4)} * poly` with numerator
/// degree at most `13p-7` in `I_{>=2}, J_{>=1}`?
pub fn star_shape_holds(fstar: &IzExpr, p: usize) -> bool {
    let den_ok = fstar.den().iter().all(|(g, e)| g == w1_gen() && e <= 7 * p as i32 - 4);
    let full = fstar.mul(&iz().gen(w1_gen()).pow(7 * p as i32 - 4).unwrap());
    let Some(num) = full.to_poly() else {
        return false;
    };
    den_ok && num.total_degree() <= 13 * p as i32 - 7
}

// ---------------------------------------------------------------------------
// Series inversion between (t, s) and (I, J).

fn ip(k: usize) -> Poly {
    pv(Gen::i(k as u32))
}

fn jp(k: usize) -> Poly {
    pv(Gen::j(k as u32))
}

fn trunc(p: &Poly, n: i64) -> Poly {
    let low = [Gen::i(0), Gen::j(0)];
    p.filter(|m, _| low.iter().map(|g| m.exp(*g) as i64).sum::<i64>() <= n)
}

/// `sum_i v^i r^(2n-2i+1) / (i! (2n-2i+1)!!)` in `I_0`, `J_0`.
fn s_series(n: usize) -> Poly {
    let mut acc = Poly::zero();
    for i in 0..=n {
        let c = inv_factorial(i as u64) / big(double_factorial(2 * (n - i) as i64 + 1));
        acc = &acc + &(&ip(0).pow(i as u32) * &jp(0).pow(2 * (n - i) as u32 + 1)).scale(&c);
    }
    acc
}

fn half_u_pow(n: usize) -> Poly {
    let u = &ip(0) + &(&jp(0) * &jp(0)).scale(&rat(1, 2));
    u.pow(n as u32).scale(&inv_factorial(n as u64))
}

/// `alpha_n` of the inversion formula.
pub fn alpha(n: usize) -> Poly {
    let mut acc = Poly::zero();
    for i in 0..=n {
        let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
        let den = big(num_bigint::BigInt::from(2).pow((n - i) as u32) * factorial(i as u64) * factorial((n - i) as u64))
            * int(2 * (n - i) as i64 + 1);
        let c = int(sign) / den;
        acc = &acc + &(&ip(0).pow(i as u32) * &jp(0).pow(2 * (n - i) as u32 + 1)).scale(&c);
    }
    acc
}

/// `beta_n = (-1)^n/n! (I_0 + J_0^2/2)^n`.
pub fn beta(n: usize) -> Poly {
    let s = if n % 2 == 0 { int(1) } else { int(-1) };
    half_u_pow(n).scale(&s)
}

/// `t_k` and `s_k` as polynomials in `I`, `J`, truncated at degree `n` in `I_0, J_0`.
pub fn ts_from_iz(k: usize, n: usize) -> (Poly, Poly) {
    let mut t = Poly::zero();
    let mut s = Poly::zero();
    for m in 0..=n {
        let sign = if m % 2 == 0 { int(1) } else { int(-1) };
        t = &t + &(&ip(0).pow(m as u32) * &ip(m + k)).scale(&(&sign * inv_factorial(m as u64)));
        s = &s + &(&alpha(m) * &ip(m + k + 1));
        s = &s + &(&beta(m) * &jp(m + k));
    }
    (trunc(&t, n as i64), trunc(&s, n as i64))
}

/// Check that `(t, s)` from [`ts_from_iz`] reproduce `I_k`, `J_k` through the
/// defining series, for `k <= kmax`, up to degree `n` in `I_0, J_0`.
pub fn iz_roundtrip_check(kmax: usize, n: usize) -> Result<()> {
    let ts: Vec<(Poly, Poly)> = (0..=kmax + n + 1).map(|k| ts_from_iz(k, n)).collect();
    for k in 0..=kmax {
        let mut ik = Poly::zero();
        let mut jk = Poly::zero();
        for m in 0..=n {
            ik = &ik + &(&ts[m + k].0 * &ip(0).pow(m as u32)).scale(&inv_factorial(m as u64));
            jk = &jk + &(&ts[m + k + 1].0 * &s_series(m));
            jk = &jk + &(&ts[m + k].1 * &half_u_pow(m));
        }
        let ik = trunc(&ik, n as i64);
        let jk = trunc(&jk, n as i64);
        if ik != ip(k) {
            return Err(Error::RoundtripFailure(format!("I{k}: {}", crate::exact_algebra::format::poly_text(&(&ik - &ip(k))))));
        }
        if jk != jp(k) {
            return Err(Error::RoundtripFailure(format!("J{k}: {}", crate::exact_algebra::format::poly_text(&(&jk - &jp(k))))));
        }
    }
    Ok(())
}

/// The two finite identities behind the inversion, at index `k`.
pub fn alpha_beta_identities(k: usize) -> Result<()> {
    let mut lhs_a = Poly::zero();
    let mut lhs_b = Poly::zero();
    let mut rhs_a = Poly::zero();
    for n in 0..=k {
        lhs_a = &lhs_a + &(&half_u_pow(n) * &alpha(k - n));
        lhs_b = &lhs_b + &(&half_u_pow(n) * &beta(k - n));
        let sign = if (k - n) % 2 == 0 { int(1) } else { int(-1) };
        rhs_a = &rhs_a - &(&ip(0).pow((k - n) as u32) * &s_series(n)).scale(&(&sign * inv_factorial((k - n) as u64)));
    }
    let mid = jp(0).pow(2 * k as u32 + 1).scale(&(int(-1) / big(double_factorial(2 * k as i64 + 1))));
    if lhs_a != mid || mid != rhs_a {
        return Err(Error::RoundtripFailure(format!("alpha identity at k={k}")));
    }
    let delta = if k == 0 { Poly::one() } else { Poly::zero() };
    if lhs_b != delta {
        return Err(Error::RoundtripFailure(format!("beta identity at k={k}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet_ring::{euler_e1, euler_e2, parse_jets};

    #[test]
    fn first_iz_variables_in_jets() {
        let t = iz_from_jets(2);
        assert_eq!(t.i[1], parse_jets("1 - 1/v1").unwrap());
        assert_eq!(t.i[2], parse_jets("v2/v1^3").unwrap());
        assert_eq!(t.j[1], parse_jets("r1/(v1*u1)").unwrap());
        assert_eq!(
            t.j[2],
            parse_jets("r2/(v1*u1^2) - r1*(u2/(v1*u1^3) + v2/(v1^3*u1) + v2/(v1^2*u1^2))").unwrap()
        );
    }

    #[test]
    fn first_jets_in_iz_variables() {
        let t = jets_from_iz(2);
        assert_eq!(t.v[1], parse_iz("1/U1").unwrap());
        assert_eq!(t.r[1], parse_iz("J1/(U1*U2)").unwrap());
        assert_eq!(t.v[2], parse_iz("I2/U1^3").unwrap());
        assert_eq!(
            t.r[2],
            parse_iz("J2/U2^3 + J1^3/(U1^2*U2^3) + J1*I2*(1/(U1*U2^3) + 1/(U1^2*U2^2) + 1/(U1^3*U2))").unwrap()
        );
    }

    #[test]
    fn conversions_are_mutually_inverse() {
        let t = iz_from_jets(3);
        for k in 0..=3 {
            assert_eq!(fo_to_iz(&t.i[k]).unwrap(), i(k as u32));
            assert_eq!(fo_to_iz(&t.j[k]).unwrap(), j(k as u32));
        }
        let b = jets_from_iz(3);
        for k in 0..=3 {
            assert_eq!(iz_to_jets(&b.v[k]).unwrap(), jet_ring::v(k as u32));
            assert_eq!(iz_to_jets(&b.r[k]).unwrap(), jet_ring::r(k as u32));
        }
    }

    #[test]
    fn gradings_transport() {
        // the E1 relation holds for n >= 1 only: E1 kills v and r
        let t = iz_from_jets(5);
        for n in 1..=5usize {
            let i_n = &t.i[n];
            let d1 = if n == 1 { jet().one() } else { jet().zero() };
            assert_eq!(euler_e1(i_n), d1.sub(i_n));
            assert_eq!(euler_e2(i_n), i_n.scale_by(&int(n as i64 - 1)));
            let j_n = &t.j[n];
            assert_eq!(euler_e1(j_n), j_n.neg());
            assert_eq!(euler_e2(j_n), j_n.scale_by(&rat(2 * n as i64 - 1, 2)));
        }
    }

    #[test]
    fn series_inversion() {
        iz_roundtrip_check(3, 6).unwrap();
        for k in 0..=4 {
            alpha_beta_identities(k).unwrap();
        }
    }

    #[test]
    fn inversion_without_open_variables_is_closed_inversion() {
        // J = 0: t_k = sum (-1)^n I_0^n I_{n+k} / n!
        let (t, _) = ts_from_iz(1, 4);
        let z = t.substitute(&|g| matches!(g.family(), Some(('J', _))).then(Poly::zero));
        let mut expect = Poly::zero();
        for n in 0..=4u32 {
            let c = if n % 2 == 0 { int(1) } else { int(-1) } * inv_factorial(n as u64);
            expect = &expect + &(&ip(0).pow(n) * &ip(n as usize + 1)).scale(&c);
        }
        assert_eq!(z, expect);
    }

    #[test]
    fn log_part_in_iz() {
        let l = log_to_iz(&jet_ring::open_f1()).unwrap();
        assert_eq!(l.terms, vec![(rat(-1, 2), iz().gen(u2_gen()))]);
    }

    #[test]
    fn fo2_iz_and_star() {
        let f = parse_jets(crate::reference::FO2_JETS).unwrap();
        let fi = fo_to_iz(&f).unwrap();
        let printed = parse_iz(crate::reference::FO2_IZ).unwrap();
        assert_eq!(fi, printed.neg());
        assert!(iz_homogeneity_holds(&fi, 2));
        let fs = star_restrict(&fi).unwrap();
        assert_eq!(fs, parse_iz(crate::reference::FO2_STAR).unwrap());
        assert!(star_shape_holds(&fs, 2));
        assert_eq!(star_reconstruct(&fs, 2).unwrap(), fi);
        assert_eq!(iz_to_jets(&fi).unwrap(), f);
    }
}
