//! Genus-zero topological solution as truncated power series in the times,
//! open correlators extracted from `F^o_p`, and the Λ-combinations of them.
//!
//! Series are truncated on a box: every variable has its own degree cap, and
//! there is an optional total-degree cap on top. A box is closed under
//! products, so queries only pay for the variables they mention.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact_algebra::rational::{binomial, double_factorial, factorial, fmt_rational, int, rat};
use crate::exact_algebra::{Gen, Monomial, Rational};
use crate::iz_coords::{self, IzExpr};
use crate::jet_ring::{JetExpr, LogSum};
use crate::loop_solver::FreeEnergyTable;

// ---------------------------------------------------------------------------
// Truncated multivariate series

/// Variables and truncation of a [`MultiSeries`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    vars: Vec<Gen>,
    caps: Vec<u32>,
    total: u32,
    /// The series variable `s_0` stands for `s_0 - s0_center`.
    s0_center: Rational,
}

impl Space {
    /// Box `0 <= deg_g <= cap_g`, plus `total` on the total degree when given.
    pub fn new(caps: impl IntoIterator<Item = (Gen, u32)>, total: Option<u32>) -> Arc<Space> {
        Self::build(caps, total, Rational::zero())
    }

    /// Same, with `s_0` expanded around `center`.
    pub fn shifted(caps: impl IntoIterator<Item = (Gen, u32)>, total: Option<u32>, center: Rational) -> Arc<Space> {
        Self::build(caps, total, center)
    }

    /// All `t_0..t_tmax`, `s_0..s_smax` up to total degree `n`.
    pub fn full(tmax: u32, smax: u32, n: u32) -> Arc<Space> {
        let t = (0..=tmax).map(|k| (Gen::t(k), n));
        let s = (0..=smax).map(|k| (Gen::s(k), n));
        Self::new(t.chain(s), Some(n))
    }

    fn build(caps: impl IntoIterator<Item = (Gen, u32)>, total: Option<u32>, center: Rational) -> Arc<Space> {
        let mut m: BTreeMap<Gen, u32> = BTreeMap::new();
        for (g, c) in caps {
            let e = m.entry(g).or_insert(0);
            *e = (*e).max(c);
        }
        let sum: u32 = m.values().sum();
        let (vars, caps) = m.into_iter().unzip();
        Arc::new(Space { vars, caps, total: total.map_or(sum, |t| t.min(sum)), s0_center: center })
    }

    pub fn vars(&self) -> &[Gen] {
        &self.vars
    }

    pub fn cap(&self, g: Gen) -> Option<u32> {
        self.index(g).map(|i| self.caps[i])
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn s0_center(&self) -> &Rational {
        &self.s0_center
    }

    fn index(&self, g: Gen) -> Option<usize> {
        self.vars.binary_search(&g).ok()
    }

    fn fits(&self, e: &[u32]) -> bool {
        e.iter().zip(&self.caps).all(|(a, c)| a <= c) && e.iter().sum::<u32>() <= self.total
    }

    /// Same variables with `g`'s cap raised by `extra` and the total by `extra`.
    pub fn widened(&self, g: Gen, extra: u32) -> Arc<Space> {
        let mut caps: Vec<(Gen, u32)> = self.vars.iter().copied().zip(self.caps.iter().copied()).collect();
        caps.push((g, 0));
        let caps: Vec<_> = caps.into_iter().map(|(h, c)| if h == g { (h, c + extra) } else { (h, c) }).collect();
        Self::build(caps, Some(self.total + extra), self.s0_center.clone())
    }
}

/// Truncated power series with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    space: Arc<Space>,
    coeffs: BTreeMap<Vec<u32>, Rational>,
}

impl MultiSeries {
    pub fn zero(space: &Arc<Space>) -> Self {
        MultiSeries { space: space.clone(), coeffs: BTreeMap::new() }
    }

    pub fn constant(space: &Arc<Space>, c: Rational) -> Self {
        let mut s = Self::zero(space);
        if !c.is_zero() {
            s.coeffs.insert(vec![0; space.vars.len()], c);
        }
        s
    }

    /// The variable `g` (zero when `g` is outside the space or capped at 0).
    pub fn var(space: &Arc<Space>, g: Gen) -> Self {
        let mut s = Self::zero(space);
        if let Some(i) = space.index(g) {
            let mut e = vec![0; space.vars.len()];
            e[i] = 1;
            if space.fits(&e) {
                s.coeffs.insert(e, Rational::one());
            }
        }
        s
    }

    /// The time `g` itself, i.e. `s0_center + s_0` for `s_0`.
    pub fn time(space: &Arc<Space>, g: Gen) -> Self {
        let s = Self::var(space, g);
        if g == Gen::s(0) {
            s.add(&Self::constant(space, space.s0_center.clone()))
        } else {
            s
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.coeffs.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn constant_term(&self) -> Rational {
        self.coeffs.get(&vec![0; self.space.vars.len()]).cloned().unwrap_or_default()
    }

    /// Coefficient of `prod g^e`; generators outside the space give 0.
    pub fn coefficient(&self, exps: &BTreeMap<Gen, u32>) -> Result<Rational> {
        let mut e = vec![0; self.space.vars.len()];
        for (g, k) in exps {
            match self.space.index(*g) {
                Some(i) => e[i] = *k,
                None if *k == 0 => {}
                None => return Err(Error::TruncationExceeded(format!("{g} is not a series variable"))),
            }
        }
        if !self.space.fits(&e) {
            return Err(Error::TruncationExceeded(format!("monomial {exps:?} beyond the box")));
        }
        Ok(self.coeffs.get(&e).cloned().unwrap_or_default())
    }

    fn same_space(&self, o: &Self) {
        assert!(Arc::ptr_eq(&self.space, &o.space) || self.space == o.space, "series spaces differ");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.same_space(o);
        let mut out = self.clone();
        for (e, c) in &o.coeffs {
            let slot = out.coeffs.entry(e.clone()).or_default();
            *slot += c;
            if slot.is_zero() {
                out.coeffs.remove(e);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiSeries { space: self.space.clone(), coeffs: self.coeffs.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero(&self.space);
        }
        MultiSeries { space: self.space.clone(), coeffs: self.coeffs.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same_space(o);
        let mut acc: HashMap<Vec<u32>, Rational> = HashMap::new();
        let mut e = vec![0u32; self.space.vars.len()];
        for (ea, ca) in &self.coeffs {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in &o.coeffs {
                if da + eb.iter().sum::<u32>() > self.space.total {
                    continue;
                }
                let mut ok = true;
                for i in 0..e.len() {
                    e[i] = ea[i] + eb[i];
                    if e[i] > self.space.caps[i] {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    *acc.entry(e.clone()).or_default() += ca * cb;
                }
            }
        }
        MultiSeries { space: self.space.clone(), coeffs: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(&self.space, Rational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Largest possible degree, which bounds the nilpotency of series without
    /// constant term.
    fn max_degree(&self) -> u32 {
        self.space.total
    }

    pub fn inv(&self) -> Result<Self> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ci = c.recip();
        let y = self.scale(&ci).sub(&Self::constant(&self.space, Rational::one()));
        let mut term = Self::constant(&self.space, Rational::one());
        let mut acc = term.clone();
        for _ in 0..self.max_degree() {
            term = term.mul(&y).neg();
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc.scale(&ci))
    }

    /// `log` of a series with constant term 1.
    pub fn log(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(Error::NonInvertibleDenominator(format!(
                "log needs constant term 1, got {}",
                fmt_rational(&self.constant_term())
            )));
        }
        let y = self.sub(&Self::constant(&self.space, Rational::one()));
        let mut term = Self::constant(&self.space, Rational::one());
        let mut acc = Self::zero(&self.space);
        for k in 1..=self.max_degree() as i64 {
            term = term.mul(&y);
            if term.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&term.scale(&rat(sign, k)));
        }
        Ok(acc)
    }

    /// `d/dg`; the result keeps the space, so its top layer in `g` is lost.
    pub fn derivative(&self, g: Gen) -> Self {
        let Some(i) = self.space.index(g) else {
            return Self::zero(&self.space);
        };
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| e[i] > 0)
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, c * int(e[i] as i64))
            })
            .collect();
        MultiSeries { space: self.space.clone(), coeffs }
    }

    /// Re-express in a smaller space: variables missing from `target` are set
    /// to zero, terms outside its box dropped.
    pub fn restrict(&self, target: &Arc<Space>) -> Self {
        let map: Vec<Option<usize>> = self.space.vars.iter().map(|g| target.index(*g)).collect();
        let mut coeffs = BTreeMap::new();
        'terms: for (e, c) in &self.coeffs {
            let mut t = vec![0; target.vars.len()];
            for (i, k) in e.iter().enumerate() {
                match map[i] {
                    Some(j) => t[j] = *k,
                    None if *k == 0 => {}
                    None => continue 'terms,
                }
            }
            if target.fits(&t) {
                coeffs.insert(t, c.clone());
            }
        }
        MultiSeries { space: target.clone(), coeffs }
    }

    /// Terms of total degree at most `n`.
    pub fn truncated(&self, n: u32) -> Self {
        let coeffs = self.coeffs.iter().filter(|(e, _)| e.iter().sum::<u32>() <= n).map(|(e, c)| (e.clone(), c.clone())).collect();
        MultiSeries { space: self.space.clone(), coeffs }
    }

    /// Human-readable listing, lowest degree first.
    pub fn to_text(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut terms: Vec<_> = self.coeffs.iter().collect();
        terms.sort_by_key(|(e, _)| (e.iter().sum::<u32>(), std::cmp::Reverse((*e).clone())));
        terms
            .into_iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| **k > 0)
                    .map(|(i, k)| if *k == 1 { self.space.vars[i].name() } else { format!("{}^{k}", self.space.vars[i].name()) })
                    .collect();
                if mono.is_empty() {
                    fmt_rational(c)
                } else {
                    format!("{}*{}", fmt_rational(c), mono.join("*"))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

// ---------------------------------------------------------------------------
// Genus zero

/// The topological solution at `eps = 0`.
#[derive(Clone, Debug)]
pub struct Genus0 {
    pub v: MultiSeries,
    pub r: MultiSeries,
}

fn max_index(space: &Space, family: char) -> Option<u32> {
    space.vars.iter().filter_map(|g| g.family()).filter(|(c, _)| *c == family).map(|(_, k)| k).max()
}

/// `sum_{i<=n} v^i r^(2n-2i+1) / (i! (2n-2i+1)!!)`, the coefficient of `t_{n+1}`
/// in the open genus-zero equation.
fn open_kernel(vp: &[MultiSeries], rp: &[MultiSeries], n: usize) -> MultiSeries {
    let space = vp[0].space();
    let mut acc = MultiSeries::zero(space);
    for i in 0..=n {
        let d = Rational::new(factorial(i as u64) * double_factorial(2 * (n - i) as i64 + 1), 1.into());
        acc = acc.add(&vp[i].mul(&rp[2 * n - 2 * i + 1]).scale(&d.recip()));
    }
    acc
}

fn powers(x: &MultiSeries, n: usize) -> Vec<MultiSeries> {
    let mut out = vec![MultiSeries::constant(x.space(), Rational::one())];
    for k in 1..=n {
        out.push(out[k - 1].mul(x));
    }
    out
}

/// `v + r^2/2`.
fn u_top(v: &MultiSeries, r: &MultiSeries) -> MultiSeries {
    v.add(&r.mul(r).scale(&rat(1, 2)))
}

/// Solve both genus-zero Euler–Lagrange equations by fixed-point iteration.
/// Every pass fixes at least one more degree, so `total + 2` passes suffice.
pub fn solve_genus0(space: &Arc<Space>) -> Result<Genus0> {
    let tmax = max_index(space, 't').unwrap_or(0) as usize;
    let smax = max_index(space, 's').unwrap_or(0) as usize;
    let passes = space.total as usize + 2;
    let t = |k: usize| MultiSeries::time(space, Gen::t(k as u32));
    let s = |k: usize| MultiSeries::time(space, Gen::s(k as u32));

    let mut v = MultiSeries::zero(space);
    let mut done = false;
    for _ in 0..passes {
        let vp = powers(&v, tmax);
        let mut next = t(0);
        for n in 1..=tmax {
            next = next.add(&t(n).mul(&vp[n]).scale(&Rational::new(1.into(), factorial(n as u64))));
        }
        if next == v {
            done = true;
            break;
        }
        v = next;
    }
    if !done {
        return Err(Error::ConvergenceFailure("closed genus-zero equation".into()));
    }

    let vp = powers(&v, tmax);
    let mut r = MultiSeries::zero(space);
    done = false;
    for _ in 0..passes {
        let rp = powers(&r, 2 * tmax + 1);
        let up = powers(&u_top(&v, &r), smax);
        let mut next = s(0).add(&t(1).mul(&r));
        for n in 1..tmax {
            next = next.add(&t(n + 1).mul(&open_kernel(&vp, &rp, n)));
        }
        for n in 1..=smax {
            next = next.add(&s(n).mul(&up[n]).scale(&Rational::new(1.into(), factorial(n as u64))));
        }
        if next == r {
            done = true;
            break;
        }
        r = next;
    }
    if !done {
        return Err(Error::ConvergenceFailure("open genus-zero equation".into()));
    }
    Ok(Genus0 { v, r })
}

impl Genus0 {
    /// Left-hand sides of both genus-zero equations at this solution.
    pub fn residuals(&self) -> (MultiSeries, MultiSeries) {
        let space = self.v.space().clone();
        let tmax = max_index(&space, 't').unwrap_or(0) as usize;
        let smax = max_index(&space, 's').unwrap_or(0) as usize;
        let tt = |k: usize| {
            let t = MultiSeries::time(&space, Gen::t(k as u32));
            if k == 1 {
                t.sub(&MultiSeries::constant(&space, Rational::one()))
            } else {
                t
            }
        };
        let vp = powers(&self.v, tmax.max(1));
        let rp = powers(&self.r, 2 * tmax + 1);
        let up = powers(&u_top(&self.v, &self.r), smax);
        let mut closed = MultiSeries::zero(&space);
        for n in 0..=tmax.max(1) {
            closed = closed.add(&tt(n).mul(&vp[n]).scale(&Rational::new(1.into(), factorial(n as u64))));
        }
        let mut open = MultiSeries::zero(&space);
        for n in 0..tmax.max(1) {
            open = open.add(&tt(n + 1).mul(&open_kernel(&vp, &rp, n)));
        }
        for n in 0..=smax {
            let sn = MultiSeries::time(&space, Gen::s(n as u32));
            open = open.add(&sn.mul(&up[n]).scale(&Rational::new(1.into(), factorial(n as u64))));
        }
        (closed, open)
    }

    /// `d^k/dt_0^k` of `v` and `r` for `k <= kmax`, restricted to `target`.
    pub fn jets(&self, kmax: usize, target: &Arc<Space>) -> Jets {
        let mut v = vec![self.v.clone()];
        let mut r = vec![self.r.clone()];
        for k in 1..=kmax {
            v.push(v[k - 1].derivative(Gen::t(0)));
            r.push(r[k - 1].derivative(Gen::t(0)));
        }
        Jets {
            v: v.iter().map(|s| s.restrict(target)).collect(),
            r: r.iter().map(|s| s.restrict(target)).collect(),
        }
    }
}

/// Space in which to solve genus zero so that jets up to order `kmax` are
/// exact on `target`.
pub fn jet_space(target: &Arc<Space>, kmax: u32) -> Arc<Space> {
    target.widened(Gen::t(0), kmax)
}

/// `t_0`-derivatives of the genus-zero solution.
#[derive(Clone, Debug)]
pub struct Jets {
    pub v: Vec<MultiSeries>,
    pub r: Vec<MultiSeries>,
}

impl Jets {
    fn u(&self, k: usize) -> MultiSeries {
        let mut acc = self.v[k].clone();
        for i in 0..=k {
            let c = Rational::new(binomial(k as u64, i as u64), 2.into());
            acc = acc.add(&self.r[i].mul(&self.r[k - i]).scale(&c));
        }
        acc
    }

    fn gen(&self, g: Gen) -> Result<MultiSeries> {
        let (c, k) = g.family().ok_or_else(|| Error::Parse(format!("{g} is not a jet")))?;
        let k = k as usize;
        if k >= self.v.len() {
            return Err(Error::TruncationExceeded(format!("jet {g} beyond the computed order")));
        }
        match c {
            'v' => Ok(self.v[k].clone()),
            'r' => Ok(self.r[k].clone()),
            'u' => Ok(self.u(k)),
            _ => Err(Error::Parse(format!("{g} is not a jet"))),
        }
    }

    /// Value of a jet-ring expression on the solution.
    pub fn eval(&self, e: &JetExpr) -> Result<MultiSeries> {
        eval_expr(e, self.v[0].space(), &|g| self.gen(g))
    }

    pub fn eval_log(&self, f: &LogSum) -> Result<MultiSeries> {
        let space = self.v[0].space().clone();
        let mut acc = MultiSeries::zero(&space);
        for (c, a) in &f.terms {
            acc = acc.add(&self.eval(a)?.log()?.scale(c));
        }
        Ok(acc)
    }
}

/// Value of a localized expression, given the series of every generator
/// that occurs (denominator generators included).
pub fn eval_expr(e: &crate::LocalizedExpr, space: &Arc<Space>, value: &dyn Fn(Gen) -> Result<MultiSeries>) -> Result<MultiSeries> {
    let mut cache: HashMap<(Gen, i32), MultiSeries> = HashMap::new();
    let mut power = |g: Gen, n: i32| -> Result<MultiSeries> {
        if let Some(s) = cache.get(&(g, n)) {
            return Ok(s.clone());
        }
        let s = value(g)?.pow(n as u32);
        cache.insert((g, n), s.clone());
        Ok(s)
    };
    let mut num = MultiSeries::zero(space);
    for (m, c) in e.scaled_num().terms() {
        let mut t = MultiSeries::constant(space, c.clone());
        for (g, k) in m.iter() {
            t = t.mul(&power(g, k)?);
        }
        num = num.add(&t);
    }
    if e.den().is_one() {
        return Ok(num);
    }
    let mut den = MultiSeries::constant(space, Rational::one());
    for (g, k) in e.den().iter() {
        den = den.mul(&power(g, k)?);
    }
    Ok(num.mul(&den.inv()?))
}

/// `I_k`, `J_k` of the genus-zero solution as series, from their defining sums.
#[derive(Clone, Debug)]
pub struct IzSeries {
    pub i: Vec<MultiSeries>,
    pub j: Vec<MultiSeries>,
}

impl Genus0 {
    /// `I_k = sum_n t_{n+k} v^n/n!` and
    /// `J_k = sum_n t_{n+k+1} sum_i v^i r^(2n-2i+1)/(i!(2n-2i+1)!!) + sum_n s_{n+k} (v+r^2/2)^n/n!`
    /// for `k <= kmax`.
    pub fn iz(&self, kmax: usize) -> IzSeries {
        let space = self.v.space().clone();
        let tmax = max_index(&space, 't').unwrap_or(0) as usize;
        let smax = max_index(&space, 's').unwrap_or(0) as usize;
        let vp = powers(&self.v, tmax);
        let rp = powers(&self.r, 2 * tmax + 1);
        let up = powers(&u_top(&self.v, &self.r), smax);
        let t = |k: usize| MultiSeries::time(&space, Gen::t(k as u32));
        let s = |k: usize| MultiSeries::time(&space, Gen::s(k as u32));
        let inv_fact = |n: usize| Rational::new(1.into(), factorial(n as u64));
        let mut is = Vec::new();
        let mut js = Vec::new();
        for k in 0..=kmax {
            let mut ik = MultiSeries::zero(&space);
            for n in 0..=tmax.saturating_sub(k) {
                if n + k <= tmax {
                    ik = ik.add(&t(n + k).mul(&vp[n]).scale(&inv_fact(n)));
                }
            }
            let mut jk = MultiSeries::zero(&space);
            for n in 0..tmax.saturating_sub(k) {
                jk = jk.add(&t(n + k + 1).mul(&open_kernel(&vp, &rp, n)));
            }
            for n in 0..=smax.saturating_sub(k) {
                if n + k <= smax {
                    jk = jk.add(&s(n + k).mul(&up[n]).scale(&inv_fact(n)));
                }
            }
            is.push(ik);
            js.push(jk);
        }
        IzSeries { i: is, j: js }
    }

    /// Jets up to order `kmax` through their IZ expressions; no extra room in
    /// `t_0` is needed.
    pub fn jets_via_iz(&self, kmax: usize) -> Result<Jets> {
        let iz = self.iz(kmax + 1);
        let space = self.v.space().clone();
        let one = MultiSeries::constant(&space, Rational::one());
        let value = |g: Gen| -> Result<MultiSeries> {
            match g.family() {
                Some(('I', k)) => Ok(iz.i[k as usize].clone()),
                Some(('J', k)) => Ok(iz.j[k as usize].clone()),
                Some(('U', 1)) => Ok(one.sub(&iz.i[1])),
                Some(('U', 2)) => Ok(one.sub(&iz.i[1]).sub(&iz.j[0].mul(&iz.j[1]))),
                Some(('W', 1)) => Ok(one.sub(&iz.j[1])),
                _ => Err(Error::Parse(format!("unexpected generator {g}"))),
            }
        };
        let table = iz_coords::jets_from_iz(kmax);
        let v = table.v.iter().map(|e| eval_expr(e, &space, &value)).collect::<Result<_>>()?;
        let r = table.r.iter().map(|e| eval_expr(e, &space, &value)).collect::<Result<_>>()?;
        Ok(Jets { v, r })
    }
}

// ---------------------------------------------------------------------------
// Queries

/// `<tau_{k_1} ... tau_{k_m} sigma_{l_1} ... sigma_{l_n}>^o_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorQuery {
    pub p: usize,
    pub taus: Vec<u32>,
    pub sigmas: Vec<u32>,
}

impl CorrelatorQuery {
    pub fn new(p: usize, mut taus: Vec<u32>, mut sigmas: Vec<u32>) -> Self {
        taus.sort_unstable();
        sigmas.sort_unstable();
        CorrelatorQuery { p, taus, sigmas }
    }

    /// Parse `"tau:2,3 sigma:0,1,1"` (either part may be missing or empty).
    pub fn parse(p: usize, spec: &str) -> Result<Self> {
        let mut taus = Vec::new();
        let mut sigmas = Vec::new();
        for part in spec.split_whitespace() {
            let (name, list) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected tau:... or sigma:..., got {part:?}")))?;
            let ids: Vec<u32> = list
                .split(',')
                .filter(|x| !x.is_empty())
                .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad index {x:?}"))))
                .collect::<Result<_>>()?;
            match name {
                "tau" => taus.extend(ids),
                "sigma" => sigmas.extend(ids),
                _ => return Err(Error::Parse(format!("unknown insertion type {name:?}"))),
            }
        }
        Ok(Self::new(p, taus, sigmas))
    }

    /// `2 (sum k + sum l) = 3(p-1) + 2m + n`.
    pub fn satisfies_dimension(&self) -> bool {
        let lhs = 2 * (self.taus.iter().sum::<u32>() + self.sigmas.iter().sum::<u32>()) as i64;
        lhs == 3 * (self.p as i64 - 1) + 2 * self.taus.len() as i64 + self.sigmas.len() as i64
    }

    pub fn exponents(&self) -> BTreeMap<Gen, u32> {
        let mut m = BTreeMap::new();
        for k in &self.taus {
            *m.entry(Gen::t(*k)).or_insert(0) += 1;
        }
        for l in &self.sigmas {
            *m.entry(Gen::s(*l)).or_insert(0) += 1;
        }
        m
    }

    /// `prod (multiplicity)!`, relating correlators to Taylor coefficients.
    pub fn symmetry_factor(&self) -> Rational {
        self.exponents().values().fold(Rational::one(), |acc, k| acc * Rational::from_integer(factorial(*k as u64)))
    }

    pub fn to_text(&self) -> String {
        let mut parts: Vec<String> = self.taus.iter().map(|k| format!("tau_{k}")).collect();
        parts.extend(self.sigmas.iter().map(|l| format!("sigma_{l}")));
        format!("<{}>_{}", parts.join(" "), self.p)
    }
}

/// Free energy as stored for substitution.
#[derive(Clone, Debug)]
pub enum FreeEnergy {
    Log(LogSum),
    Rational(JetExpr),
}

/// Which alternating-sum identity to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SumMode {
    /// Factorial `(7p-4-q)!`, known to vanish above `m+n+d > 13p-7`.
    Proved,
    /// Factorial `(3p-3-q)!`, conjectured above `m+n+d > 6p-6`.
    Conjectured,
}

impl SumMode {
    pub fn exponent(self, p: usize) -> usize {
        match self {
            SumMode::Proved => 7 * p - 4,
            SumMode::Conjectured => 3 * p - 3,
        }
    }

    pub fn threshold(self, p: usize) -> usize {
        match self {
            SumMode::Proved => 13 * p - 7,
            SumMode::Conjectured => 6 * p - 6,
        }
    }
}

/// Value of one Λ-combination (or B̃ coefficient) by both routes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoRoutes {
    pub route_a: Rational,
    pub route_b: Rational,
}

/// One term of the alternating sum over `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSum {
    pub p: usize,
    pub mode: SumMode,
    pub taus: Vec<u32>,
    pub sigmas: Vec<u32>,
    pub d: usize,
    pub value: Rational,
    /// `m + n + d` exceeds the mode's threshold.
    pub applies: bool,
}

impl QSum {
    pub fn vanishes(&self) -> bool {
        self.value.is_zero()
    }
}

/// `Λ_{k;l}` expanded into monomials of `d/dt_k`, `d/ds_l`:
/// coefficient, tau indices, sigma indices (both sorted).
pub fn lambda_operator(taus: &[u32], sigmas: &[u32]) -> Vec<(Rational, Vec<u32>, Vec<u32>)> {
    let mut acc: BTreeMap<(Vec<u32>, Vec<u32>), Rational> = BTreeMap::new();
    acc.insert((vec![], vec![]), Rational::one());
    let apply = |acc: &mut BTreeMap<(Vec<u32>, Vec<u32>), Rational>, factor: Vec<(Rational, Option<u32>, Option<u32>)>| {
        let mut next: BTreeMap<(Vec<u32>, Vec<u32>), Rational> = BTreeMap::new();
        for ((ts, ss), c) in acc.iter() {
            for (fc, t, s) in &factor {
                let mut ts = ts.clone();
                let mut ss = ss.clone();
                ts.extend(t);
                ss.extend(s);
                ts.sort_unstable();
                ss.sort_unstable();
                *next.entry((ts, ss)).or_default() += c * fc;
            }
        }
        next.retain(|_, c| !c.is_zero());
        *acc = next;
    };
    for &k in taus {
        let mut f = vec![(Rational::one(), Some(k), None)];
        for j in 0..k {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let den = Rational::from_integer(factorial(j as u64) * (2 * j as i64 + 1) * (num_bigint::BigInt::from(1) << j));
            f.push((-Rational::from_integer(sign.into()) / den, None, Some(k - j - 1)));
        }
        apply(&mut acc, f);
    }
    for &l in sigmas {
        let mut f = Vec::new();
        for j in 0..=l {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let den = Rational::from_integer(factorial(j as u64) * (num_bigint::BigInt::from(1) << j));
            f.push((Rational::from_integer(sign.into()) / den, None, Some(l - j)));
        }
        apply(&mut acc, f);
    }
    acc.into_iter().map(|((t, s), c)| (c, t, s)).collect()
}

/// Mixed partial of a star-restricted free energy
/// `N(I, J) / (1 - J_1)^a` at `I_{>=2} = J_{>=1} = 0`.
pub fn star_derivative(fstar: &IzExpr, taus: &[u32], sigmas: &[u32]) -> Result<Rational> {
    let w1 = iz_coords::w1_gen();
    let a = fstar.den().exp(w1);
    if fstar.den().iter().any(|(g, _)| g != w1) {
        return Err(Error::InvalidQuery(format!("not a star-restricted expression: {}", fstar.to_text())));
    }
    let q = CorrelatorQuery::new(0, taus.to_vec(), sigmas.to_vec());
    let mut exps: BTreeMap<Gen, u32> = BTreeMap::new();
    for k in taus {
        *exps.entry(Gen::i(*k)).or_insert(0) += 1;
    }
    for l in sigmas {
        *exps.entry(Gen::j(*l)).or_insert(0) += 1;
    }
    let e1 = exps.remove(&Gen::j(1)).unwrap_or(0);
    let num = fstar.scaled_num();
    let mut value = Rational::zero();
    for jj in 0..=e1 {
        let mut m = exps.clone();
        if e1 - jj > 0 {
            m.insert(Gen::j(1), e1 - jj);
        }
        let c = num.coeff(&Monomial::from_pairs(m.into_iter().map(|(g, e)| (g, e as i32))));
        if c.is_zero() {
            continue;
        }
        let geo = if a == 0 {
            if jj == 0 { 1.into() } else { 0.into() }
        } else {
            binomial((a as u64) + jj as u64 - 1, jj as u64)
        };
        value += c * Rational::from_integer(geo);
    }
    Ok(value * q.symmetry_factor())
}

/// Free energies plus memoized series; the front door for all correlator work.
pub struct OpenCorrelators {
    energies: BTreeMap<usize, FreeEnergy>,
    star: Mutex<BTreeMap<usize, IzExpr>>,
    series: Mutex<HashMap<(usize, Arc<Space>), MultiSeries>>,
}

impl OpenCorrelators {
    pub fn new(energies: BTreeMap<usize, FreeEnergy>) -> Self {
        OpenCorrelators { energies, star: Mutex::new(BTreeMap::new()), series: Mutex::new(HashMap::new()) }
    }

    /// `F^o_1` and the solver's `F^o_p`, `p >= 2`.
    pub fn from_table(t: &FreeEnergyTable) -> Self {
        let mut e = BTreeMap::new();
        e.insert(1, FreeEnergy::Log(FreeEnergyTable::fo1()));
        for (p, f) in &t.fo {
            e.insert(*p, FreeEnergy::Rational(f.clone()));
        }
        Self::new(e)
    }

    pub fn pmax(&self) -> usize {
        self.energies.keys().copied().max().unwrap_or(0)
    }

    pub fn energy(&self, p: usize) -> Result<&FreeEnergy> {
        self.energies.get(&p).ok_or_else(|| Error::InvalidQuery(format!("F^o_{p} has not been computed")))
    }

    /// `ℱ^o_p(t, s)` on a box.
    pub fn series(&self, p: usize, target: &Arc<Space>) -> Result<MultiSeries> {
        let key = (p, target.clone());
        if let Some(s) = self.series.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let kmax = 2 * p.max(1) as u32 - 1;
        let g0 = solve_genus0(&jet_space(target, kmax))?;
        let jets = g0.jets(kmax as usize, target);
        let s = match self.energy(p)? {
            FreeEnergy::Log(f) => jets.eval_log(f)?,
            FreeEnergy::Rational(f) => jets.eval(f)?,
        };
        self.series.lock().unwrap().insert(key, s.clone());
        Ok(s)
    }

    /// Taylor coefficient of `ℱ^o_p` times the symmetry factor, computed
    /// without using the dimension constraint.
    pub fn open_number_by_expansion(&self, q: &CorrelatorQuery) -> Result<Rational> {
        self.open_number_in(q, &Space::new(q.exponents(), None))
    }

    fn open_number_in(&self, q: &CorrelatorQuery, space: &Arc<Space>) -> Result<Rational> {
        let s = self.series(q.p, space)?;
        Ok(s.coefficient(&q.exponents())? * q.symmetry_factor())
    }

    /// `<tau ... sigma ...>^o_p`.
    pub fn open_number(&self, q: &CorrelatorQuery) -> Result<Rational> {
        if !q.satisfies_dimension() {
            return Ok(Rational::zero());
        }
        self.open_number_by_expansion(q)
    }

    /// `d^{m+n} ℱ^o_p / dt ds` at `s_0 = 1`, other times 0, through the single
    /// surviving correlator with extra `sigma_0` insertions.
    pub fn derivative_at_unit_s0(&self, p: usize, taus: &[u32], sigmas: &[u32]) -> Result<Rational> {
        let e = 2 * (taus.iter().sum::<u32>() + sigmas.iter().sum::<u32>()) as i64
            - 3 * (p as i64 - 1)
            - 2 * taus.len() as i64
            - sigmas.len() as i64;
        if e < 0 {
            return Ok(Rational::zero());
        }
        let mut s = sigmas.to_vec();
        s.extend(std::iter::repeat_n(0, e as usize));
        let q = CorrelatorQuery::new(p, taus.to_vec(), s);
        Ok(self.open_number(&q)? / Rational::from_integer(factorial(e as u64)))
    }

    /// Same derivative, read off a series expanded around `s_0 = 1`.
    pub fn derivative_at_unit_s0_direct(&self, p: usize, taus: &[u32], sigmas: &[u32]) -> Result<Rational> {
        let q = CorrelatorQuery::new(p, taus.to_vec(), sigmas.to_vec());
        let space = Space::shifted(q.exponents(), None, Rational::one());
        let s = self.series(p, &space)?;
        Ok(s.coefficient(&q.exponents())? * q.symmetry_factor())
    }

    /// `F^{o,*}_p`, `p >= 2`.
    pub fn star(&self, p: usize) -> Result<IzExpr> {
        if let Some(f) = self.star.lock().unwrap().get(&p) {
            return Ok(f.clone());
        }
        let f = match self.energy(p)? {
            FreeEnergy::Rational(f) if p >= 2 => iz_coords::star_restrict(&iz_coords::fo_to_iz(f)?)?,
            _ => return Err(Error::InvalidQuery(format!("star restriction needs p >= 2, got {p}"))),
        };
        self.star.lock().unwrap().insert(p, f.clone());
        Ok(f)
    }

    /// Route (a): derivative of `F^{o,*}_p`.
    pub fn lambda_route_a(&self, p: usize, taus: &[u32], sigmas: &[u32]) -> Result<Rational> {
        check_lambda_indices(taus, sigmas)?;
        star_derivative(&self.star(p)?, taus, sigmas)
    }

    /// Route (b): expand `Λ` and evaluate each derivative by a correlator.
    pub fn lambda_route_b(&self, p: usize, taus: &[u32], sigmas: &[u32]) -> Result<Rational> {
        check_lambda_indices(taus, sigmas)?;
        let mut acc = Rational::zero();
        for (c, t, s) in lambda_operator(taus, sigmas) {
            acc += c * self.derivative_at_unit_s0(p, &t, &s)?;
        }
        Ok(acc)
    }

    /// `Λ_{k;l}(ℱ^o_p)` at `s_0 = 1`, both routes, required to agree.
    pub fn lambda_combination(&self, p: usize, taus: &[u32], sigmas: &[u32]) -> Result<TwoRoutes> {
        let a = self.lambda_route_a(p, taus, sigmas)?;
        let b = self.lambda_route_b(p, taus, sigmas)?;
        if a != b {
            return Err(Error::CrossCheckMismatch(format!(
                "Λ_{taus:?};{sigmas:?} at p={p}: {} vs {}",
                fmt_rational(&a),
                fmt_rational(&b)
            )));
        }
        Ok(TwoRoutes { route_a: a, route_b: b })
    }

    /// `B̃^{[p]}_{k;l}`: coefficient of `I_k J_l/(m! n!)` in `(1-J_1)^{3p-3} F^{o,*}_p`,
    /// assembled from Λ-values by the Leibniz rule in `J_1`.
    pub fn btilde(&self, p: usize, taus: &[u32], sigmas: &[u32]) -> Result<TwoRoutes> {
        let c = 3 * p - 3;
        let d = sigmas.iter().filter(|l| **l == 1).count();
        let rest: Vec<u32> = sigmas.iter().copied().filter(|l| *l != 1).collect();
        let mut a = Rational::zero();
        let mut b = Rational::zero();
        for q in 0..=d.min(c) {
            let coef = Rational::from_integer(binomial(d as u64, q as u64) * factorial(c as u64) / factorial((c - q) as u64))
                * int(if q % 2 == 0 { 1 } else { -1 });
            let mut s = vec![1; d - q];
            s.extend(&rest);
            let v = self.lambda_combination(p, taus, &s)?;
            a += &coef * v.route_a;
            b += &coef * v.route_b;
        }
        Ok(TwoRoutes { route_a: a, route_b: b })
    }

    /// `sum_q (-1)^q / ((d-q)! q! (C-q)!) Λ_{k;1^{d-q},l}(ℱ^o_p)` with Λ from route (a).
    pub fn q_sum(&self, p: usize, mode: SumMode, taus: &[u32], sigmas: &[u32], d: usize) -> Result<QSum> {
        if p < 2 || taus.iter().chain(sigmas).any(|k| *k < 2) {
            return Err(Error::InvalidQuery("alternating sums need p >= 2 and all indices >= 2".into()));
        }
        let c = mode.exponent(p);
        let fstar = self.star(p)?;
        let mut value = Rational::zero();
        for q in 0..=d.min(c) {
            let den = factorial((d - q) as u64) * factorial(q as u64) * factorial((c - q) as u64);
            let mut s = vec![1; d - q];
            s.extend(sigmas);
            let lam = star_derivative(&fstar, taus, &s)?;
            let sign = if q % 2 == 0 { 1 } else { -1 };
            value += lam * Rational::new(sign.into(), den);
        }
        Ok(QSum {
            p,
            mode,
            taus: taus.to_vec(),
            sigmas: sigmas.to_vec(),
            d,
            applies: taus.len() + sigmas.len() + d > mode.threshold(p),
            value,
        })
    }

    /// Every `(k's, l's, d)` with indices in `2..=2p-1` and `lo < m+n+d <= hi`.
    /// Indices above `2p-1` give identically zero terms and are not listed.
    pub fn sweep(&self, p: usize, mode: SumMode, lo: usize, hi: usize) -> Result<Vec<QSum>> {
        self.star(p)?;
        let idx: Vec<u32> = (2..=2 * p as u32 - 1).collect();
        let mut cases = Vec::new();
        for total in lo + 1..=hi {
            for m in 0..=total {
                for n in 0..=total - m {
                    let d = total - m - n;
                    for ks in multisets(&idx, m) {
                        for ls in multisets(&idx, n) {
                            cases.push((ks.clone(), ls, d));
                        }
                    }
                }
            }
        }
        cases.par_iter().map(|(ks, ls, d)| self.q_sum(p, mode, ks, ls, *d)).collect()
    }
}

fn check_lambda_indices(taus: &[u32], sigmas: &[u32]) -> Result<()> {
    if taus.iter().any(|k| *k < 2) || sigmas.iter().any(|l| *l < 1) {
        return Err(Error::InvalidQuery(format!("Λ needs k >= 2, l >= 1; got {taus:?};{sigmas:?}")));
    }
    Ok(())
}

/// Non-decreasing sequences of length `n` drawn from `idx`.
pub fn multisets(idx: &[u32], n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &k) in idx.iter().enumerate() {
        for mut rest in multisets(&idx[i..], n - 1) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

/// The ten B̃^{[2]} coefficients quoted with explicit values:
/// (tau indices, sigma indices, value).
pub fn btilde_examples() -> Vec<(Vec<u32>, Vec<u32>, Rational)> {
    vec![
        (vec![2, 2], vec![], rat(5, 12)),
        (vec![], vec![1, 2], rat(1, 4)),
        (vec![3], vec![], rat(1, 8)),
        (vec![], vec![3], rat(1, 8)),
        (vec![2], vec![1, 1], rat(-1, 4)),
        (vec![], vec![2, 2], rat(5, 12)),
        (vec![2], vec![1, 1, 1], rat(1, 4)),
        (vec![2], vec![2], rat(5, 12)),
        (vec![3], vec![1], rat(-1, 8)),
        (vec![], vec![1, 3], rat(-1, 8)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet_ring;
    use crate::reference;

    fn fo2() -> JetExpr {
        jet_ring::parse_jets(reference::FO2_JETS).unwrap()
    }

    fn engine() -> OpenCorrelators {
        let mut e = BTreeMap::new();
        e.insert(1, FreeEnergy::Log(jet_ring::open_f1()));
        e.insert(2, FreeEnergy::Rational(fo2()));
        OpenCorrelators::new(e)
    }

    fn ex(pairs: &[(Gen, u32)]) -> BTreeMap<Gen, u32> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn genus0_examples() {
        let g = solve_genus0(&Space::full(3, 3, 5)).unwrap();
        let (c, o) = g.residuals();
        assert!(c.is_zero() && o.is_zero());
        assert_eq!(g.v.coefficient(&ex(&[(Gen::t(0), 1)])).unwrap(), int(1));
        assert_eq!(g.v.coefficient(&ex(&[(Gen::t(0), 1), (Gen::t(1), 1)])).unwrap(), int(1));
        assert_eq!(g.r.coefficient(&ex(&[(Gen::s(0), 1)])).unwrap(), int(1));
        // only t_0 on: v = t_0; only s_0 on: r = s_0
        let only_t0 = g.v.restrict(&Space::new([(Gen::t(0), 5)], None));
        assert_eq!(only_t0, MultiSeries::var(&Space::new([(Gen::t(0), 5)], None), Gen::t(0)));
        let only_s0 = g.r.restrict(&Space::new([(Gen::s(0), 5)], None));
        assert_eq!(only_s0, MultiSeries::var(&Space::new([(Gen::s(0), 5)], None), Gen::s(0)));
    }

    #[test]
    fn genus0_oracle_by_substitution() {
        // v = t_0 + t_1 v + t_2 v^2/2: coefficient of t_0^2 t_2 is 1/2, of t_0^2 t_1 t_2 is 3/2.
        let g = solve_genus0(&Space::full(2, 0, 4)).unwrap();
        assert_eq!(g.v.coefficient(&ex(&[(Gen::t(0), 2), (Gen::t(2), 1)])).unwrap(), rat(1, 2));
        assert_eq!(g.v.coefficient(&ex(&[(Gen::t(0), 2), (Gen::t(1), 1), (Gen::t(2), 1)])).unwrap(), rat(3, 2));
    }

    #[test]
    fn iz_series_and_jets() {
        let target = Space::full(2, 2, 4);
        let g = solve_genus0(&jet_space(&target, 3)).unwrap();
        let by_dt0 = g.jets(3, &target);
        let g_t = solve_genus0(&target).unwrap();
        let iz = g_t.iz(2);
        assert_eq!(iz.i[0], g_t.v);
        assert_eq!(iz.j[0], g_t.r);
        let by_iz = g_t.jets_via_iz(3).unwrap();
        for k in 0..=3 {
            assert_eq!(by_iz.v[k], by_dt0.v[k], "v{k}");
            assert_eq!(by_iz.r[k], by_dt0.r[k], "r{k}");
        }
    }

    #[test]
    fn series_inverse_and_log() {
        let sp = Space::full(1, 1, 6);
        let x = MultiSeries::constant(&sp, int(2)).add(&MultiSeries::var(&sp, Gen::t(0))).add(&MultiSeries::var(&sp, Gen::s(1)));
        assert_eq!(x.mul(&x.inv().unwrap()), MultiSeries::constant(&sp, int(1)));
        let y = MultiSeries::constant(&sp, int(1)).add(&MultiSeries::var(&sp, Gen::t(1)));
        // d/dt1 log(1+t1) = 1/(1+t1), exact below the cap
        let lhs = y.log().unwrap().derivative(Gen::t(1)).truncated(5);
        let rhs = y.inv().unwrap().truncated(5);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn open_genus_one_is_half_log_u1() {
        // oracle: d/ds_0 of 2 F^o_1 times u_1 equals d/ds_0 of u_1
        let e = engine();
        let sp = Space::full(2, 2, 4);
        let f1 = e.series(1, &sp).unwrap();
        let g0 = solve_genus0(&jet_space(&sp, 1)).unwrap();
        let u1 = g0.jets(1, &sp).eval(&jet_ring::u(1)).unwrap();
        let lhs = f1.scale(&int(2)).derivative(Gen::s(0)).mul(&u1).truncated(3);
        assert_eq!(lhs, u1.derivative(Gen::s(0)).truncated(3));
        assert!(f1.constant_term().is_zero());
    }

    #[test]
    fn dimension_constraint_and_homogeneity() {
        let e = engine();
        let sp = Space::new([(Gen::t(0), 2), (Gen::t(1), 2), (Gen::t(2), 2), (Gen::s(0), 4), (Gen::s(1), 3), (Gen::s(2), 2)], Some(6));
        let f = e.series(2, &sp).unwrap();
        for (exps, c) in f.terms() {
            if c.is_zero() {
                continue;
            }
            let mut w = Rational::zero();
            for (i, k) in exps.iter().enumerate() {
                let (fam, idx) = sp.vars()[i].family().unwrap();
                let shift = if fam == 't' { rat(1, 1) } else { rat(1, 2) };
                w += (int(idx as i64) - shift) * int(*k as i64);
            }
            assert_eq!(w, rat(3, 2), "term {exps:?}");
        }
    }

    #[test]
    fn dilaton_equation_coefficientwise() {
        // sum_{k>=0} (t_k - [k=1]) dF/dt_k + s_k dF/ds_k = -(p-1) F for p = 2; the
        // s_0 term is required (t_0 is off in this box)
        let e = engine();
        let sp = Space::new([(Gen::t(1), 2), (Gen::t(2), 1), (Gen::s(0), 4), (Gen::s(1), 3), (Gen::s(2), 1)], None);
        let f = e.series(2, &sp).unwrap();
        let mut lhs = f.scale(&int(1));
        for g in [Gen::t(1), Gen::t(2), Gen::s(0), Gen::s(1), Gen::s(2)] {
            lhs = lhs.add(&MultiSeries::var(&sp, g).mul(&f.derivative(g)));
        }
        lhs = lhs.sub(&f.derivative(Gen::t(1)));
        // the top t_1 layer of dF/dt_1 is lost to truncation
        let inner = Space::new([(Gen::t(1), 1), (Gen::t(2), 1), (Gen::s(0), 4), (Gen::s(1), 3), (Gen::s(2), 1)], None);
        assert!(lhs.restrict(&inner).is_zero(), "{}", lhs.restrict(&inner).to_text());
    }

    #[test]
    fn star_constant_term_vanishes() {
        let e = engine();
        assert!(star_derivative(&e.star(2).unwrap(), &[], &[]).unwrap().is_zero());
    }

    #[test]
    fn lambda_operator_small_cases() {
        // Λ_{2;} = d/dt_2 - d/ds_1 + (1/6) d/ds_0
        let op = lambda_operator(&[2], &[]);
        assert_eq!(op.len(), 3);
        assert!(op.contains(&(int(1), vec![2], vec![])));
        assert!(op.contains(&(int(-1), vec![], vec![1])));
        assert!(op.contains(&(rat(1, 6), vec![], vec![0])));
        // Λ_{;1} = d/ds_1 - (1/2) d/ds_0
        let op = lambda_operator(&[], &[1]);
        assert_eq!(op, vec![(rat(-1, 2), vec![], vec![0]), (int(1), vec![], vec![1])]);
    }

    #[test]
    fn corid2_against_shifted_expansion() {
        let e = engine();
        for (t, s) in [(vec![2], vec![]), (vec![], vec![1, 1]), (vec![3], vec![1]), (vec![], vec![2]), (vec![2], vec![0, 1])] {
            assert_eq!(e.derivative_at_unit_s0(2, &t, &s).unwrap(), e.derivative_at_unit_s0_direct(2, &t, &s).unwrap(), "{t:?};{s:?}");
        }
    }

    #[test]
    fn btilde_values_both_routes() {
        let e = engine();
        for (t, s, want) in btilde_examples() {
            let got = e.btilde(2, &t, &s).unwrap();
            assert_eq!(got.route_a, want, "{t:?};{s:?}");
            assert_eq!(got.route_b, want, "{t:?};{s:?}");
        }
    }

    #[test]
    fn printed_correlator_forms() {
        let e = engine();
        let c = |t: &[u32], s: &[u32]| e.open_number(&CorrelatorQuery::new(2, t.to_vec(), s.to_vec())).unwrap();
        assert_eq!(-c(&[], &[2]) + c(&[3], &[0]), rat(1, 8));
        assert_eq!(-int(2) * c(&[2], &[1]) + c(&[2, 2], &[0]), rat(5, 12));
        assert_eq!(-int(3) * c(&[], &[2]) + c(&[], &[0, 1, 2]), rat(1, 4));
    }

    #[test]
    fn conjecture_sweep_p2() {
        let e = engine();
        for q in e.sweep(2, SumMode::Conjectured, 6, 8).unwrap() {
            assert!(q.vanishes(), "{q:?}");
        }
    }

    #[test]
    fn query_parsing() {
        let q = CorrelatorQuery::parse(2, "tau:3,2 sigma:0,1,1").unwrap();
        assert_eq!(q.taus, vec![2, 3]);
        assert_eq!(q.sigmas, vec![0, 1, 1]);
        assert!(CorrelatorQuery::parse(2, "foo:1").is_err());
        assert_eq!(CorrelatorQuery::parse(2, "sigma:2").unwrap().to_text(), "<sigma_2>_2");
    }
}
