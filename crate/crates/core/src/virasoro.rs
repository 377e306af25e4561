//! Extended Virasoro operators acting on eps-graded truncated series, the
//! truncated topological log-tau assembled from the free energies, and the
//! constraint residuals `(1/tau) L_m tau`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::One;

use crate::correlators::{solve_genus0, FreeEnergy, Genus0, Jets, MultiSeries, Space};
use crate::error::{Error, Result};
use crate::exact_algebra::rational::{double_factorial, factorial, int, rat};
use crate::exact_algebra::{Gen, Rational};
use crate::hierarchy::{EpsSeries, FlowDensities};
use crate::jet_ring::jet;
use crate::loop_solver::FreeEnergyTable;

/// `sum_k eps^k f_k` with series coefficients on a common space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsGraded {
    space: Arc<Space>,
    pub terms: BTreeMap<i32, MultiSeries>,
}

impl EpsGraded {
    pub fn zero(space: &Arc<Space>) -> Self {
        EpsGraded { space: space.clone(), terms: BTreeMap::new() }
    }

    pub fn from_terms(space: &Arc<Space>, terms: impl IntoIterator<Item = (i32, MultiSeries)>) -> Self {
        let mut out = Self::zero(space);
        for (k, s) in terms {
            out.add_at(k, &s);
        }
        out
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn get(&self, k: i32) -> MultiSeries {
        self.terms.get(&k).cloned().unwrap_or_else(|| MultiSeries::zero(&self.space))
    }

    pub fn add_at(&mut self, k: i32, s: &MultiSeries) {
        let next = self.get(k).add(s);
        if next.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, next);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, s) in &o.terms {
            out.add_at(*k, s);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(&self.space, self.terms.iter().map(|(k, s)| (*k, s.scale(c))))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn restrict(&self, target: &Arc<Space>) -> Self {
        Self::from_terms(target, self.terms.iter().map(|(k, s)| (*k, s.restrict(target))))
    }
}

/// One first-order piece `coef * eps^eps * [x] * d/dy`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstOrder {
    pub coef: Rational,
    pub times: Option<Gen>,
    pub wrt: Gen,
    pub eps: i32,
}

/// `L_m` (closed) or `L_m^ext`, split into its first-order, second-order
/// (all carrying `eps^2`) and multiplicative pieces.
#[derive(Clone, Debug)]
pub struct VirasoroOp {
    pub m: i32,
    pub extended: bool,
    pub first: Vec<FirstOrder>,
    /// `eps^2 * coef * d^2/dx dy`.
    pub second: Vec<(Rational, Gen, Gen)>,
    /// `coef * eps^k * prod(gens)`.
    pub mult: Vec<(Rational, Vec<Gen>, i32)>,
}

fn df(n: i64) -> Rational {
    Rational::from_integer(double_factorial(n))
}

impl VirasoroOp {
    /// Operator with the sums over `t_n`, `s_n` cut to `n <= tmax`, `n <= smax`.
    pub fn new(m: i32, extended: bool, tmax: u32, smax: u32) -> Result<Self> {
        if m < -1 {
            return Err(Error::InvalidQuery(format!("Virasoro index {m} < -1")));
        }
        let mut first = Vec::new();
        let mut second = Vec::new();
        let mut mult = Vec::new();
        let fo = |coef: Rational, times: Option<Gen>, wrt: Gen, eps: i32| FirstOrder { coef, times, wrt, eps };
        if m == -1 {
            for n in 1..=tmax {
                first.push(fo(int(1), Some(Gen::t(n)), Gen::t(n - 1), 0));
            }
            first.push(fo(int(-1), None, Gen::t(0), 0));
            mult.push((rat(1, 2), vec![Gen::t(0), Gen::t(0)], -2));
            if extended {
                for n in 1..=smax {
                    first.push(fo(int(1), Some(Gen::s(n)), Gen::s(n - 1), 0));
                }
                mult.push((int(1), vec![Gen::s(0)], -1));
            }
        } else {
            let mu = m as u32;
            let pow2 = Rational::from_integer(num_bigint::BigInt::from(1) << (mu + 1));
            let c = |n: u32| df(2 * (n + mu) as i64 + 1) / (df(2 * n as i64 - 1) * &pow2);
            for n in 0..=tmax {
                first.push(fo(c(n), Some(Gen::t(n)), Gen::t(n + mu), 0));
            }
            first.push(fo(-c(1), None, Gen::t(1 + mu), 0));
            for n in 0..mu {
                let k = df(2 * n as i64 + 1) * df(2 * (mu - n) as i64 - 1) / (&pow2 * int(2));
                second.push((k, Gen::t(n), Gen::t(mu - n - 1)));
            }
            if m == 0 {
                mult.push((rat(1, 16), vec![], 0));
            }
            if extended {
                for n in 0..=smax {
                    let k = Rational::from_integer(factorial((n + mu + 1) as u64) / factorial(n as u64));
                    first.push(fo(k, Some(Gen::s(n)), Gen::s(n + mu), 0));
                }
                if m >= 1 {
                    let k = Rational::from_integer(factorial((mu + 1) as u64)) * rat(3, 4);
                    first.push(fo(k, None, Gen::s(mu - 1), 1));
                }
                if m == 0 {
                    mult.push((rat(3, 4), vec![], 0));
                }
            }
        }
        Ok(VirasoroOp { m, extended, first, second, mult })
    }

    /// Operator whose sums run over every time present in `space`.
    pub fn on_space(m: i32, extended: bool, space: &Space) -> Result<Self> {
        let top = |c: char| space.vars().iter().filter_map(|g| g.family()).filter(|(f, _)| *f == c).map(|(_, k)| k).max().unwrap_or(0);
        Self::new(m, extended, top('t'), top('s'))
    }

    fn mono(space: &Arc<Space>, gens: &[Gen]) -> MultiSeries {
        gens.iter().fold(MultiSeries::constant(space, Rational::one()), |acc, g| acc.mul(&MultiSeries::time(space, *g)))
    }

    /// Action on a series `f` (derivatives in variables outside the space
    /// are taken to be zero).
    pub fn apply(&self, f: &EpsGraded) -> EpsGraded {
        let space = f.space().clone();
        let mut out = EpsGraded::zero(&space);
        for (k, fk) in &f.terms {
            for t in &self.first {
                let mut d = fk.derivative(t.wrt);
                if let Some(x) = t.times {
                    d = MultiSeries::time(&space, x).mul(&d);
                }
                out.add_at(k + t.eps, &d.scale(&t.coef));
            }
            for (c, x, y) in &self.second {
                out.add_at(k + 2, &fk.derivative(*x).derivative(*y).scale(c));
            }
            for (c, gens, e) in &self.mult {
                out.add_at(k + e, &Self::mono(&space, gens).mul(fk).scale(c));
            }
        }
        out
    }

    /// `(1/tau) L tau` for `log tau = g`, at every eps order up to `max_order`.
    /// Orders above the last complete coefficient of `g` are meaningless, so
    /// the caller chooses `max_order`.
    pub fn on_log_tau(&self, g: &EpsGraded, max_order: i32) -> EpsGraded {
        let space = g.space().clone();
        let lo = g.terms.keys().next().copied().unwrap_or(0).min(-2);
        let mut cache: HashMap<(i32, Gen), MultiSeries> = HashMap::new();
        let mut d = |k: i32, x: Gen| -> MultiSeries {
            cache.entry((k, x)).or_insert_with(|| g.get(k).derivative(x)).clone()
        };
        let mut out = EpsGraded::zero(&space);
        for k in lo..=max_order {
            let mut acc = MultiSeries::zero(&space);
            for t in &self.first {
                let mut dk = d(k - t.eps, t.wrt);
                if let Some(x) = t.times {
                    dk = MultiSeries::time(&space, x).mul(&dk);
                }
                acc = acc.add(&dk.scale(&t.coef));
            }
            for (c, x, y) in &self.second {
                let mut s = g.get(k - 2).derivative(*x).derivative(*y);
                for a in lo..=(k - 2 - lo) {
                    let b = k - 2 - a;
                    if g.terms.contains_key(&a) && g.terms.contains_key(&b) {
                        s = s.add(&d(a, *x).mul(&d(b, *y)));
                    }
                }
                acc = acc.add(&s.scale(c));
            }
            for (c, gens, e) in &self.mult {
                if *e == k {
                    acc = acc.add(&Self::mono(&space, gens).scale(c));
                }
            }
            out.add_at(k, &acc);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Topological log-tau

/// Free energies entering log-tau: `F^c_g` (`g >= 1`) and `F^o_p` (`p >= 1`).
#[derive(Clone, Debug, Default)]
pub struct TauInputs {
    pub closed: BTreeMap<usize, FreeEnergy>,
    pub open: BTreeMap<usize, FreeEnergy>,
}

impl TauInputs {
    pub fn from_table(t: &FreeEnergyTable) -> Self {
        let mut closed = BTreeMap::new();
        closed.insert(1, FreeEnergy::Log(FreeEnergyTable::fc1()));
        for (g, f) in &t.fc {
            closed.insert(*g, FreeEnergy::Rational(f.clone()));
        }
        let mut open = BTreeMap::new();
        open.insert(1, FreeEnergy::Log(FreeEnergyTable::fo1()));
        for (p, f) in &t.fo {
            open.insert(*p, FreeEnergy::Rational(f.clone()));
        }
        TauInputs { closed, open }
    }

    /// Only genus zero.
    pub fn genus_zero() -> Self {
        Self::default()
    }

    fn jet_order(&self) -> usize {
        let mut k = 0;
        for g in self.closed.keys() {
            k = k.max(3 * g - 2);
        }
        for p in self.open.keys() {
            k = k.max(2 * p - 1);
        }
        k
    }

    /// Largest `k` with every coefficient of `eps^j`, `j <= k`, available.
    pub fn complete_order(&self, closed_only: bool) -> i32 {
        let mut k = -2;
        loop {
            let next = k + 1;
            let closed_ok = next % 2 != 0 || self.closed.contains_key(&(((next + 2) / 2) as usize));
            let open_ok = closed_only || next == -1 || self.open.contains_key(&((next + 1) as usize));
            if !(closed_ok && open_ok) {
                return k;
            }
            k = next;
        }
    }
}

/// Truncated `log tau_top` on a work space that has room for the
/// derivatives the operators take.
#[derive(Clone, Debug)]
pub struct TopTau {
    pub target: Arc<Space>,
    pub work: Arc<Space>,
    pub genus0: Genus0,
    /// `ℱ^c_g`, `g >= 0`.
    pub closed: BTreeMap<usize, MultiSeries>,
    /// `ℱ^o_p`, `p >= 0`.
    pub open: BTreeMap<usize, MultiSeries>,
    pub inputs_complete: i32,
    pub closed_complete: i32,
}

/// Target plus `t_{T+1..T+extra}`, `s_{S+1..S+extra}` capped at 1, and two
/// more degrees so first and second derivatives are exact on the target.
pub fn work_space(target: &Arc<Space>, extra: u32) -> Arc<Space> {
    let top = |c: char| target.vars().iter().filter_map(|g| g.family()).filter(|(f, _)| *f == c).map(|(_, k)| k).max();
    let mut caps: Vec<(Gen, u32)> = target.vars().iter().map(|g| (*g, target.cap(*g).unwrap() + 2)).collect();
    if let Some(t) = top('t') {
        caps.extend((t + 1..=t + extra).map(|k| (Gen::t(k), 1)));
    }
    if let Some(s) = top('s') {
        caps.extend((s + 1..=s + extra).map(|k| (Gen::s(k), 1)));
    }
    Space::new(caps, Some(target.total() + 2))
}

fn antiderivative(f: &MultiSeries, g: Gen) -> MultiSeries {
    let space = f.space().clone();
    let x = MultiSeries::var(&space, g);
    // coefficient-wise: c e -> c/(e+1) e+1, done through the Euler trick on one variable
    let mut out = MultiSeries::zero(&space);
    let prod = x.mul(f);
    for (e, c) in prod.terms() {
        let i = space.vars().iter().position(|h| *h == g).expect("variable in space");
        let mut m = BTreeMap::new();
        for (j, k) in e.iter().enumerate() {
            if *k > 0 {
                m.insert(space.vars()[j], *k);
            }
        }
        let mono = m.iter().fold(MultiSeries::constant(&space, c / int(e[i] as i64)), |acc, (h, k)| {
            acc.mul(&MultiSeries::var(&space, *h).pow(*k))
        });
        out = out.add(&mono);
    }
    out
}

/// `F` with `F(0) = 0` and `x . grad F = sum_g x_g grad_g`.
fn euler_integrate(space: &Arc<Space>, grad: &BTreeMap<Gen, MultiSeries>) -> MultiSeries {
    let mut xg = MultiSeries::zero(space);
    for (g, s) in grad {
        xg = xg.add(&MultiSeries::var(space, *g).mul(s));
    }
    let mut out = MultiSeries::zero(space);
    for (e, c) in xg.terms() {
        let deg: u32 = e.iter().sum();
        let mut mono = MultiSeries::constant(space, c / int(deg as i64));
        for (j, k) in e.iter().enumerate() {
            if *k > 0 {
                mono = mono.mul(&MultiSeries::var(space, space.vars()[j]).pow(*k));
            }
        }
        out = out.add(&mono);
    }
    out
}

/// Every cap and the total lowered by `k`: the region where `k`-fold
/// derivatives of a work-space series are exact.
fn shrunk(space: &Arc<Space>, k: u32) -> Arc<Space> {
    Space::new(space.vars().iter().map(|g| (*g, space.cap(*g).unwrap().saturating_sub(k))), Some(space.total().saturating_sub(k)))
}

fn check_gradient(name: &str, f: &MultiSeries, grad: &BTreeMap<Gen, MultiSeries>) -> Result<()> {
    let inner = shrunk(f.space(), 1);
    for (g, s) in grad {
        let diff = f.derivative(*g).sub(s).restrict(&inner);
        if !diff.is_zero() {
            return Err(Error::IntegrabilityFailure(format!("{name}: d/d{g} off by {}", diff.to_text())));
        }
    }
    Ok(())
}

fn eval_energy(jets: &Jets, f: &FreeEnergy) -> Result<MultiSeries> {
    match f {
        FreeEnergy::Log(l) => jets.eval_log(l),
        FreeEnergy::Rational(e) => jets.eval(e),
    }
}

/// Assemble all pieces of log-tau on `work_space(target, extra)`.
pub fn build_tau(inputs: &TauInputs, target: &Arc<Space>, extra: u32) -> Result<TopTau> {
    let work = work_space(target, extra);
    let g0 = solve_genus0(&work)?;
    let tmax = work.vars().iter().filter_map(|g| g.family()).filter(|(c, _)| *c == 't').map(|(_, k)| k).max().unwrap_or(0);
    let smax = work.vars().iter().filter_map(|g| g.family()).filter(|(c, _)| *c == 's').map(|(_, k)| k).max().unwrap_or(0);
    let dens = FlowDensities::compute(tmax.max(smax) as usize)?;
    let jets0 = Jets { v: vec![g0.v.clone()], r: vec![g0.r.clone()] };
    let at0 = |p: &crate::Poly| -> Result<MultiSeries> {
        let e = jet().poly(EpsSeries(p.clone()).at_eps_zero());
        jets0.eval(&e)
    };

    // closed genus zero: d_{t_0} d_{t_n} F = K_n(v) at eps = 0
    let mut phi: BTreeMap<Gen, MultiSeries> = BTreeMap::new();
    for n in 0..=tmax {
        if work.cap(Gen::t(n)).is_some() {
            phi.insert(Gen::t(n), antiderivative(&at0(&dens.k[n as usize])?, Gen::t(0)));
        }
    }
    let fc0 = antiderivative(&phi[&Gen::t(0)], Gen::t(0));
    check_gradient("closed genus zero", &fc0, &phi)?;

    // open genus zero: gradient (R_n, Q_n) at eps = 0
    let mut grad: BTreeMap<Gen, MultiSeries> = BTreeMap::new();
    for n in 0..=tmax {
        if work.cap(Gen::t(n)).is_some() {
            grad.insert(Gen::t(n), at0(&dens.r[n as usize])?);
        }
    }
    for n in 0..=smax {
        if work.cap(Gen::s(n)).is_some() {
            grad.insert(Gen::s(n), at0(&dens.q[n as usize])?);
        }
    }
    let fo0 = euler_integrate(&work, &grad);
    check_gradient("open genus zero", &fo0, &grad)?;

    let mut closed = BTreeMap::from([(0, fc0)]);
    let mut open = BTreeMap::from([(0, fo0)]);
    let k = inputs.jet_order();
    if k > 0 {
        let jets = g0.jets_via_iz(k)?;
        for (g, f) in &inputs.closed {
            closed.insert(*g, eval_energy(&jets, f)?);
        }
        for (p, f) in &inputs.open {
            open.insert(*p, eval_energy(&jets, f)?);
        }
    }
    Ok(TopTau {
        target: target.clone(),
        work,
        genus0: g0,
        closed,
        open,
        inputs_complete: inputs.complete_order(false),
        closed_complete: inputs.complete_order(true),
    })
}

impl TopTau {
    /// `log tau = sum eps^(2g-2) ℱ^c_g + sum eps^(p-1) ℱ^o_p` (closed part only
    /// for `log tau_1`).
    pub fn log_tau(&self, closed_only: bool) -> EpsGraded {
        let mut g = EpsGraded::zero(&self.work);
        for (k, f) in &self.closed {
            g.add_at(2 * *k as i32 - 2, f);
        }
        if !closed_only {
            for (p, f) in &self.open {
                g.add_at(*p as i32 - 1, f);
            }
        }
        g
    }

    pub fn complete_order(&self, closed_only: bool) -> i32 {
        if closed_only {
            self.closed_complete
        } else {
            self.inputs_complete
        }
    }
}

/// Residual of one constraint at one eps order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderResidual {
    pub eps: i32,
    pub nonzero_terms: usize,
    /// Lowest-degree nonzero coefficient, if any.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirasoroReport {
    pub m: i32,
    pub extended: bool,
    pub orders: Vec<OrderResidual>,
}

impl VirasoroReport {
    pub fn vanishes(&self) -> bool {
        self.orders.iter().all(|o| o.nonzero_terms == 0)
    }

    pub fn to_text(&self) -> String {
        let name = if self.extended { "L^ext" } else { "L" };
        let mut s = String::new();
        for o in &self.orders {
            s.push_str(&format!(
                "{name}_{} eps^{}: {}\n",
                self.m,
                o.eps,
                match &o.witness {
                    None => "0".to_string(),
                    Some(w) => format!("{} nonzero terms, e.g. {w}", o.nonzero_terms),
                }
            ));
        }
        s
    }
}

/// `(1/tau) L_m tau` (or `(1/tau_1) L_m tau_1` when not extended) on the
/// target, for eps orders up to `eps_max`, capped at the complete order.
pub fn check_virasoro(tau: &TopTau, m: i32, extended: bool, eps_max: i32) -> Result<VirasoroReport> {
    let op = VirasoroOp::on_space(m, extended, &tau.target)?;
    let top = eps_max.min(tau.complete_order(!extended));
    let g = tau.log_tau(!extended);
    let res = op.on_log_tau(&g, top).restrict(&tau.target);
    let orders = (-2..=top)
        .map(|k| {
            let s = res.get(k);
            let witness = (!s.is_zero()).then(|| {
                let t = s.to_text();
                t.split(" + ").next().unwrap_or("").to_string()
            });
            OrderResidual { eps: k, nonzero_terms: s.len(), witness }
        })
        .collect();
    Ok(VirasoroReport { m, extended, orders })
}

/// The string equation is the `m = -1` extended constraint.
pub fn string_equation(tau: &TopTau, eps_max: i32) -> Result<VirasoroReport> {
    check_virasoro(tau, -1, true, eps_max)
}

/// `sum (2n+1)/2 (t_n - [n=1]) dF/dt_n + sum (n+1) s_n dF/ds_n` on a box; zero
/// for `ℱ^o_p`.
pub fn scaling_residual(f: &MultiSeries) -> MultiSeries {
    let space = f.space().clone();
    let mut acc = MultiSeries::zero(&space);
    for g in space.vars() {
        let (c, n) = g.family().expect("time variable");
        let x = MultiSeries::time(&space, *g).mul(&f.derivative(*g));
        let w = if c == 't' { rat(2 * n as i64 + 1, 2) } else { int(n as i64 + 1) };
        acc = acc.add(&x.scale(&w));
        if c == 't' && n == 1 {
            acc = acc.sub(&f.derivative(*g).scale(&w));
        }
    }
    acc
}

pub fn fmt_report_line(r: &VirasoroReport) -> String {
    let status = if r.vanishes() { "0" } else { "NONZERO" };
    let top = r.orders.last().map(|o| o.eps).unwrap_or(-2);
    format!("L{}_{}: {} through eps^{}", if r.extended { "ext" } else { "" }, r.m, status, top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{FreeEnergy, OpenCorrelators};
    use crate::jet_ring;
    use crate::reference;
    use proptest::prelude::*;

    fn inputs() -> TauInputs {
        let mut t = TauInputs::default();
        t.closed.insert(1, FreeEnergy::Log(jet_ring::closed_f1()));
        t.closed.insert(2, FreeEnergy::Rational(jet_ring::parse_jets(reference::FC2).unwrap()));
        t.open.insert(1, FreeEnergy::Log(jet_ring::open_f1()));
        t.open.insert(2, FreeEnergy::Rational(jet_ring::parse_jets(reference::FO2_JETS).unwrap()));
        t
    }

    fn ex(pairs: &[(Gen, u32)]) -> BTreeMap<Gen, u32> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn genus_zero_pieces() {
        let target = Space::full(2, 2, 4);
        let tau = build_tau(&TauInputs::genus_zero(), &target, 1).unwrap();
        assert_eq!(tau.closed[&0].coefficient(&ex(&[(Gen::t(0), 3)])).unwrap(), rat(1, 6));
        // dF^o_0/ds_0 at t = 0, s_{>=1} = 0 is s_0^2/2
        let d = tau.open[&0].derivative(Gen::s(0));
        assert_eq!(d.coefficient(&ex(&[(Gen::s(0), 2)])).unwrap(), rat(1, 2));
        assert_eq!(d.coefficient(&ex(&[(Gen::s(0), 1)])).unwrap(), int(0));
        // r_top = dF^o_0/dt_0
        let inner = shrunk(&tau.work, 1);
        assert!(tau.open[&0].derivative(Gen::t(0)).sub(&tau.genus0.r).restrict(&inner).is_zero());
        let s = string_equation(&tau, -1).unwrap();
        assert!(s.vanishes(), "{}", s.to_text());
    }

    #[test]
    fn constraints_through_eps_one() {
        let target = Space::full(2, 2, 3);
        let tau = build_tau(&inputs(), &target, 1).unwrap();
        assert_eq!(tau.complete_order(false), 1);
        for m in -1..=1 {
            let r = check_virasoro(&tau, m, true, 1).unwrap();
            assert!(r.vanishes(), "{}", r.to_text());
            assert_eq!(r.orders.last().unwrap().eps, 1);
        }
        for m in -1..=1 {
            let r = check_virasoro(&tau, m, false, 2).unwrap();
            assert!(r.vanishes(), "{}", r.to_text());
            assert_eq!(r.orders.last().unwrap().eps, 2);
        }
    }

    #[test]
    fn dropping_a_constant_breaks_l0() {
        // the 3/4 of L_0^ext is needed: without the open genus-one part the
        // eps^0 residual is a nonzero constant
        let mut i = inputs();
        i.open.remove(&2);
        let target = Space::full(1, 1, 2);
        let mut tau = build_tau(&i, &target, 1).unwrap();
        tau.open.remove(&1);
        tau.inputs_complete = 0;
        let r = check_virasoro(&tau, 0, true, 0).unwrap();
        assert!(!r.vanishes());
    }

    #[test]
    fn perturbed_open_genus_two_breaks_eps_one() {
        let target = Space::full(2, 2, 3);
        let mut tau = build_tau(&inputs(), &target, 1).unwrap();
        let f2 = tau.open[&2].scale(&int(2));
        tau.open.insert(2, f2);
        // L_{-1}, L_0 are linear in the eps^1 coefficient there; L_1 couples it to genus zero
        assert!(check_virasoro(&tau, 0, true, 1).unwrap().vanishes());
        assert!(!check_virasoro(&tau, 1, true, 1).unwrap().vanishes());
        assert!(check_virasoro(&tau, 1, true, 0).unwrap().vanishes());
    }

    #[test]
    fn scaling_identity_for_open_energies() {
        let mut e = BTreeMap::new();
        e.insert(1, FreeEnergy::Log(jet_ring::open_f1()));
        e.insert(2, FreeEnergy::Rational(jet_ring::parse_jets(reference::FO2_JETS).unwrap()));
        let x2 = jet_ring::parse_jets(reference::X2_JETS).unwrap();
        let fc2 = jet_ring::parse_jets(reference::FC2).unwrap();
        e.insert(3, FreeEnergy::Rational(x2.sub(&fc2)));
        let c = OpenCorrelators::new(e);
        let caps = [(Gen::t(0), 2), (Gen::t(1), 2), (Gen::t(2), 1), (Gen::s(0), 4), (Gen::s(1), 2), (Gen::s(2), 1)];
        let sp = Space::new(caps, Some(6));
        let inner = shrunk(&sp, 1);
        for p in 2..=3 {
            let f = c.series(p, &sp).unwrap();
            assert!(scaling_residual(&f).restrict(&inner).is_zero(), "p = {p}");
        }
    }

    fn random_poly(space: &Arc<Space>, terms: &[(u8, u8, u8, u8, i8)]) -> MultiSeries {
        let mut f = MultiSeries::zero(space);
        for (a, b, c, d, k) in terms {
            let mono = MultiSeries::var(space, Gen::t(*a as u32 % 3))
                .mul(&MultiSeries::var(space, Gen::s(*b as u32 % 3)).pow(*c as u32 % 3))
                .mul(&MultiSeries::var(space, Gen::t(*d as u32 % 2)));
            f = f.add(&mono.scale(&int(*k as i64)));
        }
        f
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn virasoro_commutation(
            terms0 in proptest::collection::vec((0u8..3, 0u8..3, 0u8..3, 0u8..2, -3i8..4), 1..4),
            terms1 in proptest::collection::vec((0u8..3, 0u8..3, 0u8..3, 0u8..2, -3i8..4), 0..3),
            a in -1i32..3, b in -1i32..3,
        ) {
            prop_assume!(a + b >= -1);
            let space = Space::new((0..=7).map(|k| (Gen::t(k), 10)).chain((0..=7).map(|k| (Gen::s(k), 10))), Some(10));
            let f = EpsGraded::from_terms(&space, [(0, random_poly(&space, &terms0)), (1, random_poly(&space, &terms1))]);
            let la = VirasoroOp::on_space(a, true, &space).unwrap();
            let lb = VirasoroOp::on_space(b, true, &space).unwrap();
            let lab = VirasoroOp::on_space(a + b, true, &space).unwrap();
            let lhs = la.apply(&lb.apply(&f)).add(&lb.apply(&la.apply(&f)).scale(&int(-1)));
            let rhs = lab.apply(&f).scale(&int((a - b) as i64));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
