//! Order-by-order solution of the loop equation for the free energies.
//!
//! At order `eps^p` the unknown is the gradient of `X_p` with respect to
//! `v_0, r_0, v_1, r_1, ..., v_{2p+1}, r_{2p+1}`. Its contribution to the
//! equation is `sum_k dX/dv_k * Dv_k + dX/dr_k * Dr_k` with fixed resolvent
//! elements `Dv_k`, `Dr_k`; everything else is built from lower orders.
//! Coefficients on `A^(i+1)` (for `v_i`) and `B^(i+1)` (for `r_i`) give an
//! upper triangular system.
//!
//! The closed sector (`r` absent) satisfies its own loop equation of the same
//! shape and is solved separately to split `X_p` into closed and open parts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact_algebra::rational::{binomial, big, double_factorial, factorial};
use crate::exact_algebra::{int, rat, Gen, Poly, Rational};
use crate::jet_ring::{self, jet, JetExpr, LogSum};
use crate::lambda_calc::LambdaElem;

/// Nonzero partial derivatives, keyed by jet generator.
pub type Gradient = BTreeMap<Gen, JetExpr>;

/// Which loop equation to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    /// Full equation in `v_k, r_k`; order `p` has unknown `X_p`.
    Full,
    /// Closed equation in `v_k` alone; order `p = 2g-2` has unknown `F^c_g`.
    Closed,
}

/// Derivatives of the building blocks of the equation, up to a fixed order.
pub struct Blocks {
    /// `d^n A^(1/2)`
    half: Vec<LambdaElem>,
    /// `d^n (r A^(1/2) B)`
    rhalf_b: Vec<LambdaElem>,
    /// `d^n A^2`
    a2: Vec<LambdaElem>,
    /// `d^n (A/(16r) d(r^2 A B) + r/12 d(B^3))`
    s1: Vec<LambdaElem>,
    /// `d^n B^2`
    b2: Vec<LambdaElem>,
    dv: Vec<LambdaElem>,
    dr: Vec<LambdaElem>,
}

fn derivatives(x: LambdaElem, n: usize) -> Vec<LambdaElem> {
    let mut out = vec![x];
    for i in 0..n {
        let d = out[i].d();
        out.push(d);
    }
    out
}

impl Blocks {
    /// Blocks sufficient for unknown slots up to jet order `kmax`.
    pub fn new(kmax: usize) -> Blocks {
        let n = kmax + 3;
        let r = jet_ring::r(0);
        let ((half, rhalf_b), (a2, (s1, b2))) = rayon::join(
            || {
                rayon::join(
                    || derivatives(LambdaElem::a_pow(1), n),
                    || derivatives(LambdaElem::monomial((1, 1), r.clone()), n),
                )
            },
            || {
                rayon::join(
                    || derivatives(LambdaElem::a_pow(4), n),
                    || {
                        rayon::join(
                            || {
                                let r2ab = LambdaElem::monomial((2, 1), r.pow(2).unwrap());
                                let inv16r = r.inv().unwrap().scale_by(&rat(1, 16));
                                let t1 = LambdaElem::monomial((2, 0), inv16r).mul(&r2ab.d());
                                let t2 = LambdaElem::b_pow(3).d().scale(&r.scale_by(&rat(1, 12)));
                                derivatives(t1.add(&t2), n)
                            },
                            || derivatives(LambdaElem::b_pow(2), n),
                        )
                    },
                )
            },
        );
        let a = derivatives(LambdaElem::a_pow(2), n);
        let rab = derivatives(LambdaElem::monomial((2, 1), r.clone()), n);
        let (dv, dr): (Vec<_>, Vec<_>) = (0..=kmax)
            .into_par_iter()
            .map(|k| {
                let mut dv = a[k].clone();
                let mut dr = rab[k].clone();
                for j in 1..=k {
                    let c = big(binomial(k as u64, j as u64));
                    dv = dv.add(&half[j - 1].mul(&half[k + 1 - j]).scale_q(&c));
                    dr = dr.add(&half[j - 1].mul(&rhalf_b[k + 1 - j]).scale_q(&c));
                }
                (dv, dr.scale_q(&rat(1, 2)))
            })
            .unzip();
        Blocks {
            half,
            rhalf_b,
            a2,
            s1,
            b2,
            dv,
            dr,
        }
    }

    pub fn kmax(&self) -> usize {
        self.dv.len() - 1
    }

    /// Image of a jet generator under the operator on the left of the equation.
    pub fn lhs_image(&self, g: Gen) -> LambdaElem {
        match g.family() {
            Some(('v', k)) => self.dv[k as usize].clone(),
            Some(('r', k)) => self.dr[k as usize].clone(),
            _ => LambdaElem::zero(),
        }
    }

    /// `sum_l dG/dv_l d^(l+1)A^(1/2) + 1/2 dG/dr_l d^(l+1)(r A^(1/2) B)` from a gradient.
    pub fn jop(&self, grad: &Gradient) -> LambdaElem {
        let parts: Vec<LambdaElem> = grad
            .par_iter()
            .map(|(g, c)| match g.family() {
                Some(('v', l)) => self.half[l as usize + 1].scale(c),
                Some(('r', l)) => self.rhalf_b[l as usize + 1].scale(&c.scale_by(&rat(1, 2))),
                _ => LambdaElem::zero(),
            })
            .collect();
        sum(parts)
    }
}

fn sum(parts: Vec<LambdaElem>) -> LambdaElem {
    parts.into_iter().fold(LambdaElem::zero(), |acc, x| acc.add(&x))
}

/// Gradient of a jet expression with respect to all `v_k`, `r_k`.
pub fn gradient(x: &JetExpr) -> Gradient {
    x.support()
        .into_iter()
        .filter(|g| matches!(g.family(), Some(('v' | 'r', _))))
        .filter_map(|g| {
            let d = x.partial(g);
            (!d.is_zero()).then_some((g, d))
        })
        .collect()
}

pub fn log_gradient(x: &LogSum) -> Gradient {
    let mut gens: Vec<Gen> = x.terms.iter().flat_map(|t| t.1.support()).collect();
    gens.sort();
    gens.dedup();
    gens.into_iter()
        .filter(|g| matches!(g.family(), Some(('v' | 'r', _))))
        .filter_map(|g| {
            let d = x.partial(g);
            (!d.is_zero()).then_some((g, d))
        })
        .collect()
}

/// Genus-zero-in-eps seed `X_0 = (1/24) log v_1 + (1/2) log u_1`.
pub fn x0() -> LogSum {
    let mut t = jet_ring::closed_f1().terms;
    t.extend(jet_ring::open_f1().terms);
    LogSum::new(t)
}

/// Right side at order `p`, given the gradients of lower orders
/// (`grads[q]` for `q < p`; in the closed sector odd entries are empty).
pub fn rhs(blocks: &Blocks, sector: Sector, p: usize, grads: &[Gradient]) -> LambdaElem {
    let mut terms: Vec<LambdaElem> = Vec::new();
    let jets = jet();
    if p >= 2 {
        let g = &grads[p - 2];
        // Hessian part: sum_k J(x_k) * J(dX/dx_k)
        let hess: Vec<LambdaElem> = g
            .par_iter()
            .map(|(x, c)| {
                let inner = blocks.jop(&gradient(c));
                match x.family() {
                    Some(('v', k)) => blocks.half[k as usize + 1].mul(&inner),
                    Some(('r', k)) => blocks.rhalf_b[k as usize + 1]
                        .mul(&inner)
                        .scale_q(&rat(1, 2)),
                    _ => LambdaElem::zero(),
                }
            })
            .collect();
        terms.push(sum(hess).scale_q(&rat(1, 2)));
        // products of first derivatives: J(X_a) J(X_b), a + b = p - 2
        let js: Vec<LambdaElem> = (0..=p - 2).into_par_iter().map(|a| blocks.jop(&grads[a])).collect();
        let prods: Vec<LambdaElem> = (0..=p - 2)
            .into_par_iter()
            .filter(|&a| a <= p - 2 - a)
            .map(|a| {
                let b = p - 2 - a;
                let m = js[a].mul(&js[b]);
                if a == b {
                    m
                } else {
                    m.scale_q(&int(2))
                }
            })
            .collect();
        terms.push(sum(prods).scale_q(&rat(1, 2)));
        // first derivatives against the second-order blocks
        let lin: Vec<LambdaElem> = g
            .par_iter()
            .map(|(x, c)| match x.family() {
                Some(('v', k)) => blocks.a2[k as usize + 2].scale(&c.scale_by(&rat(1, 16))),
                Some(('r', k)) => blocks.s1[k as usize + 1].scale(c),
                _ => LambdaElem::zero(),
            })
            .collect();
        terms.push(sum(lin));
    }
    if sector == Sector::Full && p >= 1 {
        let g = &grads[p - 1];
        let rhb = LambdaElem::monomial((1, 1), jet_ring::r(0).scale_by(&rat(1, 2)));
        terms.push(rhb.mul(&blocks.jop(g)));
        let lin: Vec<LambdaElem> = g
            .par_iter()
            .filter_map(|(x, c)| match x.family() {
                Some(('r', k)) => Some(blocks.b2[k as usize + 1].scale(&c.scale_by(&rat(3, 4)))),
                _ => None,
            })
            .collect();
        terms.push(sum(lin));
    }
    match (sector, p) {
        (Sector::Full, 1) => terms.push(blocks.s1[0].clone()),
        (_, 0) => {
            terms.push(LambdaElem::a_pow(4).scale(&jets.constant(rat(1, 16))));
            if sector == Sector::Full {
                terms.push(LambdaElem::b_pow(2));
                terms.push(LambdaElem::a_pow(2).mul(&LambdaElem::b_pow(1)).scale(&jets.constant(rat(-1, 4))));
            }
        }
        _ => {}
    }
    sum(terms)
}

/// Left side evaluated on a known gradient.
pub fn lhs(blocks: &Blocks, grad: &Gradient) -> LambdaElem {
    let parts: Vec<LambdaElem> = grad.par_iter().map(|(g, c)| blocks.lhs_image(*g).scale(c)).collect();
    sum(parts)
}

/// Unknown slots in order: `v_0, r_0, v_1, r_1, ...` (only `v_k` when closed).
pub fn slots(sector: Sector, p: usize) -> Vec<Gen> {
    match sector {
        Sector::Full => (0..=2 * p as u32 + 1).flat_map(|k| [Gen::v(k), Gen::r(k)]).collect(),
        Sector::Closed => {
            let g = p as u32 / 2 + 1;
            (0..=3 * g - 2).map(Gen::v).collect()
        }
    }
}

/// Basis element whose coefficient determines a slot: `A^(k+1)` for `v_k`, `B^(k+1)` for `r_k`.
fn row_key(g: Gen) -> (i32, i32) {
    match g.family() {
        Some(('v', k)) => (2 * (k as i32 + 1), 0),
        Some(('r', k)) => (0, k as i32 + 1),
        _ => unreachable!(),
    }
}

fn key_name(k: (i32, i32)) -> String {
    match k {
        (0, 0) => "1".into(),
        (a, 0) if a % 2 == 0 => format!("A^{}", a / 2),
        (a, 0) => format!("A^({a}/2)"),
        (0, b) => format!("B^{b}"),
        (a, b) => format!("A^({a}/2)B^{b}"),
    }
}

/// Triangular system at one order.
pub struct LoopOrderSystem {
    pub p: usize,
    pub sector: Sector,
    pub slots: Vec<Gen>,
    /// `matrix[i][j]`: coefficient of slot `j` in the row of slot `i`.
    pub matrix: Vec<Vec<JetExpr>>,
    pub rhs: Vec<JetExpr>,
    pub rhs_full: LambdaElem,
}

impl LoopOrderSystem {
    pub fn assemble(blocks: &Blocks, sector: Sector, p: usize, grads: &[Gradient]) -> Result<Self> {
        let slots = slots(sector, p);
        assert!(blocks.kmax() >= slots.iter().filter_map(|g| g.jet_order()).max().unwrap_or(0) as usize);
        let rhs_full = rhs(blocks, sector, p, grads);
        let images: Vec<LambdaElem> = slots.iter().map(|g| blocks.lhs_image(*g)).collect();
        let matrix: Vec<Vec<JetExpr>> = slots
            .iter()
            .map(|row| images.iter().map(|im| im.coeff(row_key(*row))).collect())
            .collect();
        let rhs = slots.iter().map(|row| rhs_full.coeff(row_key(*row))).collect();
        Ok(LoopOrderSystem {
            p,
            sector,
            slots,
            matrix,
            rhs,
            rhs_full,
        })
    }

    pub fn diagonal(&self) -> Vec<JetExpr> {
        (0..self.slots.len()).map(|i| self.matrix[i][i].clone()).collect()
    }

    /// Back-substitution, then the full residual on every basis element.
    pub fn solve(&self, blocks: &Blocks) -> Result<Gradient> {
        let n = self.slots.len();
        for i in 0..n {
            for j in 0..i {
                if !self.matrix[i][j].is_zero() {
                    return Err(Error::NotUpperTriangular {
                        row: self.slots[i].name(),
                        col: self.slots[j].name(),
                    });
                }
            }
        }
        let mut sol: Vec<JetExpr> = vec![jet().zero(); n];
        for i in (0..n).rev() {
            let mut acc = self.rhs[i].clone();
            for j in i + 1..n {
                if !self.matrix[i][j].is_zero() && !sol[j].is_zero() {
                    acc = acc.sub(&self.matrix[i][j].mul(&sol[j]));
                }
            }
            let d = &self.matrix[i][i];
            if d.is_zero() {
                return Err(Error::SingularDiagonal(self.slots[i].name()));
            }
            sol[i] = acc
                .div(d)
                .map_err(|_| Error::SingularDiagonal(format!("{}: {}", self.slots[i].name(), d.to_text())))?;
        }
        let grad: Gradient = self
            .slots
            .iter()
            .zip(sol)
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (*g, c))
            .collect();
        let residual = lhs(blocks, &grad).sub(&self.rhs_full);
        if let Some((k, _)) = residual.terms().next() {
            return Err(Error::ResidualNonzero {
                order: self.p,
                basis: key_name(*k),
            });
        }
        Ok(grad)
    }
}

/// `X = (1/p) sum_k k (v_k dX/dv_k + r_k dX/dr_k)`, re-checked against the gradient.
pub fn reconstruct(grad: &Gradient, p: usize) -> Result<JetExpr> {
    assert!(p >= 1);
    let mut x = jet().zero();
    for (g, c) in grad {
        let k = g.jet_order().unwrap_or(0);
        if k > 0 {
            x = x.add(&jet().gen(*g).mul(c).scale_by(&int(k as i64)));
        }
    }
    let x = x.scale_by(&rat(1, p as i64));
    let again = gradient(&x);
    if &again != grad {
        return Err(Error::GradientMismatch(p));
    }
    Ok(x)
}

/// All free energies obtained from the loop equations up to order `pmax`.
#[derive(Clone, Debug)]
pub struct FreeEnergyTable {
    pub pmax: usize,
    /// `X_p` for `1 <= p <= pmax` (index 0 unused, see [`x0`]).
    pub x: Vec<JetExpr>,
    /// `F^c_g` for `g >= 2`.
    pub fc: BTreeMap<usize, JetExpr>,
    /// `F^o_p` for `p >= 2`.
    pub fo: BTreeMap<usize, JetExpr>,
    /// Diagonal of the triangular system at each order.
    pub diagonals: Vec<Vec<JetExpr>>,
}

impl FreeEnergyTable {
    pub fn fc1() -> LogSum {
        jet_ring::closed_f1()
    }

    pub fn fo1() -> LogSum {
        jet_ring::open_f1()
    }
}

/// Residual of the order-zero equation with the seed `X_0` (closed or full).
pub fn seed_residual(blocks: &Blocks, sector: Sector) -> LambdaElem {
    let g = match sector {
        Sector::Full => log_gradient(&x0()),
        Sector::Closed => log_gradient(&jet_ring::closed_f1()),
    };
    lhs(blocks, &g).sub(&rhs(blocks, sector, 0, &[]))
}

/// Solve one sector up to order `pmax`, returning the solved `X_p` (closed:
/// indexed by `p = 2g - 2`, odd entries zero) and the diagonals.
pub fn solve_sector(
    blocks: &Blocks,
    sector: Sector,
    pmax: usize,
    known: &mut dyn FnMut(usize) -> Option<JetExpr>,
    on_solved: &mut dyn FnMut(usize, &JetExpr),
) -> Result<(Vec<JetExpr>, Vec<Vec<JetExpr>>)> {
    let seed = match sector {
        Sector::Full => log_gradient(&x0()),
        Sector::Closed => log_gradient(&jet_ring::closed_f1()),
    };
    let res = seed_residual(blocks, sector);
    if let Some((k, _)) = res.terms().next() {
        return Err(Error::ResidualNonzero {
            order: 0,
            basis: key_name(*k),
        });
    }
    let mut grads = vec![seed];
    let mut xs = vec![jet().zero()];
    let mut diags = vec![Vec::new()];
    for p in 1..=pmax {
        if sector == Sector::Closed && p % 2 == 1 {
            grads.push(Gradient::new());
            xs.push(jet().zero());
            diags.push(Vec::new());
            continue;
        }
        let sys = LoopOrderSystem::assemble(blocks, sector, p, &grads)?;
        diags.push(sys.diagonal());
        let x = match known(p) {
            Some(x) => {
                // cached value: still verify it solves this order
                let g = gradient(&x);
                let residual = lhs(blocks, &g).sub(&sys.rhs_full);
                if let Some((k, _)) = residual.terms().next() {
                    return Err(Error::ResidualNonzero {
                        order: p,
                        basis: key_name(*k),
                    });
                }
                x
            }
            None => {
                let g = sys.solve(blocks)?;
                if g.contains_key(&Gen::v(0)) {
                    return Err(Error::NonzeroVGradient(p));
                }
                let x = reconstruct(&g, p)?;
                on_solved(p, &x);
                x
            }
        };
        grads.push(gradient(&x));
        xs.push(x);
    }
    Ok((xs, diags))
}

/// Solve both sectors and split `X_p = F^o_{p+1} + F^c_{p/2+1}`.
pub fn solve_up_to(pmax: usize) -> Result<FreeEnergyTable> {
    solve_up_to_with(pmax, &mut |_| None, &mut |_, _| {})
}

/// As [`solve_up_to`], with a lookup for previously computed `X_p` and a
/// callback for freshly solved ones (used for on-disk caching).
pub fn solve_up_to_with(
    pmax: usize,
    known: &mut dyn FnMut(usize) -> Option<JetExpr>,
    on_solved: &mut dyn FnMut(usize, &JetExpr),
) -> Result<FreeEnergyTable> {
    let blocks = Blocks::new(2 * pmax + 1);
    let (x, diagonals) = solve_sector(&blocks, Sector::Full, pmax, known, on_solved)?;
    let closed_blocks = Blocks::new(3 * (pmax / 2 + 1));
    let (xc, _) = solve_sector(&closed_blocks, Sector::Closed, pmax - pmax % 2, &mut |_| None, &mut |_, _| {})?;
    let mut fc = BTreeMap::new();
    let mut fo = BTreeMap::new();
    for p in 1..=pmax {
        let mut open = x[p].clone();
        if p % 2 == 0 {
            let g = p / 2 + 1;
            let c = xc[p].clone();
            check_closed(&c, g)?;
            open = open.sub(&c);
            fc.insert(g, c);
        }
        fo.insert(p + 1, open);
    }
    Ok(FreeEnergyTable {
        pmax,
        x,
        fc,
        fo,
        diagonals,
    })
}

/// `F^c_g` may only involve `v_1..v_{3g-2}`.
pub fn check_closed(c: &JetExpr, g: usize) -> Result<()> {
    for x in c.support() {
        let ok = matches!(x.family(), Some(('v', k)) if k >= 1 && k as usize <= 3 * g - 2);
        if !ok {
            return Err(Error::ClosedPartContaminated(g, x.name()));
        }
    }
    Ok(())
}

/// The diagonal predicted for slot `v_i`: `(2i+1)!!/2^i v_1^i`; for `r_i`: `(i+1)!/r u_1^i`.
pub fn expected_diagonal(g: Gen) -> JetExpr {
    let k = g.jet_order().unwrap() as i32;
    match g.family() {
        Some(('v', _)) => {
            let c = big(double_factorial(2 * k as i64 + 1)) / big(BigInt::from(2).pow(k as u32));
            jet_ring::v(1).pow(k).unwrap().scale_by(&c)
        }
        _ => jet_ring::u(1)
            .pow(k)
            .unwrap()
            .div(&jet_ring::r(0))
            .unwrap()
            .scale_by(&big(factorial(k as u64 + 1))),
    }
}

/// Does the denominator of `F^o_p` divide `v_1^(5p-2) u_1^(5p-2)`?
pub fn in_fog_ring(f: &JetExpr, p: usize) -> bool {
    let bound = 5 * p as i32 - 2;
    let den = f.den();
    den.iter()
        .all(|(g, e)| (g == Gen::v(1) || g == Gen::u(1)) && e <= bound)
}

/// Is `e` an eigenvector of `E1` with eigenvalue `l1` and of `E2` with `l2`?
pub fn homogeneity_holds(e: &JetExpr, l1: &Rational, l2: &Rational) -> bool {
    jet_ring::euler_e1(e) == e.scale_by(l1) && jet_ring::euler_e2(e) == e.scale_by(l2)
}

// ---------------------------------------------------------------------------
// Independent route through the Euler–Lagrange equation of the hierarchy.

/// Truncated power series in `eps` with jet coefficients.
#[derive(Clone, Debug)]
struct EpsJets(Vec<JetExpr>);

impl EpsJets {
    fn zero(n: usize) -> Self {
        EpsJets(vec![jet().zero(); n + 1])
    }

    fn constant(n: usize, c: JetExpr) -> Self {
        let mut s = Self::zero(n);
        s.0[0] = c;
        s
    }

    fn add(&self, o: &Self) -> Self {
        EpsJets(self.0.iter().zip(&o.0).map(|(a, b)| a.add(b)).collect())
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.0.len() - 1;
        let mut out = Self::zero(n);
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out.0[i + j] = out.0[i + j].add(&a.mul(b));
                }
            }
        }
        out
    }

    fn scale(&self, c: &JetExpr) -> Self {
        EpsJets(self.0.iter().map(|a| a.mul(c)).collect())
    }
}

fn poly_derivation(p: &Poly, image: &dyn Fn(Gen) -> Poly) -> Poly {
    let mut acc = Poly::zero();
    for g in p.gens() {
        let d = image(g);
        if !d.is_zero() {
            acc = &acc + &(&p.partial(g) * &d);
        }
    }
    acc
}

/// `d/dw` and `d/drho` of the generating functions at fixed times:
/// `I_k -> I_{k+1}`, `J_k -> J_{k+1}`; `J_k -> I_{k+1} + rho J_{k+1}`, `rho -> 1`.
fn d_w(p: &Poly) -> Poly {
    poly_derivation(p, &|g| match g.family() {
        Some(('I', k)) => Poly::var(Gen::i(k + 1)),
        Some(('J', k)) => Poly::var(Gen::j(k + 1)),
        _ => Poly::zero(),
    })
}

fn d_rho(p: &Poly) -> Poly {
    poly_derivation(p, &|g| match g.family() {
        Some(('J', k)) => &Poly::var(Gen::i(k + 1)) + &(&Poly::var(Gen::r(0)) * &Poly::var(Gen::j(k + 1))),
        Some(('r', 0)) => Poly::one(),
        _ => Poly::zero(),
    })
}

/// `d_x F^o_p` for `p = 1..=pmax`, from the Euler–Lagrange equation of the
/// open hierarchy expanded around the genus-zero solution. Uses only the
/// coefficients `a_k`, `b_k` of the flows, the IZ variables in jets and
/// `F^c_1`; the loop equation is not involved.
pub fn el_recursion_dx_fo(pmax: usize) -> Result<Vec<JetExpr>> {
    use crate::exact_algebra::rational::inv_factorial;
    use crate::hierarchy::{eps, Decomposition};
    let n = pmax;
    let kmax = 2 * n;
    let dec = Decomposition::by_recursion(kmax)?;
    let jmax = kmax + 2 * n + 4;
    let izj = crate::iz_coords::iz_from_jets(jmax);
    let to_jets = |p: &Poly| -> JetExpr {
        let mut acc = jet().zero();
        for (m, c) in p.terms() {
            let mut t = jet().constant(c.clone());
            for (g, e) in m.iter() {
                let x = match g.family() {
                    Some(('I', k)) => izj.i[k as usize].clone(),
                    Some(('J', k)) => izj.j[k as usize].clone(),
                    _ => jet().gen(g),
                };
                t = t.mul(&x.pow(e).expect("positive power"));
            }
            acc = acc.add(&t);
        }
        acc
    };
    let dvc: Vec<JetExpr> = {
        // d^(j+2) F^c_1
        let mut d = jet_ring::closed_f1().d_x();
        let mut out = Vec::new();
        for _ in 0..=kmax + 3 {
            d = jet_ring::d_x(&d);
            out.push(d.clone());
        }
        out
    };
    let mut found: Vec<JetExpr> = vec![jet().zero()];
    for p in 1..=n {
        // shifts of the jets, known up to order p-1 in the open sector
        let jet_order = kmax + 2;
        let mut shift: BTreeMap<Gen, EpsJets> = BTreeMap::new();
        for jo in 0..=jet_order as u32 {
            let mut dv = EpsJets::zero(p);
            if p >= 2 {
                dv.0[2] = dvc[jo as usize].clone();
            }
            let mut dr = EpsJets::zero(p);
            for (q, uq) in found.iter().enumerate().skip(1) {
                dr.0[q] = jet_ring::d_x_n(uq, jo);
            }
            let mut v = dv;
            v.0[0] = v.0[0].add(&jet_ring::v(jo));
            let mut r = dr;
            r.0[0] = r.0[0].add(&jet_ring::r(jo));
            shift.insert(Gen::v(jo), v);
            shift.insert(Gen::r(jo), r);
        }
        let mut e_series = EpsJets::zero(p);
        e_series.0[1.min(p)] = jet().one();
        if p == 0 {
            unreachable!();
        }
        shift.insert(eps(), e_series);
        let eval = |poly: &Poly| -> EpsJets {
            let mut acc = EpsJets::zero(p);
            for (m, c) in poly.terms() {
                if m.exp(eps()) as usize > p {
                    continue;
                }
                let mut t = EpsJets::constant(p, jet().constant(c.clone()));
                for (g, e) in m.iter() {
                    let base = shift.get(&g).unwrap_or_else(|| panic!("jet {g} beyond range"));
                    for _ in 0..e {
                        t = t.mul(base);
                    }
                }
                acc = acc.add(&t);
            }
            acc
        };
        let x = {
            let mut s = shift[&Gen::v(0)].clone();
            s.0[0] = jet().zero();
            s
        };
        let y = {
            let mut s = shift[&Gen::r(0)].clone();
            s.0[0] = jet().zero();
            s
        };
        let powers = |s: &EpsJets| -> Vec<EpsJets> {
            let mut out = vec![EpsJets::constant(p, jet().one())];
            for i in 1..=p {
                let next = out[i - 1].mul(s);
                out.push(next);
            }
            out
        };
        let (xp, yp) = (powers(&x), powers(&y));
        let mut total = EpsJets::zero(p);
        for k in 0..=kmax {
            let ak = eval(&dec.a[k]);
            let bk = eval(&dec.b[k]);
            // Taylor expansion of J_k(w, rho) and I_{k+1}(w)
            let mut tj = EpsJets::zero(p);
            let mut ti = EpsJets::zero(p);
            let mut dw = Poly::var(Gen::j(k as u32));
            let mut iw = Poly::var(Gen::i(k as u32 + 1));
            for al in 0..=p {
                let mut dr = dw.clone();
                for be in 0..=p - al {
                    let c = inv_factorial(al as u64) * inv_factorial(be as u64);
                    let term = xp[al].mul(&yp[be]).scale(&to_jets(&dr).scale_by(&c));
                    tj = tj.add(&term);
                    dr = d_rho(&dr);
                }
                ti = ti.add(&xp[al].scale(&to_jets(&iw).scale_by(&inv_factorial(al as u64))));
                dw = d_w(&dw);
                iw = d_w(&iw);
            }
            total = total.add(&ak.mul(&tj)).add(&bk.mul(&ti));
        }
        let rho = shift[&Gen::r(0)].clone();
        let residual: Vec<JetExpr> = total.0.iter().zip(&rho.0).map(|(a, b)| a.sub(b)).collect();
        for (q, c) in residual.iter().enumerate().take(p) {
            if !c.is_zero() {
                return Err(Error::OracleMismatch(format!(
                    "Euler-Lagrange residual at eps^{q} while solving order {p}: {}",
                    c.to_text()
                )));
            }
        }
        found.push(residual[p].mul(&jet_ring::u(1)));
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet_ring::{parse_jets, to_u_coords};
    use crate::reference;
    use std::sync::OnceLock;

    fn table() -> &'static FreeEnergyTable {
        static T: OnceLock<FreeEnergyTable> = OnceLock::new();
        T.get_or_init(|| solve_up_to(2).unwrap())
    }

    #[test]
    fn seeds_solve_order_zero() {
        let b = Blocks::new(3);
        assert!(seed_residual(&b, Sector::Full).is_zero());
        assert!(seed_residual(&b, Sector::Closed).is_zero());
    }

    #[test]
    fn diagonal_has_predicted_form() {
        let t = table();
        for p in 1..=2 {
            let s = slots(Sector::Full, p);
            for (g, d) in s.iter().zip(&t.diagonals[p]) {
                assert_eq!(d, &expected_diagonal(*g), "slot {}", g.name());
            }
        }
    }

    #[test]
    fn first_order_matches_reference() {
        let t = table();
        let raw = parse_jets(reference::FO2_JETS).unwrap();
        let uform = parse_jets(reference::FO2_UJETS).unwrap();
        let fix = parse_jets(reference::FO2_UJETS_ERRATUM).unwrap();
        assert_eq!(t.x[1], raw);
        assert_eq!(to_u_coords(&t.x[1]), to_u_coords(&uform.add(&fix)));
        assert_eq!(t.fo[&2], t.x[1]);
    }

    #[test]
    fn second_order_splits_into_reference_parts() {
        let t = table();
        assert_eq!(t.fc[&2], parse_jets(reference::FC2).unwrap());
        assert_eq!(t.x[2], parse_jets(reference::X2_JETS).unwrap());
        let printed = parse_jets(reference::FO3_UJETS).unwrap();
        let fix = parse_jets(reference::FO3_UJETS_ERRATUM).unwrap();
        assert_eq!(to_u_coords(&t.fo[&3]), to_u_coords(&printed.add(&fix)));
    }

    #[test]
    fn open_part_does_not_vanish_without_r() {
        // the r -> 0 limit of F^o_3 keeps r-free terms, so it cannot separate the closed part
        let f = &table().fo[&3];
        let z = f
            .substitute(jet(), &|g| matches!(g.family(), Some(('r', _))).then(|| jet().zero()))
            .unwrap();
        let expect = parse_jets("v4/(16*v1^2) - 11*v2*v3/(48*v1^3) + v2^3/(6*v1^4)").unwrap();
        assert_eq!(z, expect);
    }

    #[test]
    fn homogeneity_and_denominators() {
        let t = table();
        for p in 2..=3 {
            let f = &t.fo[&p];
            let w = int(p as i64 - 1);
            assert!(homogeneity_holds(f, &w, &(&w * rat(3, 2))));
            assert!(in_fog_ring(f, p));
        }
        assert!(homogeneity_holds(&t.fc[&2], &int(2), &int(3)));
    }

    #[test]
    fn euler_lagrange_route_agrees() {
        let t = table();
        let el = el_recursion_dx_fo(2).unwrap();
        assert_eq!(el[1], jet_ring::open_f1().d_x());
        assert_eq!(el[2], jet_ring::d_x(&t.fo[&2]));
    }

    #[test]
    fn reconstruct_inverts_gradient() {
        let x = parse_jets(reference::FO2_JETS).unwrap();
        assert_eq!(reconstruct(&gradient(&x), 1).unwrap(), x);
        assert!(matches!(reconstruct(&gradient(&x), 2), Err(Error::GradientMismatch(2))));
    }
}
