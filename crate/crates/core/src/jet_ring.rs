//! Jet variables `v_k`, `r_k` with the x-derivation and the two Euler
//! gradings, plus the `u = v + r^2/2` coordinate change.
//!
//! Two rings share the generator alphabet: [`jet`] (coordinates `v_k, r_k`,
//! with `u1 = v1 + r*r1` materialized) and [`ujet`] (coordinates `u_k, r_k`,
//! with `v1 = u1 - r*r1` materialized).

use std::sync::OnceLock;

use num_traits::Zero;

use crate::exact_algebra::{int, rat, Gen, LocalizedExpr, Poly, Rational, Ring};

pub type JetExpr = LocalizedExpr;

pub fn jet() -> &'static Ring {
    static R: OnceLock<&'static Ring> = OnceLock::new();
    R.get_or_init(|| {
        let u1 = &Poly::var(Gen::v(1)) + &(&Poly::var(Gen::r(0)) * &Poly::var(Gen::r(1)));
        Ring::leak("jet", &[Gen::r(0), Gen::v(1)], &[(Gen::u(1), u1)])
    })
}

pub fn ujet() -> &'static Ring {
    static R: OnceLock<&'static Ring> = OnceLock::new();
    R.get_or_init(|| {
        let v1 = &Poly::var(Gen::u(1)) - &(&Poly::var(Gen::r(0)) * &Poly::var(Gen::r(1)));
        Ring::leak("ujet", &[Gen::r(0), Gen::u(1)], &[(Gen::v(1), v1)])
    })
}

pub fn v(k: u32) -> JetExpr {
    jet().gen(Gen::v(k))
}

pub fn r(k: u32) -> JetExpr {
    jet().gen(Gen::r(k))
}

/// `u_k` expressed in the `v, r` coordinates.
pub fn u(k: u32) -> JetExpr {
    jet().poly(&Poly::var(Gen::v(k)) + &half_r_squared(k))
}

/// Parse text in the jet ring; `uK` for `K != 1` means `vK + d^K(r^2/2)`.
pub fn parse_jets(s: &str) -> crate::error::Result<JetExpr> {
    crate::exact_algebra::parse_with(jet(), s, &|name| {
        let k: u32 = name.strip_prefix('u')?.parse().ok()?;
        (k != 1).then(|| u(k))
    })
}

/// `d_x^k (r^2/2)` as a polynomial in `r_0..r_k`.
pub fn half_r_squared(k: u32) -> Poly {
    let mut p = (&Poly::var(Gen::r(0)) * &Poly::var(Gen::r(0))).scale(&rat(1, 2));
    for _ in 0..k {
        p = dx_poly(&p);
    }
    p
}

fn shift(g: Gen) -> Option<Gen> {
    match g.family() {
        Some((c @ ('v' | 'r' | 'u'), k)) => Some(Gen::indexed(c, k + 1)),
        _ => None,
    }
}

/// x-derivative of a polynomial in jet generators.
pub fn dx_poly(p: &Poly) -> Poly {
    let mut acc = Poly::zero();
    for g in p.gens() {
        if let Some(h) = shift(g) {
            acc = &acc + &(&p.partial(g) * &Poly::var(h));
        }
    }
    acc
}

/// The x-derivation `sum_k v_{k+1} d/dv_k + r_{k+1} d/dr_k` (and `u_k -> u_{k+1}`
/// in u-coordinates). Other generators are constants.
pub fn d_x(e: &JetExpr) -> JetExpr {
    let ring = e.ring();
    e.derive(&|g| match shift(g) {
        Some(h) => ring.gen(h),
        None => ring.zero(),
    })
}

pub fn d_x_n(e: &JetExpr, n: u32) -> JetExpr {
    (0..n).fold(e.clone(), |acc, _| d_x(&acc))
}

pub fn partial(e: &JetExpr, g: Gen) -> JetExpr {
    e.partial(g)
}

fn weighted_euler(e: &JetExpr, weight: &dyn Fn(char, u32) -> Option<Rational>) -> JetExpr {
    let ring = e.ring();
    e.derive(&|g| match g.family().and_then(|(c, k)| weight(c, k)) {
        Some(w) if !w.is_zero() => ring.gen(g).scale_by(&w),
        _ => ring.zero(),
    })
}

/// `E1 = sum_k k (v_k d/dv_k + r_k d/dr_k)`.
pub fn euler_e1(e: &JetExpr) -> JetExpr {
    weighted_euler(e, &|c, k| match c {
        'v' | 'r' | 'u' => Some(int(k as i64)),
        _ => None,
    })
}

/// `E2 = sum_k (k-1) v_k d/dv_k + (k-1/2) r_k d/dr_k`.
pub fn euler_e2(e: &JetExpr) -> JetExpr {
    weighted_euler(e, &|c, k| match c {
        'v' | 'u' => Some(int(k as i64 - 1)),
        'r' => Some(rat(2 * k as i64 - 1, 2)),
        _ => None,
    })
}

/// Rewrite a `v, r` expression in the `u, r` coordinates.
pub fn to_u_coords(e: &JetExpr) -> JetExpr {
    let target = ujet();
    e.substitute(target, &|g| match g.family() {
        Some(('v', k)) => Some(target.poly(&Poly::var(Gen::u(k)) - &half_r_squared(k))),
        _ => None,
    })
    .expect("u-coordinate change keeps denominators invertible")
}

/// Rewrite a `u, r` expression back in the `v, r` coordinates.
pub fn from_u_coords(e: &JetExpr) -> JetExpr {
    let target = jet();
    e.substitute(target, &|g| match g.family() {
        Some(('u', k)) => Some(target.poly(&Poly::var(Gen::v(k)) + &half_r_squared(k))),
        _ => None,
    })
    .expect("u-coordinate change keeps denominators invertible")
}

/// Highest jet order occurring (over `v`, `r`, `u` generators, including
/// materialized ones through their definitions).
pub fn max_jet_order(e: &JetExpr) -> u32 {
    e.support().into_iter().filter_map(|g| g.jet_order()).max().unwrap_or(0)
}

/// `sum_i coeff_i * log(arg_i)`; the logarithmic free energies and the
/// genus-zero loop solution live here rather than in the ring.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSum {
    pub terms: Vec<(Rational, JetExpr)>,
}

impl LogSum {
    pub fn new(terms: Vec<(Rational, JetExpr)>) -> LogSum {
        LogSum { terms }
    }

    /// Apply a derivation: `D(c log a) = c D(a) / a`.
    pub fn derive(&self, d: &dyn Fn(&JetExpr) -> JetExpr) -> JetExpr {
        let ring = self.terms.first().map(|t| t.1.ring()).unwrap_or(jet());
        self.terms.iter().fold(ring.zero(), |acc, (c, a)| {
            let q = d(a).div(a).expect("log argument is invertible");
            acc.add(&q.scale_by(c))
        })
    }

    pub fn d_x(&self) -> JetExpr {
        self.derive(&d_x)
    }

    pub fn partial(&self, g: Gen) -> JetExpr {
        self.derive(&|a| a.partial(g))
    }

    pub fn to_u_coords(&self) -> LogSum {
        LogSum::new(self.terms.iter().map(|(c, a)| (c.clone(), to_u_coords(a))).collect())
    }

    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(c, a)| format!("{}*log({})", crate::exact_algebra::rational::fmt_rational(c), a.to_text()))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn to_latex(&self, names: crate::exact_algebra::NameTable) -> String {
        self.terms
            .iter()
            .map(|(c, a)| {
                let cs = if c.denom() == &1.into() {
                    c.numer().to_string()
                } else {
                    format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
                };
                format!("{cs}\\log\\left({}\\right)", a.to_latex(names))
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Genus-one closed free energy `(1/24) log v_1`.
pub fn closed_f1() -> LogSum {
    LogSum::new(vec![(rat(1, 24), v(1))])
}

/// First open free energy `(1/2) log u_1`.
pub fn open_f1() -> LogSum {
    LogSum::new(vec![(rat(1, 2), u(1))])
}

#[cfg(test)]
pub(crate) mod strategies {
    use super::*;
    use crate::exact_algebra::Monomial;
    use proptest::prelude::*;

    /// Random small expressions in `v_0..v_3, r_0..r_3` over `r^a v1^b u1^c`.
    pub fn jet_expr() -> impl Strategy<Value = JetExpr> {
        let term = (
            -5i64..=5,
            proptest::collection::vec((0u32..4, any::<bool>(), 1i32..=2), 0..3),
        );
        (
            proptest::collection::vec(term, 1..4),
            0i32..2,
            0i32..2,
            0i32..2,
        )
            .prop_map(|(terms, a, b, c)| {
                let num = Poly::from_terms(terms.into_iter().map(|(c, gs)| {
                    let m = Monomial::from_pairs(
                        gs.into_iter()
                            .map(|(k, isv, e)| (if isv { Gen::v(k) } else { Gen::r(k) }, e)),
                    );
                    (m, int(c))
                }));
                let den = Monomial::from_pairs([(Gen::r(0), a), (Gen::v(1), b), (Gen::u(1), c)]);
                jet().fraction(num, den).unwrap()
            })
    }
}

#[cfg(test)]
mod tests {
    use super::strategies::jet_expr;
    use super::*;
    use crate::exact_algebra::parse_expr;
    use proptest::prelude::*;

    fn p(s: &str) -> JetExpr {
        parse_expr(jet(), s).unwrap()
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(d_x(&v(0)), v(1));
        assert_eq!(d_x(&p("v + r^2/2")), p("v1 + r*r1"));
        assert_eq!(d_x(&p("v1 + r*r1")), p("v2 + r1^2 + r*r2"));
        assert_eq!(d_x(&p("u1")), p("v2 + r1^2 + r*r2"));
        assert_eq!(d_x(&p("1/u1")), p("-(v2 + r1^2 + r*r2)/u1^2"));
        assert_eq!(partial(&p("v1*r2"), Gen::v(1)), r(2));
        assert!(partial(&p("7/3"), Gen::r(0)).is_zero());
    }

    #[test]
    fn euler_weights() {
        assert!(euler_e1(&r(0)).is_zero());
        assert_eq!(euler_e1(&p("v2*r1/v1")), p("2*v2*r1/v1"));
        assert_eq!(euler_e2(&r(0)), p("-1/2*r"));
        assert_eq!(euler_e2(&p("u1")), p("0"));
    }

    #[test]
    fn u_coordinates() {
        assert_eq!(to_u_coords(&p("v1 + r*r1")), parse_expr(ujet(), "u1").unwrap());
        assert_eq!(to_u_coords(&p("v2 + r*r2 + r1^2")), parse_expr(ujet(), "u2").unwrap());
        let f = p("(v3*r^2 + r1)/(v1*u1^2)");
        assert_eq!(from_u_coords(&to_u_coords(&f)), f);
        assert_eq!(open_f1().to_u_coords().terms[0].1, parse_expr(ujet(), "u1").unwrap());
    }

    #[test]
    fn log_derivatives() {
        assert_eq!(open_f1().d_x(), p("(v2 + r1^2 + r*r2)/(2*u1)"));
        assert_eq!(closed_f1().partial(Gen::v(1)), p("1/(24*v1)"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn dx_is_a_derivation(a in jet_expr(), b in jet_expr()) {
            let lhs = d_x(&a.mul(&b));
            let rhs = d_x(&a).mul(&b).add(&a.mul(&d_x(&b)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn euler_commutators(a in jet_expr()) {
            let c1 = euler_e1(&d_x(&a)).sub(&d_x(&euler_e1(&a)));
            prop_assert_eq!(c1, d_x(&a));
            let c2 = euler_e2(&d_x(&a)).sub(&d_x(&euler_e2(&a)));
            prop_assert_eq!(c2, d_x(&a));
        }

        #[test]
        fn partial_dx_commutation(a in jet_expr(), k in 1u32..4) {
            for g in [Gen::v(k), Gen::r(k)] {
                let lower = Gen::indexed(g.family().unwrap().0, k - 1);
                let lhs = partial(&d_x(&a), g);
                let rhs = d_x(&partial(&a, g)).add(&partial(&a, lower));
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn u_roundtrip(a in jet_expr()) {
            prop_assert_eq!(from_u_coords(&to_u_coords(&a)), a);
        }
    }
}
