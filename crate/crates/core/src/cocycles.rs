//! Geometric 2-cocycles on functions, vector fields and 𝒟¹, evaluated as
//! residue sums over the in-points of a cycle.
//!
//! The integral over the separating cycle is *defined* as the sum of
//! residues over all in-points, so no transcendental constants occur. The
//! connections default to `R = 0` and `T = 0` in the affine chart.

use num_traits::Zero;
use rayon::prelude::*;

use crate::algebras::{cached_product, BasisOp, D1Element};
use crate::basis::{check_weight, GradedExpansion, MarkedSurface, Section};
use crate::error::{KnError, Result};
use crate::exact::{expand_at, int, ratio, residue_form, LaurentSeries, RationalFunction, Scalar, SpherePoint};

/// Integration cycle: all in-points (the separating cycle) or a small circle
/// around a single in-point `P_i` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cycle {
    Separating,
    PerPoint(usize),
}

impl Cycle {
    pub fn points(self, s: &MarkedSurface) -> Result<Vec<usize>> {
        match self {
            Cycle::Separating => Ok((1..=s.k()).collect()),
            Cycle::PerPoint(i) => {
                s.check_point(i)?;
                Ok(vec![i])
            }
        }
    }

    fn code(self) -> usize {
        match self {
            Cycle::Separating => 0,
            Cycle::PerPoint(i) => i,
        }
    }
}

/// Projective connection `R` and affine connection `T` in the affine chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionChoice {
    pub r: RationalFunction,
    pub t: RationalFunction,
}

impl Default for ConnectionChoice {
    fn default() -> Self {
        ConnectionChoice { r: RationalFunction::zero(), t: RationalFunction::zero() }
    }
}

impl ConnectionChoice {
    pub fn projective(r: RationalFunction) -> Self {
        ConnectionChoice { r, ..Default::default() }
    }

    pub fn affine(t: RationalFunction) -> Self {
        ConnectionChoice { t, ..Default::default() }
    }

    /// Connections may only have poles at marked points.
    pub fn validate(&self, s: &MarkedSurface) -> Result<()> {
        s.admit(&Section::new(0, self.r.clone()))?;
        s.admit(&Section::new(0, self.t.clone()))
    }
}

fn cycle_residue(s: &MarkedSurface, c: Cycle, f: &RationalFunction) -> Result<Scalar> {
    Ok(c.points(s)?
        .into_iter()
        .map(|i| residue_form(f, &SpherePoint::Finite(s.in_point(i).clone())))
        .sum())
}

/// `γ^f_C(g, h) = ∮_C g dh`.
pub fn cocycle_f(s: &MarkedSurface, c: Cycle, g: &Section, h: &Section) -> Result<Scalar> {
    check_weight(0, g.weight)?;
    check_weight(0, h.weight)?;
    s.admit(g)?;
    s.admit(h)?;
    cycle_residue(s, c, &(&g.f * &h.f.derivative(1)))
}

/// `γ^v_{C,R}(e, f) = ∮_C ½(e'''f - e f''') - R (e'f - e f')`.
pub fn cocycle_v(s: &MarkedSurface, c: Cycle, r: &RationalFunction, e: &Section, f: &Section) -> Result<Scalar> {
    check_weight(-1, e.weight)?;
    check_weight(-1, f.weight)?;
    s.admit(e)?;
    s.admit(f)?;
    let (e, f) = (&e.f, &f.f);
    let third = &(&e.derivative(3) * f) - &(e * &f.derivative(3));
    let first = &(&e.derivative(1) * f) - &(e * &f.derivative(1));
    let integrand = &third.scale(&ratio(1, 2)) - &(r * &first);
    cycle_residue(s, c, &integrand)
}

/// `γ^m_{C,T}(e, g) = ∮_C e g'' + T e g'` (vector field first).
pub fn cocycle_m(s: &MarkedSurface, c: Cycle, t: &RationalFunction, e: &Section, g: &Section) -> Result<Scalar> {
    check_weight(-1, e.weight)?;
    check_weight(0, g.weight)?;
    s.admit(e)?;
    s.admit(g)?;
    let integrand = &(&e.f * &g.f.derivative(2)) + &(&(t * &e.f) * &g.f.derivative(1));
    cycle_residue(s, c, &integrand)
}

/// Local series of a connection at `P_i`, or `None` when it vanishes.
fn connection_series(s: &MarkedSurface, c: &RationalFunction, i: usize, trunc: i64) -> Option<LaurentSeries> {
    if c.is_zero() {
        None
    } else {
        Some(expand_at(c, &SpherePoint::Finite(s.in_point(i).clone()), trunc))
    }
}

fn connection_order(s: &MarkedSurface, c: &RationalFunction, i: usize) -> i64 {
    c.order_at_finite(s.in_point(i)).unwrap_or(0)
}

/// Which basic geometric cocycle to evaluate on basis pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    F,
    V,
    M,
}

fn basis_value(
    s: &MarkedSurface,
    kind: Kind,
    c: Cycle,
    conn: &RationalFunction,
    (n, p): (i64, usize),
    (m, r): (i64, usize),
) -> Result<Scalar> {
    s.check_point(p)?;
    s.check_point(r)?;
    let points = c.points(s)?;
    let (la, lb) = match kind {
        Kind::F => (0, 0),
        Kind::V => (-1, -1),
        Kind::M => (-1, 0),
    };
    let key = (
        3 + kind as u8,
        c.code() as i32,
        n,
        p,
        m,
        r,
        if kind == Kind::F { String::new() } else { conn.to_text() },
    );
    Ok(s.memo_value(key, || {
        let mut acc = Scalar::zero();
        for i in points {
            let oa = s.prescribe_orders(la, n, p)[i - 1];
            let ob = s.prescribe_orders(lb, m, r)[i - 1];
            let oc = if conn.is_zero() || kind == Kind::F { 0 } else { connection_order(s, conn, i) };
            let extra = (-oc).max(0);
            let a = s.basis_series(la, n, p, i, 2 - ob + extra);
            let b = s.basis_series(lb, m, r, i, 2 - oa + extra);
            let cs = if kind == Kind::F { None } else { connection_series(s, conn, i, 2 - oa - ob) };
            let integrand = match kind {
                Kind::F => a.mul(&b.derivative()),
                Kind::V => {
                    let (a1, b1) = (a.derivative(), b.derivative());
                    let third = a1.derivative().derivative().mul(&b).sub(&a.mul(&b1.derivative().derivative()));
                    let mut total = third.scale(&ratio(1, 2));
                    if let Some(cs) = &cs {
                        total = total.sub(&cs.mul(&a1.mul(&b).sub(&a.mul(&b1))));
                    }
                    total
                }
                Kind::M => {
                    let b1 = b.derivative();
                    let mut total = a.mul(&b1.derivative());
                    if let Some(cs) = &cs {
                        total = total.add(&cs.mul(&a.mul(&b1)));
                    }
                    total
                }
            };
            acc += integrand.coeff(-1);
        }
        acc
    }))
}

/// `γ^f_C(A_{n,p}, A_{m,r})` from cached local series.
pub fn gamma_f_basis(s: &MarkedSurface, c: Cycle, a: (i64, usize), b: (i64, usize)) -> Result<Scalar> {
    basis_value(s, Kind::F, c, &RationalFunction::zero(), a, b)
}

/// `γ^v_{C,R}(e_{n,p}, e_{m,r})` from cached local series.
pub fn gamma_v_basis(s: &MarkedSurface, c: Cycle, r: &RationalFunction, a: (i64, usize), b: (i64, usize)) -> Result<Scalar> {
    basis_value(s, Kind::V, c, r, a, b)
}

/// `γ^m_{C,T}(e_{n,p}, A_{m,r})` from cached local series.
pub fn gamma_m_basis(s: &MarkedSurface, c: Cycle, t: &RationalFunction, e: (i64, usize), g: (i64, usize)) -> Result<Scalar> {
    basis_value(s, Kind::M, c, t, e, g)
}

/// The assembled cocycle `r1 γ^f + r2 γ^m + r3 γ^v` on 𝒟¹ over the separating
/// cycle; each part is extended by zero on the complementary summand and the
/// mixing part is antisymmetrized, `γ(g, e) = -γ(e, g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct D1Cocycle {
    pub r1: Scalar,
    pub r2: Scalar,
    pub r3: Scalar,
    pub connections: ConnectionChoice,
}

/// Builds the assembled 𝒟¹ cocycle.
#[allow(non_snake_case)]
pub fn cocycle_D1(r1: Scalar, r2: Scalar, r3: Scalar, connections: ConnectionChoice) -> D1Cocycle {
    D1Cocycle { r1, r2, r3, connections }
}

/// The λ-weighted combination
/// `γ_λ = -(γ^f + (1-2λ)/2 γ^m + 2(6λ²-6λ+1) γ^v)` with `R = T = 0`.
pub fn gamma_lambda(lambda: i64) -> D1Cocycle {
    let r2 = ratio(1 - 2 * lambda, 2);
    let r3 = int(2 * (6 * lambda * lambda - 6 * lambda + 1));
    cocycle_D1(int(-1), -r2, -r3, ConnectionChoice::default())
}

impl D1Cocycle {
    /// Evaluation on 𝒟¹ elements through the rational-function path.
    pub fn eval(&self, s: &MarkedSurface, a: &D1Element, b: &D1Element) -> Result<Scalar> {
        let c = Cycle::Separating;
        let mut v = Scalar::zero();
        if !self.r1.is_zero() {
            v += &self.r1 * cocycle_f(s, c, &a.func, &b.func)?;
        }
        if !self.r2.is_zero() {
            let t = &self.connections.t;
            v += &self.r2 * (cocycle_m(s, c, t, &a.vect, &b.func)? - cocycle_m(s, c, t, &b.vect, &a.func)?);
        }
        if !self.r3.is_zero() {
            v += &self.r3 * cocycle_v(s, c, &self.connections.r, &a.vect, &b.vect)?;
        }
        Ok(v)
    }
}

/// Outcome of checking an identity over a family of window samples.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CheckReport {
    pub name: String,
    pub checked: usize,
    /// Samples that could not be evaluated (e.g. outside a user table).
    pub skipped: usize,
    pub violation: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.checked > 0
    }
}

/// A bilinear functional on the function algebra given on basis pairs.
pub type FunctionForm<'a> = dyn Fn((i64, usize), (i64, usize)) -> Result<Scalar> + Sync + 'a;

/// Applies a form bilinearly to two expansions.
pub fn eval_on_expansions(form: &FunctionForm<'_>, a: &GradedExpansion, b: &GradedExpansion) -> Result<Scalar> {
    let mut acc = Scalar::zero();
    for ((n, p), x) in &a.entries {
        for ((m, r), y) in &b.entries {
            let v = form((*n, *p), (*m, *r))?;
            if !v.is_zero() {
                acc += x * y * v;
            }
        }
    }
    Ok(acc)
}

fn function_window(s: &MarkedSurface, w: i64) -> Vec<(i64, usize)> {
    (-w..=w).flat_map(|n| (1..=s.k()).map(move |p| (n, p))).collect()
}

fn collect_report(name: &str, results: Vec<Result<Option<String>>>) -> CheckReport {
    let mut report = CheckReport { name: name.into(), ..Default::default() };
    for r in results {
        match r {
            Ok(None) => report.checked += 1,
            Ok(Some(msg)) => {
                report.checked += 1;
                if report.violation.is_none() {
                    report.violation = Some(msg);
                }
            }
            Err(KnError::OutsideWindow(_)) => report.skipped += 1,
            Err(e) => {
                if report.violation.is_none() {
                    report.violation = Some(format!("evaluation error: {e}"));
                }
            }
        }
    }
    report
}

/// `γ(fg, h) + γ(gh, f) + γ(hf, g) = 0` on all window triples of functions.
pub fn check_multiplicative(s: &MarkedSurface, form: &FunctionForm<'_>, w: i64) -> CheckReport {
    let basis = function_window(s, w);
    let mut triples = Vec::new();
    for i in 0..basis.len() {
        for j in i..basis.len() {
            for k in j..basis.len() {
                triples.push((basis[i], basis[j], basis[k]));
            }
        }
    }
    let results: Vec<Result<Option<String>>> = triples
        .par_iter()
        .map(|&(f, g, h)| {
            let fg = cached_product(s, BasisOp::Mul, f, g);
            let gh = cached_product(s, BasisOp::Mul, g, h);
            let hf = cached_product(s, BasisOp::Mul, h, f);
            let v = eval_on_expansions(form, &fg, &GradedExpansion::single(0, h.0, h.1))?
                + eval_on_expansions(form, &gh, &GradedExpansion::single(0, f.0, f.1))?
                + eval_on_expansions(form, &hf, &GradedExpansion::single(0, g.0, g.1))?;
            Ok((!v.is_zero()).then(|| format!("multiplicativity fails on A{f:?}, A{g:?}, A{h:?}: {v}")))
        })
        .collect();
    collect_report("multiplicative", results)
}

/// `γ(e.g, h) + γ(g, e.h) = 0` for window vector fields `e` and functions `g, h`.
#[allow(non_snake_case)]
pub fn check_L_invariant(s: &MarkedSurface, form: &FunctionForm<'_>, w: i64) -> CheckReport {
    let basis = function_window(s, w);
    let mut samples = Vec::new();
    for &e in &basis {
        for i in 0..basis.len() {
            for j in i..basis.len() {
                samples.push((e, basis[i], basis[j]));
            }
        }
    }
    let results: Vec<Result<Option<String>>> = samples
        .par_iter()
        .map(|&(e, g, h)| {
            let eg = cached_product(s, BasisOp::Action(0), e, g);
            let eh = cached_product(s, BasisOp::Action(0), e, h);
            let v = eval_on_expansions(form, &eg, &GradedExpansion::single(0, h.0, h.1))?
                + eval_on_expansions(form, &GradedExpansion::single(0, g.0, g.1), &eh)?;
            Ok((!v.is_zero()).then(|| format!("L-invariance fails on e{e:?}, A{g:?}, A{h:?}: {v}")))
        })
        .collect();
    collect_report("L-invariant", results)
}
