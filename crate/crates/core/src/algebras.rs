//! Products in the function algebra 𝒜, the Lie bracket of vector fields ℒ,
//! the Lie-derivative action of ℒ on λ-forms, the bracket of 𝒟¹ = 𝒜 ⊕ ℒ,
//! and the empirical almost-grading analysis of these operations.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{check_weight, GradedExpansion, LocalSection, MarkedSurface, Section};
use crate::error::Result;
use crate::exact::{int, LaurentSeries, Scalar};

/// `g h` for functions.
#[allow(non_snake_case)]
pub fn mul_A(s: &MarkedSurface, g: &Section, h: &Section) -> Result<Section> {
    check_weight(0, g.weight)?;
    check_weight(0, h.weight)?;
    s.admit(g)?;
    s.admit(h)?;
    Ok(Section::new(0, &g.f * &h.f))
}

/// `[e, f] = e f' - f e'` for vector fields.
#[allow(non_snake_case)]
pub fn bracket_L(s: &MarkedSurface, e: &Section, f: &Section) -> Result<Section> {
    check_weight(-1, e.weight)?;
    check_weight(-1, f.weight)?;
    s.admit(e)?;
    s.admit(f)?;
    let r = &(&e.f * &f.f.derivative(1)) - &(&f.f * &e.f.derivative(1));
    Ok(Section::new(-1, r))
}

/// Lie derivative `e . g = (e g' + λ g e') dz^λ` of a λ-form.
pub fn lie_action(s: &MarkedSurface, e: &Section, g: &Section) -> Result<Section> {
    check_weight(-1, e.weight)?;
    s.admit(e)?;
    s.admit(g)?;
    let lam = int(g.weight as i64);
    let r = &(&e.f * &g.f.derivative(1)) + &(&g.f * &e.f.derivative(1)).scale(&lam);
    Ok(Section::new(g.weight, r))
}

/// Element `(g, e)` of 𝒟¹ with function part `g` and vector field part `e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct D1Element {
    pub func: Section,
    pub vect: Section,
}

impl D1Element {
    pub fn new(func: Section, vect: Section) -> Result<Self> {
        check_weight(0, func.weight)?;
        check_weight(-1, vect.weight)?;
        Ok(D1Element { func, vect })
    }

    pub fn function(g: Section) -> Result<Self> {
        Self::new(g, Section::zero(-1))
    }

    pub fn vector(e: Section) -> Result<Self> {
        Self::new(Section::zero(0), e)
    }

    pub fn is_zero(&self) -> bool {
        self.func.is_zero() && self.vect.is_zero()
    }
}

/// `[(g, e), (h, f)] = (e.h - f.g, [e, f])`.
#[allow(non_snake_case)]
pub fn bracket_D1(s: &MarkedSurface, a: &D1Element, b: &D1Element) -> Result<D1Element> {
    let func = lie_action(s, &a.vect, &b.func)?.sub(&lie_action(s, &b.vect, &a.func)?)?;
    let vect = bracket_L(s, &a.vect, &b.vect)?;
    D1Element::new(func, vect)
}

/// Basis-level operations whose results are expanded through local series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisOp {
    /// `A_{n,p} A_{m,r}` in 𝒜.
    Mul,
    /// `[e_{n,p}, e_{m,r}]` in ℒ.
    Bracket,
    /// `e_{n,p} . f^λ_{m,r}`.
    Action(i32),
}

impl BasisOp {
    /// Weights of the two operands.
    pub fn operand_weights(self) -> (i32, i32) {
        match self {
            BasisOp::Mul => (0, 0),
            BasisOp::Bracket => (-1, -1),
            BasisOp::Action(l) => (-1, l),
        }
    }

    pub fn result_weight(self) -> i32 {
        self.operand_weights().1
    }

    /// Coefficient `κ` of the leading term `δ_p^r κ f_{n+m,r}`.
    pub fn leading_coefficient(self, n: i64, m: i64) -> Scalar {
        match self {
            BasisOp::Mul => int(1),
            BasisOp::Bracket => int(m - n),
            BasisOp::Action(l) => int(m + l as i64 * n),
        }
    }

    pub fn name(self) -> String {
        match self {
            BasisOp::Mul => "mul_A".into(),
            BasisOp::Bracket => "bracket_L".into(),
            BasisOp::Action(l) => format!("lie_action({l})"),
        }
    }
}

/// Expansion of the basis operation applied to `(n, p)` and `(m, r)`,
/// computed from cached local series.
pub fn basis_product(s: &MarkedSurface, op: BasisOp, (n, p): (i64, usize), (m, r): (i64, usize)) -> GradedExpansion {
    let (la, lb) = op.operand_weights();
    let oa = s.prescribe_orders(la, n, p);
    let ob = s.prescribe_orders(lb, m, r);
    let k = s.k();
    let shift = if op == BasisOp::Mul { 0 } else { 1 };
    let ords: Vec<i64> = oa.iter().zip(&ob).map(|(a, b)| a + b - shift).collect();
    let (ord_in, ord_out) = (ords[..k].to_vec(), ords[k..].to_vec());
    let series = move |i: usize, t: i64| -> LaurentSeries {
        let ta = t + 1 - ob[i - 1];
        let tb = t + 1 - oa[i - 1];
        let a = s.basis_series(la, n, p, i, ta);
        let b = s.basis_series(lb, m, r, i, tb);
        match op {
            BasisOp::Mul => a.mul(&b),
            BasisOp::Bracket => a.mul(&b.derivative()).sub(&b.mul(&a.derivative())),
            BasisOp::Action(l) => a.mul(&b.derivative()).add(&b.mul(&a.derivative()).scale(&int(l as i64))),
        }
    };
    let local = LocalSection { weight: op.result_weight(), ord_in, ord_out, series: Box::new(series) };
    s.expand_local(&local)
}

/// Memoized [`basis_product`].
pub fn cached_product(s: &MarkedSurface, op: BasisOp, a: (i64, usize), b: (i64, usize)) -> Arc<GradedExpansion> {
    let (tag, l) = match op {
        BasisOp::Mul => (0, 0),
        BasisOp::Bracket => (1, 0),
        BasisOp::Action(l) => (2, l),
    };
    s.memo_expansion((tag, l, a.0, a.1, b.0, b.1, String::new()), || basis_product(s, op, a, b))
}

/// One operation's observed almost-grading on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradingReport {
    pub operation: String,
    pub window: i64,
    /// Smallest observed `deg - (n + m)` over nonzero results.
    pub lower_shift: i64,
    /// Largest observed `deg - (n + m)`.
    pub upper_shift: i64,
    /// Upper shift observed on the window `W - 1`.
    pub upper_shift_previous: i64,
    pub pairs_checked: usize,
    /// First pair whose degree-`(n+m)` part differs from `δ_p^r δ_r^s κ`.
    pub leading_violation: Option<String>,
}

impl GradingReport {
    pub fn stable(&self) -> bool {
        self.upper_shift == self.upper_shift_previous
    }

    pub fn passed(&self) -> bool {
        self.lower_shift == 0 && self.leading_violation.is_none() && self.stable()
    }
}

/// Grading-relevant summary of one pair.
struct PairObservation {
    min: Option<i64>,
    max: Option<i64>,
    violation: Option<String>,
}

fn observe(s: &MarkedSurface, op: BasisOp, n: i64, p: usize, m: i64, r: usize) -> PairObservation {
    let e = basis_product(s, op, (n, p), (m, r));
    let level = n + m;
    let kappa = op.leading_coefficient(n, m);
    let mut violation = None;
    for t in 1..=s.k() {
        let expected = if p == r && r == t { kappa.clone() } else { int(0) };
        let got = e.get(level, t);
        if got != expected {
            violation = Some(format!(
                "{}: ({n},{p}) x ({m},{r}) has coefficient {} at ({level},{t}), expected {}",
                op.name(),
                crate::exact::format_scalar(&got),
                crate::exact::format_scalar(&expected)
            ));
            break;
        }
    }
    let range = e.degree_range();
    PairObservation { min: range.map(|r| r.0 - level), max: range.map(|r| r.1 - level), violation }
}

fn sweep(s: &MarkedSurface, op: BasisOp, w: i64) -> (Option<i64>, Option<i64>, usize, Option<String>) {
    let k = s.k();
    let pairs: Vec<(i64, usize, i64, usize)> = (-w..=w)
        .flat_map(|n| (1..=k).flat_map(move |p| (-w..=w).flat_map(move |m| (1..=k).map(move |r| (n, p, m, r)))))
        .collect();
    let obs: Vec<PairObservation> = pairs.par_iter().map(|&(n, p, m, r)| observe(s, op, n, p, m, r)).collect();
    let lo = obs.iter().filter_map(|o| o.min).min();
    let hi = obs.iter().filter_map(|o| o.max).max();
    let violation = obs.into_iter().find_map(|o| o.violation);
    (lo, hi, pairs.len(), violation)
}

/// Expands every window pair of basis elements under `op`, recording the
/// degree offsets and checking the leading coefficients. The upper shift is
/// also measured on the window `W - 1` to check stability.
pub fn grading_analysis(s: &MarkedSurface, op: BasisOp, w: i64) -> GradingReport {
    let (lo, hi, count, violation) = sweep(s, op, w);
    let (_, hi_prev, _, _) = sweep(s, op, w - 1);
    GradingReport {
        operation: op.name(),
        window: w,
        lower_shift: lo.unwrap_or(0),
        upper_shift: hi.unwrap_or(0),
        upper_shift_previous: hi_prev.unwrap_or(0),
        pairs_checked: count,
        leading_violation: violation,
    }
}

/// Grading of the 𝒟¹ bracket: the vector-field bracket together with the
/// action of vector fields on functions (function–function brackets vanish).
#[allow(non_snake_case)]
pub fn grading_analysis_D1(s: &MarkedSurface, w: i64) -> GradingReport {
    let a = grading_analysis(s, BasisOp::Bracket, w);
    let b = grading_analysis(s, BasisOp::Action(0), w);
    GradingReport {
        operation: "bracket_D1".into(),
        window: w,
        lower_shift: a.lower_shift.min(b.lower_shift),
        upper_shift: a.upper_shift.max(b.upper_shift),
        upper_shift_previous: a.upper_shift_previous.max(b.upper_shift_previous),
        pairs_checked: a.pairs_checked + b.pairs_checked,
        leading_violation: a.leading_violation.or(b.leading_violation),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::RationalFunction;

    fn sec(l: i32, f: RationalFunction) -> Section {
        Section::new(l, f)
    }

    #[test]
    fn classical_witt_relations() {
        let s = MarkedSurface::classical();
        for n in -3..=3 {
            for m in -3..=3 {
                let e = bracket_L(&s, &s.basis_element(-1, n, 1).unwrap().section, &s.basis_element(-1, m, 1).unwrap().section).unwrap();
                let expected = s.basis_element(-1, n + m, 1).unwrap().section.scale(&int(m - n));
                assert_eq!(e, expected);
                let prod = mul_A(&s, &s.basis_element(0, n, 1).unwrap().section, &s.basis_element(0, m, 1).unwrap().section).unwrap();
                assert_eq!(prod, s.basis_element(0, n + m, 1).unwrap().section);
            }
        }
    }

    #[test]
    fn d1_examples() {
        let s = MarkedSurface::classical();
        let e0 = D1Element::vector(s.basis_element(-1, 0, 1).unwrap().section.clone()).unwrap();
        let zm = D1Element::function(sec(0, RationalFunction::monomial(int(1), 3))).unwrap();
        let r = bracket_D1(&s, &e0, &zm).unwrap();
        assert_eq!(r.func, sec(0, RationalFunction::monomial(int(3), 3)));
        assert!(r.vect.is_zero());
        let g = D1Element::function(sec(0, RationalFunction::z())).unwrap();
        assert!(bracket_D1(&s, &g, &zm).unwrap().is_zero());
    }

    #[test]
    fn fast_products_match_rational_path() {
        let s = MarkedSurface::from_finite(&[int(0), int(1)], &[int(2)]).unwrap();
        for (op, n, p, m, r) in [
            (BasisOp::Mul, 1, 1, -2, 2),
            (BasisOp::Mul, -1, 2, 2, 2),
            (BasisOp::Bracket, 2, 1, -1, 1),
            (BasisOp::Bracket, 0, 2, 1, 1),
            (BasisOp::Action(2), -1, 1, 1, 2),
            (BasisOp::Action(0), 1, 2, -2, 2),
        ] {
            let (la, lb) = op.operand_weights();
            let a = s.basis_element(la, n, p).unwrap().section.clone();
            let b = s.basis_element(lb, m, r).unwrap().section.clone();
            let direct = match op {
                BasisOp::Mul => mul_A(&s, &a, &b),
                BasisOp::Bracket => bracket_L(&s, &a, &b),
                BasisOp::Action(_) => lie_action(&s, &a, &b),
            }
            .unwrap();
            let fast = basis_product(&s, op, (n, p), (m, r));
            assert_eq!(s.expand(&direct).unwrap(), fast, "{op:?} {n} {p} {m} {r}");
            assert_eq!(s.reconstruct(&fast).unwrap(), direct);
        }
    }

    #[test]
    fn classical_grading_is_exact() {
        let s = MarkedSurface::classical();
        let r = grading_analysis(&s, BasisOp::Mul, 3);
        assert_eq!((r.lower_shift, r.upper_shift), (0, 0));
        assert!(r.passed());
    }
}
