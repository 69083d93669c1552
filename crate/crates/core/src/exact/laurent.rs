use std::fmt;

use num_traits::{One, Zero};

use super::poly::Polynomial;
use super::rational::RationalFunction;
use super::scalar::{binomial, int, pow, Scalar};
use crate::error::{KnError, Result};

/// A point of the Riemann sphere.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpherePoint {
    Finite(Scalar),
    Infinity,
}

impl SpherePoint {
    pub fn finite(x: Scalar) -> Self {
        SpherePoint::Finite(x)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<&Scalar> {
        match self {
            SpherePoint::Finite(x) => Some(x),
            SpherePoint::Infinity => None,
        }
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(x) => write!(f, "{}", super::scalar::format_scalar(x)),
            SpherePoint::Infinity => f.write_str("inf"),
        }
    }
}

/// Truncated Laurent series `sum_{k = start}^{trunc} c_k t^k` in a local
/// coordinate; every coefficient up to `trunc` is exact, everything beyond is
/// unknown. Leading zeros are stripped, so `start` is the valuation unless
/// the series is zero to the truncation order (then `coeffs` is empty).
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    anchor: SpherePoint,
    start: i64,
    coeffs: Vec<Scalar>,
    trunc: i64,
}

impl LaurentSeries {
    /// `coeffs[k]` is the coefficient of `t^(start + k)`; the truncation order
    /// is `start + coeffs.len() - 1`.
    pub fn new(anchor: SpherePoint, start: i64, coeffs: Vec<Scalar>) -> Self {
        let trunc = start + coeffs.len() as i64 - 1;
        Self::with_truncation(anchor, start, coeffs, trunc)
    }

    /// Like [`LaurentSeries::new`] but with an explicit truncation; surplus
    /// coefficients are dropped, missing ones are zero.
    pub fn with_truncation(anchor: SpherePoint, start: i64, mut coeffs: Vec<Scalar>, trunc: i64) -> Self {
        let len = (trunc - start + 1).max(0) as usize;
        coeffs.resize(len, Scalar::zero());
        let lead = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(coeffs.len());
        coeffs.drain(..lead);
        let start = start + lead as i64;
        LaurentSeries { anchor, start: start.min(trunc + 1), coeffs, trunc }
    }

    pub fn anchor(&self) -> &SpherePoint {
        &self.anchor
    }

    /// Index of the first nonzero coefficient, `None` if zero to truncation.
    pub fn leading_order(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.start)
        }
    }

    pub fn leading_coefficient(&self) -> Option<&Scalar> {
        self.coeffs.first()
    }

    /// Lower bound for the valuation: the leading order, or `truncation + 1`
    /// for a series that is zero to its truncation.
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn truncation(&self) -> i64 {
        self.trunc
    }

    /// Coefficient of `t^k`. Panics beyond the truncation order.
    pub fn coeff(&self, k: i64) -> Scalar {
        assert!(k <= self.trunc, "coefficient t^{k} requested beyond truncation {}", self.trunc);
        if k < self.start {
            return Scalar::zero();
        }
        self.coeffs[(k - self.start) as usize].clone()
    }

    fn coeff_ref(&self, k: i64) -> Option<&Scalar> {
        if k < self.start || k > self.trunc {
            None
        } else {
            Some(&self.coeffs[(k - self.start) as usize])
        }
    }

    /// Nonzero-range coefficients with their exponents.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.coeffs.iter().enumerate().map(move |(k, c)| (self.start + k as i64, c)).filter(|(_, c)| !c.is_zero())
    }

    pub fn truncate(&self, trunc: i64) -> Self {
        assert!(trunc <= self.trunc, "cannot extend a truncated series");
        let keep = (trunc - self.start + 1).max(0) as usize;
        let coeffs = self.coeffs.iter().take(keep).cloned().collect();
        Self::with_truncation(self.anchor.clone(), self.start, coeffs, trunc)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::with_truncation(self.anchor.clone(), self.start, self.coeffs.iter().map(|a| a * c).collect(), self.trunc)
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let start = self.start.min(other.start);
        let coeffs = (start..=trunc)
            .map(|k| {
                let a = self.coeff_ref(k);
                let b = other.coeff_ref(k);
                match (a, b) {
                    (Some(a), Some(b)) => a + b,
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => Scalar::zero(),
                }
            })
            .collect();
        Self::with_truncation(self.anchor.clone(), start, coeffs, trunc)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Scalar::one()))
    }

    /// Product; the result is exact up to
    /// `min(start_a + trunc_b, start_b + trunc_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let trunc = (self.start + other.trunc).min(other.start + self.trunc);
        let start = self.start + other.start;
        if trunc < start {
            return Self::with_truncation(self.anchor.clone(), start, Vec::new(), trunc);
        }
        let len = (trunc - start + 1) as usize;
        let mut out = vec![Scalar::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                out[i + j] += a * b;
            }
        }
        Self::with_truncation(self.anchor.clone(), start, out, trunc)
    }

    /// Derivative with respect to the local coordinate.
    pub fn derivative(&self) -> Self {
        let coeffs =
            self.coeffs.iter().enumerate().map(|(k, c)| c * int(self.start + k as i64)).collect();
        Self::with_truncation(self.anchor.clone(), self.start - 1, coeffs, self.trunc - 1)
    }

    /// Coefficient of `t^{-1}`.
    pub fn residue(&self) -> Scalar {
        self.coeff(-1)
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.anchor.is_infinity() { "w" } else { "t" };
        let mut parts: Vec<String> =
            self.terms().map(|(k, c)| format!("{}*{var}^{k}", super::scalar::format_scalar(c))).collect();
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{} + O({var}^{}) at {}", parts.join(" + "), self.trunc + 1, self.anchor)
    }
}

/// Power series coefficients of `1 / p(t)` for `p(0) != 0`.
pub(crate) fn series_inverse(p: &[Scalar], count: usize) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let inv0 = p[0].recip();
    out.push(inv0.clone());
    for k in 1..count {
        let mut acc = Scalar::zero();
        for j in 1..=k.min(p.len().saturating_sub(1)) {
            if !p[j].is_zero() {
                acc += &p[j] * &out[k - j];
            }
        }
        out.push(-acc * &inv0);
    }
    out
}

pub(crate) fn series_mul(a: &[Scalar], b: &[Scalar], count: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); count];
    for (i, x) in a.iter().enumerate().take(count) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(count - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `(a + t)^k` as a power series in `t` for `a != 0`.
pub(crate) fn shifted_power_series(a: &Scalar, k: i64, count: usize) -> Vec<Scalar> {
    let inv = a.recip();
    let mut out = Vec::with_capacity(count);
    let mut apow = pow(a, k);
    for j in 0..count {
        out.push(binomial(k, j) * &apow);
        apow *= &inv;
    }
    out
}

/// Laurent expansion of `f` at `p` up to and including `t^upto`, in the local
/// coordinate `t = z - z0` (finite point) or `w = 1/z` (infinity).
pub fn expand_at(f: &RationalFunction, p: &SpherePoint, upto: i64) -> LaurentSeries {
    if f.is_zero() {
        return LaurentSeries::with_truncation(p.clone(), upto + 1, Vec::new(), upto);
    }
    match p {
        SpherePoint::Finite(x) => expand_finite(f, x, upto),
        SpherePoint::Infinity => expand_infinity(f, upto),
    }
}

fn expand_finite(f: &RationalFunction, x: &Scalar, upto: i64) -> LaurentSeries {
    let anchor = SpherePoint::Finite(x.clone());
    let (cof, hidden) = f.cofactor().strip_root(x);
    let mut mx = hidden as i64;
    for (y, m) in f.poles() {
        if y == x {
            mx += *m as i64;
        }
    }
    // f = t^{-mx} g(t) with g regular at 0; need g up to t^{upto + mx}.
    let count = upto + mx + 1;
    if count <= 0 {
        return LaurentSeries::with_truncation(anchor, upto + 1, Vec::new(), upto);
    }
    let count = count as usize;
    let mut g = f.numerator().taylor_at(x, count);
    for (y, m) in f.poles() {
        if y != x {
            let s = shifted_power_series(&(x - y), -(*m as i64), count);
            g = series_mul(&g, &s, count);
        }
    }
    if !cof.is_constant() {
        let inv = series_inverse(&cof.taylor_at(x, count), count);
        g = series_mul(&g, &inv, count);
    } else if !cof.coeff(0).is_one() {
        let c = cof.coeff(0).recip();
        g.iter_mut().for_each(|v| *v *= &c);
    }
    LaurentSeries::with_truncation(anchor, -mx, g, upto)
}

fn expand_infinity(f: &RationalFunction, upto: i64) -> LaurentSeries {
    // z = 1/w:  num(1/w) = w^{-dn} rev_num(w),  cof(1/w) = w^{-dc} rev_cof(w),
    // (1/w - y)^m = w^{-m} (1 - y w)^m.
    let anchor = SpherePoint::Infinity;
    let order = f.order_at_infinity().expect("nonzero");
    let count = upto - order + 1;
    if count <= 0 {
        return LaurentSeries::with_truncation(anchor, upto + 1, Vec::new(), upto);
    }
    let count = count as usize;
    let mut g: Vec<Scalar> = f.numerator().reversed().coeffs().to_vec();
    g.resize(count, Scalar::zero());
    g.truncate(count);
    for (y, m) in f.poles() {
        if !y.is_zero() {
            g = series_mul(&g, &binomial_series_one_minus(y, -(*m as i64), count), count);
        }
    }
    let cof = f.cofactor();
    if !cof.is_constant() {
        let inv = series_inverse(cof.reversed().coeffs(), count);
        g = series_mul(&g, &inv, count);
    }
    LaurentSeries::with_truncation(anchor, order, g, upto)
}

/// Coefficients of `(1 - y w)^k`.
fn binomial_series_one_minus(y: &Scalar, k: i64, count: usize) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(count);
    let mut ypow = Scalar::one();
    let neg_y = -y.clone();
    for j in 0..count {
        out.push(binomial(k, j) * &ypow);
        ypow *= &neg_y;
    }
    out
}

/// Vanishing order of a nonzero function at `p` (negative for poles).
pub fn order_at(f: &RationalFunction, p: &SpherePoint) -> Result<i64> {
    match p {
        SpherePoint::Finite(x) => f.order_at_finite(x),
        SpherePoint::Infinity => f.order_at_infinity(),
    }
    .ok_or(KnError::ZeroFunction)
}

/// Residue of the 1-form `f dz` at `p`. At infinity the chart change
/// `dz = -w^{-2} dw` is applied, so the residues of any `f` sum to zero.
pub fn residue_form(f: &RationalFunction, p: &SpherePoint) -> Scalar {
    match p {
        SpherePoint::Finite(_) => expand_at(f, p, -1).coeff(-1),
        SpherePoint::Infinity => -expand_at(f, p, 1).coeff(1),
    }
}

/// `k`-th derivative with respect to `z`.
pub fn derivative(f: &RationalFunction, k: u32) -> RationalFunction {
    f.derivative(k)
}

/// Evaluates the polynomial part of a truncated series at `t` (used to check
/// expansions against direct evaluation).
pub fn eval_truncated(s: &LaurentSeries, t: &Scalar) -> Scalar {
    s.terms().fold(Scalar::zero(), |acc, (k, c)| acc + c * pow(t, k))
}

/// The rational function `z - x`, used when building local coordinates.
pub fn local_coordinate(x: &Scalar) -> RationalFunction {
    RationalFunction::from_poly(Polynomial::linear_root(x))
}
