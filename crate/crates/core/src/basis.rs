//! The marked sphere, its almost-graded basis `f^λ_{n,p}` of λ-forms, the
//! residue pairing between complementary weights and expansions of sections
//! in the basis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

use crate::error::{KnError, Result};
use crate::exact::laurent::shifted_power_series;
use crate::exact::scalar::pow;
use crate::exact::{expand_at, residue_form, LaurentSeries, RationalFunction, Scalar, SpherePoint};

/// A λ-form `f(z) (dz)^λ` on the sphere, stored through its affine-chart
/// representative `f`.
#[derive(Clone, PartialEq, Eq)]
pub struct Section {
    pub weight: i32,
    pub f: RationalFunction,
}

impl Section {
    pub fn new(weight: i32, f: RationalFunction) -> Self {
        Section { weight, f }
    }

    pub fn zero(weight: i32) -> Self {
        Section { weight, f: RationalFunction::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero()
    }

    /// Order of the section at `p`. At infinity the chart change contributes
    /// `(dz)^λ = (-1)^λ w^{-2λ} (dw)^λ`.
    pub fn order_at(&self, p: &SpherePoint) -> Result<i64> {
        let o = crate::exact::order_at(&self.f, p)?;
        Ok(if p.is_infinity() { o - 2 * self.weight as i64 } else { o })
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        check_weight(self.weight, other.weight)?;
        Ok(Section::new(self.weight, &self.f + &other.f))
    }

    pub fn sub(&self, other: &Section) -> Result<Section> {
        check_weight(self.weight, other.weight)?;
        Ok(Section::new(self.weight, &self.f - &other.f))
    }

    pub fn scale(&self, c: &Scalar) -> Section {
        Section::new(self.weight, self.f.scale(c))
    }
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.weight {
            0 => write!(f, "{}", self.f),
            1 => write!(f, "({}) dz", self.f),
            -1 => write!(f, "({}) d/dz", self.f),
            w => write!(f, "({}) dz^{w}", self.f),
        }
    }
}

pub(crate) fn check_weight(expected: i32, found: i32) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(KnError::WeightMismatch { expected, found })
    }
}

/// The basis element `f^λ_{n,p}` together with its section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub lambda: i32,
    pub n: i64,
    pub p: usize,
    pub section: Section,
}

/// Finite table `(n, p) -> coefficient` of a section in the basis of weight λ.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GradedExpansion {
    pub lambda: i32,
    pub entries: BTreeMap<(i64, usize), Scalar>,
}

impl GradedExpansion {
    pub fn new(lambda: i32) -> Self {
        GradedExpansion { lambda, entries: BTreeMap::new() }
    }

    pub fn single(lambda: i32, n: i64, p: usize) -> Self {
        let mut e = Self::new(lambda);
        e.entries.insert((n, p), Scalar::one());
        e
    }

    pub fn get(&self, n: i64, p: usize) -> Scalar {
        self.entries.get(&(n, p)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest and largest degree with a nonzero entry.
    pub fn degree_range(&self) -> Option<(i64, i64)> {
        let lo = self.entries.keys().map(|k| k.0).min()?;
        let hi = self.entries.keys().map(|k| k.0).max()?;
        Some((lo, hi))
    }

    pub fn add_term(&mut self, n: i64, p: usize, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.entries.entry((n, p)).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            self.entries.remove(&(n, p));
        }
    }

    pub fn add_scaled(&mut self, other: &GradedExpansion, c: &Scalar) {
        for ((n, p), v) in &other.entries {
            self.add_term(*n, *p, &(v * c));
        }
    }

    pub fn scale(&self, c: &Scalar) -> GradedExpansion {
        let mut out = GradedExpansion::new(self.lambda);
        out.add_scaled(self, c);
        out
    }
}

/// Orders bounds and local data describing a section whose Laurent series at
/// the in-points can be produced on demand. Used to expand products of basis
/// elements without forming the rational function.
pub struct LocalSection<'a> {
    pub weight: i32,
    /// Lower bounds for the order at each in-point `P_1..P_K`.
    pub ord_in: Vec<i64>,
    /// Lower bounds for the order at each out-point (the last is infinity).
    pub ord_out: Vec<i64>,
    /// `series(i, trunc)`: Laurent series at `P_i` (1-based) exact at least up
    /// to `t^trunc`.
    pub series: Box<dyn Fn(usize, i64) -> LaurentSeries + Send + Sync + 'a>,
}

type BasisKey = (i32, i64, usize);
type SeriesKey = (i32, i64, usize, usize);
/// Opaque memo key for derived per-surface tables (products, cocycle values).
pub(crate) type MemoKey = (u8, i32, i64, usize, i64, usize, String);

struct SurfaceInner {
    in_points: Vec<Scalar>,
    out_points: Vec<SpherePoint>,
    basis: RwLock<HashMap<BasisKey, Arc<BasisElement>>>,
    series: RwLock<HashMap<SeriesKey, Arc<LaurentSeries>>>,
    expansions: RwLock<HashMap<MemoKey, Arc<GradedExpansion>>>,
    values: RwLock<HashMap<MemoKey, Scalar>>,
}

/// The sphere with in-points `I = (P_1..P_K)` (finite) and out-points
/// `O = (Q_1..Q_{N-K})` whose last entry is infinity.
///
/// Clones share the basis caches.
#[derive(Clone)]
pub struct MarkedSurface(Arc<SurfaceInner>);

impl fmt::Debug for MarkedSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i: Vec<String> = self.0.in_points.iter().map(crate::exact::format_scalar).collect();
        let o: Vec<String> = self.0.out_points.iter().map(|p| p.to_string()).collect();
        write!(f, "I=[{}], O=[{}]", i.join(","), o.join(","))
    }
}

impl PartialEq for MarkedSurface {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.in_points == other.0.in_points && self.0.out_points == other.0.out_points)
    }
}

impl Eq for MarkedSurface {}

/// Validates the marked points and builds the surface; see
/// [`MarkedSurface::new`] for the requirements.
pub fn make_surface(in_points: Vec<SpherePoint>, out_points: Vec<SpherePoint>) -> Result<MarkedSurface> {
    MarkedSurface::new(in_points, out_points)
}

impl MarkedSurface {
    /// Requirements: `I` nonempty and finite, `O` nonempty ending in infinity
    /// (all other out-points finite), all points distinct, and `N <= 2K`.
    ///
    /// The last condition is what makes the basis span: with `s = 2K + 1 - N`
    /// the order of `f^λ_{n,p}` at infinity grows like `-n s`, and for `s <= 0`
    /// some sections (e.g. the constant 1 for `K = 1, N = 3`) pair nontrivially
    /// with infinitely many dual elements.
    pub fn new(in_points: Vec<SpherePoint>, out_points: Vec<SpherePoint>) -> Result<Self> {
        if in_points.is_empty() {
            return Err(KnError::InvalidSurface("no in-points".into()));
        }
        if out_points.is_empty() {
            return Err(KnError::InvalidSurface("no out-points".into()));
        }
        let mut ins = Vec::with_capacity(in_points.len());
        for p in in_points {
            match p {
                SpherePoint::Finite(x) => ins.push(x),
                SpherePoint::Infinity => {
                    return Err(KnError::InvalidSurface("in-points must be finite".into()));
                }
            }
        }
        if !out_points.last().is_some_and(SpherePoint::is_infinity) {
            return Err(KnError::InvalidSurface("the last out-point must be infinity".into()));
        }
        if out_points[..out_points.len() - 1].iter().any(SpherePoint::is_infinity) {
            return Err(KnError::InvalidSurface("infinity may only appear as the last out-point".into()));
        }
        let mut all: Vec<SpherePoint> = ins.iter().cloned().map(SpherePoint::Finite).collect();
        all.extend(out_points.iter().cloned());
        for (a, p) in all.iter().enumerate() {
            if all[..a].contains(p) {
                return Err(KnError::InvalidSurface(format!("duplicate point {p}")));
            }
        }
        let (k, n) = (ins.len(), all.len());
        if n > 2 * k {
            return Err(KnError::InvalidSurface(format!(
                "{n} marked points with {k} in-points: the basis only spans when N <= 2K"
            )));
        }
        Ok(MarkedSurface(Arc::new(SurfaceInner {
            in_points: ins,
            out_points,
            basis: RwLock::new(HashMap::new()),
            series: RwLock::new(HashMap::new()),
            expansions: RwLock::new(HashMap::new()),
            values: RwLock::new(HashMap::new()),
        })))
    }

    /// The classical surface `I = [0]`, `O = [∞]`.
    pub fn classical() -> Self {
        Self::from_finite(&[Scalar::zero()], &[]).expect("valid")
    }

    /// Convenience constructor: finite in-points and finite out-points; infinity
    /// is appended to the out-points.
    pub fn from_finite(in_points: &[Scalar], finite_out: &[Scalar]) -> Result<Self> {
        let mut out: Vec<SpherePoint> = finite_out.iter().cloned().map(SpherePoint::Finite).collect();
        out.push(SpherePoint::Infinity);
        Self::new(in_points.iter().cloned().map(SpherePoint::Finite).collect(), out)
    }

    pub fn k(&self) -> usize {
        self.0.in_points.len()
    }

    /// Total number of marked points.
    pub fn n_points(&self) -> usize {
        self.0.in_points.len() + self.0.out_points.len()
    }

    /// `2K + 1 - N`, the growth rate of the order at infinity per degree.
    pub fn slope(&self) -> i64 {
        2 * self.k() as i64 + 1 - self.n_points() as i64
    }

    pub fn in_points(&self) -> &[Scalar] {
        &self.0.in_points
    }

    /// `P_i` for `1 <= i <= K`.
    pub fn in_point(&self, i: usize) -> &Scalar {
        &self.0.in_points[i - 1]
    }

    pub fn out_points(&self) -> &[SpherePoint] {
        &self.0.out_points
    }

    /// All marked points, in-points first.
    pub fn points(&self) -> Vec<SpherePoint> {
        let mut all: Vec<SpherePoint> = self.0.in_points.iter().cloned().map(SpherePoint::Finite).collect();
        all.extend(self.0.out_points.iter().cloned());
        all
    }

    pub fn is_classical(&self) -> bool {
        self.n_points() == 2
    }

    pub fn check_point(&self, p: usize) -> Result<()> {
        if (1..=self.k()).contains(&p) {
            Ok(())
        } else {
            Err(KnError::PointIndex { index: p, max: self.k() })
        }
    }

    /// Orders of `f^λ_{n,p}` at all `N` marked points (in-points first).
    ///
    /// In-points get `(n+1-λ) - δ_i^p`; finite out-points get `-(n+1-λ)`; the
    /// point at infinity takes the balance so the total is `-2λ`.
    pub fn prescribe_orders(&self, lambda: i32, n: i64, p: usize) -> Vec<i64> {
        let a = n + 1 - lambda as i64;
        let k = self.k();
        let mut out = Vec::with_capacity(self.n_points());
        for i in 1..=k {
            out.push(if i == p { a - 1 } else { a });
        }
        let finite_out = self.0.out_points.len() - 1;
        out.extend(std::iter::repeat(-a).take(finite_out));
        let sum: i64 = out.iter().sum();
        out.push(-2 * lambda as i64 - sum);
        out
    }

    /// The finite points with their prescribed exponents.
    fn finite_exponents(&self, lambda: i32, n: i64, p: usize) -> Vec<(Scalar, i64)> {
        let orders = self.prescribe_orders(lambda, n, p);
        self.points()
            .into_iter()
            .zip(orders)
            .filter_map(|(pt, o)| pt.as_finite().map(|x| (x.clone(), o)))
            .collect()
    }

    /// Normalizing constant making the leading coefficient at `P_p` equal 1.
    fn basis_constant(&self, exps: &[(Scalar, i64)], p: usize) -> Scalar {
        let pp = self.in_point(p);
        exps.iter()
            .filter(|(x, _)| x != pp)
            .fold(Scalar::one(), |acc, (x, k)| acc * pow(&(pp - x), -k))
    }

    /// `f^λ_{n,p}`: the unique λ-form with exactly the prescribed orders,
    /// normalized to `z_p^{n-λ}(1 + O(z_p))` at `P_p`. Memoized.
    pub fn basis_element(&self, lambda: i32, n: i64, p: usize) -> Result<Arc<BasisElement>> {
        self.check_point(p)?;
        let key = (lambda, n, p);
        if let Some(b) = self.0.basis.read().expect("basis cache").get(&key) {
            return Ok(b.clone());
        }
        let exps = self.finite_exponents(lambda, n, p);
        let c = self.basis_constant(&exps, p);
        let f = RationalFunction::from_root_powers(c, &exps);
        let elem = Arc::new(BasisElement { lambda, n, p, section: Section::new(lambda, f) });
        self.0.basis.write().expect("basis cache").insert(key, elem.clone());
        Ok(elem)
    }

    /// Laurent series of `f^λ_{n,p}` at `P_i` in `t = z - P_i`, exact at least
    /// up to `t^trunc`. Computed from the product formula and cached.
    pub fn basis_series(&self, lambda: i32, n: i64, p: usize, i: usize, trunc: i64) -> Arc<LaurentSeries> {
        let key = (lambda, n, p, i);
        if let Some(s) = self.0.series.read().expect("series cache").get(&key) {
            if s.truncation() >= trunc {
                return s.clone();
            }
        }
        // Grow in steps to amortize repeated requests.
        let trunc = trunc + 4;
        let exps = self.finite_exponents(lambda, n, p);
        let c = self.basis_constant(&exps, p);
        let pi = self.in_point(i).clone();
        let own = exps.iter().find(|(x, _)| *x == pi).map_or(0, |e| e.1);
        let count = (trunc - own + 1).max(0) as usize;
        let mut g = vec![Scalar::zero(); count];
        if count > 0 {
            g[0] = c;
        }
        for (x, k) in &exps {
            if *x == pi || *k == 0 {
                continue;
            }
            let s = shifted_power_series(&(&pi - x), *k, count);
            g = crate::exact::laurent::series_mul(&g, &s, count);
        }
        let series = Arc::new(LaurentSeries::with_truncation(SpherePoint::Finite(pi), own, g, trunc));
        self.0.series.write().expect("series cache").insert(key, series.clone());
        series
    }

    /// Memoized expansion table shared by all clones of the surface. Fills are
    /// idempotent, so concurrent duplicate computation is harmless.
    pub(crate) fn memo_expansion(&self, key: MemoKey, compute: impl FnOnce() -> GradedExpansion) -> Arc<GradedExpansion> {
        if let Some(e) = self.0.expansions.read().expect("expansion cache").get(&key) {
            return e.clone();
        }
        let e = Arc::new(compute());
        self.0.expansions.write().expect("expansion cache").insert(key, e.clone());
        e
    }

    /// Memoized scalar table (cocycle values on basis pairs).
    pub(crate) fn memo_value(&self, key: MemoKey, compute: impl FnOnce() -> Scalar) -> Scalar {
        if let Some(v) = self.0.values.read().expect("value cache").get(&key) {
            return v.clone();
        }
        let v = compute();
        self.0.values.write().expect("value cache").insert(key, v.clone());
        v
    }

    /// Checks that the poles of `sec` lie at marked points.
    pub fn admit(&self, sec: &Section) -> Result<()> {
        let f = &sec.f;
        if f.is_zero() {
            return Ok(());
        }
        let mut cof = f.cofactor().clone();
        for x in &self.0.in_points {
            cof = cof.strip_root(x).0;
        }
        for q in &self.0.out_points {
            if let SpherePoint::Finite(x) = q {
                cof = cof.strip_root(x).0;
            }
        }
        if !cof.is_constant() {
            return Err(KnError::Inadmissible(format!("{f} has poles away from the marked points")));
        }
        for (x, _) in f.poles() {
            let marked = self.0.in_points.contains(x) || self.0.out_points.contains(&SpherePoint::Finite(x.clone()));
            if !marked {
                return Err(KnError::Inadmissible(format!("pole at {} is not a marked point", crate::exact::format_scalar(x))));
            }
        }
        Ok(())
    }

    /// The pairing `<f, g> = sum_{P in I} res_P(f g dz)` for weights adding
    /// to 1.
    pub fn kn_pairing(&self, f: &Section, g: &Section) -> Result<Scalar> {
        check_weight(1 - f.weight, g.weight)?;
        self.admit(f)?;
        self.admit(g)?;
        let prod = &f.f * &g.f;
        Ok(self
            .0
            .in_points
            .iter()
            .map(|x| residue_form(&prod, &SpherePoint::Finite(x.clone())))
            .sum())
    }

    /// Expansion of an admissible section in the basis of its weight.
    pub fn expand(&self, sec: &Section) -> Result<GradedExpansion> {
        self.admit(sec)?;
        if sec.is_zero() {
            return Ok(GradedExpansion::new(sec.weight));
        }
        let ord_in = self.0.in_points.iter().map(|x| sec.order_at(&SpherePoint::Finite(x.clone()))).collect::<Result<_>>()?;
        let ord_out = self.0.out_points.iter().map(|q| sec.order_at(q)).collect::<Result<_>>()?;
        let f = sec.f.clone();
        let pts = self.0.in_points.clone();
        let local = LocalSection {
            weight: sec.weight,
            ord_in,
            ord_out,
            series: Box::new(move |i, t| expand_at(&f, &SpherePoint::Finite(pts[i - 1].clone()), t)),
        };
        Ok(self.expand_local(&local))
    }

    /// Degrees `[lo, hi)` outside which the expansion coefficients of a section
    /// with the given order bounds must vanish.
    pub fn support_bounds(&self, weight: i32, ord_in: &[i64], ord_out: &[i64]) -> (i64, i64) {
        let lam = weight as i64;
        let lo = ord_in.iter().map(|o| o + lam).min().expect("K >= 1");
        let s = self.slope();
        let (last, finite) = ord_out.split_last().expect("infinity");
        let mut hi = lam + div_ceil(1 - 2 * lam - last, s);
        for q in finite {
            hi = hi.max(lam - q);
        }
        (lo, hi.max(lo))
    }

    /// Expansion from local data: the coefficient of `f^λ_{n,p}` is
    /// `sum_i res_{P_i}(sec * f^{1-λ}_{-n,p})`.
    pub fn expand_local(&self, sec: &LocalSection<'_>) -> GradedExpansion {
        let lam = sec.weight;
        let mu = 1 - lam;
        let (lo, hi) = self.support_bounds(lam, &sec.ord_in, &sec.ord_out);
        let mut out = GradedExpansion::new(lam);
        if hi <= lo {
            return out;
        }
        let k = self.k();
        let trunc = hi - 1 - lam as i64;
        let local: Vec<LaurentSeries> = (1..=k).map(|i| (sec.series)(i, trunc)).collect();
        for n in lo..hi {
            for p in 1..=k {
                let mut acc = Scalar::zero();
                for (i, ls) in local.iter().enumerate() {
                    let Some(v) = ls.leading_order() else { continue };
                    // dual order at P_i is (λ - n) - δ; residue needs v + that <= -1
                    let dual_ord = lam as i64 - n - i64::from(i + 1 == p);
                    if v + dual_ord > -1 {
                        continue;
                    }
                    let dual = self.basis_series(mu, -n, p, i + 1, -1 - v);
                    acc += residue_of_product(ls, &dual);
                }
                if !acc.is_zero() {
                    out.entries.insert((n, p), acc);
                }
            }
        }
        out
    }

    /// Rebuilds the section from its expansion.
    pub fn reconstruct(&self, e: &GradedExpansion) -> Result<Section> {
        let mut f = RationalFunction::zero();
        for ((n, p), c) in &e.entries {
            let b = self.basis_element(e.lambda, *n, *p)?;
            f = &f + &b.section.f.scale(c);
        }
        Ok(Section::new(e.lambda, f))
    }

    /// Checks `<f^λ_{n,p}, f^{1-λ}_{m,r}> = δ_{-n}^m δ_p^r` for all
    /// `n, m in [-W, W]`, plus full rank of the pairing matrix.
    pub fn verify_duality(&self, lambda: i32, w: i64) -> DualityReport {
        let k = self.k();
        let mu = 1 - lambda;
        let mut violation = None;
        let mut checked = 0usize;
        let mut matrix: Vec<Vec<Scalar>> = Vec::new();
        for n in -w..=w {
            for p in 1..=k {
                let mut row = Vec::new();
                for m in -w..=w {
                    for r in 1..=k {
                        let v = self.basis_pairing(lambda, n, p, mu, m, r);
                        let expected = if m == -n && p == r { Scalar::one() } else { Scalar::zero() };
                        if v != expected && violation.is_none() {
                            violation = Some(DualityViolation { n, p, m, r, value: v.clone() });
                        }
                        checked += 1;
                        row.push(v);
                    }
                }
                matrix.push(row);
            }
        }
        let size = matrix.len();
        let full_rank = crate::linalg::rank(&matrix, size) == size;
        DualityReport { lambda, window: w, pairs_checked: checked, violation, full_rank }
    }

    /// Pairing of two basis elements through their cached local series.
    pub fn basis_pairing(&self, lambda: i32, n: i64, p: usize, mu: i32, m: i64, r: usize) -> Scalar {
        let mut acc = Scalar::zero();
        let oa = self.prescribe_orders(lambda, n, p);
        let ob = self.prescribe_orders(mu, m, r);
        for i in 1..=self.k() {
            let (va, vb) = (oa[i - 1], ob[i - 1]);
            if va + vb > -1 {
                continue;
            }
            let a = self.basis_series(lambda, n, p, i, -1 - vb);
            let b = self.basis_series(mu, m, r, i, -1 - va);
            acc += residue_of_product(&a, &b);
        }
        acc
    }
}

/// Coefficient of `t^{-1}` in `a * b`.
pub fn residue_of_product(a: &LaurentSeries, b: &LaurentSeries) -> Scalar {
    coefficient_of_product(a, b, -1)
}

/// Coefficient of `t^k` in `a * b`; panics if either truncation is too low.
pub fn coefficient_of_product(a: &LaurentSeries, b: &LaurentSeries, k: i64) -> Scalar {
    assert!(
        a.truncation() >= k - b.start() && b.truncation() >= k - a.start(),
        "insufficient truncation for t^{k}"
    );
    let mut acc = Scalar::zero();
    for (j, c) in a.terms() {
        let other = k - j;
        if other < b.start() {
            break;
        }
        let d = b.coeff(other);
        if !d.is_zero() {
            acc += c * d;
        }
    }
    acc
}

fn div_ceil(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    let q = a.div_euclid(b);
    if a.rem_euclid(b) == 0 {
        q
    } else {
        q + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityViolation {
    pub n: i64,
    pub p: usize,
    pub m: i64,
    pub r: usize,
    pub value: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityReport {
    pub lambda: i32,
    pub window: i64,
    pub pairs_checked: usize,
    pub violation: Option<DualityViolation>,
    pub full_rank: bool,
}

impl DualityReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.full_rank
    }
}
