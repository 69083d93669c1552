//! Current algebras `𝔤 ⊗ 𝒜`, the operator algebras `𝒟¹_𝔤`, their cocycles
//! and the identity checks used to certify them.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebras::{bracket_L, lie_action, mul_A};
use crate::basis::{check_weight, MarkedSurface, Section};
use crate::cocycles::{gamma_f_basis, gamma_m_basis, gamma_v_basis, CheckReport, ConnectionChoice, Cycle, D1Cocycle};
use crate::error::{KnError, Result};
use crate::exact::{RationalFunction, Scalar};
use crate::lie::{BilinearForm, FiniteLieAlgebra, LinearForm};
use crate::window::{add_scaled, single, Elem, ElemVec, LinearFunctional, WindowAlgebra};

/// `Σ x_a ⊗ f_a`, one weight-0 section per Lie basis index.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CurrentElement {
    pub parts: BTreeMap<usize, Section>,
}

impl CurrentElement {
    pub fn zero() -> Self {
        CurrentElement::default()
    }

    /// `x_a ⊗ f`.
    pub fn pure(a: usize, f: Section) -> Result<Self> {
        check_weight(0, f.weight)?;
        let mut e = CurrentElement::zero();
        if !f.is_zero() {
            e.parts.insert(a, f);
        }
        Ok(e)
    }

    pub fn is_zero(&self) -> bool {
        self.parts.values().all(Section::is_zero)
    }

    fn add_part(&mut self, a: usize, f: Section) -> Result<()> {
        let next = match self.parts.remove(&a) {
            Some(g) => g.add(&f)?,
            None => f,
        };
        if !next.is_zero() {
            self.parts.insert(a, next);
        }
        Ok(())
    }

    pub fn add(&self, other: &CurrentElement) -> Result<CurrentElement> {
        let mut out = self.clone();
        for (a, f) in &other.parts {
            out.add_part(*a, f.clone())?;
        }
        Ok(out)
    }

    fn check_lie(&self, g: &FiniteLieAlgebra) -> Result<()> {
        match self.parts.keys().next_back() {
            Some(&a) if a >= g.dim() => Err(KnError::LieMismatch),
            _ => Ok(()),
        }
    }

    /// Coordinates in the window basis (exact, untruncated).
    pub fn to_window(&self, s: &MarkedSurface) -> Result<ElemVec> {
        let mut out = ElemVec::new();
        for (a, f) in &self.parts {
            for ((n, p), c) in s.expand(f)?.entries {
                out.insert(Elem::Cur { x: *a, n, p }, c);
            }
        }
        Ok(out)
    }
}

/// `[x ⊗ f, y ⊗ g] = [x, y] ⊗ fg`, extended bilinearly.
pub fn bracket_current(s: &MarkedSurface, g: &FiniteLieAlgebra, u: &CurrentElement, v: &CurrentElement) -> Result<CurrentElement> {
    u.check_lie(g)?;
    v.check_lie(g)?;
    let mut out = CurrentElement::zero();
    for (a, f) in &u.parts {
        for (b, h) in &v.parts {
            let consts = g.bracket_basis(*a, *b);
            if consts.is_empty() {
                continue;
            }
            let fh = mul_A(s, f, h)?;
            for (k, c) in consts {
                out.add_part(*k, fh.scale(c))?;
            }
        }
    }
    Ok(out)
}

/// Element `(x(g), e)` of `𝒟¹_𝔤`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct D1gElement {
    pub current: CurrentElement,
    pub vect: Section,
}

impl D1gElement {
    pub fn new(current: CurrentElement, vect: Section) -> Result<Self> {
        check_weight(-1, vect.weight)?;
        Ok(D1gElement { current, vect })
    }

    pub fn current(current: CurrentElement) -> Self {
        D1gElement { current, vect: Section::zero(-1) }
    }

    pub fn vector(e: Section) -> Result<Self> {
        D1gElement::new(CurrentElement::zero(), e)
    }

    pub fn to_window(&self, s: &MarkedSurface) -> Result<ElemVec> {
        let mut out = self.current.to_window(s)?;
        for ((n, p), c) in s.expand(&self.vect)?.entries {
            out.insert(Elem::Vf { n, p }, c);
        }
        Ok(out)
    }
}

fn act_on_current(s: &MarkedSurface, e: &Section, u: &CurrentElement) -> Result<CurrentElement> {
    let mut out = CurrentElement::zero();
    if e.is_zero() {
        return Ok(out);
    }
    for (a, f) in &u.parts {
        out.add_part(*a, lie_action(s, e, f)?)?;
    }
    Ok(out)
}

/// Semidirect bracket
/// `[(x(g), e), (y(h), f)] = ([x,y](gh) + y(e.h) − x(f.g), [e, f])`.
#[allow(non_snake_case)]
pub fn bracket_D1g(s: &MarkedSurface, g: &FiniteLieAlgebra, a: &D1gElement, b: &D1gElement) -> Result<D1gElement> {
    let mut cur = bracket_current(s, g, &a.current, &b.current)?;
    cur = cur.add(&act_on_current(s, &a.vect, &b.current)?)?;
    let back = act_on_current(s, &b.vect, &a.current)?;
    for (k, f) in back.parts {
        cur.add_part(k, f.scale(&-Scalar::one()))?;
    }
    Ok(D1gElement { current: cur, vect: bracket_L(s, &a.vect, &b.vect)? })
}

/// A window-supported antisymmetric table. Evaluating outside the window is
/// an error, never an implicit zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserMatrix {
    pub window: i64,
    entries: BTreeMap<(Elem, Elem), Scalar>,
}

impl UserMatrix {
    pub fn new(window: i64) -> Self {
        UserMatrix { window, entries: BTreeMap::new() }
    }

    /// Sets `γ(a, b) = v` (and hence `γ(b, a) = -v`).
    pub fn set(&mut self, a: Elem, b: Elem, v: Scalar) -> Result<()> {
        if a == b {
            return if v.is_zero() { Ok(()) } else { Err(KnError::Domain("a table entry γ(a, a) must vanish".into())) };
        }
        let (key, v) = if a < b { ((a, b), v) } else { ((b, a), -v) };
        if v.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
        Ok(())
    }

    pub fn get(&self, a: &Elem, b: &Elem) -> Result<Scalar> {
        for e in [a, b] {
            if e.degree().abs() > self.window {
                return Err(KnError::OutsideWindow(format!("{e} is outside the table window {}", self.window)));
            }
        }
        Ok(if a < b {
            self.entries.get(&(*a, *b)).cloned().unwrap_or_else(Scalar::zero)
        } else {
            self.entries.get(&(*b, *a)).map(|v| -v).unwrap_or_else(Scalar::zero)
        })
    }

    pub fn nonzero_entries(&self) -> impl Iterator<Item = (&(Elem, Elem), &Scalar)> {
        self.entries.iter()
    }
}

/// A cocycle on a current algebra or on `𝒟¹_𝔤`. Each geometric part is zero
/// on the summands it is not defined on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurrentCocycleSpec {
    /// `α(x, y) ∮ f dg`.
    Affine { alpha: BilinearForm, cycle: Cycle },
    /// `φ(y) ∮ (e g'' + T e g')` on `(e, y ⊗ g)`, antisymmetrized.
    Mixing { phi: LinearForm, t: RationalFunction, cycle: Cycle },
    /// `γ^v_{C,R}` on pairs of vector fields.
    VectorField { r: RationalFunction, cycle: Cycle },
    LinearCombination(Vec<(Scalar, CurrentCocycleSpec)>),
    UserMatrix(UserMatrix),
    /// The inner cocycle on the current part, zero whenever a vector field is involved.
    ExtendedByZero(Box<CurrentCocycleSpec>),
}

impl CurrentCocycleSpec {
    pub fn affine(alpha: BilinearForm) -> Self {
        CurrentCocycleSpec::Affine { alpha, cycle: Cycle::Separating }
    }

    pub fn mixing(phi: LinearForm) -> Self {
        CurrentCocycleSpec::Mixing { phi, t: RationalFunction::zero(), cycle: Cycle::Separating }
    }

    pub fn vector_field() -> Self {
        CurrentCocycleSpec::VectorField { r: RationalFunction::zero(), cycle: Cycle::Separating }
    }

    pub fn zero() -> Self {
        CurrentCocycleSpec::LinearCombination(Vec::new())
    }

    /// `r1 γ_α + r2 γ_φ + r3 γ^v_R` over the separating cycle.
    pub fn assembled(r1: Scalar, alpha: BilinearForm, r2: Scalar, phi: LinearForm, r3: Scalar, conn: &ConnectionChoice) -> Self {
        let c = Cycle::Separating;
        CurrentCocycleSpec::LinearCombination(vec![
            (r1, CurrentCocycleSpec::Affine { alpha, cycle: c }),
            (r2, CurrentCocycleSpec::Mixing { phi, t: conn.t.clone(), cycle: c }),
            (r3, CurrentCocycleSpec::VectorField { r: conn.r.clone(), cycle: c }),
        ])
    }

    /// The 𝒟¹ cocycle as a spec over the one-dimensional abelian algebra.
    pub fn from_d1(c: &D1Cocycle) -> Self {
        CurrentCocycleSpec::assembled(
            c.r1.clone(),
            vec![vec![Scalar::one()]],
            c.r2.clone(),
            vec![Scalar::one()],
            c.r3.clone(),
            &c.connections,
        )
    }

    pub fn extended_by_zero(self) -> Self {
        CurrentCocycleSpec::ExtendedByZero(Box::new(self))
    }

    pub fn scaled(self, c: Scalar) -> Self {
        CurrentCocycleSpec::LinearCombination(vec![(c, self)])
    }

    /// Checks dimensions against the Lie algebra and admissibility of connections.
    pub fn validate(&self, alg: &WindowAlgebra) -> Result<()> {
        let d = alg.lie().dim();
        let s = alg.surface();
        let check_cycle = |c: &Cycle| c.points(s).map(|_| ());
        match self {
            CurrentCocycleSpec::Affine { alpha, cycle } => {
                if alpha.len() != d || alpha.iter().any(|r| r.len() != d) {
                    return Err(KnError::Domain(format!("bilinear form must be {d}x{d}")));
                }
                check_cycle(cycle)
            }
            CurrentCocycleSpec::Mixing { phi, t, cycle } => {
                if phi.len() != d {
                    return Err(KnError::Domain(format!("linear form must have {d} entries")));
                }
                ConnectionChoice::affine(t.clone()).validate(s)?;
                check_cycle(cycle)
            }
            CurrentCocycleSpec::VectorField { r, cycle } => {
                ConnectionChoice::projective(r.clone()).validate(s)?;
                check_cycle(cycle)
            }
            CurrentCocycleSpec::LinearCombination(parts) => parts.iter().try_for_each(|(_, p)| p.validate(alg)),
            CurrentCocycleSpec::UserMatrix(_) => Ok(()),
            CurrentCocycleSpec::ExtendedByZero(inner) => inner.validate(alg),
        }
    }

    /// Value on a pair of basis elements.
    pub fn eval_basis(&self, alg: &WindowAlgebra, a: &Elem, b: &Elem) -> Result<Scalar> {
        let s = alg.surface();
        match self {
            CurrentCocycleSpec::Affine { alpha, cycle } => match (*a, *b) {
                (Elem::Cur { x, n, p }, Elem::Cur { x: y, n: m, p: r }) => {
                    let c = &alpha[x][y];
                    if c.is_zero() {
                        return Ok(Scalar::zero());
                    }
                    Ok(c * gamma_f_basis(s, *cycle, (n, p), (m, r))?)
                }
                _ => Ok(Scalar::zero()),
            },
            CurrentCocycleSpec::Mixing { phi, t, cycle } => match (*a, *b) {
                (Elem::Vf { n, p }, Elem::Cur { x, n: m, p: r }) => {
                    if phi[x].is_zero() {
                        return Ok(Scalar::zero());
                    }
                    Ok(&phi[x] * gamma_m_basis(s, *cycle, t, (n, p), (m, r))?)
                }
                (Elem::Cur { .. }, Elem::Vf { .. }) => Ok(-self.eval_basis(alg, b, a)?),
                _ => Ok(Scalar::zero()),
            },
            CurrentCocycleSpec::VectorField { r, cycle } => match (*a, *b) {
                (Elem::Vf { n, p }, Elem::Vf { n: m, p: q }) => gamma_v_basis(s, *cycle, r, (n, p), (m, q)),
                _ => Ok(Scalar::zero()),
            },
            CurrentCocycleSpec::LinearCombination(parts) => {
                let mut acc = Scalar::zero();
                for (c, part) in parts {
                    if !c.is_zero() {
                        acc += c * part.eval_basis(alg, a, b)?;
                    }
                }
                Ok(acc)
            }
            CurrentCocycleSpec::UserMatrix(m) => m.get(a, b),
            CurrentCocycleSpec::ExtendedByZero(inner) => {
                if a.is_vector() || b.is_vector() {
                    Ok(Scalar::zero())
                } else {
                    inner.eval_basis(alg, a, b)
                }
            }
        }
    }
}

/// Evaluates a spec on an algebra with a cache of basis-pair values.
pub struct CocycleEvaluator<'a> {
    alg: &'a WindowAlgebra,
    spec: &'a CurrentCocycleSpec,
    cache: RwLock<HashMap<(Elem, Elem), Scalar>>,
}

impl<'a> CocycleEvaluator<'a> {
    pub fn new(alg: &'a WindowAlgebra, spec: &'a CurrentCocycleSpec) -> Result<Self> {
        spec.validate(alg)?;
        Ok(CocycleEvaluator { alg, spec, cache: RwLock::new(HashMap::new()) })
    }

    pub fn algebra(&self) -> &WindowAlgebra {
        self.alg
    }

    pub fn pair(&self, a: &Elem, b: &Elem) -> Result<Scalar> {
        if !self.alg.contains(a) || !self.alg.contains(b) {
            return Err(KnError::Domain(format!("{a} or {b} is not in {}", self.alg.name())));
        }
        if let Some(v) = self.cache.read().expect("cache poisoned").get(&(*a, *b)) {
            return Ok(v.clone());
        }
        let v = self.spec.eval_basis(self.alg, a, b)?;
        self.cache.write().expect("cache poisoned").insert((*a, *b), v.clone());
        Ok(v)
    }

    /// Bilinear evaluation on combinations.
    pub fn eval(&self, u: &ElemVec, v: &ElemVec) -> Result<Scalar> {
        let mut acc = Scalar::zero();
        for (a, x) in u {
            for (b, y) in v {
                let val = self.pair(a, b)?;
                if !val.is_zero() {
                    acc += x * y * val;
                }
            }
        }
        Ok(acc)
    }
}

/// Evaluates a spec on two `𝒟¹_𝔤` elements given as sections.
pub fn eval_cocycle(alg: &WindowAlgebra, spec: &CurrentCocycleSpec, a: &D1gElement, b: &D1gElement) -> Result<Scalar> {
    let ev = CocycleEvaluator::new(alg, spec)?;
    ev.eval(&a.to_window(alg.surface())?, &b.to_window(alg.surface())?)
}

/// `c t + v` in the central extension; `t` is central of degree 0.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExtendedElement {
    pub central: Scalar,
    pub base: ElemVec,
}

impl ExtendedElement {
    pub fn new(central: Scalar, base: ElemVec) -> Self {
        ExtendedElement { central, base }
    }

    pub fn basis(e: Elem) -> Self {
        ExtendedElement { central: Scalar::zero(), base: single(e) }
    }
}

/// `[â, b̂] = [a, b] + γ(a, b) t`.
pub fn extended_bracket(ev: &CocycleEvaluator<'_>, a: &ExtendedElement, b: &ExtendedElement) -> Result<ExtendedElement> {
    Ok(ExtendedElement { central: ev.eval(&a.base, &b.base)?, base: ev.algebra().bracket_vec(&a.base, &b.base)? })
}

/// Antisymmetry plus the cocycle identity, split by the type of the triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionsReport {
    pub antisymmetry: CheckReport,
    pub conditions: Vec<CheckReport>,
}

impl ConditionsReport {
    pub fn passed(&self) -> bool {
        self.antisymmetry.passed() && self.conditions.iter().all(CheckReport::passed)
    }

    pub fn first_violation(&self) -> Option<&str> {
        std::iter::once(&self.antisymmetry).chain(&self.conditions).find_map(|r| r.violation.as_deref())
    }

    pub fn checked(&self) -> usize {
        self.antisymmetry.checked + self.conditions.iter().map(|c| c.checked).sum::<usize>()
    }

    pub fn skipped(&self) -> usize {
        self.antisymmetry.skipped + self.conditions.iter().map(|c| c.skipped).sum::<usize>()
    }
}

const CONDITION_NAMES: [&str; 4] = [
    "(1) cocycle on currents",
    "(2) cocycle on vector fields",
    "(3) γ([e,f],x(g)) − γ(e,x(f.g)) + γ(f,x(e.g)) = 0",
    "(4) γ(x(e.g),y(h)) − γ(e,[x,y](gh)) + γ(x(g),y(e.h)) = 0",
];

fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push((i, j, k));
            }
        }
    }
    out
}

pub(crate) fn merge(name: &str, results: impl IntoIterator<Item = Result<Option<String>>>) -> CheckReport {
    let mut report = CheckReport { name: name.into(), ..Default::default() };
    for r in results {
        match r {
            Ok(None) => report.checked += 1,
            Ok(Some(msg)) => {
                report.checked += 1;
                report.violation.get_or_insert(msg);
            }
            Err(KnError::OutsideWindow(_)) => report.skipped += 1,
            Err(e) => {
                report.violation.get_or_insert_with(|| format!("evaluation error: {e}"));
            }
        }
    }
    report
}

fn cyclic_sum(ev: &CocycleEvaluator<'_>, a: &Elem, b: &Elem, c: &Elem) -> Result<Scalar> {
    let alg = ev.algebra();
    Ok(ev.eval(&alg.bracket(a, b)?, &single(*c))?
        + ev.eval(&alg.bracket(b, c)?, &single(*a))?
        + ev.eval(&alg.bracket(c, a)?, &single(*b))?)
}

/// Checks antisymmetry and `γ([a,b],c) + γ([b,c],a) + γ([c,a],b) = 0` on all
/// window triples, reported separately by how many vector fields the triple
/// contains. The first violation found (in basis order) is located.
pub fn check_cocycle_conditions(alg: &WindowAlgebra, spec: &CurrentCocycleSpec, w: i64) -> Result<ConditionsReport> {
    let ev = CocycleEvaluator::new(alg, spec)?;
    let basis = alg.basis(w);
    let pairs: Vec<(usize, usize)> = (0..basis.len()).flat_map(|i| (i..basis.len()).map(move |j| (i, j))).collect();
    let anti: Vec<_> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&basis[i], &basis[j]);
            let v = ev.pair(a, b)? + ev.pair(b, a)?;
            Ok((!v.is_zero()).then(|| format!("γ({}, {}) + γ({}, {}) = {v}", alg.label(a), alg.label(b), alg.label(b), alg.label(a))))
        })
        .collect();
    let antisymmetry = merge("antisymmetry", anti);

    let trips = triples(basis.len());
    let results: Vec<(usize, Result<Option<String>>)> = trips
        .par_iter()
        .map(|&(i, j, k)| {
            let (a, b, c) = (&basis[i], &basis[j], &basis[k]);
            let vectors = [a, b, c].iter().filter(|e| e.is_vector()).count();
            let class = match vectors {
                0 => 0,
                3 => 1,
                2 => 2,
                _ => 3,
            };
            let r = cyclic_sum(&ev, a, b, c).map(|v| {
                (!v.is_zero()).then(|| {
                    format!("cyclic sum on ({}, {}, {}) = {v}", alg.label(a), alg.label(b), alg.label(c))
                })
            });
            (class, r)
        })
        .collect();
    let mut buckets: [Vec<Result<Option<String>>>; 4] = Default::default();
    for (class, r) in results {
        buckets[class].push(r);
    }
    let applicable = [alg.has_currents(), alg.has_vectors(), alg.has_currents() && alg.has_vectors(), alg.has_currents() && alg.has_vectors()];
    let conditions = buckets
        .into_iter()
        .enumerate()
        .filter(|(i, _)| applicable[*i])
        .map(|(i, b)| merge(CONDITION_NAMES[i], b))
        .collect();
    Ok(ConditionsReport { antisymmetry, conditions })
}

/// `[[a,b],c] + [[b,c],a] + [[c,a],b] = 0` on window triples.
pub fn check_jacobi(alg: &WindowAlgebra, w: i64) -> CheckReport {
    let basis = alg.basis(w);
    let results: Vec<_> = triples(basis.len())
        .par_iter()
        .map(|&(i, j, k)| {
            let (a, b, c) = (&basis[i], &basis[j], &basis[k]);
            let mut sum = ElemVec::new();
            for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                let inner = alg.bracket(x, y)?;
                let outer = alg.bracket_vec(&inner, &single(*z))?;
                add_scaled(&mut sum, &outer, &Scalar::one());
            }
            Ok((!sum.is_empty()).then(|| format!("Jacobi fails on ({}, {}, {})", alg.label(a), alg.label(b), alg.label(c))))
        })
        .collect();
    merge("Jacobi", results)
}

/// `γ(x(e.g), y(h)) + γ(x(g), y(e.h)) = 0` for window vector fields `e` and
/// currents `x(g)`, `y(h)`. Samples that leave a table's window are skipped.
#[allow(non_snake_case)]
pub fn check_L_invariance_current(alg: &WindowAlgebra, spec: &CurrentCocycleSpec, w: i64) -> Result<CheckReport> {
    let cur = alg.current_part();
    let full = alg.with_vectors();
    let ev = CocycleEvaluator::new(&cur, spec)?;
    let currents = cur.basis(w);
    let vectors: Vec<Elem> = full.basis(w).into_iter().filter(Elem::is_vector).collect();
    let mut samples = Vec::new();
    for e in &vectors {
        for i in 0..currents.len() {
            for j in i..currents.len() {
                samples.push((*e, currents[i], currents[j]));
            }
        }
    }
    let results: Vec<_> = samples
        .par_iter()
        .map(|(e, g, h)| {
            let eg = full.bracket(e, g)?;
            let eh = full.bracket(e, h)?;
            let v = ev.eval(&eg, &single(*h))? + ev.eval(&single(*g), &eh)?;
            Ok((!v.is_zero()).then(|| format!("ℒ-invariance fails on {}, {}, {}: {v}", full.label(e), full.label(g), full.label(h))))
        })
        .collect();
    Ok(merge("L-invariance", results))
}

/// Largest |degree| reached by brackets of window basis elements.
pub fn bracket_reach(alg: &WindowAlgebra, w: i64) -> Result<i64> {
    let basis = alg.basis(w);
    let reach: Result<Vec<i64>> = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            let mut m = 0;
            for j in i + 1..basis.len() {
                for e in alg.bracket(&basis[i], &basis[j])?.keys() {
                    m = m.max(e.degree().abs());
                }
            }
            Ok(m)
        })
        .collect();
    Ok(reach?.into_iter().max().unwrap_or(0))
}

/// The coboundary `δφ(a, b) = φ([a, b])` on window pairs. `φ` must be known
/// on every degree the window brackets reach.
pub fn coboundary_of(alg: &WindowAlgebra, phi: &LinearFunctional, w: i64) -> Result<CurrentCocycleSpec> {
    let need = bracket_reach(alg, w)?;
    if need > phi.window {
        return Err(KnError::WindowTooSmall(format!(
            "brackets of the window [-{w}, {w}] reach degree {need}; φ is known only on [-{p}, {p}]",
            p = phi.window
        )));
    }
    let basis = alg.basis(w);
    let rows: Result<Vec<Vec<(Elem, Elem, Scalar)>>> = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in i + 1..basis.len() {
                let v = phi.apply(&alg.bracket(&basis[i], &basis[j])?)?;
                if !v.is_zero() {
                    row.push((basis[i], basis[j], v));
                }
            }
            Ok(row)
        })
        .collect();
    let mut m = UserMatrix::new(w);
    for (a, b, v) in rows?.into_iter().flatten() {
        m.set(a, b, v)?;
    }
    Ok(CurrentCocycleSpec::UserMatrix(m))
}

/// For perfect `𝔤`, writes each window current `x_k ⊗ A_{n,p}` as
/// `Σ c [x_i ⊗ A_{n,p}, x_j ⊗ 1]` and verifies the identity exactly.
pub fn check_perfectness(alg: &WindowAlgebra, w: i64) -> CheckReport {
    let lie = alg.lie();
    let name = "perfectness";
    let exprs: Vec<Option<Vec<(usize, usize, Scalar)>>> = (0..lie.dim()).map(|k| lie.express_as_brackets(k)).collect();
    let results: Vec<_> = alg
        .current_part()
        .basis(w)
        .par_iter()
        .map(|e| {
            let Elem::Cur { x, n, p } = *e else { unreachable!() };
            let Some(expr) = &exprs[x] else {
                return Ok(Some(format!("{} is not a sum of brackets in {}", lie.labels()[x], lie.name())));
            };
            let mut sum = ElemVec::new();
            for (i, j, c) in expr {
                let br = alg.bracket_vec(&single(Elem::Cur { x: *i, n, p }), &alg.unit_current(*j))?;
                add_scaled(&mut sum, &br, c);
            }
            Ok((sum != single(*e)).then(|| format!("bracket expression for {} does not reproduce it", alg.label(e))))
        })
        .collect();
    merge(name, results)
}

/// For reductive `𝔤`, the cocycle vanishes on pairs from different summands
/// when at least one of them is simple.
pub fn check_block_orthogonality(alg: &WindowAlgebra, spec: &CurrentCocycleSpec, w: i64) -> Result<CheckReport> {
    let cur = alg.current_part();
    let ev = CocycleEvaluator::new(&cur, spec)?;
    let summands = alg.lie().summands();
    let basis = cur.basis(w);
    let mut pairs = Vec::new();
    for (i, si) in summands.iter().enumerate() {
        for sj in &summands[i + 1..] {
            if !(si.simple || sj.simple) {
                continue;
            }
            for a in basis.iter().filter(|e| matches!(e, Elem::Cur { x, .. } if si.range.contains(x))) {
                for b in basis.iter().filter(|e| matches!(e, Elem::Cur { x, .. } if sj.range.contains(x))) {
                    pairs.push((*a, *b));
                }
            }
        }
    }
    let results: Vec<_> = pairs
        .par_iter()
        .map(|(a, b)| {
            let v = ev.pair(a, b)?;
            Ok((!v.is_zero()).then(|| format!("γ({}, {}) = {v} across summands", cur.label(a), cur.label(b))))
        })
        .collect();
    Ok(merge("block orthogonality", results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::lie::{build_gl, build_sl};
    use std::sync::Arc;

    fn mono(k: i64) -> Section {
        Section::new(0, RationalFunction::monomial(int(1), k))
    }

    #[test]
    fn structured_brackets_match_window() {
        let s = MarkedSurface::from_finite(&[int(0), int(1)], &[]).unwrap();
        let g = Arc::new(build_sl(2).unwrap());
        let alg = WindowAlgebra::d1g(&s, g.clone());
        let u = D1gElement::new(CurrentElement::pure(0, mono(2)).unwrap(), Section::new(-1, RationalFunction::monomial(int(1), 1))).unwrap();
        let v = D1gElement::new(CurrentElement::pure(1, mono(-1)).unwrap(), Section::new(-1, RationalFunction::monomial(int(2), 3))).unwrap();
        let br = bracket_D1g(&s, &g, &u, &v).unwrap();
        let lhs = br.to_window(&s).unwrap();
        let rhs = alg.bracket_vec(&u.to_window(&s).unwrap(), &v.to_window(&s).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn classical_affine_values() {
        let s = MarkedSurface::classical();
        let g = Arc::new(build_sl(2).unwrap());
        let alg = WindowAlgebra::current(&s, g.clone());
        let spec = CurrentCocycleSpec::affine(g.trace_form().unwrap());
        let ev = CocycleEvaluator::new(&alg, &spec).unwrap();
        for n in -3..=3 {
            // tr(ef) = 1, tr(hh) = 2
            assert_eq!(ev.pair(&Elem::Cur { x: 0, n, p: 1 }, &Elem::Cur { x: 1, n: -n, p: 1 }).unwrap(), int(-n));
            assert_eq!(ev.pair(&Elem::Cur { x: 2, n, p: 1 }, &Elem::Cur { x: 2, n: -n, p: 1 }).unwrap(), int(-2 * n));
            assert!(ev.pair(&Elem::Cur { x: 0, n: 0, p: 1 }, &Elem::Cur { x: 1, n, p: 1 }).unwrap().is_zero());
        }
    }

    #[test]
    fn gl2_mixing_uses_trace() {
        let s = MarkedSurface::classical();
        let g = Arc::new(build_gl(2).unwrap());
        let alg = WindowAlgebra::d1g(&s, g.clone());
        let spec = CurrentCocycleSpec::mixing(g.trace_functional().unwrap());
        let ev = CocycleEvaluator::new(&alg, &spec).unwrap();
        for x in 0..4 {
            let v = ev.pair(&Elem::Vf { n: 2, p: 1 }, &Elem::Cur { x, n: -2, p: 1 }).unwrap();
            let tr = if x == 0 || x == 3 { 1 } else { 0 };
            assert_eq!(v, int(tr * 2 * 3));
        }
    }

    #[test]
    fn split_conditions_and_controls() {
        let s = MarkedSurface::classical();
        let g = Arc::new(build_sl(2).unwrap());
        let alg = WindowAlgebra::d1g(&s, g.clone());
        let good = CurrentCocycleSpec::assembled(int(1), g.trace_form().unwrap(), int(0), vec![int(0); 3], int(3), &ConnectionChoice::default());
        assert!(check_cocycle_conditions(&alg, &good, 2).unwrap().passed());
        let bad = CurrentCocycleSpec::mixing(vec![int(0), int(0), int(1)]);
        let rep = check_cocycle_conditions(&alg, &bad, 2).unwrap();
        assert!(!rep.passed());
        assert!(!rep.conditions[3].passed());
        assert!(check_jacobi(&alg, 2).passed());
        assert!(check_perfectness(&alg, 2).passed());
    }

    #[test]
    fn coboundaries() {
        let s = MarkedSurface::classical();
        let alg = WindowAlgebra::functions(&s);
        let mut phi = LinearFunctional::zero(6);
        phi.values.insert(Elem::Cur { x: 0, n: 1, p: 1 }, int(5));
        match coboundary_of(&alg, &phi, 3).unwrap() {
            CurrentCocycleSpec::UserMatrix(m) => assert_eq!(m.nonzero_entries().count(), 0),
            _ => unreachable!(),
        }
        let alg = WindowAlgebra::current(&s, Arc::new(build_sl(2).unwrap()));
        assert!(matches!(coboundary_of(&alg, &phi, 4), Err(KnError::WindowTooSmall(_))));
        let mut phi = LinearFunctional::zero(6);
        phi.values.insert(Elem::Cur { x: 2, n: 0, p: 1 }, int(1));
        let spec = coboundary_of(&alg, &phi, 3).unwrap();
        let ev = CocycleEvaluator::new(&alg, &spec).unwrap();
        assert_eq!(ev.pair(&Elem::Cur { x: 0, n: 2, p: 1 }, &Elem::Cur { x: 1, n: -2, p: 1 }).unwrap(), int(1));
        assert!(matches!(ev.pair(&Elem::Cur { x: 0, n: 4, p: 1 }, &Elem::Cur { x: 1, n: -2, p: 1 }), Err(KnError::OutsideWindow(_))));
        assert!(!check_L_invariance_current(&alg, &spec, 3).unwrap().passed());
    }
}
