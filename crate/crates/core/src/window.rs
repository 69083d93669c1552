//! Window-truncated bases of the algebras: functions 𝒜, vector fields ℒ,
//! 𝒟¹, current algebras 𝔤 ⊗ 𝒜 and 𝒟¹_𝔤. Brackets are computed exactly from
//! the function-level structure tables and the Lie structure constants;
//! results are never truncated.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::algebras::{cached_product, BasisOp};
use crate::basis::MarkedSurface;
use crate::error::{KnError, Result};
use crate::exact::Scalar;
use crate::lie::{build_abelian, FiniteLieAlgebra};

/// Basis element of a window algebra: a current `x_a ⊗ A_{n,p}` or a vector
/// field `e_{n,p}`. Functions are currents over the one-dimensional abelian
/// algebra (`x = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Cur { x: usize, n: i64, p: usize },
    Vf { n: i64, p: usize },
}

impl Elem {
    pub fn degree(&self) -> i64 {
        match *self {
            Elem::Cur { n, .. } | Elem::Vf { n, .. } => n,
        }
    }

    pub fn point(&self) -> usize {
        match *self {
            Elem::Cur { p, .. } | Elem::Vf { p, .. } => p,
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, Elem::Vf { .. })
    }

    pub fn label(&self, lie: &FiniteLieAlgebra) -> String {
        match *self {
            Elem::Cur { n, p, .. } if lie.dim() == 1 => format!("A({n},{p})"),
            Elem::Cur { x, n, p } => format!("{}(A({n},{p}))", lie.labels()[x]),
            Elem::Vf { n, p } => format!("e({n},{p})"),
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Elem::Cur { x, n, p } => write!(f, "x{x}(A({n},{p}))"),
            Elem::Vf { n, p } => write!(f, "e({n},{p})"),
        }
    }
}

/// Sparse linear combination of basis elements.
pub type ElemVec = BTreeMap<Elem, Scalar>;

pub fn single(e: Elem) -> ElemVec {
    let mut v = ElemVec::new();
    v.insert(e, Scalar::from_integer(1.into()));
    v
}

pub fn add_scaled(target: &mut ElemVec, src: &ElemVec, c: &Scalar) {
    for (e, v) in src {
        let entry = target.entry(*e).or_insert_with(Scalar::zero);
        *entry += v * c;
        if entry.is_zero() {
            target.remove(e);
        }
    }
}

/// Which of the five algebras a window algebra models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgebraKind {
    Functions,
    VectorFields,
    D1,
    Current,
    D1g,
}

/// An algebra with a degree window on its basis.
#[derive(Clone)]
pub struct WindowAlgebra {
    surface: MarkedSurface,
    lie: Arc<FiniteLieAlgebra>,
    kind: AlgebraKind,
}

impl fmt::Debug for WindowAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {:?}", self.name(), self.surface)
    }
}

impl WindowAlgebra {
    fn scalar_lie() -> Arc<FiniteLieAlgebra> {
        Arc::new(build_abelian(1).expect("abelian(1)"))
    }

    /// The function algebra 𝒜.
    pub fn functions(s: &MarkedSurface) -> Self {
        WindowAlgebra { surface: s.clone(), lie: Self::scalar_lie(), kind: AlgebraKind::Functions }
    }

    /// The vector field algebra ℒ.
    pub fn vector_fields(s: &MarkedSurface) -> Self {
        WindowAlgebra { surface: s.clone(), lie: Self::scalar_lie(), kind: AlgebraKind::VectorFields }
    }

    /// 𝒟¹ = 𝒜 ⊕ ℒ.
    pub fn d1(s: &MarkedSurface) -> Self {
        WindowAlgebra { surface: s.clone(), lie: Self::scalar_lie(), kind: AlgebraKind::D1 }
    }

    /// The current algebra 𝔤 ⊗ 𝒜.
    pub fn current(s: &MarkedSurface, g: Arc<FiniteLieAlgebra>) -> Self {
        WindowAlgebra { surface: s.clone(), lie: g, kind: AlgebraKind::Current }
    }

    /// 𝒟¹_𝔤 = (𝔤 ⊗ 𝒜) ⊕ ℒ.
    pub fn d1g(s: &MarkedSurface, g: Arc<FiniteLieAlgebra>) -> Self {
        WindowAlgebra { surface: s.clone(), lie: g, kind: AlgebraKind::D1g }
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn surface(&self) -> &MarkedSurface {
        &self.surface
    }

    pub fn lie(&self) -> &FiniteLieAlgebra {
        &self.lie
    }

    pub fn lie_arc(&self) -> Arc<FiniteLieAlgebra> {
        self.lie.clone()
    }

    pub fn has_currents(&self) -> bool {
        !matches!(self.kind, AlgebraKind::VectorFields)
    }

    pub fn has_vectors(&self) -> bool {
        matches!(self.kind, AlgebraKind::VectorFields | AlgebraKind::D1 | AlgebraKind::D1g)
    }

    /// The same surface and Lie algebra restricted to the current part.
    pub fn current_part(&self) -> Self {
        let kind = match self.kind {
            AlgebraKind::D1 | AlgebraKind::Functions => AlgebraKind::Functions,
            _ => AlgebraKind::Current,
        };
        WindowAlgebra { kind, ..self.clone() }
    }

    /// The same surface and Lie algebra with the vector fields adjoined.
    pub fn with_vectors(&self) -> Self {
        let kind = match self.kind {
            AlgebraKind::Functions | AlgebraKind::D1 | AlgebraKind::VectorFields => AlgebraKind::D1,
            _ => AlgebraKind::D1g,
        };
        WindowAlgebra { kind, ..self.clone() }
    }

    pub fn name(&self) -> String {
        match self.kind {
            AlgebraKind::Functions => "A".into(),
            AlgebraKind::VectorFields => "L".into(),
            AlgebraKind::D1 => "D1".into(),
            AlgebraKind::Current => format!("{}-current", self.lie.name()),
            AlgebraKind::D1g => format!("{}-D1", self.lie.name()),
        }
    }

    pub fn label(&self, e: &Elem) -> String {
        e.label(&self.lie)
    }

    /// Basis elements of degree in `[-w, w]`, currents first.
    pub fn basis(&self, w: i64) -> Vec<Elem> {
        let k = self.surface.k();
        let mut out = Vec::new();
        if self.has_currents() {
            for x in 0..self.lie.dim() {
                for n in -w..=w {
                    for p in 1..=k {
                        out.push(Elem::Cur { x, n, p });
                    }
                }
            }
        }
        if self.has_vectors() {
            for n in -w..=w {
                for p in 1..=k {
                    out.push(Elem::Vf { n, p });
                }
            }
        }
        out
    }

    pub fn contains(&self, e: &Elem) -> bool {
        match e {
            Elem::Cur { x, p, .. } => self.has_currents() && *x < self.lie.dim() && (1..=self.surface.k()).contains(p),
            Elem::Vf { p, .. } => self.has_vectors() && (1..=self.surface.k()).contains(p),
        }
    }

    /// Exact bracket of two basis elements.
    pub fn bracket(&self, a: &Elem, b: &Elem) -> Result<ElemVec> {
        if !self.contains(a) || !self.contains(b) {
            return Err(KnError::Domain(format!("{a} or {b} is not in {}", self.name())));
        }
        let s = &self.surface;
        let mut out = ElemVec::new();
        match (*a, *b) {
            (Elem::Cur { x, n, p }, Elem::Cur { x: y, n: m, p: r }) => {
                let consts = self.lie.bracket_basis(x, y);
                if consts.is_empty() {
                    return Ok(out);
                }
                let prod = cached_product(s, BasisOp::Mul, (n, p), (m, r));
                for (k, c) in consts {
                    for ((d, t), v) in &prod.entries {
                        out.insert(Elem::Cur { x: *k, n: *d, p: *t }, c * v);
                    }
                }
            }
            (Elem::Vf { n, p }, Elem::Cur { x, n: m, p: r }) => {
                let act = cached_product(s, BasisOp::Action(0), (n, p), (m, r));
                for ((d, t), v) in &act.entries {
                    out.insert(Elem::Cur { x, n: *d, p: *t }, v.clone());
                }
            }
            (Elem::Cur { .. }, Elem::Vf { .. }) => {
                let mut neg = self.bracket(b, a)?;
                for v in neg.values_mut() {
                    *v = -v.clone();
                }
                return Ok(neg);
            }
            (Elem::Vf { n, p }, Elem::Vf { n: m, p: r }) => {
                let br = cached_product(s, BasisOp::Bracket, (n, p), (m, r));
                for ((d, t), v) in &br.entries {
                    out.insert(Elem::Vf { n: *d, p: *t }, v.clone());
                }
            }
        }
        Ok(out)
    }

    /// Bilinear extension of [`WindowAlgebra::bracket`].
    pub fn bracket_vec(&self, u: &ElemVec, v: &ElemVec) -> Result<ElemVec> {
        let mut out = ElemVec::new();
        for (a, x) in u {
            for (b, y) in v {
                let br = self.bracket(a, b)?;
                add_scaled(&mut out, &br, &(x * y));
            }
        }
        Ok(out)
    }

    /// The unit function `1 = sum_p A_{0,p}` tensored with `x_a`.
    pub fn unit_current(&self, a: usize) -> ElemVec {
        let mut v = ElemVec::new();
        for p in 1..=self.surface.k() {
            v.insert(Elem::Cur { x: a, n: 0, p }, Scalar::from_integer(1.into()));
        }
        v
    }
}

/// A linear functional given on all basis elements of a degree window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFunctional {
    pub window: i64,
    pub values: BTreeMap<Elem, Scalar>,
}

impl LinearFunctional {
    pub fn zero(window: i64) -> Self {
        LinearFunctional { window, values: BTreeMap::new() }
    }

    /// Value on a combination; errors if any term lies outside the window.
    pub fn apply(&self, v: &ElemVec) -> Result<Scalar> {
        let mut acc = Scalar::zero();
        for (e, c) in v {
            if e.degree().abs() > self.window {
                return Err(KnError::WindowTooSmall(format!(
                    "functional known on degrees [-{w}, {w}] but applied to degree {d}",
                    w = self.window,
                    d = e.degree()
                )));
            }
            if let Some(x) = self.values.get(e) {
                acc += c * x;
            }
        }
        Ok(acc)
    }
}
