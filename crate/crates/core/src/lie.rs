//! Finite-dimensional Lie algebras given by structure constants, with
//! builders for abelian, sl(n), gl(n) and direct sums, invariant bilinear
//! forms, derived subalgebras and their annihilators.

use std::fmt;
use std::ops::Range;

use num_traits::{One, Zero};

use crate::error::{KnError, Result};
use crate::exact::{format_scalar, int, Scalar};
use crate::linalg;

/// Square matrix over the rationals, row-major.
pub type Matrix = Vec<Vec<Scalar>>;

/// Symmetric bilinear form as its Gram matrix in the Lie basis.
pub type BilinearForm = Matrix;

/// Linear form as its coefficient vector in the Lie basis.
pub type LinearForm = Vec<Scalar>;

/// Reductive decomposition data: dimension of the abelian part and the
/// number of simple summands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductiveInfo {
    pub abelian_dim: usize,
    pub simple_count: usize,
}

impl ReductiveInfo {
    /// Dimension of the space of symmetric invariant forms, `n(n+1)/2 + M`.
    pub fn invariant_form_count(&self) -> usize {
        self.abelian_dim * (self.abelian_dim + 1) / 2 + self.simple_count
    }
}

/// A direct summand occupying a contiguous block of basis indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub name: String,
    pub range: Range<usize>,
    pub simple: bool,
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteLieAlgebra {
    name: String,
    labels: Vec<String>,
    /// `consts[i][j]` lists `(k, c^k_{ij})` with nonzero coefficients.
    consts: Vec<Vec<Vec<(usize, Scalar)>>>,
    matrices: Option<Vec<Matrix>>,
    reductive: Option<ReductiveInfo>,
    summands: Vec<Summand>,
}

impl fmt::Debug for FiniteLieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {})", self.name, self.dim())
    }
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

fn trace(a: &Matrix) -> Scalar {
    (0..a.len()).map(|i| a[i][i].clone()).sum()
}

fn elementary(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = vec![vec![Scalar::zero(); n]; n];
    m[i][j] = Scalar::one();
    m
}

impl FiniteLieAlgebra {
    /// Builds an algebra from a structure-constant table
    /// `table[i][j] = [(k, c^k_{ij}), ...]`, rejecting tables that violate
    /// antisymmetry or the Jacobi identity (the failing triple is reported).
    pub fn from_structure_constants(
        name: &str,
        labels: Vec<String>,
        table: Vec<Vec<Vec<(usize, Scalar)>>>,
    ) -> Result<Self> {
        let d = labels.len();
        if d == 0 {
            return Err(KnError::InvalidLieAlgebra("dimension 0".into()));
        }
        if table.len() != d || table.iter().any(|row| row.len() != d) {
            return Err(KnError::InvalidLieAlgebra(format!("structure table must be {d}x{d}")));
        }
        let mut consts = table;
        for row in consts.iter_mut() {
            for entry in row.iter_mut() {
                if entry.iter().any(|(k, _)| *k >= d) {
                    return Err(KnError::InvalidLieAlgebra("structure constant index out of range".into()));
                }
                let mut merged: Vec<(usize, Scalar)> = Vec::new();
                for (k, c) in entry.drain(..) {
                    match merged.iter_mut().find(|(j, _)| *j == k) {
                        Some(e) => e.1 += c,
                        None => merged.push((k, c)),
                    }
                }
                merged.retain(|(_, c)| !c.is_zero());
                merged.sort_by_key(|e| e.0);
                *entry = merged;
            }
        }
        let g = FiniteLieAlgebra {
            name: name.into(),
            labels,
            consts,
            matrices: None,
            reductive: None,
            summands: vec![Summand { name: name.into(), range: 0..d, simple: false }],
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds the Lie algebra spanned by the given matrices (closed under the
    /// commutator, linearly independent).
    pub fn from_matrices(name: &str, labels: Vec<String>, mats: Vec<Matrix>) -> Result<Self> {
        let d = mats.len();
        if d == 0 || labels.len() != d {
            return Err(KnError::InvalidLieAlgebra("need one label per basis matrix".into()));
        }
        let flat: Vec<Vec<Scalar>> = mats.iter().map(|m| m.iter().flatten().cloned().collect()).collect();
        let width = flat[0].len();
        // Solve for coordinates: columns are basis matrices.
        let coords = |target: &[Scalar]| -> Option<Vec<Scalar>> {
            let mut rows: Vec<Vec<Scalar>> = (0..width)
                .map(|r| {
                    let mut row: Vec<Scalar> = flat.iter().map(|b| b[r].clone()).collect();
                    row.push(target[r].clone());
                    row
                })
                .collect();
            let pivots = linalg::rref(&mut rows, d + 1);
            if pivots.contains(&d) {
                return None;
            }
            let mut x = vec![Scalar::zero(); d];
            for (row, &pc) in rows.iter().zip(&pivots) {
                x[pc] = row[d].clone();
            }
            Some(x)
        };
        if linalg::rank(&flat, width) != d {
            return Err(KnError::InvalidLieAlgebra("basis matrices are linearly dependent".into()));
        }
        let mut table = vec![vec![Vec::new(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let ab = mat_mul(&mats[i], &mats[j]);
                let ba = mat_mul(&mats[j], &mats[i]);
                let comm: Vec<Scalar> = ab.iter().flatten().zip(ba.iter().flatten()).map(|(x, y)| x - y).collect();
                let x = coords(&comm)
                    .ok_or_else(|| KnError::InvalidLieAlgebra(format!("[{} , {}] leaves the span", labels[i], labels[j])))?;
                table[i][j] = x.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
            }
        }
        let mut g = Self::from_structure_constants(name, labels, table)?;
        g.matrices = Some(mats);
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                let a = self.bracket_basis(i, j);
                let b = self.bracket_basis(j, i);
                let mut sum = vec![Scalar::zero(); d];
                for (k, c) in a.iter().chain(b) {
                    sum[*k] += c;
                }
                if sum.iter().any(|c| !c.is_zero()) {
                    return Err(KnError::InvalidLieAlgebra(format!(
                        "antisymmetry fails for ({}, {})",
                        self.labels[i], self.labels[j]
                    )));
                }
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let v = self.jacobiator(i, j, k);
                    if v.iter().any(|c| !c.is_zero()) {
                        return Err(KnError::InvalidLieAlgebra(format!(
                            "Jacobi identity fails for ({}, {}, {})",
                            self.labels[i], self.labels[j], self.labels[k]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn jacobiator(&self, i: usize, j: usize, k: usize) -> Vec<Scalar> {
        let d = self.dim();
        let mut out = vec![Scalar::zero(); d];
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            for (l, x) in self.bracket_basis(b, c) {
                for (m, y) in self.bracket_basis(a, *l) {
                    out[*m] += x * y;
                }
            }
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrices(&self) -> Option<&[Matrix]> {
        self.matrices.as_deref()
    }

    pub fn reductive(&self) -> Option<&ReductiveInfo> {
        self.reductive.as_ref()
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    fn with_metadata(mut self, reductive: ReductiveInfo, simple: bool) -> Self {
        self.reductive = Some(reductive);
        let d = self.dim();
        self.summands = vec![Summand { name: self.name.clone(), range: 0..d, simple }];
        self
    }

    /// `[x_i, x_j]` as sparse coordinates.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, Scalar)] {
        &self.consts[i][j]
    }

    /// Bracket of coordinate vectors.
    pub fn bracket(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let d = self.dim();
        let mut out = vec![Scalar::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, c) in self.bracket_basis(i, j) {
                    out[*k] += &xy * c;
                }
            }
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.consts.iter().all(|row| row.iter().all(Vec::is_empty))
    }

    /// `α([x,y], z) = α(x, [y,z])` on all basis triples.
    pub fn is_invariant(&self, alpha: &BilinearForm) -> bool {
        self.invariance_violation(alpha).is_none()
    }

    /// First basis triple violating invariance, if any.
    pub fn invariance_violation(&self, alpha: &BilinearForm) -> Option<(usize, usize, usize)> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let lhs: Scalar = self.bracket_basis(i, j).iter().map(|(l, c)| c * &alpha[*l][k]).sum();
                    let rhs: Scalar = self.bracket_basis(j, k).iter().map(|(l, c)| c * &alpha[i][*l]).sum();
                    if lhs != rhs {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn is_symmetric(alpha: &BilinearForm) -> bool {
        (0..alpha.len()).all(|i| (0..i).all(|j| alpha[i][j] == alpha[j][i]))
    }

    /// `β(x, y) = tr(xy)` in the matrix realization.
    pub fn trace_form(&self) -> Result<BilinearForm> {
        let mats = self.matrices.as_ref().ok_or_else(|| KnError::InvalidLieAlgebra(format!("{} has no matrix realization", self.name)))?;
        Ok(mats.iter().map(|a| mats.iter().map(|b| trace(&mat_mul(a, b))).collect()).collect())
    }

    /// `α₂(x, y) = tr(x) tr(y)` in the matrix realization.
    pub fn trace_outer_form(&self) -> Result<BilinearForm> {
        let mats = self.matrices.as_ref().ok_or_else(|| KnError::InvalidLieAlgebra(format!("{} has no matrix realization", self.name)))?;
        let traces: Vec<Scalar> = mats.iter().map(trace).collect();
        Ok(traces.iter().map(|a| traces.iter().map(|b| a * b).collect()).collect())
    }

    /// The trace functional `x ↦ tr(x)` in the matrix realization.
    pub fn trace_functional(&self) -> Result<LinearForm> {
        let mats = self.matrices.as_ref().ok_or_else(|| KnError::InvalidLieAlgebra(format!("{} has no matrix realization", self.name)))?;
        Ok(mats.iter().map(trace).collect())
    }

    /// `ad(x_i)` as a matrix acting on coordinate columns.
    pub fn ad(&self, i: usize) -> Matrix {
        let d = self.dim();
        let mut m = vec![vec![Scalar::zero(); d]; d];
        for j in 0..d {
            for (k, c) in self.bracket_basis(i, j) {
                m[*k][j] = c.clone();
            }
        }
        m
    }

    /// Killing form `tr(ad x ad y)`.
    pub fn killing_form(&self) -> BilinearForm {
        let ads: Vec<Matrix> = (0..self.dim()).map(|i| self.ad(i)).collect();
        ads.iter().map(|a| ads.iter().map(|b| trace(&mat_mul(a, b))).collect()).collect()
    }

    /// Basis of the space of symmetric invariant bilinear forms.
    pub fn invariant_form_space(&self) -> Vec<BilinearForm> {
        let d = self.dim();
        // unknowns α_{ab}, a <= b
        let idx = |a: usize, b: usize| {
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            a * d - a * (a + 1) / 2 + b
        };
        let nvars = d * (d + 1) / 2;
        let mut rows = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut row = vec![Scalar::zero(); nvars];
                    for (l, c) in self.bracket_basis(i, j) {
                        row[idx(*l, k)] += c;
                    }
                    for (l, c) in self.bracket_basis(j, k) {
                        row[idx(i, *l)] -= c;
                    }
                    if row.iter().any(|c| !c.is_zero()) {
                        rows.push(row);
                    }
                }
            }
        }
        linalg::nullspace(&rows, nvars)
            .into_iter()
            .map(|v| (0..d).map(|a| (0..d).map(|b| v[idx(a, b)].clone()).collect()).collect())
            .collect()
    }

    /// Basis (reduced rows) of `𝔤' = [𝔤, 𝔤]`.
    pub fn derived_subalgebra(&self) -> Vec<Vec<Scalar>> {
        let d = self.dim();
        let mut rows = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                let mut v = vec![Scalar::zero(); d];
                for (k, c) in self.bracket_basis(i, j) {
                    v[*k] = c.clone();
                }
                if v.iter().any(|c| !c.is_zero()) {
                    rows.push(v);
                }
            }
        }
        linalg::row_space(&rows, d)
    }

    /// Basis of linear forms `φ` with `φ([x, y]) = 0` for all `x, y`.
    pub fn linear_forms_vanishing_on_derived(&self) -> Vec<LinearForm> {
        let derived = self.derived_subalgebra();
        linalg::nullspace(&derived, self.dim())
    }

    /// Whether `φ` vanishes on all brackets.
    pub fn vanishes_on_derived(&self, phi: &[Scalar]) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| self.bracket_basis(i, j).iter().map(|(k, c)| c * &phi[*k]).sum::<Scalar>().is_zero()))
    }

    pub fn is_perfect(&self) -> bool {
        self.derived_subalgebra().len() == self.dim()
    }

    /// Writes `x_k` as a combination of brackets `[x_i, x_j]`, when possible.
    pub fn express_as_brackets(&self, k: usize) -> Option<Vec<(usize, usize, Scalar)>> {
        let d = self.dim();
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        // columns = pairs, rows = coordinates, augmented with e_k
        let mut rows: Vec<Vec<Scalar>> = (0..d)
            .map(|r| {
                let mut row: Vec<Scalar> = pairs
                    .iter()
                    .map(|&(i, j)| self.bracket_basis(i, j).iter().find(|(l, _)| *l == r).map_or_else(Scalar::zero, |e| e.1.clone()))
                    .collect();
                row.push(if r == k { Scalar::one() } else { Scalar::zero() });
                row
            })
            .collect();
        let np = pairs.len();
        let pivots = linalg::rref(&mut rows, np + 1);
        if pivots.contains(&np) {
            return None;
        }
        Some(
            rows.iter()
                .zip(&pivots)
                .filter(|(row, _)| !row[np].is_zero())
                .map(|(row, &pc)| (pairs[pc].0, pairs[pc].1, row[np].clone()))
                .collect(),
        )
    }

    pub fn describe_form(&self, alpha: &BilinearForm) -> String {
        let mut parts = Vec::new();
        for i in 0..self.dim() {
            for j in i..self.dim() {
                if !alpha[i][j].is_zero() {
                    parts.push(format!("({},{})={}", self.labels[i], self.labels[j], format_scalar(&alpha[i][j])));
                }
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(", ")
        }
    }
}

/// The abelian Lie algebra of dimension `n`, realized by diagonal matrices.
pub fn build_abelian(n: usize) -> Result<FiniteLieAlgebra> {
    if n == 0 {
        return Err(KnError::InvalidLieAlgebra("abelian(0) is not allowed".into()));
    }
    let labels = (1..=n).map(|i| format!("x{i}")).collect();
    let mats = (0..n).map(|i| elementary(n, i, i)).collect();
    let g = FiniteLieAlgebra::from_matrices(&format!("abelian({n})"), labels, mats)?;
    Ok(g.with_metadata(ReductiveInfo { abelian_dim: n, simple_count: 0 }, false))
}

/// `sl(n)` in the basis `E_ij` (`i != j`, row-major) followed by
/// `H_i = E_ii - E_{i+1,i+1}`. For `n = 2` the labels are `e, f, h`.
pub fn build_sl(n: usize) -> Result<FiniteLieAlgebra> {
    if n < 2 {
        return Err(KnError::InvalidLieAlgebra(format!("sl({n}) requires n >= 2")));
    }
    let mut labels = Vec::new();
    let mut mats = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                labels.push(format!("E{}{}", i + 1, j + 1));
                mats.push(elementary(n, i, j));
            }
        }
    }
    for i in 0..n - 1 {
        labels.push(format!("H{}", i + 1));
        let mut h = elementary(n, i, i);
        h[i + 1][i + 1] = int(-1);
        mats.push(h);
    }
    if n == 2 {
        labels = vec!["e".into(), "f".into(), "h".into()];
    }
    let g = FiniteLieAlgebra::from_matrices(&format!("sl({n})"), labels, mats)?;
    Ok(g.with_metadata(ReductiveInfo { abelian_dim: 0, simple_count: 1 }, true))
}

/// `gl(n)` in the basis of elementary matrices `E_ij`, row-major.
pub fn build_gl(n: usize) -> Result<FiniteLieAlgebra> {
    if n == 0 {
        return Err(KnError::InvalidLieAlgebra("gl(0) is not allowed".into()));
    }
    let mut labels = Vec::new();
    let mut mats = Vec::new();
    for i in 0..n {
        for j in 0..n {
            labels.push(format!("E{}{}", i + 1, j + 1));
            mats.push(elementary(n, i, j));
        }
    }
    let g = FiniteLieAlgebra::from_matrices(&format!("gl({n})"), labels, mats)?;
    let simple = usize::from(n >= 2);
    let mut g = g.with_metadata(ReductiveInfo { abelian_dim: 1, simple_count: simple }, false);
    if n == 1 {
        g.reductive = Some(ReductiveInfo { abelian_dim: 1, simple_count: 0 });
    }
    Ok(g)
}

/// Direct sum; summands occupy consecutive basis blocks. Matrix realizations
/// combine block-diagonally when every summand has one.
pub fn direct_sum(parts: &[FiniteLieAlgebra]) -> Result<FiniteLieAlgebra> {
    if parts.is_empty() {
        return Err(KnError::InvalidLieAlgebra("empty direct sum".into()));
    }
    let d: usize = parts.iter().map(|g| g.dim()).sum();
    let name = parts.iter().map(|g| g.name.clone()).collect::<Vec<_>>().join("+");
    let mut labels = Vec::with_capacity(d);
    let mut table = vec![vec![Vec::new(); d]; d];
    let mut summands = Vec::new();
    let mut offset = 0;
    for (idx, g) in parts.iter().enumerate() {
        for l in &g.labels {
            labels.push(if parts.len() > 1 { format!("{l}_{}", idx + 1) } else { l.clone() });
        }
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                table[offset + i][offset + j] =
                    g.bracket_basis(i, j).iter().map(|(k, c)| (offset + k, c.clone())).collect();
            }
        }
        for s in &g.summands {
            summands.push(Summand {
                name: s.name.clone(),
                range: offset + s.range.start..offset + s.range.end,
                simple: s.simple,
            });
        }
        offset += g.dim();
    }
    let mut g = FiniteLieAlgebra::from_structure_constants(&name, labels, table)?;
    g.summands = summands;
    if parts.iter().all(|p| p.matrices.is_some()) {
        let size: usize = parts.iter().map(|p| p.matrices.as_ref().unwrap()[0].len()).sum();
        let mut mats = Vec::with_capacity(d);
        let mut moff = 0;
        for p in parts {
            let pm = p.matrices.as_ref().unwrap();
            let k = pm[0].len();
            for m in pm {
                let mut big = vec![vec![Scalar::zero(); size]; size];
                for i in 0..k {
                    for j in 0..k {
                        big[moff + i][moff + j] = m[i][j].clone();
                    }
                }
                mats.push(big);
            }
            moff += k;
        }
        g.matrices = Some(mats);
    }
    if parts.iter().all(|p| p.reductive.is_some()) {
        g.reductive = Some(ReductiveInfo {
            abelian_dim: parts.iter().map(|p| p.reductive.as_ref().unwrap().abelian_dim).sum(),
            simple_count: parts.iter().map(|p| p.reductive.as_ref().unwrap().simple_count).sum(),
        });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(g: &FiniteLieAlgebra, i: usize, j: usize) -> Vec<(usize, Scalar)> {
        g.bracket_basis(i, j).to_vec()
    }

    #[test]
    fn sl2_chevalley_relations() {
        let g = build_sl(2).unwrap();
        assert_eq!(coords(&g, 0, 1), vec![(2, int(1))]); // [e,f] = h
        assert_eq!(coords(&g, 2, 0), vec![(0, int(2))]); // [h,e] = 2e
        assert_eq!(coords(&g, 2, 1), vec![(1, int(-2))]); // [h,f] = -2f
    }

    #[test]
    fn trace_and_killing_forms() {
        let g = build_sl(2).unwrap();
        let b = g.trace_form().unwrap();
        assert_eq!(b[2][2], int(2));
        assert_eq!(b[0][1], int(1));
        assert_eq!(b[2][0], int(0));
        let k = g.killing_form();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k[i][j], &b[i][j] * int(4));
            }
        }
        assert!(g.is_invariant(&b));
    }

    #[test]
    fn invariant_form_dimensions() {
        assert_eq!(build_abelian(2).unwrap().invariant_form_space().len(), 3);
        assert_eq!(build_sl(2).unwrap().invariant_form_space().len(), 1);
        assert_eq!(build_gl(2).unwrap().invariant_form_space().len(), 2);
        let ss = direct_sum(&[build_sl(2).unwrap(), build_sl(2).unwrap()]).unwrap();
        assert_eq!(ss.invariant_form_space().len(), 2);
        assert_eq!(ss.reductive().unwrap().invariant_form_count(), 2);
    }

    #[test]
    fn derived_and_annihilator() {
        let gl = build_gl(2).unwrap();
        assert_eq!(gl.derived_subalgebra().len(), 3);
        let ann = gl.linear_forms_vanishing_on_derived();
        assert_eq!(ann.len(), 1);
        let tr = gl.trace_functional().unwrap();
        // annihilator is spanned by the trace
        assert_eq!(linalg::rank(&[ann[0].clone(), tr.clone()], 4), 1);
        assert!(build_sl(3).unwrap().linear_forms_vanishing_on_derived().is_empty());
        assert_eq!(build_abelian(3).unwrap().linear_forms_vanishing_on_derived().len(), 3);
        assert!(build_sl(2).unwrap().is_perfect());
        assert!(build_sl(2).unwrap().express_as_brackets(2).is_some());
    }

    #[test]
    fn gl_trace_forms() {
        let gl = build_gl(2).unwrap();
        let a1 = gl.trace_form().unwrap();
        let a2 = gl.trace_outer_form().unwrap();
        assert!(gl.is_invariant(&a1) && gl.is_invariant(&a2));
        let flat = |m: &BilinearForm| m.iter().flatten().cloned().collect::<Vec<_>>();
        assert_eq!(linalg::rank(&[flat(&a1), flat(&a2)], 16), 2);
    }

    #[test]
    fn rejects_bad_tables() {
        // [x0,x1] = x2, [x1,x2] = x0, [x0,x2] = x0 violates Jacobi
        let labels: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let mut t = vec![vec![Vec::new(); 3]; 3];
        t[0][1] = vec![(2, int(1))];
        t[1][0] = vec![(2, int(-1))];
        t[1][2] = vec![(0, int(1))];
        t[2][1] = vec![(0, int(-1))];
        t[0][2] = vec![(0, int(1))];
        t[2][0] = vec![(0, int(-1))];
        let err = FiniteLieAlgebra::from_structure_constants("bad", labels.clone(), t).unwrap_err();
        assert!(matches!(err, KnError::InvalidLieAlgebra(msg) if msg.contains("Jacobi")));
        let mut t = vec![vec![Vec::new(); 3]; 3];
        t[0][1] = vec![(2, int(1))];
        let err = FiniteLieAlgebra::from_structure_constants("bad", labels, t).unwrap_err();
        assert!(matches!(err, KnError::InvalidLieAlgebra(msg) if msg.contains("antisymmetry")));
    }
}
