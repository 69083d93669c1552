//! Window-truncated linear algebra for cocycles: matrices, coboundary
//! feasibility certificates, ranks modulo coboundaries, ℒ-invariant
//! uniqueness probes and the rank of residue vectors of `f dg`.
//!
//! Only constraints whose brackets lie entirely inside the window enter a
//! system. Restricting a global identity to such constraints is sound, so an
//! infeasible window system certifies that a cocycle is not a coboundary and
//! window ranks are lower bounds. A feasible window system proves nothing
//! globally and is reported as inconclusive.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{MarkedSurface, Section};
use crate::cocycles::CheckReport;
use crate::current::{bracket_reach, check_L_invariance_current, coboundary_of, CocycleEvaluator, CurrentCocycleSpec};
use crate::error::{KnError, Result};
use crate::exact::{derivative, int, residue_form, RationalFunction, Scalar};
use crate::linalg::{Echelon, Insertion, SparseVec};
use crate::window::{Elem, LinearFunctional, WindowAlgebra};

/// All values of a cocycle on pairs of window basis elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowMatrix {
    pub algebra: String,
    pub window: i64,
    pub basis: Vec<Elem>,
    pub labels: Vec<String>,
    pub entries: Vec<Vec<Scalar>>,
}

impl WindowMatrix {
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i][j]
    }

    /// Level of an entry: the sum of the two degrees.
    pub fn level(&self, i: usize, j: usize) -> i64 {
        self.basis[i].degree() + self.basis[j].degree()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Zero::is_zero)
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.basis.len();
        (0..n).all(|i| (0..n).all(|j| (&self.entries[i][j] + &self.entries[j][i]).is_zero()))
    }

    /// Number of nonzero entries per level.
    pub fn level_profile(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    *out.entry(self.level(i, j)).or_insert(0) += 1;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &WindowMatrix) -> Result<WindowMatrix> {
        if self.basis != other.basis {
            return Err(KnError::Domain("window matrices over different bases".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(WindowMatrix { entries, ..self.clone() })
    }
}

/// Smallest and largest level carrying a nonzero entry.
pub fn locality_bounds(m: &WindowMatrix) -> Option<(i64, i64)> {
    let profile = m.level_profile();
    Some((*profile.keys().next()?, *profile.keys().next_back()?))
}

/// Evaluates a spec on every pair of window basis elements.
pub fn cocycle_matrix(alg: &WindowAlgebra, spec: &CurrentCocycleSpec, w: i64) -> Result<WindowMatrix> {
    let ev = CocycleEvaluator::new(alg, spec)?;
    let basis = alg.basis(w);
    let n = basis.len();
    let rows: Result<Vec<Vec<Scalar>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j <= i {
                        return Ok(Scalar::zero());
                    }
                    ev.pair(&basis[i], &basis[j]).map_err(|e| match e {
                        KnError::OutsideWindow(msg) => KnError::WindowTooSmall(msg),
                        e => e,
                    })
                })
                .collect()
        })
        .collect();
    let mut entries = rows?;
    for i in 0..n {
        for j in 0..i {
            entries[i][j] = -entries[j][i].clone();
        }
    }
    Ok(WindowMatrix {
        algebra: alg.name(),
        window: w,
        labels: basis.iter().map(|e| alg.label(e)).collect(),
        basis,
        entries,
    })
}

/// The coboundary constraint `δφ(b_i, b_j) = φ([b_i, b_j])` for every pair
/// whose bracket lies inside the window.
struct CoboundarySystem {
    pairs: Vec<(usize, usize)>,
    rows: Vec<SparseVec>,
    unknowns: usize,
}

fn coboundary_system(alg: &WindowAlgebra, basis: &[Elem]) -> Result<CoboundarySystem> {
    let index: HashMap<Elem, usize> = basis.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let n = basis.len();
    let per_row: Result<Vec<Vec<((usize, usize), SparseVec)>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            'pairs: for j in i + 1..n {
                let br = alg.bracket(&basis[i], &basis[j])?;
                let mut row = SparseVec::new();
                for (e, c) in br {
                    match index.get(&e) {
                        Some(&k) => {
                            row.insert(k, c);
                        }
                        None => continue 'pairs,
                    }
                }
                out.push(((i, j), row));
            }
            Ok(out)
        })
        .collect();
    let (pairs, rows) = per_row?.into_iter().flatten().unzip();
    Ok(CoboundarySystem { pairs, rows, unknowns: n })
}

/// Largest `w' ≤ w` whose brackets all stay inside degree `w`.
pub fn inner_window(alg: &WindowAlgebra, w: i64) -> Result<Option<i64>> {
    for v in (0..=w).rev() {
        if bracket_reach(alg, v)? <= w {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Result of solving `δφ = γ` on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// A window functional with `φ([a,b]) = γ(a,b)` on every constraint pair.
    /// Inconclusive for global triviality.
    CoboundaryOnWindow { witness: BTreeMap<Elem, Scalar> },
    /// A combination `Σ y_k (a_k, b_k)` of constraint pairs on which every
    /// coboundary vanishes while `Σ y_k γ(a_k, b_k) = value ≠ 0`.
    NotCoboundary { combination: Vec<(Elem, Elem, Scalar)>, value: Scalar },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityCertificate {
    pub verdict: Verdict,
    pub window: i64,
    /// Every pair of elements of degree at most this bracket into the window.
    pub inner_window: Option<i64>,
    pub constraints: usize,
    pub unknowns: usize,
    /// The witness or the infeasible combination re-verified exactly, and
    /// for infeasibility an independent rank comparison on a shuffled order.
    pub verified: bool,
}

impl FeasibilityCertificate {
    pub fn is_coboundary_on_window(&self) -> bool {
        matches!(self.verdict, Verdict::CoboundaryOnWindow { .. })
    }

    pub fn is_not_coboundary(&self) -> bool {
        matches!(self.verdict, Verdict::NotCoboundary { .. }) && self.verified
    }

    pub fn summary(&self) -> String {
        match &self.verdict {
            Verdict::CoboundaryOnWindow { .. } => format!(
                "coboundary on window {} ({} constraints): inconclusive for global triviality",
                self.window, self.constraints
            ),
            Verdict::NotCoboundary { combination, value } => format!(
                "not a coboundary: {} constraint pairs combine to 0 = {value} (window {}, verified: {})",
                combination.len(),
                self.window,
                self.verified
            ),
        }
    }
}

fn rank_with_rhs(rows: &[SparseVec], rhs: &[Scalar], order: &[usize], augment: usize) -> (usize, usize) {
    let mut plain = Echelon::new(false);
    let mut aug = Echelon::new(false);
    for &k in order {
        plain.insert(k, rows[k].clone(), Scalar::zero());
        let mut row = rows[k].clone();
        if !rhs[k].is_zero() {
            row.insert(augment, rhs[k].clone());
        }
        aug.insert(k, row, Scalar::zero());
    }
    (plain.rank(), aug.rank())
}

/// Decides whether a window matrix is the restriction of a coboundary.
pub fn coboundary_feasible(alg: &WindowAlgebra, m: &WindowMatrix) -> Result<FeasibilityCertificate> {
    if m.basis != alg.basis(m.window) {
        return Err(KnError::Domain(format!("matrix is not over the window basis of {}", alg.name())));
    }
    let sys = coboundary_system(alg, &m.basis)?;
    if sys.pairs.is_empty() {
        return Err(KnError::WindowTooSmall(format!("no bracket of window {} stays inside it", m.window)));
    }
    let rhs: Vec<Scalar> = sys.pairs.iter().map(|&(i, j)| m.get(i, j).clone()).collect();
    let mut ech = Echelon::new(true);
    let mut conflict = None;
    for (k, row) in sys.rows.iter().enumerate() {
        if let Insertion::Inconsistent { combo } = ech.insert(k, row.clone(), rhs[k].clone()) {
            conflict = Some(combo);
            break;
        }
    }
    let inner = inner_window(alg, m.window)?;
    let (verdict, verified) = match conflict {
        Some(combo) => {
            let mut lhs = SparseVec::new();
            let mut value = Scalar::zero();
            for (&k, y) in &combo {
                for (c, v) in &sys.rows[k] {
                    *lhs.entry(*c).or_insert_with(Scalar::zero) += y * v;
                }
                value += y * &rhs[k];
            }
            let exact = lhs.values().all(Zero::is_zero) && !value.is_zero();
            let mut order: Vec<usize> = (0..sys.rows.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
            let (ra, rab) = rank_with_rhs(&sys.rows, &rhs, &order, sys.unknowns);
            let combination =
                combo.iter().map(|(&k, y)| (m.basis[sys.pairs[k].0], m.basis[sys.pairs[k].1], y.clone())).collect();
            (Verdict::NotCoboundary { combination, value }, exact && rab > ra)
        }
        None => {
            let x = ech.solve(sys.unknowns);
            let ok = sys.rows.iter().zip(&rhs).all(|(row, b)| {
                let v: Scalar = row.iter().map(|(c, a)| a * &x[*c]).sum();
                &v == b
            });
            let witness = m.basis.iter().zip(x).filter(|(_, v)| !v.is_zero()).map(|(e, v)| (*e, v)).collect();
            (Verdict::CoboundaryOnWindow { witness }, ok)
        }
    };
    Ok(FeasibilityCertificate {
        verdict,
        window: m.window,
        inner_window: inner,
        constraints: sys.pairs.len(),
        unknowns: sys.unknowns,
        verified,
    })
}

/// Rank of a cocycle family modulo window coboundaries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyRank {
    pub window: i64,
    pub constraints: usize,
    pub coboundary_rank: usize,
    /// Rank of the family in the quotient: a certified lower bound for the
    /// dimension of the span of the classes.
    pub rank: usize,
    /// Indices of family members that are independent modulo coboundaries.
    pub independent: Vec<usize>,
    /// For each dependent member `k`: coefficients `c_j` (with `c_k = 1`)
    /// such that `Σ c_j γ_j` is a coboundary on the window.
    pub dependencies: Vec<(usize, Vec<(usize, Scalar)>)>,
}

pub fn family_rank(alg: &WindowAlgebra, specs: &[CurrentCocycleSpec], w: i64) -> Result<FamilyRank> {
    let basis = alg.basis(w);
    let sys = coboundary_system(alg, &basis)?;
    if sys.pairs.is_empty() {
        return Err(KnError::WindowTooSmall(format!("no bracket of window {w} stays inside it")));
    }
    // coboundary generators: the image of each dual basis functional
    let mut gens = vec![SparseVec::new(); sys.unknowns];
    for (k, row) in sys.rows.iter().enumerate() {
        for (c, v) in row {
            gens[*c].insert(k, v.clone());
        }
    }
    let mut ech = Echelon::new(true);
    for (c, g) in gens.into_iter().enumerate() {
        ech.insert(c, g, Scalar::zero());
    }
    let coboundary_rank = ech.rank();
    let matrices: Result<Vec<WindowMatrix>> = specs.par_iter().map(|s| cocycle_matrix(alg, s, w)).collect();
    let offset = sys.unknowns;
    let mut independent = Vec::new();
    let mut dependencies = Vec::new();
    for (k, m) in matrices?.iter().enumerate() {
        let row: SparseVec = sys
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, (i, j))| !m.get(*i, *j).is_zero())
            .map(|(r, (i, j))| (r, m.get(*i, *j).clone()))
            .collect();
        match ech.insert(offset + k, row, Scalar::zero()) {
            Insertion::Pivot(_) => independent.push(k),
            Insertion::Dependent { combo } => {
                let coeffs = combo.range(offset..).map(|(id, c)| (id - offset, c.clone())).collect();
                dependencies.push((k, coeffs));
            }
            Insertion::Inconsistent { .. } => unreachable!("homogeneous system"),
        }
    }
    Ok(FamilyRank {
        window: w,
        constraints: sys.pairs.len(),
        coboundary_rank,
        rank: independent.len(),
        independent,
        dependencies,
    })
}

/// Outcome of the ℒ-invariant uniqueness probe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub representative_invariance: CheckReport,
    /// Highest level with a nonzero value of the representative on the window.
    pub representative_max_level: Option<i64>,
    pub samples: usize,
    /// Samples whose coboundary was ℒ-invariant on the window.
    pub invariant_samples: usize,
    /// Samples with a nonzero ℒ-invariant coboundary (must be none).
    pub counterexamples: Vec<usize>,
}

impl ProbeReport {
    pub fn representative_ok(&self) -> bool {
        self.representative_invariance.passed() && self.representative_max_level.map_or(true, |l| l <= 0)
    }

    pub fn passed(&self) -> bool {
        self.representative_ok() && self.counterexamples.is_empty()
    }
}

/// Checks that the representative is local and ℒ-invariant, then samples
/// seeded window functionals `φ` (the first one zero) and confirms that no
/// nonzero coboundary `δφ` is ℒ-invariant on the window.
#[allow(non_snake_case)]
pub fn l_invariant_uniqueness_probe(
    alg: &WindowAlgebra,
    representative: &CurrentCocycleSpec,
    w: i64,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let cur = alg.current_part();
    let invariance = check_L_invariance_current(&cur, representative, w)?;
    let matrix = cocycle_matrix(&cur, representative, w)?;
    let max_level = locality_bounds(&matrix).map(|(_, hi)| hi);
    let reach = bracket_reach(&cur, w)?;
    let domain = cur.basis(reach);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phis: Vec<LinearFunctional> = (0..samples)
        .map(|k| {
            let mut phi = LinearFunctional::zero(reach);
            if k > 0 {
                for e in &domain {
                    let v: i64 = rng.gen_range(-3..=3);
                    if v != 0 {
                        phi.values.insert(*e, int(v));
                    }
                }
            }
            phi
        })
        .collect();
    let outcomes: Result<Vec<(bool, bool)>> = phis
        .iter()
        .map(|phi| {
            let delta = coboundary_of(&cur, phi, w)?;
            let nonzero = match &delta {
                CurrentCocycleSpec::UserMatrix(m) => m.nonzero_entries().next().is_some(),
                _ => unreachable!("coboundary_of returns a table"),
            };
            let inv = check_L_invariance_current(&cur, &delta, w)?;
            Ok((inv.violation.is_none(), nonzero))
        })
        .collect();
    let outcomes = outcomes?;
    Ok(ProbeReport {
        representative_invariance: invariance,
        representative_max_level: max_level,
        samples,
        invariant_samples: outcomes.iter().filter(|o| o.0).count(),
        counterexamples: outcomes.iter().enumerate().filter(|(_, o)| o.0 && o.1).map(|(k, _)| k).collect(),
    })
}

/// Rank of the residue vectors `(res_P(f dg))_{P ∈ A}` over window function
/// pairs. The residue theorem bounds it by `N − 1`.
pub fn kahler_rank(s: &MarkedSurface, w: i64) -> Result<usize> {
    let funcs: Vec<Section> = (-w..=w)
        .flat_map(|n| (1..=s.k()).map(move |p| (n, p)))
        .map(|(n, p)| s.basis_element(0, n, p).map(|b| b.section.clone()))
        .collect::<Result<_>>()?;
    let diffs: Vec<RationalFunction> = funcs.iter().map(|f| derivative(&f.f, 1)).collect();
    let points = s.points();
    let vectors: Result<Vec<SparseVec>> = (0..funcs.len())
        .into_par_iter()
        .flat_map_iter(|i| (i + 1..funcs.len()).map(move |j| (i, j)))
        .map(|(i, j)| {
            let form = &funcs[i].f * &diffs[j];
            Ok(points
                .iter()
                .enumerate()
                .map(|(k, p)| (k, residue_form(&form, p)))
                .filter(|(_, v)| !v.is_zero())
                .collect())
        })
        .collect();
    let mut ech = Echelon::new(false);
    for (k, v) in vectors?.into_iter().enumerate() {
        ech.insert(k, v, Scalar::zero());
    }
    Ok(ech.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::ConnectionChoice;
    use crate::lie::build_sl;
    use std::sync::Arc;

    #[test]
    fn classical_matrices() {
        let s = MarkedSurface::classical();
        let m = cocycle_matrix(&WindowAlgebra::functions(&s), &CurrentCocycleSpec::affine(vec![vec![int(1)]]), 3).unwrap();
        assert!(m.is_antisymmetric());
        for i in 0..m.basis.len() {
            for j in 0..m.basis.len() {
                let (n, k) = (m.basis[i].degree(), m.basis[j].degree());
                assert_eq!(m.get(i, j), &if n + k == 0 { int(-n) } else { int(0) });
            }
        }
        let v = cocycle_matrix(&WindowAlgebra::vector_fields(&s), &CurrentCocycleSpec::vector_field(), 3).unwrap();
        assert_eq!(locality_bounds(&v), Some((0, 0)));
        assert!(cocycle_matrix(&WindowAlgebra::vector_fields(&s), &CurrentCocycleSpec::zero(), 3).unwrap().is_zero());
    }

    #[test]
    fn feasibility_round_trip_and_nontriviality() {
        let s = MarkedSurface::classical();
        let alg = WindowAlgebra::current(&s, Arc::new(build_sl(2).unwrap()));
        let mut phi = LinearFunctional::zero(8);
        phi.values.insert(Elem::Cur { x: 2, n: 0, p: 1 }, int(1));
        phi.values.insert(Elem::Cur { x: 0, n: 1, p: 1 }, int(-2));
        let delta = coboundary_of(&alg, &phi, 4).unwrap();
        let m = cocycle_matrix(&alg, &delta, 4).unwrap();
        let cert = coboundary_feasible(&alg, &m).unwrap();
        assert!(cert.is_coboundary_on_window() && cert.verified);
        let killing = CurrentCocycleSpec::affine(alg.lie().trace_form().unwrap());
        let cert = coboundary_feasible(&alg, &cocycle_matrix(&alg, &killing, 4).unwrap()).unwrap();
        assert!(cert.is_not_coboundary(), "{}", cert.summary());
    }

    #[test]
    fn d1_family_and_connection_change() {
        let s = MarkedSurface::classical();
        let alg = WindowAlgebra::d1(&s);
        let fam = [
            CurrentCocycleSpec::affine(vec![vec![int(1)]]),
            CurrentCocycleSpec::mixing(vec![int(1)]),
            CurrentCocycleSpec::vector_field(),
            CurrentCocycleSpec::vector_field().scaled(int(7)),
        ];
        let r = family_rank(&alg, &fam, 4).unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.dependencies.len(), 1);
        let l = WindowAlgebra::vector_fields(&s);
        let r2 = RationalFunction::monomial(int(3), -2);
        let a = cocycle_matrix(&l, &CurrentCocycleSpec::vector_field(), 4).unwrap();
        let spec = CurrentCocycleSpec::VectorField { r: r2.clone(), cycle: crate::cocycles::Cycle::Separating };
        ConnectionChoice::projective(r2).validate(&s).unwrap();
        let b = cocycle_matrix(&l, &spec, 4).unwrap();
        assert!(a != b);
        assert!(coboundary_feasible(&l, &b.sub(&a).unwrap()).unwrap().is_coboundary_on_window());
    }

    #[test]
    fn kahler_ranks() {
        assert_eq!(kahler_rank(&MarkedSurface::classical(), 2).unwrap(), 1);
        let s = MarkedSurface::from_finite(&[int(0), int(1)], &[]).unwrap();
        assert_eq!(kahler_rank(&s, 3).unwrap(), 2);
    }
}
