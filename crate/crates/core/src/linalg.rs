//! Exact linear algebra over the rationals: dense reduced row echelon form
//! and nullspaces, plus a sparse incremental echelon that remembers how each
//! reduced row was formed (needed for infeasibility certificates).

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::exact::Scalar;

/// Sparse vector: column index to nonzero value.
pub type SparseVec = BTreeMap<usize, Scalar>;

/// In-place reduction to reduced row echelon form. Returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<Scalar>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<Scalar>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{x : A x = 0}` for the matrix given by `rows` with `ncols` columns.
pub fn nullspace(rows: &[Vec<Scalar>], ncols: usize) -> Vec<Vec<Scalar>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(); ncols];
            v[f] = Scalar::from_integer(1.into());
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Basis of the row space (reduced rows).
pub fn row_space(rows: &[Vec<Scalar>], ncols: usize) -> Vec<Vec<Scalar>> {
    let mut m = rows.to_vec();
    rref(&mut m, ncols);
    m
}

fn axpy(target: &mut SparseVec, factor: &Scalar, src: &SparseVec) {
    for (k, v) in src {
        let e = target.entry(*k).or_insert_with(Scalar::zero);
        *e -= factor * v;
        if e.is_zero() {
            target.remove(k);
        }
    }
}

#[derive(Clone, Debug)]
struct EchelonRow {
    coeffs: SparseVec,
    rhs: Scalar,
    combo: SparseVec,
}

/// Outcome of adding an equation to an [`Echelon`].
#[derive(Clone, Debug, PartialEq)]
pub enum Insertion {
    /// The equation was independent and now owns this pivot column.
    Pivot(usize),
    /// The equation was a consequence of earlier ones; with provenance
    /// tracking, `combo` is a combination of equation ids (including the new
    /// one with coefficient 1) whose left-hand sides cancel.
    Dependent { combo: SparseVec },
    /// The equation contradicts earlier ones. `combo` maps equation ids to
    /// multipliers whose combination has zero coefficients but nonzero
    /// right-hand side.
    Inconsistent { combo: SparseVec },
}

/// Incrementally built echelon form of a sparse system `A x = b`.
///
/// Each stored row has its minimum column as pivot (normalized to 1); rows
/// are not back-reduced. Pivoting is deterministic in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, EchelonRow>,
    track: bool,
}

impl Echelon {
    /// `track_provenance` records, for every stored row, the combination of
    /// inserted equations that produced it.
    pub fn new(track_provenance: bool) -> Self {
        Echelon { rows: BTreeMap::new(), track: track_provenance }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// Reduces `row` against the stored pivots without inserting it.
    pub fn reduce(&self, row: &SparseVec) -> SparseVec {
        let mut row = row.clone();
        let mut rhs = Scalar::zero();
        let mut combo = SparseVec::new();
        self.reduce_in_place(&mut row, &mut rhs, &mut combo, false);
        row
    }

    fn reduce_in_place(&self, row: &mut SparseVec, rhs: &mut Scalar, combo: &mut SparseVec, track: bool) {
        let mut cursor = 0usize;
        loop {
            let Some((&c, v)) = row.range(cursor..).next() else { break };
            match self.rows.get(&c) {
                Some(er) => {
                    let factor = v.clone();
                    axpy(row, &factor, &er.coeffs);
                    *rhs -= &factor * &er.rhs;
                    if track {
                        axpy(combo, &factor, &er.combo);
                    }
                }
                None => cursor = c + 1,
            }
        }
    }

    /// Inserts equation `id`: `row . x = rhs`.
    pub fn insert(&mut self, id: usize, row: SparseVec, rhs: Scalar) -> Insertion {
        let mut row = row;
        let mut rhs = rhs;
        let mut combo = SparseVec::new();
        if self.track {
            combo.insert(id, Scalar::from_integer(1.into()));
        }
        self.reduce_in_place(&mut row, &mut rhs, &mut combo, self.track);
        let Some((&c, lead)) = row.iter().next() else {
            return if rhs.is_zero() { Insertion::Dependent { combo } } else { Insertion::Inconsistent { combo } };
        };
        let inv = lead.recip();
        for v in row.values_mut() {
            *v *= &inv;
        }
        rhs *= &inv;
        if self.track {
            for v in combo.values_mut() {
                *v *= &inv;
            }
        }
        self.rows.insert(c, EchelonRow { coeffs: row, rhs, combo });
        Insertion::Pivot(c)
    }

    /// A particular solution (free variables set to zero) over `ncols` unknowns.
    pub fn solve(&self, ncols: usize) -> Vec<Scalar> {
        let mut x = vec![Scalar::zero(); ncols];
        for (&c, er) in self.rows.iter().rev() {
            let mut acc = er.rhs.clone();
            for (&k, v) in er.coeffs.range(c + 1..) {
                if !x[k].is_zero() {
                    acc -= v * &x[k];
                }
            }
            x[c] = acc;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn dense(rows: &[&[i64]]) -> Vec<Vec<Scalar>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    fn sparse(entries: &[(usize, i64)]) -> SparseVec {
        entries.iter().map(|&(k, v)| (k, int(v))).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let a = dense(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&a, 3), 2);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        for row in &a {
            let dot: Scalar = row.iter().zip(&ns[0]).map(|(x, y)| x * y).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn echelon_solves_consistent_system() {
        let mut e = Echelon::new(true);
        e.insert(0, sparse(&[(0, 1), (1, 1)]), int(3));
        e.insert(1, sparse(&[(1, 1), (2, -1)]), int(1));
        assert_eq!(e.insert(2, sparse(&[(0, 1), (2, 1)]), int(2)), Insertion::Dependent { combo: sparse(&[(0, -1), (1, 1), (2, 1)]) });
        let x = e.solve(3);
        assert_eq!(&x[0] + &x[1], int(3));
        assert_eq!(&x[1] - &x[2], int(1));
    }

    #[test]
    fn echelon_certifies_inconsistency() {
        let mut e = Echelon::new(true);
        let eqs = [(sparse(&[(0, 1), (1, 1)]), int(1)), (sparse(&[(1, 1)]), int(2)), (sparse(&[(0, 2)]), int(5))];
        let mut cert = None;
        for (i, (r, b)) in eqs.iter().enumerate() {
            if let Insertion::Inconsistent { combo } = e.insert(i, r.clone(), b.clone()) {
                cert = Some(combo);
            }
        }
        let y = cert.expect("inconsistent");
        let mut lhs = SparseVec::new();
        let mut rhs = Scalar::zero();
        for (i, c) in &y {
            axpy(&mut lhs, &-c.clone(), &eqs[*i].0);
            rhs += c * &eqs[*i].1;
        }
        assert!(lhs.is_empty());
        assert!(!rhs.is_zero());
    }
}
