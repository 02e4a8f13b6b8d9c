//! Basis representation in product form: a refactorization builds one eta
//! per pivot (equivalent to an LU factorization with partial pivoting over
//! the not-yet-pivoted rows), and simplex pivots append update etas. FTRAN
//! applies the etas in order, BTRAN applies their transposes in reverse.

use alloc::vec;
use alloc::vec::Vec;

use crate::solver::sparse::CscMatrix;

/// A column of the basis: either a structural column of the constraint
/// matrix or the logical (slack) unit column of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisCol {
    Structural(usize),
    Logical(usize),
}

/// One elementary transformation: the inverse maps
/// `v[pivot_row] /= pivot_val; v[i] -= entries[i] * v[pivot_row]`.
#[derive(Debug, Clone)]
struct Eta {
    pivot_row: usize,
    pivot_val: f64,
    /// Off-pivot entries of the transformed column, ascending row order.
    entries: Vec<(usize, f64)>,
}

/// Pivot magnitudes below this (relative to the column max) trigger basis
/// repair during refactorization.
const PIVOT_REL_TOL: f64 = 1e-9;
const PIVOT_ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BasisFactor {
    m: usize,
    etas: Vec<Eta>,
    n_factor_etas: usize,
    /// Nonzeros in the factorization etas (fill indicator).
    pub factor_nnz: usize,
}

/// Result of a refactorization. `slot_of_pos[p]` is the pivot row assigned
/// to input column `p`: `ftran` output carries that column's solution value
/// in this slot, and `btran` input scatters position costs into it. Updates
/// keep a position's slot unchanged.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub factor: BasisFactor,
    pub slot_of_pos: Vec<usize>,
    pub repairs: Vec<Repair>,
}

/// A basis column that was numerically dependent and got replaced by the
/// logical of a then-unpivoted row.
#[derive(Debug, Clone, PartialEq)]
pub struct Repair {
    pub position: usize,
    pub replacement_row: usize,
}

impl BasisFactor {
    /// Factor of a zero-row system; placeholder until the first refresh.
    pub fn empty() -> BasisFactor {
        BasisFactor { m: 0, etas: Vec::new(), n_factor_etas: 0, factor_nnz: 0 }
    }

    /// Factorizes the basis given by `cols`. Columns are processed sparsest
    /// first (logicals are unit columns and never produce fill); each gets
    /// the still-unpivoted row with the largest magnitude as its slot.
    pub fn factorize(matrix: &CscMatrix, cols: &[BasisCol]) -> Factorization {
        let m = cols.len();
        debug_assert_eq!(m, matrix.n_rows);
        let mut order: Vec<usize> = (0..m).collect();
        let nnz_of = |c: &BasisCol| match *c {
            BasisCol::Structural(j) => matrix.col_nnz(j),
            BasisCol::Logical(_) => 1,
        };
        order.sort_by_key(|&p| (nnz_of(&cols[p]), p));

        let mut factor = BasisFactor { m, etas: Vec::with_capacity(m), n_factor_etas: 0, factor_nnz: 0 };
        let mut pivoted = vec![false; m];
        let mut repairs = Vec::new();
        let mut slot_of_pos = vec![usize::MAX; m];
        let mut work = vec![0.0; m];

        for &pos in &order {
            // Load the column and apply the etas built so far.
            match cols[pos] {
                BasisCol::Structural(j) => {
                    let (rows, vals) = matrix.col(j);
                    for (&i, &v) in rows.iter().zip(vals) {
                        work[i] = v;
                    }
                }
                BasisCol::Logical(row) => {
                    work[row] = 1.0;
                }
            }
            factor.ftran(&mut work);

            // Partial pivoting over the rows that still lack a pivot.
            let mut pivot_row = usize::MAX;
            let mut pivot_abs = 0.0;
            let mut col_max = 0.0;
            for (i, &v) in work.iter().enumerate() {
                let a = v.abs();
                if a > col_max {
                    col_max = a;
                }
                if !pivoted[i] && a > pivot_abs {
                    pivot_abs = a;
                    pivot_row = i;
                }
            }
            if pivot_row == usize::MAX
                || pivot_abs < PIVOT_ABS_TOL
                || pivot_abs < PIVOT_REL_TOL * col_max
            {
                // Dependent column: fall back to the logical of the lowest
                // unpivoted row. Prior etas all pivot on pivoted rows, and a
                // unit vector on an unpivoted row passes through them
                // untouched, so the eta is trivially (row, 1.0).
                for v in work.iter_mut() {
                    *v = 0.0;
                }
                let row = (0..m).find(|&i| !pivoted[i]).expect("some row is unpivoted");
                repairs.push(Repair { position: pos, replacement_row: row });
                work[row] = 1.0;
                pivot_row = row;
            }

            let pivot_val = work[pivot_row];
            debug_assert!(pivot_val != 0.0);
            let mut entries = Vec::new();
            for (i, v) in work.iter_mut().enumerate() {
                if *v != 0.0 {
                    if i != pivot_row {
                        entries.push((i, *v));
                    }
                    *v = 0.0;
                }
            }
            factor.factor_nnz += entries.len() + 1;
            factor.etas.push(Eta { pivot_row, pivot_val, entries });
            factor.n_factor_etas += 1;
            pivoted[pivot_row] = true;
            slot_of_pos[pos] = pivot_row;
        }
        Factorization { factor, slot_of_pos, repairs }
    }

    pub fn n_updates(&self) -> usize {
        self.etas.len() - self.n_factor_etas
    }

    /// Solves `B x = v` in place.
    pub fn ftran(&self, v: &mut [f64]) {
        for eta in &self.etas {
            let t = v[eta.pivot_row];
            if t == 0.0 {
                continue;
            }
            let t = t / eta.pivot_val;
            v[eta.pivot_row] = t;
            for &(i, e) in &eta.entries {
                v[i] -= t * e;
            }
        }
    }

    /// Solves `B^T y = v` in place.
    pub fn btran(&self, v: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut acc = v[eta.pivot_row];
            for &(i, e) in &eta.entries {
                acc -= e * v[i];
            }
            v[eta.pivot_row] = acc / eta.pivot_val;
        }
    }

    /// Appends an update after a simplex pivot: `alpha = B^{-1} a_enter`
    /// replaces basis position with pivot row `pivot_row`.
    pub fn update(&mut self, pivot_row: usize, alpha: &[f64]) {
        let pivot_val = alpha[pivot_row];
        debug_assert!(pivot_val != 0.0);
        let mut entries = Vec::new();
        for (i, &v) in alpha.iter().enumerate() {
            if i != pivot_row && v != 0.0 {
                entries.push((i, v));
            }
        }
        self.etas.push(Eta { pivot_row, pivot_val, entries });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::{Row, RowMeta, RowSense};
    use alloc::vec;

    fn matrix(rows: Vec<Vec<(usize, f64)>>, n_cols: usize) -> CscMatrix {
        let rows: Vec<Row> = rows
            .into_iter()
            .map(|coeffs| Row { coeffs, sense: RowSense::Eq, rhs: 0.0, meta: RowMeta::Free })
            .collect();
        CscMatrix::from_rows(&rows, n_cols)
    }

    #[test]
    fn ftran_btran_solve_small_system() {
        // B = [[2, 1], [1, 3]] from two structural columns.
        let a = matrix(vec![vec![(0, 2.0), (1, 1.0)], vec![(0, 1.0), (1, 3.0)]], 2);
        let fz = BasisFactor::factorize(&a, &[BasisCol::Structural(0), BasisCol::Structural(1)]);
        assert!(fz.repairs.is_empty());
        let mut x = vec![5.0, 10.0];
        fz.factor.ftran(&mut x);
        // Solution of [[2,1],[1,3]] x = [5,10] is x = [1, 3] by position.
        assert!((x[fz.slot_of_pos[0]] - 1.0).abs() < 1e-12);
        assert!((x[fz.slot_of_pos[1]] - 3.0).abs() < 1e-12);
        // B^T y = [1,1]: scatter position costs into slots, result is by row.
        let mut y = vec![0.0, 0.0];
        y[fz.slot_of_pos[0]] = 1.0;
        y[fz.slot_of_pos[1]] = 1.0;
        fz.factor.btran(&mut y);
        assert!((y[0] - 0.4).abs() < 1e-12);
        assert!((y[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn logical_columns_and_updates() {
        let a = matrix(vec![vec![(0, 1.0), (1, 2.0)], vec![(0, 3.0), (1, 4.0)]], 2);
        // Start from the identity basis; slots are then the logical rows.
        let fz = BasisFactor::factorize(&a, &[BasisCol::Logical(0), BasisCol::Logical(1)]);
        assert!(fz.repairs.is_empty());
        assert_eq!(fz.slot_of_pos, vec![0, 1]);
        let mut f = fz.factor;
        // Bring structural column 0 into position 0 (slot 0).
        let mut alpha = vec![0.0; 2];
        let (rows, vals) = a.col(0);
        for (&i, &v) in rows.iter().zip(vals) {
            alpha[i] = v;
        }
        f.ftran(&mut alpha);
        f.update(0, &alpha);
        assert_eq!(f.n_updates(), 1);
        // New basis is [a_0, e_1] = [[1,0],[3,1]]; solve B x = [1, 3]: x = [1, 0].
        let mut x = vec![1.0, 3.0];
        f.ftran(&mut x);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!(x[1].abs() < 1e-12);
        // y^T B = [1, 0] -> y = [1, 0].
        let mut y = vec![1.0, 0.0];
        f.btran(&mut y);
        assert!((y[0] - 1.0).abs() < 1e-12);
        assert!(y[1].abs() < 1e-12);
    }

    #[test]
    fn singular_basis_gets_repaired() {
        // Two copies of the same column are dependent.
        let a = matrix(vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]], 2);
        let fz = BasisFactor::factorize(&a, &[BasisCol::Structural(0), BasisCol::Structural(1)]);
        assert_eq!(fz.repairs.len(), 1);
    }

    #[test]
    fn random_dense_round_trip() {
        // Deterministic pseudo-random 6x6 basis; checks B * ftran(v) = v.
        let m = 6;
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut dense = vec![vec![0.0; m]; m];
        let mut rows = vec![Vec::new(); m];
        for j in 0..m {
            for (i, row) in rows.iter_mut().enumerate() {
                let v = rnd();
                if v.abs() > 0.2 || i == j {
                    dense[i][j] = if i == j { v + 2.0 } else { v };
                    row.push((j, dense[i][j]));
                }
            }
        }
        let a = matrix(rows, m);
        let cols: Vec<BasisCol> = (0..m).map(BasisCol::Structural).collect();
        let fz = BasisFactor::factorize(&a, &cols);
        assert!(fz.repairs.is_empty());
        let rhs: Vec<f64> = (0..m).map(|i| i as f64 - 2.5).collect();
        let mut solved = rhs.clone();
        fz.factor.ftran(&mut solved);
        // Position p's coefficient lives in slot_of_pos[p].
        let x: Vec<f64> = (0..m).map(|p| solved[fz.slot_of_pos[p]]).collect();
        for i in 0..m {
            let mut acc = 0.0;
            for j in 0..m {
                acc += dense[i][j] * x[j];
            }
            assert!((acc - rhs[i]).abs() < 1e-9, "row {i}: {acc} vs {}", rhs[i]);
        }
        // y^T B = rhs^T (by position): scatter into slots, btran, check rows.
        let mut y = vec![0.0; m];
        for p in 0..m {
            y[fz.slot_of_pos[p]] = rhs[p];
        }
        fz.factor.btran(&mut y);
        for j in 0..m {
            let mut acc = 0.0;
            for i in 0..m {
                acc += dense[i][j] * y[i];
            }
            assert!((acc - rhs[j]).abs() < 1e-9);
        }
    }
}
