use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Side};

use crate::error::ConicError;
use crate::program::CsrMatrix;

/// Sparse Cholesky of `sigma I + A^T R A` (upper triangle stored), symbolic analysis reused on refactor.
pub(crate) struct ReducedKkt {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    diag_pos: Vec<usize>,
    contrib: Vec<(usize, usize, f64)>,
    symbolic: SymbolicLlt<usize>,
    llt: Option<Llt<usize, f64>>,
}

impl ReducedKkt {
    pub fn new(a: &CsrMatrix, sigma: f64, rho: &[f64]) -> Result<Self, ConicError> {
        let n = a.ncols;
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|j| (j, j)).collect();
        for r in 0..a.nrows {
            let (idx, _) = a.row(r);
            for (p, &ci) in idx.iter().enumerate() {
                for &cj in &idx[p + 1..] {
                    pairs.push((cj.max(ci), cj.min(ci)));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(pairs.len());
        for &(col, row) in &pairs {
            col_ptr[col + 1] += 1;
            row_idx.push(row);
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        let find = |col: usize, row: usize| -> usize {
            let s = &row_idx[col_ptr[col]..col_ptr[col + 1]];
            col_ptr[col] + s.binary_search(&row).expect("pattern entry")
        };
        let diag_pos: Vec<usize> = (0..n).map(|j| find(j, j)).collect();
        let mut contrib = Vec::new();
        for r in 0..a.nrows {
            let (idx, val) = a.row(r);
            for p in 0..idx.len() {
                for q in p..idx.len() {
                    let (ci, cj) = (idx[p], idx[q]);
                    contrib.push((find(ci.max(cj), ci.min(cj)), r, val[p] * val[q]));
                }
            }
        }
        let symbolic = {
            let sym = SymbolicSparseColMatRef::new_checked(n, n, &col_ptr, None, &row_idx);
            SymbolicLlt::try_new(sym, Side::Upper).map_err(|e| ConicError::Factorization(format!("{e:?}")))?
        };
        let values = vec![0.0; row_idx.len()];
        let mut kkt = Self { n, col_ptr, row_idx, values, diag_pos, contrib, symbolic, llt: None };
        kkt.refactor(sigma, rho)?;
        Ok(kkt)
    }

    pub fn refactor(&mut self, sigma: f64, rho: &[f64]) -> Result<(), ConicError> {
        self.values.iter_mut().for_each(|v| *v = 0.0);
        for &d in &self.diag_pos {
            self.values[d] = sigma;
        }
        for &(pos, r, c) in &self.contrib {
            self.values[pos] += rho[r] * c;
        }
        let sym = SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx);
        let mat = SparseColMatRef::new(sym, &self.values);
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), mat, Side::Upper)
            .map_err(|e| ConicError::Factorization(format!("{e:?}")))?;
        self.llt = Some(llt);
        Ok(())
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        let llt = self.llt.as_ref().expect("factorized");
        let n = self.n;
        llt.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(rhs, n, 1));
    }
}
