use std::fmt::Write as _;

use crate::error::ConicError;

/// Cone families supported by the solver.
///
/// `SecondOrder` rows are `(t, x)` with `||x|| <= t`. `RotatedSecondOrder` rows are
/// `(u, v, z)` with `2uv >= ||z||^2, u, v >= 0`. `Psd` rows hold the scaled lower
/// triangle of a symmetric matrix, column by column, off-diagonals multiplied by `sqrt(2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeKind {
    Zero,
    NonNeg,
    SecondOrder,
    RotatedSecondOrder,
    Psd,
}

/// One cone block. For `Psd` the `dim` is the matrix order, otherwise the row count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub dim: usize,
}

impl ConeSpec {
    pub fn new(kind: ConeKind, dim: usize) -> Self {
        Self { kind, dim }
    }

    pub fn rows(&self) -> usize {
        match self.kind {
            ConeKind::Psd => self.dim * (self.dim + 1) / 2,
            _ => self.dim,
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row term lists; duplicate columns are summed, exact zeros dropped.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for row in rows {
            scratch.clear();
            scratch.extend_from_slice(row);
            scratch.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < scratch.len() {
                let col = scratch[k].0;
                let mut v = 0.0;
                while k < scratch.len() && scratch[k].0 == col {
                    v += scratch[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    indices.push(col);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows: rows.len(), ncols, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    /// `out = A x`
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.nrows) {
            let (idx, val) = self.row(i);
            *o = idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `out = A^T y`
    pub fn mul_t_vec(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &yi) in y.iter().enumerate().take(self.nrows) {
            if yi == 0.0 {
                continue;
            }
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                out[j] += v * yi;
            }
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.nrows)
            .map(|i| {
                let (idx, val) = self.row(i);
                idx.iter().copied().zip(val.iter().copied()).collect()
            })
            .collect()
    }
}

/// `maximize c^T x  subject to  b - A x in K,  lower <= x <= upper`.
#[derive(Clone, Debug)]
pub struct ConicProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub cones: Vec<ConeSpec>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConicProgram {
    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let bad = |m: String| Err(ConicError::Malformed(m));
        if self.objective.len() != self.num_vars {
            return bad(format!("objective has {} entries for {} vars", self.objective.len(), self.num_vars));
        }
        if self.a.ncols != self.num_vars {
            return bad(format!("A has {} columns for {} vars", self.a.ncols, self.num_vars));
        }
        if self.a.nrows != self.b.len() {
            return bad(format!("A has {} rows but b has {}", self.a.nrows, self.b.len()));
        }
        let cone_rows: usize = self.cones.iter().map(ConeSpec::rows).sum();
        if cone_rows != self.b.len() {
            return bad(format!("cones cover {} rows, program has {}", cone_rows, self.b.len()));
        }
        for c in &self.cones {
            let ok = match c.kind {
                ConeKind::SecondOrder => c.dim >= 1,
                ConeKind::RotatedSecondOrder => c.dim >= 2,
                _ => true,
            };
            if !ok {
                return bad(format!("{:?} cone of dimension {}", c.kind, c.dim));
            }
        }
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return bad("bound vectors have wrong length".into());
        }
        for j in 0..self.num_vars {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return bad(format!("invalid bounds on variable {j}"));
            }
        }
        if self.a.indices.iter().any(|&j| j >= self.num_vars) {
            return bad("column index out of range".into());
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) || !finite(&self.b) || !finite(&self.a.data) {
            return bad("non-finite data".into());
        }
        Ok(())
    }

    /// Appends one cone block given as rows `b_i - a_i^T x`.
    pub fn push_cone(&mut self, cone: ConeSpec, rows: Vec<(f64, Vec<(usize, f64)>)>) {
        assert_eq!(cone.rows(), rows.len());
        let mut all = self.a.to_rows();
        for (bi, ai) in rows {
            self.b.push(bi);
            all.push(ai);
        }
        self.a = CsrMatrix::from_rows(self.num_vars, &all);
        self.cones.push(cone);
    }

    /// Plain-text dump: header, objective, bounds, cones, then `row col value` triplets.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "vars {} rows {} nnz {}", self.num_vars, self.num_rows(), self.a.nnz());
        let _ = writeln!(s, "objective");
        for (j, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let _ = writeln!(s, "{j} {c:e}");
            }
        }
        let _ = writeln!(s, "bounds");
        for j in 0..self.num_vars {
            let _ = writeln!(s, "{j} {:e} {:e}", self.lower[j], self.upper[j]);
        }
        let _ = writeln!(s, "cones");
        for c in &self.cones {
            let _ = writeln!(s, "{:?} {}", c.kind, c.dim);
        }
        let _ = writeln!(s, "b");
        for (i, v) in self.b.iter().enumerate() {
            let _ = writeln!(s, "{i} {v:e}");
        }
        let _ = writeln!(s, "A");
        for i in 0..self.a.nrows {
            let (idx, val) = self.a.row(i);
            for (j, v) in idx.iter().zip(val) {
                let _ = writeln!(s, "{i} {j} {v:e}");
            }
        }
        s
    }
}
