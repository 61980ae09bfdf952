use nalgebra::DMatrix;
use spca_conic::cones::svec_index;
use spca_conic::{LinExpr, ProgramBuilder};

/// Variables of a symmetric `n x n` matrix, stored as its lower triangle.
#[derive(Clone, Debug)]
pub struct SymVars {
    pub n: usize,
    vars: Vec<usize>,
}

impl SymVars {
    pub fn new(b: &mut ProgramBuilder, n: usize, lower: f64, upper: f64) -> Self {
        Self { n, vars: b.add_vars(n * (n + 1) / 2, lower, upper) }
    }

    pub fn at(&self, i: usize, j: usize) -> usize {
        self.vars[svec_index(self.n, i, j)]
    }

    pub fn expr(&self, i: usize, j: usize) -> LinExpr {
        LinExpr::var(self.at(i, j))
    }

    pub fn diag_sum(&self) -> LinExpr {
        LinExpr::sum_vars((0..self.n).map(|i| self.at(i, i)))
    }

    /// `<E, X>`: diagonal once, off-diagonals twice.
    pub fn total_sum(&self) -> LinExpr {
        let mut e = LinExpr::zero();
        for j in 0..self.n {
            for i in j..self.n {
                e.add_term(self.at(i, j), if i == j { 1.0 } else { 2.0 });
            }
        }
        e
    }

    pub fn read(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| x[self.at(i, j)])
    }

    pub fn write(&self, x: &mut [f64], m: &DMatrix<f64>) {
        for j in 0..self.n {
            for i in j..self.n {
                x[self.at(i, j)] = m[(i, j)];
            }
        }
    }
}

/// Per-component variables of the permutation-invariant lift.
#[derive(Clone, Debug)]
pub struct PermVars {
    pub kt: usize,
    pub f: SymVars,
    /// Leading `kt x kt` block of the sorted surrogate; the rest is identically zero.
    pub g: SymVars,
    /// Off-diagonal coupling entries, row-major `p x p`, `None` on the diagonal (tied to `F_ii`).
    pub t: Vec<Option<usize>>,
    pub rd: Vec<usize>,
    /// `p x (p - 1)`, row-major.
    pub td: Vec<usize>,
}

/// Index map from model quantities to program variables.
#[derive(Clone, Debug)]
pub struct Layout {
    pub p: usize,
    pub r: usize,
    /// `p x r`, row-major.
    pub z: Vec<usize>,
    pub w: Vec<usize>,
    pub yt: Vec<SymVars>,
    /// Split variable bounding `|Y|` entrywise.
    pub abs_y: Option<SymVars>,
    /// Split variables bounding `|Y^t|` (absent when the lift's `F^t` plays that role).
    pub abs_yt: Vec<SymVars>,
    pub perm: Vec<PermVars>,
}

impl Layout {
    pub fn z(&self, i: usize, t: usize) -> usize {
        self.z[i * self.r + t]
    }

    pub fn y_expr(&self, i: usize, j: usize) -> LinExpr {
        LinExpr::sum_vars(self.yt.iter().map(|y| y.at(i, j)))
    }

    pub fn zstar(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, self.r, |i, t| x[self.z(i, t)])
    }
}

/// Symmetric matrix of affine expressions whose positive semidefiniteness the model intends.
#[derive(Clone, Debug)]
pub struct MatrixBlock {
    pub name: String,
    pub n: usize,
    /// Lower triangle in column-wise order.
    pub entries: Vec<LinExpr>,
}

impl MatrixBlock {
    pub fn new(name: String, n: usize, f: impl Fn(usize, usize) -> LinExpr) -> Self {
        let mut entries = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in j..n {
                entries.push(f(i, j));
            }
        }
        Self { name, n, entries }
    }

    pub fn entry(&self, i: usize, j: usize) -> &LinExpr {
        &self.entries[svec_index(self.n, i, j)]
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).eval(x))
    }

    pub fn lower(&self) -> Vec<Vec<LinExpr>> {
        (0..self.n).map(|i| (0..=i).map(|j| self.entry(i, j).clone()).collect()).collect()
    }

    /// `<X, v v^T>` as an affine expression.
    pub fn cut(&self, v: &[f64]) -> LinExpr {
        let mut e = LinExpr::zero();
        for j in 0..self.n {
            for i in j..self.n {
                let w = if i == j { v[i] * v[i] } else { 2.0 * v[i] * v[j] };
                e.add_expr(self.entry(i, j), w);
            }
        }
        e
    }
}
