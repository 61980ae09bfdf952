//! Covariance/correlation matrices, datasets, budgets, solutions and their quality metrics.

mod spiked;

use std::ops::Deref;

use log::warn;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpcaError};

pub use spiked::{generate_spiked, SpikedInstance};

const PITPROPS_CSV: &str = include_str!("../../data/pitprops.csv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Covariance,
    Correlation,
}

/// Dense symmetric PSD (within tolerance) matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
    kind: MatrixKind,
}

impl SymMatrix {
    /// Validates exact symmetry, unit diagonal for correlations, and PSD up to `1e-7 * trace`.
    pub fn new(data: DMatrix<f64>, kind: MatrixKind) -> Result<Self> {
        let p = data.nrows();
        if p == 0 || data.ncols() != p {
            return Err(SpcaError::InvalidInput(format!("matrix must be square and nonempty, got {}x{}", p, data.ncols())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(SpcaError::InvalidInput("matrix has non-finite entries".into()));
        }
        for i in 0..p {
            for j in 0..i {
                if data[(i, j)] != data[(j, i)] {
                    return Err(SpcaError::InvalidInput(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        if kind == MatrixKind::Correlation {
            if let Some(i) = (0..p).find(|&i| (data[(i, i)] - 1.0).abs() > 1e-9) {
                return Err(SpcaError::InvalidInput(format!("correlation diagonal entry {i} is {}", data[(i, i)])));
            }
        }
        let trace = data.trace();
        let lmin = crate::linalg::min_eigenvalue(&data);
        if lmin < -1e-7 * trace.abs().max(1.0) {
            return Err(SpcaError::InvalidInput(format!("matrix is not PSD (min eigenvalue {lmin:e})")));
        }
        Ok(Self { data, kind })
    }

    /// Symmetrizes by averaging with the transpose; warns above `1e-8` asymmetry.
    pub fn symmetrized(data: DMatrix<f64>, kind: MatrixKind) -> Result<Self> {
        let asym = (&data - data.transpose()).abs().max();
        if asym > 1e-8 {
            warn!("input matrix asymmetric by {asym:e}, averaging with its transpose");
        }
        let sym = (&data + data.transpose()) * 0.5;
        Self::new(sym, kind)
    }

    pub fn identity(n: usize) -> Self {
        Self { data: DMatrix::identity(n, n), kind: MatrixKind::Correlation }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn restrict(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix { data: crate::linalg::principal_submatrix(&self.data, idx), kind: self.kind }
    }
}

impl Deref for SymMatrix {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// The 13-variable pitprops correlation matrix.
pub fn pitprops() -> SymMatrix {
    let vals: Vec<f64> = PITPROPS_CSV
        .lines()
        .filter(|l| !l.trim().is_empty())
        .flat_map(|l| l.split(',').map(|v| v.trim().parse::<f64>().expect("bundled pitprops data")))
        .collect();
    SymMatrix::new(DMatrix::from_row_slice(13, 13, &vals), MatrixKind::Correlation).expect("bundled pitprops data")
}

/// `n x p` data matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 || values.ncols() == 0 {
            return Err(SpcaError::InvalidInput(format!("dataset needs n >= 2 rows and p >= 1 columns, got {}x{}", values.nrows(), values.ncols())));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// Sample covariance of `n` standard Gaussian draws in dimension `p`.
pub fn random_covariance(p: usize, n: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n.max(2), p, |_, _| StandardNormal.sample(&mut rng));
    correlation_from_data(&Dataset { values: a }, false).expect("gaussian sample covariance")
}

/// Sample covariance `A^T A / (n - 1)` of the centered data, or correlation when `standardize`.
pub fn correlation_from_data(data: &Dataset, standardize: bool) -> Result<SymMatrix> {
    let a = data.values();
    let (n, p) = (a.nrows(), a.ncols());
    let mut c = a.clone();
    for j in 0..p {
        let mean = c.column(j).sum() / n as f64;
        c.column_mut(j).add_scalar_mut(-mean);
        if standardize {
            let sd = (c.column(j).norm_squared() / (n - 1) as f64).sqrt();
            if sd == 0.0 {
                return Err(SpcaError::ZeroVarianceColumn(j));
            }
            c.column_mut(j).scale_mut(1.0 / sd);
        }
    }
    let mut s = c.transpose() * &c / (n - 1) as f64;
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
        if standardize {
            s[(i, i)] = 1.0;
        }
    }
    let kind = if standardize { MatrixKind::Correlation } else { MatrixKind::Covariance };
    SymMatrix::new(s, kind)
}

/// Total budget `k` and/or per-component budgets `(k_1, ..., k_r)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityBudget {
    pub total: Option<usize>,
    pub per_component: Option<Vec<usize>>,
}

impl SparsityBudget {
    pub fn total(k: usize) -> Self {
        Self { total: Some(k), per_component: None }
    }

    pub fn per_component(ks: Vec<usize>) -> Self {
        Self { total: Some(ks.iter().sum()), per_component: Some(ks) }
    }

    /// The effective total `k`.
    pub fn k(&self) -> usize {
        self.total.unwrap_or_else(|| self.per_component.as_ref().map(|v| v.iter().sum()).unwrap_or(0))
    }

    pub fn validate(&self, p: usize, r: usize) -> Result<()> {
        let bad = |m: String| Err(SpcaError::BudgetIllPosed(m));
        if r == 0 {
            return bad("r must be positive".into());
        }
        match (&self.total, &self.per_component) {
            (None, None) => bad("no budget given".into()),
            (Some(k), None) => {
                if !(r < *k && *k < p * r) {
                    return bad(format!("total budget k = {k} must satisfy r < k < p*r ({r} < k < {})", p * r));
                }
                Ok(())
            }
            (total, Some(ks)) => {
                if ks.len() != r {
                    return bad(format!("{} per-component budgets for r = {r}", ks.len()));
                }
                if let Some(&kt) = ks.iter().find(|&&kt| kt == 0 || kt > p) {
                    return bad(format!("per-component budget {kt} outside [1, {p}]"));
                }
                let sum: usize = ks.iter().sum();
                if let Some(k) = total {
                    if *k != sum {
                        return bad(format!("total {k} differs from sum of per-component budgets {sum}"));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Feasible (or near-feasible) set of loadings with their support.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSet {
    pub u: DMatrix<f64>,
    /// `p x r` support indicator.
    pub z: DMatrix<u8>,
    pub objective: f64,
    pub variance_fraction: f64,
    pub violation: f64,
}

impl ComponentSet {
    /// Builds from loadings; the support is the nonzero pattern of `u`.
    pub fn from_loadings(u: DMatrix<f64>, sigma: &DMatrix<f64>) -> Self {
        let z = u.map(|v| u8::from(v != 0.0));
        let objective = quadratic_objective(&u, sigma);
        Self { variance_fraction: objective / sigma.trace(), violation: orthogonality_violation(&u), u, z, objective }
    }

    pub fn r(&self) -> usize {
        self.u.ncols()
    }

    pub fn support(&self, t: usize) -> Vec<usize> {
        (0..self.z.nrows()).filter(|&i| self.z[(i, t)] != 0).collect()
    }

    /// Checks the structural invariants: zero pattern, unit columns, l1 bound and budgets.
    pub fn check(&self, budget: Option<&SparsityBudget>) -> Result<()> {
        let (p, r) = self.u.shape();
        for t in 0..r {
            let col = self.u.column(t);
            if (col.norm() - 1.0).abs() > 1e-7 {
                return Err(SpcaError::Invariant(format!("column {t} has norm {}", col.norm())));
            }
            let nnz = (0..p).filter(|&i| self.z[(i, t)] != 0).count();
            if (0..p).any(|i| self.z[(i, t)] == 0 && col[i] != 0.0) {
                return Err(SpcaError::Invariant(format!("column {t} nonzero outside its support")));
            }
            if col.lp_norm(1) > (nnz as f64).sqrt() + 1e-7 {
                return Err(SpcaError::Invariant(format!("column {t} violates the l1 bound")));
            }
            if let Some(ks) = budget.and_then(|b| b.per_component.as_ref()) {
                if nnz > ks[t] {
                    return Err(SpcaError::Invariant(format!("column {t} has {nnz} nonzeros, budget {}", ks[t])));
                }
            }
        }
        if let Some(k) = budget.and_then(|b| b.total) {
            let total = self.z.iter().filter(|&&v| v != 0).count();
            if total > k {
                return Err(SpcaError::Invariant(format!("{total} nonzeros exceed total budget {k}")));
            }
        }
        Ok(())
    }
}

/// `<U U^T, Sigma>`
pub fn quadratic_objective(u: &DMatrix<f64>, sigma: &DMatrix<f64>) -> f64 {
    (u.transpose() * sigma * u).trace()
}

/// `<U U^T, Sigma> / tr(Sigma)`
pub fn variance_explained(u: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<f64> {
    if u.nrows() != sigma.nrows() {
        return Err(SpcaError::DimensionMismatch(format!("U has {} rows, Sigma is {}x{}", u.nrows(), sigma.nrows(), sigma.ncols())));
    }
    Ok(quadratic_objective(u, sigma) / sigma.trace())
}

/// `||U^T U - I||_1` (entrywise).
pub fn orthogonality_violation(u: &DMatrix<f64>) -> f64 {
    let g = u.transpose() * u;
    let r = g.nrows();
    let mut s = 0.0;
    for i in 0..r {
        for j in 0..r {
            s += (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pitprops_is_valid_correlation() {
        let s = pitprops();
        assert_eq!(s.dim(), 13);
        assert!((0..13).all(|i| s[(i, i)] == 1.0));
        assert!(crate::linalg::max_eigenvalue(&s) / 13.0 >= 0.32);
    }

    #[test]
    fn two_sample_covariance() {
        let d = Dataset::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0])).unwrap();
        let c = correlation_from_data(&d, false).unwrap();
        assert_eq!(c.matrix(), &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
        assert!(matches!(correlation_from_data(&d, true), Err(SpcaError::ZeroVarianceColumn(1))));
    }

    #[test]
    fn identical_rows_give_zero_matrix() {
        let d = Dataset::new(DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0])).unwrap();
        let c = correlation_from_data(&d, false).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_variance_fraction() {
        let s = SymMatrix::identity(5);
        let u = DMatrix::from_fn(5, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        assert!((variance_explained(&u, &s).unwrap() - 0.4).abs() < 1e-15);
        assert!(orthogonality_violation(&u) < 1e-12);
    }

    #[test]
    fn duplicated_column_violation() {
        let v = 1.0 / 2f64.sqrt();
        let u = DMatrix::from_row_slice(2, 2, &[v, v, v, v]);
        assert!((orthogonality_violation(&u) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn budget_rules() {
        assert!(SparsityBudget::total(4).validate(13, 2).is_ok());
        assert!(SparsityBudget::total(2).validate(13, 2).is_err());
        assert!(SparsityBudget::per_component(vec![1, 1]).validate(13, 2).is_ok());
        assert!(SparsityBudget::per_component(vec![14, 1]).validate(13, 2).is_err());
        let mixed = SparsityBudget { total: Some(5), per_component: Some(vec![2, 2]) };
        assert!(mixed.validate(13, 2).is_err());
    }
}
