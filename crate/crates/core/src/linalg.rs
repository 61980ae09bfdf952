//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest eigenvalue and a unit eigenvector. The sign makes the largest-magnitude entry positive.
pub fn leading_eigenpair(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let n = m.nrows();
    if n == 1 {
        return (m[(0, 0)], DVector::from_element(1, 1.0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut best = 0;
    for k in 1..n {
        if eig.eigenvalues[k] > eig.eigenvalues[best] {
            best = k;
        }
    }
    let mut v = eig.eigenvectors.column(best).into_owned();
    fix_sign(&mut v);
    (eig.eigenvalues[best], v)
}

pub fn fix_sign(v: &mut DVector<f64>) {
    let mut arg = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[arg].abs() + 1e-12 {
            arg = i;
        }
    }
    if v.len() > 0 && v[arg] < 0.0 {
        v.neg_mut();
    }
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => f64::NEG_INFINITY,
        1 => m[(0, 0)],
        2 => {
            let (a, b, d) = (m[(0, 0)], m[(1, 0)], m[(1, 1)]);
            0.5 * (a + d + ((a - d) * (a - d) + 4.0 * b * b).sqrt())
        }
        _ => m.clone().symmetric_eigenvalues().max(),
    }
}

/// Smallest eigenvalue: dense decomposition up to `p = 200`, shifted power iteration beyond.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n <= 200 {
        return m.clone().symmetric_eigenvalues().min();
    }
    // lambda_max(cI - M) = c - lambda_min(M) with c a Gershgorin bound
    let c = (0..n).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let shifted = DMatrix::from_diagonal_element(n, n, c) - m;
    c - power_iteration(&shifted, 1e-12, 100_000)
}

fn power_iteration(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = m.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let nl = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (nl - lambda).abs() <= tol * nl.abs().max(1.0) {
            return nl;
        }
        lambda = nl;
    }
    lambda
}

pub fn principal_submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Sum of the `r` largest eigenvalues.
pub fn top_eigenvalue_sum(m: &DMatrix<f64>, r: usize) -> f64 {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.iter().take(r).sum()
}

/// Binomial coefficient as a float (saturates gracefully for large arguments).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Largest eigenvalue of `[[A, b], [b^T, c]]` given the eigendecomposition `A = Q diag(l) Q^T`.
pub fn bordered_max_eigenvalue(l: &[f64], g: &[f64], c: f64) -> f64 {
    let lmax = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut lo = lmax.max(c);
    let mut hi = lo + gnorm;
    if gnorm == 0.0 {
        return lo;
    }
    let f = |x: f64| x - c - l.iter().zip(g).map(|(li, gi)| gi * gi / (x - li)).sum::<f64>();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
