use nalgebra::{DMatrix, SymmetricEigen};

use crate::program::{ConeKind, ConeSpec};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Position of `(i, j)`, `i >= j`, in the column-wise lower-triangle vectorization of order `n`.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    j * n - j * j.saturating_sub(1) / 2 + (i - j)
}

/// Unpacks a scaled lower-triangle vector into a dense symmetric matrix.
pub fn smat(n: usize, v: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            let x = if i == j { v[k] } else { v[k] / SQRT2 };
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

pub fn svec(m: &DMatrix<f64>, out: &mut [f64]) {
    let n = m.nrows();
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            out[k] = if i == j { m[(i, j)] } else { 0.5 * (m[(i, j)] + m[(j, i)]) * SQRT2 };
            k += 1;
        }
    }
}

fn project_soc(v: &mut [f64]) {
    let t = v[0];
    let nx = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if nx <= t {
        return;
    }
    if nx <= -t {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let a = 0.5 * (t + nx);
    v[0] = a;
    let s = a / nx;
    v[1..].iter_mut().for_each(|x| *x *= s);
}

fn rotate(v: &mut [f64]) {
    let (u, w) = (v[0], v[1]);
    v[0] = (u + w) / SQRT2;
    v[1] = (u - w) / SQRT2;
}

fn project_psd(n: usize, v: &mut [f64]) {
    if n == 1 {
        v[0] = v[0].max(0.0);
        return;
    }
    let m = smat(n, v);
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return;
    }
    let q = &eig.eigenvectors;
    let mut r = DMatrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.0 {
            let c = q.column(k);
            r.ger(l, &c, &c, 1.0);
        }
    }
    svec(&r, v);
}

/// Euclidean projection onto the cone, in place.
pub fn project(cone: ConeSpec, v: &mut [f64]) {
    match cone.kind {
        ConeKind::Zero => v.iter_mut().for_each(|x| *x = 0.0),
        ConeKind::NonNeg => v.iter_mut().for_each(|x| *x = x.max(0.0)),
        ConeKind::SecondOrder => project_soc(v),
        ConeKind::RotatedSecondOrder => {
            rotate(v);
            project_soc(v);
            rotate(v);
        }
        ConeKind::Psd => project_psd(cone.dim, v),
    }
}

/// Projection onto the dual cone. All cones here are self-dual except `Zero`, whose dual is free.
pub fn project_dual(cone: ConeSpec, v: &mut [f64]) {
    if cone.kind != ConeKind::Zero {
        project(cone, v);
    }
}

/// Euclidean distance from `v` to the cone.
pub fn distance(cone: ConeSpec, v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    project(cone, &mut p);
    v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub fn distance_dual(cone: ConeSpec, v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    project_dual(cone, &mut p);
    v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Applies `f` to each cone block of a stacked vector.
pub fn for_each_block<F: FnMut(ConeSpec, &mut [f64])>(cones: &[ConeSpec], v: &mut [f64], mut f: F) {
    let mut off = 0;
    for &c in cones {
        let r = c.rows();
        f(c, &mut v[off..off + r]);
        off += r;
    }
}
