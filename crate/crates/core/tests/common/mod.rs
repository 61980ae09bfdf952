#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use spca::covmodel::{random_covariance, SymMatrix};
use spca::linalg::max_eigenvalue;

/// Orthonormal `p x r` loadings whose column `t` is supported on exactly `kts[t]` indices.
/// Supports may overlap; orthogonality is enforced inside each support.
pub fn random_sparse_orthonormal<R: Rng>(rng: &mut R, p: usize, kts: &[usize]) -> DMatrix<f64> {
    'retry: loop {
        let mut u = DMatrix::<f64>::zeros(p, kts.len());
        for (t, &kt) in kts.iter().enumerate() {
            let supp = sample(rng, p, kt).into_vec();
            let mut basis: Vec<DVector<f64>> = Vec::new();
            for s in 0..t {
                let mut b = DVector::from_iterator(kt, supp.iter().map(|&i| u[(i, s)]));
                for q in &basis {
                    b -= q * q.dot(&b);
                }
                if b.norm() > 1e-10 {
                    basis.push(b.normalize());
                }
            }
            let mut x = DVector::from_fn(kt, |_, _| rng.sample::<f64, _>(StandardNormal));
            for q in &basis {
                x -= q * q.dot(&x);
            }
            if x.norm() < 1e-6 || x.iter().any(|v| v.abs() < 1e-8) {
                continue 'retry;
            }
            x /= x.norm();
            for (a, &i) in supp.iter().enumerate() {
                u[(i, t)] = x[a];
            }
        }
        return u;
    }
}

pub fn random_psd(p: usize, seed: u64) -> SymMatrix {
    random_covariance(p, 2 * p, seed)
}

/// Best objective over disjoint supports with `|S_t| <= kts[t]`, by enumerating every assignment.
pub fn disjoint_oracle(sigma: &DMatrix<f64>, kts: &[usize]) -> f64 {
    let (p, r) = (sigma.nrows(), kts.len());
    let mut best = 0.0f64;
    let mut assign = vec![0usize; p];
    loop {
        let mut ok = true;
        let mut val = 0.0;
        for t in 0..r {
            let idx: Vec<usize> = (0..p).filter(|&i| assign[i] == t + 1).collect();
            if idx.len() > kts[t] {
                ok = false;
                break;
            }
            if !idx.is_empty() {
                val += max_eigenvalue(&DMatrix::from_fn(idx.len(), idx.len(), |a, b| sigma[(idx[a], idx[b])]));
            }
        }
        if ok {
            best = best.max(val);
        }
        let mut i = 0;
        loop {
            if i == p {
                return best / sigma.trace();
            }
            assign[i] += 1;
            if assign[i] <= r {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

/// Largest eigenvalue by cyclic Jacobi rotations.
pub fn jacobi_max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * a[(i, j)]).sum();
        if off < 1e-30 {
            break;
        }
        for i in 0..n {
            for j in i + 1..n {
                if a[(i, j)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(j, j)] - a[(i, i)]) / (2.0 * a[(i, j)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (aki, akj) = (a[(k, i)], a[(k, j)]);
                    a[(k, i)] = c * aki - s * akj;
                    a[(k, j)] = s * aki + c * akj;
                }
                for k in 0..n {
                    let (aik, ajk) = (a[(i, k)], a[(j, k)]);
                    a[(i, k)] = c * aik - s * ajk;
                    a[(j, k)] = s * aik + c * ajk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).fold(f64::NEG_INFINITY, f64::max)
}

/// Rank-one optimum by bitmask enumeration of supports.
pub fn rank1_oracle(sigma: &DMatrix<f64>, k: usize) -> f64 {
    let p = sigma.nrows();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << p) {
        if mask.count_ones() as usize != k.min(p) {
            continue;
        }
        let idx: Vec<usize> = (0..p).filter(|i| mask >> i & 1 == 1).collect();
        let n = idx.len();
        best = best.max(jacobi_max_eigenvalue(&DMatrix::from_fn(n, n, |a, b| sigma[(idx[a], idx[b])])));
    }
    best
}

/// Sum of `r` rank-one trace-one matrices `v v^T` and the largest pairwise inner product.
/// Orthogonal families come from a QR factor; the others tilt one vector towards another.
pub fn rank_one_family<R: Rng>(rng: &mut R, n: usize, r: usize, orthogonal: bool) -> (DMatrix<f64>, f64) {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let mut vs: Vec<DVector<f64>> = (0..r).map(|t| q.column(t).into_owned()).collect();
    if !orthogonal {
        let theta = rng.gen_range(0.01..std::f64::consts::FRAC_PI_2);
        let (a, b) = {
            let s = sample(rng, r, 2).into_vec();
            (s[0], s[1])
        };
        vs[a] = &vs[a] * theta.cos() + &vs[b] * theta.sin();
    }
    let ys: Vec<DMatrix<f64>> = vs.iter().map(|v| v * v.transpose()).collect();
    let mut worst = 0.0f64;
    for s in 0..r {
        for t in s + 1..r {
            worst = worst.max(ys[s].dot(&ys[t]));
        }
    }
    (ys.iter().fold(DMatrix::zeros(n, n), |acc, y| acc + y), worst)
}
