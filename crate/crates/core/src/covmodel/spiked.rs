use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MatrixKind, SymMatrix};
use crate::error::{Result, SpcaError};

const NOISE_STREAM: u64 = 0;
const SUPPORT_STREAM: u64 = 1;

/// Noise Gram matrix plus two sparse binary spikes with a prescribed overlap.
#[derive(Clone, Debug)]
pub struct SpikedInstance {
    pub p: usize,
    pub sigma: f64,
    pub k_true: usize,
    pub q: f64,
    pub seed: u64,
    /// Sorted supports of `x_1` and `x_2`.
    pub supports: [Vec<usize>; 2],
    pub matrix: SymMatrix,
}

impl SpikedInstance {
    pub fn overlap(&self) -> usize {
        self.supports[0].iter().filter(|i| self.supports[1].contains(i)).count()
    }
}

/// `Sigma = N^T N + sigma x_1 x_1^T + sigma x_2 x_2^T`, `N` uniform on `[0, 1]^{p x p}`.
pub fn generate_spiked(p: usize, sigma: f64, k_true: usize, q: f64, seed: u64) -> Result<SpikedInstance> {
    if !(0.0..=1.0).contains(&q) || !sigma.is_finite() || sigma < 0.0 || k_true == 0 {
        return Err(SpcaError::InvalidInput(format!("need q in [0, 1], sigma >= 0, k_true >= 1 (q = {q}, sigma = {sigma}, k_true = {k_true})")));
    }
    let shared_f = q * k_true as f64;
    let shared = shared_f.round() as usize;
    if (shared_f - shared as f64).abs() > 1e-9 {
        return Err(SpcaError::InfeasibleOverlap(format!("q * k_true = {shared_f} is not an integer")));
    }
    if 2 * k_true - shared > p {
        return Err(SpcaError::InfeasibleOverlap(format!("supports need {} indices, p = {p}", 2 * k_true - shared)));
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(NOISE_STREAM);
    let n = DMatrix::from_fn(p, p, |_, _| noise_rng.gen::<f64>());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SUPPORT_STREAM);
    let mut x1: Vec<usize> = sample(&mut rng, p, k_true).into_vec();
    x1.sort_unstable();
    let mut x2: Vec<usize> = sample(&mut rng, k_true, shared).into_iter().map(|a| x1[a]).collect();
    let rest: Vec<usize> = (0..p).filter(|i| x1.binary_search(i).is_err()).collect();
    x2.extend(sample(&mut rng, rest.len(), k_true - shared).into_iter().map(|a| rest[a]));
    x2.sort_unstable();

    let mut m = n.transpose() * &n;
    for x in [&x1, &x2] {
        for &i in x {
            for &j in x {
                m[(i, j)] += sigma;
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let matrix = SymMatrix::new(m, MatrixKind::Covariance)?;
    Ok(SpikedInstance { p, sigma, k_true, q, seed, supports: [x1, x2], matrix })
}
