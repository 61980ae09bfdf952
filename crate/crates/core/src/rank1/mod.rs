//! Solvers for the single-component problem `max u' S u` over unit `u` with at most `k` nonzeros.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::covmodel::SparsityBudget;
use crate::error::{Result, SpcaError};
use crate::linalg::{binomial, bordered_max_eigenvalue, leading_eigenpair, principal_submatrix};
use crate::relax::{default_settings, solve_relaxation, build, RelaxationKind};

/// Largest number of subsets `exact_rank1` will visit.
pub const ENUMERATION_GUARD: f64 = 2e6;
/// Largest `C(p, k)` for which the automatic policy enumerates.
pub const AUTO_EXACT_LIMIT: f64 = 1e5;
const MAX_SWAP_PASSES: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Solution {
    /// Sorted.
    pub support: Vec<usize>,
    pub u: DVector<f64>,
    pub value: f64,
}

impl Rank1Solution {
    /// Leading eigenpair of `sigma` restricted to `support`, zero-padded.
    pub fn on_support(sigma: &DMatrix<f64>, mut support: Vec<usize>) -> Self {
        support.sort_unstable();
        support.dedup();
        let (value, v) = leading_eigenpair(&principal_submatrix(sigma, &support));
        let mut u = DVector::zeros(sigma.nrows());
        for (a, &i) in support.iter().enumerate() {
            u[i] = v[a];
        }
        Self { support, u, value }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rank1Policy {
    /// Enumerate when `C(p, k) <= 1e5`, otherwise the better of relax-and-round and greedy with swaps.
    #[default]
    Auto,
    Exact,
    Greedy,
    GreedySwaps,
    RelaxRound,
}

impl Rank1Policy {
    pub fn name(self) -> &'static str {
        match self {
            Rank1Policy::Auto => "auto",
            Rank1Policy::Exact => "exact",
            Rank1Policy::Greedy => "greedy",
            Rank1Policy::GreedySwaps => "greedy-swaps",
            Rank1Policy::RelaxRound => "relax-round",
        }
    }
}

impl fmt::Display for Rank1Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rank1Policy {
    type Err = SpcaError;
    fn from_str(s: &str) -> Result<Self> {
        [Rank1Policy::Auto, Rank1Policy::Exact, Rank1Policy::Greedy, Rank1Policy::GreedySwaps, Rank1Policy::RelaxRound]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SpcaError::InvalidInput(format!("unknown rank-one policy '{s}'")))
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(SpcaError::InvalidInput("sparsity k must be at least 1".into()));
    }
    Ok(())
}

/// Next `k`-subset of `0..p` in lexicographic order.
fn next_combination(c: &mut [usize], p: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < p - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive search over all `k`-subsets; ties go to the lexicographically smallest support.
pub fn exact_rank1(sigma: &DMatrix<f64>, k: usize) -> Result<Rank1Solution> {
    check_k(k)?;
    let p = sigma.nrows();
    let k = k.min(p);
    if binomial(p, k) > ENUMERATION_GUARD {
        return Err(SpcaError::TooLargeToEnumerate { p, k });
    }
    let mut c: Vec<usize> = (0..k).collect();
    let mut best = (f64::NEG_INFINITY, c.clone());
    loop {
        let v = max_eig(&principal_submatrix(sigma, &c));
        if v > best.0 {
            best = (v, c.clone());
        }
        if !next_combination(&mut c, p) {
            break;
        }
    }
    Ok(Rank1Solution::on_support(sigma, best.1))
}

fn max_eig(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)],
        2 => {
            let (a, b, d) = (m[(0, 0)], m[(1, 0)], m[(1, 1)]);
            0.5 * (a + d + ((a - d) * (a - d) + 4.0 * b * b).sqrt())
        }
        _ => m.symmetric_eigenvalues().max(),
    }
}

struct SubEigen {
    l: Vec<f64>,
    q: DMatrix<f64>,
}

impl SubEigen {
    fn new(sigma: &DMatrix<f64>, s: &[usize]) -> Self {
        if s.is_empty() {
            return Self { l: Vec::new(), q: DMatrix::zeros(0, 0) };
        }
        let e = SymmetricEigen::new(principal_submatrix(sigma, s));
        Self { l: e.eigenvalues.iter().copied().collect(), q: e.eigenvectors }
    }

    /// Largest eigenvalue once `j` joins `s`.
    fn with(&self, sigma: &DMatrix<f64>, s: &[usize], j: usize) -> f64 {
        if s.is_empty() {
            return sigma[(j, j)];
        }
        let col = DVector::from_iterator(s.len(), s.iter().map(|&i| sigma[(i, j)]));
        let g = self.q.tr_mul(&col);
        bordered_max_eigenvalue(&self.l, g.as_slice(), sigma[(j, j)])
    }
}

/// Forward selection from the largest diagonal entry, optionally followed by best-improvement 1-swaps.
pub fn greedy_rank1(sigma: &DMatrix<f64>, k: usize, swaps: bool) -> Result<Rank1Solution> {
    check_k(k)?;
    let p = sigma.nrows();
    let k = k.min(p);
    let mut s: Vec<usize> = Vec::with_capacity(k);
    let mut inside = vec![false; p];
    while s.len() < k {
        let eig = SubEigen::new(sigma, &s);
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for j in (0..p).filter(|&j| !inside[j]) {
            let v = eig.with(sigma, &s, j);
            if v > best.0 {
                best = (v, j);
            }
        }
        s.push(best.1);
        inside[best.1] = true;
    }
    s.sort_unstable();
    if swaps && k < p {
        local_search(sigma, &mut s);
    }
    Ok(Rank1Solution::on_support(sigma, s))
}

fn local_search(sigma: &DMatrix<f64>, s: &mut Vec<usize>) {
    let p = sigma.nrows();
    let mut current = max_eig(&principal_submatrix(sigma, s));
    for _ in 0..MAX_SWAP_PASSES {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..s.len() {
            let rest: Vec<usize> = s.iter().enumerate().filter(|&(b, _)| b != a).map(|(_, &i)| i).collect();
            let eig = SubEigen::new(sigma, &rest);
            for j in (0..p).filter(|j| !s.contains(j)) {
                let v = eig.with(sigma, &rest, j);
                if v > current + 1e-12 * current.abs().max(1.0) && best.is_none_or(|b| v > b.0) {
                    best = Some((v, a, j));
                }
            }
        }
        match best {
            Some((_, a, j)) => {
                s[a] = j;
                s.sort_unstable();
                current = max_eig(&principal_submatrix(sigma, s));
            }
            None => break,
        }
    }
}

/// Solves the single-component strengthened relaxation and keeps the `k` largest support weights.
pub fn relax_round_rank1(sigma: &DMatrix<f64>, k: usize) -> Result<Rank1Solution> {
    check_k(k)?;
    let p = sigma.nrows();
    if k >= p {
        return Ok(Rank1Solution::on_support(sigma, (0..p).collect()));
    }
    let relax = build(sigma, &SparsityBudget::per_component(vec![k]), 1, RelaxationKind::DisjointIneqPerComponent)?;
    let res = solve_relaxation(&relax, &default_settings(p))?;
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| {
        res.zstar[(b, 0)]
            .total_cmp(&res.zstar[(a, 0)])
            .then(res.y[(b, b)].total_cmp(&res.y[(a, a)]))
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    Ok(Rank1Solution::on_support(sigma, idx))
}

pub fn solve_rank1(sigma: &DMatrix<f64>, k: usize, policy: Rank1Policy) -> Result<Rank1Solution> {
    match policy {
        Rank1Policy::Exact => exact_rank1(sigma, k),
        Rank1Policy::Greedy => greedy_rank1(sigma, k, false),
        Rank1Policy::GreedySwaps => greedy_rank1(sigma, k, true),
        Rank1Policy::RelaxRound => relax_round_rank1(sigma, k),
        Rank1Policy::Auto => {
            check_k(k)?;
            let p = sigma.nrows();
            if binomial(p, k.min(p)) <= AUTO_EXACT_LIMIT {
                return exact_rank1(sigma, k);
            }
            let a = relax_round_rank1(sigma, k)?;
            let b = greedy_rank1(sigma, k, true)?;
            Ok(if b.value > a.value { b } else { a })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covmodel::{pitprops, random_covariance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(p: usize, seed: u64) -> DMatrix<f64> {
        random_covariance(p, 2 * p, seed).matrix().clone()
    }

    /// Enumerates supports as bitmasks in increasing numeric order.
    fn bitmask_oracle(sigma: &DMatrix<f64>, k: usize) -> (f64, Vec<usize>) {
        let p = sigma.nrows();
        let mut best: (f64, Vec<usize>) = (f64::NEG_INFINITY, vec![]);
        for mask in 0u32..(1 << p) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let s: Vec<usize> = (0..p).filter(|i| mask >> i & 1 == 1).collect();
            let v = sigma.select_rows(&s).select_columns(&s).symmetric_eigenvalues().max();
            if v > best.0 + 1e-12 || (v > best.0 - 1e-12 && s < best.1) {
                best = (v, s);
            }
        }
        best
    }

    fn check_invariants(sigma: &DMatrix<f64>, sol: &Rank1Solution, k: usize) {
        assert!((sol.u.norm() - 1.0).abs() < 1e-9);
        assert!(sol.support.len() <= k);
        assert!(sol.u.iter().enumerate().all(|(i, &v)| v == 0.0 || sol.support.contains(&i)));
        let direct = sigma.select_rows(&sol.support).select_columns(&sol.support).symmetric_eigenvalues().max();
        assert!((sol.value - direct).abs() < 1e-9);
        assert!((sol.u.dot(&(sigma * &sol.u)) - sol.value).abs() < 1e-9);
        assert!(sol.u.lp_norm(1) <= (k as f64).sqrt() + 1e-9);
    }

    #[test]
    fn diagonal_cases() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let s = exact_rank1(&d, 1).unwrap();
        assert_eq!((s.support.clone(), s.value), (vec![0], 3.0));
        let s = exact_rank1(&d, 2).unwrap();
        assert_eq!(s.support, vec![0, 1]);
        assert!((s.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lexicographic_tie() {
        let s = exact_rank1(&DMatrix::identity(4, 4), 2).unwrap();
        assert_eq!(s.support, vec![0, 1]);
    }

    #[test]
    fn guard() {
        let m = DMatrix::<f64>::identity(60, 60);
        assert!(matches!(exact_rank1(&m, 10), Err(SpcaError::TooLargeToEnumerate { .. })));
    }

    #[test]
    fn exact_matches_bitmask_oracle() {
        for seed in 0..20 {
            let m = random_psd(8, seed);
            for k in 1..=4 {
                let s = exact_rank1(&m, k).unwrap();
                let (v, sup) = bitmask_oracle(&m, k);
                assert!((s.value - v).abs() < 1e-9);
                assert_eq!(s.support, sup);
                check_invariants(&m, &s, k);
            }
        }
    }

    #[test]
    fn greedy_is_exact_at_k1_and_swaps_help() {
        for seed in 0..20 {
            let m = random_psd(8, 100 + seed);
            let g = greedy_rank1(&m, 1, false).unwrap();
            assert_eq!(g.support, exact_rank1(&m, 1).unwrap().support);
            let a = greedy_rank1(&m, 3, false).unwrap();
            let b = greedy_rank1(&m, 3, true).unwrap();
            assert!(b.value >= a.value - 1e-12);
            assert!(b.value <= exact_rank1(&m, 3).unwrap().value + 1e-9);
            check_invariants(&m, &b, 3);
        }
    }

    #[test]
    fn greedy_swaps_near_exact() {
        let mut close = 0;
        for seed in 0..100 {
            let m = random_psd(10, 1000 + seed);
            let e = exact_rank1(&m, 4).unwrap().value;
            let g = greedy_rank1(&m, 4, true).unwrap().value;
            assert!(g <= e + 1e-9);
            if g >= 0.95 * e {
                close += 1;
            }
        }
        assert!(close >= 95, "{close}");
    }

    #[test]
    fn works_on_indefinite_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        let m = (&a + a.transpose()) * 0.5 - DMatrix::identity(6, 6) * 5.0;
        let s = exact_rank1(&m, 2).unwrap();
        check_invariants(&m, &s, 2);
        assert!(s.value < 0.0);
    }

    #[test]
    fn relax_round_on_pitprops() {
        let s = pitprops();
        let e = exact_rank1(&s, 5).unwrap();
        let r = relax_round_rank1(&s, 5).unwrap();
        check_invariants(&s, &r, 5);
        assert!(r.value <= e.value + 1e-9);
        assert!(r.value >= 0.99 * e.value);
    }

    #[test]
    fn auto_routes() {
        let m = random_psd(8, 3);
        assert_eq!(solve_rank1(&m, 2, Rank1Policy::Auto).unwrap(), exact_rank1(&m, 2).unwrap());
    }
}
