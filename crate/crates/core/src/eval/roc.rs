use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deflation_baseline;
use crate::altmin::{algorithm2, algorithm2_fixed, AltMinConfig};
use crate::covmodel::{generate_spiked, SparsityBudget, SpikedInstance};
use crate::error::{Result, SpcaError};
use crate::rank1::Rank1Policy;
use crate::relax::RelaxationKind;
use crate::rounding::{algorithm1, RoundingOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub k: usize,
    pub tpr: f64,
    pub fpr: f64,
}

/// Pooled rates under the better of the two column-to-truth assignments (by `tpr - fpr`, then `tpr`).
pub fn tpr_fpr(uhat: &DMatrix<f64>, truth: [&[usize]; 2]) -> Result<(f64, f64)> {
    let (p, r) = uhat.shape();
    if r != 2 {
        return Err(SpcaError::UnsupportedRank(r));
    }
    if truth.iter().any(|s| s.is_empty()) {
        return Err(SpcaError::InvalidInput("truth supports must be nonempty".into()));
    }
    let positives: usize = truth.iter().map(|s| s.len()).sum();
    let negatives: usize = truth.iter().map(|s| p - s.len()).sum();
    let mut best: Option<(f64, f64)> = None;
    for perm in [[0, 1], [1, 0]] {
        let (mut tp, mut fp) = (0usize, 0usize);
        for t in 0..2 {
            let x = truth[perm[t]];
            for i in (0..p).filter(|&i| uhat[(i, t)] != 0.0) {
                if x.contains(&i) {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        let tpr = tp as f64 / positives as f64;
        let fpr = if negatives == 0 { 0.0 } else { fp as f64 / negatives as f64 };
        let better = best.is_none_or(|(bt, bf)| tpr - fpr > bt - bf || (tpr - fpr == bt - bf && tpr > bt));
        if better {
            best = Some((tpr, fpr));
        }
    }
    Ok(best.expect("two assignments"))
}

/// Trapezoid area under the `fpr`-sorted curve, starting at `(0, 0)` and optionally closed at `(1, 1)`.
pub fn auc(points: &[RocPoint], close: bool) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    pts.push((0.0, 0.0));
    if close {
        pts.push((1.0, 1.0));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RocMethod {
    Algorithm1,
    Algorithm2,
    Algorithm2Fixed,
    Deflation,
}

impl RocMethod {
    pub fn name(self) -> &'static str {
        match self {
            RocMethod::Algorithm1 => "alg1",
            RocMethod::Algorithm2 => "alg2",
            RocMethod::Algorithm2Fixed => "alg2-fixed",
            RocMethod::Deflation => "deflate",
        }
    }
}

impl fmt::Display for RocMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RocMethod {
    type Err = SpcaError;
    fn from_str(s: &str) -> Result<Self> {
        [RocMethod::Algorithm1, RocMethod::Algorithm2, RocMethod::Algorithm2Fixed, RocMethod::Deflation]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SpcaError::InvalidInput(format!("unknown method '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocConfig {
    pub p: usize,
    pub sigma: f64,
    pub k_true: usize,
    pub q: f64,
    pub k_sweep: Vec<usize>,
    pub n_seeds: usize,
    pub base_seed: u64,
    pub policy: Rank1Policy,
    pub iterations: usize,
    pub early_stop: bool,
    pub kind: Option<RelaxationKind>,
    pub jobs: usize,
}

impl RocConfig {
    pub fn standard(q: f64) -> Self {
        Self {
            p: 50,
            sigma: 2.0,
            k_true: 20,
            q,
            k_sweep: vec![1, 2, 5, 10, 15, 20, 25, 30, 40, 50],
            n_seeds: 20,
            base_seed: 0,
            policy: Rank1Policy::GreedySwaps,
            iterations: 100,
            early_stop: true,
            kind: None,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub method: RocMethod,
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub config: RocConfig,
}

/// Estimated loadings for one instance and per-component budget `k`.
pub fn run_method(method: RocMethod, inst: &SpikedInstance, k: usize, cfg: &RocConfig) -> Result<DMatrix<f64>> {
    let ks = vec![k.min(inst.p); 2];
    let alt = AltMinConfig { iterations: cfg.iterations, early_stop: cfg.early_stop, track_history: false, ..AltMinConfig::new(ks.clone()) }
        .with_policy(cfg.policy);
    let kind = cfg.kind.unwrap_or_else(|| RelaxationKind::auto(inst.p));
    Ok(match method {
        RocMethod::Algorithm1 => {
            algorithm1(&inst.matrix, &SparsityBudget::per_component(ks), 2, kind, RoundingOptions::default())?.solution.u
        }
        RocMethod::Algorithm2 => algorithm2(&inst.matrix, &alt)?.0.u,
        RocMethod::Algorithm2Fixed => algorithm2_fixed(&inst.matrix, &alt, kind)?.solution.u,
        RocMethod::Deflation => deflation_baseline(&inst.matrix, &ks, cfg.policy)?.u,
    })
}

/// Mean `(fpr, tpr)` per swept `k` over seeded instances, with its AUC.
pub fn roc_experiment(method: RocMethod, cfg: &RocConfig) -> Result<RocCurve> {
    roc_with(method, cfg, |inst, k| run_method(method, inst, k, cfg))
}

/// As `roc_experiment`, with a caller-supplied estimator.
pub fn roc_with<F>(method: RocMethod, cfg: &RocConfig, estimate: F) -> Result<RocCurve>
where
    F: Fn(&SpikedInstance, usize) -> Result<DMatrix<f64>> + Sync,
{
    let seeds: Vec<u64> = (0..cfg.n_seeds as u64).map(|s| cfg.base_seed + s).collect();
    let per_seed = |seed: &u64| -> Result<Vec<(f64, f64)>> {
        let inst = generate_spiked(cfg.p, cfg.sigma, cfg.k_true, cfg.q, *seed)?;
        let truth = [inst.supports[0].as_slice(), inst.supports[1].as_slice()];
        cfg.k_sweep.iter().map(|&k| tpr_fpr(&estimate(&inst, k)?, truth)).collect()
    };
    let rates: Vec<Vec<(f64, f64)>> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| SpcaError::InvalidInput(e.to_string()))?;
        pool.install(|| seeds.par_iter().map(per_seed).collect::<Result<_>>())?
    } else {
        seeds.iter().map(per_seed).collect::<Result<_>>()?
    };
    let n = rates.len().max(1) as f64;
    let points: Vec<RocPoint> = cfg
        .k_sweep
        .iter()
        .enumerate()
        .map(|(a, &k)| RocPoint {
            k,
            tpr: rates.iter().map(|r| r[a].0).sum::<f64>() / n,
            fpr: rates.iter().map(|r| r[a].1).sum::<f64>() / n,
        })
        .collect();
    let auc = auc(&points, method == RocMethod::Algorithm1);
    Ok(RocCurve { method, points, auc, config: cfg.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn on(p: usize, cols: [&[usize]; 2]) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(p, 2);
        for (t, c) in cols.iter().enumerate() {
            for &i in *c {
                u[(i, t)] = 1.0;
            }
        }
        u
    }

    #[test]
    fn exact_and_swapped_recovery() {
        let x1 = [0, 1, 2];
        let x2 = [3, 4];
        assert_eq!(tpr_fpr(&on(8, [&x1, &x2]), [&x1, &x2]).unwrap(), (1.0, 0.0));
        assert_eq!(tpr_fpr(&on(8, [&x2, &x1]), [&x1, &x2]).unwrap(), (1.0, 0.0));
        assert!(matches!(tpr_fpr(&DMatrix::zeros(8, 3), [&x1, &x2]), Err(SpcaError::UnsupportedRank(3))));
    }

    #[test]
    fn matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x1 = sample(&mut rng, 50, 20).into_vec();
            let x2 = sample(&mut rng, 50, 20).into_vec();
            let c1 = sample(&mut rng, 50, 20).into_vec();
            let c2 = sample(&mut rng, 50, 20).into_vec();
            let got = tpr_fpr(&on(50, [&c1, &c2]), [&x1, &x2]).unwrap();
            let rate = |a: &[usize], b: &[usize], x: &[usize], y: &[usize]| {
                let tp = a.iter().filter(|i| x.contains(i)).count() + b.iter().filter(|i| y.contains(i)).count();
                let fp = 40 - tp;
                (tp as f64 / 40.0, fp as f64 / 60.0)
            };
            let s = rate(&c1, &c2, &x1, &x2);
            let w = rate(&c1, &c2, &x2, &x1);
            let want = if w.0 - w.1 > s.0 - s.1 || (w.0 - w.1 == s.0 - s.1 && w.0 > s.0) { w } else { s };
            assert_eq!(got, want);
        }
    }

    #[test]
    fn auc_order_invariant_and_perfect_stub() {
        let pts = vec![RocPoint { k: 1, tpr: 0.5, fpr: 0.1 }, RocPoint { k: 2, tpr: 0.9, fpr: 0.4 }, RocPoint { k: 3, tpr: 1.0, fpr: 1.0 }];
        let mut rev = pts.clone();
        rev.reverse();
        assert_eq!(auc(&pts, false), auc(&rev, false));
        let cfg = RocConfig { p: 12, k_true: 3, q: 0.0, k_sweep: vec![3], n_seeds: 3, ..RocConfig::standard(0.0) };
        let curve = roc_with(RocMethod::Algorithm1, &cfg, |inst, _| Ok(on(inst.p, [&inst.supports[0], &inst.supports[1]]))).unwrap();
        assert_eq!(curve.auc, 1.0);
    }
}
