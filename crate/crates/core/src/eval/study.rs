use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{enumerate_allocations, kl_asymmetry};
use crate::altmin::{algorithm2_fixed, AltMinConfig};
use crate::covmodel::SymMatrix;
use crate::error::{Result, SpcaError};
use crate::relax::RelaxationKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationStudyRow {
    pub allocation: Vec<usize>,
    pub upper_bound: f64,
    pub objective: f64,
    pub violation: f64,
    pub asymmetry: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationStudy {
    pub rows: Vec<AllocationStudyRow>,
    /// Row of the allocation closest to uniform.
    pub symmetric: usize,
    /// Row with the largest objective.
    pub best: usize,
    /// Relative objective gain of the best row over the symmetric one, in percent.
    pub improvement_pct: f64,
}

/// Bound and fixed alternating-minimization solution for every allocation of `k_total`.
pub fn allocation_study(sigma: &SymMatrix, k_total: usize, r: usize, kind: RelaxationKind, template: &AltMinConfig, jobs: usize) -> Result<AllocationStudy> {
    let p = sigma.dim();
    let allocs = enumerate_allocations(k_total, r, p);
    if allocs.is_empty() {
        return Err(SpcaError::BudgetIllPosed(format!("no allocation of {k_total} into {r} parts of size <= {p}")));
    }
    let run = |a: &Vec<usize>| -> Result<AllocationStudyRow> {
        let cfg = AltMinConfig { k_list: a.clone(), ..template.clone() };
        let out = algorithm2_fixed(sigma, &cfg, kind)?;
        Ok(AllocationStudyRow {
            allocation: a.clone(),
            upper_bound: out.relaxation.upper_bound,
            objective: out.solution.variance_fraction,
            violation: out.solution.violation,
            asymmetry: kl_asymmetry(a, k_total, r, p),
        })
    };
    let rows: Vec<AllocationStudyRow> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| SpcaError::InvalidInput(e.to_string()))?;
        pool.install(|| allocs.par_iter().map(run).collect::<Result<_>>())?
    } else {
        allocs.iter().map(run).collect::<Result<_>>()?
    };
    let argbest = |key: &dyn Fn(&AllocationStudyRow) -> f64| {
        (0..rows.len()).fold(0, |b, i| if key(&rows[i]) > key(&rows[b]) { i } else { b })
    };
    let symmetric = argbest(&|row| -row.asymmetry);
    let best = argbest(&|row| row.objective);
    let improvement_pct = 100.0 * (rows[best].objective - rows[symmetric].objective) / rows[symmetric].objective;
    Ok(AllocationStudy { rows, symmetric, best, improvement_pct })
}
