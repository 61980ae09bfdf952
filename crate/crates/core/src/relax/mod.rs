//! Convex relaxations of sparse PCA with orthogonal components, and the eigenvector-cut loop.

mod build;
mod layout;
mod lift;

use std::fmt;
use std::str::FromStr;

use log::{info, warn};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use spca_conic::{solve_warm, ConeKind, ConicSolution, Residuals, Settings, SolveStatus, WarmStart};

use crate::covmodel::SparsityBudget;
use crate::error::{Result, SpcaError};

pub use build::{build, Relaxation};
pub use layout::{Layout, MatrixBlock, PermVars, SymVars};
pub use lift::lifted_point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelaxationKind {
    BasicExtended,
    DisjointIneq,
    DisjointIneqPerComponent,
    PermIneq,
    SocPermIneq,
    SocPermIneqWithCuts,
}

impl RelaxationKind {
    pub const ALL: [RelaxationKind; 6] = [
        RelaxationKind::BasicExtended,
        RelaxationKind::DisjointIneq,
        RelaxationKind::DisjointIneqPerComponent,
        RelaxationKind::PermIneq,
        RelaxationKind::SocPermIneq,
        RelaxationKind::SocPermIneqWithCuts,
    ];

    /// Size-based default: full SDP up to p = 50, SOC with cuts up to 200, plain SOC beyond.
    pub fn auto(p: usize) -> Self {
        if p <= 50 {
            RelaxationKind::PermIneq
        } else if p <= 200 {
            RelaxationKind::SocPermIneqWithCuts
        } else {
            RelaxationKind::SocPermIneq
        }
    }

    pub fn needs_per_component(self) -> bool {
        !matches!(self, RelaxationKind::BasicExtended | RelaxationKind::DisjointIneq)
    }

    pub fn name(self) -> &'static str {
        match self {
            RelaxationKind::BasicExtended => "basic",
            RelaxationKind::DisjointIneq => "disjoint",
            RelaxationKind::DisjointIneqPerComponent => "disjoint-pc",
            RelaxationKind::PermIneq => "perm",
            RelaxationKind::SocPermIneq => "soc",
            RelaxationKind::SocPermIneqWithCuts => "soc-cuts",
        }
    }
}

impl fmt::Display for RelaxationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelaxationKind {
    type Err = SpcaError;
    fn from_str(s: &str) -> Result<Self> {
        RelaxationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SpcaError::InvalidInput(format!("unknown relaxation kind '{s}'")))
    }
}

/// Summary of the conic solve behind a bound.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl From<&ConicSolution> for SolverReport {
    fn from(s: &ConicSolution) -> Self {
        Self {
            status: s.status,
            iterations: s.iterations,
            residuals: s.residuals,
            primal_objective: s.primal_objective,
            dual_objective: s.dual_objective,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelaxationResult {
    pub kind: RelaxationKind,
    pub budget: SparsityBudget,
    /// Optimal value divided by `tr(Sigma)`.
    pub upper_bound: f64,
    pub zstar: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub ycomp: Vec<DMatrix<f64>>,
    pub w: DVector<f64>,
    pub cuts_added: usize,
    pub stalled_cuts: bool,
    pub report: SolverReport,
}

/// Solver settings scaled to the problem dimension.
pub fn default_settings(p: usize) -> Settings {
    let eps = if p <= 13 {
        1e-7
    } else if p <= 34 {
        1e-6
    } else {
        1e-5
    };
    Settings::default().with_eps(eps)
}

fn checked_solve(relax: &Relaxation, settings: &Settings, warm: Option<&WarmStart>) -> Result<ConicSolution> {
    let sol = solve_warm(&relax.program, settings, warm)?;
    match sol.status {
        SolveStatus::Optimal | SolveStatus::NearOptimal => Ok(sol),
        SolveStatus::IterLimit if sol.residuals.max_rel() <= 1e-3 => {
            warn!("{} relaxation hit the iteration limit, residual {:e}", relax.kind, sol.residuals.max_rel());
            Ok(sol)
        }
        s => Err(SpcaError::Solver(format!(
            "{} relaxation ended with status {s:?} after {} iterations (residual {:.2e})",
            relax.kind,
            sol.iterations,
            sol.residuals.max_rel()
        ))),
    }
}

fn extract(relax: &Relaxation, sol: &ConicSolution, cuts_added: usize, stalled_cuts: bool) -> RelaxationResult {
    let l = &relax.layout;
    let x = &sol.x;
    let ycomp: Vec<DMatrix<f64>> = l.yt.iter().map(|y| y.read(x)).collect();
    let y = ycomp.iter().fold(DMatrix::zeros(l.p, l.p), |acc, m| acc + m);
    RelaxationResult {
        kind: relax.kind,
        budget: relax.budget.clone(),
        upper_bound: sol.primal_objective / relax.trace,
        zstar: l.zstar(x),
        y,
        ycomp,
        w: DVector::from_iterator(l.p, l.w.iter().map(|&v| x[v])),
        cuts_added,
        stalled_cuts,
        report: sol.into(),
    }
}

/// Solves a built relaxation once.
pub fn solve_relaxation(relax: &Relaxation, settings: &Settings) -> Result<RelaxationResult> {
    let sol = checked_solve(relax, settings, None)?;
    Ok(extract(relax, &sol, 0, false))
}

/// Most negative eigenpair of each registered block at `x`.
fn block_eigen(relax: &Relaxation, x: &[f64]) -> Vec<(f64, Vec<f64>)> {
    relax
        .blocks
        .iter()
        .map(|blk| {
            let m = blk.eval(x);
            let eig = SymmetricEigen::new(m);
            let mut k = 0;
            for i in 1..eig.eigenvalues.len() {
                if eig.eigenvalues[i] < eig.eigenvalues[k] {
                    k = i;
                }
            }
            (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
        })
        .collect()
}

/// Re-solves with one eigenvector cut per block violating PSD by more than `eig_tol`, warm-starting each round.
pub fn solve_with_cuts(relax: &Relaxation, settings: &Settings, max_rounds: usize, eig_tol: f64) -> Result<RelaxationResult> {
    let mut relax = relax.clone();
    let mut warm: Option<WarmStart> = None;
    let mut cuts_added = 0;
    let mut prev_worst = f64::NEG_INFINITY;
    let mut stalls = 0;
    let mut round = 0;
    loop {
        let sol = checked_solve(&relax, settings, warm.as_ref())?;
        let eig = block_eigen(&relax, &sol.x);
        let worst = eig.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        info!("cut round {round}: bound {:.6}, worst eigenvalue {worst:.3e}", sol.primal_objective / relax.trace);
        if worst >= -eig_tol || round >= max_rounds {
            return Ok(extract(&relax, &sol, cuts_added, false));
        }
        if worst < prev_worst + 1e-9 {
            stalls += 1;
            if stalls >= 2 {
                warn!("cut loop stalled after {round} rounds");
                return Ok(extract(&relax, &sol, cuts_added, true));
            }
        } else {
            stalls = 0;
        }
        prev_worst = worst;
        let cuts: Vec<_> = relax
            .blocks
            .iter()
            .zip(&eig)
            .filter(|(_, (l, _))| *l < -eig_tol)
            .map(|(blk, (_, v))| blk.cut(v))
            .collect();
        cuts_added += cuts.len();
        relax.program.add_cone_exprs(ConeKind::NonNeg, &cuts);
        warm = Some(WarmStart::from(&sol));
        round += 1;
    }
}

pub const DEFAULT_CUT_ROUNDS: usize = 50;
pub const DEFAULT_EIG_TOL: f64 = 1e-4;

/// Builds and solves the requested relaxation (with cuts for `SocPermIneqWithCuts`).
pub fn upper_bound(sigma: &DMatrix<f64>, budget: &SparsityBudget, r: usize, kind: RelaxationKind) -> Result<RelaxationResult> {
    upper_bound_with(sigma, budget, r, kind, &default_settings(sigma.nrows()))
}

pub fn upper_bound_with(sigma: &DMatrix<f64>, budget: &SparsityBudget, r: usize, kind: RelaxationKind, settings: &Settings) -> Result<RelaxationResult> {
    let relax = build(sigma, budget, r, kind)?;
    if kind == RelaxationKind::SocPermIneqWithCuts {
        solve_with_cuts(&relax, settings, DEFAULT_CUT_ROUNDS, DEFAULT_EIG_TOL)
    } else {
        solve_relaxation(&relax, settings)
    }
}

/// Maximum bound over all nonincreasing allocations of `k_total` across `r` components.
pub fn worst_case_allocation_bound(sigma: &DMatrix<f64>, k_total: usize, r: usize, kind: RelaxationKind) -> Result<(Vec<usize>, RelaxationResult)> {
    if !kind.needs_per_component() {
        return Err(SpcaError::BudgetIllPosed(format!("{kind} does not take per-component budgets")));
    }
    let allocs = crate::eval::enumerate_allocations(k_total, r, sigma.nrows());
    let mut best: Option<(Vec<usize>, RelaxationResult)> = None;
    for a in allocs {
        let res = upper_bound(sigma, &SparsityBudget::per_component(a.clone()), r, kind)?;
        if best.as_ref().is_none_or(|b| res.upper_bound > b.1.upper_bound) {
            best = Some((a, res));
        }
    }
    best.ok_or_else(|| SpcaError::BudgetIllPosed(format!("no allocation of {k_total} into {r} parts")))
}
