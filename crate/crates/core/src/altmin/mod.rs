//! Lagrangean alternating minimization over penalized rank-one subproblems, and variable fixing.

use log::{info, warn};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::covmodel::{orthogonality_violation, quadratic_objective, ComponentSet, MatrixKind, SparsityBudget, SymMatrix};
use crate::error::{Result, SpcaError};
use crate::linalg::min_eigenvalue;
use crate::rank1::{solve_rank1, Rank1Policy, Rank1Solution};
use crate::relax::{upper_bound, RelaxationKind, RelaxationResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltySchedule {
    /// `l` up to 50, then `50 + 5 (l - 50)`.
    Stepped,
    Linear(f64),
    /// Explicit values; the last one repeats.
    Custom(Vec<f64>),
}

impl PenaltySchedule {
    /// Unscaled penalty at (1-based) iteration `l`.
    pub fn lambda(&self, l: usize) -> f64 {
        match self {
            PenaltySchedule::Stepped => {
                if l <= 50 {
                    l as f64
                } else {
                    50.0 + 5.0 * (l - 50) as f64
                }
            }
            PenaltySchedule::Linear(s) => s * l as f64,
            PenaltySchedule::Custom(v) => v.get(l - 1).or(v.last()).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AltMinConfig {
    pub k_list: Vec<usize>,
    pub iterations: usize,
    pub schedule: PenaltySchedule,
    pub eps_offset: f64,
    pub fixing_threshold: f64,
    pub policy: Rank1Policy,
    pub track_history: bool,
    /// Stop once violation < 1e-6 with supports unchanged for 3 sweeps.
    pub early_stop: bool,
}

impl AltMinConfig {
    pub fn new(k_list: Vec<usize>) -> Self {
        Self {
            k_list,
            iterations: 100,
            schedule: PenaltySchedule::Stepped,
            eps_offset: 1e-6,
            fixing_threshold: 1e-4,
            policy: Rank1Policy::Auto,
            track_history: true,
            early_stop: false,
        }
    }

    pub fn with_iterations(mut self, l: usize) -> Self {
        self.iterations = l;
        self
    }

    pub fn with_policy(mut self, policy: Rank1Policy) -> Self {
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_list.len() < 2 {
            return Err(SpcaError::InvalidInput("alternating minimization needs at least two components".into()));
        }
        if self.k_list.contains(&0) {
            return Err(SpcaError::BudgetIllPosed("per-component budgets must be positive".into()));
        }
        if self.iterations == 0 || !(self.eps_offset > 0.0) || !(self.fixing_threshold >= 0.0) {
            return Err(SpcaError::InvalidInput("need L >= 1, eps > 0 and a nonnegative fixing threshold".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub component: usize,
    pub lambda: f64,
    pub objective: f64,
    pub violation: f64,
    pub support: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AltMinTrace {
    pub rows: Vec<TraceRow>,
    /// Factor applied to the schedule for covariance inputs.
    pub covariance_scale: Option<f64>,
    /// The unpenalized sweep was already orthogonal, so no scaling was applied.
    pub degenerate_scaling: bool,
    pub sweeps: usize,
    /// Variable fixing left nothing and the unrestricted run was used.
    pub fixing_fallback: bool,
}

struct State<'a> {
    sigma: &'a DMatrix<f64>,
    trace_sigma: f64,
    u: DMatrix<f64>,
}

impl State<'_> {
    fn penalized(&self, t: usize, lambda: f64) -> DMatrix<f64> {
        let mut m = self.sigma.clone();
        for s in (0..self.u.ncols()).filter(|&s| s != t) {
            let c = self.u.column(s);
            m.ger(-lambda, &c, &c, 1.0);
        }
        m
    }

    fn objective(&self) -> f64 {
        quadratic_objective(&self.u, self.sigma) / self.trace_sigma
    }
}

/// One penalized, shifted rank-one solve for component `t`; stores the new column.
fn step(state: &mut State, cfg: &AltMinConfig, t: usize, lambda: f64) -> Result<Rank1Solution> {
    let p = state.sigma.nrows();
    let mut m = state.penalized(t, lambda);
    let offset = cfg.eps_offset - min_eigenvalue(&m);
    for i in 0..p {
        m[(i, i)] += offset;
    }
    let lmin = min_eigenvalue(&m);
    let scale = state.sigma.abs().max().max(lambda).max(1.0);
    if lmin < cfg.eps_offset - 1e-9 * scale {
        return Err(SpcaError::Invariant(format!("shifted subproblem has min eigenvalue {lmin:e}")));
    }
    let sol = solve_rank1(&m, cfg.k_list[t], cfg.policy)?;
    state.u.set_column(t, &sol.u);
    Ok(sol)
}

fn supports(u: &DMatrix<f64>) -> Vec<Vec<usize>> {
    (0..u.ncols()).map(|t| (0..u.nrows()).filter(|&i| u[(i, t)] != 0.0).collect()).collect()
}

/// Runs the penalized sweeps for `cfg.iterations` outer iterations from `Y^t = 0`.
pub fn algorithm2(sigma: &SymMatrix, cfg: &AltMinConfig) -> Result<(ComponentSet, AltMinTrace)> {
    cfg.validate()?;
    let p = sigma.dim();
    let r = cfg.k_list.len();
    if let Some(&kt) = cfg.k_list.iter().find(|&&kt| kt > p) {
        return Err(SpcaError::BudgetIllPosed(format!("budget {kt} exceeds dimension {p}")));
    }
    let mut trace = AltMinTrace::default();
    let mut scale = 1.0;
    if sigma.kind() == MatrixKind::Covariance {
        let mut probe = State { sigma: sigma.matrix(), trace_sigma: sigma.trace(), u: DMatrix::zeros(p, r) };
        for t in 0..r {
            step(&mut probe, cfg, t, 0.0)?;
        }
        let viol = orthogonality_violation(&probe.u);
        if viol > 0.0 {
            scale = quadratic_objective(&probe.u, sigma.matrix()) / (p as f64 * viol);
            trace.covariance_scale = Some(scale);
        } else {
            warn!("unpenalized sweep is already orthogonal, penalty left unscaled");
            trace.degenerate_scaling = true;
        }
    }

    let mut state = State { sigma: sigma.matrix(), trace_sigma: sigma.trace(), u: DMatrix::zeros(p, r) };
    let mut stable = 0;
    let mut last = supports(&state.u);
    for l in 1..=cfg.iterations {
        let lambda = cfg.schedule.lambda(l) * scale;
        for t in 0..r {
            let sol = step(&mut state, cfg, t, lambda)?;
            if cfg.track_history {
                trace.rows.push(TraceRow {
                    iteration: l,
                    component: t,
                    lambda,
                    objective: state.objective(),
                    violation: orthogonality_violation(&state.u),
                    support: sol.support,
                });
            }
        }
        trace.sweeps = l;
        let now = supports(&state.u);
        stable = if now == last { stable + 1 } else { 0 };
        last = now;
        if cfg.early_stop && stable >= 3 && orthogonality_violation(&state.u) < 1e-6 {
            info!("orthogonal with stable supports after {l} sweeps");
            break;
        }
    }
    Ok((ComponentSet::from_loadings(state.u, sigma.matrix()), trace))
}

/// Indices whose total support weight reaches `threshold`.
pub fn variable_fix(zstar: &DMatrix<f64>, threshold: f64) -> Result<Vec<usize>> {
    let active: Vec<usize> = (0..zstar.nrows()).filter(|&i| zstar.row(i).sum() >= threshold).collect();
    if active.is_empty() {
        return Err(SpcaError::EmptyActiveSet);
    }
    Ok(active)
}

#[derive(Clone, Debug)]
pub struct FixedOutput {
    pub solution: ComponentSet,
    pub trace: AltMinTrace,
    pub relaxation: RelaxationResult,
    pub active: Vec<usize>,
    /// `(UB - obj) / UB`
    pub gap: f64,
}

/// Relaxation, variable fixing, then alternating minimization on the surviving indices.
pub fn algorithm2_fixed(sigma: &SymMatrix, cfg: &AltMinConfig, kind: RelaxationKind) -> Result<FixedOutput> {
    cfg.validate()?;
    let r = cfg.k_list.len();
    let relaxation = upper_bound(sigma.matrix(), &SparsityBudget::per_component(cfg.k_list.clone()), r, kind)?;
    let (active, fallback) = match variable_fix(&relaxation.zstar, cfg.fixing_threshold) {
        Ok(a) => (a, false),
        Err(SpcaError::EmptyActiveSet) => {
            warn!("variable fixing removed every index, running on the full matrix");
            ((0..sigma.dim()).collect(), true)
        }
        Err(e) => return Err(e),
    };
    let sub = sigma.restrict(&active);
    let sub_cfg = AltMinConfig { k_list: cfg.k_list.iter().map(|&k| k.min(active.len())).collect(), ..cfg.clone() };
    let (sol, mut trace) = algorithm2(&sub, &sub_cfg)?;
    trace.fixing_fallback = fallback;
    let mut u = DMatrix::zeros(sigma.dim(), r);
    for (a, &i) in active.iter().enumerate() {
        u.set_row(i, &sol.u.row(a));
    }
    for row in &mut trace.rows {
        row.support = row.support.iter().map(|&a| active[a]).collect();
    }
    let solution = ComponentSet::from_loadings(u, sigma.matrix());
    let ub = relaxation.upper_bound;
    Ok(FixedOutput { gap: (ub - solution.variance_fraction) / ub, solution, trace, relaxation, active })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covmodel::{pitprops, random_covariance};
    use crate::rank1::exact_rank1;

    #[test]
    fn schedule_values() {
        let s = PenaltySchedule::Stepped;
        assert_eq!((s.lambda(1), s.lambda(50), s.lambda(51), s.lambda(60)), (1.0, 50.0, 55.0, 100.0));
        assert_eq!(PenaltySchedule::Custom(vec![1.0, 3.0]).lambda(5), 3.0);
        assert_eq!(PenaltySchedule::Linear(0.5).lambda(4), 2.0);
    }

    #[test]
    fn identity_is_orthogonal_after_one_sweep() {
        let s = SymMatrix::identity(6);
        let cfg = AltMinConfig::new(vec![2, 1, 3]).with_iterations(1);
        let (sol, _) = algorithm2(&s, &cfg).unwrap();
        assert!((sol.variance_fraction - 0.5).abs() < 1e-12);
        assert!(sol.violation < 1e-12);
    }

    #[test]
    fn trace_has_one_row_per_component_step() {
        let cfg = AltMinConfig::new(vec![3, 3]).with_iterations(4);
        let (_, tr) = algorithm2(&pitprops(), &cfg).unwrap();
        assert_eq!(tr.rows.len(), 8);
        assert!(tr.covariance_scale.is_none());
    }

    #[test]
    fn shift_does_not_move_argmax() {
        for seed in 0..10 {
            let m = random_covariance(7, 14, seed);
            let u = exact_rank1(&m, 2).unwrap().u;
            let pen = {
                let mut x = m.matrix().clone();
                x.ger(-3.0, &u, &u, 1.0);
                x
            };
            let mut shifted = pen.clone();
            let off = 1e-6 - min_eigenvalue(&pen);
            for i in 0..7 {
                shifted[(i, i)] += off;
            }
            let a = exact_rank1(&pen, 3).unwrap();
            let b = exact_rank1(&shifted, 3).unwrap();
            assert_eq!(a.support, b.support);
            assert!((b.value - a.value - off).abs() < 1e-9);
        }
    }

    #[test]
    fn covariance_inputs_get_scaled() {
        let s = random_covariance(8, 16, 4);
        let cfg = AltMinConfig::new(vec![3, 3]).with_iterations(3);
        let (sol, tr) = algorithm2(&s, &cfg).unwrap();
        assert!(tr.covariance_scale.unwrap() > 0.0 || tr.degenerate_scaling);
        sol.check(Some(&SparsityBudget::per_component(vec![3, 3]))).unwrap();
    }

    #[test]
    fn fixing() {
        let mut z = DMatrix::zeros(5, 2);
        z[(3, 1)] = 0.5;
        assert_eq!(variable_fix(&z, 1e-4).unwrap(), vec![3]);
        assert_eq!(variable_fix(&z, 0.0).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(matches!(variable_fix(&DMatrix::zeros(3, 2), 1e-4), Err(SpcaError::EmptyActiveSet)));
    }

    #[test]
    fn fixed_on_identity_matches_plain() {
        let s = SymMatrix::identity(5);
        let cfg = AltMinConfig::new(vec![1, 1]).with_iterations(2);
        let (plain, _) = algorithm2(&s, &cfg).unwrap();
        let fixed = algorithm2_fixed(&s, &cfg, RelaxationKind::PermIneq).unwrap();
        assert!((plain.variance_fraction - fixed.solution.variance_fraction).abs() < 1e-12);
    }
}
