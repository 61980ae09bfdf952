use crate::cones::{distance, distance_dual};
use crate::program::{ConeSpec, ConicProgram};
use crate::solver::ConicSolution;

/// Residuals recomputed from the raw program data, without the solver's scaling or bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    /// Largest cone distance of `b - Ax` per block, or bound violation.
    pub primal_infeasibility: f64,
    /// `||A^T y + (bound terms) - c||_inf` together with the dual cone distance of `y`.
    pub dual_infeasibility: f64,
    /// `|c^T x - b^T y - (bound terms)|`.
    pub gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl Certificate {
    pub fn relative_gap(&self) -> f64 {
        self.gap / (1.0 + self.primal_objective.abs().max(self.dual_objective.abs()))
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.primal_infeasibility <= tol && self.dual_infeasibility <= tol && self.relative_gap() <= tol
    }
}

/// Largest cone distance of `b - Ax` over all blocks, including variable bounds.
pub fn primal_violation(prog: &ConicProgram, x: &[f64]) -> f64 {
    let mut slack = prog.b.clone();
    for (i, s) in slack.iter_mut().enumerate() {
        let (idx, val) = prog.a.row(i);
        *s -= idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum::<f64>();
    }
    let mut worst: f64 = 0.0;
    let mut off = 0;
    for &cone in &prog.cones {
        let r = cone.rows();
        worst = worst.max(distance(cone, &slack[off..off + r]));
        off += r;
    }
    for j in 0..prog.num_vars {
        worst = worst.max(prog.lower[j] - x[j]).max(x[j] - prog.upper[j]);
    }
    worst
}

pub fn certify(prog: &ConicProgram, sol: &ConicSolution) -> Certificate {
    let n = prog.num_vars;
    let x = &sol.x;

    let mut slack = prog.b.clone();
    for i in 0..prog.a.nrows {
        let (idx, val) = prog.a.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            slack[i] -= v * x[j];
        }
    }
    let mut primal: f64 = 0.0;
    let mut dual_cone: f64 = 0.0;
    let mut off = 0;
    for &cone in &prog.cones {
        let r = ConeSpec::rows(&cone);
        primal = primal.max(distance(cone, &slack[off..off + r]));
        dual_cone = dual_cone.max(distance_dual(cone, &sol.y[off..off + r]));
        off += r;
    }
    for j in 0..n {
        primal = primal.max(prog.lower[j] - x[j]).max(x[j] - prog.upper[j]);
    }

    let mut grad = vec![0.0; n];
    for i in 0..prog.a.nrows {
        let (idx, val) = prog.a.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            grad[j] += v * sol.y[i];
        }
    }
    let mut bound_obj = 0.0;
    let mut k = 0;
    for j in 0..n {
        if prog.upper[j].is_finite() {
            let mu = sol.bound_y.get(k).copied().unwrap_or(0.0);
            grad[j] += mu;
            bound_obj += mu * prog.upper[j];
            dual_cone = dual_cone.max(-mu);
            k += 1;
        }
    }
    for j in 0..n {
        if prog.lower[j].is_finite() {
            let nu = sol.bound_y.get(k).copied().unwrap_or(0.0);
            grad[j] -= nu;
            bound_obj -= nu * prog.lower[j];
            dual_cone = dual_cone.max(-nu);
            k += 1;
        }
    }
    let mut dual = dual_cone;
    for j in 0..n {
        dual = dual.max((grad[j] - prog.objective[j]).abs());
    }
    let primal_objective: f64 = prog.objective.iter().zip(x).map(|(c, x)| c * x).sum();
    let dual_objective: f64 = prog.b.iter().zip(&sol.y).map(|(b, y)| b * y).sum::<f64>() + bound_obj;
    Certificate {
        primal_infeasibility: primal,
        dual_infeasibility: dual,
        gap: (primal_objective - dual_objective).abs(),
        primal_objective,
        dual_objective,
    }
}
