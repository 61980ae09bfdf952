use log::{debug, trace};

use crate::cones::{distance, distance_dual, for_each_block, project};
use crate::error::ConicError;
use crate::kkt::ReducedKkt;
use crate::program::{ConeKind, ConeSpec, ConicProgram, CsrMatrix};
use crate::scaling::equilibrate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped early with residuals within a factor 100 of the tolerance.
    NearOptimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub eps_prim: f64,
    pub eps_dual: f64,
    pub eps_gap: f64,
    pub max_iter: usize,
    pub rho: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub scaling_iters: usize,
    pub adaptive_rho: bool,
    pub check_every: usize,
    pub stall_window: usize,
    pub stall_tol: f64,
    pub eps_infeasible: f64,
    pub eq_rho_factor: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            eps_prim: 1e-7,
            eps_dual: 1e-7,
            eps_gap: 1e-7,
            max_iter: 200_000,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            scaling_iters: 10,
            adaptive_rho: true,
            check_every: 10,
            stall_window: 25_000,
            stall_tol: 1e-12,
            eps_infeasible: 1e-7,
            eq_rho_factor: 1e3,
        }
    }
}

impl Settings {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_prim = eps;
        self.eps_dual = eps;
        self.eps_gap = eps;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

/// Absolute residuals (infinity norms) and their relative counterparts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub primal_rel: f64,
    pub dual_rel: f64,
    pub gap_rel: f64,
}

impl Residuals {
    pub fn max_rel(&self) -> f64 {
        self.primal_rel.max(self.dual_rel).max(self.gap_rel)
    }
}

/// Primal `x`, slack `s = b - Ax` (in K), dual `y` (in K*) for program rows.
/// `bound_s` / `bound_y` hold the same for the implicit bound rows (upper bounds first, then lower).
#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub bound_s: Vec<f64>,
    pub bound_y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub rho: f64,
}

/// Starting point for a re-solve. Rows missing at the end (e.g. freshly added cuts) are padded.
#[derive(Clone, Debug)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub bound_s: Vec<f64>,
    pub bound_y: Vec<f64>,
    pub rho: f64,
}

impl From<&ConicSolution> for WarmStart {
    fn from(sol: &ConicSolution) -> Self {
        Self {
            x: sol.x.clone(),
            s: sol.s.clone(),
            y: sol.y.clone(),
            bound_s: sol.bound_s.clone(),
            bound_y: sol.bound_y.clone(),
            rho: sol.rho,
        }
    }
}

struct Augmented {
    a: CsrMatrix,
    b: Vec<f64>,
    cones: Vec<ConeSpec>,
    rows: usize,
}

fn augment(prog: &ConicProgram) -> Augmented {
    let mut rows = prog.a.to_rows();
    let mut b = prog.b.clone();
    let mut nb = 0;
    for j in 0..prog.num_vars {
        if prog.upper[j].is_finite() {
            rows.push(vec![(j, 1.0)]);
            b.push(prog.upper[j]);
            nb += 1;
        }
    }
    for j in 0..prog.num_vars {
        if prog.lower[j].is_finite() {
            rows.push(vec![(j, -1.0)]);
            b.push(-prog.lower[j]);
            nb += 1;
        }
    }
    let mut cones = prog.cones.clone();
    if nb > 0 {
        cones.push(ConeSpec::new(ConeKind::NonNeg, nb));
    }
    Augmented { a: CsrMatrix::from_rows(prog.num_vars, &rows), b, cones, rows: prog.num_rows() }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cone_distance(cones: &[ConeSpec], v: &[f64], dual: bool) -> f64 {
    let mut off = 0;
    let mut worst: f64 = 0.0;
    for &c in cones {
        let r = c.rows();
        let d = if dual { distance_dual(c, &v[off..off + r]) } else { distance(c, &v[off..off + r]) };
        worst = worst.max(d);
        off += r;
    }
    worst
}

pub fn solve(prog: &ConicProgram, settings: &Settings) -> Result<ConicSolution, ConicError> {
    solve_warm(prog, settings, None)
}

pub fn solve_warm(prog: &ConicProgram, settings: &Settings, warm: Option<&WarmStart>) -> Result<ConicSolution, ConicError> {
    prog.validate()?;
    let aug = augment(prog);
    let (m, n) = (aug.b.len(), prog.num_vars);
    let c = &prog.objective;
    let (ah, sc) = equilibrate(&aug.a, c, &aug.cones, settings.scaling_iters);
    let bh: Vec<f64> = aug.b.iter().zip(&sc.e).map(|(b, e)| b * e).collect();
    let qh: Vec<f64> = c.iter().zip(&sc.d).map(|(c, d)| -sc.cost * c * d).collect();

    let mut is_eq = vec![false; m];
    {
        let mut off = 0;
        for cone in &aug.cones {
            let r = cone.rows();
            if cone.kind == ConeKind::Zero {
                is_eq[off..off + r].iter_mut().for_each(|v| *v = true);
            }
            off += r;
        }
    }
    let mut rho = warm.map(|w| w.rho).filter(|r| r.is_finite() && *r > 0.0).unwrap_or(settings.rho);
    let rho_vec = |rho: f64| -> Vec<f64> {
        is_eq.iter().map(|&e| if e { rho * settings.eq_rho_factor } else { rho }).collect()
    };
    let mut rv = rho_vec(rho);
    let mut kkt = ReducedKkt::new(&ah, settings.sigma, &rv)?;

    let mut x = vec![0.0; n];
    let mut z = vec![0.0; m];
    let mut y = vec![0.0; m];
    if let Some(w) = warm {
        if w.x.len() == n {
            for j in 0..n {
                x[j] = w.x[j] / sc.d[j];
            }
        }
        let nb = m - aug.rows;
        let mut s_full = vec![f64::NAN; m];
        let mut y_full = vec![0.0; m];
        for i in 0..aug.rows.min(w.s.len()) {
            s_full[i] = w.s[i];
            y_full[i] = w.y.get(i).copied().unwrap_or(0.0);
        }
        if w.bound_s.len() == nb {
            s_full[aug.rows..].copy_from_slice(&w.bound_s);
            y_full[aug.rows..].copy_from_slice(&w.bound_y);
        }
        let mut ax = vec![0.0; m];
        aug.a.mul_vec(&w.x, &mut ax);
        for i in 0..m {
            let zi = if s_full[i].is_nan() { ax[i] } else { aug.b[i] - s_full[i] };
            z[i] = zi * sc.e[i];
            y[i] = y_full[i] * sc.cost / sc.e[i];
        }
    }

    let mut rhs = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut zt = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut xprev = x.clone();
    let mut yprev = y.clone();
    let mut aty = vec![0.0; n];

    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>, Residuals)> = None;
    let mut best_history: Vec<(usize, f64)> = Vec::new();
    let mut status = SolveStatus::IterLimit;
    let mut iter = 0;
    let mut infeas_hits = (0usize, 0usize);

    let unscale = |x: &[f64], z: &[f64], y: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let xu: Vec<f64> = x.iter().zip(&sc.d).map(|(a, d)| a * d).collect();
        let zu: Vec<f64> = z.iter().zip(&sc.e).map(|(a, e)| a / e).collect();
        let yu: Vec<f64> = y.iter().zip(&sc.e).map(|(a, e)| a * e / sc.cost).collect();
        (xu, zu, yu)
    };

    while iter < settings.max_iter {
        iter += 1;
        xprev.copy_from_slice(&x);
        yprev.copy_from_slice(&y);

        for i in 0..m {
            tmp_m[i] = rv[i] * z[i] - y[i];
        }
        ah.mul_t_vec(&tmp_m, &mut rhs);
        for j in 0..n {
            rhs[j] += settings.sigma * x[j] - qh[j];
        }
        kkt.solve(&mut rhs);
        ah.mul_vec(&rhs, &mut zt);
        let al = settings.alpha;
        for j in 0..n {
            x[j] = al * rhs[j] + (1.0 - al) * x[j];
        }
        for i in 0..m {
            let zh = al * zt[i] + (1.0 - al) * z[i];
            zt[i] = zh;
            v[i] = bh[i] - (zh + y[i] / rv[i]);
        }
        for_each_block(&aug.cones, &mut v, project);
        for i in 0..m {
            let znew = bh[i] - v[i];
            y[i] += rv[i] * (zt[i] - znew);
            z[i] = znew;
        }

        if iter % settings.check_every != 0 && iter != settings.max_iter {
            continue;
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(ConicError::NumericalBreakdown(format!("non-finite iterate at iteration {iter}")));
        }

        let (xu, zu, yu) = unscale(&x, &z, &y);
        let res = residuals(&aug.a, &aug.b, c, &xu, &zu, &yu, &mut tmp_m, &mut aty);
        let merit = merit(&res, settings);
        if iter % (100 * settings.check_every) == 0 {
            trace!("iter {iter}: rho {rho:.2e} merit {merit:.3e} prim {:.2e} dual {:.2e} gap {:.2e}", res.primal_rel, res.dual_rel, res.gap_rel);
        }
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, x.clone(), z.clone(), y.clone(), res));
        }
        if merit <= 1.0 {
            status = SolveStatus::Optimal;
            break;
        }

        let dy: Vec<f64> = y.iter().zip(&yprev).zip(&sc.e).map(|((a, b), e)| (a - b) * e / sc.cost).collect();
        let dx: Vec<f64> = x.iter().zip(&xprev).zip(&sc.d).map(|((a, b), d)| (a - b) * d).collect();
        if primal_infeasible(&aug, &dy, settings.eps_infeasible, &mut aty) {
            infeas_hits.0 += 1;
            if infeas_hits.0 >= 2 {
                status = SolveStatus::Infeasible;
                break;
            }
        } else {
            infeas_hits.0 = 0;
        }
        if dual_infeasible(&aug, c, &dx, settings.eps_infeasible, &mut tmp_m) {
            infeas_hits.1 += 1;
            if infeas_hits.1 >= 2 {
                status = SolveStatus::Unbounded;
                break;
            }
        } else {
            infeas_hits.1 = 0;
        }

        let best_merit = best.as_ref().map(|b| b.0).unwrap_or(f64::INFINITY);
        best_history.push((iter, best_merit));
        if let Some(&(_, old)) = best_history.iter().rev().find(|(it, _)| iter - *it >= settings.stall_window) {
            if old - best_merit < settings.stall_tol {
                debug!("stalled at iteration {iter}, merit {best_merit:e}");
                break;
            }
            let keep = best_history.iter().position(|(it, _)| iter - *it < 2 * settings.stall_window).unwrap_or(0);
            if keep > 64 {
                best_history.drain(..keep.saturating_sub(1));
            }
        }

        if settings.adaptive_rho && iter % (5 * settings.check_every) == 0 {
            let new_rho = adapt_rho(&ah, &qh, &x, &z, &y, rho, &mut tmp_m, &mut aty);
            if new_rho > 5.0 * rho || new_rho < rho / 5.0 {
                rho = new_rho;
                rv = rho_vec(rho);
                kkt.refactor(settings.sigma, &rv)?;
            }
        }
    }

    let (xs, zs, ys, res) = match status {
        SolveStatus::Optimal | SolveStatus::IterLimit => {
            let b = best.ok_or_else(|| ConicError::NumericalBreakdown("no iterate evaluated".into()))?;
            if status == SolveStatus::IterLimit && b.0 <= 100.0 {
                status = SolveStatus::NearOptimal;
            }
            let (xu, zu, yu) = unscale(&b.1, &b.2, &b.3);
            (xu, zu, yu, b.4)
        }
        _ => {
            let (xu, zu, yu) = unscale(&x, &z, &y);
            let res = residuals(&aug.a, &aug.b, c, &xu, &zu, &yu, &mut tmp_m, &mut aty);
            (xu, zu, yu, res)
        }
    };
    let s: Vec<f64> = aug.b.iter().zip(&zs).map(|(b, z)| b - z).collect();
    let primal_objective = dot(c, &xs);
    let dual_objective = dot(&aug.b, &ys);
    debug!("conic solve: {status:?} after {iter} iterations, obj {primal_objective:.9}, res {res:?}");
    Ok(ConicSolution {
        status,
        x: xs,
        s: s[..aug.rows].to_vec(),
        y: ys[..aug.rows].to_vec(),
        bound_s: s[aug.rows..].to_vec(),
        bound_y: ys[aug.rows..].to_vec(),
        primal_objective,
        dual_objective,
        residuals: res,
        iterations: iter,
        rho,
    })
}

#[allow(clippy::too_many_arguments)]
fn residuals(a: &CsrMatrix, b: &[f64], c: &[f64], x: &[f64], z: &[f64], y: &[f64], ax: &mut [f64], aty: &mut [f64]) -> Residuals {
    a.mul_vec(x, ax);
    let mut rp: f64 = 0.0;
    for i in 0..ax.len() {
        rp = rp.max((ax[i] - z[i]).abs());
    }
    let pscale = 1.0 + inf_norm(ax).max(inf_norm(z)).max(inf_norm(b));
    a.mul_t_vec(y, aty);
    let mut rd: f64 = 0.0;
    for j in 0..aty.len() {
        rd = rd.max((aty[j] - c[j]).abs());
    }
    let dscale = 1.0 + inf_norm(aty).max(inf_norm(c));
    let (po, dobj) = (dot(c, x), dot(b, y));
    let gap = (po - dobj).abs();
    let gscale = 1.0 + po.abs().max(dobj.abs());
    Residuals { primal: rp, dual: rd, gap, primal_rel: rp / pscale, dual_rel: rd / dscale, gap_rel: gap / gscale }
}

fn merit(r: &Residuals, s: &Settings) -> f64 {
    (r.primal_rel / s.eps_prim).max(r.dual_rel / s.eps_dual).max(r.gap_rel / s.eps_gap)
}

fn primal_infeasible(aug: &Augmented, dy: &[f64], eps: f64, aty: &mut [f64]) -> bool {
    let ny = inf_norm(dy);
    if ny < 1e-12 {
        return false;
    }
    aug.a.mul_t_vec(dy, aty);
    if inf_norm(aty) > eps * ny || dot(&aug.b, dy) > -eps * ny {
        return false;
    }
    cone_distance(&aug.cones, dy, true) <= eps * ny
}

fn dual_infeasible(aug: &Augmented, c: &[f64], dx: &[f64], eps: f64, adx: &mut [f64]) -> bool {
    let nx = inf_norm(dx);
    if nx < 1e-12 || dot(c, dx) < eps * nx {
        return false;
    }
    aug.a.mul_vec(dx, adx);
    adx.iter_mut().for_each(|v| *v = -*v);
    cone_distance(&aug.cones, adx, false) <= eps * nx
}

#[allow(clippy::too_many_arguments)]
fn adapt_rho(a: &CsrMatrix, q: &[f64], x: &[f64], z: &[f64], y: &[f64], rho: f64, ax: &mut [f64], aty: &mut [f64]) -> f64 {
    a.mul_vec(x, ax);
    let rp = ax.iter().zip(z).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
    let pn = inf_norm(ax).max(inf_norm(z)).max(1e-12);
    a.mul_t_vec(y, aty);
    let rd = aty.iter().zip(q).fold(0.0, |m: f64, (a, b)| m.max((a + b).abs()));
    let dn = inf_norm(aty).max(inf_norm(q)).max(1e-12);
    let ratio = (rp / pn) / (rd / dn).max(1e-30);
    (rho * ratio.sqrt()).clamp(1e-6, 1e6)
}
