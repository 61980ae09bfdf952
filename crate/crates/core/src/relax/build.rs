use nalgebra::DMatrix;
use spca_conic::{ConeKind, ConicProgram, LinExpr, ProgramBuilder};

use super::layout::{Layout, MatrixBlock, PermVars, SymVars};
use super::RelaxationKind;
use crate::covmodel::SparsityBudget;
use crate::error::{Result, SpcaError};

/// A built relaxation: program, variable map and the PSD-intended blocks.
#[derive(Clone, Debug)]
pub struct Relaxation {
    pub kind: RelaxationKind,
    pub budget: SparsityBudget,
    pub program: ConicProgram,
    pub layout: Layout,
    pub blocks: Vec<MatrixBlock>,
    /// `tr(Sigma)`, the normalizer of reported bounds.
    pub trace: f64,
}

#[derive(Clone, Copy)]
struct Features {
    big_m: bool,
    perspective: bool,
    aggregate: bool,
    per_component: bool,
    perm: bool,
    soc: bool,
}

fn features(kind: RelaxationKind) -> Features {
    let f = Features { big_m: false, perspective: false, aggregate: false, per_component: false, perm: false, soc: false };
    match kind {
        RelaxationKind::BasicExtended => Features { big_m: true, ..f },
        RelaxationKind::DisjointIneq => Features { big_m: true, perspective: true, aggregate: true, ..f },
        RelaxationKind::DisjointIneqPerComponent => {
            Features { big_m: true, perspective: true, aggregate: true, per_component: true, ..f }
        }
        RelaxationKind::PermIneq => Features { aggregate: true, per_component: true, perm: true, ..f },
        RelaxationKind::SocPermIneq | RelaxationKind::SocPermIneqWithCuts => {
            Features { aggregate: true, per_component: true, perm: true, soc: true, ..f }
        }
    }
}

fn check_budget(p: usize, r: usize, budget: &SparsityBudget, kind: RelaxationKind) -> Result<(usize, Option<Vec<usize>>)> {
    budget.validate(p, r)?;
    let needs = features(kind).per_component;
    match (&budget.per_component, needs) {
        (None, true) => Err(SpcaError::BudgetIllPosed(format!("{} needs per-component budgets", kind.name()))),
        (ks, true) => Ok((budget.k(), ks.clone())),
        (_, false) => {
            let k = budget.k();
            if budget.per_component.is_some() && !(r <= k && k <= p * r) {
                return Err(SpcaError::BudgetIllPosed(format!("total budget {k} out of range")));
            }
            Ok((k, None))
        }
    }
}

pub fn build(sigma: &DMatrix<f64>, budget: &SparsityBudget, r: usize, kind: RelaxationKind) -> Result<Relaxation> {
    let p = sigma.nrows();
    if sigma.ncols() != p {
        return Err(SpcaError::DimensionMismatch("sigma must be square".into()));
    }
    let (k, kts) = check_budget(p, r, budget, kind)?;
    let feat = features(kind);
    let mut b = ProgramBuilder::new();

    let z = b.add_vars(p * r, 0.0, 1.0);
    let w = b.add_vars(p, 0.0, 1.0);
    let yt: Vec<SymVars> = (0..r).map(|_| SymVars::new(&mut b, p, f64::NEG_INFINITY, f64::INFINITY)).collect();
    let mut layout = Layout { p, r, z, w, yt, abs_y: None, abs_yt: Vec::new(), perm: Vec::new() };
    let zv = |l: &Layout, i: usize, t: usize| LinExpr::var(l.z(i, t));

    let mut obj = LinExpr::zero();
    for y in &layout.yt {
        for j in 0..p {
            for i in j..p {
                let c = if i == j { sigma[(i, i)] } else { 2.0 * sigma[(i, j)] };
                if c != 0.0 {
                    obj.add_term(y.at(i, j), c);
                }
            }
        }
    }
    b.maximize(&obj);

    let mut blocks = Vec::new();
    for (t, y) in layout.yt.iter().enumerate() {
        b.add_eq(y.diag_sum() - LinExpr::constant(1.0));
        blocks.push(MatrixBlock::new(format!("Y{t}"), p, |i, j| y.expr(i, j)));
    }
    {
        let l = &layout;
        blocks.push(MatrixBlock::new("Diag(w)-Y".into(), p, |i, j| {
            let mut e = -l.y_expr(i, j);
            if i == j {
                e.add_term(l.w[i], 1.0);
            }
            e
        }));
    }
    for i in 0..p {
        let mut e = LinExpr::sum_vars((0..r).map(|t| layout.z(i, t)));
        e.add_term(layout.w[i], -1.0);
        b.add_nonneg(e);
    }
    b.add_nonneg(LinExpr::constant(k as f64) - LinExpr::sum_vars(layout.z.iter().copied()));

    if feat.big_m {
        for (t, y) in layout.yt.iter().enumerate() {
            for j in 0..p {
                b.add_nonneg(zv(&layout, j, t) - y.expr(j, j));
                for i in j + 1..p {
                    for row in [i, j] {
                        b.add_nonneg(zv(&layout, row, t) * 0.5 - y.expr(i, j));
                        b.add_nonneg(zv(&layout, row, t) * 0.5 + y.expr(i, j));
                    }
                }
            }
        }
    }

    if feat.perspective {
        for (t, y) in layout.yt.iter().enumerate() {
            for i in 0..p {
                b.add_product_bound(y.expr(i, i), zv(&layout, i, t), (0..p).map(|j| y.expr(i, j)).collect());
            }
        }
    }

    if feat.aggregate {
        let a = SymVars::new(&mut b, p, 0.0, f64::INFINITY);
        for j in 0..p {
            for i in j..p {
                b.add_nonneg(a.expr(i, j) - layout.y_expr(i, j));
                b.add_nonneg(a.expr(i, j) + layout.y_expr(i, j));
            }
        }
        for i in 0..p {
            let wi = LinExpr::var(layout.w[i]);
            b.add_product_bound(layout.y_expr(i, i) * r as f64, wi.clone(), (0..p).map(|j| layout.y_expr(i, j)).collect());
            let row_abs = LinExpr::sum_vars((0..p).map(|j| a.at(i, j)));
            b.add_product_bound(layout.y_expr(i, i) * k as f64, wi, vec![row_abs]);
        }
        let coef = (k + 1).saturating_sub(r) as f64;
        for j in 0..p {
            let wj = LinExpr::var(layout.w[j]);
            let off: Vec<LinExpr> = (0..p).filter(|&i| i != j).map(|i| layout.y_expr(i, j)).collect();
            b.add_product_bound(wj.clone() * coef, wj - layout.y_expr(j, j), off);
        }
        layout.abs_y = Some(a);
    }

    if let (true, Some(kts)) = (feat.per_component, kts.as_ref()) {
        for (t, &kt) in kts.iter().enumerate() {
            b.add_nonneg(LinExpr::constant(kt as f64) - LinExpr::sum_vars((0..p).map(|i| layout.z(i, t))));
        }
        for (t, &kt) in kts.iter().enumerate() {
            let abs = if feat.perm {
                let f = SymVars::new(&mut b, p, f64::NEG_INFINITY, f64::INFINITY);
                perm_lift(&mut b, &mut layout, &mut blocks, t, kt, f)
            } else {
                let a = SymVars::new(&mut b, p, 0.0, f64::INFINITY);
                let y = &layout.yt[t];
                for j in 0..p {
                    for i in j..p {
                        b.add_nonneg(a.expr(i, j) - y.expr(i, j));
                        b.add_nonneg(a.expr(i, j) + y.expr(i, j));
                    }
                }
                layout.abs_yt.push(a.clone());
                a
            };
            let y = &layout.yt[t];
            for i in 0..p {
                let row_abs = LinExpr::sum_vars((0..p).map(|j| abs.at(i, j)));
                b.add_product_bound(y.expr(i, i) * kt as f64, zv(&layout, i, t), vec![row_abs]);
            }
            for j in 0..p {
                let zj = zv(&layout, j, t);
                let off: Vec<LinExpr> = (0..p).filter(|&i| i != j).map(|i| y.expr(i, j)).collect();
                b.add_product_bound(zj.clone() * (kt - 1) as f64, zj - y.expr(j, j), off);
            }
        }
    }

    for blk in &blocks {
        if feat.soc {
            add_minors(&mut b, blk);
        } else {
            b.add_psd(&blk.lower());
        }
    }

    Ok(Relaxation { kind, budget: budget.clone(), program: b.build(), layout, blocks, trace: sigma.trace() })
}

/// Lifted variables for component `t`; returns `F^t`, which bounds `|Y^t|`.
fn perm_lift(b: &mut ProgramBuilder, layout: &mut Layout, blocks: &mut Vec<MatrixBlock>, t: usize, kt: usize, f: SymVars) -> SymVars {
    let p = layout.p;
    let y = layout.yt[t].clone();
    let g = SymVars::new(b, kt, f64::NEG_INFINITY, f64::INFINITY);
    for j in 0..p {
        for i in j..p {
            b.add_nonneg(f.expr(i, j) - y.expr(i, j));
            b.add_nonneg(f.expr(i, j) + y.expr(i, j));
        }
    }
    for i in 0..kt {
        for j in 0..kt.saturating_sub(1) {
            b.add_nonneg(g.expr(i, j) - g.expr(i, j + 1));
        }
    }
    b.add_eq(f.diag_sum() - LinExpr::constant(1.0));
    b.add_eq(g.diag_sum() - LinExpr::constant(1.0));
    b.add_eq(g.total_sum() - f.total_sum());

    let rd: Vec<usize> = (0..p.saturating_sub(1)).map(|_| b.free_var()).collect();
    let td: Vec<usize> = b.add_vars(p * p.saturating_sub(1), 0.0, f64::INFINITY);
    for (jj, &rj) in rd.iter().enumerate() {
        let j = jj + 1;
        let mut e = LinExpr::sum_vars((0..j.min(kt)).map(|i| g.at(i, i)));
        e.add_term(rj, -(j as f64));
        for i in 0..p {
            e.add_term(td[i * (p - 1) + jj], -1.0);
        }
        b.add_nonneg(e);
        for i in 0..p {
            let mut e = LinExpr::var(rj) + LinExpr::var(td[i * (p - 1) + jj]);
            e.add_term(y.at(i, i), -1.0);
            b.add_nonneg(e);
        }
    }

    let mut tv: Vec<Option<usize>> = vec![None; p * p];
    for i in 0..p {
        for j in 0..p {
            if i != j {
                tv[i * p + j] = Some(b.add_var(0.0, f64::INFINITY));
            }
        }
    }
    let t_expr = |i: usize, j: usize| match tv[i * p + j] {
        Some(v) => LinExpr::var(v),
        None => f.expr(i, i),
    };
    for i in 0..p {
        for j in 0..i {
            b.add_product_bound(t_expr(i, j), t_expr(j, i), vec![f.expr(i, j)]);
        }
    }
    for i in 0..p {
        let mut row = LinExpr::zero();
        for j in 0..p {
            row.add_expr(&t_expr(i, j), 1.0);
        }
        row.add_term(layout.z(i, t), -1.0);
        b.add_eq(row);
    }
    for j in 0..p {
        let mut col = LinExpr::zero();
        for i in 0..p {
            col.add_expr(&t_expr(i, j), 1.0);
        }
        col.add_term(f.at(j, j), -(kt as f64));
        b.add_eq(col);
    }
    for i in 0..p {
        for j in 0..p {
            if let Some(v) = tv[i * p + j] {
                b.add_nonneg(f.expr(j, j) - LinExpr::var(v));
            }
        }
    }

    blocks.push(MatrixBlock::new(format!("F{t}"), p, |i, j| f.expr(i, j)));
    blocks.push(MatrixBlock::new(format!("G{t}"), kt, |i, j| g.expr(i, j)));
    layout.perm.push(PermVars { kt, f: f.clone(), g, t: tv, rd, td });
    f
}

/// Second-order outer approximation of `X PSD`: nonnegative diagonal and all `2 x 2` principal minors.
fn add_minors(b: &mut ProgramBuilder, blk: &MatrixBlock) {
    for i in 0..blk.n {
        b.add_nonneg(blk.entry(i, i).clone());
    }
    for j in 0..blk.n {
        for i in j + 1..blk.n {
            b.add_cone(
                ConeKind::RotatedSecondOrder,
                vec![blk.entry(i, i).scaled(0.5), blk.entry(j, j).clone(), blk.entry(i, j).clone()],
            );
        }
    }
}
