use nalgebra::DMatrix;

use super::Relaxation;

/// Feasible point of `relax` induced by orthonormal loadings `u` (`p x r`).
///
/// Each column's support is padded with the lowest free indices up to its budget when the
/// relaxation carries per-component budgets.
pub fn lifted_point(relax: &Relaxation, u: &DMatrix<f64>) -> Vec<f64> {
    let l = &relax.layout;
    let (p, r) = (l.p, l.r);
    assert_eq!(u.shape(), (p, r), "loadings shape");
    let mut x = vec![0.0; relax.program.num_vars];

    let kts = relax.budget.per_component.clone();
    let mut z = DMatrix::<f64>::zeros(p, r);
    for t in 0..r {
        for i in 0..p {
            if u[(i, t)] != 0.0 {
                z[(i, t)] = 1.0;
            }
        }
        if let Some(kts) = &kts {
            let mut i = 0;
            while z.column(t).sum() < kts[t] as f64 && i < p {
                z[(i, t)] = 1.0;
                i += 1;
            }
        }
    }
    for i in 0..p {
        for t in 0..r {
            x[l.z(i, t)] = z[(i, t)];
        }
        x[l.w[i]] = z.row(i).sum().min(1.0);
    }

    let comps: Vec<DMatrix<f64>> = (0..r).map(|t| u.column(t) * u.column(t).transpose()).collect();
    for (y, m) in l.yt.iter().zip(&comps) {
        y.write(&mut x, m);
    }
    if let Some(a) = &l.abs_y {
        let y = comps.iter().fold(DMatrix::zeros(p, p), |acc, m| acc + m);
        a.write(&mut x, &y.abs());
    }
    for (a, m) in l.abs_yt.iter().zip(&comps) {
        a.write(&mut x, &m.abs());
    }

    for (t, pv) in l.perm.iter().enumerate() {
        let col = u.column(t);
        let abs = comps[t].abs();
        pv.f.write(&mut x, &abs);
        let mut v: Vec<f64> = col.iter().map(|a| a.abs()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        let g = DMatrix::from_fn(pv.kt, pv.kt, |i, j| v[i] * v[j]);
        pv.g.write(&mut x, &g);
        for i in 0..p {
            for j in 0..p {
                if let Some(var) = pv.t[i * p + j] {
                    x[var] = z[(i, t)] * col[j] * col[j];
                }
            }
        }
        let d: Vec<f64> = col.iter().map(|a| a * a).collect();
        let mut sorted = d.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for (jj, &rv) in pv.rd.iter().enumerate() {
            let rdj = sorted[jj];
            x[rv] = rdj;
            for i in 0..p {
                x[pv.td[i * (p - 1) + jj]] = (d[i] - rdj).max(0.0);
            }
        }
    }
    x
}
