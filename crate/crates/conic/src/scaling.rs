use crate::program::{ConeKind, ConeSpec, CsrMatrix};

const MIN_SCALE: f64 = 1e-4;
const MAX_SCALE: f64 = 1e4;

/// Ruiz equilibration: `A_hat = diag(e) A diag(d)`, cost multiplied by `cost`.
pub(crate) struct Scaling {
    pub e: Vec<f64>,
    pub d: Vec<f64>,
    pub cost: f64,
}

pub(crate) fn equilibrate(a: &CsrMatrix, c: &[f64], cones: &[ConeSpec], iters: usize) -> (CsrMatrix, Scaling) {
    let (m, n) = (a.nrows, a.ncols);
    let mut e = vec![1.0; m];
    let mut d = vec![1.0; n];
    let mut s = a.clone();
    let mut row_norm = vec![0.0; m];
    let mut col_norm = vec![0.0; n];
    for _ in 0..iters {
        row_norm.iter_mut().for_each(|v| *v = 0.0);
        col_norm.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            for k in s.indptr[i]..s.indptr[i + 1] {
                let v = s.data[k].abs();
                let j = s.indices[k];
                row_norm[i] = f64::max(row_norm[i], v);
                col_norm[j] = f64::max(col_norm[j], v);
            }
        }
        let mut dr: Vec<f64> = row_norm.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        let dc: Vec<f64> = col_norm.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        let mut off = 0;
        for cone in cones {
            let r = cone.rows();
            if matches!(cone.kind, ConeKind::SecondOrder | ConeKind::RotatedSecondOrder | ConeKind::Psd) && r > 0 {
                let mean = dr[off..off + r].iter().sum::<f64>() / r as f64;
                dr[off..off + r].iter_mut().for_each(|v| *v = mean);
            }
            off += r;
        }
        for i in 0..m {
            let ne = (e[i] * dr[i]).clamp(MIN_SCALE, MAX_SCALE);
            dr[i] = ne / e[i];
            e[i] = ne;
        }
        let mut dc = dc;
        for j in 0..n {
            let nd = (d[j] * dc[j]).clamp(MIN_SCALE, MAX_SCALE);
            dc[j] = nd / d[j];
            d[j] = nd;
        }
        for i in 0..m {
            for k in s.indptr[i]..s.indptr[i + 1] {
                s.data[k] *= dr[i] * dc[s.indices[k]];
            }
        }
    }
    let cmax = c.iter().zip(&d).map(|(ci, di)| (ci * di).abs()).fold(0.0, f64::max);
    let cost = if cmax > 0.0 { (1.0 / cmax).clamp(MIN_SCALE, MAX_SCALE) } else { 1.0 };
    (s, Scaling { e, d, cost })
}
