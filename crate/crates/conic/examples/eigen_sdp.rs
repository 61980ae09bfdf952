use nalgebra::DMatrix;
use spca_conic::{certify, solve, LinExpr, ProgramBuilder, Settings};

// max <S, X>  s.t.  tr X = 1, X psd.  The optimum is the largest eigenvalue of S.
fn main() {
    let s = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
    let n = s.nrows();
    let mut b = ProgramBuilder::new();
    let mut lower = vec![vec![LinExpr::zero(); n]; n];
    let mut obj = LinExpr::zero();
    let mut trace = LinExpr::constant(-1.0);
    for i in 0..n {
        for j in 0..=i {
            let v = b.free_var();
            lower[i][j] = LinExpr::var(v);
            obj.add_term(v, if i == j { s[(i, i)] } else { 2.0 * s[(i, j)] });
            if i == j {
                trace.add_term(v, 1.0);
            }
        }
    }
    b.maximize(&obj);
    b.add_eq(trace);
    b.add_psd(&lower);
    let prog = b.build();
    let sol = solve(&prog, &Settings::default()).expect("solve");
    let cert = certify(&prog, &sol);
    println!("status {:?} after {} iterations", sol.status, sol.iterations);
    println!("primal {:.8}  dual {:.8}  (2 + sqrt 2 = {:.8})", cert.primal_objective, cert.dual_objective, 2.0 + 2f64.sqrt());
    println!("primal infeasibility {:.1e}  dual infeasibility {:.1e}", cert.primal_infeasibility, cert.dual_infeasibility);
}
