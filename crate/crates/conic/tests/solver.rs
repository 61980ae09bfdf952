use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spca_conic::cones::{project, svec};
use spca_conic::{certify, primal_violation, solve, ConicSolution, ConeKind, ConeSpec, ConicProgram, CsrMatrix, LinExpr, ProgramBuilder, Settings, SolveStatus};

#[test]
fn one_dimensional_box() {
    let mut b = ProgramBuilder::new();
    let x = b.add_var(0.0, 1.0);
    b.maximize(&LinExpr::var(x));
    let prog = b.build();
    let sol = solve(&prog, &Settings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.x[0] - 1.0).abs() < 1e-6);
    assert!(certify(&prog, &sol).holds(1e-6));
}

fn leading_eigenvalue_sdp(sigma: &DMatrix<f64>) -> ConicProgram {
    let n = sigma.nrows();
    let mut b = ProgramBuilder::new();
    let mut lower = vec![vec![LinExpr::zero(); n]; n];
    let mut obj = LinExpr::zero();
    let mut trace = LinExpr::constant(-1.0);
    for i in 0..n {
        for j in 0..=i {
            let v = b.free_var();
            lower[i][j] = LinExpr::var(v);
            obj.add_term(v, if i == j { sigma[(i, i)] } else { 2.0 * sigma[(i, j)] });
            if i == j {
                trace.add_term(v, 1.0);
            }
        }
    }
    b.maximize(&obj);
    b.add_eq(trace);
    b.add_psd(&lower);
    b.build()
}

#[test]
fn sdp_recovers_leading_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2usize, 4, 6] {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let sigma = &g * g.transpose();
        let lmax = sigma.clone().symmetric_eigen().eigenvalues.max();
        let prog = leading_eigenvalue_sdp(&sigma);
        let sol = solve(&prog, &Settings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - lmax).abs() < 1e-5 * (1.0 + lmax), "{} vs {}", sol.primal_objective, lmax);
        let cert = certify(&prog, &sol);
        assert!(cert.dual_objective >= lmax - 1e-5 * (1.0 + lmax));
        assert!(cert.relative_gap() <= 1e-6);
    }
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    g.qr().q()
}

/// Builds a program with a known optimal primal-dual pair (x*, s*, y*), s* and y* complementary.
fn planted(rng: &mut ChaCha8Rng, n: usize) -> (ConicProgram, f64) {
    let (prog, opt, _, _) = planted_pair(rng, n);
    (prog, opt)
}

fn planted_pair(rng: &mut ChaCha8Rng, n: usize) -> (ConicProgram, f64, Vec<f64>, Vec<f64>) {
    let cones = vec![
        ConeSpec::new(ConeKind::Zero, 2),
        ConeSpec::new(ConeKind::NonNeg, 4),
        ConeSpec::new(ConeKind::SecondOrder, 3),
        ConeSpec::new(ConeKind::RotatedSecondOrder, 3),
        ConeSpec::new(ConeKind::Psd, 3),
    ];
    let m: usize = cones.iter().map(|c| c.rows()).sum();
    let mut s = Vec::new();
    let mut y = Vec::new();
    s.extend([0.0, 0.0]);
    y.extend([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
    for k in 0..4 {
        let v = rng.gen_range(0.1..1.0);
        if k % 2 == 0 {
            s.push(v);
            y.push(0.0);
        } else {
            s.push(0.0);
            y.push(v);
        }
    }
    let u: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
    let beta = rng.gen_range(0.5..2.0);
    s.extend([nu, u[0], u[1]]);
    y.extend([beta * nu, -beta * u[0], -beta * u[1]]);
    // rotated cone: map an SOC complementary pair through the rotation
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let w: f64 = rng.gen_range(-1.0..1.0);
    let (t1, a1, z1) = (w.abs(), w, 0.0);
    s.extend([(t1 + a1) * r, (t1 - a1) * r, z1]);
    let (t2, a2) = (beta * w.abs(), -beta * w);
    y.extend([(t2 + a2) * r, (t2 - a2) * r, 0.0]);
    let q = random_orthogonal(3, rng);
    let ds = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, 0.0]));
    let dy = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 0.0, 0.7]));
    let (ms, my) = (&q * ds * q.transpose(), &q * dy * q.transpose());
    let mut vs = vec![0.0; 6];
    let mut vy = vec![0.0; 6];
    svec(&ms, &mut vs);
    svec(&my, &mut vy);
    s.extend(vs);
    y.extend(vy);
    assert_eq!(s.len(), m);

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for row in rows.iter_mut() {
        for j in 0..n {
            if rng.gen_bool(0.6) {
                row.push((j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    let a = CsrMatrix::from_rows(n, &rows);
    let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut ax = vec![0.0; m];
    a.mul_vec(&xs, &mut ax);
    let b: Vec<f64> = ax.iter().zip(&s).map(|(a, s)| a + s).collect();
    let mut c = vec![0.0; n];
    a.mul_t_vec(&y, &mut c);
    let opt: f64 = b.iter().zip(&y).map(|(b, y)| b * y).sum();
    let prog = ConicProgram {
        num_vars: n,
        objective: c,
        a,
        b,
        cones,
        lower: vec![f64::NEG_INFINITY; n],
        upper: vec![f64::INFINITY; n],
    };
    (prog, opt, xs, y)
}

#[test]
fn certificate_of_planted_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let (prog, opt, x, y) = planted_pair(&mut rng, 5);
        let exact = ConicSolution {
            status: SolveStatus::Optimal,
            s: Vec::new(),
            bound_s: Vec::new(),
            bound_y: Vec::new(),
            primal_objective: opt,
            dual_objective: opt,
            residuals: Default::default(),
            iterations: 0,
            rho: 1.0,
            x,
            y,
        };
        let cert = certify(&prog, &exact);
        assert!(cert.primal_infeasibility <= 1e-12 && cert.dual_infeasibility <= 1e-12, "{cert:?}");
        assert!(cert.gap <= 1e-12 * (1.0 + opt.abs()), "{cert:?}");
        assert!(primal_violation(&prog, &exact.x) <= 1e-12);

        let mut bad = exact.clone();
        bad.x[0] += 1e-2;
        bad.y[0] += 1e-2;
        let cert = certify(&prog, &bad);
        assert!(cert.primal_infeasibility.max(cert.dual_infeasibility) >= 1e-4, "{cert:?}");
    }
}

#[test]
fn planted_pairs_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (prog, opt) = planted(&mut rng, 5);
        let sol = solve(&prog, &Settings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let cert = certify(&prog, &sol);
        assert!(cert.relative_gap() <= 1e-6, "{cert:?}");
        assert!((sol.primal_objective - opt).abs() <= 1e-5 * (1.0 + opt.abs()), "{} vs {}", sol.primal_objective, opt);
        // weak duality on the certified pair
        assert!(cert.primal_objective <= cert.dual_objective + 1e-6 * (1.0 + opt.abs()));
    }
}

#[test]
fn detects_infeasible() {
    let mut b = ProgramBuilder::new();
    let x = b.free_var();
    b.add_nonneg(LinExpr::var(x) - LinExpr::constant(1.0));
    b.add_nonneg(LinExpr::constant(-1.0) - LinExpr::var(x));
    b.maximize(&LinExpr::var(x));
    let sol = solve(&b.build(), &Settings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

#[test]
fn detects_unbounded() {
    let mut b = ProgramBuilder::new();
    let x = b.add_var(0.0, f64::INFINITY);
    let y = b.free_var();
    b.add_nonneg(LinExpr::var(x) - LinExpr::var(y));
    b.maximize(&(LinExpr::var(x) + LinExpr::var(y)));
    let sol = solve(&b.build(), &Settings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Unbounded);
}

#[test]
fn rotated_cone_bound() {
    // maximize z subject to z^2 <= 2 * 3, so z = sqrt(6)
    let mut b = ProgramBuilder::new();
    let z = b.free_var();
    b.add_product_bound(LinExpr::constant(2.0), LinExpr::constant(3.0), vec![LinExpr::var(z)]);
    b.maximize(&LinExpr::var(z));
    let sol = solve(&b.build(), &Settings::default()).unwrap();
    assert!((sol.x[0] - 6f64.sqrt()).abs() < 1e-6);
}

#[test]
fn warm_start_reaches_same_point_faster() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (prog, _) = planted(&mut rng, 6);
    let cold = solve(&prog, &Settings::default()).unwrap();
    let warm = spca_conic::solve_warm(&prog, &Settings::default(), Some(&(&cold).into())).unwrap();
    assert!(warm.iterations <= cold.iterations);
    assert!((warm.primal_objective - cold.primal_objective).abs() < 1e-6);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn psd_projection_idempotent(v in proptest::collection::vec(-5.0f64..5.0, 10)) {
            let c = ConeSpec::new(ConeKind::Psd, 4);
            let mut p = v.clone();
            project(c, &mut p);
            let mut pp = p.clone();
            project(c, &mut pp);
            for (a, b) in p.iter().zip(&pp) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            let m = spca_conic::cones::smat(4, &p);
            prop_assert!(m.symmetric_eigen().eigenvalues.min() >= -1e-9);
        }

        #[test]
        fn soc_projection_idempotent(v in proptest::collection::vec(-5.0f64..5.0, 4)) {
            for kind in [ConeKind::SecondOrder, ConeKind::RotatedSecondOrder] {
                let c = ConeSpec::new(kind, 4);
                let mut p = v.clone();
                project(c, &mut p);
                prop_assert!(spca_conic::cones::distance(c, &p) < 1e-9);
                // Moreau: residual is orthogonal to the projection
                let ip: f64 = p.iter().zip(&v).map(|(a, b)| a * (b - a)).sum();
                prop_assert!(ip.abs() < 1e-9);
            }
        }
    }
}
