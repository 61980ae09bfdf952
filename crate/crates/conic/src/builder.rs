use std::ops::{Add, Mul, Neg, Sub};

use crate::program::{ConeKind, ConeSpec, ConicProgram, CsrMatrix};

/// Affine expression `constant + sum coef * x_var`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn var(j: usize) -> Self {
        Self { constant: 0.0, terms: vec![(j, 1.0)] }
    }

    pub fn term(j: usize, coef: f64) -> Self {
        Self { constant: 0.0, terms: vec![(j, coef)] }
    }

    pub fn sum_vars<I: IntoIterator<Item = usize>>(vars: I) -> Self {
        Self { constant: 0.0, terms: vars.into_iter().map(|j| (j, 1.0)).collect() }
    }

    pub fn add_term(&mut self, j: usize, coef: f64) -> &mut Self {
        self.terms.push((j, coef));
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        self.constant += scale * other.constant;
        self.terms.extend(other.terms.iter().map(|&(j, c)| (j, scale * c)));
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { constant: self.constant * s, terms: self.terms.iter().map(|&(j, c)| (j, c * s)).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, c)| c * x[j]).sum::<f64>()
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_expr(&rhs, 1.0);
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_expr(&rhs, -1.0);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, s: f64) -> LinExpr {
        self.scaled(s)
    }
}

/// Incrementally assembles a [`ConicProgram`] from cone memberships of affine expressions.
#[derive(Clone, Debug, Default)]
pub struct ProgramBuilder {
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    b: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    cones: Vec<ConeSpec>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(0.0);
        self.lower.len() - 1
    }

    pub fn add_vars(&mut self, n: usize, lower: f64, upper: f64) -> Vec<usize> {
        (0..n).map(|_| self.add_var(lower, upper)).collect()
    }

    pub fn free_var(&mut self) -> usize {
        self.add_var(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Adds `expr` to the objective (maximized). The constant is ignored.
    pub fn maximize(&mut self, expr: &LinExpr) {
        for &(j, c) in &expr.terms {
            self.objective[j] += c;
        }
    }

    /// Requires the vector of expressions to lie in the cone.
    pub fn add_cone(&mut self, kind: ConeKind, exprs: Vec<LinExpr>) {
        let spec = match kind {
            ConeKind::Psd => {
                let m = exprs.len();
                let n = ((((8 * m + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
                assert_eq!(n * (n + 1) / 2, m, "psd block needs a triangular number of rows");
                ConeSpec::new(kind, n)
            }
            _ => ConeSpec::new(kind, exprs.len()),
        };
        if spec.rows() == 0 {
            return;
        }
        for e in exprs {
            self.b.push(e.constant);
            self.rows.push(e.terms.iter().map(|&(j, c)| (j, -c)).collect());
        }
        self.cones.push(spec);
    }

    pub fn add_eq(&mut self, expr: LinExpr) {
        self.add_cone(ConeKind::Zero, vec![expr]);
    }

    pub fn add_nonneg(&mut self, expr: LinExpr) {
        self.add_cone(ConeKind::NonNeg, vec![expr]);
    }

    /// `||z||^2 <= a * b` with `a, b >= 0`.
    pub fn add_product_bound(&mut self, a: LinExpr, b: LinExpr, z: Vec<LinExpr>) {
        let mut exprs = Vec::with_capacity(z.len() + 2);
        exprs.push(a.scaled(0.5));
        exprs.push(b);
        exprs.extend(z);
        self.add_cone(ConeKind::RotatedSecondOrder, exprs);
    }

    /// Symmetric matrix given by its lower triangle `lower[i][j]`, `j <= i`, is PSD.
    pub fn add_psd(&mut self, lower: &[Vec<LinExpr>]) {
        let n = lower.len();
        let mut exprs = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in j..n {
                let e = &lower[i][j];
                exprs.push(if i == j { e.clone() } else { e.scaled(std::f64::consts::SQRT_2) });
            }
        }
        self.add_cone(ConeKind::Psd, exprs);
    }

    pub fn build(self) -> ConicProgram {
        let n = self.lower.len();
        ConicProgram {
            num_vars: n,
            objective: self.objective,
            a: CsrMatrix::from_rows(n, &self.rows),
            b: self.b,
            cones: self.cones,
            lower: self.lower,
            upper: self.upper,
        }
    }
}

impl ConicProgram {
    /// Appends a cone block given by affine expressions (cut rows, for instance).
    pub fn add_cone_exprs(&mut self, kind: ConeKind, exprs: &[LinExpr]) {
        let spec = match kind {
            ConeKind::Psd => {
                let m = exprs.len();
                let n = ((((8 * m + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
                ConeSpec::new(kind, n)
            }
            _ => ConeSpec::new(kind, exprs.len()),
        };
        let rows = exprs.iter().map(|e| (e.constant, e.terms.iter().map(|&(j, c)| (j, -c)).collect())).collect();
        self.push_cone(spec, rows);
    }
}
