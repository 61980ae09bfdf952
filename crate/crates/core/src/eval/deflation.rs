use nalgebra::DMatrix;

use crate::covmodel::ComponentSet;
use crate::error::Result;
use crate::rank1::{solve_rank1, Rank1Policy};

/// Sequential sparse components with projection deflation `(I - u u') S (I - u u')` between them.
/// Objective and violation are measured on the original matrix.
pub fn deflation_baseline(sigma: &DMatrix<f64>, k_list: &[usize], policy: Rank1Policy) -> Result<ComponentSet> {
    let p = sigma.nrows();
    let mut m = sigma.clone();
    let mut u = DMatrix::zeros(p, k_list.len());
    for (t, &kt) in k_list.iter().enumerate() {
        let sol = solve_rank1(&m, kt, policy)?;
        let proj = DMatrix::identity(p, p) - &sol.u * sol.u.transpose();
        m = &proj * m * &proj;
        m = (&m + m.transpose()) * 0.5;
        u.set_column(t, &sol.u);
    }
    Ok(ComponentSet::from_loadings(u, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covmodel::random_covariance;
    use nalgebra::DVector;

    #[test]
    fn diagonal() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let cs = deflation_baseline(&s, &[1, 1], Rank1Policy::Exact).unwrap();
        assert_eq!(cs.support(0), vec![0]);
        assert_eq!(cs.support(1), vec![1]);
        assert!((cs.objective - 5.0).abs() < 1e-12);
        assert!(cs.violation < 1e-12);
    }

    #[test]
    fn single_component_is_rank1() {
        let s = random_covariance(7, 14, 2);
        let cs = deflation_baseline(&s, &[3], Rank1Policy::Exact).unwrap();
        let r = solve_rank1(&s, 3, Rank1Policy::Exact).unwrap();
        assert_eq!(cs.u.column(0), r.u.column(0));
    }
}
