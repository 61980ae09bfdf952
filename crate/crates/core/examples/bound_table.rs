use std::time::Instant;

use spca::covmodel::{pitprops, SparsityBudget};
use spca::relax::{upper_bound, RelaxationKind};

fn main() -> spca::Result<()> {
    env_logger::init();
    let sigma = pitprops();
    let rows: &[(RelaxationKind, SparsityBudget, usize)] = &[
        (RelaxationKind::DisjointIneq, SparsityBudget::total(4), 2),
        (RelaxationKind::PermIneq, SparsityBudget::per_component(vec![2, 2]), 2),
        (RelaxationKind::PermIneq, SparsityBudget::per_component(vec![3, 1]), 2),
        (RelaxationKind::DisjointIneqPerComponent, SparsityBudget::per_component(vec![5, 5]), 2),
        (RelaxationKind::PermIneq, SparsityBudget::per_component(vec![5, 5]), 2),
        (RelaxationKind::SocPermIneq, SparsityBudget::per_component(vec![5, 5]), 2),
        (RelaxationKind::SocPermIneqWithCuts, SparsityBudget::per_component(vec![5, 5]), 2),
    ];
    for (kind, budget, r) in rows {
        let t = Instant::now();
        let res = upper_bound(&sigma, budget, *r, *kind)?;
        println!(
            "{kind:<12} r={r} {:?}  UB {:.4}  cuts {}  iters {}  {:?}  {:.1}s",
            budget,
            res.upper_bound,
            res.cuts_added,
            res.report.iterations,
            res.report.status,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
