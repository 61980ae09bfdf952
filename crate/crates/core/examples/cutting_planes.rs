use spca::covmodel::{pitprops, SparsityBudget};
use spca::relax::{build, default_settings, lifted_point, solve_relaxation, solve_with_cuts, RelaxationKind};
use spca::rounding::{algorithm1, RoundingOptions};
use spca_conic::primal_violation;

fn main() -> spca::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let sigma = pitprops();
    let budget = SparsityBudget::per_component(vec![5, 5]);
    let relax = build(&sigma, &budget, 2, RelaxationKind::SocPermIneqWithCuts)?;

    // any feasible pair of components lifts to a feasible point of the relaxation
    let sol = algorithm1(&sigma, &budget, 2, RelaxationKind::PermIneq, RoundingOptions::default())?.solution;
    let x = lifted_point(&relax, &sol.u);
    println!("lifted Algorithm 1 solution: constraint violation {:.1e}", primal_violation(&relax.program, &x));

    let settings = default_settings(sigma.dim());
    let plain = solve_relaxation(&relax, &settings)?;
    let cut = solve_with_cuts(&relax, &settings, 50, 1e-4)?;
    println!("SOC bound {:.4}", plain.upper_bound);
    println!("with {} cuts {:.4}{}", cut.cuts_added, cut.upper_bound, if cut.stalled_cuts { " (stalled)" } else { "" });
    println!("feasible objective {:.4}", sol.variance_fraction);
    Ok(())
}
