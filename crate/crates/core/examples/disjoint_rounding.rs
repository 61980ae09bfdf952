use spca::covmodel::{pitprops, SparsityBudget};
use spca::relax::RelaxationKind;
use spca::rounding::{algorithm1, RoundingOptions};

fn main() -> spca::Result<()> {
    let sigma = pitprops();
    let budget = SparsityBudget::per_component(vec![5, 5]);
    for caps in [false, true] {
        let out = algorithm1(&sigma, &budget, 2, RelaxationKind::PermIneq, RoundingOptions { column_caps: caps, ..Default::default() })?;
        let s = &out.solution;
        println!("column caps {caps}: objective {:.4}  violation {:.1e}  UB {:.4}  gap {:.2}%", s.variance_fraction, s.violation, out.relaxation.upper_bound, 100.0 * out.gap);
        for t in 0..s.r() {
            println!("  component {t}: {:?}", s.support(t));
        }
    }
    Ok(())
}
