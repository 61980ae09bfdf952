use spca::altmin::{algorithm2, algorithm2_fixed, AltMinConfig, PenaltySchedule};
use spca::covmodel::pitprops;
use spca::relax::RelaxationKind;

fn main() -> spca::Result<()> {
    let sigma = pitprops();
    for ks in [vec![5, 5], vec![10, 10], vec![10, 10, 10]] {
        let cfg = AltMinConfig::new(ks.clone());
        let out = algorithm2_fixed(&sigma, &cfg, RelaxationKind::PermIneq)?;
        let s = &out.solution;
        println!("fixed {ks:?}: objective {:.4}  violation {:.4}  UB {:.4}  active {}", s.variance_fraction, s.violation, out.relaxation.upper_bound, out.active.len());
        let (s, _) = algorithm2(&sigma, &cfg)?;
        println!("plain {ks:?}: objective {:.4}  violation {:.4}", s.variance_fraction, s.violation);
    }
    let mut cfg = AltMinConfig::new(vec![4; 6]);
    cfg.schedule = PenaltySchedule::Linear(1.0);
    let (s, tr) = algorithm2(&sigma, &cfg)?;
    let first = &tr.rows[cfg.k_list.len() - 1];
    println!("six components: objective {:.4}  violation {:.4}  (after first sweep {:.4})", s.variance_fraction, s.violation, first.violation);
    Ok(())
}
