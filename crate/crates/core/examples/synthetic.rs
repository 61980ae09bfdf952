use spca::covmodel::generate_spiked;
use spca::eval::tpr_fpr;
use spca::rank1::Rank1Policy;
use spca::altmin::{algorithm2, AltMinConfig};

fn main() -> spca::Result<()> {
    let inst = generate_spiked(30, 2.0, 8, 0.25, 42)?;
    println!("spikes {:?} and {:?}, overlap {}", inst.supports[0], inst.supports[1], inst.overlap());
    let cfg = AltMinConfig::new(vec![8, 8]).with_policy(Rank1Policy::GreedySwaps);
    let (sol, _) = algorithm2(&inst.matrix, &cfg)?;
    let (tpr, fpr) = tpr_fpr(&sol.u, [&inst.supports[0], &inst.supports[1]])?;
    println!("recovered {:?} and {:?}", sol.support(0), sol.support(1));
    println!("tpr {tpr:.3}  fpr {fpr:.3}  violation {:.1e}", sol.violation);
    Ok(())
}
