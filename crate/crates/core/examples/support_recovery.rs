use std::time::Instant;

use spca::eval::{roc_experiment, RocConfig, RocMethod};

fn main() -> spca::Result<()> {
    for q in [1.0 / 20.0, 0.5, 19.0 / 20.0] {
        for method in [RocMethod::Algorithm2, RocMethod::Deflation] {
            let t = Instant::now();
            let curve = roc_experiment(method, &RocConfig::standard(q))?;
            println!("q = {q:.2}  {method:<8} AUC {:.4}  ({:.0}s)", curve.auc, t.elapsed().as_secs_f64());
            for p in &curve.points {
                println!("    k {:>2}  fpr {:.3}  tpr {:.3}", p.k, p.fpr, p.tpr);
            }
        }
    }
    Ok(())
}
