use spca::altmin::AltMinConfig;
use spca::covmodel::pitprops;
use spca::eval::allocation_study;
use spca::relax::RelaxationKind;

fn main() -> spca::Result<()> {
    let k: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(15);
    let st = allocation_study(&pitprops(), k, 3, RelaxationKind::PermIneq, &AltMinConfig::new(vec![1; 3]), 1)?;
    println!("{:<14} {:>10} {:>8} {:>10} {:>10}", "allocation", "asymmetry", "UB", "objective", "violation");
    for row in &st.rows {
        println!("{:<14} {:>10.3} {:>8.4} {:>10.4} {:>10.4}", format!("{:?}", row.allocation), row.asymmetry, row.upper_bound, row.objective, row.violation);
    }
    let (s, b) = (&st.rows[st.symmetric], &st.rows[st.best]);
    println!("symmetric {:?} {:.4}, best {:?} {:.4}, improvement {:.2}%", s.allocation, s.objective, b.allocation, b.objective, st.improvement_pct);
    Ok(())
}
