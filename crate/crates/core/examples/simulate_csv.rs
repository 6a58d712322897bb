//! Writes one simulated replicate as CSV and reports its ground truth.

use subgroup_fusion::cli::write_csv;
use subgroup_fusion::sim::{simulate_rep, ErrorKind, SimScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "simulated.csv".into());
    let scenario = SimScenario::three_groups(150, ErrorKind::T5, 11);
    let (data, truth) = simulate_rep(&scenario, 0)?;
    write_csv(path.as_ref(), &data)?;
    let mut sizes = vec![0; scenario.centers.len()];
    for &g in &truth.assignment {
        sizes[g] += 1;
    }
    println!("wrote {} rows to {path}", data.n());
    println!("group sizes {sizes:?} at centers {:?}", scenario.centers);
    println!("beta {:?}", truth.beta);
    Ok(())
}
