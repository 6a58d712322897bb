//! A small Monte-Carlo table comparing the three losses under mixture errors.

use subgroup_fusion::sim::{run_monte_carlo, ErrorKind, SimScenario, SummaryRow};
use subgroup_fusion::tuning::TuneConfig;
use subgroup_fusion::{LossSpec, PenaltyKind};

fn main() -> subgroup_fusion::Result<()> {
    let reps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let scenario = SimScenario::two_groups(100, ErrorKind::Mixture, 2024);
    println!("{}", SummaryRow::header());
    for (name, loss) in [("L1", LossSpec::l1()), ("L2", LossSpec::l2()), ("Huber", LossSpec::huber(1.345))] {
        let mut row = run_monte_carlo(&scenario, reps, &TuneConfig::new(loss, PenaltyKind::Scad))?;
        row.label = name.into();
        println!("{row}");
    }
    Ok(())
}
