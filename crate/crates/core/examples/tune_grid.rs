//! Warm-started grid search over both tuning parameters with mBIC selection.

use subgroup_fusion::sim::{simulate, ErrorKind, SimScenario};
use subgroup_fusion::tuning::{tune, TuneConfig};
use subgroup_fusion::{LossSpec, PenaltyKind};

fn main() -> subgroup_fusion::Result<()> {
    let (data, _) = simulate(&SimScenario::two_groups(200, ErrorKind::T5, 5))?;
    let mut cfg = TuneConfig::new(LossSpec::huber(1.345), PenaltyKind::Scad);
    cfg.grid_n1 = 10;
    cfg.grid_n2 = 10;
    let (grid, search) = tune(&data, &cfg)?;
    println!("lambda1 in [{:.3e}, {:.3e}]", grid.lambda1_values.last().unwrap(), grid.lambda1_values[0]);
    println!("lambda2 in [{:.3e}, {:.3e}]", grid.lambda2_values.last().unwrap(), grid.lambda2_values[0]);
    for r in search.reports.iter().step_by(7) {
        println!(
            "{:.3e} {:.3e}  K = {}  q = {}  mBIC = {:.4}",
            r.lambda1,
            r.lambda2,
            r.k_hat(),
            r.q_hat(),
            r.mbic
        );
    }
    let best = search.best_report();
    println!(
        "selected #{}: K = {}, q = {}, centers {:?}",
        search.best,
        best.k_hat(),
        best.q_hat(),
        best.structure.centers
    );
    Ok(())
}
