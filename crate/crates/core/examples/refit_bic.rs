//! Oracle refit under a fixed structure and the refit BIC of nearby structures.

use subgroup_fusion::sim::{simulate, ErrorKind, SimScenario};
use subgroup_fusion::structure::{refit, refit_bic};
use subgroup_fusion::tuning::BicSpec;
use subgroup_fusion::{LossSpec, SubgroupStructure};

fn main() -> subgroup_fusion::Result<()> {
    let mut scenario = SimScenario::new(200, 10, 3, vec![-1.0, 1.0], ErrorKind::Gauss, 9);
    scenario.error_scale = 0.25;
    let (data, truth) = simulate(&scenario)?;
    let y = data.y().as_slice();
    let loss = LossSpec::l1();
    let spec = BicSpec::new(5.0);

    let s0 = SubgroupStructure::from_labels(&truth.assignment, y, vec![0, 1, 2])?;
    let fit = refit(&data, &loss, &s0)?;
    println!("alpha {:?}", fit.alpha);
    println!("beta {:?}", fit.beta_active);

    let merged = SubgroupStructure::from_labels(&vec![0; data.n()], y, vec![0, 1, 2])?;
    let extra = SubgroupStructure::from_labels(&truth.assignment, y, vec![0, 1, 2, 3])?;
    let dropped = SubgroupStructure::from_labels(&truth.assignment, y, vec![0, 1])?;
    for (name, s) in [("true", &s0), ("merged", &merged), ("add x3", &extra), ("drop x2", &dropped)] {
        println!("{name:>8}: {:.4}", refit_bic(&data, &loss, s, &spec)?);
    }
    Ok(())
}
