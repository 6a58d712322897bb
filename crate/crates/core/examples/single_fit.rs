//! ADMM fits along a short warm-started path, then subgroup extraction.

use subgroup_fusion::admm::{fit, AdmmConfig, AdmmState};
use subgroup_fusion::sim::{simulate, ErrorKind, SimScenario};
use subgroup_fusion::structure::{extract_structure, rand_index, DEFAULT_K_MAX};
use subgroup_fusion::tuning::{lambda1_max, lambda2_max};
use subgroup_fusion::{LossSpec, PenaltyKind};

fn main() -> subgroup_fusion::Result<()> {
    let (data, truth) = simulate(&SimScenario::two_groups(100, ErrorKind::Gauss, 3))?;
    let loss = LossSpec::l1();
    let l1_max = lambda1_max(&data, &loss)?;
    let l2_max = lambda2_max(&data, &loss)?;
    let mut state: Option<AdmmState> = None;
    for step in 0..=40 {
        let f = 10f64.powf(-(step as f64) / 40.0);
        let mut cfg = AdmmConfig::path(loss, PenaltyKind::Scad).with_lambdas(l1_max * f, l2_max * 0.05);
        // fused intercepts separate slowly, so each point gets more sweeps than a grid point
        cfg.max_iter = 500;
        let st = fit(&data, &cfg, state.as_ref())?;
        if step % 10 == 0 {
            let s = extract_structure(&st, DEFAULT_K_MAX)?;
            println!(
                "lambda1 = {:.2e}: K = {}, q = {}, scaled residual {:.1e}",
                cfg.lambda1(),
                s.k(),
                s.q(),
                st.scaled_residual()
            );
        }
        state = Some(st);
    }
    let st = state.unwrap();
    let s = extract_structure(&st, DEFAULT_K_MAX)?;
    println!("centers {:?}", s.centers);
    println!("beta {:?}", st.w.as_slice());
    println!("rand index vs truth {:.3}", rand_index(&s.assignment, &truth.assignment)?);
    Ok(())
}
