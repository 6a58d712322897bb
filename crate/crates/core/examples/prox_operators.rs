//! Thresholding rules of the three penalties and the loss proxes.

use subgroup_fusion::{LossSpec, PenaltySpec};

fn main() -> subgroup_fusion::Result<()> {
    let lambda = 1.0;
    let r = 1.0;
    let rules = [
        ("lasso", PenaltySpec::lasso(lambda)),
        ("scad", PenaltySpec::scad(lambda, 3.7)),
        ("mcp", PenaltySpec::mcp(lambda, 3.0)),
    ];
    println!("{:>6} {:>8} {:>8} {:>8}", "u", "lasso", "scad", "mcp");
    for k in 0..=10 {
        let u = 0.5 * k as f64;
        print!("{u:>6.2}");
        for (_, pen) in &rules {
            print!(" {:>8.4}", pen.prox(u, r)?);
        }
        println!();
    }

    println!("\nloss prox at v = 2, n = 10, r1 = 0.5");
    for (name, loss) in [("l1", LossSpec::l1()), ("l2", LossSpec::l2()), ("huber", LossSpec::huber(1.345))] {
        println!("{name:>6} {:.4}", loss.prox_z(2.0, 10, 0.5));
    }
    Ok(())
}
