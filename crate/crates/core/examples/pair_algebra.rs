//! Implicit pairwise-difference operator and the two linear solves of a sweep.

use nalgebra::{DMatrix, DVector};
use subgroup_fusion::fusion::{d_apply, d_transpose_apply, mu_solve, BetaSolver, PairIndex};

fn main() -> subgroup_fusion::Result<()> {
    let mu = [1.0, 4.0, 2.0, 2.0];
    let idx = PairIndex::new(mu.len());
    let diffs = d_apply(&mu)?;
    for (k, (i, j)) in idx.iter().enumerate() {
        println!("mu[{i}] - mu[{j}] = {:>5.1}", diffs[k]);
    }
    println!("D^T D mu = {:?}", d_transpose_apply(&diffs, mu.len())?);

    // (r1 I + r2 D^T D) x = rhs without forming D
    let x = mu_solve(&[3.0, 1.0], 1.0, 1.0);
    println!("mu_solve([3, 1]) = {x:?}");

    let design = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let solver = BetaSolver::new(&design, 1.0, 1.0)?;
    let beta = solver.solve(
        &design,
        &DVector::from_vec(vec![1.0, 2.0, 3.0]),
        &DVector::zeros(2),
        &DVector::zeros(3),
        &DVector::zeros(2),
    )?;
    println!("beta ({:?} branch) = {:?}", solver.branch(), beta.as_slice());
    Ok(())
}
