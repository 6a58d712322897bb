//! Clustering metrics: silhouette-driven choice of K and the Rand index.

use subgroup_fusion::structure::{cluster_intercepts, kmeans_1d, rand_index, silhouette_width};

fn main() -> subgroup_fusion::Result<()> {
    let mu = [-2.1, -1.9, -2.0, 0.1, -0.1, 0.0, 2.05, 1.95];
    for k in 2..=4 {
        let fit = kmeans_1d(&mu, k)?;
        println!("k = {k}: silhouette {:.4}", silhouette_width(&mu, &fit.labels)?);
    }
    let (labels, centers) = cluster_intercepts(&mu, 6)?;
    println!("chosen labels {labels:?}, centers {centers:?}");
    println!("rand index vs [0,0,0,1,1,2,2,2]: {:.4}", rand_index(&labels, &[0, 0, 0, 1, 1, 2, 2, 2])?);
    Ok(())
}
