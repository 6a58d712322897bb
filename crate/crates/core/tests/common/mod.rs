#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subgroup_fusion::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Explicit pair-difference matrix, rows in lexicographic `(i, j)` order.
pub fn dense_d(n: usize) -> DMatrix<f64> {
    let m = n * n.saturating_sub(1) / 2;
    let mut d = DMatrix::zeros(m, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            d[(k, i)] = 1.0;
            d[(k, j)] = -1.0;
            k += 1;
        }
    }
    d
}

pub fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| gauss(rng))
}

pub fn normal_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gauss(rng))
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample::<f64, _>(rand_distr::StandardNormal)
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let x = normal_mat(rng, n, p);
    let y = normal_vec(rng, n) * 2.0;
    Dataset::new(y, x).unwrap()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / scale.max(1.0)
}

use subgroup_fusion::SubgroupStructure;

/// Structures one move away from `truth`: merge two groups, split one group
/// at the median of its responses, add or drop one covariate.
pub fn neighborhood(data: &Dataset, truth: &SubgroupStructure) -> Vec<(String, SubgroupStructure)> {
    let y = data.y().as_slice();
    let labels = &truth.assignment;
    let k = truth.k();
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let merged: Vec<usize> = labels.iter().map(|&g| if g == b { a } else { g }).collect();
            let merged: Vec<usize> = merged.iter().map(|&g| if g > b { g - 1 } else { g }).collect();
            let s = SubgroupStructure::from_labels(&merged, y, truth.active_set.clone()).unwrap();
            out.push((format!("merge {a}+{b}"), s));
        }
    }
    for g in 0..k {
        let mut members: Vec<f64> = (0..y.len()).filter(|&i| labels[i] == g).map(|i| y[i]).collect();
        if members.len() < 2 {
            continue;
        }
        members.sort_by(f64::total_cmp);
        let cut = members[(members.len() - 1) / 2];
        let split: Vec<usize> = (0..y.len())
            .map(|i| if labels[i] == g && y[i] > cut { k } else { labels[i] })
            .collect();
        if split.contains(&k) {
            let s = SubgroupStructure::from_labels(&split, y, truth.active_set.clone()).unwrap();
            out.push((format!("split {g}"), s));
        }
    }
    for j in 0..data.p() {
        let mut active = truth.active_set.clone();
        let label = if let Some(pos) = active.iter().position(|&a| a == j) {
            active.remove(pos);
            format!("drop x{j}")
        } else {
            active.push(j);
            format!("add x{j}")
        };
        let s = SubgroupStructure::from_labels(labels, y, active).unwrap();
        out.push((label, s));
    }
    out
}

pub fn true_structure(data: &Dataset, assignment: &[usize], q: usize) -> SubgroupStructure {
    SubgroupStructure::from_labels(assignment, data.y().as_slice(), (0..q).collect()).unwrap()
}
