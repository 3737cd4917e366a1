#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use adversary_core::lp::Polytope;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when (numerically) singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let pivot = a[col].clone();
        for r in col + 1..n {
            let f = a[r][col] / pivot[col];
            for (v, p) in a[r].iter_mut().zip(&pivot).skip(col) {
                *v -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Brute-force LP oracle: every intersection of `dim` constraint hyperplanes,
/// filtered by feasibility. Returns `None` for an empty (bounded) polytope.
pub fn vertex_enumeration_max(objective: &[f64], poly: &Polytope) -> Option<f64> {
    let dim = poly.dim();
    let mut best: Option<f64> = None;
    for combo in combinations(poly.n_rows(), dim) {
        let a = combo.iter().map(|&i| poly.rows()[i].clone()).collect();
        let b = combo.iter().map(|&i| poly.rhs()[i]).collect();
        let Some(v) = solve_square(a, b) else { continue };
        if poly.max_violation(&v) <= 1e-9 {
            let val: f64 = objective.iter().zip(&v).map(|(c, x)| c * x).sum();
            best = Some(best.map_or(val, |b: f64| b.max(val)));
        }
    }
    best
}

/// Random bounded LP: box `[-1, 1]^dim` plus up to three random halfspaces.
pub fn random_lp(rng: &mut impl Rng) -> (Vec<f64>, Polytope) {
    let dim = rng.random_range(1..=4);
    let mut poly = Polytope::from_box(&vec![-1.0; dim], &vec![1.0; dim]).unwrap();
    for _ in 0..rng.random_range(0..=3) {
        let row = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        poly.push(row, rng.random_range(-1.0..1.0)).unwrap();
    }
    let c = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    (c, poly)
}

/// Central finite-difference gradient.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[i] += step;
            lo[i] -= step;
            (f(&hi) - f(&lo)) / (2.0 * step)
        })
        .collect()
}

/// Relative error with an absolute floor of one for tiny gradients.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1.0);
    diff / scale
}
