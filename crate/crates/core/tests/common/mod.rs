//! Shared test oracles and synthetic datasets. Everything here is
//! independent of the library's solver path: projections are brute-forced
//! by face enumeration and integrals by Gauss-Legendre quadrature.

#![allow(dead_code)]

use hullscope::pointset::PointSet;
use hullscope::rng::Rng;
use nalgebra::{DMatrix, DVector};
use std::path::Path;

/// Exact distance from `query` to the hull of `refs` by enumerating every
/// nonempty vertex subset, solving the equality-constrained least-squares
/// projection onto its affine span, and keeping it when the barycentric
/// coefficients are nonnegative. Intended for n <= ~12.
pub fn brute_force_hull_distance(refs: &PointSet, query: &[f64]) -> f64 {
    let n = refs.n();
    let d = refs.d();
    assert!(n <= 20, "oracle is exponential in n");
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = subset.len();
        let p0 = refs.row(subset[0]);
        let (x, feasible) = if k == 1 {
            (p0.to_vec(), true)
        } else {
            let mut b = DMatrix::zeros(d, k - 1);
            for (c, &idx) in subset[1..].iter().enumerate() {
                let pj = refs.row(idx);
                for r in 0..d {
                    b[(r, c)] = pj[r] - p0[r];
                }
            }
            let rhs = DVector::from_iterator(d, query.iter().zip(p0).map(|(q, p)| q - p));
            let svd = b.clone().svd(true, true);
            let cutoff = svd.singular_values.max() * 1e-12;
            let y = svd.solve(&rhs, cutoff).expect("svd solve");
            let alpha0 = 1.0 - y.iter().sum::<f64>();
            let feasible = alpha0 >= -1e-9 && y.iter().all(|&v| v >= -1e-9);
            let bx = &b * &y;
            let x: Vec<f64> = (0..d).map(|r| p0[r] + bx[r]).collect();
            (x, feasible)
        };
        if feasible {
            let dist = x
                .iter()
                .zip(query)
                .map(|(a, q)| (a - q) * (a - q))
                .sum::<f64>()
                .sqrt();
            best = best.min(dist);
        }
    }
    best
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration, with
/// its own local polynomial recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' at x
            let (mut p_prev, mut p) = (1.0, x);
            for k in 1..n {
                let next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
                p_prev = p;
                p = next;
            }
            let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p_prev, mut p) = (1.0, x);
        for k in 1..n {
            let next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
            p_prev = p;
            p = next;
        }
        let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Class-clustered synthetic image data: `classes` centers drawn uniformly
/// in [60, 195]^d, points = round(clip(center + sigma * N(0,1), 0, 255)).
/// Integer-valued so the IDX/CIFAR byte formats represent it exactly.
pub fn synth_images(n: usize, d: usize, classes: u32, sigma: f64, seed: u64) -> PointSet {
    let mut rng = Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..d).map(|_| rng.uniform(60.0, 195.0)).collect())
        .collect();
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = (i as u32) % classes;
        labels.push(c);
        for j in 0..d {
            let v = (centers[c as usize][j] + sigma * rng.normal()).clamp(0.0, 255.0);
            data.push(v.round());
        }
    }
    PointSet::new(data, n, d, Some(labels))
        .unwrap()
        .with_scale_hint(255.0)
}

/// Write a PointSet of integer pixel values as an IDX image file
/// (big-endian, magic 0x00000803).
pub fn write_idx_images(ps: &PointSet, rows: u32, cols: u32, path: &Path) {
    assert_eq!(ps.d(), (rows * cols) as usize);
    let mut bytes = Vec::with_capacity(16 + ps.n() * ps.d());
    bytes.extend_from_slice(&0x0000_0803u32.to_be_bytes());
    bytes.extend_from_slice(&(ps.n() as u32).to_be_bytes());
    bytes.extend_from_slice(&rows.to_be_bytes());
    bytes.extend_from_slice(&cols.to_be_bytes());
    for &v in ps.data() {
        bytes.push(v as u8);
    }
    std::fs::write(path, bytes).unwrap();
}

pub fn write_idx_labels(ps: &PointSet, path: &Path) {
    let labels = ps.labels().expect("labels required");
    let mut bytes = Vec::with_capacity(8 + labels.len());
    bytes.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    bytes.extend(labels.iter().map(|&l| l as u8));
    std::fs::write(path, bytes).unwrap();
}

/// Write a PointSet of integer pixel values (d = 3072) as a CIFAR-10
/// binary batch file.
pub fn write_cifar(ps: &PointSet, path: &Path) {
    assert_eq!(ps.d(), 3072);
    let labels = ps.labels().expect("labels required");
    let mut bytes = Vec::with_capacity(ps.n() * 3073);
    for (i, row) in ps.rows().enumerate() {
        bytes.push(labels[i] as u8);
        bytes.extend(row.iter().map(|&v| v as u8));
    }
    std::fs::write(path, bytes).unwrap();
}
