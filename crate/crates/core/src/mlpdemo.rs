//! Desk-scale reproduction of the over-parameterization experiment: small
//! tanh networks on 2-D two-class data, the exact 2-D hull of the training
//! points, and the inside/outside split of decision-boundary disagreement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Batch {
    Full,
    Size(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainRegime {
    pub seed: u64,
    pub steps: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch: Batch,
}

impl TrainRegime {
    pub fn new(seed: u64, steps: usize, learning_rate: f64) -> Self {
        TrainRegime { seed, steps, learning_rate, weight_decay: 0.0, batch: Batch::Full }
    }
}

/// Fully-connected net, tanh hidden activations, identity scalar output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// weights[l] is layer_sizes[l+1] x layer_sizes[l], row-major.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpModel {
    fn init(layer_sizes: &[usize], rng: &mut Rng) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_sizes.len() - 1 {
            let fan_in = layer_sizes[l];
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w = (0..layer_sizes[l + 1] * fan_in)
                .map(|_| rng.uniform(-bound, bound))
                .collect();
            let b = (0..layer_sizes[l + 1]).map(|_| rng.uniform(-bound, bound)).collect();
            weights.push(w);
            biases.push(b);
        }
        MlpModel { layer_sizes: layer_sizes.to_vec(), weights, biases }
    }

    /// Scalar output for one input.
    pub fn forward(&self, input: &[f64]) -> f64 {
        let layers = self.weights.len();
        let mut a = input.to_vec();
        for l in 0..layers {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let mut z = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut s = self.biases[l][o];
                for (w, x) in row.iter().zip(&a) {
                    s += w * x;
                }
                z[o] = if l + 1 < layers { s.tanh() } else { s };
            }
            a = z;
        }
        a[0]
    }

    pub fn sign_at(&self, input: &[f64]) -> i8 {
        if self.forward(input) >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Mean squared error of the scalar output against +-1 targets over the
/// given sample indices, plus the parameter gradients (including weight
/// decay on the weights).
pub fn loss_and_grad(
    model: &MlpModel,
    points: &PointSet,
    targets: &[f64],
    indices: &[usize],
    weight_decay: f64,
) -> (f64, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let layers = model.weights.len();
    let mut gw: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut gb: Vec<Vec<f64>> = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let m = indices.len() as f64;
    let mut loss = 0.0;

    for &idx in indices {
        let input = points.row(idx);
        // forward, keeping activations
        let mut acts: Vec<Vec<f64>> = vec![input.to_vec()];
        for l in 0..layers {
            let (n_in, n_out) = (model.layer_sizes[l], model.layer_sizes[l + 1]);
            let prev = &acts[l];
            let mut z = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &model.weights[l][o * n_in..(o + 1) * n_in];
                let mut s = model.biases[l][o];
                for (w, x) in row.iter().zip(prev) {
                    s += w * x;
                }
                z[o] = if l + 1 < layers { s.tanh() } else { s };
            }
            acts.push(z);
        }
        let out = acts[layers][0];
        let err = out - targets[idx];
        loss += err * err / m;

        // backward
        let mut delta = vec![2.0 * err / m];
        for l in (0..layers).rev() {
            let (n_in, n_out) = (model.layer_sizes[l], model.layer_sizes[l + 1]);
            let prev = &acts[l];
            for o in 0..n_out {
                gb[l][o] += delta[o];
                let grow = &mut gw[l][o * n_in..(o + 1) * n_in];
                for (gv, x) in grow.iter_mut().zip(prev) {
                    *gv += delta[o] * x;
                }
            }
            if l > 0 {
                let mut next = vec![0.0; n_in];
                for o in 0..n_out {
                    let row = &model.weights[l][o * n_in..(o + 1) * n_in];
                    for (nv, w) in next.iter_mut().zip(row) {
                        *nv += delta[o] * w;
                    }
                }
                // tanh'(z) = 1 - a^2 through the stored activation
                for (nv, a) in next.iter_mut().zip(prev) {
                    *nv *= 1.0 - a * a;
                }
                delta = next;
            }
        }
    }

    if weight_decay > 0.0 {
        for l in 0..layers {
            for (g, w) in gw[l].iter_mut().zip(&model.weights[l]) {
                *g += weight_decay * w;
            }
            for w in &model.weights[l] {
                loss += 0.5 * weight_decay * w * w;
            }
        }
    }
    (loss, gw, gb)
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
    pub final_loss: f64,
    pub train_sign_accuracy: f64,
}

/// Plain gradient descent on MSE against +-1 targets; deterministic given
/// the regime seed.
pub fn train_mlp(
    points: &PointSet,
    targets: &[f64],
    arch: &[usize],
    regime: &TrainRegime,
) -> Result<(MlpModel, TrainReport)> {
    if points.d() != arch.first().copied().unwrap_or(0) {
        return Err(Error::argument(format!(
            "input width {} does not match data dimension {}",
            arch.first().copied().unwrap_or(0),
            points.d()
        )));
    }
    if arch.len() < 2 || *arch.last().unwrap() != 1 {
        return Err(Error::argument("architecture must end in an output width of 1"));
    }
    if targets.len() != points.n() {
        return Err(Error::argument("target count does not match point count"));
    }
    if !targets.iter().all(|&t| t == 1.0 || t == -1.0) {
        return Err(Error::argument("targets must be +1 or -1"));
    }
    if regime.steps < 1 || !(regime.learning_rate > 0.0) || regime.weight_decay < 0.0 {
        return Err(Error::argument("bad training regime"));
    }

    let mut rng = Rng::seed_from_u64(regime.seed);
    let mut model = MlpModel::init(arch, &mut rng);
    let all: Vec<usize> = (0..points.n()).collect();
    let mut cursor = 0usize;
    let mut loss_trace = Vec::with_capacity(regime.steps);

    for step in 0..regime.steps {
        let batch: Vec<usize> = match regime.batch {
            Batch::Full => all.clone(),
            Batch::Size(s) => {
                let s = s.max(1).min(points.n());
                let b = (0..s).map(|i| (cursor + i) % points.n()).collect();
                cursor = (cursor + s) % points.n();
                b
            }
        };
        let (loss, gw, gb) = loss_and_grad(&model, points, targets, &batch, regime.weight_decay);
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { step, loss });
        }
        loss_trace.push(loss);
        for l in 0..model.weights.len() {
            for (w, g) in model.weights[l].iter_mut().zip(&gw[l]) {
                *w -= regime.learning_rate * g;
            }
            for (b, g) in model.biases[l].iter_mut().zip(&gb[l]) {
                *b -= regime.learning_rate * g;
            }
        }
    }

    let (final_loss, _, _) = loss_and_grad(&model, points, targets, &all, 0.0);
    if !final_loss.is_finite() {
        return Err(Error::TrainingDiverged { step: regime.steps, loss: final_loss });
    }
    let correct = all
        .iter()
        .filter(|&&i| f64::from(model.sign_at(points.row(i))) == targets[i])
        .count();
    let report = TrainReport {
        loss_trace,
        final_loss,
        train_sign_accuracy: correct as f64 / points.n() as f64,
    };
    Ok((model, report))
}

/// Convex polygon, counter-clockwise vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polygon2D {
    pub vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew monotone chain; collinear boundary points excluded.
pub fn hull2d(points: &[[f64; 2]]) -> Result<Polygon2D> {
    if points.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    Ok(Polygon2D { vertices: lower })
}

/// Inside-or-on-boundary test (half planes, tolerance 1e-12 scaled by the
/// polygon's extent).
pub fn point_in_polygon(poly: &Polygon2D, p: [f64; 2]) -> bool {
    let scale = poly
        .vertices
        .iter()
        .map(|v| v[0].abs().max(v[1].abs()))
        .fold(1.0, f64::max);
    let tol = 1e-12 * scale * scale;
    let n = poly.vertices.len();
    (0..n).all(|i| cross(poly.vertices[i], poly.vertices[(i + 1) % n], p) >= -tol)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    /// Hull bounding box blown up by `factor`, centered.
    pub fn around(poly: &Polygon2D, factor: f64) -> Bounds {
        let xs: Vec<f64> = poly.vertices.iter().map(|v| v[0]).collect();
        let ys: Vec<f64> = poly.vertices.iter().map(|v| v[1]).collect();
        let (xmin, xmax) = (
            xs.iter().copied().fold(f64::INFINITY, f64::min),
            xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        let (ymin, ymax) = (
            ys.iter().copied().fold(f64::INFINITY, f64::min),
            ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        let (cx, cy) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
        let (hx, hy) = (0.5 * factor * (xmax - xmin), 0.5 * factor * (ymax - ymin));
        Bounds { xmin: cx - hx, xmax: cx + hx, ymin: cy - hy, ymax: cy + hy }
    }

    pub fn node(&self, i: usize, j: usize, resolution: usize) -> [f64; 2] {
        let fx = j as f64 / (resolution - 1) as f64;
        let fy = i as f64 / (resolution - 1) as f64;
        [
            self.xmin + fx * (self.xmax - self.xmin),
            self.ymin + fy * (self.ymax - self.ymin),
        ]
    }
}

/// Sign of the network output at each node of a resolution x resolution
/// grid, row-major (ties at exactly zero report +1).
pub fn eval_grid(model: &MlpModel, bounds: Bounds, resolution: usize) -> Result<Vec<i8>> {
    if resolution < 2 {
        return Err(Error::argument("resolution must be >= 2"));
    }
    let mut grid = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let p = bounds.node(i, j, resolution);
            grid.push(model.sign_at(&p));
        }
    }
    Ok(grid)
}

/// Fractions of grid nodes where the two sign grids differ, split into
/// nodes inside the polygon and nodes outside it.
pub fn disagreement_split(
    grid_a: &[i8],
    grid_b: &[i8],
    poly: &Polygon2D,
    bounds: Bounds,
    resolution: usize,
) -> Result<(f64, f64)> {
    if grid_a.len() != grid_b.len() || grid_a.len() != resolution * resolution {
        return Err(Error::argument("grid shapes do not match"));
    }
    let (mut in_total, mut in_diff, mut out_total, mut out_diff) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..resolution {
        for j in 0..resolution {
            let idx = i * resolution + j;
            let differs = grid_a[idx] != grid_b[idx];
            if point_in_polygon(poly, bounds.node(i, j, resolution)) {
                in_total += 1;
                in_diff += u64::from(differs);
            } else {
                out_total += 1;
                out_diff += u64::from(differs);
            }
        }
    }
    let frac = |diff: u64, total: u64| if total == 0 { 0.0 } else { diff as f64 / total as f64 };
    Ok((frac(in_diff, in_total), frac(out_diff, out_total)))
}

/// The standard demo dataset: two interleaved half-moon clusters, 40 points,
/// labels +1/-1, closed form (no randomness).
pub fn demo_dataset() -> (PointSet, Vec<f64>) {
    let per_class = 20;
    let mut data = Vec::with_capacity(per_class * 2 * 2);
    let mut targets = Vec::with_capacity(per_class * 2);
    for k in 0..per_class {
        let t = std::f64::consts::PI * k as f64 / (per_class - 1) as f64;
        data.push(t.cos());
        data.push(t.sin());
        targets.push(1.0);
    }
    for k in 0..per_class {
        let t = std::f64::consts::PI * k as f64 / (per_class - 1) as f64;
        data.push(1.0 - t.cos());
        data.push(0.5 - t.sin());
        targets.push(-1.0);
    }
    let ps = PointSet::new(data, per_class * 2, 2, None).unwrap();
    (ps, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_center() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let hull = hull2d(&pts).unwrap();
        assert_eq!(hull.vertices.len(), 4);
        assert!(!hull.vertices.contains(&[0.5, 0.5]));
        // CCW: all consecutive cross products positive
        let n = hull.vertices.len();
        for i in 0..n {
            let c = cross(hull.vertices[i], hull.vertices[(i + 1) % n], hull.vertices[(i + 2) % n]);
            assert!(c > 0.0);
        }
    }

    #[test]
    fn hull_of_triangle_and_degenerate() {
        let tri = [[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]];
        assert_eq!(hull2d(&tri).unwrap().vertices.len(), 3);
        let line = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert!(matches!(hull2d(&line), Err(Error::DegenerateHull)));
    }

    #[test]
    fn hull_contains_all_inputs() {
        let mut rng = Rng::seed_from_u64(12);
        let pts: Vec<[f64; 2]> = (0..100)
            .map(|_| [rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)])
            .collect();
        let hull = hull2d(&pts).unwrap();
        for &p in &pts {
            assert!(point_in_polygon(&hull, p), "{p:?} outside its own hull");
        }
    }

    #[test]
    fn point_in_polygon_cases() {
        let square = Polygon2D {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        assert!(point_in_polygon(&square, [0.5, 0.5]));
        assert!(!point_in_polygon(&square, [2.0, 2.0]));
        assert!(point_in_polygon(&square, [0.0, 0.0])); // boundary inclusive
    }

    #[test]
    fn training_is_deterministic() {
        let (ps, targets) = demo_dataset();
        let regime = TrainRegime::new(3, 50, 0.05);
        let (a, _) = train_mlp(&ps, &targets, &[2, 8, 1], &regime).unwrap();
        let (b, _) = train_mlp(&ps, &targets, &[2, 8, 1], &regime).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.biases, b.biases);
    }

    #[test]
    fn separable_data_trains_to_perfect_accuracy() {
        let data = vec![-1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0];
        let ps = PointSet::new(data, 4, 2, None).unwrap();
        let targets = vec![-1.0, -1.0, 1.0, 1.0];
        let regime = TrainRegime::new(0, 5000, 0.05);
        let (_, report) = train_mlp(&ps, &targets, &[2, 16, 1], &regime).unwrap();
        assert_eq!(report.train_sign_accuracy, 1.0);
    }

    #[test]
    fn huge_learning_rate_diverges_or_fails() {
        let data = vec![-1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0];
        let ps = PointSet::new(data, 4, 2, None).unwrap();
        let targets = vec![-1.0, -1.0, 1.0, 1.0];
        let mut regime = TrainRegime::new(0, 5000, 1e3);
        regime.steps = 2000;
        match train_mlp(&ps, &targets, &[2, 16, 1], &regime) {
            Err(Error::TrainingDiverged { .. }) => {}
            Ok((_, report)) => assert!(report.train_sign_accuracy < 1.0, "silent success"),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::seed_from_u64(77);
        let data: Vec<f64> = (0..12).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let ps = PointSet::new(data, 6, 2, None).unwrap();
        let targets: Vec<f64> = (0..6).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let mut model = MlpModel::init(&[2, 5, 3, 1], &mut rng);
        let all: Vec<usize> = (0..6).collect();
        let wd = 0.01;
        let (_, gw, gb) = loss_and_grad(&model, &ps, &targets, &all, wd);
        let h = 1e-5;
        for l in 0..model.weights.len() {
            for k in 0..model.weights[l].len() {
                let orig = model.weights[l][k];
                model.weights[l][k] = orig + h;
                let (lp, _, _) = loss_and_grad(&model, &ps, &targets, &all, wd);
                model.weights[l][k] = orig - h;
                let (lm, _, _) = loss_and_grad(&model, &ps, &targets, &all, wd);
                model.weights[l][k] = orig;
                let fd = (lp - lm) / (2.0 * h);
                let g = gw[l][k];
                assert!(
                    (fd - g).abs() <= 1e-6 * (1.0 + fd.abs().max(g.abs())),
                    "w[{l}][{k}]: analytic {g} vs fd {fd}"
                );
            }
            for k in 0..model.biases[l].len() {
                let orig = model.biases[l][k];
                model.biases[l][k] = orig + h;
                let (lp, _, _) = loss_and_grad(&model, &ps, &targets, &all, wd);
                model.biases[l][k] = orig - h;
                let (lm, _, _) = loss_and_grad(&model, &ps, &targets, &all, wd);
                model.biases[l][k] = orig;
                let fd = (lp - lm) / (2.0 * h);
                let g = gb[l][k];
                assert!(
                    (fd - g).abs() <= 1e-6 * (1.0 + fd.abs().max(g.abs())),
                    "b[{l}][{k}]: analytic {g} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn zero_weight_grid_follows_bias_sign() {
        let mut model = MlpModel {
            layer_sizes: vec![2, 3, 1],
            weights: vec![vec![0.0; 6], vec![0.0; 3]],
            biases: vec![vec![0.0; 3], vec![0.0]],
        };
        let bounds = Bounds { xmin: -1.0, xmax: 1.0, ymin: -1.0, ymax: 1.0 };
        let grid = eval_grid(&model, bounds, 5).unwrap();
        assert_eq!(grid.len(), 25);
        assert!(grid.iter().all(|&s| s == 1)); // output exactly 0 reports +1
        model.biases[1][0] = -0.5;
        let grid = eval_grid(&model, bounds, 5).unwrap();
        assert!(grid.iter().all(|&s| s == -1));
    }

    #[test]
    fn output_sign_flip_flips_grid() {
        let (ps, targets) = demo_dataset();
        let regime = TrainRegime::new(1, 200, 0.05);
        let (mut model, _) = train_mlp(&ps, &targets, &[2, 8, 1], &regime).unwrap();
        let hull = hull2d(
            &ps.rows().map(|r| [r[0], r[1]]).collect::<Vec<_>>(),
        )
        .unwrap();
        let bounds = Bounds::around(&hull, 3.0);
        let grid = eval_grid(&model, bounds, 21).unwrap();
        model.weights.last_mut().unwrap().iter_mut().for_each(|w| *w = -*w);
        model.biases.last_mut().unwrap().iter_mut().for_each(|b| *b = -*b);
        let flipped = eval_grid(&model, bounds, 21).unwrap();
        // ties at exactly zero break the antisymmetry; none occur here
        for (a, b) in grid.iter().zip(&flipped) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn disagreement_trivial_cases() {
        let square = Polygon2D {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        let bounds = Bounds { xmin: -1.0, xmax: 2.0, ymin: -1.0, ymax: 2.0 };
        let a = vec![1i8; 100];
        let (i, o) = disagreement_split(&a, &a, &square, bounds, 10).unwrap();
        assert_eq!((i, o), (0.0, 0.0));
        let b = vec![-1i8; 100];
        let (i, o) = disagreement_split(&a, &b, &square, bounds, 10).unwrap();
        assert_eq!((i, o), (1.0, 1.0));
        assert!(disagreement_split(&a, &b[..50], &square, bounds, 10).is_err());
    }
}
