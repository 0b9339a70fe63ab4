//! Polynomial decision boundaries in the Legendre basis: under- vs
//! over-parameterized fits, and training regimes (minimum norm, ridge,
//! anchored) that resolve the freedom an over-parameterized fit leaves
//! outside the data's hull.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value cutoff for the min-norm solve.
const RANK_CUTOFF: f64 = 1e-12;

/// P_i(x) by the Bonnet recurrence.
pub fn legendre_eval(i: usize, x: f64) -> f64 {
    match i {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for k in 1..i {
                let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// |xs| x (degree+1) design matrix, entry (j, i) = P_i(xs[j]).
pub fn basis_matrix(degree: usize, xs: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(xs.len(), degree + 1);
    for (j, &x) in xs.iter().enumerate() {
        let mut prev = 1.0;
        let mut cur = x;
        m[(j, 0)] = 1.0;
        if degree >= 1 {
            m[(j, 1)] = x;
        }
        for i in 2..=degree {
            let k = i - 1;
            let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / i as f64;
            prev = cur;
            cur = next;
            m[(j, i)] = next;
        }
    }
    m
}

/// A point outside the training interval with a requested sign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Anchor {
    pub x: f64,
    /// Requested sign, +1 or -1.
    pub target: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FitRegime {
    /// Minimum-coefficient-norm least squares.
    MinNorm,
    Ridge { lambda: f64 },
    /// Min-norm resolution after augmenting weighted anchor rows.
    Anchored { anchors: Vec<Anchor> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LegendreModel {
    pub degree: usize,
    /// c_i multiplying P_i, over the rescaled abscissa.
    pub coeffs: Vec<f64>,
    pub regime: FitRegime,
    /// Affine map u = (x - offset) / halfwidth sending the training
    /// abscissae onto [-1, 1], the natural Legendre domain.
    pub offset: f64,
    pub halfwidth: f64,
}

impl LegendreModel {
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.offset) / self.halfwidth;
        let mut sum = self.coeffs[0];
        if self.coeffs.len() == 1 {
            return sum;
        }
        let mut prev = 1.0;
        let mut cur = u;
        sum += self.coeffs[1] * cur;
        for i in 2..self.coeffs.len() {
            let k = i - 1;
            let next = ((2 * k + 1) as f64 * u * cur - k as f64 * prev) / i as f64;
            prev = cur;
            cur = next;
            sum += self.coeffs[i] * next;
        }
        sum
    }

    pub fn sign_at(&self, x: f64) -> i8 {
        if self.eval(x) >= 0.0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: LegendreModel,
    /// Fraction of training points whose sign the model matches.
    pub train_sign_accuracy: f64,
}

fn min_norm_solve(b: &DMatrix<f64>, y: &DVector<f64>) -> Vec<f64> {
    let svd = b.clone().svd(true, true);
    let cutoff = svd.singular_values.max() * RANK_CUTOFF;
    let c = svd.solve(y, cutoff).expect("svd solve");
    c.iter().copied().collect()
}

/// Least-squares fit of sign targets over the Legendre basis.
pub fn fit_boundary(
    xs: &[f64],
    labels: &[f64],
    degree: usize,
    regime: FitRegime,
) -> Result<FitOutcome> {
    if xs.is_empty() || xs.len() != labels.len() {
        return Err(Error::argument("need equally many abscissae and labels, at least one"));
    }
    if !xs.iter().all(|v| v.is_finite()) {
        return Err(Error::argument("NaN or infinite abscissa"));
    }
    if !labels.iter().all(|&l| l == 1.0 || l == -1.0) {
        return Err(Error::argument("labels must be +1 or -1"));
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let offset = 0.5 * (lo + hi);
    let halfwidth = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let us: Vec<f64> = xs.iter().map(|x| (x - offset) / halfwidth).collect();
    let b = basis_matrix(degree, &us);
    let y = DVector::from_column_slice(labels);

    let coeffs = match &regime {
        FitRegime::MinNorm => min_norm_solve(&b, &y),
        FitRegime::Ridge { lambda } => {
            if !(*lambda > 0.0) {
                return Err(Error::argument("ridge lambda must be > 0"));
            }
            let bt = b.transpose();
            let mut normal = &bt * &b;
            for i in 0..normal.nrows() {
                normal[(i, i)] += lambda;
            }
            let rhs = &bt * &y;
            let chol = normal
                .cholesky()
                .ok_or_else(|| Error::argument("ridge normal system not positive definite"))?;
            chol.solve(&rhs).iter().copied().collect()
        }
        FitRegime::Anchored { anchors } => {
            if anchors.is_empty() {
                return Err(Error::argument("anchored regime needs at least one anchor"));
            }
            let mut rows = Vec::new();
            let mut targets: Vec<f64> = labels.to_vec();
            for a in anchors {
                if !(a.target == 1.0 || a.target == -1.0) {
                    return Err(Error::argument("anchor target must be +1 or -1"));
                }
                if !(a.weight > 0.0) {
                    return Err(Error::argument("anchor weight must be > 0"));
                }
                let u = (a.x - offset) / halfwidth;
                if u.abs() <= 1.0 {
                    return Err(Error::argument(format!(
                        "anchor at x = {} lies inside the training hull [{lo}, {hi}]",
                        a.x
                    )));
                }
                rows.push((u, a.target, a.weight));
            }
            let mut aug = DMatrix::zeros(b.nrows() + rows.len(), degree + 1);
            aug.rows_mut(0, b.nrows()).copy_from(&b);
            for (r, (u, target, weight)) in rows.iter().enumerate() {
                let anchor_row = basis_matrix(degree, &[*u]);
                for i in 0..=degree {
                    aug[(b.nrows() + r, i)] = weight * anchor_row[(0, i)];
                }
                targets.push(weight * target);
            }
            let ty = DVector::from_vec(targets);
            min_norm_solve(&aug, &ty)
        }
    };

    let model = LegendreModel { degree, coeffs, regime, offset, halfwidth };
    let correct = xs
        .iter()
        .zip(labels)
        .filter(|(x, l)| f64::from(model.sign_at(**x)) == **l)
        .count();
    let train_sign_accuracy = correct as f64 / xs.len() as f64;
    Ok(FitOutcome { model, train_sign_accuracy })
}

#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub signs: Vec<i8>,
    /// Grid midpoints where the sign flips.
    pub sign_changes: Vec<f64>,
}

/// Sample the boundary on a uniform grid over [a, b].
pub fn extrapolation_profile(model: &LegendreModel, interval: (f64, f64), resolution: usize) -> Result<Profile> {
    let (a, b) = interval;
    if !(a < b) {
        return Err(Error::argument("need a < b"));
    }
    if resolution < 2 {
        return Err(Error::argument("resolution must be >= 2"));
    }
    let step = (b - a) / (resolution - 1) as f64;
    let xs: Vec<f64> = (0..resolution).map(|i| a + i as f64 * step).collect();
    let values: Vec<f64> = xs.iter().map(|&x| model.eval(x)).collect();
    let signs: Vec<i8> = values.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
    let sign_changes = signs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| 0.5 * (xs[i] + xs[i + 1]))
        .collect();
    Ok(Profile { xs, values, signs, sign_changes })
}
