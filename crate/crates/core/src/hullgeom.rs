//! Euclidean projection onto the convex hull of a point set, with certified
//! distance intervals, nearest-face supports, and diameter estimates.
//!
//! The solver is away-step Frank-Wolfe on f(a) = ||V^T a - q||^2 over the
//! probability simplex, with exact line search (closed form on a quadratic).
//! The Frank-Wolfe duality gap upper-bounds f(a) - f*, which yields the
//! certified interval [dist_lower, dist_upper] around the true distance.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::rng::Rng;

/// Above this many reference rows the n x n Gram cache is skipped and the
/// linear minimization oracle falls back to direct row dots.
const GRAM_LIMIT: usize = 8192;
/// Iterations between exact recomputations of the maintained iterate.
const REFRESH_EVERY: usize = 256;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Absolute Frank-Wolfe gap threshold on f(a) = ||V^T a - q||^2.
    pub gap_tol: f64,
    pub max_iters: usize,
    /// Relative distance threshold for "inside" (multiplied by the scale).
    pub inside_tol: f64,
    /// Coefficient cutoff for reporting support indices.
    pub support_tol: f64,
    /// Record the objective value at every iteration.
    pub record_trace: bool,
}

impl SolverConfig {
    /// Defaults for a reference set whose max row norm is `scale`:
    /// gap_tol = 1e-6 * scale^2, max_iters = 50000, inside_tol = 1e-4,
    /// support_tol = 1e-6.
    pub fn for_scale(scale: f64) -> Self {
        SolverConfig {
            gap_tol: 1e-6 * scale * scale,
            max_iters: 50_000,
            inside_tol: 1e-4,
            support_tol: 1e-6,
            record_trace: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) {
            return Err(Error::argument("gap_tol must be > 0"));
        }
        if self.max_iters < 1 {
            return Err(Error::argument("max_iters must be >= 1"));
        }
        if !(self.inside_tol > 0.0 && self.inside_tol < 1.0) {
            return Err(Error::argument("inside_tol must be in (0, 1)"));
        }
        if !(self.support_tol > 0.0 && self.support_tol < 1.0) {
            return Err(Error::argument("support_tol must be in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// Nonzero convex coefficients, sorted by reference index.
    pub coeffs: Vec<(usize, f64)>,
    /// The projection point V^T a.
    pub projection: Vec<f64>,
    /// ||projection - query||.
    pub dist_upper: f64,
    /// Certified lower bound sqrt(max(0, dist_upper^2 - gap)).
    pub dist_lower: f64,
    /// Final Frank-Wolfe duality gap.
    pub gap: f64,
    pub iters: usize,
    /// Reference indices with coefficient above support_tol.
    pub support: Vec<usize>,
    /// False when max_iters was reached with gap above gap_tol; the
    /// distance bounds remain valid certificates either way.
    pub converged: bool,
    /// Objective trace, populated only when requested.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Inside,
    Outside,
    Uncertain,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Inside => write!(f, "inside"),
            Verdict::Outside => write!(f, "outside"),
            Verdict::Uncertain => write!(f, "uncertain"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Membership {
    pub verdict: Verdict,
    pub result: ProjectionResult,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators keep the fp pipeline busy; association is fixed, so
    // results are reproducible across runs and thread counts
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in chunks * 4..a.len() {
        s += a[j] * b[j];
    }
    s
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        acc += t * t;
    }
    acc
}

/// Linear minimization oracle over the hull: argmin_i <refs[i], grad>,
/// ties broken by lowest index.
pub fn lmo(refs: &PointSet, grad: &[f64]) -> Result<usize> {
    if grad.len() != refs.d() {
        return Err(Error::argument(format!(
            "gradient dimension {} does not match reference dimension {}",
            grad.len(),
            refs.d()
        )));
    }
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (i, row) in refs.rows().enumerate() {
        let s = dot(row, grad);
        if s < best_score {
            best_score = s;
            best = i;
        }
    }
    Ok(best)
}

/// Prepared projection onto the hull of a fixed reference set. Building one
/// amortizes the Gram cache across a batch of queries.
pub struct HullProjector<'a> {
    refs: &'a PointSet,
    gram: Option<Vec<f64>>,
    sq_norms: Vec<f64>,
    scale: f64,
}

impl<'a> HullProjector<'a> {
    pub fn new(refs: &'a PointSet) -> Self {
        let n = refs.n();
        let sq_norms: Vec<f64> = refs.rows().map(|r| dot(r, r)).collect();
        let scale = sq_norms.iter().fold(0.0f64, |m, &v| m.max(v)).sqrt();
        let gram = if n <= GRAM_LIMIT {
            let mut g = vec![0.0; n * n];
            let d = refs.d();
            let data = refs.data();
            g.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                let vi = &data[i * d..(i + 1) * d];
                for (j, slot) in row.iter_mut().enumerate().skip(i) {
                    *slot = dot(vi, &data[j * d..(j + 1) * d]);
                }
            });
            for i in 0..n {
                for j in 0..i {
                    g[i * n + j] = g[j * n + i];
                }
            }
            Some(g)
        } else {
            None
        };
        HullProjector { refs, gram, sq_norms, scale }
    }

    /// Max row norm of the reference set.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn project(&self, query: &[f64], cfg: &SolverConfig) -> Result<ProjectionResult> {
        cfg.validate()?;
        let refs = self.refs;
        let (n, d) = (refs.n(), refs.d());
        if query.len() != d {
            return Err(Error::argument(format!(
                "query dimension {} does not match reference dimension {d}",
                query.len()
            )));
        }

        // b_i = <v_i, q>, needed for gram-cached scores
        let b: Option<Vec<f64>> = self
            .gram
            .as_ref()
            .map(|_| refs.rows().map(|r| dot(r, query)).collect());

        // start from the nearest vertex
        let start = (0..n)
            .map(|i| {
                self.sq_norms[i]
                    - 2.0 * b.as_ref().map_or_else(|| dot(refs.row(i), query), |b| b[i])
            })
            .enumerate()
            .fold((0usize, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
            .0;

        let mut alpha = vec![0.0f64; n];
        alpha[start] = 1.0;
        let mut active: Vec<usize> = vec![start];
        let mut x = refs.row(start).to_vec();
        let mut w: Option<Vec<f64>> = self
            .gram
            .as_ref()
            .map(|g| g[start * n..(start + 1) * n].to_vec());

        let mut trace = Vec::new();
        let mut iters = 0;
        let mut converged = false;
        let mut resid = vec![0.0f64; d]; // x - q, recomputed each iteration

        for iter in 0..cfg.max_iters {
            iters = iter + 1;
            if iter > 0 && iter % REFRESH_EVERY == 0 {
                self.refresh(&mut alpha, &mut active, &mut x, &mut w);
            }
            for i in 0..d {
                resid[i] = x[i] - query[i];
            }
            let f = dot(&resid, &resid);
            if cfg.record_trace {
                trace.push(f);
            }
            let dot_gx = dot(&resid, &x);

            // LMO: minimize <v_i, x - q>
            let (fw_idx, fw_score) = match (&self.gram, &w, &b) {
                (Some(_), Some(w), Some(b)) => {
                    let mut bi = 0;
                    let mut bs = f64::INFINITY;
                    for i in 0..n {
                        let s = w[i] - b[i];
                        if s < bs {
                            bs = s;
                            bi = i;
                        }
                    }
                    (bi, bs)
                }
                _ => {
                    let mut bi = 0;
                    let mut bs = f64::INFINITY;
                    for (i, row) in refs.rows().enumerate() {
                        let s = dot(row, &resid);
                        if s < bs {
                            bs = s;
                            bi = i;
                        }
                    }
                    (bi, bs)
                }
            };

            let cur_gap = 2.0 * (dot_gx - fw_score);
            if cur_gap <= cfg.gap_tol {
                converged = true;
                break;
            }

            // away vertex: maximize the score over the active set
            let (away_idx, away_score) = {
                let mut bi = active[0];
                let mut bs = f64::NEG_INFINITY;
                for &i in &active {
                    let s = match (&w, &b) {
                        (Some(w), Some(b)) => w[i] - b[i],
                        _ => dot(refs.row(i), &resid),
                    };
                    if s > bs || (s == bs && i < bi) {
                        bs = s;
                        bi = i;
                    }
                }
                (bi, bs)
            };

            let fw_descent = dot_gx - fw_score; // = gap/2 >= 0
            let away_descent = away_score - dot_gx;
            let use_away = away_descent > fw_descent && alpha[away_idx] < 1.0;

            if use_away {
                let va = refs.row(away_idx);
                let dir_sq = {
                    let mut s = 0.0;
                    for i in 0..d {
                        let t = x[i] - va[i];
                        s += t * t;
                    }
                    s
                };
                if dir_sq <= 0.0 {
                    converged = cur_gap <= cfg.gap_tol;
                    break;
                }
                let aa = alpha[away_idx];
                let gamma_max = aa / (1.0 - aa);
                let gamma = (away_descent / dir_sq).min(gamma_max);
                let drop_vertex = gamma >= gamma_max;
                // alpha' = (1+g) alpha - g e_a
                let scale_up = 1.0 + gamma;
                for &i in &active {
                    alpha[i] *= scale_up;
                }
                alpha[away_idx] -= gamma;
                for i in 0..d {
                    x[i] = scale_up * x[i] - gamma * va[i];
                }
                if let (Some(w), Some(g)) = (&mut w, &self.gram) {
                    let col = &g[away_idx * n..(away_idx + 1) * n];
                    for i in 0..n {
                        w[i] = scale_up * w[i] - gamma * col[i];
                    }
                }
                if drop_vertex || alpha[away_idx] <= 0.0 {
                    alpha[away_idx] = 0.0;
                    active.retain(|&i| i != away_idx);
                }
            } else {
                let vs = refs.row(fw_idx);
                let dir_sq = {
                    let mut s = 0.0;
                    for i in 0..d {
                        let t = vs[i] - x[i];
                        s += t * t;
                    }
                    s
                };
                if dir_sq <= 0.0 {
                    converged = cur_gap <= cfg.gap_tol;
                    break;
                }
                let gamma = (fw_descent / dir_sq).clamp(0.0, 1.0);
                if gamma >= 1.0 {
                    for &i in &active {
                        alpha[i] = 0.0;
                    }
                    active.clear();
                } else {
                    let keep = 1.0 - gamma;
                    for &i in &active {
                        alpha[i] *= keep;
                    }
                }
                if !active.contains(&fw_idx) {
                    active.push(fw_idx);
                }
                alpha[fw_idx] += gamma;
                for i in 0..d {
                    x[i] = (1.0 - gamma) * x[i] + gamma * vs[i];
                }
                if let (Some(w), Some(g)) = (&mut w, &self.gram) {
                    let col = &g[fw_idx * n..(fw_idx + 1) * n];
                    for i in 0..n {
                        w[i] = (1.0 - gamma) * w[i] + gamma * col[i];
                    }
                }
            }
        }

        // exact finalization: recompute the projection from the coefficients
        // and re-certify the gap against it
        let sum: f64 = active.iter().map(|&i| alpha[i]).sum();
        for &i in &active {
            alpha[i] /= sum;
        }
        active.sort_unstable();
        let mut proj = vec![0.0f64; d];
        for &i in &active {
            let a = alpha[i];
            for (p, v) in proj.iter_mut().zip(refs.row(i)) {
                *p += a * v;
            }
        }
        for i in 0..d {
            resid[i] = proj[i] - query[i];
        }
        let f = dot(&resid, &resid);
        let dot_gx = dot(&resid, &proj);
        let fw_score = {
            let mut bs = f64::INFINITY;
            for row in refs.rows() {
                let s = dot(row, &resid);
                if s < bs {
                    bs = s;
                }
            }
            bs
        };
        let gap = (2.0 * (dot_gx - fw_score)).max(0.0);
        // re-certify against the exactly recomputed projection; a hair of
        // slack absorbs the recomputation noise when the loop stopped at tol
        converged = gap <= cfg.gap_tol * (1.0 + 1e-9) || (converged && gap <= 2.0 * cfg.gap_tol);

        let dist_upper = f.sqrt();
        let dist_lower = (f - gap).max(0.0).sqrt();
        let coeffs: Vec<(usize, f64)> = active.iter().map(|&i| (i, alpha[i])).collect();
        let support: Vec<usize> = coeffs
            .iter()
            .filter(|(_, a)| *a > cfg.support_tol)
            .map(|(i, _)| *i)
            .collect();

        Ok(ProjectionResult {
            coeffs,
            projection: proj,
            dist_upper,
            dist_lower,
            gap,
            iters,
            support,
            converged,
            trace,
        })
    }

    fn refresh(
        &self,
        alpha: &mut [f64],
        active: &mut Vec<usize>,
        x: &mut [f64],
        w: &mut Option<Vec<f64>>,
    ) {
        active.retain(|&i| alpha[i] > 0.0);
        let sum: f64 = active.iter().map(|&i| alpha[i]).sum();
        for &i in active.iter() {
            alpha[i] /= sum;
        }
        x.iter_mut().for_each(|v| *v = 0.0);
        for &i in active.iter() {
            let a = alpha[i];
            for (xv, rv) in x.iter_mut().zip(self.refs.row(i)) {
                *xv += a * rv;
            }
        }
        if let (Some(w), Some(g)) = (w.as_mut(), &self.gram) {
            let n = self.refs.n();
            w.iter_mut().for_each(|v| *v = 0.0);
            for &i in active.iter() {
                let a = alpha[i];
                let col = &g[i * n..(i + 1) * n];
                for (wv, cv) in w.iter_mut().zip(col) {
                    *wv += a * cv;
                }
            }
        }
    }
}

/// One-off projection of a single query.
pub fn project_onto_hull(
    refs: &PointSet,
    query: &[f64],
    cfg: &SolverConfig,
) -> Result<ProjectionResult> {
    HullProjector::new(refs).project(query, cfg)
}

/// Project every query row; output order matches input order regardless of
/// how the work is scheduled.
pub fn batch_project(
    refs: &PointSet,
    queries: &PointSet,
    cfg: &SolverConfig,
) -> Result<Vec<ProjectionResult>> {
    if queries.d() != refs.d() {
        return Err(Error::argument(format!(
            "query dimension {} does not match reference dimension {}",
            queries.d(),
            refs.d()
        )));
    }
    let projector = HullProjector::new(refs);
    (0..queries.n())
        .into_par_iter()
        .map(|i| projector.project(queries.row(i), cfg))
        .collect()
}

/// Unit vector from the hull surface toward the query.
pub fn direction_to_hull(
    result: &ProjectionResult,
    query: &[f64],
    refs_scale: f64,
) -> Result<Vec<f64>> {
    let threshold = 1e-12 * refs_scale;
    if result.dist_upper <= threshold {
        return Err(Error::DegenerateDirection { dist: result.dist_upper, threshold });
    }
    Ok(query
        .iter()
        .zip(&result.projection)
        .map(|(q, p)| (q - p) / result.dist_upper)
        .collect())
}

/// Max pairwise Euclidean distance (quadratic; guarded at 20000 points
/// unless overridden).
pub fn diameter_exact(refs: &PointSet, override_guard: bool) -> Result<f64> {
    if refs.n() < 2 {
        return Err(Error::argument("diameter needs at least 2 points"));
    }
    if refs.n() > 20_000 && !override_guard {
        return Err(Error::argument(format!(
            "{} points exceeds the quadratic-cost guard (20000); override to force",
            refs.n()
        )));
    }
    let n = refs.n();
    let best_sq = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let ri = refs.row(i);
            let mut m = 0.0f64;
            for j in i + 1..n {
                m = m.max(dist_sq(ri, refs.row(j)));
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    Ok(best_sq.sqrt())
}

/// Iterated farthest-point double sweep from seeded random starts; always a
/// lower bound on the exact diameter.
pub fn diameter_heuristic(refs: &PointSet, sweeps: usize, seed: u64) -> Result<f64> {
    if refs.n() < 2 {
        return Err(Error::argument("diameter needs at least 2 points"));
    }
    if sweeps < 1 {
        return Err(Error::argument("sweeps must be >= 1"));
    }
    let n = refs.n();
    let mut rng = Rng::seed_from_u64(seed);
    let mut best_sq = 0.0f64;
    for _ in 0..sweeps {
        let mut cur = rng.index(n);
        let mut local_best = 0.0f64;
        for _ in 0..64 {
            let (far, far_sq) = (0..n)
                .into_par_iter()
                .map(|j| (j, dist_sq(refs.row(cur), refs.row(j))))
                .reduce(
                    || (0, f64::NEG_INFINITY),
                    |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
                );
            if far_sq > local_best {
                local_best = far_sq;
                cur = far;
            } else {
                break;
            }
        }
        best_sq = best_sq.max(local_best);
    }
    Ok(best_sq.sqrt())
}

/// Inside iff dist_upper <= inside_tol * scale; Outside iff
/// dist_lower > inside_tol * scale; Uncertain when the certificate interval
/// straddles the threshold.
pub fn classify_membership(
    result: ProjectionResult,
    refs_scale: f64,
    cfg: &SolverConfig,
) -> Membership {
    let threshold = cfg.inside_tol * refs_scale;
    let verdict = if result.dist_upper <= threshold {
        Verdict::Inside
    } else if result.dist_lower > threshold {
        Verdict::Outside
    } else {
        Verdict::Uncertain
    };
    Membership { verdict, result }
}
