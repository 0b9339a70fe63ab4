//! Hull-distance pipeline subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use hullscope::hullgeom::{
    classify_membership, diameter_exact, diameter_heuristic, HullProjector, SolverConfig, Verdict,
};
use hullscope::ingest::{gen_random_points, save_fmat, subsample};
use hullscope::stats::{summarize, DistanceSummary};
use hullscope::wavelets::{Family, FittedWavelet, WaveletSpec};
use hullscope::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::io_util::{load_dataset, semi_join, write_json, write_manifest, Format};

pub struct HullDistanceArgs {
    pub train: PathBuf,
    pub query: PathBuf,
    pub format: Option<Format>,
    pub gap_tol: f64,
    pub inside_tol: f64,
    pub max_iters: usize,
    pub subsample: Option<usize>,
    pub subsample_query: Option<usize>,
    pub seed: u64,
    pub sweeps: usize,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct HullDistanceSummary {
    n_train: usize,
    n_query: usize,
    dimension: usize,
    scale: f64,
    gap_tol: f64,
    inside_threshold: f64,
    inside: usize,
    outside: usize,
    uncertain: usize,
    unconverged: usize,
    outside_fraction: f64,
    diameter_lower_bound: f64,
    max_dist_over_diameter: f64,
    mean_dist_over_diameter: f64,
    distances: DistanceSummary,
}

/// Returns the process exit code (0, or 4 when any query failed to
/// converge; the summary is written either way).
pub fn hull_distance(args: &HullDistanceArgs, threads: usize) -> Result<i32> {
    let started = std::time::Instant::now();
    fs::create_dir_all(&args.out)?;
    let mut train = load_dataset(&args.train, args.format, None)?;
    let mut query = load_dataset(&args.query, args.format, None)?;
    if let Some(k) = args.subsample {
        train = subsample(&train, k, args.seed, false)?;
    }
    if let Some(k) = args.subsample_query {
        query = subsample(&query, k, args.seed.wrapping_add(1), false)?;
    }
    if query.d() != train.d() {
        return Err(Error::argument(format!(
            "train dimension {} does not match query dimension {}",
            train.d(),
            query.d()
        )));
    }

    let projector = HullProjector::new(&train);
    let scale = projector.scale();
    let cfg = SolverConfig {
        gap_tol: args.gap_tol * scale * scale,
        max_iters: args.max_iters,
        inside_tol: args.inside_tol,
        support_tol: 1e-6,
        record_trace: false,
    };

    let memberships: Vec<_> = (0..query.n())
        .into_par_iter()
        .map(|i| {
            projector
                .project(query.row(i), &cfg)
                .map(|r| classify_membership(r, scale, &cfg))
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from(
        "index,dist_upper,dist_lower,gap,iters,converged,membership,support_indices,support_coeffs\n",
    );
    for (i, m) in memberships.iter().enumerate() {
        let r = &m.result;
        let support_coeffs = r
            .coeffs
            .iter()
            .filter(|(idx, _)| r.support.contains(idx))
            .map(|(_, a)| *a);
        csv.push_str(&format!(
            "{i},{},{},{},{},{},{},{},{}\n",
            r.dist_upper,
            r.dist_lower,
            r.gap,
            r.iters,
            r.converged,
            m.verdict,
            semi_join(r.support.iter()),
            semi_join(support_coeffs),
        ));
    }
    fs::write(args.out.join("distances.csv"), csv)?;

    let count = |v: Verdict| memberships.iter().filter(|m| m.verdict == v).count();
    let (inside, outside, uncertain) =
        (count(Verdict::Inside), count(Verdict::Outside), count(Verdict::Uncertain));
    let unconverged = memberships.iter().filter(|m| !m.result.converged).count();
    let dists: Vec<f64> = memberships.iter().map(|m| m.result.dist_upper).collect();
    let distances = summarize(&dists, 30)?;
    let diameter = diameter_heuristic(&train, args.sweeps, args.seed)?;
    let max_dist = dists.iter().copied().fold(0.0, f64::max);
    let mean_dist = dists.iter().sum::<f64>() / dists.len().max(1) as f64;

    let summary = HullDistanceSummary {
        n_train: train.n(),
        n_query: query.n(),
        dimension: train.d(),
        scale,
        gap_tol: cfg.gap_tol,
        inside_threshold: cfg.inside_tol * scale,
        inside,
        outside,
        uncertain,
        unconverged,
        outside_fraction: outside as f64 / memberships.len().max(1) as f64,
        diameter_lower_bound: diameter,
        max_dist_over_diameter: max_dist / diameter,
        mean_dist_over_diameter: mean_dist / diameter,
        distances,
    };
    write_json(&summary, &args.out.join("summary.json"))?;
    write_manifest(&args.out, &[&args.train, &args.query], Some(args.seed), threads, started)?;
    Ok(if unconverged > 0 { 4 } else { 0 })
}

#[derive(Serialize)]
struct DiameterReport {
    n: usize,
    dimension: usize,
    method: String,
    diameter: f64,
}

pub fn diameter(
    train: &Path,
    format: Option<Format>,
    exact: bool,
    sweeps: usize,
    seed: u64,
    force: bool,
) -> Result<i32> {
    let ps = load_dataset(train, format, None)?;
    let (method, value) = if exact {
        ("exact".to_string(), diameter_exact(&ps, force)?)
    } else {
        (format!("heuristic(sweeps={sweeps})"), diameter_heuristic(&ps, sweeps, seed)?)
    };
    let report = DiameterReport {
        n: ps.n(),
        dimension: ps.d(),
        method,
        diameter: value,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serialize"));
    Ok(0)
}

#[derive(Serialize)]
struct MaskSidecar {
    family: Family,
    levels: usize,
    keep_top: usize,
    kept_indices: Vec<usize>,
}

pub fn wavelet(
    input: &Path,
    format: Option<Format>,
    shape: (usize, usize, usize),
    family: Family,
    levels: usize,
    keep_top: Option<usize>,
    out: &Path,
    apply_mask: Option<&Path>,
) -> Result<i32> {
    let ps = load_dataset(input, format, None)?;
    let mut spec = WaveletSpec::new(family, levels);
    let transformed = if let Some(mask_path) = apply_mask {
        let text = fs::read_to_string(mask_path)?;
        let sidecar: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::format(format!("bad mask JSON: {e}")))?;
        let kept: Vec<usize> = sidecar["kept_indices"]
            .as_array()
            .ok_or_else(|| Error::format("mask JSON lacks kept_indices"))?
            .iter()
            .map(|v| v.as_u64().unwrap_or(0) as usize)
            .collect();
        let fitted = FittedWavelet { spec, shape, mask: Some(kept) };
        fitted.transform(&ps)?
    } else {
        spec.keep_top = keep_top;
        let (fitted, out_ps) = FittedWavelet::fit(&ps, shape, spec)?;
        if let Some(kept) = &fitted.mask {
            let sidecar = MaskSidecar {
                family,
                levels,
                keep_top: kept.len(),
                kept_indices: kept.clone(),
            };
            let mut mask_path = out.as_os_str().to_owned();
            mask_path.push(".mask.json");
            write_json(&sidecar, Path::new(&mask_path))?;
        }
        out_ps
    };
    save_fmat(&transformed, out)?;
    Ok(0)
}

pub fn random_baseline(like: &Path, format: Option<Format>, n: usize, seed: u64, out: &Path) -> Result<i32> {
    let template = load_dataset(like, format, None)?;
    let (lo, hi) = template.value_range();
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let points = gen_random_points(n, template.d(), lo, hi, seed)?;
    save_fmat(&points, out)?;
    Ok(0)
}

pub fn direction(
    train: &Path,
    query: &Path,
    format: Option<Format>,
    index: usize,
    gap_tol: f64,
    out: &Path,
) -> Result<i32> {
    let train_ps = load_dataset(train, format, None)?;
    let query_ps = load_dataset(query, format, None)?;
    if index >= query_ps.n() {
        return Err(Error::argument(format!(
            "query index {index} out of range 0..{}",
            query_ps.n()
        )));
    }
    let projector = HullProjector::new(&train_ps);
    let scale = projector.scale();
    let mut cfg = SolverConfig::for_scale(scale);
    cfg.gap_tol = gap_tol * scale * scale;
    let result = projector.project(query_ps.row(index), &cfg)?;
    let dir = hullscope::hullgeom::direction_to_hull(&result, query_ps.row(index), scale)?;
    let d = dir.len();
    let ps = hullscope::PointSet::new(dir, 1, d, None)?;
    save_fmat(&ps, out)?;
    Ok(0)
}
