//! The two extrapolation demos: Legendre decision boundaries and small MLPs.

use std::fs;
use std::path::PathBuf;

use hullscope::legendre::{extrapolation_profile, fit_boundary, Anchor, FitRegime};
use hullscope::mlpdemo::{
    demo_dataset, disagreement_split, eval_grid, hull2d, train_mlp, Bounds, TrainRegime,
};
use hullscope::{Error, Result};
use serde::Serialize;

use crate::io_util::{write_json, write_manifest};

pub enum LegendreDataset {
    /// n equally spaced points on [-1, 1] with alternating labels.
    Alternating { points: usize },
    Custom { path: PathBuf },
}

pub fn parse_legendre_dataset(text: &str) -> Result<(LegendreDataset, String)> {
    if text == "alternating" {
        return Ok((LegendreDataset::Alternating { points: 7 }, text.to_string()));
    }
    if let Some(rest) = text.strip_prefix("alternating:") {
        let points: usize = rest
            .parse()
            .map_err(|_| Error::argument(format!("bad point count in dataset '{text}'")))?;
        if points < 2 {
            return Err(Error::argument("alternating dataset needs at least 2 points"));
        }
        return Ok((LegendreDataset::Alternating { points }, text.to_string()));
    }
    if let Some(path) = text.strip_prefix("custom:") {
        return Ok((LegendreDataset::Custom { path: PathBuf::from(path) }, text.to_string()));
    }
    Err(Error::argument(format!(
        "dataset must be 'alternating', 'alternating:N', or 'custom:<csv>', got '{text}'"
    )))
}

fn load_points(dataset: &LegendreDataset) -> Result<(Vec<f64>, Vec<f64>)> {
    match dataset {
        LegendreDataset::Alternating { points } => {
            let n = *points;
            let xs: Vec<f64> = (0..n)
                .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
                .collect();
            let labels: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            Ok((xs, labels))
        }
        LegendreDataset::Custom { path } => {
            let text = fs::read_to_string(path)?;
            let mut xs = Vec::new();
            let mut labels = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut parts = line.split(',');
                let parse = |s: Option<&str>| -> Result<f64> {
                    s.and_then(|v| v.trim().parse().ok()).ok_or_else(|| {
                        Error::format(format!("line {}: expected 'x,label'", lineno + 1))
                    })
                };
                xs.push(parse(parts.next())?);
                labels.push(parse(parts.next())?);
            }
            Ok((xs, labels))
        }
    }
}

/// "minnorm" | "ridge:<lambda>" | "anchored-pos" | "anchored-neg"
pub fn parse_regime(token: &str, anchor_x: f64, anchor_weight: f64) -> Result<FitRegime> {
    if token == "minnorm" {
        return Ok(FitRegime::MinNorm);
    }
    if let Some(rest) = token.strip_prefix("ridge:") {
        let lambda: f64 = rest
            .parse()
            .map_err(|_| Error::argument(format!("bad ridge lambda in '{token}'")))?;
        return Ok(FitRegime::Ridge { lambda });
    }
    let target = match token {
        "anchored-pos" => 1.0,
        "anchored-neg" => -1.0,
        _ => {
            return Err(Error::argument(format!(
                "regime must be minnorm, ridge:<lambda>, anchored-pos, or anchored-neg, got '{token}'"
            )))
        }
    };
    Ok(FitRegime::Anchored {
        anchors: vec![
            Anchor { x: -anchor_x, target, weight: anchor_weight },
            Anchor { x: anchor_x, target, weight: anchor_weight },
        ],
    })
}

#[derive(Serialize)]
struct LegendreRun {
    degree: usize,
    regime: String,
    train_sign_accuracy: f64,
    value_at_neg_anchor: f64,
    value_at_pos_anchor: f64,
    sign_changes: Vec<f64>,
}

#[derive(Serialize)]
struct LegendreReport {
    dataset: String,
    n_points: usize,
    anchor_x: f64,
    interval: (f64, f64),
    resolution: usize,
    runs: Vec<LegendreRun>,
}

pub struct LegendreDemoArgs {
    pub dataset: String,
    pub degrees: Vec<usize>,
    pub regimes: Vec<String>,
    pub anchor_x: f64,
    pub anchor_weight: f64,
    pub interval: (f64, f64),
    pub resolution: usize,
    pub out: PathBuf,
}

pub fn legendre_demo(args: &LegendreDemoArgs, threads: usize) -> Result<i32> {
    let started = std::time::Instant::now();
    fs::create_dir_all(args.out.join("models"))?;
    fs::create_dir_all(args.out.join("profiles"))?;
    let (dataset, dataset_name) = parse_legendre_dataset(&args.dataset)?;
    let (xs, labels) = load_points(&dataset)?;

    let mut runs = Vec::new();
    for &degree in &args.degrees {
        for regime_token in &args.regimes {
            let regime = parse_regime(regime_token, args.anchor_x, args.anchor_weight)?;
            let outcome = fit_boundary(&xs, &labels, degree, regime)?;
            let profile = extrapolation_profile(&outcome.model, args.interval, args.resolution)?;

            let stem = format!("deg{degree}_{regime_token}").replace(':', "_");
            write_json(&outcome.model, &args.out.join("models").join(format!("{stem}.json")))?;
            let mut csv = String::from("x,value,sign\n");
            for i in 0..profile.xs.len() {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    profile.xs[i], profile.values[i], profile.signs[i]
                ));
            }
            fs::write(args.out.join("profiles").join(format!("{stem}.csv")), csv)?;

            runs.push(LegendreRun {
                degree,
                regime: regime_token.clone(),
                train_sign_accuracy: outcome.train_sign_accuracy,
                value_at_neg_anchor: outcome.model.eval(-args.anchor_x),
                value_at_pos_anchor: outcome.model.eval(args.anchor_x),
                sign_changes: profile.sign_changes,
            });
        }
    }

    let report = LegendreReport {
        dataset: dataset_name,
        n_points: xs.len(),
        anchor_x: args.anchor_x,
        interval: args.interval,
        resolution: args.resolution,
        runs,
    };
    write_json(&report, &args.out.join("report.json"))?;
    write_manifest(&args.out, &[], None, threads, started)?;
    Ok(0)
}

#[derive(Serialize)]
struct MlpSeedRun {
    seed: u64,
    final_loss: f64,
    train_sign_accuracy: f64,
}

#[derive(Serialize)]
struct MlpPair {
    seed_a: u64,
    seed_b: u64,
    inside_disagree_fraction: f64,
    outside_disagree_fraction: f64,
}

#[derive(Serialize)]
struct MlpReport {
    arch: Vec<usize>,
    steps: usize,
    learning_rate: f64,
    weight_decay: f64,
    resolution: usize,
    bounds: Bounds,
    seeds: Vec<MlpSeedRun>,
    pairs: Vec<MlpPair>,
}

pub struct MlpDemoArgs {
    pub seeds: Vec<u64>,
    pub arch: Vec<usize>,
    pub steps: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub resolution: usize,
    pub out: PathBuf,
}

pub fn mlp_demo(args: &MlpDemoArgs, threads: usize) -> Result<i32> {
    let started = std::time::Instant::now();
    fs::create_dir_all(args.out.join("grids"))?;
    fs::create_dir_all(args.out.join("losses"))?;
    let (points, targets) = demo_dataset();
    let hull = hull2d(&points.rows().map(|r| [r[0], r[1]]).collect::<Vec<_>>())?;
    write_json(&hull, &args.out.join("hull.json"))?;
    let bounds = Bounds::around(&hull, 3.0);

    let mut seed_runs = Vec::new();
    let mut grids = Vec::new();
    for &seed in &args.seeds {
        let regime = TrainRegime {
            seed,
            steps: args.steps,
            learning_rate: args.lr,
            weight_decay: args.weight_decay,
            batch: hullscope::mlpdemo::Batch::Full,
        };
        let (model, report) = train_mlp(&points, &targets, &args.arch, &regime)?;
        let grid = eval_grid(&model, bounds, args.resolution)?;

        let mut grid_csv = String::new();
        for row in grid.chunks(args.resolution) {
            let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
            grid_csv.push_str(&line.join(","));
            grid_csv.push('\n');
        }
        fs::write(args.out.join("grids").join(format!("seed{seed}.csv")), grid_csv)?;
        let mut loss_csv = String::from("step,loss\n");
        for (i, l) in report.loss_trace.iter().enumerate() {
            loss_csv.push_str(&format!("{i},{l}\n"));
        }
        fs::write(args.out.join("losses").join(format!("seed{seed}.csv")), loss_csv)?;

        seed_runs.push(MlpSeedRun {
            seed,
            final_loss: report.final_loss,
            train_sign_accuracy: report.train_sign_accuracy,
        });
        grids.push((seed, grid));
    }

    let mut pairs = Vec::new();
    for i in 0..grids.len() {
        for j in i + 1..grids.len() {
            let (inside, outside) =
                disagreement_split(&grids[i].1, &grids[j].1, &hull, bounds, args.resolution)?;
            pairs.push(MlpPair {
                seed_a: grids[i].0,
                seed_b: grids[j].0,
                inside_disagree_fraction: inside,
                outside_disagree_fraction: outside,
            });
        }
    }

    let report = MlpReport {
        arch: args.arch.clone(),
        steps: args.steps,
        learning_rate: args.lr,
        weight_decay: args.weight_decay,
        resolution: args.resolution,
        bounds,
        seeds: seed_runs,
        pairs,
    };
    write_json(&report, &args.out.join("report.json"))?;
    write_manifest(&args.out, &[], None, threads, started)?;
    Ok(0)
}
