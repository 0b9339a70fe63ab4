//! Command-line pipeline: ingest -> (optional wavelet transform) -> hull
//! projection -> stats -> reports, plus the Legendre and MLP demos.
//!
//! Exit codes: 0 success, 2 argument errors, 3 format errors,
//! 4 unconverged queries (summary still written).

mod demo;
mod hull;
mod io_util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hullscope::Error;

use io_util::Format;

#[derive(Parser)]
#[command(name = "hullscope", version, about = "Convex-hull geometry of datasets")]
struct Cli {
    /// Worker threads (default: HULLSCOPE_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project query points onto the hull of a reference set; emit per-query
    /// CSV and a summary JSON.
    HullDistance {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// Input format (sniffed from the file when omitted).
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Frank-Wolfe gap threshold, relative to scale^2.
        #[arg(long, default_value_t = 1e-6)]
        gap_tol: f64,
        /// Inside threshold, relative to the reference scale.
        #[arg(long, default_value_t = 1e-4)]
        inside_tol: f64,
        #[arg(long, default_value_t = 50_000)]
        max_iters: usize,
        /// Subsample the train set to this many rows.
        #[arg(long)]
        subsample: Option<usize>,
        /// Subsample the query set to this many rows.
        #[arg(long)]
        subsample_query: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sweeps for the diameter lower bound in the summary.
        #[arg(long, default_value_t = 8)]
        sweeps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Diameter of a point set (exact or farthest-point heuristic).
    Diameter {
        #[arg(long)]
        train: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Exact quadratic scan instead of the heuristic.
        #[arg(long, conflicts_with = "sweeps")]
        exact: bool,
        #[arg(long, default_value_t = 16)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the 20000-point guard on the exact scan.
        #[arg(long)]
        force: bool,
    },
    /// Wavelet-transform a dataset (optionally keeping the top-k
    /// coefficients fitted on it) and write FMAT1.
    Wavelet {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// HxWxC, e.g. 28x28x1 or 32x32x3.
        #[arg(long)]
        shape: String,
        #[arg(long, value_parser = parse_family)]
        family: hullscope::wavelets::Family,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        /// Keep only the k largest-magnitude coefficient positions (fitted
        /// on this input; a .mask.json sidecar is written next to --out).
        #[arg(long)]
        keep_top: Option<usize>,
        /// Reuse a previously fitted mask sidecar instead of fitting.
        #[arg(long, conflicts_with = "keep_top")]
        apply_mask: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Uniform random points matching another dataset's dimension and
    /// value range.
    RandomBaseline {
        #[arg(long)]
        like: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unit direction from the hull surface to one query point, as FMAT1.
    Direction {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = 1e-6)]
        gap_tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit Legendre decision boundaries under several regimes and profile
    /// their extrapolations.
    LegendreDemo {
        /// alternating | alternating:N | custom:<csv with x,label rows>
        #[arg(long, default_value = "alternating")]
        dataset: String,
        /// Comma-separated degrees, e.g. 1,2,12.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 12])]
        degrees: Vec<usize>,
        /// Comma-separated regimes: minnorm, ridge:<lambda>, anchored-pos,
        /// anchored-neg.
        #[arg(long, value_delimiter = ',', default_values_t = vec![
            "minnorm".to_string(), "ridge:0.01".to_string(),
            "anchored-pos".to_string(), "anchored-neg".to_string()])]
        regimes: Vec<String>,
        /// Anchors are placed at -x and +x.
        #[arg(long, default_value_t = 2.0)]
        anchor_x: f64,
        #[arg(long, default_value_t = 1.0)]
        anchor_weight: f64,
        #[arg(long, default_value = "-2.5:2.5", value_parser = parse_interval)]
        interval: (f64, f64),
        #[arg(long, default_value_t = 401)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train small MLPs from several seeds on the standard two-moons demo
    /// data and split decision disagreement inside/outside the hull.
    MlpDemo {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0u64, 1])]
        seeds: Vec<u64>,
        /// Layer sizes, e.g. 2,128,1. Narrow nets disagree as much inside
        /// the hull as outside; the wide default keeps them aligned where
        /// the training data constrains them.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 128, 1])]
        arch: Vec<usize>,
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 0.0)]
        weight_decay: f64,
        #[arg(long, default_value_t = 61)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_family(s: &str) -> Result<hullscope::wavelets::Family, String> {
    match s {
        "haar" => Ok(hullscope::wavelets::Family::Haar),
        "db4" | "d4" => Ok(hullscope::wavelets::Family::D4),
        _ => Err(format!("unknown family '{s}', expected haar or db4")),
    }
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected a:b")?;
    let a: f64 = a.parse().map_err(|_| "bad interval start")?;
    let b: f64 = b.parse().map_err(|_| "bad interval end")?;
    if a >= b {
        return Err("interval start must be below its end".into());
    }
    Ok((a, b))
}

fn parse_shape(s: &str) -> hullscope::Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(Error::argument(format!("shape must be HxWxC, got '{s}'")));
    }
    let dims: Vec<usize> = parts
        .iter()
        .map(|p| p.parse().map_err(|_| Error::argument(format!("bad shape component '{p}'"))))
        .collect::<hullscope::Result<_>>()?;
    Ok((dims[0], dims[1], dims[2]))
}

fn run(cli: Cli, threads: usize) -> hullscope::Result<i32> {
    match cli.command {
        Command::HullDistance {
            train,
            query,
            format,
            gap_tol,
            inside_tol,
            max_iters,
            subsample,
            subsample_query,
            seed,
            sweeps,
            out,
        } => hull::hull_distance(
            &hull::HullDistanceArgs {
                train,
                query,
                format,
                gap_tol,
                inside_tol,
                max_iters,
                subsample,
                subsample_query,
                seed,
                sweeps,
                out,
            },
            threads,
        ),
        Command::Diameter { train, format, exact, sweeps, seed, force } => {
            hull::diameter(&train, format, exact, sweeps, seed, force)
        }
        Command::Wavelet { input, format, shape, family, levels, keep_top, apply_mask, out } => {
            let shape = parse_shape(&shape)?;
            hull::wavelet(&input, format, shape, family, levels, keep_top, &out, apply_mask.as_deref())
        }
        Command::RandomBaseline { like, format, n, seed, out } => {
            hull::random_baseline(&like, format, n, seed, &out)
        }
        Command::Direction { train, query, format, index, gap_tol, out } => {
            hull::direction(&train, &query, format, index, gap_tol, &out)
        }
        Command::LegendreDemo {
            dataset,
            degrees,
            regimes,
            anchor_x,
            anchor_weight,
            interval,
            resolution,
            out,
        } => demo::legendre_demo(
            &demo::LegendreDemoArgs {
                dataset,
                degrees,
                regimes,
                anchor_x,
                anchor_weight,
                interval,
                resolution,
                out,
            },
            threads,
        ),
        Command::MlpDemo { seeds, arch, steps, lr, weight_decay, resolution, out } => {
            demo::mlp_demo(
                &demo::MlpDemoArgs { seeds, arch, steps, lr, weight_decay, resolution, out },
                threads,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("HULLSCOPE_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(num_threads_default);
    if threads < 1 {
        eprintln!("error: threads must be >= 1");
        return ExitCode::from(2);
    }
    if rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .is_err()
    {
        // global pool already initialized; proceed with its configuration
    }
    match run(cli, threads) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Argument(_) | Error::DegenerateHull | Error::DegenerateDirection { .. } => 2,
                Error::Format(_) => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
