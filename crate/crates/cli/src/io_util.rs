//! Input sniffing, report writing, and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use hullscope::ingest;
use hullscope::pointset::PointSet;
use hullscope::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Idx,
    Cifar,
    Fmat,
}

/// Load a dataset, sniffing the format from the file when not forced.
pub fn load_dataset(path: &Path, format: Option<Format>, labels: Option<&Path>) -> Result<PointSet> {
    let format = match format {
        Some(f) => f,
        None => sniff(path)?,
    };
    match format {
        Format::Idx => ingest::load_idx(path, labels),
        Format::Cifar => ingest::load_cifar_bin(&[path]),
        Format::Fmat => ingest::load_fmat(path),
    }
}

fn sniff(path: &Path) -> Result<Format> {
    let bytes = fs::read(path)?;
    if bytes.len() >= 5 && &bytes[..5] == b"FMAT1" {
        return Ok(Format::Fmat);
    }
    if bytes.len() >= 4 && u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) == 0x0803 {
        return Ok(Format::Idx);
    }
    if !bytes.is_empty() && bytes.len() % 3073 == 0 {
        return Ok(Format::Cifar);
    }
    Err(Error::format(format!(
        "cannot determine format of {} (not FMAT1, IDX, or CIFAR binary)",
        path.display()
    )))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialize");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Reproducibility manifest; wall time is the only non-deterministic field.
#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub argv: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_time_secs: f64,
}

pub fn write_manifest(
    out_dir: &Path,
    inputs: &[&Path],
    seed: Option<u64>,
    threads: usize,
    started: std::time::Instant,
) -> Result<()> {
    let manifest = Manifest {
        tool: "hullscope",
        version: env!("CARGO_PKG_VERSION"),
        argv: std::env::args().collect(),
        inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
        seed,
        threads,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    write_json(&manifest, &out_dir.join("manifest.json"))
}

/// Join values with ';' for embedding a list in one CSV field.
pub fn semi_join<T: std::fmt::Display>(vals: impl IntoIterator<Item = T>) -> String {
    vals.into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
