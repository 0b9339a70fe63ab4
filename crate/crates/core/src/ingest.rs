//! Dataset loaders (IDX, CIFAR-10 binary, FMAT1), random baselines, and
//! subsampling.
//!
//! FMAT1 is the toolkit's bit-exact interchange format: ASCII magic "FMAT1",
//! little-endian u32 n and d, a flag byte (1 = labels present), n*d
//! little-endian f32 entries row-major, then (if flagged) n little-endian
//! u32 labels.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::rng::Rng;

const IDX_MAGIC_IMAGES: u32 = 0x0000_0803;
const IDX_MAGIC_LABELS: u32 = 0x0000_0801;
const CIFAR_RECORD: usize = 3073;
const FMAT_MAGIC: &[u8; 5] = b"FMAT1";

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::format(format!("truncated payload while reading {what}")))
}

fn read_u32_be(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_be_bytes(b))
}

fn read_u32_le(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

/// Load a big-endian IDX image file (and optionally its IDX label file).
pub fn load_idx(image_path: &Path, label_path: Option<&Path>) -> Result<PointSet> {
    let mut r = BufReader::new(File::open(image_path)?);
    let magic = read_u32_be(&mut r, "IDX magic")?;
    if magic != IDX_MAGIC_IMAGES {
        return Err(Error::format(format!(
            "bad IDX image magic {magic:#010x}, expected {IDX_MAGIC_IMAGES:#010x}"
        )));
    }
    let n = read_u32_be(&mut r, "IDX count")? as usize;
    let rows = read_u32_be(&mut r, "IDX rows")? as usize;
    let cols = read_u32_be(&mut r, "IDX cols")? as usize;
    let d = rows * cols;
    let mut pixels = vec![0u8; n * d];
    read_exact(&mut r, &mut pixels, "IDX pixel payload")?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::format("IDX file longer than declared payload"));
    }

    let labels = match label_path {
        None => None,
        Some(p) => {
            let mut lr = BufReader::new(File::open(p)?);
            let magic = read_u32_be(&mut lr, "IDX label magic")?;
            if magic != IDX_MAGIC_LABELS {
                return Err(Error::format(format!(
                    "bad IDX label magic {magic:#010x}, expected {IDX_MAGIC_LABELS:#010x}"
                )));
            }
            let ln = read_u32_be(&mut lr, "IDX label count")? as usize;
            if ln != n {
                return Err(Error::format(format!(
                    "label count {ln} does not match image count {n}"
                )));
            }
            let mut lbytes = vec![0u8; ln];
            read_exact(&mut lr, &mut lbytes, "IDX label payload")?;
            Some(lbytes.into_iter().map(u32::from).collect())
        }
    };

    let data = pixels.into_iter().map(f64::from).collect();
    Ok(PointSet::new(data, n, d, labels)?.with_scale_hint(255.0))
}

/// Load one or more CIFAR-10 binary batch files (3073-byte records,
/// label byte first), concatenated in argument order.
pub fn load_cifar_bin(paths: &[impl AsRef<Path>]) -> Result<PointSet> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for p in paths {
        let bytes = std::fs::read(p.as_ref())?;
        if bytes.is_empty() || bytes.len() % CIFAR_RECORD != 0 {
            return Err(Error::format(format!(
                "{}: length {} is not a positive multiple of {CIFAR_RECORD}",
                p.as_ref().display(),
                bytes.len()
            )));
        }
        for rec in bytes.chunks_exact(CIFAR_RECORD) {
            labels.push(u32::from(rec[0]));
            data.extend(rec[1..].iter().map(|&b| f64::from(b)));
        }
    }
    let n = labels.len();
    Ok(PointSet::new(data, n, CIFAR_RECORD - 1, Some(labels))?.with_scale_hint(255.0))
}

/// n x d matrix of i.i.d. uniform entries on [lo, hi), deterministic in seed.
pub fn gen_random_points(n: usize, d: usize, lo: f64, hi: f64, seed: u64) -> Result<PointSet> {
    if lo >= hi {
        return Err(Error::argument(format!("need lo < hi, got {lo} >= {hi}")));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let data = (0..n * d).map(|_| rng.uniform(lo, hi)).collect();
    PointSet::new(data, n, d, None)
}

/// Write a PointSet in FMAT1 (entries rounded to f32).
pub fn save_fmat(ps: &PointSet, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FMAT_MAGIC)?;
    w.write_all(&(ps.n() as u32).to_le_bytes())?;
    w.write_all(&(ps.d() as u32).to_le_bytes())?;
    w.write_all(&[u8::from(ps.labels().is_some())])?;
    for &v in ps.data() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    if let Some(labels) = ps.labels() {
        for &l in labels {
            w.write_all(&l.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_fmat(path: &Path) -> Result<PointSet> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    read_exact(&mut r, &mut magic, "FMAT magic")?;
    if &magic != FMAT_MAGIC {
        return Err(Error::format(format!(
            "bad FMAT magic {:?}, expected {:?}",
            String::from_utf8_lossy(&magic),
            "FMAT1"
        )));
    }
    let n = read_u32_le(&mut r, "FMAT n")? as usize;
    let d = read_u32_le(&mut r, "FMAT d")? as usize;
    let mut flag = [0u8; 1];
    read_exact(&mut r, &mut flag, "FMAT flag")?;
    let mut raw = vec![0u8; n * d * 4];
    read_exact(&mut r, &mut raw, "FMAT entries")?;
    let data = raw
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    let labels = if flag[0] == 1 {
        let mut lraw = vec![0u8; n * 4];
        read_exact(&mut r, &mut lraw, "FMAT labels")?;
        Some(
            lraw.chunks_exact(4)
                .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        )
    } else {
        None
    };
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::format("FMAT file longer than declared payload"));
    }
    PointSet::new(data, n, d, labels)
}

/// k rows without replacement, deterministic in seed. Stratified mode
/// balances per-label counts to within one.
pub fn subsample(ps: &PointSet, k: usize, seed: u64, stratified: bool) -> Result<PointSet> {
    if k < 1 || k > ps.n() {
        return Err(Error::argument(format!(
            "need 1 <= k <= n, got k = {k}, n = {}",
            ps.n()
        )));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let indices = if stratified {
        let labels = ps
            .labels()
            .ok_or_else(|| Error::argument("stratified subsample requires labels"))?;
        let mut by_label: Vec<(u32, Vec<usize>)> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            match by_label.iter_mut().find(|(v, _)| *v == l) {
                Some((_, idxs)) => idxs.push(i),
                None => by_label.push((l, vec![i])),
            }
        }
        by_label.sort_by_key(|(l, _)| *l);
        let classes = by_label.len();
        let base = k / classes;
        let rem = k % classes;
        let mut chosen = Vec::with_capacity(k);
        for (rank, (label, idxs)) in by_label.iter().enumerate() {
            let want = base + usize::from(rank < rem);
            if want > idxs.len() {
                return Err(Error::argument(format!(
                    "class {label} has only {} rows, {want} requested",
                    idxs.len()
                )));
            }
            for j in rng.sample_indices(idxs.len(), want) {
                chosen.push(idxs[j]);
            }
        }
        chosen.sort_unstable();
        chosen
    } else {
        rng.sample_indices(ps.n(), k)
    };
    ps.select(&indices)
}
