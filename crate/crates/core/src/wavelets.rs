//! Orthonormal discrete wavelet transforms (Haar, Daubechies-4) in 1-D and
//! separable 2-D, with periodic boundary handling and optional top-k
//! coefficient masking fitted on a reference set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Haar,
    D4,
}

impl Family {
    /// Analysis low-pass filter taps.
    fn lowpass(self) -> Vec<f64> {
        match self {
            Family::Haar => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                vec![h, h]
            }
            Family::D4 => {
                let s3 = 3.0f64.sqrt();
                let norm = 4.0 * std::f64::consts::SQRT_2;
                vec![
                    (1.0 + s3) / norm,
                    (3.0 + s3) / norm,
                    (3.0 - s3) / norm,
                    (1.0 - s3) / norm,
                ]
            }
        }
    }

    /// Quadrature mirror high-pass: g_k = (-1)^k h_{L-1-k}.
    fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub family: Family,
    pub levels: usize,
    /// Keep only the k coefficient positions with the largest mean absolute
    /// magnitude over the reference set (fitted, then reused for queries).
    pub keep_top: Option<usize>,
}

impl WaveletSpec {
    pub fn new(family: Family, levels: usize) -> Self {
        WaveletSpec { family, levels, keep_top: None }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if self.levels < 1 {
            return Err(Error::argument("levels must be >= 1"));
        }
        let block = 1usize << self.levels;
        if len == 0 || len % block != 0 {
            return Err(Error::argument(format!(
                "length {len} is not divisible by 2^levels = {block}"
            )));
        }
        Ok(())
    }
}

/// One analysis level with periodic extension:
/// out = [approx (len/2) | detail (len/2)].
fn analyze_level(signal: &[f64], h: &[f64], g: &[f64], out: &mut [f64]) {
    let n = signal.len();
    let half = n / 2;
    for i in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (k, (&hk, &gk)) in h.iter().zip(g).enumerate() {
            let s = signal[(2 * i + k) % n];
            a += hk * s;
            d += gk * s;
        }
        out[i] = a;
        out[half + i] = d;
    }
}

fn synthesize_level(coeffs: &[f64], h: &[f64], g: &[f64], out: &mut [f64]) {
    let n = coeffs.len();
    let half = n / 2;
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..half {
        let a = coeffs[i];
        let d = coeffs[half + i];
        for (k, (&hk, &gk)) in h.iter().zip(g).enumerate() {
            out[(2 * i + k) % n] += hk * a + gk * d;
        }
    }
}

/// Multi-level forward 1-D transform; layout per level = [approx | detail]
/// with the approx block recursed.
pub fn dwt1d(signal: &[f64], spec: &WaveletSpec) -> Result<Vec<f64>> {
    spec.check_len(signal.len())?;
    let h = spec.family.lowpass();
    let g = spec.family.highpass();
    let mut out = signal.to_vec();
    let mut scratch = vec![0.0; signal.len()];
    let mut cur = signal.len();
    for _ in 0..spec.levels {
        analyze_level(&out[..cur], &h, &g, &mut scratch[..cur]);
        out[..cur].copy_from_slice(&scratch[..cur]);
        cur /= 2;
    }
    Ok(out)
}

/// Exact inverse of [`dwt1d`].
pub fn idwt1d(coeffs: &[f64], spec: &WaveletSpec) -> Result<Vec<f64>> {
    spec.check_len(coeffs.len())?;
    let h = spec.family.lowpass();
    let g = spec.family.highpass();
    let mut out = coeffs.to_vec();
    let mut scratch = vec![0.0; coeffs.len()];
    let mut cur = coeffs.len() >> spec.levels;
    for _ in 0..spec.levels {
        cur *= 2;
        synthesize_level(&out[..cur], &h, &g, &mut scratch[..cur]);
        out[..cur].copy_from_slice(&scratch[..cur]);
    }
    Ok(out)
}

fn check_2d(spec: &WaveletSpec, h: usize, w: usize) -> Result<()> {
    spec.check_len(h)?;
    spec.check_len(w)?;
    Ok(())
}

/// Separable 2-D transform: per level, one analysis pass over the rows of
/// the current LL block, then over its columns; quadrant layout LL|LH / HL|HH
/// with LL recursed. `image` is row-major h x w.
pub fn dwt2d(image: &[f64], h: usize, w: usize, spec: &WaveletSpec) -> Result<Vec<f64>> {
    if image.len() != h * w {
        return Err(Error::argument(format!(
            "image length {} does not match {h}x{w}",
            image.len()
        )));
    }
    check_2d(spec, h, w)?;
    let lp = spec.family.lowpass();
    let hp = spec.family.highpass();
    let mut out = image.to_vec();
    let (mut ch, mut cw) = (h, w);
    let mut row_buf = vec![0.0; w.max(h)];
    let mut col_buf = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for _ in 0..spec.levels {
        for r in 0..ch {
            let row = &out[r * w..r * w + cw];
            analyze_level(row, &lp, &hp, &mut row_buf[..cw]);
            out[r * w..r * w + cw].copy_from_slice(&row_buf[..cw]);
        }
        for c in 0..cw {
            for r in 0..ch {
                col_buf[r] = out[r * w + c];
            }
            analyze_level(&col_buf[..ch], &lp, &hp, &mut col_out[..ch]);
            for r in 0..ch {
                out[r * w + c] = col_out[r];
            }
        }
        ch /= 2;
        cw /= 2;
    }
    Ok(out)
}

/// Exact inverse of [`dwt2d`].
pub fn idwt2d(coeffs: &[f64], h: usize, w: usize, spec: &WaveletSpec) -> Result<Vec<f64>> {
    if coeffs.len() != h * w {
        return Err(Error::argument(format!(
            "coefficient length {} does not match {h}x{w}",
            coeffs.len()
        )));
    }
    check_2d(spec, h, w)?;
    let lp = spec.family.lowpass();
    let hp = spec.family.highpass();
    let mut out = coeffs.to_vec();
    let mut row_buf = vec![0.0; w.max(h)];
    let mut col_buf = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for level in (0..spec.levels).rev() {
        let ch = h >> level;
        let cw = w >> level;
        for c in 0..cw {
            for r in 0..ch {
                col_buf[r] = out[r * w + c];
            }
            synthesize_level(&col_buf[..ch], &lp, &hp, &mut col_out[..ch]);
            for r in 0..ch {
                out[r * w + c] = col_out[r];
            }
        }
        for r in 0..ch {
            let row = &out[r * w..r * w + cw];
            synthesize_level(row, &lp, &hp, &mut row_buf[..cw]);
            out[r * w..r * w + cw].copy_from_slice(&row_buf[..cw]);
        }
    }
    Ok(out)
}

/// Wavelet pipeline fitted on a reference set: full per-channel 2-D
/// transform plus (optionally) a top-k coefficient mask selected by mean
/// absolute magnitude over the reference set, ties broken by lowest index.
#[derive(Debug, Clone)]
pub struct FittedWavelet {
    pub spec: WaveletSpec,
    pub shape: (usize, usize, usize),
    /// Sorted kept coefficient positions, when keep_top is set.
    pub mask: Option<Vec<usize>>,
}

fn transform_rows(ps: &PointSet, shape: (usize, usize, usize), spec: &WaveletSpec) -> Result<PointSet> {
    let (h, w, c) = shape;
    if ps.d() != h * w * c {
        return Err(Error::argument(format!(
            "point dimension {} does not match {h}x{w}x{c}",
            ps.d()
        )));
    }
    check_2d(spec, h, w)?;
    let plane = h * w;
    let mut data = Vec::with_capacity(ps.n() * ps.d());
    for row in ps.rows() {
        for ch in 0..c {
            let out = dwt2d(&row[ch * plane..(ch + 1) * plane], h, w, spec)?;
            data.extend_from_slice(&out);
        }
    }
    let ps2 = PointSet::new(data, ps.n(), ps.d(), ps.labels().map(|l| l.to_vec()))?;
    Ok(match ps.scale_hint() {
        Some(s) => ps2.with_scale_hint(s),
        None => ps2,
    })
}

fn select_columns(ps: &PointSet, cols: &[usize]) -> Result<PointSet> {
    let mut data = Vec::with_capacity(ps.n() * cols.len());
    for row in ps.rows() {
        for &c in cols {
            data.push(row[c]);
        }
    }
    PointSet::new(data, ps.n(), cols.len(), ps.labels().map(|l| l.to_vec()))
}

impl FittedWavelet {
    /// Transform the reference set and, if keep_top is set, fit the mask on
    /// it. The same mask is then applied to any set passed to `transform`.
    pub fn fit(refs: &PointSet, shape: (usize, usize, usize), spec: WaveletSpec) -> Result<(Self, PointSet)> {
        let transformed = transform_rows(refs, shape, &spec)?;
        let mask = match spec.keep_top {
            None => None,
            Some(k) => {
                if k == 0 || k > refs.d() {
                    return Err(Error::argument(format!(
                        "keep_top {k} out of range 1..={}",
                        refs.d()
                    )));
                }
                let d = transformed.d();
                let mut mean_abs = vec![0.0f64; d];
                for row in transformed.rows() {
                    for (m, v) in mean_abs.iter_mut().zip(row) {
                        *m += v.abs();
                    }
                }
                let mut order: Vec<usize> = (0..d).collect();
                // descending magnitude, ties by lowest index
                order.sort_by(|&a, &b| {
                    mean_abs[b].partial_cmp(&mean_abs[a]).unwrap().then(a.cmp(&b))
                });
                let mut kept = order[..k].to_vec();
                kept.sort_unstable();
                Some(kept)
            }
        };
        let fitted = FittedWavelet { spec, shape, mask };
        let out = fitted.apply_mask(&transformed)?;
        Ok((fitted, out))
    }

    fn apply_mask(&self, transformed: &PointSet) -> Result<PointSet> {
        match &self.mask {
            None => Ok(transformed.clone()),
            Some(cols) => select_columns(transformed, cols),
        }
    }

    /// Transform a query set with the fitted spec (and mask, if any).
    pub fn transform(&self, ps: &PointSet) -> Result<PointSet> {
        let transformed = transform_rows(ps, self.shape, &self.spec)?;
        self.apply_mask(&transformed)
    }
}

/// Per-channel 2-D transform of every row, without any mask. For masked
/// pipelines use [`FittedWavelet::fit`] on the reference set first.
pub fn transform_pointset(
    ps: &PointSet,
    shape: (usize, usize, usize),
    spec: &WaveletSpec,
) -> Result<PointSet> {
    transform_rows(ps, shape, spec)
}
