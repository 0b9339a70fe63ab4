use crate::error::{Error, Result};

/// An n x d row-major matrix of points, optionally labeled.
///
/// Immutable after construction; shared freely across worker threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    n: usize,
    d: usize,
    labels: Option<Vec<u32>>,
    scale_hint: Option<f64>,
}

impl PointSet {
    pub fn new(data: Vec<f64>, n: usize, d: usize, labels: Option<Vec<u32>>) -> Result<Self> {
        if n < 1 || d < 1 {
            return Err(Error::argument(format!("need n >= 1 and d >= 1, got {n}x{d}")));
        }
        if data.len() != n * d {
            return Err(Error::argument(format!(
                "data length {} does not match {n}x{d}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::argument("non-finite entry in point data"));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::argument(format!(
                    "label count {} does not match n = {n}",
                    l.len()
                )));
            }
        }
        Ok(PointSet { data, n, d, labels, scale_hint: None })
    }

    pub fn with_scale_hint(mut self, hint: f64) -> Self {
        self.scale_hint = Some(hint);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn scale_hint(&self) -> Option<f64> {
        self.scale_hint
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    /// Largest Euclidean row norm; the "scale" used by solver tolerances.
    pub fn max_row_norm(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Select rows by index, preserving labels.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(Error::argument(format!("row index {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        let mut ps = PointSet::new(data, indices.len(), self.d, labels)?;
        ps.scale_hint = self.scale_hint;
        Ok(ps)
    }

    /// (min, max) over all entries.
    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}
