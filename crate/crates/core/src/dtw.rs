//! Dynamic time warping between two planar segments and the follow score
//! derived from the optimal warping path.

use serde::{Deserialize, Serialize};

use crate::data::Point;
use crate::error::{Error, Result};

/// Point-to-point distance used inside the DTW recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Kernel {
    #[default]
    Euclidean,
    WeightedEuclidean { wx: f64, wy: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(self, a: Point, b: Point) -> f64 {
        let (dx, dy) = (a.x - b.x, a.y - b.y);
        match self {
            Kernel::Euclidean => (dx * dx + dy * dy).sqrt(),
            Kernel::WeightedEuclidean { wx, wy } => (wx * dx * dx + wy * dy * dy).sqrt(),
        }
    }
}

/// Optimal alignment of `p[i]` with `q[j]`, from `(0, 0)` to `(L-1, L-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingPath {
    pub pairs: Vec<(usize, usize)>,
    /// Accumulated kernel cost along the path.
    pub cost: f64,
}

impl WarpingPath {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The same alignment with the roles of the two series swapped.
    pub fn transposed(&self) -> WarpingPath {
        WarpingPath {
            pairs: self.pairs.iter().map(|&(i, j)| (j, i)).collect(),
            cost: self.cost,
        }
    }
}

/// Mean sign of the index offset along a warping path, in `[-1, 1]`.
///
/// Positive values mean the second series lags the first.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FollowScore(pub f64);

impl FollowScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn follow_score(path: &WarpingPath) -> FollowScore {
    if path.pairs.is_empty() {
        return FollowScore(0.0);
    }
    let total: i64 = path
        .pairs
        .iter()
        .map(|&(i, j)| (j as i64 - i as i64).signum())
        .sum();
    FollowScore(total as f64 / path.pairs.len() as f64)
}

/// Reusable cost matrix so repeated alignments of equal-size windows do not
/// reallocate.
#[derive(Debug, Default, Clone)]
pub struct DtwBuffer {
    cost: Vec<f64>,
}

impl DtwBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unconstrained DTW; see [`DtwBuffer::path_banded`].
    pub fn path(&mut self, p: &[Point], q: &[Point], kernel: Kernel) -> Result<WarpingPath> {
        self.path_banded(p, q, kernel, None)
    }

    /// DTW restricted to `|i - j| <= band` when a band radius is given.
    ///
    /// Backtrace ties prefer the diagonal step, then `(i-1, j)`, then `(i, j-1)`.
    pub fn path_banded(
        &mut self,
        p: &[Point],
        q: &[Point],
        kernel: Kernel,
        band: Option<usize>,
    ) -> Result<WarpingPath> {
        if p.is_empty() || q.is_empty() {
            return Err(Error::EmptySegment);
        }
        if p.len() != q.len() {
            return Err(Error::SegmentLengthMismatch(p.len(), q.len()));
        }
        let n = p.len();
        let band = band.unwrap_or(n);
        self.cost.clear();
        self.cost.resize(n * n, f64::INFINITY);
        let c = &mut self.cost;

        for i in 0..n {
            let lo = i.saturating_sub(band);
            let hi = (i + band).min(n - 1);
            for j in lo..=hi {
                let d = kernel.eval(p[i], q[j]);
                let best = if i == 0 && j == 0 {
                    0.0
                } else {
                    let diag = if i > 0 && j > 0 { c[(i - 1) * n + j - 1] } else { f64::INFINITY };
                    let up = if i > 0 { c[(i - 1) * n + j] } else { f64::INFINITY };
                    let left = if j > 0 { c[i * n + j - 1] } else { f64::INFINITY };
                    diag.min(up).min(left)
                };
                c[i * n + j] = d + best;
            }
        }

        let mut pairs = Vec::with_capacity(2 * n);
        let (mut i, mut j) = (n - 1, n - 1);
        pairs.push((i, j));
        while i > 0 || j > 0 {
            if i == 0 {
                j -= 1;
            } else if j == 0 {
                i -= 1;
            } else {
                let diag = c[(i - 1) * n + j - 1];
                let up = c[(i - 1) * n + j];
                let left = c[i * n + j - 1];
                if diag <= up && diag <= left {
                    i -= 1;
                    j -= 1;
                } else if up <= left {
                    i -= 1;
                } else {
                    j -= 1;
                }
            }
            pairs.push((i, j));
        }
        pairs.reverse();
        Ok(WarpingPath {
            pairs,
            cost: c[n * n - 1],
        })
    }
}

/// One-shot DTW alignment of two equal-length segments.
pub fn dtw_path(p: &[Point], q: &[Point], kernel: Kernel) -> Result<WarpingPath> {
    DtwBuffer::new().path(p, q, kernel)
}
