//! Row-major point collections shared by the sampling, design-criteria and
//! optimizer modules.

use crate::scalar::Scalar;

/// A set of `d`-dimensional points stored row-major, one point per row.
///
/// Rows are exposed as contiguous slices, which keeps kernel evaluation over
/// large search sets allocation-free.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<S> {
    data: Vec<S>,
    dim: usize,
}

impl<S: Scalar> PointSet<S> {
    pub fn empty(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self { data: Vec::new(), dim }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let dim = rows.first().map_or(1, Vec::len);
        let mut set = Self::empty(dim);
        for row in rows {
            set.push(row);
        }
        set
    }

    /// Builds an `n × dim` set from a flat row-major buffer.
    pub fn from_flat(data: Vec<S>, dim: usize) -> Self {
        assert!(
            dim >= 1 && data.len().is_multiple_of(dim),
            "flat buffer not a multiple of dim"
        );
        Self { data, dim }
    }

    pub fn push(&mut self, point: &[S]) {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        self.data.extend_from_slice(point);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[S] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[S]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Returns a copy with `rows` appended (used when conditioning a model on
    /// extra locations).
    pub fn with_appended(&self, rows: &PointSet<S>) -> Self {
        assert_eq!(self.dim, rows.dim);
        let mut out = self.clone();
        out.data.extend_from_slice(&rows.data);
        out
    }

    /// Euclidean distance between two stored points.
    pub fn distance(&self, i: usize, j: usize) -> S {
        dist(self.point(i), self.point(j))
    }

    /// Smallest pairwise distance; `None` for fewer than two points.
    pub fn min_pairwise_distance(&self) -> Option<S> {
        let n = self.len();
        if n < 2 {
            return None;
        }
        let mut best = S::of(f64::INFINITY);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.distance(i, j);
                if d < best {
                    best = d;
                }
            }
        }
        Some(best)
    }

    /// True when `point` lies within `tol` (Euclidean) of any stored row.
    pub fn contains_within(&self, point: &[S], tol: S) -> bool {
        self.iter().any(|row| dist(row, point) <= tol)
    }
}

/// Euclidean distance between two slices of equal length.
pub fn dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Training data for the emulator: input points paired with observed outputs.
#[derive(Debug, Clone)]
pub struct DesignSet<S> {
    pub inputs: PointSet<S>,
    pub outputs: Vec<S>,
}

impl<S: Scalar> DesignSet<S> {
    pub fn new(inputs: PointSet<S>, outputs: Vec<S>) -> Self {
        assert_eq!(inputs.len(), outputs.len(), "inputs/outputs length mismatch");
        Self { inputs, outputs }
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.dim()
    }

    pub fn push(&mut self, point: &[S], output: S) {
        self.inputs.push(point);
        self.outputs.push(output);
    }
}
