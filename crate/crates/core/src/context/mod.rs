//! Context space, its uniform grid partition and the per-cell estimators.
//!
//! A context is a point of `[0, 1]^D`. The partition splits every axis into
//! `h_T` equal half-open intervals; the last interval on each axis is closed so
//! that `1.0` belongs to a cell and the cube is tiled exactly.

mod estimator;
mod explore;
mod schedule;

pub use estimator::{EstimatorEntry, EstimatorSnapshotRow, EstimatorTable};
pub use explore::{under_explored, UnderExplored};
pub use schedule::ExplorationSchedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension used when none is configured: normalized downlink rate and compute.
pub const DEFAULT_CONTEXT_DIM: usize = 2;

/// A normalized context, one coordinate per feature, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextVector(Vec<f64>);

impl ContextVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput(
                "context vector must be non-empty".into(),
            ));
        }
        for (index, &value) in coords.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ContextOutOfRange { index, value });
            }
        }
        Ok(Self(coords))
    }

    /// Builds a context by clamping each coordinate into `[0, 1]`. NaN maps to 0.
    pub fn clamped(coords: impl IntoIterator<Item = f64>) -> Self {
        Self(
            coords
                .into_iter()
                .map(|c| if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn distance(&self, other: &ContextVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Grid cell coordinates, one index per axis, each in `[0, h_T)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HypercubeId(Vec<u32>);

impl HypercubeId {
    pub fn new(indices: Vec<u32>) -> Self {
        Self(indices)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }
}

/// Uniform partition of `[0, 1]^D` into `h_T^D` hypercubes of side `1 / h_T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    cells_per_axis: u32,
    dim: usize,
}

impl Partition {
    pub fn new(cells_per_axis: u32, dim: usize) -> Result<Self> {
        if cells_per_axis == 0 {
            return Err(Error::InvalidPartition("h_T must be >= 1".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidPartition(
                "context dimension must be >= 1".into(),
            ));
        }
        Ok(Self {
            cells_per_axis,
            dim,
        })
    }

    pub fn cells_per_axis(&self) -> u32 {
        self.cells_per_axis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side_length(&self) -> f64 {
        1.0 / f64::from(self.cells_per_axis)
    }

    pub fn cell_count(&self) -> u64 {
        u64::from(self.cells_per_axis).pow(self.dim as u32)
    }

    /// Returns the cell containing `phi`.
    pub fn locate(&self, phi: &ContextVector) -> Result<HypercubeId> {
        if phi.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: phi.dim(),
            });
        }
        let h = self.cells_per_axis;
        let mut indices = Vec::with_capacity(self.dim);
        for (index, &value) in phi.coords().iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ContextOutOfRange { index, value });
            }
            let k = (value * f64::from(h)).floor() as u32;
            indices.push(k.min(h - 1));
        }
        Ok(HypercubeId(indices))
    }

    /// Row-major linear index of a cell, useful for dense histograms.
    pub fn linear_index(&self, cell: &HypercubeId) -> u64 {
        cell.0.iter().fold(0u64, |acc, &k| {
            acc * u64::from(self.cells_per_axis) + u64::from(k)
        })
    }

    /// Lower and upper corner of a cell along one axis.
    pub fn cell_bounds(&self, cell: &HypercubeId, axis: usize) -> (f64, f64) {
        let side = self.side_length();
        let k = f64::from(cell.0[axis]);
        (k * side, (k + 1.0) * side)
    }
}

/// Convenience wrapper around [`Partition::new`].
pub fn build_partition(cells_per_axis: u32, dim: usize) -> Result<Partition> {
    Partition::new(cells_per_axis, dim)
}
