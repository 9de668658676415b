//! Approximation of a point cloud by one closed smooth curve.
//!
//! [`build_chain`] turns the cloud into a closed polygonal chain,
//! [`fit_closed_curve`] interpolates the chain nodes with a periodic cubic
//! spline and reparametrizes it by arc length.

mod chain;
mod spline;

pub use chain::{build_chain, build_chain_with, ChainOptions};
pub use spline::{fit_closed_curve, project_to_curve, ClosedCurve, CurveDocument, ARC_SAMPLES_PER_SEGMENT};

use serde::{Deserialize, Serialize};

use crate::error::CurveError;

/// Ordered chain nodes in `R^d`. A closed chain repeats its first node at
/// the end.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalChain {
    dim: usize,
    nodes: Vec<f64>,
    closed: bool,
}

impl PolygonalChain {
    /// Wraps `nodes` (flat, `dim` per node). The chain is closed iff the first
    /// and last nodes are bitwise equal.
    pub fn new(dim: usize, nodes: Vec<f64>) -> Result<Self, CurveError> {
        assert!(dim > 0 && nodes.len().is_multiple_of(dim), "malformed node buffer");
        let m = nodes.len() / dim;
        if m < 2 {
            return Err(CurveError::ChainTooShort(m));
        }
        for i in 1..m {
            if nodes[(i - 1) * dim..i * dim] == nodes[i * dim..(i + 1) * dim] {
                return Err(CurveError::RepeatedNode(i));
            }
        }
        let closed = nodes[..dim] == nodes[(m - 1) * dim..];
        Ok(Self { dim, nodes, closed })
    }

    /// Closed chain through `distinct` (flat) with the first node appended.
    pub fn closed_from_cycle(dim: usize, distinct: &[f64]) -> Result<Self, CurveError> {
        let mut nodes = distinct.to_vec();
        nodes.extend_from_slice(&distinct[..dim]);
        Self::new(dim, nodes)
    }

    pub fn from_nodes(nodes: &[Vec<f64>]) -> Result<Self, CurveError> {
        let dim = nodes.first().map(Vec::len).ok_or(CurveError::ChainTooShort(0))?;
        let flat: Vec<f64> = nodes.iter().flat_map(|n| n.iter().copied()).collect();
        Self::new(dim, flat)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Node count `M`, counting the repeated closing node.
    pub fn len(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    /// Distinct nodes of a closed chain (all nodes of an open one), flat.
    pub fn distinct_coords(&self) -> &[f64] {
        if self.closed {
            &self.nodes[..self.nodes.len() - self.dim]
        } else {
            &self.nodes
        }
    }

    /// The same chain traversed backwards from the same first node.
    pub fn reversed(&self) -> Self {
        let d = self.dim;
        let distinct = self.distinct_coords();
        let m = distinct.len() / d;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        nodes.extend_from_slice(&distinct[..d]);
        for i in (1..m).rev() {
            nodes.extend_from_slice(&distinct[i * d..(i + 1) * d]);
        }
        if self.closed {
            nodes.extend_from_slice(&distinct[..d]);
        }
        Self {
            dim: d,
            nodes,
            closed: self.closed,
        }
    }

    /// Lengths of consecutive segments.
    pub fn segment_lengths(&self) -> Vec<f64> {
        self.nodes()
            .zip(self.nodes().skip(1))
            .map(|(a, b)| distance(a, b))
            .collect()
    }

    pub fn to_document(&self) -> ChainDocument {
        ChainDocument {
            dim: self.dim,
            closed: self.closed,
            nodes: self.nodes().map(<[f64]>::to_vec).collect(),
        }
    }
}

/// Serialized chain: ordered node list and closed flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainDocument {
    pub dim: usize,
    pub closed: bool,
    pub nodes: Vec<Vec<f64>>,
}

impl TryFrom<ChainDocument> for PolygonalChain {
    type Error = CurveError;

    fn try_from(doc: ChainDocument) -> Result<Self, Self::Error> {
        Self::from_nodes(&doc.nodes)
    }
}

pub(crate) fn distance2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    distance2(a, b).sqrt()
}
