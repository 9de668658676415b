//! Density of the cloud along the fitted curve and the time warp it induces.
//!
//! The PDF with respect to arc length is the cyclic linear interpolation of
//! neighbourhood counts taken at the chain nodes, normalized to unit mass.
//! Its CDF is piecewise quadratic and is inverted segment by segment in
//! closed form, which yields the warp `r` with `q̂(x) = q̂₁(L̂·r(x))` moving
//! through the curve at uniform time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{project_to_curve, ClosedCurve, PolygonalChain};
use crate::error::DensityError;
use crate::kdtree::KdTree;
use crate::sampler::PointCloud;

/// Default resolution of the tabulated warp.
pub const DEFAULT_WARP_GRID: usize = 4096;

/// Piecewise-linear PDF along arc length `[0, L̂)`, periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    /// Anchor arc lengths, increasing, first one at 0.
    anchors: Vec<f64>,
    counts: Vec<f64>,
    length: f64,
    /// Trapezoid mass of the interpolated counts, including the closing segment.
    normalizer: f64,
    /// Normalized CDF at each anchor, plus 1 at `L̂`.
    cdf_at_anchor: Vec<f64>,
}

impl DensityProfile {
    /// Profile from anchors in `[0, length)` (strictly increasing, starting at
    /// 0) and non-negative counts. The interpolation wraps from the last
    /// anchor to `length`, where it takes the first count again.
    pub fn from_counts(anchors: Vec<f64>, counts: Vec<f64>, length: f64) -> Result<Self, DensityError> {
        let invalid = |msg: &str| Err(DensityError::InvalidProfile(msg.to_string()));
        if anchors.len() != counts.len() || anchors.is_empty() {
            return invalid("anchors and counts must be non-empty and of equal length");
        }
        if !(length > 0.0 && length.is_finite()) {
            return invalid("length must be positive");
        }
        if anchors[0] != 0.0 {
            return invalid("first anchor must be at arc length 0");
        }
        if anchors.windows(2).any(|w| w[1] <= w[0]) || *anchors.last().unwrap() >= length {
            return invalid("anchors must increase strictly within [0, length)");
        }
        if counts.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return invalid("counts must be finite and non-negative");
        }
        let m = anchors.len();
        let mut cumulative = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..m {
            let (width, c0, c1) = segment(&anchors, &counts, length, i);
            acc += width * (c0 + c1) / 2.0;
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return invalid("total mass is zero");
        }
        let cdf_at_anchor = cumulative.iter().map(|c| c / acc).collect();
        Ok(Self {
            anchors,
            counts,
            length,
            normalizer: acc,
            cdf_at_anchor,
        })
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    fn locate(&self, u: f64) -> usize {
        match self.anchors.binary_search_by(|a| a.total_cmp(&u)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// PDF at arc length `u` (reduced modulo `L̂`).
    pub fn pdf(&self, u: f64) -> f64 {
        let u = u.rem_euclid(self.length);
        let i = self.locate(u);
        let (width, c0, c1) = segment(&self.anchors, &self.counts, self.length, i);
        let s = u - self.anchors[i];
        (c0 + (c1 - c0) * s / width) / self.normalizer
    }

    /// CDF on `[0, L̂]`; `cdf(0) = 0`, `cdf(L̂) = 1`.
    pub fn cdf(&self, u: f64) -> f64 {
        if u >= self.length {
            return 1.0;
        }
        if u <= 0.0 {
            return 0.0;
        }
        let i = self.locate(u);
        let (width, c0, c1) = segment(&self.anchors, &self.counts, self.length, i);
        let s = u - self.anchors[i];
        self.cdf_at_anchor[i] + (c0 * s + (c1 - c0) * s * s / (2.0 * width)) / self.normalizer
    }

    /// Smallest arc length `u` with `cdf(u) = x`, for `x ∈ [0, 1]`, solving
    /// the segment quadratic in closed form.
    pub fn inverse_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return self.length;
        }
        // First anchor whose CDF reaches x, minus one.
        let i = self.cdf_at_anchor.partition_point(|&c| c < x).saturating_sub(1);
        let i = i.min(self.anchors.len() - 1);
        let (width, c0, c1) = segment(&self.anchors, &self.counts, self.length, i);
        let target = (x - self.cdf_at_anchor[i]) * self.normalizer;
        let slope = (c1 - c0) / (2.0 * width);
        // slope s² + c0 s − target = 0, in the cancellation-free form.
        let disc = (c0 * c0 + 4.0 * slope * target).max(0.0);
        let denom = c0 + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * target / denom } else { 0.0 };
        (self.anchors[i] + s.clamp(0.0, width)).min(self.length)
    }

    /// Widest run of consecutive zero-mass segments, as a fraction of `L̂`.
    pub fn widest_plateau(&self) -> f64 {
        let m = self.anchors.len();
        let zero: Vec<bool> = (0..m)
            .map(|i| {
                let (_, c0, c1) = segment(&self.anchors, &self.counts, self.length, i);
                c0 == 0.0 && c1 == 0.0
            })
            .collect();
        let mut widest: f64 = 0.0;
        let mut run = 0.0;
        // Two sweeps so that runs crossing the wrap-around are measured whole.
        for k in 0..2 * m {
            let i = k % m;
            if zero[i] {
                run += segment(&self.anchors, &self.counts, self.length, i).0;
                widest = widest.max(run.min(self.length));
            } else {
                run = 0.0;
            }
        }
        widest / self.length
    }

    pub fn to_document(&self) -> DensityDocument {
        DensityDocument {
            anchors: self.anchors.clone(),
            counts: self.counts.clone(),
            length: self.length,
            normalizer: self.normalizer,
        }
    }
}

/// Width and end counts of segment `i`, wrapping the last one to `L̂`.
fn segment(anchors: &[f64], counts: &[f64], length: f64, i: usize) -> (f64, f64, f64) {
    let m = anchors.len();
    if i + 1 < m {
        (anchors[i + 1] - anchors[i], counts[i], counts[i + 1])
    } else {
        (length - anchors[i], counts[i], counts[0])
    }
}

/// Serialized profile for diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityDocument {
    pub anchors: Vec<f64>,
    pub counts: Vec<f64>,
    pub length: f64,
    pub normalizer: f64,
}

/// Counts cloud points within `radius` of every chain node and interpolates
/// them along the curve.
///
/// Anchors are the arc lengths of the chain nodes on `curve`; when the curve
/// was fitted to this chain those are the spline knots, otherwise each node
/// is projected onto the curve.
pub fn estimate_density(
    cloud: &PointCloud,
    curve: &ClosedCurve,
    chain: &PolygonalChain,
    radius: f64,
) -> Result<DensityProfile, DensityError> {
    let dim = chain.dim();
    let nodes = chain.distinct_coords();
    let m = nodes.len() / dim;
    let node = |i: usize| &nodes[i * dim..(i + 1) * dim];

    let fitted_to_chain = curve.node_count() == m && (0..m).all(|i| curve.node(i) == node(i));
    let anchors: Vec<f64> = if fitted_to_chain {
        curve.node_arc_lengths()
    } else {
        (0..m).map(|i| project_to_curve(curve, node(i))).collect()
    };

    let tree = KdTree::new(cloud.coords(), cloud.dim());
    let counts: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| tree.count_within(node(i), radius) as f64)
        .collect();
    if let Some(empty) = counts.iter().position(|&c| c == 0.0) {
        return Err(DensityError::EmptyNeighborhood(empty));
    }

    // Projected anchors may come out of order on a poorly fitting curve.
    let mut pairs: Vec<(f64, f64)> = anchors.into_iter().zip(counts).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.dedup_by(|b, a| b.0 == a.0);
    let shift = pairs[0].0;
    let (anchors, counts): (Vec<f64>, Vec<f64>) = pairs
        .into_iter()
        .map(|(u, c)| (u - shift, c))
        .unzip();
    if shift != 0.0 {
        log::debug!("density anchors shifted by {shift}");
    }
    DensityProfile::from_counts(anchors, counts, curve.length())
}

/// The curve traversed at uniform time: `q̂(x) = q̂₁(L̂·r(x))`, 1-periodic.
#[derive(Debug, Clone)]
pub struct UniformTimeCurve {
    base: ClosedCurve,
    profile: DensityProfile,
    warp_table: Vec<f64>,
}

/// Builds the warp `r(x) = cdf⁻¹(x)/L̂` and tabulates it on `grid` points.
pub fn invert_density(
    profile: &DensityProfile,
    curve: &ClosedCurve,
    grid: usize,
) -> Result<UniformTimeCurve, DensityError> {
    if grid < 2 {
        return Err(DensityError::InvalidProfile("warp grid needs at least 2 points".into()));
    }
    if (profile.length() - curve.length()).abs() > 1e-9 * curve.length() {
        return Err(DensityError::InvalidProfile(format!(
            "profile length {} does not match curve length {}",
            profile.length(),
            curve.length()
        )));
    }
    let width = profile.widest_plateau();
    let resolution = 1.0 / grid as f64;
    if width > resolution {
        return Err(DensityError::NonInvertible { width, resolution });
    }
    let warp_table = (0..=grid)
        .map(|j| profile.inverse_cdf(j as f64 / grid as f64) / profile.length())
        .collect();
    Ok(UniformTimeCurve {
        base: curve.clone(),
        profile: profile.clone(),
        warp_table,
    })
}

impl UniformTimeCurve {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &ClosedCurve {
        &self.base
    }

    pub fn profile(&self) -> &DensityProfile {
        &self.profile
    }

    /// `r` at the grid points `j/N`, `j = 0..=N`.
    pub fn warp_table(&self) -> &[f64] {
        &self.warp_table
    }

    /// The warp `r(x)`, extended by `r(x + 1) = r(x) + 1`.
    pub fn warp(&self, x: f64) -> f64 {
        let whole = x.floor();
        whole + self.profile.inverse_cdf(x - whole) / self.profile.length()
    }

    pub fn point_into(&self, x: f64, out: &mut [f64]) {
        let frac = x - x.floor();
        let u = self.profile.inverse_cdf(frac);
        self.base.point_into(u, out);
    }

    pub fn point(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(x, &mut out);
        out
    }

    /// `q̂` at `count` uniformly spaced `x = j/count`, flat.
    pub fn sample(&self, count: usize) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; count * dim];
        out.par_chunks_mut(dim).enumerate().for_each(|(j, chunk)| {
            self.point_into(j as f64 / count as f64, chunk);
        });
        out
    }

    /// The same curve with the base parametrization reversed, i.e. traversed
    /// backwards in time.
    pub fn time_reversed(&self) -> Self {
        let length = self.base.length();
        let chain = {
            let m = self.base.node_count();
            let flat: Vec<f64> = (0..m).flat_map(|i| self.base.node(i).to_vec()).collect();
            PolygonalChain::closed_from_cycle(self.dim(), &flat)
                .expect("curve nodes form a valid chain")
                .reversed()
        };
        let base = crate::curve::fit_closed_curve(&chain).expect("reversed chain is closed");
        let anchors = self.profile.anchors();
        let counts = self.profile.counts();
        let mut rev_anchors = vec![0.0];
        let mut rev_counts = vec![counts[0]];
        for i in (1..anchors.len()).rev() {
            rev_anchors.push(length - anchors[i]);
            rev_counts.push(counts[i]);
        }
        let scale = base.length() / length;
        let rev_anchors = rev_anchors.into_iter().map(|a| a * scale).collect();
        let profile = DensityProfile::from_counts(rev_anchors, rev_counts, base.length())
            .expect("reversed profile stays valid");
        invert_density(&profile, &base, self.warp_table.len() - 1)
            .expect("reversed profile stays invertible")
    }
}
