use rayon::prelude::*;

use super::{distance, distance2, PolygonalChain};
use crate::error::CurveError;
use crate::kdtree::KdTree;
use crate::sampler::PointCloud;

/// Tuning of [`build_chain_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    /// Local-averaging passes applied to the cloud before thinning.
    pub denoise_iterations: usize,
    /// Upper bound on tour-improvement sweeps.
    pub max_improvement_passes: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            denoise_iterations: 3,
            max_improvement_passes: 64,
        }
    }
}

/// Builds one closed polygonal chain through the cloud with default options.
pub fn build_chain(cloud: &PointCloud, radius: f64) -> Result<PolygonalChain, CurveError> {
    build_chain_with(cloud, radius, &ChainOptions::default())
}

/// Closed chain approximating the cloud at resolution `radius`.
///
/// 1. Denoise: each point moves to the centroid of its open `R`-ball,
///    repeated `denoise_iterations` times.
/// 2. Thin: farthest-point subsampling at spacing `R`, starting from the
///    lexicographically smallest denoised point.
/// 3. Order: nearest-neighbour tour, then 2-opt and segment-relocation
///    sweeps until no move shortens the tour.
/// 4. Close: tour edges longer than `2R` split it into chains. No long edge
///    gives a closed chain, one gives `NotClosed`, more give
///    `MultipleComponents`.
/// 5. Smooth: each node moves to the centroid of the original cloud points
///    whose nearest node it is.
pub fn build_chain_with(
    cloud: &PointCloud,
    radius: f64,
    options: &ChainOptions,
) -> Result<PolygonalChain, CurveError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CurveError::InvalidRadius(radius));
    }
    let dim = cloud.dim();
    if cloud.len() < 4 {
        return Err(CurveError::TooFewPoints(cloud.len()));
    }

    let mut denoised = cloud.coords().to_vec();
    for _ in 0..options.denoise_iterations {
        denoised = local_average(&denoised, dim, radius);
    }

    let candidates = farthest_point_sample(&denoised, dim, radius);
    if candidates.len() < 3 {
        return Err(CurveError::TooFewPoints(cloud.len()));
    }
    let nodes: Vec<f64> = candidates
        .iter()
        .flat_map(|&i| denoised[i * dim..(i + 1) * dim].iter().copied())
        .collect();

    let mut tour = nearest_neighbour_tour(&nodes, dim);
    improve_tour(&mut tour, &nodes, dim, options.max_improvement_passes);
    let mut nodes = nodes;
    fill_gaps(&mut tour, &mut nodes, cloud.coords(), dim, radius);

    let m = tour.len();
    let limit = 2.0 * radius;
    let long_edges: Vec<(usize, f64)> = (0..m)
        .map(|k| {
            let a = &nodes[tour[k] * dim..(tour[k] + 1) * dim];
            let b = &nodes[tour[(k + 1) % m] * dim..(tour[(k + 1) % m] + 1) * dim];
            (k, distance(a, b))
        })
        .filter(|&(_, len)| len > limit)
        .collect();
    log::debug!("{} nodes, long edges {:?}", m, long_edges);
    match long_edges.len() {
        0 => {}
        1 => {
            return Err(CurveError::NotClosed {
                gap: long_edges[0].1,
                limit,
            })
        }
        k => return Err(CurveError::MultipleComponents(k)),
    }

    // Start the cycle at the thinning seed, which is order independent.
    let start = tour.iter().position(|&i| i == 0).unwrap_or(0);
    tour.rotate_left(start);
    let ordered: Vec<f64> = tour
        .iter()
        .flat_map(|&i| nodes[i * dim..(i + 1) * dim].iter().copied())
        .collect();

    let smoothed = smooth_nodes(&ordered, dim, cloud);
    let distinct = drop_repeats(&smoothed, dim);
    if distinct.len() / dim < 3 {
        return Err(CurveError::TooFewPoints(cloud.len()));
    }
    PolygonalChain::closed_from_cycle(dim, &distinct)
}

fn local_average(coords: &[f64], dim: usize, radius: f64) -> Vec<f64> {
    let tree = KdTree::new(coords, dim);
    let mut out = vec![0.0; coords.len()];
    out.par_chunks_mut(dim).enumerate().for_each(|(i, target)| {
        let query = &coords[i * dim..(i + 1) * dim];
        let mut count = 0usize;
        tree.for_each_within_open(query, radius, |j, _| {
            count += 1;
            for (t, v) in target.iter_mut().zip(tree.point(j)) {
                *t += v;
            }
        });
        // The query point is always in its own open ball.
        for t in target.iter_mut() {
            *t /= count as f64;
        }
    });
    out
}

/// Indices of a farthest-point subsample: every point ends up within `R` of
/// a selected one and selected points are at least `R` apart.
fn farthest_point_sample(coords: &[f64], dim: usize, radius: f64) -> Vec<usize> {
    let n = coords.len() / dim;
    let point = |i: usize| &coords[i * dim..(i + 1) * dim];
    let first = (0..n)
        .min_by(|&a, &b| {
            point(a)
                .iter()
                .zip(point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        })
        .expect("non-empty cloud");
    let mut selected = vec![first];
    let mut nearest: Vec<f64> = (0..n).map(|i| distance2(point(i), point(first))).collect();
    let r2 = radius * radius;
    loop {
        let (far, far_d2) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d2)| {
                if d2 > best.1 {
                    (i, d2)
                } else {
                    best
                }
            });
        if far_d2 < r2 {
            break;
        }
        selected.push(far);
        let p = point(far);
        nearest.par_iter_mut().enumerate().for_each(|(i, d2)| {
            let candidate = distance2(&coords[i * dim..(i + 1) * dim], p);
            if candidate < *d2 {
                *d2 = candidate;
            }
        });
    }
    selected
}

/// Thinning leaves neighbouring nodes up to about `2R` apart, and on sparse
/// clouds the denoising passes pull points into clumps with wider gaps.
/// An edge longer than `2R` whose midpoint has an original cloud point
/// within `R` gets a new node at the centroid of the cloud points in that
/// ball. Edges across a true gap have no such point.
fn fill_gaps(tour: &mut Vec<usize>, nodes: &mut Vec<f64>, cloud: &[f64], dim: usize, radius: f64) {
    let tree = KdTree::new(cloud, dim);
    let limit = 2.0 * radius;
    let max_inserts = cloud.len() / dim;
    let mut mid = vec![0.0; dim];
    let mut centroid = vec![0.0; dim];
    let mut k = 0;
    let mut inserted = 0;
    while k < tour.len() && inserted < max_inserts {
        let m = tour.len();
        let (a, b) = (tour[k], tour[(k + 1) % m]);
        let pa = &nodes[a * dim..(a + 1) * dim];
        let pb = &nodes[b * dim..(b + 1) * dim];
        let len = distance(pa, pb);
        if len > limit {
            for (c, (x, y)) in mid.iter_mut().zip(pa.iter().zip(pb)) {
                *c = 0.5 * (x + y);
            }
            centroid.iter_mut().for_each(|c| *c = 0.0);
            let mut count = 0usize;
            tree.for_each_within_open(&mid, radius, |j, _| {
                count += 1;
                for (c, v) in centroid.iter_mut().zip(tree.point(j)) {
                    *c += v;
                }
            });
            if count > 0 {
                centroid.iter_mut().for_each(|c| *c /= count as f64);
                // Both halves are shorter than the edge since the centroid lies
                // within R of the midpoint.
                if distance(&centroid, pa) < len && distance(&centroid, pb) < len {
                    nodes.extend_from_slice(&centroid);
                    tour.insert(k + 1, nodes.len() / dim - 1);
                    inserted += 1;
                    continue;
                }
            }
        }
        k += 1;
    }
    if inserted > 0 {
        log::debug!("inserted {inserted} nodes into long edges");
    }
}

fn nearest_neighbour_tour(nodes: &[f64], dim: usize) -> Vec<usize> {
    let m = nodes.len() / dim;
    let node = |i: usize| &nodes[i * dim..(i + 1) * dim];
    let mut visited = vec![false; m];
    let mut tour = Vec::with_capacity(m);
    let mut current = 0;
    visited[0] = true;
    tour.push(0);
    for _ in 1..m {
        let next = (0..m)
            .filter(|&j| !visited[j])
            .min_by(|&a, &b| {
                distance2(node(current), node(a))
                    .total_cmp(&distance2(node(current), node(b)))
                    .then(a.cmp(&b))
            })
            .expect("unvisited node remains");
        visited[next] = true;
        tour.push(next);
        current = next;
    }
    tour
}

fn improve_tour(tour: &mut Vec<usize>, nodes: &[f64], dim: usize, max_passes: usize) {
    let dist = |a: usize, b: usize| distance(&nodes[a * dim..(a + 1) * dim], &nodes[b * dim..(b + 1) * dim]);
    let scale = tour
        .windows(2)
        .map(|w| dist(w[0], w[1]))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale;
    for _ in 0..max_passes {
        let a = two_opt_pass(tour, &dist, eps);
        let b = relocate_pass(tour, &dist, eps);
        if !a && !b {
            break;
        }
    }
}

fn two_opt_pass(tour: &mut [usize], dist: &impl Fn(usize, usize) -> f64, eps: f64) -> bool {
    let m = tour.len();
    if m < 4 {
        return false;
    }
    let mut improved = false;
    for i in 0..m - 2 {
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let (a, b) = (tour[i], tour[i + 1]);
            let (c, e) = (tour[j], tour[(j + 1) % m]);
            let delta = dist(a, c) + dist(b, e) - dist(a, b) - dist(c, e);
            if delta < -eps {
                tour[i + 1..=j].reverse();
                improved = true;
            }
        }
    }
    improved
}

/// Moves segments of one to three nodes to the cheapest other edge, in
/// either orientation.
fn relocate_pass(tour: &mut Vec<usize>, dist: &impl Fn(usize, usize) -> f64, eps: f64) -> bool {
    let mut improved = false;
    for len in 1..=3usize {
        let mut i = 0;
        while i < tour.len() {
            let m = tour.len();
            if m < len + 3 {
                return improved;
            }
            let seg: Vec<usize> = (0..len).map(|k| tour[(i + k) % m]).collect();
            let prev = tour[(i + m - 1) % m];
            let next = tour[(i + len) % m];
            let (s0, s1) = (seg[0], seg[len - 1]);
            let removal = dist(prev, s0) + dist(s1, next) - dist(prev, next);
            // Remaining cycle starting right after the segment.
            let rest: Vec<usize> = (0..m - len).map(|k| tour[(i + len + k) % m]).collect();
            let mut best: Option<(f64, usize, bool)> = None;
            for k in 0..rest.len() {
                let (u, v) = (rest[k], rest[(k + 1) % rest.len()]);
                if u == prev && v == next {
                    continue;
                }
                let base = dist(u, v);
                let fwd = dist(u, s0) + dist(s1, v) - base;
                let rev = dist(u, s1) + dist(s0, v) - base;
                let (cost, reversed) = if rev < fwd { (rev, true) } else { (fwd, false) };
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, k, reversed));
                }
            }
            if let Some((cost, k, reversed)) = best {
                if cost < removal - eps {
                    let mut rebuilt = Vec::with_capacity(m);
                    rebuilt.extend_from_slice(&rest[..=k]);
                    if reversed {
                        rebuilt.extend(seg.iter().rev());
                    } else {
                        rebuilt.extend_from_slice(&seg);
                    }
                    rebuilt.extend_from_slice(&rest[k + 1..]);
                    *tour = rebuilt;
                    improved = true;
                    continue;
                }
            }
            i += 1;
        }
    }
    improved
}

fn smooth_nodes(ordered: &[f64], dim: usize, cloud: &PointCloud) -> Vec<f64> {
    let m = ordered.len() / dim;
    let tree = KdTree::new(ordered, dim);
    let assignment: Vec<usize> = cloud
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| tree.nearest(p).expect("non-empty node set").0)
        .collect();
    let mut sums = vec![0.0; m * dim];
    let mut counts = vec![0usize; m];
    for (p, &node) in cloud.points().zip(&assignment) {
        counts[node] += 1;
        for (s, v) in sums[node * dim..(node + 1) * dim].iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut out = ordered.to_vec();
    for (i, &count) in counts.iter().enumerate() {
        if count > 0 {
            for k in 0..dim {
                out[i * dim + k] = sums[i * dim + k] / count as f64;
            }
        }
    }
    out
}

fn drop_repeats(coords: &[f64], dim: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(coords.len());
    for p in coords.chunks_exact(dim) {
        let repeated = out.len() >= dim && out[out.len() - dim..] == *p;
        if !repeated {
            out.extend_from_slice(p);
        }
    }
    while out.len() > dim && out[..dim] == out[out.len() - dim..] {
        out.truncate(out.len() - dim);
    }
    out
}
