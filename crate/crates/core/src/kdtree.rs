//! Exact kd-tree over points of runtime dimension.
//!
//! Points are stored flat (`dim` coordinates per point). Queries are exact:
//! radius searches return every point with `‖p − q‖ ≤ r` (or `< r` for the
//! open variant) and nearest-neighbour ties resolve to the smallest index.

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    dim: usize,
    coords: &'a [f64],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    /// Builds a tree over `coords`, which holds `coords.len() / dim` points.
    pub fn new(coords: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        assert_eq!(coords.len() % dim, 0, "coordinate buffer is not a multiple of dim");
        let n = coords.len() / dim;
        let mut tree = Self {
            dim,
            coords,
            order: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
        };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let mid = start + (end - start) / 2;
        let (dim, coords) = (self.dim, self.coords);
        let key = |i: &usize| coords[i * dim + axis];
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
        let value = key(&self.order[mid]);
        self.nodes.push(Node::Split {
            axis,
            value,
            left: 0,
            right: 0,
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[id]
        {
            *l = left;
            *r = right;
        }
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for axis in 0..self.dim {
            let (lo, hi) = self.order[start..end].iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), &i| {
                    let v = self.coords[i * self.dim + axis];
                    (lo.min(v), hi.max(v))
                },
            );
            if hi - lo > best.1 {
                best = (axis, hi - lo);
            }
        }
        best.0
    }

    /// Calls `visit(index, squared_distance)` for each point within the
    /// closed ball of radius `radius` around `query`.
    pub fn for_each_within(&self, query: &[f64], radius: f64, mut visit: impl FnMut(usize, f64)) {
        if self.nodes.is_empty() {
            return;
        }
        let r2 = radius * radius;
        self.visit_ball(0, query, radius, &mut |i, d2| {
            if d2 <= r2 {
                visit(i, d2)
            }
        });
    }

    /// Like [`Self::for_each_within`] but for the open ball `‖p − q‖ < r`.
    pub fn for_each_within_open(
        &self,
        query: &[f64],
        radius: f64,
        mut visit: impl FnMut(usize, f64),
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let r2 = radius * radius;
        self.visit_ball(0, query, radius, &mut |i, d2| {
            if d2 < r2 {
                visit(i, d2)
            }
        });
    }

    pub fn count_within(&self, query: &[f64], radius: f64) -> usize {
        let mut count = 0;
        self.for_each_within(query, radius, |_, _| count += 1);
        count
    }

    fn visit_ball(&self, node: usize, query: &[f64], radius: f64, visit: &mut impl FnMut(usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    visit(i, self.dist2(i, query));
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[axis] - value;
                if delta <= radius {
                    self.visit_ball(left, query, radius, visit);
                }
                if delta >= -radius {
                    self.visit_ball(right, query, radius, visit);
                }
            }
        }
    }

    /// Index and squared distance of the nearest point; `None` on an empty tree.
    pub fn nearest(&self, query: &[f64]) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_in(0, query, &mut best);
        Some(best)
    }

    fn nearest_in(&self, node: usize, query: &[f64], best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = self.dist2(i, query);
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[axis] - value;
                let (near, far) = if delta <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_in(near, query, best);
                if delta * delta <= best.1 {
                    self.nearest_in(far, query, best);
                }
            }
        }
    }

    fn dist2(&self, i: usize, query: &[f64]) -> f64 {
        self.point(i)
            .iter()
            .zip(query)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_nearest(coords: &[f64], dim: usize, q: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in coords.chunks(dim).enumerate() {
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        best
    }

    #[test]
    fn empty_tree() {
        let tree = KdTree::new(&[], 3);
        assert!(tree.nearest(&[0.0, 0.0, 0.0]).is_none());
        assert_eq!(tree.count_within(&[0.0, 0.0, 0.0], 1.0), 0);
    }

    #[test]
    fn closed_and_open_balls_differ_on_boundary() {
        let coords = [0.0, 0.0, 2.0, 0.0];
        let tree = KdTree::new(&coords, 2);
        assert_eq!(tree.count_within(&[0.0, 0.0], 2.0), 2);
        let mut open = 0;
        tree.for_each_within_open(&[0.0, 0.0], 2.0, |_, _| open += 1);
        assert_eq!(open, 1);
    }

    proptest! {
        #[test]
        fn queries_match_brute_force(
            pts in prop::collection::vec(-10.0f64..10.0, 3..600),
            q in prop::collection::vec(-10.0f64..10.0, 3),
            r in 0.0f64..6.0,
        ) {
            let dim = 3;
            let n = pts.len() / dim;
            let coords = &pts[..n * dim];
            let tree = KdTree::new(coords, dim);
            let (bi, bd) = brute_nearest(coords, dim, &q);
            let (ti, td) = tree.nearest(&q).unwrap();
            prop_assert_eq!(bd, td);
            prop_assert_eq!(bi, ti);
            let brute = coords.chunks(dim)
                .filter(|p| p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r * r)
                .count();
            prop_assert_eq!(tree.count_within(&q, r), brute);
        }
    }
}
