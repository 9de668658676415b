use serde::{Deserialize, Serialize};

use super::{distance, distance2, PolygonalChain};
use crate::error::CurveError;

/// Simpson sub-intervals per spline segment in the arc-length table.
pub const ARC_SAMPLES_PER_SEGMENT: usize = 16;

/// Periodic cubic spline through the nodes of a closed chain, reparametrized
/// by arc length: `point(u)` moves at unit speed, is `length()`-periodic and
/// `point(0)` is the chain's first node.
#[derive(Debug, Clone)]
pub struct ClosedCurve {
    dim: usize,
    /// Distinct nodes, flat.
    nodes: Vec<f64>,
    /// Chord-length knots, `m + 1` values from 0 to the spline period.
    knots: Vec<f64>,
    /// Per segment and coordinate: `y + b s + c s² + e s³` in the local offset `s`.
    coeffs: Vec<[f64; 4]>,
    table_params: Vec<f64>,
    table_arcs: Vec<f64>,
    /// Curve points at `table_params` (without the closing duplicate).
    table_points: Vec<f64>,
    length: f64,
}

/// Interpolates a closed chain with a periodic cubic spline (chord-length
/// knots) and builds the arc-length lookup.
pub fn fit_closed_curve(chain: &PolygonalChain) -> Result<ClosedCurve, CurveError> {
    if !chain.is_closed() {
        return Err(CurveError::ChainNotClosed);
    }
    if chain.len() < 4 {
        return Err(CurveError::ChainTooShort(chain.len()));
    }
    let dim = chain.dim();
    let nodes = chain.distinct_coords().to_vec();
    let m = nodes.len() / dim;
    let node = |i: usize| &nodes[(i % m) * dim..(i % m + 1) * dim];

    let mut knots = Vec::with_capacity(m + 1);
    knots.push(0.0);
    for i in 0..m {
        let h = distance(node(i), node(i + 1));
        knots.push(knots[i] + h);
    }
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();

    // Cyclic system for the second derivatives, shared by all coordinates.
    let sub: Vec<f64> = (0..m).map(|i| h[(i + m - 1) % m]).collect();
    let diag: Vec<f64> = (0..m).map(|i| 2.0 * (h[(i + m - 1) % m] + h[i])).collect();
    let sup: Vec<f64> = h.clone();
    let solver = CyclicTridiagonal::new(&sub, &diag, &sup);

    let mut coeffs = vec![[0.0; 4]; m * dim];
    for k in 0..dim {
        let y = |i: usize| node(i)[k];
        let rhs: Vec<f64> = (0..m)
            .map(|i| {
                let prev = (i + m - 1) % m;
                6.0 * ((y(i + 1) - y(i)) / h[i] - (y(i) - y(prev)) / h[prev])
            })
            .collect();
        let second = solver.solve(&rhs);
        for i in 0..m {
            let (m0, m1) = (second[i], second[(i + 1) % m]);
            let hi = h[i];
            coeffs[i * dim + k] = [
                y(i),
                (y(i + 1) - y(i)) / hi - hi * (2.0 * m0 + m1) / 6.0,
                m0 / 2.0,
                (m1 - m0) / (6.0 * hi),
            ];
        }
    }

    let mut curve = ClosedCurve {
        dim,
        nodes,
        knots,
        coeffs,
        table_params: Vec::new(),
        table_arcs: Vec::new(),
        table_points: Vec::new(),
        length: 0.0,
    };
    curve.build_arc_table();
    Ok(curve)
}

/// Arc length of the curve point closest to `point`.
pub fn project_to_curve(curve: &ClosedCurve, point: &[f64]) -> f64 {
    curve.project(point)
}

impl ClosedCurve {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total length `L̂`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of distinct interpolated nodes.
    pub fn node_count(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    /// Arc length at each distinct node; the first is 0.
    pub fn node_arc_lengths(&self) -> Vec<f64> {
        (0..self.node_count())
            .map(|i| self.table_arcs[i * ARC_SAMPLES_PER_SEGMENT])
            .collect()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn period(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    fn segment_of(&self, p: f64) -> (usize, f64) {
        let m = self.node_count();
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&p)) {
            Ok(i) => i.min(m - 1),
            Err(i) => i.saturating_sub(1).min(m - 1),
        };
        (i, p - self.knots[i])
    }

    fn eval_param(&self, p: f64, out: &mut [f64]) {
        let (seg, s) = self.segment_of(p.rem_euclid(self.period()));
        for (k, v) in out.iter_mut().enumerate() {
            let [y, b, c, e] = self.coeffs[seg * self.dim + k];
            *v = y + s * (b + s * (c + s * e));
        }
    }

    fn derivative_param(&self, p: f64, out: &mut [f64]) {
        let (seg, s) = self.segment_of(p.rem_euclid(self.period()));
        for (k, v) in out.iter_mut().enumerate() {
            let [_, b, c, e] = self.coeffs[seg * self.dim + k];
            *v = b + s * (2.0 * c + 3.0 * e * s);
        }
    }

    fn speed(&self, p: f64) -> f64 {
        let (seg, s) = self.segment_of(p.rem_euclid(self.period()));
        (0..self.dim)
            .map(|k| {
                let [_, b, c, e] = self.coeffs[seg * self.dim + k];
                let v = b + s * (2.0 * c + 3.0 * e * s);
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    fn simpson(&self, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (self.speed(a) + 4.0 * self.speed(0.5 * (a + b)) + self.speed(b))
    }

    fn build_arc_table(&mut self) {
        let m = self.node_count();
        let total = m * ARC_SAMPLES_PER_SEGMENT;
        let mut params = Vec::with_capacity(total + 1);
        let mut arcs = Vec::with_capacity(total + 1);
        let mut acc = 0.0;
        for i in 0..m {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            for j in 0..ARC_SAMPLES_PER_SEGMENT {
                let p0 = a + (b - a) * j as f64 / ARC_SAMPLES_PER_SEGMENT as f64;
                let p1 = a + (b - a) * (j + 1) as f64 / ARC_SAMPLES_PER_SEGMENT as f64;
                params.push(p0);
                arcs.push(acc);
                acc += self.simpson(p0, p1);
            }
        }
        params.push(self.period());
        arcs.push(acc);
        let mut points = vec![0.0; total * self.dim];
        for (j, chunk) in points.chunks_exact_mut(self.dim).enumerate() {
            self.eval_param(params[j], chunk);
        }
        self.table_params = params;
        self.table_arcs = arcs;
        self.table_points = points;
        self.length = acc;
    }

    /// Spline parameter at arc length `u` (any real; reduced modulo `L̂`).
    ///
    /// Piecewise-linear lookup in the Simpson table followed by two Newton
    /// steps on the local arc-length integral.
    pub fn param_at(&self, u: f64) -> f64 {
        let u = u.rem_euclid(self.length);
        let j = match self.table_arcs.binary_search_by(|a| a.total_cmp(&u)) {
            Ok(j) => j,
            Err(j) => j - 1,
        }
        .min(self.table_arcs.len() - 2);
        let (a0, a1) = (self.table_arcs[j], self.table_arcs[j + 1]);
        let (p0, p1) = (self.table_params[j], self.table_params[j + 1]);
        let mut p = if a1 > a0 {
            p0 + (p1 - p0) * (u - a0) / (a1 - a0)
        } else {
            p0
        };
        for _ in 0..2 {
            let residual = a0 + self.simpson(p0, p) - u;
            let speed = self.speed(p);
            if speed <= 0.0 {
                break;
            }
            p = (p - residual / speed).clamp(p0, p1);
        }
        p
    }

    /// `q̂₁(u)` written into `out`.
    pub fn point_into(&self, u: f64, out: &mut [f64]) {
        self.eval_param(self.param_at(u), out);
    }

    pub fn point(&self, u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.point_into(u, &mut out);
        out
    }

    /// Unit tangent at arc length `u`.
    pub fn tangent(&self, u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.derivative_param(self.param_at(u), &mut out);
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        out.iter_mut().for_each(|v| *v /= norm);
        out
    }

    /// Arc length of the nearest curve point: scan of the dense table, then
    /// golden-section refinement between the neighbouring table entries.
    pub fn project(&self, point: &[f64]) -> f64 {
        let count = self.table_points.len() / self.dim;
        let best = (0..count)
            .map(|j| (j, distance2(&self.table_points[j * self.dim..(j + 1) * self.dim], point)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
            .0;
        let arc = |j: isize| -> f64 {
            let jj = j.rem_euclid(count as isize) as usize;
            let wraps = j.div_euclid(count as isize) as f64;
            self.table_arcs[jj] + wraps * self.length
        };
        let mut lo = arc(best as isize - 1);
        let mut hi = arc(best as isize + 1);
        let mut buf = vec![0.0; self.dim];
        let mut cost = |u: f64| {
            self.point_into(u, &mut buf);
            distance2(&buf, point)
        };
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = cost(x1);
        let mut f2 = cost(x2);
        while hi - lo > 1e-13 * self.length.max(1.0) {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = cost(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = cost(x2);
            }
        }
        let u = (0.5 * (lo + hi)).rem_euclid(self.length);
        if self.length - u < 1e-12 * self.length {
            0.0
        } else {
            u
        }
    }

    pub fn to_document(&self) -> CurveDocument {
        CurveDocument {
            dim: self.dim,
            closed: true,
            nodes: self.nodes.chunks_exact(self.dim).map(<[f64]>::to_vec).collect(),
            knots: self.knots.clone(),
            length: self.length,
        }
    }
}

/// Serialized curve: nodes, spline knots and arc length. The spline itself is
/// rebuilt from the nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveDocument {
    pub dim: usize,
    pub closed: bool,
    pub nodes: Vec<Vec<f64>>,
    pub knots: Vec<f64>,
    pub length: f64,
}

impl TryFrom<CurveDocument> for ClosedCurve {
    type Error = CurveError;

    fn try_from(doc: CurveDocument) -> Result<Self, Self::Error> {
        let flat: Vec<f64> = doc.nodes.iter().flatten().copied().collect();
        let chain = PolygonalChain::closed_from_cycle(doc.dim, &flat)?;
        fit_closed_curve(&chain)
    }
}

/// Sherman–Morrison solver for tridiagonal systems with corner entries
/// `A[0][n-1] = sub[0]` and `A[n-1][0] = sup[n-1]`.
struct CyclicTridiagonal {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    gamma: f64,
    top_right: f64,
    z: Vec<f64>,
}

impl CyclicTridiagonal {
    fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let top_right = sub[0];
        let bottom_left = sup[n - 1];
        let gamma = -diag[0];
        let mut modified = diag.to_vec();
        modified[0] -= gamma;
        modified[n - 1] -= bottom_left * top_right / gamma;
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = bottom_left;
        let z = thomas(sub, &modified, sup, &u);
        Self {
            sub: sub.to_vec(),
            diag: modified,
            sup: sup.to_vec(),
            gamma,
            top_right,
            z,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let y = thomas(&self.sub, &self.diag, &self.sup, rhs);
        let v_dot = |x: &[f64]| x[0] + self.top_right / self.gamma * x[n - 1];
        let factor = v_dot(&y) / (1.0 + v_dot(&self.z));
        y.iter().zip(&self.z).map(|(yi, zi)| yi - factor * zi).collect()
    }
}

/// Tridiagonal solve; `sub[0]` and `sup[n-1]` are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn polygon(m: usize, radius: f64) -> PolygonalChain {
        let flat: Vec<f64> = (0..m)
            .flat_map(|i| {
                let a = TAU * i as f64 / m as f64;
                [radius * a.cos(), radius * a.sin()]
            })
            .collect();
        PolygonalChain::closed_from_cycle(2, &flat).unwrap()
    }

    fn square() -> PolygonalChain {
        PolygonalChain::closed_from_cycle(2, &[1.0, 1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0])
            .unwrap()
    }

    /// Arc length by dense polyline sampling of the spline parameter, an
    /// oracle independent of the Simpson table.
    fn polyline_length(curve: &ClosedCurve, samples: usize) -> f64 {
        let period = curve.period();
        let mut prev = vec![0.0; curve.dim];
        let mut cur = vec![0.0; curve.dim];
        curve.eval_param(0.0, &mut prev);
        let mut total = 0.0;
        for j in 1..=samples {
            curve.eval_param(period * j as f64 / samples as f64, &mut cur);
            total += distance(&prev, &cur);
            std::mem::swap(&mut prev, &mut cur);
        }
        total
    }

    #[test]
    fn cyclic_solver_matches_dense_product() {
        let sub = [0.5, 1.0, 0.2, 0.7, 0.3];
        let diag = [4.0, 5.0, 3.0, 4.5, 6.0];
        let sup = [1.0, 0.4, 0.9, 0.6, 0.8];
        let rhs = [1.0, -2.0, 0.5, 3.0, -1.0];
        let x = CyclicTridiagonal::new(&sub, &diag, &sup).solve(&rhs);
        let n = 5;
        for i in 0..n {
            let mut acc = diag[i] * x[i];
            acc += sub[i] * x[(i + n - 1) % n];
            acc += sup[i] * x[(i + 1) % n];
            assert!((acc - rhs[i]).abs() < 1e-12, "row {i}: {acc}");
        }
    }

    #[test]
    fn spline_interpolates_nodes() {
        let chain = polygon(17, 2.0);
        let curve = fit_closed_curve(&chain).unwrap();
        for (i, u) in curve.node_arc_lengths().into_iter().enumerate() {
            let p = curve.point(u);
            assert!(distance(&p, chain.node(i)) < 1e-9);
        }
        assert_eq!(curve.point(0.0), chain.node(0));
    }

    #[test]
    fn square_length_between_perimeter_and_bound() {
        let curve = fit_closed_curve(&square()).unwrap();
        let oracle = polyline_length(&curve, 200_000);
        assert!((curve.length() - oracle).abs() < 1e-5, "{} vs {oracle}", curve.length());
        // Between the perimeter and the circumscribed circle.
        assert!(curve.length() > 8.0 && curve.length() < TAU * 2f64.sqrt(), "{}", curve.length());
    }

    #[test]
    fn regular_polygon_length_near_circumference() {
        let curve = fit_closed_curve(&polygon(64, 1.0)).unwrap();
        assert!((curve.length() - TAU).abs() < 0.01);
        assert!((curve.length() - polyline_length(&curve, 200_000)).abs() < 1e-6);
    }

    #[test]
    fn unit_speed_and_periodicity() {
        let curve = fit_closed_curve(&square()).unwrap();
        let l = curve.length();
        let h = 1e-6;
        for j in 0..1000 {
            let u = l * (j as f64 + 0.37) / 1000.0;
            let a = curve.point(u - h);
            let b = curve.point(u + h);
            let speed = distance(&a, &b) / (2.0 * h);
            assert!((speed - 1.0).abs() < 1e-3, "u={u} speed={speed}");
            let p = curve.point(u);
            let q = curve.point(u + l);
            assert!(distance(&p, &q) < 1e-9);
        }
    }

    #[test]
    fn chord_never_exceeds_arc() {
        let curve = fit_closed_curve(&polygon(9, 1.5)).unwrap();
        let l = curve.length();
        for i in 0..60 {
            for j in i + 1..60 {
                let (u1, u2) = (l * i as f64 / 60.0, l * j as f64 / 60.0);
                let chord = distance(&curve.point(u1), &curve.point(u2));
                assert!(chord <= u2 - u1 + 1e-9);
            }
        }
    }

    #[test]
    fn projection_cases() {
        let curve = fit_closed_curve(&polygon(64, 1.0)).unwrap();
        let u0 = project_to_curve(&curve, curve.node(0));
        assert!(u0.min(curve.length() - u0) < 1e-9, "{u0}");
        let l = curve.length();
        for u in [0.3, 1.7, 4.4, 6.0] {
            let p = curve.point(u);
            let got = project_to_curve(&curve, &[2.0 * p[0], 2.0 * p[1]]);
            let diff = (got - u).abs().min(l - (got - u).abs());
            assert!(diff < 1e-3, "u={u}, got {got}");
        }
    }

    #[test]
    fn projection_matches_dense_scan_near_square() {
        let curve = fit_closed_curve(&square()).unwrap();
        let l = curve.length();
        let mut buf = vec![0.0; 2];
        for q in [[1.3, 0.2], [-0.4, 1.1], [0.05, -0.9], [-1.2, -1.25]] {
            let got = curve.project(&q);
            curve.point_into(got, &mut buf);
            let got_d = distance(&buf, &q);
            let samples = 1_000_000;
            let oracle = (0..samples)
                .map(|j| {
                    curve.point_into(l * j as f64 / samples as f64, &mut buf);
                    distance(&buf, &q)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(got_d <= oracle + 1e-6, "{q:?}: {got_d} vs {oracle}");
        }
    }

    #[test]
    fn open_chain_rejected() {
        let open = PolygonalChain::from_nodes(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        assert!(matches!(fit_closed_curve(&open), Err(CurveError::ChainNotClosed)));
    }
}
