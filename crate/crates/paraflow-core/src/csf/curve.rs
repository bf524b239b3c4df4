//! Discrete closed curves in the chart and the curve shortening step.
//!
//! The flow is `X_t = k_g nu`, the intrinsic curvature vector of the
//! curve in the graph metric; in chart coordinates this is
//! `X_t = d^2 X/ds^2 + Gamma(dX/ds, dX/ds)` with `s` the metric
//! arclength. The default scheme treats the second-difference term
//! implicitly (cyclic tridiagonal solve with coefficients frozen at the
//! old lengths) and the Christoffel term explicitly, which lifts the
//! explicit parabolic step cap.

use super::metric::{quad_form, BumpParams};
use crate::linalg::solve_cyclic_tridiagonal;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CsfError {
    /// Adjacent vertices coincide (zero metric edge).
    DegenerateVertex { index: usize },
    /// The stepped curve self-intersects; the caller should halve `dt`.
    StepRejected,
    /// Geodesic-distance shooting failed to converge.
    DistanceSolverFailure { detail: &'static str },
    TooFewVertices { got: usize },
}

impl fmt::Display for CsfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsfError::DegenerateVertex { index } => write!(f, "degenerate vertex {index}"),
            CsfError::StepRejected => write!(f, "step rejected: self-intersection"),
            CsfError::DistanceSolverFailure { detail } => {
                write!(f, "distance solver failure: {detail}")
            }
            CsfError::TooFewVertices { got } => write!(f, "need at least 16 vertices, got {got}"),
        }
    }
}

/// Time stepping scheme for [`csf_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Forward Euler on the full curvature vector.
    Explicit,
    /// Implicit second-difference term, explicit metric coefficients.
    SemiImplicit,
}

/// Closed polygonal curve in the chart, oriented counterclockwise, with a
/// cached per-vertex geodesic curvature.
#[derive(Debug, Clone)]
pub struct DiscreteCurve {
    verts: Vec<[f64; 2]>,
    kg: Vec<f64>,
}

impl DiscreteCurve {
    pub fn new(verts: Vec<[f64; 2]>, metric: &BumpParams) -> Result<Self, CsfError> {
        if verts.len() < 16 {
            return Err(CsfError::TooFewVertices { got: verts.len() });
        }
        let mut curve = Self { kg: Vec::new(), verts };
        curve.refresh_curvature(metric)?;
        Ok(curve)
    }

    /// Regular `m`-gon inscribed in the chart circle of radius `radius`.
    pub fn circle(
        center: [f64; 2],
        radius: f64,
        m: usize,
        metric: &BumpParams,
    ) -> Result<Self, CsfError> {
        let verts = (0..m)
            .map(|i| {
                let a = core::f64::consts::TAU * i as f64 / m as f64;
                [center[0] + radius * libm::cos(a), center[1] + radius * libm::sin(a)]
            })
            .collect();
        Self::new(verts, metric)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn curvature_cache(&self) -> &[f64] {
        &self.kg
    }

    fn refresh_curvature(&mut self, metric: &BumpParams) -> Result<(), CsfError> {
        let m = self.verts.len();
        let mut kg = Vec::with_capacity(m);
        for i in 0..m {
            kg.push(geodesic_curvature_of(&self.verts, metric, i)?);
        }
        self.kg = kg;
        Ok(())
    }

    /// Metric length of the closed polygon (edge metrics at midpoints).
    pub fn metric_length(&self, metric: &BumpParams) -> f64 {
        let m = self.verts.len();
        let mut total = 0.0;
        for i in 0..m {
            total += edge_len(&self.verts, metric, i, (i + 1) % m);
        }
        total
    }

    /// Chart (Euclidean) enclosed area by the shoelace formula; positive
    /// for counterclockwise orientation.
    pub fn chart_area(&self) -> f64 {
        let m = self.verts.len();
        let mut acc = 0.0;
        for i in 0..m {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % m];
            acc += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * acc
    }

    /// Metric area enclosed: chart area plus the bump excess
    /// `integral (sqrt(det g) - 1)` over the enclosed part of the bump
    /// support, evaluated on a fixed quadrature grid.
    pub fn metric_area(&self, metric: &BumpParams) -> f64 {
        let chart = self.chart_area();
        if metric.height == 0.0 {
            return chart;
        }
        let m = 64usize;
        let step = 2.0 * metric.sigma / m as f64;
        let mut excess = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = [
                    metric.p[0] - metric.sigma + (i as f64 + 0.5) * step,
                    metric.p[1] - metric.sigma + (j as f64 + 0.5) * step,
                ];
                if self.contains_chart_point(x) {
                    excess += (libm::sqrt(metric.metric_det(x)) - 1.0) * step * step;
                }
            }
        }
        chart + excess
    }

    /// Even-odd point-in-polygon test in the chart.
    pub fn contains_chart_point(&self, x: [f64; 2]) -> bool {
        let m = self.verts.len();
        let mut inside = false;
        let mut j = m - 1;
        for i in 0..m {
            let a = self.verts[i];
            let b = self.verts[j];
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let cross = (b[0] - a[0]) * (x[1] - a[1]) / (b[1] - a[1]) + a[0];
                if x[0] < cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Min chart distance from the curve's vertices to the bump support.
    pub fn min_dist_to_bump(&self, metric: &BumpParams) -> f64 {
        let mut best = f64::INFINITY;
        for v in &self.verts {
            let d = libm::hypot(v[0] - metric.p[0], v[1] - metric.p[1]) - metric.sigma;
            best = best.min(d);
        }
        best
    }

    /// Resamples to `target` vertices, uniformly by metric arclength
    /// (linear interpolation along the polygon).
    pub fn remesh(&self, target: usize, metric: &BumpParams) -> Result<Self, CsfError> {
        let m = self.verts.len();
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for i in 0..m {
            let l = edge_len(&self.verts, metric, i, (i + 1) % m);
            cum.push(cum[i] + l);
        }
        let total = cum[m];
        if !(total > 0.0) {
            return Err(CsfError::DegenerateVertex { index: 0 });
        }
        let mut verts = Vec::with_capacity(target);
        let mut seg = 0usize;
        for k in 0..target {
            let s = total * k as f64 / target as f64;
            while seg + 1 < m && cum[seg + 1] < s {
                seg += 1;
            }
            let den = (cum[seg + 1] - cum[seg]).max(1e-300);
            let f = (s - cum[seg]) / den;
            let a = self.verts[seg];
            let b = self.verts[(seg + 1) % m];
            verts.push([a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]);
        }
        Self::new(verts, metric)
    }

    /// Max/min ratio of adjacent metric edge lengths.
    pub fn spacing_ratio(&self, metric: &BumpParams) -> f64 {
        let m = self.verts.len();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for i in 0..m {
            let l = edge_len(&self.verts, metric, i, (i + 1) % m);
            lo = lo.min(l);
            hi = hi.max(l);
        }
        hi / lo.max(1e-300)
    }

    /// Segment self-intersection test on a uniform spatial grid
    /// (non-adjacent segments only).
    pub fn self_intersects(&self) -> bool {
        let m = self.verts.len();
        let mut max_edge = 0.0_f64;
        let (mut xmin, mut xmax, mut ymin, mut ymax) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..m {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % m];
            max_edge = max_edge.max(libm::hypot(b[0] - a[0], b[1] - a[1]));
            xmin = xmin.min(a[0]);
            xmax = xmax.max(a[0]);
            ymin = ymin.min(a[1]);
            ymax = ymax.max(a[1]);
        }
        let cell = (2.0 * max_edge).max(1e-12);
        let nx = (((xmax - xmin) / cell) as usize + 2).min(4096);
        let ny = (((ymax - ymin) / cell) as usize + 2).min(4096);
        let mut grid: Vec<Vec<usize>> = alloc::vec![Vec::new(); nx * ny];
        let cell_of = |x: [f64; 2]| {
            let cx = (((x[0] - xmin) / cell) as usize).min(nx - 1);
            let cy = (((x[1] - ymin) / cell) as usize).min(ny - 1);
            (cx, cy)
        };
        for i in 0..m {
            let (cx, cy) = cell_of(self.verts[i]);
            grid[cy * nx + cx].push(i);
        }
        for i in 0..m {
            let (cx, cy) = cell_of(self.verts[i]);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let gx = cx as i64 + dx;
                    let gy = cy as i64 + dy;
                    if gx < 0 || gy < 0 || gx >= nx as i64 || gy >= ny as i64 {
                        continue;
                    }
                    for &j in &grid[gy as usize * nx + gx as usize] {
                        if j <= i {
                            continue;
                        }
                        if j == i + 1 || (i == 0 && j == m - 1) {
                            continue;
                        }
                        if segments_cross(
                            self.verts[i],
                            self.verts[(i + 1) % m],
                            self.verts[j],
                            self.verts[(j + 1) % m],
                        ) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

fn edge_len(verts: &[[f64; 2]], metric: &BumpParams, i: usize, j: usize) -> f64 {
    let a = verts[i];
    let b = verts[j];
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    metric.vector_len(mid, [b[0] - a[0], b[1] - a[1]])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn geodesic_curvature_of(
    verts: &[[f64; 2]],
    metric: &BumpParams,
    i: usize,
) -> Result<f64, CsfError> {
    let m = verts.len();
    let p0 = verts[(i + m - 1) % m];
    let p1 = verts[i];
    let p2 = verts[(i + 1) % m];
    let a = [p1[0] - p0[0], p1[1] - p0[1]];
    let b = [p2[0] - p1[0], p2[1] - p1[1]];
    let la = edge_len(verts, metric, (i + m - 1) % m, i);
    let lb = edge_len(verts, metric, i, (i + 1) % m);
    if la <= 1e-300 || lb <= 1e-300 {
        return Err(CsfError::DegenerateVertex { index: i });
    }
    // Signed metric turning angle at the shared vertex: cos from g, sin
    // from the metric area form sqrt(det g) dx ^ dy.
    let g = metric.metric(p1);
    let cos_num = quad_form(&g, a, b);
    let sin_num = libm::sqrt(g[0][0] * g[1][1] - g[0][1] * g[1][0]) * (a[0] * b[1] - a[1] * b[0]);
    let theta = libm::atan2(sin_num, cos_num);
    Ok(theta / (0.5 * (la + lb)))
}

/// Discrete geodesic curvature at vertex `i`: metric turning angle over
/// the mean of the adjacent metric edge lengths. Positive at convex
/// vertices of a counterclockwise curve; for a regular `m`-gon inscribed
/// in a flat circle of radius `R` it converges to `1/R` at rate
/// `O(1/m^2)`.
pub fn geodesic_curvature(
    curve: &DiscreteCurve,
    metric: &BumpParams,
    i: usize,
) -> Result<f64, CsfError> {
    geodesic_curvature_of(&curve.verts, metric, i)
}

/// Curvature vector (chart components) at every vertex:
/// `d^2 X / ds^2 + Gamma(T, T)` with metric arclength differences.
fn curvature_vectors(verts: &[[f64; 2]], metric: &BumpParams) -> Result<Vec<[f64; 2]>, CsfError> {
    let m = verts.len();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let prev = (i + m - 1) % m;
        let next = (i + 1) % m;
        let la = edge_len(verts, metric, prev, i);
        let lb = edge_len(verts, metric, i, next);
        if la <= 1e-300 || lb <= 1e-300 {
            return Err(CsfError::DegenerateVertex { index: i });
        }
        let p0 = verts[prev];
        let p1 = verts[i];
        let p2 = verts[next];
        let lap = [
            2.0 / (la + lb) * ((p2[0] - p1[0]) / lb - (p1[0] - p0[0]) / la),
            2.0 / (la + lb) * ((p2[1] - p1[1]) / lb - (p1[1] - p0[1]) / la),
        ];
        let t = [(p2[0] - p0[0]) / (la + lb), (p2[1] - p0[1]) / (la + lb)];
        let gamma = metric.christoffel(p1);
        let corr = [
            gamma[0][0][0] * t[0] * t[0]
                + 2.0 * gamma[0][0][1] * t[0] * t[1]
                + gamma[0][1][1] * t[1] * t[1],
            gamma[1][0][0] * t[0] * t[0]
                + 2.0 * gamma[1][0][1] * t[0] * t[1]
                + gamma[1][1][1] * t[1] * t[1],
        ];
        out.push([lap[0] + corr[0], lap[1] + corr[1]]);
    }
    Ok(out)
}

/// One curve-shortening step of size `dt`. The stepped curve keeps the
/// vertex count; the caller remeshes when spacing degrades. Fails with
/// `StepRejected` when the stepped polygon self-intersects.
pub fn csf_step(
    curve: &DiscreteCurve,
    metric: &BumpParams,
    dt: f64,
    scheme: Scheme,
) -> Result<DiscreteCurve, CsfError> {
    let m = curve.verts.len();
    let new_verts = match scheme {
        Scheme::Explicit => {
            let k = curvature_vectors(&curve.verts, metric)?;
            (0..m)
                .map(|i| [curve.verts[i][0] + dt * k[i][0], curve.verts[i][1] + dt * k[i][1]])
                .collect::<Vec<_>>()
        }
        Scheme::SemiImplicit => {
            // (I - dt L) X_new = X_old + dt Gamma(T, T), with L the
            // arclength-weighted second difference at old coefficients.
            let mut sub = Vec::with_capacity(m);
            let mut diag = Vec::with_capacity(m);
            let mut sup = Vec::with_capacity(m);
            let mut rhs_x = Vec::with_capacity(m);
            let mut rhs_y = Vec::with_capacity(m);
            for i in 0..m {
                let prev = (i + m - 1) % m;
                let next = (i + 1) % m;
                let la = edge_len(&curve.verts, metric, prev, i);
                let lb = edge_len(&curve.verts, metric, i, next);
                if la <= 1e-300 || lb <= 1e-300 {
                    return Err(CsfError::DegenerateVertex { index: i });
                }
                let alpha = 2.0 / (la * (la + lb));
                let beta = 2.0 / (lb * (la + lb));
                sub.push(-dt * alpha);
                sup.push(-dt * beta);
                diag.push(1.0 + dt * (alpha + beta));
                let p0 = curve.verts[prev];
                let p1 = curve.verts[i];
                let p2 = curve.verts[next];
                let t = [(p2[0] - p0[0]) / (la + lb), (p2[1] - p0[1]) / (la + lb)];
                let gamma = metric.christoffel(p1);
                let corr = [
                    gamma[0][0][0] * t[0] * t[0]
                        + 2.0 * gamma[0][0][1] * t[0] * t[1]
                        + gamma[0][1][1] * t[1] * t[1],
                    gamma[1][0][0] * t[0] * t[0]
                        + 2.0 * gamma[1][0][1] * t[0] * t[1]
                        + gamma[1][1][1] * t[1] * t[1],
                ];
                rhs_x.push(p1[0] + dt * corr[0]);
                rhs_y.push(p1[1] + dt * corr[1]);
            }
            let xs = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs_x);
            let ys = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs_y);
            xs.into_iter().zip(ys).map(|(x, y)| [x, y]).collect()
        }
    };
    let stepped = DiscreteCurve::new(new_verts, metric)?;
    if stepped.self_intersects() {
        return Err(CsfError::StepRejected);
    }
    Ok(stepped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> BumpParams {
        BumpParams::flat()
    }

    #[test]
    fn polygon_curvature_matches_circle() {
        let flat = flat();
        // Regular 512-gon on the unit circle: turning-angle estimate
        // (pi/m)/(R sin(pi/m)) = (1 + (pi/m)^2/6 + ...)/R.
        let c = DiscreteCurve::circle([0.0, 0.0], 1.0, 512, &flat).unwrap();
        for i in [0usize, 100, 511] {
            let k = geodesic_curvature(&c, &flat, i).unwrap();
            assert!((k - 1.0).abs() < 4e-5, "k = {k}");
        }
        // R = 2: curvature 1/2.
        let c2 = DiscreteCurve::circle([0.3, -0.2], 2.0, 512, &flat).unwrap();
        let k2 = geodesic_curvature(&c2, &flat, 7).unwrap();
        assert!((k2 - 0.5).abs() < 2e-5, "k = {k2}");
    }

    #[test]
    fn polygon_curvature_rate_is_quadratic() {
        let flat = flat();
        let err_at = |m: usize| {
            let c = DiscreteCurve::circle([0.0, 0.0], 1.0, m, &flat).unwrap();
            (geodesic_curvature(&c, &flat, 0).unwrap() - 1.0).abs()
        };
        let e128 = err_at(128);
        let e256 = err_at(256);
        let rate = libm::log2(e128 / e256);
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn straight_segment_has_zero_curvature() {
        let flat = flat();
        // A racetrack: two straight sides joined by semicircular caps.
        let mut verts = Vec::new();
        let m = 40;
        for i in 0..m {
            verts.push([-2.0 + 4.0 * i as f64 / m as f64, -1.0]);
        }
        for i in 0..m {
            let a = -core::f64::consts::FRAC_PI_2 + core::f64::consts::PI * i as f64 / m as f64;
            verts.push([2.0 + libm::cos(a), libm::sin(a)]);
        }
        for i in 0..m {
            verts.push([2.0 - 4.0 * i as f64 / m as f64, 1.0]);
        }
        for i in 0..m {
            let a = core::f64::consts::FRAC_PI_2 + core::f64::consts::PI * i as f64 / m as f64;
            verts.push([-2.0 + libm::cos(a), libm::sin(a)]);
        }
        let c = DiscreteCurve::new(verts, &flat).unwrap();
        // Middle of the bottom straight side.
        let k = geodesic_curvature(&c, &flat, m / 2).unwrap();
        assert!(k.abs() < 1e-14, "k = {k}");
        // An explicit step leaves collinear vertices in place.
        let stepped = csf_step(&c, &flat, 1e-4, Scheme::Explicit).unwrap();
        let i = m / 2;
        assert!((stepped.vertices()[i][0] - c.vertices()[i][0]).abs() < 1e-15);
        assert!((stepped.vertices()[i][1] - c.vertices()[i][1]).abs() < 1e-15);
    }

    #[test]
    fn discrete_laplacian_is_exact_on_regular_polygons() {
        let flat = flat();
        let c = DiscreteCurve::circle([0.0, 0.0], 1.5, 64, &flat).unwrap();
        let k = curvature_vectors(c.vertices(), &flat).unwrap();
        for (i, v) in c.vertices().iter().enumerate() {
            // Curvature vector points inward with magnitude 1/R exactly.
            let expect = [-v[0] / (1.5 * 1.5), -v[1] / (1.5 * 1.5)];
            assert!((k[i][0] - expect[0]).abs() < 1e-12);
            assert!((k[i][1] - expect[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn shrinking_circle_follows_the_law() {
        // Flat metric: radius obeys R(t) = sqrt(R0^2 - 2t). Short
        // horizon at moderate resolution here; the experiment tests push
        // the full tolerance.
        let flat = flat();
        let mut curve = DiscreteCurve::circle([0.0, 0.0], 1.0, 256, &flat).unwrap();
        let dt = 2e-5;
        let steps = 5000; // t = 0.1
        for _ in 0..steps {
            curve = csf_step(&curve, &flat, dt, Scheme::SemiImplicit).unwrap();
        }
        let t = dt * steps as f64;
        let r_expect = libm::sqrt(1.0 - 2.0 * t);
        for v in curve.vertices().iter().step_by(37) {
            let r = libm::hypot(v[0], v[1]);
            assert!((r - r_expect).abs() / r_expect < 1e-3, "r = {r}, expect {r_expect}");
        }
    }

    #[test]
    fn far_curve_ignores_the_bump() {
        let bump = BumpParams::new([10.0, 10.0], 1.0, 0.5).unwrap();
        let flat = flat();
        let c0 = DiscreteCurve::circle([0.0, 0.0], 1.0, 128, &flat).unwrap();
        let a = csf_step(&c0, &bump, 1e-4, Scheme::SemiImplicit).unwrap();
        let b = csf_step(&c0, &flat, 1e-4, Scheme::SemiImplicit).unwrap();
        for (va, vb) in a.vertices().iter().zip(b.vertices()) {
            assert!((va[0] - vb[0]).abs() < 1e-6);
            assert!((va[1] - vb[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn remesh_preserves_shape_and_count() {
        let flat = flat();
        let c = DiscreteCurve::circle([0.0, 0.0], 1.0, 100, &flat).unwrap();
        let r = c.remesh(64, &flat).unwrap();
        assert_eq!(r.len(), 64);
        for v in r.vertices() {
            let rad = libm::hypot(v[0], v[1]);
            assert!((rad - 1.0).abs() < 1e-3);
        }
        assert!(r.spacing_ratio(&flat) < 1.01);
    }

    #[test]
    fn self_intersection_detected() {
        let flat = flat();
        // A figure-eight-like polygon.
        let mut verts = Vec::new();
        let m = 32;
        for i in 0..m {
            let a = core::f64::consts::TAU * i as f64 / m as f64;
            verts.push([libm::sin(2.0 * a), libm::sin(a)]);
        }
        let c = DiscreteCurve { verts, kg: alloc::vec![0.0; m] };
        assert!(c.self_intersects());
        let ok = DiscreteCurve::circle([0.0, 0.0], 1.0, 32, &flat).unwrap();
        assert!(!ok.self_intersects());
    }

    #[test]
    fn degenerate_vertex_is_reported() {
        let flat = flat();
        let mut verts: Vec<[f64; 2]> = (0..20)
            .map(|i| {
                let a = core::f64::consts::TAU * i as f64 / 20.0;
                [a.cos(), a.sin()]
            })
            .collect();
        verts[7] = verts[6]; // coincident neighbors
        match DiscreteCurve::new(verts, &flat) {
            Err(CsfError::DegenerateVertex { index }) => assert!(index == 6 || index == 7),
            other => panic!("expected DegenerateVertex, got {other:?}"),
        }
    }

    #[test]
    fn wild_explicit_step_is_rejected() {
        // An irregular spiky polygon stepped explicitly with an absurd
        // dt moves vertices far past their neighbors and tangles.
        let flat = flat();
        let mut rng = crate::rng::SplitMix64::new(0xC0FFEE);
        let m = 64;
        let verts: Vec<[f64; 2]> = (0..m)
            .map(|i| {
                let a = core::f64::consts::TAU * i as f64 / m as f64;
                let r = if i % 2 == 0 { 1.0 } else { 0.3 + 0.2 * rng.next_f64() };
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        let c = DiscreteCurve::new(verts, &flat).unwrap();
        let res = csf_step(&c, &flat, 0.5, Scheme::Explicit);
        assert!(
            matches!(res, Err(CsfError::StepRejected)),
            "expected rejection, got a valid curve"
        );
        // The same curve with a sane dt steps fine.
        assert!(csf_step(&c, &flat, 1e-5, Scheme::Explicit).is_ok());
    }

    #[test]
    fn areas_and_length() {
        let flat = flat();
        let c = DiscreteCurve::circle([0.0, 0.0], 2.0, 512, &flat).unwrap();
        let area = c.chart_area();
        let exact = core::f64::consts::PI * 4.0;
        assert!((area - exact).abs() / exact < 1e-3);
        let len = c.metric_length(&flat);
        assert!(
            (len - core::f64::consts::TAU * 2.0).abs() / (core::f64::consts::TAU * 2.0) < 1e-4
        );
        // Metric area with a centered bump exceeds the chart area.
        let bump = BumpParams::new([0.0, 0.0], 1.0, 0.5).unwrap();
        assert!(c.metric_area(&bump) > area);
    }
}
