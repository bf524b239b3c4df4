//! Geodesic distances on the bump surface by shooting.
//!
//! The deviation diagnostic needs the geodesic distance from each curve
//! vertex back to the initial circle. Where the straight radial segment
//! stays clear of the bump support the metric is Euclidean and the
//! distance is exact; otherwise geodesics are shot over a fan of initial
//! angles, located on the circle by dense-output bisection, and the
//! shortest arrival is refined by golden-section search on the angle.

use super::curve::{CsfError, DiscreteCurve};
use super::metric::BumpParams;
use crate::ode::{integrate, OdeOptions, StepControl};

#[derive(Debug, Clone)]
pub struct ShootingOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Half-width of the initial angle fan around the outward radial
    /// direction (radians).
    pub fan_half_width: f64,
    /// Coarse fan sample count (odd; includes the radial direction).
    pub fan_samples: usize,
    /// Golden-section refinement stops when the bracket's arrival points
    /// are within this chart distance.
    pub arrival_tol: f64,
    /// Give up on a ray after this multiple of the circle radius.
    pub max_len_factor: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            fan_half_width: 0.9,
            fan_samples: 17,
            arrival_tol: 1e-8,
            max_len_factor: 4.0,
        }
    }
}

/// Arc length until the geodesic from `x0` with unit initial direction
/// `theta` (chart angle) crosses the chart circle `|x - center| = radius`
/// from inside; `None` if it never does within the length budget.
fn shoot_to_circle(
    metric: &BumpParams,
    x0: [f64; 2],
    theta: f64,
    center: [f64; 2],
    radius: f64,
    opts: &ShootingOptions,
) -> Option<(f64, [f64; 2])> {
    let dir = [libm::cos(theta), libm::sin(theta)];
    let speed = metric.vector_len(x0, dir);
    let y0 = [x0[0], x0[1], dir[0] / speed, dir[1] / speed];
    let rho = |x: f64, y: f64| libm::hypot(x - center[0], y - center[1]);
    if rho(x0[0], x0[1]) >= radius {
        return Some((0.0, x0));
    }
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[2];
        dy[1] = y[3];
        let gamma = metric.christoffel([y[0], y[1]]);
        for k in 0..2 {
            dy[2 + k] = -(gamma[k][0][0] * y[2] * y[2]
                + 2.0 * gamma[k][0][1] * y[2] * y[3]
                + gamma[k][1][1] * y[3] * y[3]);
        }
    };
    let ode = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: None,
        h_max: Some(0.1 * radius),
        max_steps: 100_000,
    };
    let mut hit: Option<(f64, [f64; 2])> = None;
    let max_len = opts.max_len_factor * radius;
    let res = integrate(rhs, 0.0, &y0, max_len, &ode, |step| {
        if rho(step.y[0], step.y[1]) >= radius {
            // Bisection on the dense interpolant for the crossing time.
            let mut buf = [0.0; 4];
            let mut lo = step.t_from;
            let mut hi = step.t_to;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                step.dense.eval_into(mid, &mut buf);
                if rho(buf[0], buf[1]) >= radius {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-13 {
                    break;
                }
            }
            let t_star = 0.5 * (lo + hi);
            step.dense.eval_into(t_star, &mut buf);
            hit = Some((t_star, [buf[0], buf[1]]));
            return StepControl::Stop;
        }
        StepControl::Continue
    });
    match res {
        Ok(_) => hit,
        Err(_) => None,
    }
}

/// Geodesic distance from `x0` to the chart circle `|x - center| =
/// radius` (the initial curve of the bump experiment). Points outside
/// the circle are in the flat region by the experiment's constraints and
/// use the exact chart distance.
pub fn distance_to_circle(
    metric: &BumpParams,
    x0: [f64; 2],
    center: [f64; 2],
    radius: f64,
    opts: &ShootingOptions,
) -> Result<f64, CsfError> {
    let d = [x0[0] - center[0], x0[1] - center[1]];
    let rho = libm::hypot(d[0], d[1]);
    if rho >= radius {
        return Ok(rho - radius);
    }
    // Exact flat shortcut: the radial segment from x0 to the circle is a
    // minimizing geodesic whenever it stays clear of the bump support
    // (the metric dominates the chart metric, so chart length is always
    // a lower bound, attained flat).
    if metric.height == 0.0 || radial_segment_clear(metric, x0, center, radius) {
        return Ok(radius - rho);
    }

    let phi = libm::atan2(d[1], d[0]);
    let mut best: Option<(f64, f64, [f64; 2])> = None; // (len, theta, arrival)
    let samples = opts.fan_samples.max(3) | 1;
    for j in 0..samples {
        let f = j as f64 / (samples - 1) as f64;
        let theta = phi - opts.fan_half_width + 2.0 * opts.fan_half_width * f;
        if let Some((len, arrival)) = shoot_to_circle(metric, x0, theta, center, radius, opts) {
            if best.map_or(true, |(bl, _, _)| len < bl) {
                best = Some((len, theta, arrival));
            }
        }
    }
    let (_, theta_best, _) =
        best.ok_or(CsfError::DistanceSolverFailure { detail: "no ray reached the circle" })?;

    // Golden-section refinement of the arrival length around the best
    // coarse angle.
    let dtheta = 2.0 * opts.fan_half_width / (samples - 1) as f64;
    let mut a = theta_best - dtheta;
    let mut b = theta_best + dtheta;
    let golden = 0.5 * (3.0 - libm::sqrt(5.0));
    let eval = |theta: f64| shoot_to_circle(metric, x0, theta, center, radius, opts);
    let mut x1 = a + golden * (b - a);
    let mut x2 = b - golden * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..60 {
        let (l1, p1) = match f1 {
            Some(v) => v,
            None => return Err(CsfError::DistanceSolverFailure { detail: "ray lost in fan" }),
        };
        let (l2, p2) = match f2 {
            Some(v) => v,
            None => return Err(CsfError::DistanceSolverFailure { detail: "ray lost in fan" }),
        };
        if libm::hypot(p1[0] - p2[0], p1[1] - p2[1]) < opts.arrival_tol || (b - a) < 1e-13 {
            return Ok(l1.min(l2));
        }
        if l1 <= l2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + golden * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - golden * (b - a);
            f2 = eval(x2);
        }
    }
    match (f1, f2) {
        (Some((l1, _)), Some((l2, _))) => Ok(l1.min(l2)),
        _ => Err(CsfError::DistanceSolverFailure { detail: "refinement exhausted" }),
    }
}

/// Whether the radial chart segment from `x0` out to the circle stays at
/// distance >= sigma from the bump center.
fn radial_segment_clear(metric: &BumpParams, x0: [f64; 2], center: [f64; 2], radius: f64) -> bool {
    let d = [x0[0] - center[0], x0[1] - center[1]];
    let rho = libm::hypot(d[0], d[1]);
    if rho == 0.0 {
        // Center point: every radial direction is equivalent; clear only
        // if the whole disc avoids the ball, which it does not when the
        // bump sits inside. Be conservative.
        return libm::hypot(center[0] - metric.p[0], center[1] - metric.p[1]) - radius
            >= metric.sigma;
    }
    let exit = [center[0] + d[0] / rho * radius, center[1] + d[1] / rho * radius];
    dist_point_segment(metric.p, x0, exit) >= metric.sigma
}

fn dist_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 { 0.0 } else { ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0) };
    libm::hypot(p[0] - (a[0] + t * ab[0]), p[1] - (a[1] + t * ab[1]))
}

/// Per-vertex geodesic distances from `curve` back to the initial circle:
/// returns `(dev, mean)` where `dev = max - min`. A reparametrized
/// parallel flow keeps `dev = 0`.
pub fn parallel_deviation(
    curve: &DiscreteCurve,
    metric: &BumpParams,
    center: [f64; 2],
    radius: f64,
    opts: &ShootingOptions,
) -> Result<(f64, f64), CsfError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in curve.vertices() {
        let d = distance_to_circle(metric, v, center, radius, opts)?;
        lo = lo.min(d);
        hi = hi.max(d);
        sum += d;
    }
    Ok((hi - lo, sum / curve.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_distance_is_radial() {
        let flat = BumpParams::flat();
        let opts = ShootingOptions::default();
        let d = distance_to_circle(&flat, [0.5, 0.0], [0.0, 0.0], 2.0, &opts).unwrap();
        assert!((d - 1.5).abs() < 1e-12);
        // Outside the circle.
        let d2 = distance_to_circle(&flat, [3.0, 0.0], [0.0, 0.0], 2.0, &opts).unwrap();
        assert!((d2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geodesics_in_flat_region_are_straight() {
        // Shooting in a flat metric must reproduce the radial distance
        // even without the shortcut: force it by putting a zero-height
        // bump in the corridor test's way.
        let bump = BumpParams::new([0.6, 0.0], 0.0, 0.5).unwrap();
        let opts = ShootingOptions::default();
        // height = 0 takes the shortcut; instead call the shooting path
        // directly at several angles.
        for &theta in &[0.0, 0.3, -0.4] {
            let hit = shoot_to_circle(&bump, [0.2, 0.1], theta, [0.0, 0.0], 2.0, &opts).unwrap();
            // Straight ray: length equals chart distance to the circle
            // along that direction.
            let (len, arrival) = hit;
            let chart = libm::hypot(arrival[0] - 0.2, arrival[1] - 0.1);
            assert!((len - chart).abs() < 1e-9, "theta = {theta}");
            assert!((libm::hypot(arrival[0], arrival[1]) - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn concentric_circles_have_zero_deviation() {
        let flat = BumpParams::flat();
        let opts = ShootingOptions::default();
        let inner = DiscreteCurve::circle([0.0, 0.0], 1.2, 64, &flat).unwrap();
        let (dev, mean) = parallel_deviation(&inner, &flat, [0.0, 0.0], 2.0, &opts).unwrap();
        assert!(dev < 1e-6, "dev = {dev}");
        assert!((mean - 0.8).abs() < 1e-9);
    }

    #[test]
    fn bump_in_corridor_lengthens_the_path() {
        // A tall bump directly between the point and the circle: the
        // geodesic distance exceeds the chart distance (paths either
        // climb the graph or bend around).
        let bump = BumpParams::new([1.0, 0.0], 1.0, 0.4).unwrap();
        let opts = ShootingOptions::default();
        let d = distance_to_circle(&bump, [0.3, 0.0], [0.0, 0.0], 2.0, &opts).unwrap();
        assert!(d > 1.7 + 1e-4, "d = {d}");
        // But it can never beat the flat lower bound.
        assert!(d < 2.4);
        // A point whose corridor is clear keeps the exact flat value.
        let d_clear = distance_to_circle(&bump, [-0.3, 0.0], [0.0, 0.0], 2.0, &opts).unwrap();
        assert!((d_clear - 1.7).abs() < 1e-12);
    }

    #[test]
    fn geodesic_speed_is_preserved() {
        // The integrated ray keeps unit metric speed (consistency of the
        // geodesic equations with the Christoffel symbols).
        let bump = BumpParams::new([0.5, 0.2], 0.8, 0.6).unwrap();
        let x0 = [0.1, 0.0];
        let theta = 0.2;
        let dir = [libm::cos(theta), libm::sin(theta)];
        let speed = bump.vector_len(x0, dir);
        let y0 = [x0[0], x0[1], dir[0] / speed, dir[1] / speed];
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[2];
            dy[1] = y[3];
            let gamma = bump.christoffel([y[0], y[1]]);
            for k in 0..2 {
                dy[2 + k] = -(gamma[k][0][0] * y[2] * y[2]
                    + 2.0 * gamma[k][0][1] * y[2] * y[3]
                    + gamma[k][1][1] * y[3] * y[3]);
            }
        };
        let sol = integrate(
            rhs,
            0.0,
            &y0,
            1.5,
            &OdeOptions::with_tol(1e-11, 1e-13),
            |_| StepControl::Continue,
        )
        .unwrap();
        let v = [sol.y[2], sol.y[3]];
        let s_end = bump.vector_len([sol.y[0], sol.y[1]], v);
        assert!((s_end - 1.0).abs() < 1e-9, "speed drifted to {s_end}");
    }
}
