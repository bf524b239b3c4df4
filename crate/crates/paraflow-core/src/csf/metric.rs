//! The bump-perturbed plane: the graph `z = f(x)` of a compactly supported
//! bump over `R^2`, carrying the induced metric `g = I + grad f grad f^T`.
//!
//! Everything is evaluated in the chart `R^2`; outside the closed
//! `sigma`-ball around `p` the metric is exactly the identity.

use core::fmt;

/// Parameters of the bump `f(x) = h exp(-sigma^2 / (sigma^2 - |x-p|^2))`
/// for `|x - p| <= sigma`, zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpParams {
    pub p: [f64; 2],
    pub height: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    InvalidSigma(f64),
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::InvalidSigma(s) => write!(f, "bump radius must be positive, got {s}"),
        }
    }
}

impl BumpParams {
    pub fn new(p: [f64; 2], height: f64, sigma: f64) -> Result<Self, MetricError> {
        if !(sigma > 0.0) {
            return Err(MetricError::InvalidSigma(sigma));
        }
        Ok(Self { p, height, sigma })
    }

    /// A zero-height bump: the flat plane.
    pub fn flat() -> Self {
        Self { p: [0.0, 0.0], height: 0.0, sigma: 1.0 }
    }

    #[inline]
    fn offset(&self, x: [f64; 2]) -> ([f64; 2], f64) {
        let d = [x[0] - self.p[0], x[1] - self.p[1]];
        (d, d[0] * d[0] + d[1] * d[1])
    }

    /// Bump height `f(x)`; zero outside the open sigma-ball, `h/e` at the
    /// center, and C-infinity across the boundary.
    pub fn height_at(&self, x: [f64; 2]) -> f64 {
        let (_, rho2) = self.offset(x);
        let s2 = self.sigma * self.sigma;
        if rho2 >= s2 || self.height == 0.0 {
            return 0.0;
        }
        self.height * libm::exp(-s2 / (s2 - rho2))
    }

    /// Chart gradient of `f`: `-2 sigma^2 f(x) (x - p) / w^2` with
    /// `w = sigma^2 - |x-p|^2`.
    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        let (d, rho2) = self.offset(x);
        let s2 = self.sigma * self.sigma;
        if rho2 >= s2 || self.height == 0.0 {
            return [0.0, 0.0];
        }
        let w = s2 - rho2;
        let f = self.height * libm::exp(-s2 / w);
        let c = -2.0 * s2 * f / (w * w);
        [c * d[0], c * d[1]]
    }

    /// Chart Hessian of `f` (symmetric 2x2).
    pub fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let (d, rho2) = self.offset(x);
        let s2 = self.sigma * self.sigma;
        if rho2 >= s2 || self.height == 0.0 {
            return [[0.0, 0.0], [0.0, 0.0]];
        }
        let w = s2 - rho2;
        let f = self.height * libm::exp(-s2 / w);
        // f_i = c d_i with c = -2 s2 f / w^2, so
        // f_ij = c delta_ij + c (4/w - 2 s2/w^2) d_i d_j.
        let c = -2.0 * s2 * f / (w * w);
        let q = c * (4.0 / w - 2.0 * s2 / (w * w));
        let mut hess = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                hess[i][j] = q * d[i] * d[j] + if i == j { c } else { 0.0 };
            }
        }
        hess
    }

    /// Induced graph metric `g_ij = delta_ij + f_i f_j`.
    pub fn metric(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let gr = self.grad(x);
        [
            [1.0 + gr[0] * gr[0], gr[0] * gr[1]],
            [gr[0] * gr[1], 1.0 + gr[1] * gr[1]],
        ]
    }

    pub fn metric_det(&self, x: [f64; 2]) -> f64 {
        let gr = self.grad(x);
        1.0 + gr[0] * gr[0] + gr[1] * gr[1]
    }

    pub fn metric_inv(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let g = self.metric(x);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ]
    }

    /// Christoffel symbols of the graph metric:
    /// `Gamma^k_ij = f_k f_ij / (1 + |grad f|^2)`.
    /// Returned as `gamma[k][i][j]`.
    pub fn christoffel(&self, x: [f64; 2]) -> [[[f64; 2]; 2]; 2] {
        let gr = self.grad(x);
        let hess = self.hessian(x);
        let denom = 1.0 + gr[0] * gr[0] + gr[1] * gr[1];
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    gamma[k][i][j] = gr[k] * hess[i][j] / denom;
                }
            }
        }
        gamma
    }

    /// Gauss curvature of the graph: `det(Hess f) / (1 + |grad f|^2)^2`.
    pub fn gauss_curvature(&self, x: [f64; 2]) -> f64 {
        let gr = self.grad(x);
        let h = self.hessian(x);
        let det_h = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let denom = 1.0 + gr[0] * gr[0] + gr[1] * gr[1];
        det_h / (denom * denom)
    }

    /// Metric length of a chart vector `v` attached at `x`.
    pub fn vector_len(&self, x: [f64; 2], v: [f64; 2]) -> f64 {
        let g = self.metric(x);
        libm::sqrt(quad_form(&g, v, v))
    }

    /// Metric inner product of chart vectors at `x`.
    pub fn inner(&self, x: [f64; 2], u: [f64; 2], v: [f64; 2]) -> f64 {
        let g = self.metric(x);
        quad_form(&g, u, v)
    }
}

#[inline]
pub(crate) fn quad_form(g: &[[f64; 2]; 2], u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * (g[0][0] * v[0] + g[0][1] * v[1]) + u[1] * (g[1][0] * v[0] + g[1][1] * v[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> BumpParams {
        BumpParams::new([0.25, -0.1], 1.0, 1.0).unwrap()
    }

    #[test]
    fn height_values() {
        let b = BumpParams::new([0.0, 0.0], 1.0, 1.0).unwrap();
        // center: h e^{-1}
        assert!((b.height_at([0.0, 0.0]) - (-1.0_f64).exp()).abs() < 1e-15);
        // boundary: 0 by the case split
        assert_eq!(b.height_at([1.0, 0.0]), 0.0);
        assert_eq!(b.height_at([2.0, 0.3]), 0.0);
        // half radius: e^{-1/(1 - 1/4)} = e^{-4/3}
        let v = b.height_at([0.5, 0.0]);
        assert!((v - (-4.0_f64 / 3.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let b = bump();
        let h = 1e-6;
        for &x in &[[0.4, 0.2], [0.0, 0.0], [0.9, -0.35], [0.25, -0.1]] {
            let g = b.grad(x);
            let hess = b.hessian(x);
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (b.height_at(xp) - b.height_at(xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-8, "grad[{i}] at {x:?}: {fd} vs {}", g[i]);
                let gp = b.grad(xp);
                let gm = b.grad(xm);
                for j in 0..2 {
                    let fd2 = (gp[j] - gm[j]) / (2.0 * h);
                    assert!(
                        (fd2 - hess[j][i]).abs() < 1e-7,
                        "hess[{j}][{i}] at {x:?}: {fd2} vs {}",
                        hess[j][i]
                    );
                }
            }
        }
    }

    #[test]
    fn metric_identity_outside_and_at_center() {
        let b = bump();
        for &x in &[[5.0, 1.0], [1.26, -0.1], [0.25, -0.1]] {
            let g = b.metric(x);
            assert!((g[0][0] - 1.0).abs() < 1e-14);
            assert!((g[1][1] - 1.0).abs() < 1e-14);
            assert!(g[0][1].abs() < 1e-14);
        }
    }

    #[test]
    fn metric_matches_embedding_first_fundamental_form() {
        // Independent oracle: finite differences of the embedding
        // x -> (x, f(x)) in R^3.
        let b = bump();
        let h = 1e-6;
        let embed = |x: [f64; 2]| [x[0], x[1], b.height_at(x)];
        for &x in &[[0.5, 0.15], [-0.2, -0.3], [0.6, -0.4]] {
            let mut jac = [[0.0; 3]; 2];
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let ep = embed(xp);
                let em = embed(xm);
                for k in 0..3 {
                    jac[i][k] = (ep[k] - em[k]) / (2.0 * h);
                }
            }
            let g = b.metric(x);
            for i in 0..2 {
                for j in 0..2 {
                    let dot: f64 = (0..3).map(|k| jac[i][k] * jac[j][k]).sum();
                    assert!((dot - g[i][j]).abs() < 1e-8, "g[{i}][{j}] at {x:?}");
                }
            }
        }
    }

    #[test]
    fn gauss_curvature_integrates_to_zero() {
        // The bump is flat at infinity, so its total curvature vanishes
        // (Gauss-Bonnet); a mid-resolution grid quadrature should see that.
        let b = BumpParams::new([0.0, 0.0], 0.7, 0.8).unwrap();
        let m = 400;
        let lim = 0.85_f64;
        let step = 2.0 * lim / m as f64;
        let mut total = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = [-lim + (i as f64 + 0.5) * step, -lim + (j as f64 + 0.5) * step];
                total += b.gauss_curvature(x) * libm::sqrt(b.metric_det(x)) * step * step;
            }
        }
        assert!(total.abs() < 1e-3, "total curvature {total}");
    }
}
