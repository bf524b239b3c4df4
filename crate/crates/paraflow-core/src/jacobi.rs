//! The Jacobi endomorphism `D` along a unit-speed normal geodesic and the
//! geometry of the parallel hypersurfaces it encodes.
//!
//! `D` solves `D'' + Rbar D = 0` with `D(0) = I`, `D'(0) = -A0` where `A0`
//! is the shape operator of the initial hypersurface. While `det D > 0`
//! the parallel at distance `r` has shape operator `A(r) = -D' D^{-1}` and
//! averaged mean curvature
//!
//! ```text
//! H(r) = -(det D)' / (n det D) = -trace(D' D^{-1}) / n.
//! ```
//!
//! The first zero of `det D` is the focal radius, where the parallel
//! family degenerates and the reduced flow becomes extinct.
//!
//! Mean curvature convention: `H` is always the averaged `trace(A)/n`. In
//! this convention the Riccati trace identity reads
//! `H'(r) = (Ric~(gdot, gdot) + |A|^2) / n`; the `1/n` scaling is the one
//! under which the identity is exact on the space-form closed forms
//! (asserted in tests), since `n H` satisfies it without the factor.
//!
//! Frames need not be parallel: the E(kappa, tau) closed form lives in the
//! rotating frame `{U/|U|, JU/|JU|}`. A frame rotation only adds an
//! antisymmetric connection term to `-D' D^{-1}`, so the symmetrized
//! operator and every spectral quantity derived from it are unchanged.

use crate::gtrig::{c_delta, c_delta_minus_one_over_delta, s_delta};
use crate::linalg::{bisect, SquareMatrix};
use crate::ode::{integrate, OdeError, OdeOptions, StepControl};
use alloc::vec::Vec;
use core::fmt;

/// Symmetric shape operator of a hypersurface (principal curvatures are
/// its eigenvalues).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperator {
    mat: SquareMatrix,
}

impl ShapeOperator {
    /// Wraps a symmetric matrix; asymmetry beyond `1e-12` (relative) is
    /// rejected.
    pub fn new(mat: SquareMatrix) -> Result<Self, JacobiError> {
        if !mat.is_symmetric(1e-12) {
            return Err(JacobiError::NotSymmetric { asymmetry: mat.asymmetry() });
        }
        Ok(Self { mat: mat.sym_part() })
    }

    pub fn diag(entries: &[f64]) -> Self {
        Self { mat: SquareMatrix::diag(entries) }
    }

    /// Shape operator of an isoparametric surface in `E(kappa, tau)` in
    /// the `{U/|U|, JU/|JU|}` frame: `[[0, -tau], [-tau, 2H]]`.
    pub fn ektau_isoparametric(tau: f64, h: f64) -> Self {
        Self { mat: SquareMatrix::from_rows(&[&[0.0, -tau], &[-tau, 2.0 * h]]) }
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.mat
    }

    pub fn n(&self) -> usize {
        self.mat.n()
    }

    pub fn principal_curvatures(&self) -> Vec<f64> {
        self.mat.sym_eigenvalues()
    }

    pub fn mean_curvature(&self) -> f64 {
        self.mat.trace() / self.mat.n() as f64
    }
}

/// `(r, D(r), D'(r))` along the normal geodesic.
#[derive(Debug, Clone)]
pub struct JacobiState {
    pub r: f64,
    pub d: SquareMatrix,
    pub dprime: SquareMatrix,
}

impl JacobiState {
    pub fn initial(a0: &ShapeOperator) -> Self {
        Self { r: 0.0, d: SquareMatrix::identity(a0.n()), dprime: a0.matrix().scale(-1.0) }
    }

    pub fn det(&self) -> f64 {
        self.d.det()
    }
}

/// Geometry of the parallel hypersurface at distance `r`.
#[derive(Debug, Clone)]
pub struct ParallelGeometry {
    pub r: f64,
    /// Averaged mean curvature `trace(A)/n`.
    pub h_mean: f64,
    /// Symmetrized shape operator of the parallel.
    pub shape: SquareMatrix,
    pub det_d: f64,
    /// `|A|^2`, the sum of squared principal curvatures.
    pub norm_a2: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JacobiError {
    NotSymmetric { asymmetry: f64 },
    /// `det D` below threshold: at (or numerically at) a focal point.
    FocalPoint { r: f64, det: f64 },
    StepSizeUnderflow { r: f64 },
    ParameterViolation(&'static str),
    InsufficientSamples { needed: usize, got: usize },
}

impl fmt::Display for JacobiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JacobiError::NotSymmetric { asymmetry } => {
                write!(f, "shape operator asymmetry {asymmetry} exceeds tolerance")
            }
            JacobiError::FocalPoint { r, det } => {
                write!(f, "focal point at r = {r} (det D = {det})")
            }
            JacobiError::StepSizeUnderflow { r } => {
                write!(f, "Jacobi propagation stalled near r = {r}")
            }
            JacobiError::ParameterViolation(msg) => write!(f, "{msg}"),
            JacobiError::InsufficientSamples { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
        }
    }
}

/// `det D` threshold below which a parallel is treated as focal
/// (relative to the initial scale `det D(0) = 1`).
pub const FOCAL_DET_THRESHOLD: f64 = 1e-12;

/// Integrates `D'' + Rbar D = 0` numerically to the targets `rs`
/// (nondecreasing, nonnegative). `rbar` may be any constant matrix; the
/// symmetric ones come from `ambient::curvature_operator`.
pub fn propagate_grid(
    rbar: &SquareMatrix,
    a0: &ShapeOperator,
    rs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<JacobiState>, JacobiError> {
    let n = a0.n();
    assert_eq!(rbar.n(), n, "curvature operator and shape operator dimensions differ");
    let mut y = Vec::with_capacity(2 * n * n);
    y.extend_from_slice(SquareMatrix::identity(n).as_slice());
    y.extend_from_slice(a0.matrix().scale(-1.0).as_slice());

    let rhs = |_r: f64, y: &[f64], dy: &mut [f64]| {
        let nn = n * n;
        dy[..nn].copy_from_slice(&y[nn..]);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc -= rbar.get(i, k) * y[k * n + j];
                }
                dy[nn + i * n + j] = acc;
            }
        }
    };

    let mut out = Vec::with_capacity(rs.len());
    let mut t = 0.0;
    for &r in rs {
        assert!(r >= t, "propagation targets must be nondecreasing");
        if r > t {
            let sol =
                integrate(rhs, t, &y, r, opts, |_| StepControl::Continue).map_err(|e| match e {
                    OdeError::StepSizeUnderflow { t } | OdeError::MaxStepsExceeded { t } => {
                        JacobiError::StepSizeUnderflow { r: t }
                    }
                })?;
            t = sol.t;
            y = sol.y;
        }
        let nn = n * n;
        out.push(JacobiState {
            r,
            d: SquareMatrix::from_slice(n, &y[..nn]),
            dprime: SquareMatrix::from_slice(n, &y[nn..]),
        });
    }
    Ok(out)
}

/// Single-target variant of [`propagate_grid`].
pub fn propagate_numeric(
    rbar: &SquareMatrix,
    a0: &ShapeOperator,
    r: f64,
    opts: &OdeOptions,
) -> Result<JacobiState, JacobiError> {
    Ok(propagate_grid(rbar, a0, &[r], opts)?.pop().unwrap())
}

/// Closed form in a space form of curvature `c`: since `Rbar = c I`
/// commutes with everything, `D(r) = c_{-c}(r) I - s_{-c}(r) A0`.
pub fn closed_form_d_spaceform(c: f64, a0: &ShapeOperator, r: f64) -> JacobiState {
    let n = a0.n();
    let id = SquareMatrix::identity(n);
    let s = s_delta(-c, r);
    let cc = c_delta(-c, r);
    // d/dr c_{-c} = -c s_{-c}, d/dr s_{-c} = c_{-c}.
    let d = id.scale(cc).sub(&a0.matrix().scale(s));
    let dprime = id.scale(-c * s).sub(&a0.matrix().scale(cc));
    JacobiState { r, d, dprime }
}

/// Closed form for isoparametric surfaces in `E(kappa, tau)` in the
/// rotating frame `{U/|U|, JU/|JU|}`:
///
/// ```text
/// D(r) = [ 1   2 tau s_d(r) - 4 tau H (c_d(r) - 1)/d ]
///        [ 0   c_d(r) - 2 H s_d(r)                   ]
/// ```
///
/// with `d = (kappa - 4 tau^2) nu^2 - kappa`. Valid contexts: `nu = 0`
/// (vertical cylinders, `d = -kappa`) and
/// `nu^2 = (4H^2 + kappa)/(kappa - 4 tau^2)` (parabolic helicoids,
/// `d = 4H^2`). The `(c_d - 1)/d` factor is evaluated through its
/// removable singularity at `d = 0`.
pub fn closed_form_d_ektau(
    kappa: f64,
    tau: f64,
    h: f64,
    nu: f64,
    r: f64,
) -> Result<JacobiState, JacobiError> {
    if kappa - 4.0 * tau * tau == 0.0 {
        return Err(JacobiError::ParameterViolation("E(kappa, tau) requires kappa - 4 tau^2 != 0"));
    }
    let delta = (kappa - 4.0 * tau * tau) * nu * nu - kappa;
    let s = s_delta(delta, r);
    let c = c_delta(delta, r);
    let topright = 2.0 * tau * s - 4.0 * tau * h * c_delta_minus_one_over_delta(delta, r);
    let d = SquareMatrix::from_rows(&[&[1.0, topright], &[0.0, c - 2.0 * h * s]]);
    // s' = c, c' = delta s, ((c - 1)/delta)' = s.
    let topright_prime = 2.0 * tau * c - 4.0 * tau * h * s;
    let dprime =
        SquareMatrix::from_rows(&[&[0.0, topright_prime], &[0.0, delta * s - 2.0 * h * c]]);
    Ok(JacobiState { r, d, dprime })
}

/// Derives the parallel-hypersurface geometry from a Jacobi state. Fails
/// with `FocalPoint` when `|det D|` is below [`FOCAL_DET_THRESHOLD`].
pub fn parallel_geometry(state: &JacobiState, n: usize) -> Result<ParallelGeometry, JacobiError> {
    let det = state.d.det();
    if libm::fabs(det) < FOCAL_DET_THRESHOLD {
        return Err(JacobiError::FocalPoint { r: state.r, det });
    }
    let dinv = state.d.inverse().ok_or(JacobiError::FocalPoint { r: state.r, det })?;
    let minus_dp_dinv = state.dprime.matmul(&dinv).scale(-1.0);
    // Symmetrize: a rotating frame contributes only an antisymmetric
    // connection term, and roundoff asymmetry dies with it.
    let shape = minus_dp_dinv.sym_part();
    let h_mean = minus_dp_dinv.trace() / n as f64;
    let eigenvalues = shape.sym_eigenvalues();
    let norm_a2 = eigenvalues.iter().map(|l| l * l).sum();
    Ok(ParallelGeometry { r: state.r, h_mean, shape, det_d: det, norm_a2, eigenvalues })
}

/// Smallest `r` in `(window.0, window.1]` where `det` vanishes, located
/// by a 1024-interval scan plus bisection to `1e-10`. Zeros of even
/// multiplicity (no sign change, e.g. equal principal curvatures) are
/// caught by refining the scan minimum of `|det|` and accepting it when
/// the value there is at roundoff level. `None` when `det` stays away
/// from zero on the window.
pub fn focal_radius(det: impl Fn(f64) -> f64, window: (f64, f64)) -> Option<f64> {
    let (lo, hi) = window;
    assert!(hi > lo);
    let steps = 1024usize;
    let dr = (hi - lo) / steps as f64;
    let mut r_prev = lo;
    let mut d_prev = det(lo);
    let mut scale = libm::fabs(d_prev);
    let mut min_abs = f64::INFINITY;
    let mut min_r = lo;
    for i in 1..=steps {
        let r = lo + i as f64 * dr;
        let d = det(r);
        if d == 0.0 {
            return Some(r);
        }
        if d_prev * d < 0.0 {
            return Some(bisect(&det, r_prev, r, 1e-10));
        }
        scale = scale.max(libm::fabs(d));
        if libm::fabs(d) < min_abs {
            min_abs = libm::fabs(d);
            min_r = r;
        }
        r_prev = r;
        d_prev = d;
    }
    // Even-multiplicity candidate: ternary search on |det| around the
    // scan minimum.
    let mut a = (min_r - dr).max(lo);
    let mut b = (min_r + dr).min(hi);
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if libm::fabs(det(m1)) <= libm::fabs(det(m2)) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let r_star = 0.5 * (a + b);
    if libm::fabs(det(r_star)) < 1e-9 * scale.max(1.0) {
        Some(r_star)
    } else {
        None
    }
}

/// Max defect of the Riccati trace identity
/// `H'(r) = (Ric~(gdot, gdot) + |A|^2) / n` over interior samples, using
/// fourth-order (five-point) central differences where the sample count
/// allows and the three-point stencil next to the ends. Samples must be
/// uniformly spaced in `r`.
pub fn riccati_residual(samples: &[ParallelGeometry], ric_normal: f64) -> Result<f64, JacobiError> {
    if samples.len() < 3 {
        return Err(JacobiError::InsufficientSamples { needed: 3, got: samples.len() });
    }
    let h = samples[1].r - samples[0].r;
    let n = samples[0].eigenvalues.len() as f64;
    let five_point = samples.len() >= 5;
    let (lo, hi) = if five_point { (2, samples.len() - 2) } else { (1, samples.len() - 1) };
    let mut worst = 0.0_f64;
    for i in lo..hi {
        let dh = if five_point {
            (samples[i - 2].h_mean - 8.0 * samples[i - 1].h_mean + 8.0 * samples[i + 1].h_mean
                - samples[i + 2].h_mean)
                / (12.0 * h)
        } else {
            (samples[i + 1].h_mean - samples[i - 1].h_mean) / (2.0 * h)
        };
        let rhs = (ric_normal + samples[i].norm_a2) / n;
        worst = worst.max(libm::fabs(dh - rhs));
    }
    Ok(worst)
}
