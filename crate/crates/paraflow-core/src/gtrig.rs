//! Generalized sine/cosine kernels `s_delta`, `c_delta`.
//!
//! For a curvature-like parameter `delta` these interpolate between the
//! hyperbolic branch (`delta > 0`), the trigonometric branch (`delta < 0`)
//! and the flat limit (`delta = 0`):
//!
//! ```text
//! s_delta(t) = sinh(t sqrt(delta)) / sqrt(delta)    delta > 0
//!            = sin(t sqrt(-delta)) / sqrt(-delta)   delta < 0
//!            = t                                    delta = 0
//! c_delta(t) = cosh(t sqrt(delta)) | cos(t sqrt(-delta)) | 1
//! ```
//!
//! They satisfy `c^2 - delta s^2 = 1`, `s' = c` and `c' = delta s`. Near
//! `delta = 0` the direct formulas divide nearly-cancelling quantities by
//! `sqrt(|delta|)`, so a truncated power series in `delta t^2` is used
//! instead; both kernels are entire in `delta`.

/// Threshold below which the unified power series replaces the closed
/// branch formulas.
const SERIES_DELTA: f64 = 1e-6;

/// Generalized sine: odd in `t`, `s_delta(0) = 0`, `s_delta'(0) = 1`.
pub fn s_delta(delta: f64, t: f64) -> f64 {
    let x = delta * t * t;
    if delta == 0.0 || (libm::fabs(delta) < SERIES_DELTA && libm::fabs(x) < 0.5) {
        // t * sum_k x^k / (2k+1)!
        let mut term = t;
        let mut sum = t;
        for k in 0u32..24 {
            term *= x / (((2 * k + 2) * (2 * k + 3)) as f64);
            sum += term;
            if libm::fabs(term) <= 1e-18 * libm::fabs(sum) {
                break;
            }
        }
        sum
    } else if delta > 0.0 {
        let rt = libm::sqrt(delta);
        libm::sinh(t * rt) / rt
    } else {
        let rt = libm::sqrt(-delta);
        libm::sin(t * rt) / rt
    }
}

/// Generalized cosine: even in `t`, `c_delta(0) = 1`.
pub fn c_delta(delta: f64, t: f64) -> f64 {
    let x = delta * t * t;
    if delta == 0.0 || (libm::fabs(delta) < SERIES_DELTA && libm::fabs(x) < 0.5) {
        // sum_k x^k / (2k)!
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0u32..24 {
            term *= x / (((2 * k + 1) * (2 * k + 2)) as f64);
            sum += term;
            if libm::fabs(term) <= 1e-18 * libm::fabs(sum) {
                break;
            }
        }
        sum
    } else if delta > 0.0 {
        libm::cosh(t * libm::sqrt(delta))
    } else {
        libm::cos(t * libm::sqrt(-delta))
    }
}

/// `(c_delta(t) - 1) / delta`, extended through the removable singularity at
/// `delta = 0` (limit `t^2 / 2`). Needed by the off-diagonal Jacobi entry of
/// the E(kappa, tau) closed form.
pub fn c_delta_minus_one_over_delta(delta: f64, t: f64) -> f64 {
    let x = delta * t * t;
    if delta == 0.0 || (libm::fabs(delta) < SERIES_DELTA && libm::fabs(x) < 0.5) {
        // (t^2/2) * sum_k x^k / (2k+2)!/ (t^2/2 scaling)
        let mut term = 0.5 * t * t;
        let mut sum = term;
        for k in 0u32..24 {
            term *= x / (((2 * k + 3) * (2 * k + 4)) as f64);
            sum += term;
            if libm::fabs(term) <= 1e-18 * libm::fabs(sum) {
                break;
            }
        }
        sum
    } else {
        (c_delta(delta, t) - 1.0) / delta
    }
}

/// A fixed kernel parameter, bundling `delta` with its pair of kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaKernel {
    pub delta: f64,
}

impl DeltaKernel {
    pub fn new(delta: f64) -> Self {
        Self { delta }
    }

    pub fn s(&self, t: f64) -> f64 {
        s_delta(self.delta, t)
    }

    pub fn c(&self, t: f64) -> f64 {
        c_delta(self.delta, t)
    }

    /// The invariant `c^2 - delta s^2 - 1`, which vanishes identically.
    pub fn pythagoras_defect(&self, t: f64) -> f64 {
        let s = self.s(t);
        let c = self.c(t);
        c * c - self.delta * s * s - 1.0
    }
}
