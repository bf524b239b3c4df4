//! Registry of the supported ambient spaces.
//!
//! For the locally symmetric families the normal Jacobi equation
//! `D'' + Rbar D = 0` has a constant coefficient matrix `Rbar`: the matrix
//! of `X -> R~(X, gdot) gdot` in a parallel orthonormal frame adapted to
//! the family. This module produces that matrix, the normal Ricci curvature
//! `Ric~(gdot, gdot) = trace(Rbar)`, and the curvature bound
//! `C~ = sup|Ric| + 4 sup|R~| + 2 sup|grad R~|` that controls Type I
//! blow-up.
//!
//! Frame conventions (fixed so matrices are bit-reproducible):
//!
//! * space form `Q^{n+1}_c`: any parallel orthonormal frame; `Rbar = c I`.
//! * `S^2 x R^2`, normal tangent to the `R^2` factor (`C = -1`): frame
//!   `{u1, u2 in T S^2, u3 in T R^2}`; `Rbar = 0`.
//! * `S^2 x R^2`, normal tangent to the `S^2` factor (`C = +1`): frame
//!   `{v1 in T S^2, v2, v3 in T R^2}`; `Rbar = diag(1, 0, 0)`.
//! * diagonal families in `S^2 x S^2` / `H^2 x H^2`: frame
//!   `{(w, w), (w, -w), J}` where `J` is the tangent direction parallel to
//!   the normal's factor components; `Rbar = diag(+-1/2, +-1/2, 0)`.
//!
//! Norm conventions entering `C~` (the bound is convention-dependent, so
//! this library fixes one): `sup|Ric|` is the operator norm of the Ricci
//! endomorphism, `sup|R~|` the largest absolute sectional curvature, and
//! `sup|grad R~|` vanishes for the locally symmetric families. For
//! `E(kappa, tau)` the documented upper bound `8 |tau| |kappa - 4 tau^2|`
//! is used; for the bump product the suprema are sampled on a grid over
//! the bump support.

use crate::csf::metric::BumpParams;
use crate::linalg::SquareMatrix;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Ambient space family plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum AmbientSpec {
    /// Space form `Q^{n+1}_c` of constant sectional curvature `c`,
    /// hypersurface dimension `n`.
    SpaceForm { c: f64, n: usize },
    /// Homogeneous 3-manifold `E(kappa, tau)` with `kappa - 4 tau^2 != 0`
    /// (Berger spheres, Nil_3, the PSL_2 cover, and `Q^2_kappa x R`).
    EkTau { kappa: f64, tau: f64 },
    /// Riemannian product `S^2 x R^2` (unit sphere factor).
    S2xR2,
    /// `S^2 x S^2` with the diagonal hypersurface family parameter
    /// `s in (-1, 1)`.
    S2xS2 { s: f64 },
    /// `H^2 x H^2` with the diagonal family parameter `s > 1`.
    H2xH2 { s: f64 },
    /// Bump-perturbed plane times `R^{n-1}` (Euclidean metric outside a
    /// compactly supported graph bump).
    BumpProduct { bump: BumpParams, n: usize },
}

impl AmbientSpec {
    /// Hypersurface dimension `n` of the family's canonical hypersurfaces.
    pub fn hypersurface_dim(&self) -> usize {
        match self {
            AmbientSpec::SpaceForm { n, .. } => *n,
            AmbientSpec::EkTau { .. } => 2,
            AmbientSpec::S2xR2 | AmbientSpec::S2xS2 { .. } | AmbientSpec::H2xH2 { .. } => 3,
            AmbientSpec::BumpProduct { n, .. } => *n,
        }
    }

    /// Validates the family parameters, returning all violations.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        match self {
            AmbientSpec::SpaceForm { c, n } => {
                if !c.is_finite() {
                    errs.push(String::from("space form curvature c must be finite"));
                }
                if *n == 0 {
                    errs.push(String::from("hypersurface dimension n must be positive"));
                }
            }
            AmbientSpec::EkTau { kappa, tau } => {
                if kappa - 4.0 * tau * tau == 0.0 {
                    errs.push(String::from("E(kappa, tau) requires kappa - 4 tau^2 != 0"));
                }
            }
            AmbientSpec::S2xR2 => {}
            AmbientSpec::S2xS2 { s } => {
                if !(s.is_finite() && libm::fabs(*s) < 1.0) {
                    errs.push(String::from("S2xS2 family requires s in (-1, 1)"));
                }
            }
            AmbientSpec::H2xH2 { s } => {
                if !(s.is_finite() && *s > 1.0) {
                    errs.push(String::from("H2xH2 family requires s > 1"));
                }
            }
            AmbientSpec::BumpProduct { bump, n } => {
                if !(bump.sigma > 0.0) {
                    errs.push(String::from("bump radius sigma must be positive"));
                }
                if *n == 0 {
                    errs.push(String::from("hypersurface dimension n must be positive"));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// How the unit normal sits relative to the ambient structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalFrameContext {
    /// Space forms: isotropic, no extra data.
    SpaceForm,
    /// `E(kappa, tau)`: constant angle function `nu = <xi, N>`.
    EkTau { nu: f64 },
    /// `S^2 x R^2`: sign of `C = <PN, N>` for the product structure `P`.
    /// `C = -1` means the normal is tangent to the `R^2` factor,
    /// `C = +1` tangent to the `S^2` factor.
    ProductSign { c: i8 },
    /// Diagonal families in `S^2 x S^2` / `H^2 x H^2`: the normal splits
    /// evenly between the factors.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AmbientError {
    /// The family has no constant curvature operator in a parallel frame
    /// (E(kappa, tau) is handled by its closed-form `D`, the bump product
    /// by the intrinsic curve solver).
    UnsupportedFamily(&'static str),
    InvalidContext(&'static str),
}

impl fmt::Display for AmbientError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientError::UnsupportedFamily(fam) => {
                write!(f, "no constant curvature operator for family {fam}")
            }
            AmbientError::InvalidContext(msg) => write!(f, "invalid normal frame context: {msg}"),
        }
    }
}

/// Matrix of `X -> R~(X, gdot) gdot` in the family's parallel frame.
pub fn curvature_operator(
    space: &AmbientSpec,
    ctx: &NormalFrameContext,
) -> Result<SquareMatrix, AmbientError> {
    match (space, ctx) {
        (AmbientSpec::SpaceForm { c, n }, NormalFrameContext::SpaceForm) => {
            Ok(SquareMatrix::identity(*n).scale(*c))
        }
        (AmbientSpec::S2xR2, NormalFrameContext::ProductSign { c }) => match c {
            -1 => Ok(SquareMatrix::zeros(3)),
            1 => Ok(SquareMatrix::diag(&[1.0, 0.0, 0.0])),
            _ => Err(AmbientError::InvalidContext("product sign must be +1 or -1")),
        },
        (AmbientSpec::S2xS2 { .. }, NormalFrameContext::Diagonal) => {
            Ok(SquareMatrix::diag(&[0.5, 0.5, 0.0]))
        }
        (AmbientSpec::H2xH2 { .. }, NormalFrameContext::Diagonal) => {
            Ok(SquareMatrix::diag(&[-0.5, -0.5, 0.0]))
        }
        (AmbientSpec::EkTau { .. }, _) => Err(AmbientError::UnsupportedFamily("E(kappa, tau)")),
        (AmbientSpec::BumpProduct { .. }, _) => {
            Err(AmbientError::UnsupportedFamily("bump product"))
        }
        _ => Err(AmbientError::InvalidContext("context does not match family")),
    }
}

/// Normal Ricci curvature `Ric~(gdot, gdot) = trace(Rbar)` (valid since
/// `R~(gdot, gdot) gdot = 0`).
pub fn ricci_normal(space: &AmbientSpec, ctx: &NormalFrameContext) -> Result<f64, AmbientError> {
    curvature_operator(space, ctx).map(|m| m.trace())
}

/// Curvature bound data for the Type I estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientBounds {
    /// `C~ = sup|Ric| + 4 sup|R~| + 2 sup|grad R~|` under the conventions
    /// documented at module level.
    pub c_tilde: f64,
    pub sup_ricci: f64,
    pub sup_riemann: f64,
    pub sup_grad_riemann: f64,
}

/// Computes `C~` for the family.
pub fn ambient_bounds(space: &AmbientSpec) -> AmbientBounds {
    let (sup_ricci, sup_riemann, sup_grad) = match space {
        AmbientSpec::SpaceForm { c, n } => (*n as f64 * libm::fabs(*c), libm::fabs(*c), 0.0),
        AmbientSpec::EkTau { kappa, tau } => {
            let t2 = tau * tau;
            let sup_ric = (2.0 * t2).max(libm::fabs(kappa - 2.0 * t2));
            let sup_r = t2.max(libm::fabs(kappa - 3.0 * t2));
            // Homogeneous but not locally symmetric; the stated upper bound
            // comes from differentiating the xi-terms of the curvature
            // tensor (grad xi = tau J contributes one factor tau per term).
            let sup_grad = 8.0 * libm::fabs(*tau) * libm::fabs(kappa - 4.0 * t2);
            (sup_ric, sup_r, sup_grad)
        }
        // Products of unit-curvature factors: Ricci operator norm 1,
        // sectional curvatures in [0, 1] or [-1, 0].
        AmbientSpec::S2xR2 | AmbientSpec::S2xS2 { .. } | AmbientSpec::H2xH2 { .. } => {
            (1.0, 1.0, 0.0)
        }
        AmbientSpec::BumpProduct { bump, .. } => bump_curvature_bounds(bump),
    };
    AmbientBounds {
        c_tilde: sup_ricci + 4.0 * sup_riemann + 2.0 * sup_grad,
        sup_ricci,
        sup_riemann,
        sup_grad_riemann: sup_grad,
    }
}

/// Grid-sampled curvature suprema over the bump support. The only nonzero
/// sectional curvature of `graph x R^{n-1}` is the Gauss curvature `K` of
/// the graph plane, so `sup|Ric| = sup|R~| = max|K|`.
fn bump_curvature_bounds(bump: &BumpParams) -> (f64, f64, f64) {
    if bump.height == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let m = 240usize;
    let step = 2.0 * bump.sigma / m as f64;
    let mut max_k = 0.0_f64;
    let mut max_grad_k = 0.0_f64;
    let fd = step * 0.5;
    for i in 0..=m {
        for j in 0..=m {
            let x = [
                bump.p[0] - bump.sigma + i as f64 * step,
                bump.p[1] - bump.sigma + j as f64 * step,
            ];
            let k = bump.gauss_curvature(x);
            max_k = max_k.max(libm::fabs(k));
            let kx = (bump.gauss_curvature([x[0] + fd, x[1]])
                - bump.gauss_curvature([x[0] - fd, x[1]]))
                / (2.0 * fd);
            let ky = (bump.gauss_curvature([x[0], x[1] + fd])
                - bump.gauss_curvature([x[0], x[1] - fd]))
                / (2.0 * fd);
            max_grad_k = max_grad_k.max(libm::sqrt(kx * kx + ky * ky));
        }
    }
    (max_k, max_k, max_grad_k)
}
