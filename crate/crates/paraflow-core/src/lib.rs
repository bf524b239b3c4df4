//! Mean curvature flow of isoparametric hypersurfaces, reduced to a scalar ODE.
//!
//! An isoparametric hypersurface evolves under mean curvature flow by a
//! reparametrization of its parallel family: `F(x, t) = exp_x(eps(t) N(x))`
//! where the displacement satisfies `eps'(t) = -(det D)'/(n det D)(eps(t))`
//! and `D` is the Jacobi endomorphism along the normal geodesic. This crate
//! provides:
//!
//! * [`gtrig`]: generalized sine/cosine kernels switching between the trig
//!   and hyperbolic branches by the sign of a curvature-like parameter;
//! * [`ambient`]: a registry of the supported ambient spaces with their
//!   constant curvature operators and curvature bounds;
//! * [`jacobi`]: numeric and closed-form propagation of the Jacobi
//!   endomorphism and the derived parallel-hypersurface geometry;
//! * [`catalog`]: the closed-form isoparametric families (vertical
//!   cylinders and parabolic helicoids in E(kappa, tau), the S^2 x R^2
//!   families, and the diagonal families in S^2 x S^2 and H^2 x H^2);
//! * [`flow`]: the reduced flow integrator with singular-time detection and
//!   Type I / Type II classification;
//! * [`csf`]: an intrinsic curve-shortening solver on a bump-perturbed
//!   plane, used to exhibit a flow that stops being a parallel flow in
//!   finite time.
//!
//! The crate is `no_std` compatible (`default-features = false`); it only
//! needs `alloc` and `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ambient;
pub mod catalog;
pub mod csf;
pub mod flow;
pub mod gtrig;
pub mod jacobi;
pub mod linalg;
pub mod ode;
pub mod rng;
