//! The reduced mean curvature flow: `eps'(t) = H(eps(t))` with
//! `H(r) = -(det D)'/(n det D)(r)`, plus singular-time detection and
//! Type I / Type II classification.
//!
//! Time convention: `H` is the averaged mean curvature (`trace A / n`), so
//! this flow runs `n` times slower than the summed-trace convention used
//! by the second-fundamental-form evolution equation; the cross-check in
//! [`evo_eq_rhs`] accounts for that factor explicitly.

use crate::catalog::FamilySolution;
use crate::linalg::SquareMatrix;
use crate::ode::{integrate, DenseStep, OdeError, OdeOptions, StepControl};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    Running,
    /// The displacement reached the focal radius (flow extinct there).
    FocalReached,
    /// Mean curvature exceeded the blow-up threshold (or the stepper
    /// stalled) away from a known focal radius.
    BlowUp,
    /// Stationary data detected and early stop requested.
    Converged,
    MaxTime,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowSample {
    pub t: f64,
    pub eps: f64,
    pub h: f64,
    pub norm_a2: f64,
    pub det_d: f64,
}

#[derive(Debug, Clone)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    pub t_max: f64,
    /// `|H|` beyond this is treated as blow-up; the ODE is singular
    /// exactly at the focal radius, so threshold and step underflow
    /// indicate the same event.
    pub blowup_h: f64,
    /// Distance to a known focal radius within which a blow-up is
    /// reported as `FocalReached`.
    pub focal_proximity: f64,
    /// Stop early (status `Converged`) when `|H|` stays below
    /// `stationary_h`; off by default so stationary data runs to
    /// `t_max` with status `MaxTime`.
    pub stop_when_stationary: bool,
    pub stationary_h: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            t_max: 10.0,
            blowup_h: 1e8,
            focal_proximity: 1e-5,
            stop_when_stationary: false,
            stationary_h: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub samples: Vec<FlowSample>,
    pub status: FlowStatus,
    pub t_end: f64,
    pub eps_end: f64,
    pub n: usize,
    dense: Vec<DenseStep>,
}

impl FlowTrajectory {
    /// Dense-output evaluation of `eps(t)` anywhere in `[0, t_end]`.
    pub fn eval_eps(&self, t: f64) -> f64 {
        if self.dense.is_empty() || t <= 0.0 {
            return 0.0;
        }
        if t >= self.t_end {
            return self.eps_end;
        }
        // Binary search for the segment containing t.
        let mut lo = 0usize;
        let mut hi = self.dense.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.dense[mid].t_end() < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        self.dense[lo].eval_scalar(t)
    }

    pub fn last(&self) -> Option<&FlowSample> {
        self.samples.last()
    }
}

/// A singular-time report; classification fields are filled in by
/// [`classify_singularity`].
#[derive(Debug, Clone)]
pub struct SingularityReport {
    /// Estimated singular time.
    pub t_sing: f64,
    /// Spread between the tail estimate and its Richardson check.
    pub t_spread: f64,
    /// Signed focal displacement `eps(T)`.
    pub focal_r: f64,
    pub class: SingularityClass,
    /// Estimated `lim (T - t) sup |A|^2` (finite for Type I).
    pub lambda: Option<f64>,
    pub bound: Option<BoundCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityClass {
    Unclassified,
    TypeI,
    TypeII,
    NoSingularity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    /// The trajectory ran to `t_max` with bounded curvature.
    NoSingularity,
    /// Too few usable samples in the requested asymptotic window.
    InconclusiveWindow { usable: usize, needed: usize },
    MissingFocalData,
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::NoSingularity => write!(f, "flow reached max time with bounded curvature"),
            FlowError::InconclusiveWindow { usable, needed } => {
                write!(f, "only {usable} samples in the asymptotic window (need {needed})")
            }
            FlowError::MissingFocalData => write!(f, "no focal radius available for this family"),
        }
    }
}

/// Integrates the reduced flow for a catalog family. Termination folds
/// integration failures into the status (`BlowUp`), per the convention
/// that the ODE is singular exactly at the focal radius.
pub fn integrate_flow(family: &FamilySolution, opts: &FlowOptions) -> FlowTrajectory {
    let n = family.n;
    let focal = family.focal_toward_motion();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = family.h_of_r(y[0]);
    };

    let mut samples = Vec::new();
    let mut dense: Vec<DenseStep> = Vec::new();
    let sample_at = |t: f64, eps: f64| -> FlowSample {
        FlowSample {
            t,
            eps,
            h: family.h_of_r(eps),
            norm_a2: family.norm_a2(eps),
            det_d: family.det_d(eps),
        }
    };
    samples.push(sample_at(0.0, 0.0));

    let h0 = family.h_of_r(0.0);
    if h0 == 0.0 {
        // Stationary fixed point: eps stays 0 by uniqueness.
        let status = if opts.stop_when_stationary { FlowStatus::Converged } else { FlowStatus::MaxTime };
        let t_end = if opts.stop_when_stationary { 0.0 } else { opts.t_max };
        if !opts.stop_when_stationary {
            samples.push(sample_at(opts.t_max, 0.0));
        }
        return FlowTrajectory { samples, status, t_end, eps_end: 0.0, n, dense };
    }

    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: None,
        h_max: None,
        max_steps: opts.max_steps,
    };

    let mut status = FlowStatus::Running;
    let result = integrate(rhs, 0.0, &[0.0], opts.t_max, &ode_opts, |step| {
        let eps = step.y[0];
        let h = family.h_of_r(eps);
        samples.push(FlowSample {
            t: step.t_to,
            eps,
            h,
            norm_a2: family.norm_a2(eps),
            det_d: family.det_d(eps),
        });
        dense.push(step.dense.clone());
        if !h.is_finite() || libm::fabs(h) >= opts.blowup_h {
            status = match focal {
                Some(f) if libm::fabs(f - eps) <= opts.focal_proximity => FlowStatus::FocalReached,
                _ => FlowStatus::BlowUp,
            };
            return StepControl::Stop;
        }
        if opts.stop_when_stationary && libm::fabs(h) < opts.stationary_h {
            status = FlowStatus::Converged;
            return StepControl::Stop;
        }
        StepControl::Continue
    });

    let (t_end, eps_end) = match result {
        Ok(sol) => {
            if !sol.stopped_early {
                status = FlowStatus::MaxTime;
            }
            (sol.t, sol.y[0])
        }
        Err(OdeError::StepSizeUnderflow { t } | OdeError::MaxStepsExceeded { t }) => {
            let eps = samples.last().map(|s| s.eps).unwrap_or(0.0);
            status = match focal {
                Some(f) if libm::fabs(f - eps) <= opts.focal_proximity => FlowStatus::FocalReached,
                _ => FlowStatus::BlowUp,
            };
            (t, eps)
        }
    };

    FlowTrajectory { samples, status, t_end, eps_end, n, dense }
}

/// Estimates the singular time of a terminated trajectory.
///
/// Near a simple zero of `det D` the flow obeys
/// `eps' ~ 1/(n (r_f - eps))`, so `T - t ~ n (r_f - eps)^2 / 2`; the tail
/// estimate from the last sample is refined by a Richardson consistency
/// value from the previous samples. The reported `focal_r` is the signed
/// focal displacement in the direction of motion.
pub fn detect_singularity(
    traj: &FlowTrajectory,
    family: &FamilySolution,
) -> Result<SingularityReport, FlowError> {
    match traj.status {
        FlowStatus::FocalReached | FlowStatus::BlowUp => {}
        _ => return Err(FlowError::NoSingularity),
    }
    let n = traj.n as f64;
    let focal = match family.focal_toward_motion() {
        Some(f) => f,
        None => {
            // Fall back to the asymptotic relation r_f ~ eps + 1/(n H).
            let last = traj.last().ok_or(FlowError::MissingFocalData)?;
            last.eps + 1.0 / (n * last.h)
        }
    };

    let estimate = |s: &FlowSample| {
        let d = focal - s.eps;
        s.t + n * d * d / 2.0
    };
    let t_last = estimate(traj.samples.last().unwrap());
    let t_prev = if traj.samples.len() >= 2 {
        estimate(&traj.samples[traj.samples.len() - 2])
    } else {
        t_last
    };

    Ok(SingularityReport {
        t_sing: t_last,
        t_spread: libm::fabs(t_last - t_prev),
        focal_r: focal,
        class: SingularityClass::Unclassified,
        lambda: None,
        bound: None,
    })
}

/// Options for the asymptotic classification window
/// `[T - delta, T - delta/10]`.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyWindow {
    /// Width `delta` of the final decade; `None` picks
    /// `max(0.02 T, 1e3 (T - t_end))` automatically.
    pub delta: Option<f64>,
    pub points: usize,
}

impl Default for ClassifyWindow {
    fn default() -> Self {
        Self { delta: None, points: 64 }
    }
}

/// Fits `Lambda(t) = (T - t) |A|^2(t)` on log-spaced samples of the final
/// decade before `T` and classifies the singularity: Type I when the
/// values converge (relative spread below 5%), Type II otherwise. The
/// stored `lambda` is the linear-in-`(T - t)` intercept.
pub fn classify_singularity(
    traj: &FlowTrajectory,
    family: &FamilySolution,
    report: &mut SingularityReport,
    window: ClassifyWindow,
) -> Result<(), FlowError> {
    let t_sing = report.t_sing;
    let tail = (t_sing - traj.t_end).max(0.0);
    let delta = window.delta.unwrap_or_else(|| (0.02 * t_sing).max(1e3 * tail));
    let needed = 32usize;
    if window.points < needed {
        return Err(FlowError::InconclusiveWindow { usable: window.points, needed });
    }

    // Log-spaced tau = T - t in [delta/10, delta]; all must lie inside
    // the computed trajectory.
    let mut lams = Vec::with_capacity(window.points);
    let mut taus = Vec::with_capacity(window.points);
    let log_lo = libm::log(delta / 10.0);
    let log_hi = libm::log(delta);
    for j in 0..window.points {
        let f = j as f64 / (window.points - 1) as f64;
        let tau = libm::exp(log_lo + f * (log_hi - log_lo));
        let t = t_sing - tau;
        if t < 0.0 || t > traj.t_end {
            continue;
        }
        let eps = traj.eval_eps(t);
        let na2 = family.norm_a2(eps);
        if !na2.is_finite() {
            continue;
        }
        taus.push(tau);
        lams.push(tau * na2);
    }
    if lams.len() < needed {
        return Err(FlowError::InconclusiveWindow { usable: lams.len(), needed });
    }

    // Least-squares linear fit Lambda(tau) = a + b tau; intercept a is
    // the limit estimate.
    let m = lams.len() as f64;
    let sx: f64 = taus.iter().sum();
    let sy: f64 = lams.iter().sum();
    let sxx: f64 = taus.iter().map(|x| x * x).sum();
    let sxy: f64 = taus.iter().zip(&lams).map(|(x, y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    let intercept = if denom.abs() < 1e-300 { sy / m } else { (sy * sxx - sx * sxy) / denom };

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &l in &lams {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    let spread = (hi - lo) / libm::fabs(intercept).max(1e-300);

    report.lambda = Some(intercept);
    report.class = if intercept.is_finite() && spread < 0.05 {
        SingularityClass::TypeI
    } else {
        SingularityClass::TypeII
    };
    Ok(())
}

/// Outcome of the Type I curvature-bound diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub ok: bool,
    /// `true` when the bound degenerates (flat ambient, `C~ = 0`) and the
    /// check is vacuous.
    pub skipped: bool,
    /// Largest observed `|A|^2 (e^{2(T-t)} - 1) / C~` on the window.
    pub max_ratio: f64,
    /// The hypothesis window in `tau = T - t` (empty when skipped).
    pub window: (f64, f64),
}

/// Checks the blow-up estimate `|A|^2(t) <= C~ / (e^{2(T-t)} - 1)` with a
/// slack factor, on the window where `|A|^2 >= max(|A|, C~)` (that is,
/// `|A|^2 >= max(1, C~)`).
pub fn type_i_bound_check(
    c_tilde: f64,
    traj: &FlowTrajectory,
    family: &FamilySolution,
    report: &SingularityReport,
    slack: f64,
) -> BoundCheck {
    if c_tilde <= 0.0 {
        return BoundCheck { ok: true, skipped: true, max_ratio: 0.0, window: (0.0, 0.0) };
    }
    let t_sing = report.t_sing;
    let floor = c_tilde.max(1.0);
    let tail = (t_sing - traj.t_end).max(1e-14 * t_sing.max(1.0));

    let mut max_ratio = 0.0_f64;
    let mut tau_lo = f64::INFINITY;
    let mut tau_hi: f64 = 0.0;
    let points = 256;
    let log_lo = libm::log(tail.max(1e-13));
    let log_hi = libm::log(t_sing.min(traj.t_end).max(tail * 10.0));
    for j in 0..points {
        let f = j as f64 / (points - 1) as f64;
        let tau = libm::exp(log_lo + f * (log_hi - log_lo));
        let t = t_sing - tau;
        if t < 0.0 || t > traj.t_end {
            continue;
        }
        let na2 = family.norm_a2(traj.eval_eps(t));
        if !na2.is_finite() || na2 < floor {
            continue;
        }
        let ratio = na2 * (libm::exp(2.0 * tau) - 1.0) / c_tilde;
        max_ratio = max_ratio.max(ratio);
        tau_lo = tau_lo.min(tau);
        tau_hi = tau_hi.max(tau);
    }
    if tau_hi == 0.0 {
        // Curvature never entered the hypothesis window.
        return BoundCheck { ok: true, skipped: true, max_ratio: 0.0, window: (0.0, 0.0) };
    }
    BoundCheck { ok: max_ratio <= slack, skipped: false, max_ratio, window: (tau_lo, tau_hi) }
}

/// Right-hand side of the reduced second-fundamental-form evolution for a
/// locally symmetric ambient:
///
/// ```text
/// 2 |A|^2 (|A|^2 + Ric(N, N)) - 4 (C1 - C2),
/// C1 = sum_i  lambda_i^2  RicT_i,   RicT_i = sum_l K(e_i, e_l),
/// C2 = sum_{i != l} lambda_i lambda_l K(e_i, e_l),
/// ```
///
/// in the principal frame, with `K(e_i, e_l)` the ambient tangent-pair
/// sectional curvatures (`sec_tangent`). The index conventions are fixed
/// by requiring the flat-ambient oracle to match. This is the evolution
/// in the summed-trace time; along this library's trajectories the
/// cross-check reads
///
/// ```text
/// n d|A|^2/dt + 2 |grad A|^2 = evo_eq_rhs.
/// ```
pub fn evo_eq_rhs(lambdas: &[f64], ric_nn: f64, sec_tangent: &SquareMatrix) -> f64 {
    let n = lambdas.len();
    assert_eq!(sec_tangent.n(), n);
    let a2: f64 = lambdas.iter().map(|l| l * l).sum();
    let mut c1 = 0.0;
    let mut c2 = 0.0;
    for i in 0..n {
        let mut ric_t = 0.0;
        for l in 0..n {
            ric_t += sec_tangent.get(i, l);
            if l != i {
                c2 += lambdas[i] * lambdas[l] * sec_tangent.get(i, l);
            }
        }
        c1 += lambdas[i] * lambdas[i] * ric_t;
    }
    2.0 * a2 * (a2 + ric_nn) - 4.0 * (c1 - c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{
        ektau_parabolic_helicoid, ektau_vertical_cylinder, h2h2_family, s2r2_family, s2s2_family,
        space_form_family, S2R2Case,
    };

    fn run(family: &FamilySolution, t_max: f64) -> FlowTrajectory {
        integrate_flow(family, &FlowOptions { t_max, ..FlowOptions::default() })
    }

    #[test]
    fn slice_is_stationary_to_max_time() {
        let fam = s2r2_family(S2R2Case::Slice).unwrap();
        let traj = run(&fam, 5.0);
        assert_eq!(traj.status, FlowStatus::MaxTime);
        assert_eq!(traj.eps_end, 0.0);
        assert!(traj.samples.iter().all(|s| s.eps == 0.0));
    }

    #[test]
    fn helicoid_flow_is_linear_forever() {
        let fam = ektau_parabolic_helicoid(-4.0, 0.7, 0.45).unwrap();
        let traj = run(&fam, 10.0);
        assert_eq!(traj.status, FlowStatus::MaxTime);
        for s in &traj.samples {
            assert!((s.eps - 0.45 * s.t).abs() < 1e-10, "t = {}", s.t);
        }
        assert!(matches!(detect_singularity(&traj, &fam), Err(FlowError::NoSingularity)));
    }

    #[test]
    fn s2xs1_explicit_solution_and_singular_time() {
        let b = 1.0;
        let fam = s2r2_family(S2R2Case::S2xS1 { b }).unwrap();
        let traj = run(&fam, 10.0);
        assert_eq!(traj.status, FlowStatus::FocalReached);
        let t_cut = 0.99 * 1.5;
        for s in traj.samples.iter().filter(|s| s.t <= t_cut) {
            let expect = libm::sqrt(b * b - 2.0 * s.t / 3.0) - b;
            assert!((s.eps - expect).abs() < 1e-8, "t = {}", s.t);
        }
        let rep = detect_singularity(&traj, &fam).unwrap();
        assert!((rep.t_sing - 1.5).abs() < 1e-7, "T = {}", rep.t_sing);
        assert!((rep.focal_r + 1.0).abs() < 1e-9);
        // Singular displacement matches the focal radius.
        assert!((traj.eps_end - rep.focal_r).abs() < 1e-6);
    }

    #[test]
    fn s2xs1_lambda_is_three_halves() {
        let fam = s2r2_family(S2R2Case::S2xS1 { b: 1.0 }).unwrap();
        let traj = run(&fam, 10.0);
        let mut rep = detect_singularity(&traj, &fam).unwrap();
        classify_singularity(&traj, &fam, &mut rep, ClassifyWindow::default()).unwrap();
        assert_eq!(rep.class, SingularityClass::TypeI);
        let lam = rep.lambda.unwrap();
        assert!((lam - 1.5).abs() < 0.015, "Lambda = {lam}");

        // Window-halving stability below 1%.
        let mut rep2 = detect_singularity(&traj, &fam).unwrap();
        let delta = (0.02 * rep.t_sing).max(1e3 * (rep.t_sing - traj.t_end));
        classify_singularity(
            &traj,
            &fam,
            &mut rep2,
            ClassifyWindow { delta: Some(delta / 2.0), points: 64 },
        )
        .unwrap();
        let lam2 = rep2.lambda.unwrap();
        assert!((lam2 - lam).abs() / lam < 0.01, "{lam} vs {lam2}");
    }

    #[test]
    fn shrinking_sphere_lambda_n_over_2() {
        // S^n(R0) in R^{n+1}: Lambda = n/2.
        for n in 2..=3usize {
            let r0 = 1.3;
            let lambdas: Vec<f64> = (0..n).map(|_| 1.0 / r0).collect();
            let fam = space_form_family(0.0, &lambdas);
            let traj = run(&fam, 10.0);
            assert_eq!(traj.status, FlowStatus::FocalReached);
            // Explicit solution eps = R0 - sqrt(R0^2 - 2t) holds row-wise
            // away from the singular time.
            for s in traj.samples.iter().filter(|s| s.t <= 0.99 * r0 * r0 / 2.0) {
                let expect = r0 - (r0 * r0 - 2.0 * s.t).sqrt();
                assert!((s.eps - expect).abs() < 1e-7, "n = {n}, t = {}", s.t);
            }
            let mut rep = detect_singularity(&traj, &fam).unwrap();
            // T = R0^2 n / (2 k lambda^2 / n)... direct: 1 - 2 t lambda^2 k/n = 0
            // with k = n: T = R0^2 / 2.
            assert!((rep.t_sing - r0 * r0 / 2.0).abs() < 1e-7);
            classify_singularity(&traj, &fam, &mut rep, ClassifyWindow::default()).unwrap();
            assert_eq!(rep.class, SingularityClass::TypeI);
            assert!((rep.lambda.unwrap() - n as f64 / 2.0).abs() < 0.02);
        }
    }

    #[test]
    fn s1xr2_singular_time() {
        let phi = 1.0; // < pi/2
        let fam = s2r2_family(S2R2Case::S1xR2 { phi_a: phi }).unwrap();
        let traj = run(&fam, 20.0);
        assert_eq!(traj.status, FlowStatus::FocalReached);
        let rep = detect_singularity(&traj, &fam).unwrap();
        let expect = 3.0 * libm::log(1.0 / libm::cos(phi));
        assert!((rep.t_sing - expect).abs() < 1e-7, "{} vs {expect}", rep.t_sing);
    }

    #[test]
    fn implicit_relations_hold_along_trajectories() {
        let fams = [
            ektau_vertical_cylinder(-1.0, 0.4, 2.0).unwrap(),
            ektau_vertical_cylinder(1.0, 0.3, 1.1).unwrap(),
            s2r2_family(S2R2Case::S1xR2 { phi_a: core::f64::consts::FRAC_PI_3 }).unwrap(),
            s2s2_family(0.45).unwrap(),
            h2h2_family(1.5).unwrap(),
            h2h2_family(2.0).unwrap(),
            h2h2_family(5.0).unwrap(),
        ];
        for fam in &fams {
            let traj = run(fam, 30.0);
            for s in &traj.samples {
                if let Some(res) = fam.analytic_residual(s.eps, s.t) {
                    assert!(
                        res.abs() < 1e-7,
                        "{}: residual {res} at t = {}",
                        fam.name,
                        s.t
                    );
                }
            }
        }
    }

    #[test]
    fn vertical_cylinder_singular_time_vs_implicit_formula() {
        // Integrated T against (1/kappa) ln(1 + kappa/k_g^2); the printed
        // remark values are reported separately, not asserted.
        for &(kappa, tau, kg) in &[(1.0, 0.4, 1.3), (-1.0, 0.3, 1.9), (2.0, 0.5, 0.8)] {
            let fam = ektau_vertical_cylinder(kappa, tau, kg).unwrap();
            let traj = run(&fam, 50.0);
            assert_eq!(traj.status, FlowStatus::FocalReached, "kappa={kappa} kg={kg}");
            let rep = detect_singularity(&traj, &fam).unwrap();
            let derived = fam
                .reference_times
                .iter()
                .find(|rt| rt.label == "implicit-relation")
                .unwrap()
                .value;
            assert!(
                (rep.t_sing - derived).abs() < 1e-6,
                "kappa={kappa} kg={kg}: {} vs {derived}",
                rep.t_sing
            );
        }
    }

    #[test]
    fn subcritical_hyperbolic_cylinder_flows_forever() {
        // kappa < 0, k_g^2 < |kappa|: no focal point, flow for all time.
        let fam = ektau_vertical_cylinder(-1.0, 0.4, 0.6).unwrap();
        assert!(fam.focal_toward_motion().is_none());
        let traj = run(&fam, 15.0);
        assert_eq!(traj.status, FlowStatus::MaxTime);
        // H stays bounded (the parallels approach a horocycle cylinder).
        let last = traj.last().unwrap();
        assert!(last.h.is_finite() && last.h.abs() < 1.0);
    }

    #[test]
    fn bound_check_flat_is_skipped() {
        let fam = space_form_family(0.0, &[1.0, 1.0]);
        let traj = run(&fam, 10.0);
        let rep = detect_singularity(&traj, &fam).unwrap();
        let chk = type_i_bound_check(0.0, &traj, &fam, &rep, 2.0);
        assert!(chk.skipped && chk.ok);
    }

    #[test]
    fn bound_check_s2xs1_within_slack() {
        let fam = s2r2_family(S2R2Case::S2xS1 { b: 1.0 }).unwrap();
        let traj = run(&fam, 10.0);
        let rep = detect_singularity(&traj, &fam).unwrap();
        let chk = type_i_bound_check(fam.c_tilde, &traj, &fam, &rep, 2.0);
        assert!(!chk.skipped);
        assert!(chk.ok, "max ratio {}", chk.max_ratio);
    }

    #[test]
    fn evo_rhs_zero_for_vanishing_shape() {
        let sec = SquareMatrix::zeros(3);
        assert_eq!(evo_eq_rhs(&[0.0, 0.0, 0.0], 0.7, &sec), 0.0);
    }

    /// Finite-difference oracle: n d|A|^2/dt + 2 |grad A|^2 must equal
    /// evo_eq_rhs along the trajectory for locally symmetric families.
    fn evo_consistency(fam: &FamilySolution, t_lo: f64, t_hi: f64) -> f64 {
        let traj = run(fam, t_hi * 1.05);
        let n = fam.n as f64;
        let grad = fam.grad_a_sq.expect("family must be locally symmetric");
        let sec = fam.sec_tangent.as_ref().unwrap();
        let dt = 1e-5;
        let mut worst = 0.0_f64;
        for k in 0..40 {
            let t = t_lo + (t_hi - t_lo) * k as f64 / 39.0;
            if t - dt < 0.0 || t + dt > traj.t_end {
                continue;
            }
            let na2 = |tt: f64| fam.norm_a2(traj.eval_eps(tt));
            let fd = (na2(t + dt) - na2(t - dt)) / (2.0 * dt);
            let lam = fam.eigenvalues(traj.eval_eps(t));
            let rhs = evo_eq_rhs(&lam, fam.ric_normal, sec);
            worst = worst.max(libm::fabs(n * fd + 2.0 * grad - rhs));
        }
        worst
    }

    #[test]
    fn evo_equation_flat_cylinder() {
        // S^1(1) x R in R^3: d|A|^2/dt_summed = 2|A|^4 exactly.
        let fam = space_form_family(0.0, &[1.0, 0.0]);
        let worst = evo_consistency(&fam, 0.0, 0.4);
        assert!(worst < 1e-5, "defect {worst}");
    }

    #[test]
    fn evo_equation_s1xr2() {
        let fam = s2r2_family(S2R2Case::S1xR2 { phi_a: 1.1 }).unwrap();
        let worst = evo_consistency(&fam, 0.0, 0.5);
        assert!(worst < 1e-5, "defect {worst}");
    }

    #[test]
    fn evo_equation_diagonal_families_with_grad_term() {
        // |grad A|^2 = 1 for both diagonal families; without the term the
        // identity fails by exactly 2.
        let fam = s2s2_family(0.4).unwrap();
        let worst = evo_consistency(&fam, 0.0, 0.3);
        assert!(worst < 1e-5, "S2xS2 defect {worst}");

        let famh = h2h2_family(1.7).unwrap();
        let worst_h = evo_consistency(&famh, 0.0, 0.3);
        assert!(worst_h < 1e-5, "H2xH2 defect {worst_h}");
    }

    #[test]
    fn trajectory_rhs_residual_and_jacobi_consistency() {
        // eps'(t) - H(eps(t)) from dense output stays at integrator
        // accuracy, and the stored H matches the family's H at eps.
        let fam = s2s2_family(0.5).unwrap();
        let traj = run(&fam, 10.0);
        for w in traj.samples.windows(2).filter(|w| w[1].h.abs() < 10.0) {
            let (a, b) = (&w[0], &w[1]);
            let tm = 0.5 * (a.t + b.t);
            let h = (b.t - a.t).max(1e-9);
            // Differentiate the dense interpolant with offsets small
            // enough that the finite-difference truncation is negligible.
            let _ = h;
            let dt = 1e-7;
            let de = (traj.eval_eps(tm + dt) - traj.eval_eps(tm - dt)) / (2.0 * dt);
            let defect = (de - fam.h_of_r(traj.eval_eps(tm))).abs();
            assert!(defect < 1e-6 * (1.0 + de.abs()), "defect {defect:.3e} at t = {tm}");
        }
        for s in &traj.samples {
            assert_eq!(s.h, fam.h_of_r(s.eps));
        }
    }
}
