//! The verification suite behind `--selftest` and the acceptance test
//! target: nine numbered checks, each with its tolerances pinned here
//! (overridable only through the named `--tol-override` keys).

use crate::runner::{fmt_f, pseudo_geometry, TolOverrides};
use paraflow_core::ambient::{curvature_operator, AmbientSpec, NormalFrameContext};
use paraflow_core::catalog::{
    ektau_parabolic_helicoid, ektau_vertical_cylinder, h2h2_family, s2r2_family, s2s2_family,
    space_form_family, FamilySolution, S2R2Case, TangentClass,
};
use paraflow_core::csf::{run_with_control, BumpParams, ExperimentParams};
use paraflow_core::flow::{
    classify_singularity, detect_singularity, integrate_flow, type_i_bound_check, ClassifyWindow,
    FlowOptions, FlowStatus, SingularityClass,
};
use paraflow_core::jacobi::{parallel_geometry, propagate_grid, riccati_residual, ShapeOperator};
use paraflow_core::ode::OdeOptions;
use paraflow_core::rng::SplitMix64;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
    pub millis: u128,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {} ({}): {} [{} ms]",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.millis
        )
    }
}

struct Check {
    passed: bool,
    details: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { passed: true, details: Vec::new() }
    }

    fn note(&mut self, msg: String) {
        self.details.push(msg);
    }

    fn require(&mut self, ok: bool, msg: String) {
        if !ok {
            self.passed = false;
            self.details.push(format!("FAIL {msg}"));
        }
    }
}

fn flow_opts(t_max: f64) -> FlowOptions {
    FlowOptions { rtol: 1e-12, atol: 1e-14, t_max, ..FlowOptions::default() }
}

/// Criterion 1: parabolic helicoids follow `eps = H t` to 1e-9 over
/// `t in [0, 10]` for 20 random parameter draws, in under a second.
fn criterion_helicoid(seed: u64, tols: &TolOverrides) -> Check {
    let mut check = Check::new();
    let mut rng = SplitMix64::new(seed ^ 0x01);
    let tol = tols.get("helicoid.eps_tol");
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let kappa = rng.uniform(-5.0, -0.5);
        let tau = rng.uniform(0.1, 1.0) * rng.sign();
        let h_cap = 0.95 * (-kappa).sqrt() / 2.0;
        let h = rng.uniform(-h_cap, h_cap);
        let fam = match ektau_parabolic_helicoid(kappa, tau, h) {
            Ok(f) => f,
            Err(e) => {
                check.require(false, format!("constructor rejected ({kappa}, {tau}, {h}): {e}"));
                continue;
            }
        };
        let traj = integrate_flow(&fam, &flow_opts(10.0));
        check.require(
            traj.status == FlowStatus::MaxTime,
            format!("helicoid flow should run to t_max, got {:?}", traj.status),
        );
        for s in &traj.samples {
            worst = worst.max((s.eps - h * s.t).abs());
        }
    }
    check.note(format!("max |eps - H t| = {}", fmt_f(worst)));
    check.require(worst <= tol, format!("max |eps - H t| = {} > {}", fmt_f(worst), fmt_f(tol)));
    check
}

/// Criterion 2: `S^2 x S^1(b)` matches its explicit solution to 1e-7 up
/// to `0.99 T`, locates `T = 3 b^2 / 2` to 1e-6, and estimates
/// `Lambda = 3/2` within 1%.
fn criterion_s2xs1(tols: &TolOverrides) -> Check {
    let mut check = Check::new();
    let eps_tol = tols.get("s2xs1.eps_tol");
    let t_tol = tols.get("s2xs1.t_tol");
    let lam_rel = tols.get("s2xs1.lambda_rel");
    for &b in &[0.5_f64, 1.0, 2.0] {
        let fam = s2r2_family(S2R2Case::S2xS1 { b }).unwrap();
        let traj = integrate_flow(&fam, &flow_opts(10.0 * b * b));
        check.require(
            traj.status == FlowStatus::FocalReached,
            format!("b = {b}: expected focal arrival, got {:?}", traj.status),
        );
        let t_exact = 1.5 * b * b;
        let mut worst = 0.0_f64;
        for s in traj.samples.iter().filter(|s| s.t <= 0.99 * t_exact) {
            let expect = (b * b - 2.0 * s.t / 3.0).sqrt() - b;
            worst = worst.max((s.eps - expect).abs());
        }
        check.require(
            worst <= eps_tol,
            format!("b = {b}: |eps - closed form| = {} > {}", fmt_f(worst), fmt_f(eps_tol)),
        );
        let mut rep = match detect_singularity(&traj, &fam) {
            Ok(r) => r,
            Err(e) => {
                check.require(false, format!("b = {b}: no singularity detected: {e}"));
                continue;
            }
        };
        check.note(format!("b = {b}: T = {}, |T - 3b^2/2| = {}", fmt_f(rep.t_sing), fmt_f((rep.t_sing - t_exact).abs())));
        check.require(
            (rep.t_sing - t_exact).abs() <= t_tol,
            format!("b = {b}: |T - {}| = {}", fmt_f(t_exact), fmt_f((rep.t_sing - t_exact).abs())),
        );
        if classify_singularity(&traj, &fam, &mut rep, ClassifyWindow::default()).is_ok() {
            let lam = rep.lambda.unwrap_or(f64::NAN);
            check.require(
                (lam - 1.5).abs() / 1.5 <= lam_rel,
                format!("b = {b}: Lambda = {} not within 1% of 3/2", fmt_f(lam)),
            );
        } else {
            check.require(false, format!("b = {b}: classification window inconclusive"));
        }
    }
    check
}

/// Criterion 3: `S^1(a) x R^2` keeps its conserved relation to 1e-7 and
/// matches `T = 3 ln(1/cos phi_a)` to 1e-6 for `phi_a < pi/2`.
fn criterion_s1xr2(tols: &TolOverrides) -> Check {
    let mut check = Check::new();
    let rel_tol = tols.get("s1xr2.relation_tol");
    let t_tol = tols.get("s1xr2.t_tol");
    for &phi in &[0.5_f64, std::f64::consts::FRAC_PI_3, 1.2] {
        let fam = s2r2_family(S2R2Case::S1xR2 { phi_a: phi }).unwrap();
        let traj = integrate_flow(&fam, &flow_opts(30.0));
        let t_exact = 3.0 * (1.0 / phi.cos()).ln();
        let mut worst = 0.0_f64;
        for s in traj.samples.iter().filter(|s| s.t <= 0.995 * t_exact) {
            worst = worst.max(fam.analytic_residual(s.eps, s.t).unwrap().abs());
        }
        check.require(
            worst <= rel_tol,
            format!("phi_a = {phi}: relation residual {} > {}", fmt_f(worst), fmt_f(rel_tol)),
        );
        match detect_singularity(&traj, &fam) {
            Ok(rep) => {
                check.note(format!(
                    "phi_a = {phi}: T = {} (exact {})",
                    fmt_f(rep.t_sing),
                    fmt_f(t_exact)
                ));
                check.require(
                    (rep.t_sing - t_exact).abs() <= t_tol,
                    format!(
                        "phi_a = {phi}: |T - exact| = {}",
                        fmt_f((rep.t_sing - t_exact).abs())
                    ),
                );
            }
            Err(e) => check.require(false, format!("phi_a = {phi}: {e}")),
        }
    }
    // A steeper-than-equator member flows the other way; the relation
    // still holds.
    let fam = s2r2_family(S2R2Case::S1xR2 { phi_a: 2.0 }).unwrap();
    let traj = integrate_flow(&fam, &flow_opts(2.0));
    let mut worst = 0.0_f64;
    for s in &traj.samples {
        worst = worst.max(fam.analytic_residual(s.eps, s.t).unwrap().abs());
    }
    check.require(worst <= rel_tol, format!("phi_a = 2.0: residual {}", fmt_f(worst)));
    check
}

/// Criterion 4: vertical cylinders keep the conserved relation
/// `c_{-kappa}(eps) + (kappa/k_g) s_{-kappa}(eps) = e^{kappa t/2}` to
/// 1e-7 for 20 random draws; integrated singular times are cross-checked
/// against the printed reference formulas with mismatches reported, not
/// asserted.
fn criterion_cylinder(seed: u64, tols: &TolOverrides) -> Check {
    let mut check = Check::new();
    let mut rng = SplitMix64::new(seed ^ 0x04);
    let rel_tol = tols.get("cylinder.relation_tol");
    let mut remark_mismatches = 0usize;
    let mut runs = 0usize;
    while runs < 20 {
        let kappa = rng.uniform(0.3, 2.0) * rng.sign();
        let tau = rng.uniform(0.1, 0.6);
        if (kappa - 4.0 * tau * tau).abs() < 1e-3 {
            continue;
        }
        let k_g = rng.uniform(0.5, 2.5) * rng.sign();
        let fam = match ektau_vertical_cylinder(kappa, tau, k_g) {
            Ok(f) => f,
            Err(_) => continue,
        };
        runs += 1;
        let traj = integrate_flow(&fam, &flow_opts(40.0));
        let t_cut = detect_singularity(&traj, &fam)
            .map(|r| 0.995 * r.t_sing)
            .unwrap_or(f64::INFINITY);
        let mut worst = 0.0_f64;
        for s in traj.samples.iter().filter(|s| s.t <= t_cut) {
            worst = worst.max(fam.analytic_residual(s.eps, s.t).unwrap().abs());
        }
        check.require(
            worst <= rel_tol,
            format!(
                "kappa = {kappa:.4}, tau = {tau:.4}, k_g = {k_g:.4}: residual {}",
                fmt_f(worst)
            ),
        );

        if let Ok(rep) = detect_singularity(&traj, &fam) {
            let derived = fam.reference_times.iter().find(|rt| rt.label == "implicit-relation");
            if let Some(rt) = derived {
                check.require(
                    (rep.t_sing - rt.value).abs() <= 1e-6,
                    format!(
                        "kappa = {kappa:.4}, k_g = {k_g:.4}: integrated T {} vs relation {}",
                        fmt_f(rep.t_sing),
                        fmt_f(rt.value)
                    ),
                );
            }
            if let Some(rt) = fam.reference_times.iter().find(|rt| rt.label == "remark") {
                // Reported only: the printed formulas disagree with the
                // integrated times in general.
                if (rep.t_sing - rt.value).abs() > 1e-6 {
                    remark_mismatches += 1;
                }
            }
        }
    }
    check.note(format!(
        "reference remark formula mismatches reported on {remark_mismatches}/{runs} singular runs (not asserted)"
    ));
    check
}

/// Criterion 5: numeric Jacobi route vs catalog route for the diagonal
/// families (50 random members each, `H` to 1e-8 on `[0, 0.9 focal]`),
/// and the Lorentz-model shape operator reproduces the printed
/// eigenvalue formulas to 1e-10.
fn criterion_diagonal_cross_routes(seed: u64, tols: &TolOverrides) -> Check {
    let mut check = Check::new();
    let mut rng = SplitMix64::new(seed ^ 0x05);
    let h_tol = tols.get("cross.h_tol");
    let eig_tol = tols.get("cross.eig_tol");
    let ode = OdeOptions::with_tol(1e-11, 1e-13);

    let mut worst_h = 0.0_f64;
    for fam_kind in 0..2 {
        for _ in 0..50 {
            let (fam, rbar): (FamilySolution, _) = if fam_kind == 0 {
                let s = rng.uniform(-0.9, 0.9);
                (
                    s2s2_family(s).unwrap(),
                    curvature_operator(&AmbientSpec::S2xS2 { s }, &NormalFrameContext::Diagonal)
                        .unwrap(),
                )
            } else {
                let s = rng.uniform(1.05, 5.0);
                (
                    h2h2_family(s).unwrap(),
                    curvature_operator(&AmbientSpec::H2xH2 { s }, &NormalFrameContext::Diagonal)
                        .unwrap(),
                )
            };
            let a0 = ShapeOperator::diag(&fam.eigenvalues(0.0));
            let focal = fam.focal_pos.unwrap();
            let points = 16usize;
            let rs: Vec<f64> =
                (0..points).map(|i| 0.9 * focal * i as f64 / (points - 1) as f64).collect();
            let states = propagate_grid(&rbar, &a0, &rs, &ode).unwrap();
            for st in &states {
                let geo = parallel_geometry(st, 3).unwrap();
                worst_h = worst_h.max((geo.h_mean - fam.h_of_r(st.r)).abs());
            }
        }
    }
    check.note(format!("max |H_jacobi - H_catalog| = {}", fmt_f(worst_h)));
    check.require(worst_h <= h_tol, format!("cross-route H defect {}", fmt_f(worst_h)));

    let mut worst_eig = 0.0_f64;
    for _ in 0..50 {
        let s = rng.uniform(1.05, 6.0);
        let l1 = paraflow_core::catalog::lorentz_shape_operator(s, TangentClass::WMinusW).unwrap();
        let l2 = paraflow_core::catalog::lorentz_shape_operator(s, TangentClass::WPlusW).unwrap();
        let l3 = paraflow_core::catalog::lorentz_shape_operator(s, TangentClass::Radial).unwrap();
        let sq2 = std::f64::consts::SQRT_2;
        worst_eig = worst_eig.max((l1 - ((s + 1.0) / (s - 1.0)).sqrt() / sq2).abs());
        worst_eig = worst_eig.max((l2 - ((s - 1.0) / (s + 1.0)).sqrt() / sq2).abs());
        worst_eig = worst_eig.max(l3.abs());
    }
    check.note(format!("max Lorentz eigenvalue defect = {}", fmt_f(worst_eig)));
    check.require(worst_eig <= eig_tol, format!("Lorentz eigenvalue defect {}", fmt_f(worst_eig)));
    check
}

/// Every catalog family used by the property checks, instantiated at
/// representative parameters.
fn property_families(rng: &mut SplitMix64) -> Vec<FamilySolution> {
    let mut fams = vec![
        ektau_parabolic_helicoid(-4.0, 0.5, 0.5).unwrap(),
        ektau_parabolic_helicoid(rng.uniform(-5.0, -2.0), rng.uniform(0.1, 0.6), 0.3).unwrap(),
        ektau_vertical_cylinder(1.0, 0.4, 1.3).unwrap(),
        ektau_vertical_cylinder(-1.0, 0.3, 1.9).unwrap(),
        ektau_vertical_cylinder(rng.uniform(0.5, 1.5), 0.25, rng.uniform(0.8, 1.6)).unwrap(),
        s2r2_family(S2R2Case::Slice).unwrap(),
        s2r2_family(S2R2Case::S2xS1 { b: 1.0 }).unwrap(),
        s2r2_family(S2R2Case::S2xS1 { b: rng.uniform(0.6, 2.0) }).unwrap(),
        s2r2_family(S2R2Case::S1xR2 { phi_a: 1.0 }).unwrap(),
        s2r2_family(S2R2Case::S1xR2 { phi_a: rng.uniform(0.4, 1.3) }).unwrap(),
        s2s2_family(0.5).unwrap(),
        s2s2_family(rng.uniform(-0.8, 0.8)).unwrap(),
        h2h2_family(2.0).unwrap(),
        h2h2_family(rng.uniform(1.2, 4.0)).unwrap(),
        space_form_family(0.0, &[1.0, 1.0]),
        space_form_family(0.0, &[1.0, 0.0]),
        space_form_family(1.0, &[0.8, 0.8, 0.0]),
        space_form_family(-1.0, &[1.6, 1.6]),
    ];
    // Normal-flip consistency members exercise the mirrored closed forms.
    fams.push(s2r2_family(S2R2Case::S2xS1 { b: 1.3 }).unwrap().flip_normal());
    fams
}

/// Criterion 6: the Riccati trace identity `H' = (Ric + |A|^2)/n` holds
/// at residual < 1e-6 with step 1e-3 across all families.
fn criterion_riccati(seed: u64, tols: &TolOverrides) -> Check {
    let mut check = Check::new();
    let mut rng = SplitMix64::new(seed ^ 0x06);
    let tol = tols.get("riccati.tol");
    let h = 1e-3;
    let mut worst_all = 0.0_f64;
    for fam in property_families(&mut rng) {
        // Sampling window inside the regular range on both sides.
        let hi = 0.5 * fam.focal_pos.unwrap_or(f64::INFINITY).min(0.256);
        let lo = 0.5 * fam.focal_neg.unwrap_or(f64::NEG_INFINITY).max(-0.256);
        let count = ((hi - lo) / h) as usize;
        let geoms: Vec<_> = (0..=count).map(|i| pseudo_geometry(&fam, lo + i as f64 * h)).collect();
        let res = riccati_residual(&geoms, fam.ric_normal).unwrap();
        worst_all = worst_all.max(res);
        check.require(res <= tol, format!("{}: residual {} > {}", fam.name, fmt_f(res), fmt_f(tol)));
    }
    check.note(format!("worst residual across families = {}", fmt_f(worst_all)));
    check
}

/// Criterion 7: every finite-time run classifies Type I with a stable
/// `Lambda`, and the blow-up bound holds within slack 2 on its
/// hypothesis window or the run is flagged (reported).
fn criterion_type_i(tols: &TolOverrides) -> Check {
    let mut check = Check::new();
    let lam_stab = tols.get("typei.lambda_stability");
    let slack = tols.get("typei.slack");
    let finite_t: Vec<FamilySolution> = vec![
        s2r2_family(S2R2Case::S2xS1 { b: 1.0 }).unwrap(),
        s2r2_family(S2R2Case::S2xS1 { b: 2.0 }).unwrap(),
        s2r2_family(S2R2Case::S1xR2 { phi_a: 0.6 }).unwrap(),
        s2r2_family(S2R2Case::S1xR2 { phi_a: 1.0 }).unwrap(),
        s2s2_family(0.5).unwrap(),
        s2s2_family(-0.4).unwrap(),
        h2h2_family(1.5).unwrap(),
        h2h2_family(2.0).unwrap(),
        h2h2_family(5.0).unwrap(),
        ektau_vertical_cylinder(1.0, 0.4, 1.3).unwrap(),
        ektau_vertical_cylinder(-1.0, 0.3, 1.9).unwrap(),
        ektau_vertical_cylinder(2.0, 0.5, 0.9).unwrap(),
        space_form_family(0.0, &[1.0, 1.0]),
        space_form_family(0.0, &[0.8, 0.8, 0.8]),
        space_form_family(0.0, &[1.0, 0.0]),
        space_form_family(1.0, &[0.8, 0.8, 0.0]),
    ];
    let mut flagged = Vec::new();
    for fam in &finite_t {
        let traj = integrate_flow(fam, &flow_opts(60.0));
        let mut rep = match detect_singularity(&traj, fam) {
            Ok(r) => r,
            Err(e) => {
                check.require(false, format!("{}: expected finite T: {e}", fam.name));
                continue;
            }
        };
        if classify_singularity(&traj, fam, &mut rep, ClassifyWindow::default()).is_err() {
            check.require(false, format!("{}: inconclusive window", fam.name));
            continue;
        }
        check.require(
            rep.class == SingularityClass::TypeI,
            format!("{}: classified {:?}", fam.name, rep.class),
        );
        let lam = rep.lambda.unwrap_or(f64::NAN);
        check.require(lam.is_finite(), format!("{}: Lambda not finite", fam.name));

        // Window-halving stability.
        let delta = (0.02 * rep.t_sing).max(1e3 * (rep.t_sing - traj.t_end));
        let mut rep_half = rep.clone();
        if classify_singularity(
            &traj,
            fam,
            &mut rep_half,
            ClassifyWindow { delta: Some(delta / 2.0), points: 64 },
        )
        .is_ok()
        {
            let lam_half = rep_half.lambda.unwrap_or(f64::NAN);
            check.require(
                (lam_half - lam).abs() / lam.abs().max(1e-300) <= lam_stab,
                format!(
                    "{}: Lambda window-halving drift {} vs {}",
                    fam.name,
                    fmt_f(lam),
                    fmt_f(lam_half)
                ),
            );
        }

        let bound = type_i_bound_check(fam.c_tilde, &traj, fam, &rep, slack);
        if !(bound.ok || bound.skipped) {
            flagged.push(format!(
                "{} (C~ = {}, max ratio {})",
                fam.name,
                fmt_f(fam.c_tilde),
                fmt_f(bound.max_ratio)
            ));
        }
    }
    if flagged.is_empty() {
        check.note("blow-up bound within slack on every run".to_string());
    } else {
        check.note(format!("flagged bound runs (reported, not asserted): {}", flagged.join("; ")));
    }
    check
}

/// Criterion 8: the bump experiment. Flat control follows the exact
/// shrinking-circle law to 0.1% with deviation at the numerical floor;
/// with the bump the deviation exceeds 10x floor strictly before
/// extinction; the crossing time is resolution-stable to 10% under mesh
/// doubling; the 1024-vertex run finishes in under two minutes.
fn criterion_bump(tols: &TolOverrides) -> Check {
    let mut check = Check::new();
    let circle_rel = tols.get("bump.circle_rel");
    let tstar_rel = tols.get("bump.tstar_rel");

    let params = |vertices: usize| {
        let bump = BumpParams::new([0.5, 0.0], 1.0, 0.5).unwrap();
        ExperimentParams::new(bump, [0.0, 0.0], 2.0, vertices)
    };

    let start = Instant::now();
    let base = match run_with_control(&params(1024)) {
        Ok(o) => o,
        Err(e) => {
            check.require(false, format!("experiment failed: {e}"));
            return check;
        }
    };
    let base_ms = start.elapsed().as_millis();
    check.note(format!("1024-vertex control+bump runtime {} ms", base_ms));
    check.require(base_ms < 120_000, format!("1024-vertex runtime {base_ms} ms >= 2 min"));

    // Flat control: shrinking-circle law to 0.1% up to 90% extinction.
    let r0 = 2.0_f64;
    let mut worst_circle = 0.0_f64;
    for row in &base.control.rows {
        let rsq = r0 * r0 - 2.0 * row.t;
        if rsq < 0.1 * r0 * r0 {
            break;
        }
        let meas = row.length / std::f64::consts::TAU;
        worst_circle = worst_circle.max((meas - rsq.sqrt()).abs() / rsq.sqrt());
    }
    check.note(format!("control circle-law worst relative error {}", fmt_f(worst_circle)));
    check.require(
        worst_circle <= circle_rel,
        format!("circle law violated: {}", fmt_f(worst_circle)),
    );
    check.require(base.control.t_star.is_none(), "control crossed the deviation threshold".into());
    check.note(format!("control floor = {}", fmt_f(base.control.floor)));

    let t1 = match base.bump.t_star {
        Some(t) => t,
        None => {
            check.require(false, "bump run never left the parallel regime".into());
            return check;
        }
    };
    check.note(format!(
        "t* = {} < extinction {}",
        fmt_f(t1),
        fmt_f(base.bump.extinction_est)
    ));
    check.require(t1 < base.bump.extinction_est, "t* after extinction".into());

    // Mesh doubling.
    let doubled = match run_with_control(&params(2048)) {
        Ok(o) => o,
        Err(e) => {
            check.require(false, format!("doubled experiment failed: {e}"));
            return check;
        }
    };
    match doubled.bump.t_star {
        Some(t2) => {
            let drift = (t2 - t1).abs() / t1;
            check.note(format!("t* at 2048 = {} (drift {})", fmt_f(t2), fmt_f(drift)));
            check.require(
                drift <= tstar_rel,
                format!("t* resolution drift {} > {}", fmt_f(drift), fmt_f(tstar_rel)),
            );
        }
        None => check.require(false, "doubled run found no t*".into()),
    }
    check
}

fn run_criterion(
    id: usize,
    name: &'static str,
    f: impl FnOnce() -> Check,
) -> CriterionOutcome {
    let start = Instant::now();
    let check = f();
    CriterionOutcome {
        id,
        name,
        passed: check.passed,
        details: check.details,
        millis: start.elapsed().as_millis(),
    }
}

/// Runs checks 1 through 8 and appends the wall-clock budget check (9).
pub fn run_all(seed: u64, tols: &TolOverrides) -> Vec<CriterionOutcome> {
    let total_start = Instant::now();
    let mut out = vec![
        run_criterion(1, "parabolic-helicoid-linear-flow", || criterion_helicoid(seed, tols)),
        run_criterion(2, "s2xs1-explicit-solution", || criterion_s2xs1(tols)),
        run_criterion(3, "s1xr2-implicit-relation", || criterion_s1xr2(tols)),
        run_criterion(4, "vertical-cylinder-relation", || criterion_cylinder(seed, tols)),
        run_criterion(5, "diagonal-family-cross-routes", || {
            criterion_diagonal_cross_routes(seed, tols)
        }),
        run_criterion(6, "riccati-trace-identity", || criterion_riccati(seed, tols)),
        run_criterion(7, "type-i-classification", || criterion_type_i(tols)),
        run_criterion(8, "bump-experiment", || criterion_bump(tols)),
    ];
    let total_ms = total_start.elapsed().as_millis();
    let mut timing = Check::new();
    timing.note(format!("total runtime {} ms", total_ms));
    timing.require(total_ms < 600_000, format!("suite exceeded 10 minutes ({total_ms} ms)"));
    // Runtime caps on the fast checks.
    for (idx, cap_ms) in [(0usize, 1000u128), (1, 1000)] {
        let o = &out[idx];
        timing.require(
            o.millis < cap_ms,
            format!("criterion {} took {} ms (cap {} ms)", o.id, o.millis, cap_ms),
        );
    }
    out.push(CriterionOutcome {
        id: 9,
        name: "suite-runtime-budget",
        passed: timing.passed,
        details: timing.details,
        millis: total_ms,
    });
    out
}
