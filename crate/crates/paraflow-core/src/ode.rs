//! Adaptive explicit Runge-Kutta integration: Dormand-Prince 5(4) with
//! FSAL, PI-free standard step control and fourth-order dense output.
//!
//! The driver reports every accepted step through a callback which can
//! inspect the dense interpolant and stop the integration (event handling
//! is built on top of this in `flow` and `csf`).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// e = b5 - b4: embedded error coefficients.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Hard cap on the step size; defaults to the full interval.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: None, h_max: None, max_steps: 1_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    /// The adaptive controller pushed the step below machine resolution,
    /// typically because the solution blows up inside the interval.
    StepSizeUnderflow { t: f64 },
    MaxStepsExceeded { t: f64 },
}

impl fmt::Display for OdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdeError::StepSizeUnderflow { t } => write!(f, "step size underflow at t = {t}"),
            OdeError::MaxStepsExceeded { t } => write!(f, "step budget exhausted at t = {t}"),
        }
    }
}

/// Quartic interpolant of one accepted step, valid on `[t0, t0 + h]`.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    /// State at `t` (clamped fraction of the step).
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = if self.h == 0.0 { 0.0 } else { ((t - self.t0) / self.h).clamp(0.0, 1.0) };
        let th1 = 1.0 - theta;
        for i in 0..out.len() {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + th1 * (self.rcont[2][i] + theta * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
    }

    pub fn eval_scalar(&self, t: f64) -> f64 {
        let mut out = [0.0];
        self.eval_into(t, &mut out);
        out[0]
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }
}

/// One accepted step as seen by the driver callback.
pub struct AcceptedStep<'a> {
    pub t_from: f64,
    pub t_to: f64,
    pub y: &'a [f64],
    pub dense: &'a DenseStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub t: f64,
    pub y: Vec<f64>,
    pub accepted_steps: usize,
    /// Whether the callback stopped the run before `t_end`.
    pub stopped_early: bool,
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` to `t_end` (forward only).
pub fn integrate<F, C>(
    f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &OdeOptions,
    mut on_step: C,
) -> Result<Solution, OdeError>
where
    F: Fn(f64, &[f64], &mut [f64]),
    C: FnMut(&AcceptedStep<'_>) -> StepControl,
{
    let dim = y0.len();
    let span = t_end - t0;
    assert!(span >= 0.0, "integrate runs forward in time");
    if span == 0.0 {
        return Ok(Solution { t: t0, y: y0.to_vec(), accepted_steps: 0, stopped_early: false });
    }
    let h_max = opts.h_max.unwrap_or(span).min(span);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    f(t, &y, &mut k1);

    let mut h = opts.h_init.unwrap_or_else(|| initial_step(&f, t, &y, &k1, opts)).min(h_max);

    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut ytmp = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];

    let mut accepted = 0usize;
    let mut nstep = 0usize;

    loop {
        if t >= t_end {
            return Ok(Solution { t, y, accepted_steps: accepted, stopped_early: false });
        }
        nstep += 1;
        if nstep > opts.max_steps {
            return Err(OdeError::MaxStepsExceeded { t });
        }
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }
        if h <= 16.0 * f64::EPSILON * libm::fabs(t).max(1.0) && !last {
            return Err(OdeError::StepSizeUnderflow { t });
        }

        // Stages.
        for i in 0..dim {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &ytmp, &mut k3);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &ytmp, &mut k4);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &ytmp, &mut k5);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &ytmp, &mut k6);
        for i in 0..dim {
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, &ynew, &mut k7);

        // Embedded error estimate.
        let mut err_sq = 0.0;
        for i in 0..dim {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * libm::fabs(y[i]).max(libm::fabs(ynew[i]));
            err_sq += (e / sk) * (e / sk);
        }
        let err = libm::sqrt(err_sq / dim as f64);

        if err <= 1.0 {
            // Accepted (a NaN error estimate falls through to rejection).
            let dense = build_dense(&y, &ynew, &k1, &k3, &k4, &k5, &k6, &k7, t, h);
            let t_new = t + h;
            accepted += 1;
            let control = on_step(&AcceptedStep { t_from: t, t_to: t_new, y: &ynew, dense: &dense });
            t = t_new;
            core::mem::swap(&mut y, &mut ynew);
            core::mem::swap(&mut k1, &mut k7); // FSAL
            if control == StepControl::Stop {
                return Ok(Solution { t, y, accepted_steps: accepted, stopped_early: true });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(h_max);
        } else {
            let factor = if err.is_finite() { (0.9 * libm::pow(err, -0.2)).clamp(0.1, 1.0) } else { 0.1 };
            h *= factor.min(0.9);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_dense(
    y: &[f64],
    ynew: &[f64],
    k1: &[f64],
    k3: &[f64],
    k4: &[f64],
    k5: &[f64],
    k6: &[f64],
    k7: &[f64],
    t: f64,
    h: f64,
) -> DenseStep {
    let dim = y.len();
    let mut rcont = [
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    ];
    for i in 0..dim {
        let ydiff = ynew[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        rcont[0][i] = y[i];
        rcont[1][i] = ydiff;
        rcont[2][i] = bspl;
        rcont[3][i] = ydiff - h * k7[i] - bspl;
        rcont[4][i] =
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    DenseStep { t0: t, h, rcont }
}

/// Hairer-style automatic initial step selection (simplified).
fn initial_step<F>(f: &F, t0: f64, y0: &[f64], f0: &[f64], opts: &OdeOptions) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut d0 = 0.0_f64;
    let mut d1 = 0.0_f64;
    for i in 0..dim {
        let sk = opts.atol + opts.rtol * libm::fabs(y0[i]);
        d0 += (y0[i] / sk) * (y0[i] / sk);
        d1 += (f0[i] / sk) * (f0[i] / sk);
    }
    d0 = libm::sqrt(d0 / dim as f64);
    d1 = libm::sqrt(d1 / dim as f64);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };

    // One explicit Euler probe to estimate the second derivative.
    let mut y1 = vec![0.0; dim];
    for i in 0..dim {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let mut f1 = vec![0.0; dim];
    f(t0 + h0, &y1, &mut f1);
    let mut d2 = 0.0_f64;
    for i in 0..dim {
        let sk = opts.atol + opts.rtol * libm::fabs(y0[i]);
        let dd = (f1[i] - f0[i]) / sk;
        d2 += dd * dd;
    }
    d2 = libm::sqrt(d2 / dim as f64) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / dm, 0.2)
    };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let sol = integrate(
            |_t, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            5.0,
            &OdeOptions::with_tol(1e-12, 1e-14),
            |_| StepControl::Continue,
        )
        .unwrap();
        assert!((sol.y[0] - (-5.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        // y'' = -y; dense samples must track (cos t, -sin t).
        let mut worst = 0.0_f64;
        let sol = integrate(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            10.0,
            &OdeOptions::with_tol(1e-10, 1e-12),
            |step| {
                let mut buf = [0.0, 0.0];
                for k in 0..5 {
                    let t = step.t_from + (k as f64 / 4.0) * (step.t_to - step.t_from);
                    step.dense.eval_into(t, &mut buf);
                    worst = worst.max((buf[0] - t.cos()).abs());
                }
                StepControl::Continue
            },
        )
        .unwrap();
        assert!((sol.y[0] - 10.0_f64.cos()).abs() < 1e-9);
        assert!(worst < 1e-9, "dense output error {worst}");
    }

    #[test]
    fn blow_up_reports_underflow() {
        // y' = y^2 from y(0) = 1 blows up at t = 1.
        let res = integrate(
            |_t, y, dy| dy[0] = y[0] * y[0],
            0.0,
            &[1.0],
            2.0,
            &OdeOptions::with_tol(1e-10, 1e-12),
            |_| StepControl::Continue,
        );
        match res {
            Err(OdeError::StepSizeUnderflow { t }) => assert!((t - 1.0).abs() < 1e-3),
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn early_stop_via_callback() {
        let sol = integrate(
            |_t, _y, dy| dy[0] = 1.0,
            0.0,
            &[0.0],
            100.0,
            &OdeOptions::default(),
            |step| if step.t_to > 1.0 { StepControl::Stop } else { StepControl::Continue },
        )
        .unwrap();
        assert!(sol.stopped_early);
        assert!(sol.t > 1.0);
    }
}
