//! Adaptive explicit Runge-Kutta integration: the Dormand-Prince 5(4)
//! pair with error-weighted step control, PI step-size smoothing, and
//! fourth-order dense output.
//!
//! The integrator is generic over the right-hand side and direction of
//! time. Step acceptance uses the weighted RMS error norm
//! `err = sqrt(mean((e_i / (atol + rtol max(|y0_i|, |y1_i|)))^2))` and a
//! proportional-integral controller on the step size; dense output stores
//! five coefficient vectors per accepted step and evaluates a quartic
//! polynomial in the normalized step fraction. The first-same-as-last
//! property of the pair makes each accepted step cost six fresh
//! right-hand-side evaluations.

use crate::error::{Error, Result};

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

// Error coefficients: 5th-order solution minus embedded 4th-order one.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output coefficients for the quartic interpolant.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// Step controller: safety factor, contraction/expansion clamps, PI
// stabilization exponent.
const SAFE: f64 = 0.9;
const FAC1: f64 = 0.2;
const FAC2: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - 0.75 * BETA;

/// Integration controls. `h_initial = 0` asks for an automatic guess.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5Config {
    /// Relative tolerance of the weighted error norm.
    pub rtol: f64,
    /// Absolute tolerance of the weighted error norm.
    pub atol: f64,
    /// Initial step size magnitude; `0` selects one automatically.
    pub h_initial: f64,
    /// Upper bound on the step size magnitude; `0` means the span length.
    pub h_max: f64,
    /// Accepted-plus-rejected step budget.
    pub max_steps: usize,
}

impl Default for Dopri5Config {
    fn default() -> Self {
        Dopri5Config {
            rtol: crate::tolerances::DEFAULT_RTOL,
            atol: crate::tolerances::DEFAULT_ATOL,
            h_initial: 0.0,
            h_max: 0.0,
            max_steps: 1_000_000,
        }
    }
}

/// Dense-output data for one accepted step: evaluates the quartic
/// interpolant anywhere inside the step.
#[derive(Debug, Clone)]
pub struct DenseStep {
    /// Step start time.
    pub t0: f64,
    /// Signed step length.
    pub h: f64,
    cont: Vec<[f64; 5]>,
}

impl DenseStep {
    /// Interpolated state at time `t`, which must lie within the step
    /// (a small tolerance beyond the ends is accepted).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        self.cont
            .iter()
            .map(|c| c[0] + theta * (c[1] + th1 * (c[2] + theta * (c[3] + th1 * c[4]))))
            .collect()
    }

    /// Step end time.
    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    /// Whether `t` lies inside the step span (inclusive, with slack for
    /// rounding).
    pub fn contains(&self, t: f64) -> bool {
        let lo = self.t0.min(self.t_end());
        let hi = self.t0.max(self.t_end());
        let slack = 1e-12 * self.h.abs().max(1.0);
        t >= lo - slack && t <= hi + slack
    }
}

/// Observer verdict after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Keep integrating.
    Continue,
    /// Stop and report the state at the given time, which must lie inside
    /// the step just taken.
    StopAt(f64),
}

/// One accepted step as seen by the observer.
#[derive(Debug)]
pub struct StepRecord<'a> {
    /// Time at the start of the step.
    pub t0: f64,
    /// Time at the end of the step.
    pub t1: f64,
    /// State at the end of the step.
    pub y1: &'a [f64],
    /// Dense output over the step.
    pub dense: &'a DenseStep,
}

/// Counters describing one integration run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    /// Accepted steps.
    pub accepted: usize,
    /// Rejected trial steps.
    pub rejected: usize,
    /// Right-hand-side evaluations.
    pub rhs_evaluations: usize,
}

/// Result of an integration run.
#[derive(Debug)]
pub struct Integration {
    /// Final time (the requested end, or the observer's stop time).
    pub t_final: f64,
    /// State at `t_final`.
    pub y_final: Vec<f64>,
    /// Dense output for every accepted step, in time order.
    pub dense: Vec<DenseStep>,
    /// Step counters.
    pub stats: OdeStats,
    /// True when the observer requested an early stop.
    pub stopped_early: bool,
}

/// Initial step-size heuristic: balances the size of the right-hand side
/// against the tolerances, then refines with one explicit Euler probe.
fn initial_step<F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    direction: f64,
    h_max: f64,
    rtol: f64,
    atol: f64,
    evals: &mut usize,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..n {
        let sc = atol + rtol * y0[i].abs();
        dnf += (f0[i] / sc).powi(2);
        dny += (y0[i] / sc).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);

    let y1: Vec<f64> = (0..n).map(|i| y0[i] + direction * h * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    rhs(t0 + direction * h, &y1, &mut f1);
    *evals += 1;
    let mut der2 = 0.0;
    for i in 0..n {
        let sc = atol + rtol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sc).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (1e-6f64).max(h * 1e-3)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(h_max)
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
/// The observer sees every accepted step and may stop the run early; on a
/// [`StepControl::StopAt`] verdict the final state is interpolated from
/// dense output at the requested time.
pub fn integrate<F, O>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    cfg: &Dopri5Config,
    mut observer: O,
) -> Result<Integration>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(&StepRecord) -> StepControl,
{
    if !(cfg.rtol.is_finite() && cfg.rtol > 0.0 && cfg.atol.is_finite() && cfg.atol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerances rtol={} atol={} must be finite and positive",
            cfg.rtol, cfg.atol
        )));
    }
    if !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidInput("integration span must be finite".into()));
    }
    let n = y0.len();
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(Integration {
            t_final: t0,
            y_final: y0.to_vec(),
            dense: Vec::new(),
            stats: OdeStats::default(),
            stopped_early: false,
        });
    }
    let direction = span.signum();
    let h_max = if cfg.h_max > 0.0 {
        cfg.h_max
    } else {
        span.abs()
    };

    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    rhs(t, &y, &mut k1);
    stats.rhs_evaluations += 1;

    let mut h = if cfg.h_initial > 0.0 {
        cfg.h_initial.min(h_max)
    } else {
        initial_step(
            &mut rhs,
            t,
            &y,
            &k1,
            direction,
            h_max,
            cfg.rtol,
            cfg.atol,
            &mut stats.rhs_evaluations,
        )
    };

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut y_next = vec![0.0; n];
    let mut dense = Vec::new();
    let mut facold: f64 = 1e-4;

    loop {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded { t });
        }
        let remaining = t_end - t;
        if direction * remaining <= 0.0 {
            break;
        }
        if h > remaining.abs() {
            h = remaining.abs();
        }
        let hs = direction * h; // signed step
        if t + hs == t {
            // Step no longer advances time in floating point.
            return Err(Error::StepUnderflow { t });
        }

        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        rhs(t + C2 * hs, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * hs, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * hs, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * hs, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + hs, &ytmp, &mut k6);
        for i in 0..n {
            y_next[i] = y[i]
                + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t + hs, &y_next, &mut k7);
        stats.rhs_evaluations += 6;

        let err = {
            let mut s = 0.0;
            for i in 0..n {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = cfg.atol + cfg.rtol * y[i].abs().max(y_next[i].abs());
                s += (e / sc) * (e / sc);
            }
            (s / n as f64).sqrt()
        };

        if !err.is_finite() {
            // Blow-up inside the step: reject hard and retry much smaller.
            stats.rejected += 1;
            h *= 0.25;
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Accept. Build dense output before shifting state.
            facold = err.max(1e-4);
            let mut cont = Vec::with_capacity(n);
            for i in 0..n {
                let ydiff = y_next[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                let c4v = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
                cont.push([
                    y[i],
                    ydiff,
                    bspl,
                    ydiff - hs * k7[i] - bspl,
                    c4v,
                ]);
            }
            let step = DenseStep { t0: t, h: hs, cont };
            let t1 = t + hs;
            if y_next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t: t1 });
            }
            stats.accepted += 1;

            let verdict = observer(&StepRecord {
                t0: t,
                t1,
                y1: &y_next,
                dense: &step,
            });
            match verdict {
                StepControl::Continue => {
                    dense.push(step);
                    t = t1;
                    std::mem::swap(&mut y, &mut y_next);
                    std::mem::swap(&mut k1, &mut k7); // first-same-as-last
                    let fac = (fac11 / facold.powf(BETA)).max(1.0 / FAC2).min(1.0 / FAC1);
                    h = (h * SAFE / fac).min(h_max);
                }
                StepControl::StopAt(t_stop) => {
                    if !step.contains(t_stop) {
                        return Err(Error::SampleOutOfRange { t: t_stop });
                    }
                    let y_final = step.eval(t_stop);
                    dense.push(step);
                    return Ok(Integration {
                        t_final: t_stop,
                        y_final,
                        dense,
                        stats,
                        stopped_early: true,
                    });
                }
            }
        } else {
            stats.rejected += 1;
            let fac = (fac11 / SAFE).min(1.0 / FAC1);
            h /= fac;
        }
    }

    Ok(Integration {
        t_final: t,
        y_final: y,
        dense,
        stats,
        stopped_early: false,
    })
}
