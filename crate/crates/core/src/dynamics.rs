//! Newtonian time evolution `qddot = grad U(q)`, relative-equilibrium and
//! homographic solution builders, and conservation diagnostics.
//!
//! Trajectories are produced by the adaptive integrator in [`crate::ode`]
//! with one phase-space sample per accepted step and dense output kept
//! for exact-time resampling. A trajectory records its own conserved
//! energy: the potential law stored on the trajectory carries the
//! *measured* initial energy of the integrated state, so downstream
//! diagnostics that compare `h + U` with kinetic energy see a consistent
//! energy level regardless of what the caller declared.
//!
//! Close approaches truncate the run rather than erroring: when the
//! minimum pairwise distance falls to the collision guard (a fixed
//! fraction of the initial diameter), the step is bisected back to the
//! last safe time and the trajectory ends there with an explicit
//! termination flag, keeping collapse solutions usable as data.

use std::sync::Arc;

use num_complex::Complex64;

use crate::central_config::{central_residual, lambda_for};
use crate::error::{Error, Result};
use crate::mass_geometry::{
    check_same_system, conserved_quantities, mass_norm, moment_of_inertia, Configuration,
    ConservedQuantities, MassSystem, TangentVector,
};
use crate::ode::{self, Dopri5Config, StepControl};
use crate::potential::{gradient_raw, potential_raw, potential_value, PotentialLaw};
use crate::tolerances::{CENTRAL_INPUT_TOL, COLLISION_GUARD_FACTOR, DEFAULT_RTOL};

/// A point of phase space at a definite time.
#[derive(Debug, Clone)]
pub struct PhaseState {
    /// Positions.
    pub q: Configuration,
    /// Velocities.
    pub qdot: TangentVector,
    /// Time.
    pub t: f64,
}

impl PhaseState {
    /// Builds a phase state, checking that positions and velocities share
    /// the mass system.
    pub fn new(q: Configuration, qdot: TangentVector, t: f64) -> Result<Self> {
        check_same_system(q.system(), qdot.system())?;
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("time {t} is not finite")));
        }
        Ok(PhaseState { q, qdot, t })
    }

    /// Conserved quantities of this state under the given law.
    pub fn conserved(&self, law: &PotentialLaw) -> ConservedQuantities {
        conserved_quantities(&self.q, &self.qdot, law).expect("state is internally consistent")
    }
}

/// Why a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Reached the requested final time.
    Completed,
    /// Truncated at the collision guard.
    CollisionGuard {
        /// Time of the last stored state.
        t: f64,
        /// Minimum pairwise distance there.
        min_distance: f64,
    },
}

/// Integrator effort and accuracy bookkeeping for one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStats {
    /// Accepted steps.
    pub accepted: usize,
    /// Rejected trial steps.
    pub rejected: usize,
    /// Right-hand-side evaluations.
    pub rhs_evaluations: usize,
    /// Relative tolerance used.
    pub rtol: f64,
    /// Absolute tolerance used.
    pub atol: f64,
    /// Largest relative energy deviation from the initial energy seen at
    /// any sample.
    pub max_energy_drift: f64,
}

/// A time-ordered set of phase states under one potential law.
#[derive(Debug)]
pub struct Trajectory {
    system: Arc<MassSystem>,
    law: PotentialLaw,
    samples: Vec<PhaseState>,
    dense: Option<Vec<ode::DenseStep>>,
    termination: Termination,
    stats: TrajectoryStats,
}

impl Trajectory {
    /// Builds a trajectory from externally supplied samples (for example
    /// parsed from a file). The declared law is kept as-is, times must be
    /// strictly increasing, and all samples must share one mass system.
    /// No dense output is available on such a trajectory.
    pub fn from_samples(law: PotentialLaw, samples: Vec<PhaseState>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("trajectory needs at least one sample".into()));
        }
        let system = Arc::clone(samples[0].q.system());
        let mut drift: f64 = 0.0;
        let scale = energy_scale(&samples[0], &law);
        for (k, s) in samples.iter().enumerate() {
            check_same_system(&system, s.q.system())?;
            if k > 0 && s.t <= samples[k - 1].t {
                return Err(Error::InvalidInput(format!(
                    "sample times must increase strictly; sample {k} at t = {}",
                    s.t
                )));
            }
            drift = drift.max((s.conserved(&law).energy - law.energy()).abs() / scale);
        }
        Ok(Trajectory {
            system,
            law,
            samples,
            dense: None,
            termination: Termination::Completed,
            stats: TrajectoryStats {
                accepted: 0,
                rejected: 0,
                rhs_evaluations: 0,
                rtol: 0.0,
                atol: 0.0,
                max_energy_drift: drift,
            },
        })
    }

    /// The mass system.
    pub fn system(&self) -> &Arc<MassSystem> {
        &self.system
    }

    /// The potential law; its energy is the trajectory's own conserved
    /// energy when produced by [`integrate`].
    pub fn law(&self) -> &PotentialLaw {
        &self.law
    }

    /// Stored phase-space samples in time order.
    pub fn samples(&self) -> &[PhaseState] {
        &self.samples
    }

    /// Final stored state.
    pub fn final_state(&self) -> &PhaseState {
        self.samples.last().expect("trajectories are nonempty")
    }

    /// How the trajectory ended.
    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Integrator statistics.
    pub fn stats(&self) -> &TrajectoryStats {
        &self.stats
    }

    /// Time span covered.
    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].t, self.final_state().t)
    }

    /// Interpolated state at an arbitrary time inside the span. Requires
    /// dense output, i.e. a trajectory produced by [`integrate`].
    pub fn sample_at(&self, t: f64) -> Result<PhaseState> {
        let dense = self
            .dense
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("trajectory has no dense output".into()))?;
        if dense.is_empty() {
            return Err(Error::SampleOutOfRange { t });
        }
        // Binary search for the step containing t (steps are in time
        // order and tile the span).
        let idx = dense.partition_point(|s| s.t_end() < t);
        let step = dense
            .get(idx)
            .or_else(|| dense.last())
            .ok_or(Error::SampleOutOfRange { t })?;
        if !step.contains(t) {
            return Err(Error::SampleOutOfRange { t });
        }
        state_from_flat(&self.system, t, &step.eval(t))
    }
}

fn energy_scale(initial: &PhaseState, law: &PotentialLaw) -> f64 {
    let kinetic = 0.5 * initial.qdot.norm().powi(2);
    let u = potential_value(&initial.q, law);
    (kinetic + u).max(law.energy().abs()).max(1e-12)
}

fn state_from_flat(system: &Arc<MassSystem>, t: f64, y: &[f64]) -> Result<PhaseState> {
    let n = system.n();
    let q = Configuration::from_real(Arc::clone(system), &y[..2 * n])?;
    let qdot = TangentVector::from_real(Arc::clone(system), &y[2 * n..])?;
    PhaseState::new(q, qdot, t)
}

/// Integration controls for [`integrate_with`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrationConfig {
    /// Relative tolerance.
    pub rtol: f64,
    /// Absolute tolerance.
    pub atol: f64,
    /// Step budget.
    pub max_steps: usize,
    /// Collision guard distance; defaults to a fixed fraction of the
    /// initial diameter.
    pub collision_guard: Option<f64>,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            rtol: DEFAULT_RTOL,
            atol: crate::tolerances::DEFAULT_ATOL,
            max_steps: 1_000_000,
            collision_guard: None,
        }
    }
}

/// Integrates the equations of motion from `initial` to `t_final` with
/// relative tolerance `tol` (absolute tolerance two orders tighter).
pub fn integrate(
    initial: &PhaseState,
    law: &PotentialLaw,
    t_final: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "integration tolerance {tol} must be finite and positive"
        )));
    }
    integrate_with(
        initial,
        law,
        t_final,
        &IntegrationConfig {
            rtol: tol,
            atol: tol * 1e-2,
            ..IntegrationConfig::default()
        },
    )
}

/// Integrates with explicit tolerances and guard settings. The returned
/// trajectory's law carries the measured initial energy.
pub fn integrate_with(
    initial: &PhaseState,
    law: &PotentialLaw,
    t_final: f64,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    let system = Arc::clone(initial.q.system());
    let n = system.n();
    let masses: Vec<f64> = system.masses().to_vec();
    let alpha = law.alpha();

    // Pin the trajectory's energy level to the measured initial energy so
    // on-shell identities downstream hold to integrator accuracy.
    let measured = initial.conserved(law);
    let h0 = measured.energy;
    let pinned_law = law.with_energy(h0)?;
    let scale = energy_scale(initial, law);

    let guard = cfg
        .collision_guard
        .unwrap_or(COLLISION_GUARD_FACTOR * initial.q.diameter());

    let mut y0 = initial.q.to_real();
    y0.extend(initial.qdot.to_real());

    let mut pos_buf = vec![Complex64::new(0.0, 0.0); n];
    let mut grad_buf = vec![Complex64::new(0.0, 0.0); n];
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        for k in 0..n {
            pos_buf[k] = Complex64::new(y[2 * k], y[2 * k + 1]);
        }
        gradient_raw(&masses, &pos_buf, alpha, &mut grad_buf);
        dy[..2 * n].copy_from_slice(&y[2 * n..]);
        for k in 0..n {
            dy[2 * n + 2 * k] = grad_buf[k].re;
            dy[2 * n + 2 * k + 1] = grad_buf[k].im;
        }
    };

    let ode_cfg = Dopri5Config {
        rtol: cfg.rtol,
        atol: cfg.atol,
        h_initial: 0.0,
        h_max: 0.0,
        max_steps: cfg.max_steps,
    };

    let obs_masses: Vec<f64> = system.masses().to_vec();
    let mut samples = vec![PhaseState::new(
        initial.q.clone(),
        initial.qdot.clone(),
        initial.t,
    )?];
    let mut max_drift: f64 = 0.0;
    let mut guard_hit: Option<f64> = None;

    let observer = |rec: &ode::StepRecord| -> StepControl {
        let (min_d, diam) = min_dist_and_diameter(&rec.y1[..2 * n]);
        let threshold = 2.0 * guard.max(COLLISION_GUARD_FACTOR * diam);
        if min_d <= threshold {
            // Bisect back to the last time at a safe distance.
            let mut t_lo = rec.t0;
            let mut t_hi = rec.t1;
            for _ in 0..80 {
                let tm = 0.5 * (t_lo + t_hi);
                let ym = rec.dense.eval(tm);
                let (d, dm) = min_dist_and_diameter(&ym[..2 * n]);
                if d <= 2.0 * guard.max(COLLISION_GUARD_FACTOR * dm) {
                    t_hi = tm;
                } else {
                    t_lo = tm;
                }
            }
            guard_hit = Some(t_lo);
            return StepControl::StopAt(t_lo);
        }
        let h = energy_of_flat(&obs_masses, rec.y1, alpha);
        max_drift = max_drift.max((h - h0).abs() / scale);
        match state_from_flat(&system, rec.t1, rec.y1) {
            Ok(s) => samples.push(s),
            Err(_) => {
                // Squeezed past the distance check (degenerate geometry):
                // stop at the step start, which is known-good.
                guard_hit = Some(rec.t0);
                return StepControl::StopAt(rec.t0);
            }
        }
        StepControl::Continue
    };

    let out = ode::integrate(rhs, &y0, initial.t, t_final, &ode_cfg, observer)?;

    let system = Arc::clone(initial.q.system());
    let mut samples = samples;
    let termination = if let Some(t_stop) = guard_hit {
        let last = state_from_flat(&system, t_stop, &out.y_final)?;
        let min_distance = last.q.min_pair_distance();
        if samples.last().map(|s| s.t) != Some(t_stop) {
            samples.push(last);
        }
        Termination::CollisionGuard {
            t: t_stop,
            min_distance,
        }
    } else {
        Termination::Completed
    };

    Ok(Trajectory {
        system,
        law: pinned_law,
        samples,
        dense: Some(out.dense),
        termination,
        stats: TrajectoryStats {
            accepted: out.stats.accepted,
            rejected: out.stats.rejected,
            rhs_evaluations: out.stats.rhs_evaluations,
            rtol: cfg.rtol,
            atol: cfg.atol,
            max_energy_drift: max_drift,
        },
    })
}

fn min_dist_and_diameter(coords: &[f64]) -> (f64, f64) {
    let n = coords.len() / 2;
    let mut min_d = f64::INFINITY;
    let mut max_d: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = coords[2 * i] - coords[2 * j];
            let dy = coords[2 * i + 1] - coords[2 * j + 1];
            let d = dx.hypot(dy);
            min_d = min_d.min(d);
            max_d = max_d.max(d);
        }
    }
    (min_d, max_d)
}

fn energy_of_flat(masses: &[f64], y: &[f64], alpha: f64) -> f64 {
    let n = masses.len();
    let pos: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(y[2 * k], y[2 * k + 1]))
        .collect();
    let mut kinetic = 0.0;
    for k in 0..n {
        let vx = y[2 * n + 2 * k];
        let vy = y[2 * n + 2 * k + 1];
        kinetic += 0.5 * masses[k] * (vx * vx + vy * vy);
    }
    kinetic - potential_raw(masses, &pos, alpha)
}

/// Angular speed, period, and energy of the rigidly rotating solution
/// through a central configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeEquilibrium {
    /// Angular velocity `Omega = sqrt(alpha U / I)` in time units.
    pub omega_time: f64,
    /// Period `2 pi / Omega`.
    pub period_time: f64,
    /// Conserved energy `(alpha/2 - 1) U` of the rotating solution.
    pub energy: f64,
}

/// Computes the relative-equilibrium data for a central configuration.
/// The input must be central to [`CENTRAL_INPUT_TOL`].
pub fn relative_equilibrium(
    q: &Configuration,
    law: &PotentialLaw,
) -> Result<RelativeEquilibrium> {
    let residual = central_residual(q, law);
    if residual > CENTRAL_INPUT_TOL {
        return Err(Error::NonCentral {
            residual,
            tol: CENTRAL_INPUT_TOL,
        });
    }
    let u = potential_value(q, law);
    let i = moment_of_inertia(q);
    let omega = (law.alpha() * u / i).sqrt();
    Ok(RelativeEquilibrium {
        omega_time: omega,
        period_time: 2.0 * std::f64::consts::PI / omega,
        energy: (0.5 * law.alpha() - 1.0) * u,
    })
}

/// Initial phase state of the relative equilibrium: `qdot = i Omega q`.
pub fn relative_equilibrium_state(q: &Configuration, law: &PotentialLaw) -> Result<PhaseState> {
    let re = relative_equilibrium(q, law)?;
    let qdot = q
        .as_tangent()
        .times_i()
        .scaled(Complex64::new(re.omega_time, 0.0));
    PhaseState::new(q.clone(), qdot, 0.0)
}

/// A homographic run: the planar central-force factor `z(t)`, the
/// trajectory it generates, and an independent full integration from the
/// same initial state for cross-validation.
#[derive(Debug)]
pub struct HomographicRun {
    /// Trajectory assembled as `z(t) q` with velocities `zdot(t) q`.
    pub reduced: Trajectory,
    /// Full direct integration from the identical initial state.
    pub full: Trajectory,
    /// `(t, z, zdot)` samples of the central-force factor.
    pub z_samples: Vec<(f64, Complex64, Complex64)>,
    /// Largest mass-norm deviation between the reduced and full positions
    /// over the common time span.
    pub max_mass_norm_deviation: f64,
    /// True when the factor `z` reached the collapse cutoff and the
    /// reduced run was truncated there.
    pub truncated_at_collapse: bool,
}

/// Builds the homographic solution `z(t) q` through a central
/// configuration: integrates the planar central-force equation
/// `zddot = lambda z / |z|^{alpha+2}` and cross-validates against a full
/// integration started from the same state.
pub fn homographic(
    q_central: &Configuration,
    law: &PotentialLaw,
    z0: Complex64,
    zdot0: Complex64,
    t_final: f64,
    tol: f64,
) -> Result<HomographicRun> {
    let residual = central_residual(q_central, law);
    if residual > CENTRAL_INPUT_TOL {
        return Err(Error::NonCentral {
            residual,
            tol: CENTRAL_INPUT_TOL,
        });
    }
    if z0.norm() == 0.0 {
        return Err(Error::InvalidInput("homographic factor z0 must be nonzero".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "integration tolerance {tol} must be finite and positive"
        )));
    }
    let lambda = lambda_for(q_central, law);
    let alpha = law.alpha();
    let cutoff = 1e-9 * z0.norm();

    // Central-force factor: state (re z, im z, re zdot, im zdot).
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        let r2 = y[0] * y[0] + y[1] * y[1];
        let w = lambda * r2.powf(-0.5 * (alpha + 2.0));
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = w * y[0];
        dy[3] = w * y[1];
    };
    let mut collapse_stop: Option<f64> = None;
    let observer = |rec: &ode::StepRecord| -> StepControl {
        let r = rec.y1[0].hypot(rec.y1[1]);
        if r <= 2.0 * cutoff {
            let mut t_lo = rec.t0;
            let mut t_hi = rec.t1;
            for _ in 0..80 {
                let tm = 0.5 * (t_lo + t_hi);
                let ym = rec.dense.eval(tm);
                if ym[0].hypot(ym[1]) <= 2.0 * cutoff {
                    t_hi = tm;
                } else {
                    t_lo = tm;
                }
            }
            collapse_stop = Some(t_lo);
            return StepControl::StopAt(t_lo);
        }
        StepControl::Continue
    };
    let ode_cfg = Dopri5Config {
        rtol: tol,
        atol: tol * 1e-2,
        ..Dopri5Config::default()
    };
    let y0 = [z0.re, z0.im, zdot0.re, zdot0.im];
    let factor = ode::integrate(rhs, &y0, 0.0, t_final, &ode_cfg, observer)?;
    let truncated_at_collapse = collapse_stop.is_some();

    // Sample times of the factor: one per accepted step plus endpoints.
    let mut z_samples = vec![(0.0, z0, zdot0)];
    for step in &factor.dense {
        let t = step.t_end().min(factor.t_final);
        let y = step.eval(t);
        if t > z_samples.last().expect("nonempty").0 {
            z_samples.push((
                t,
                Complex64::new(y[0], y[1]),
                Complex64::new(y[2], y[3]),
            ));
        }
    }

    // Assemble the reduced trajectory z(t) q.
    let mut reduced_samples = Vec::with_capacity(z_samples.len());
    for &(t, z, zdot) in &z_samples {
        let positions: Vec<Complex64> = q_central.positions().iter().map(|p| z * p).collect();
        let q = q_central.with_positions(positions)?;
        let qdot = q_central.as_tangent().scaled(zdot);
        reduced_samples.push(PhaseState::new(q, qdot, t)?);
    }
    let h0 = reduced_samples[0].conserved(law).energy;
    let reduced = Trajectory::from_samples(law.with_energy(h0)?, reduced_samples)?;

    // Independent full-dimensional integration from the identical state.
    let initial = reduced.samples()[0].clone();
    let full = integrate(&initial, law, t_final, tol)?;

    // Compare over the common span at the factor's sample times.
    let (f0, f1) = full.span();
    let mut max_dev: f64 = 0.0;
    for s in reduced.samples() {
        if s.t < f0 || s.t > f1 {
            continue;
        }
        let full_state = full.sample_at(s.t)?;
        let diff = full_state.q.as_tangent().sub(&s.q.as_tangent())?;
        max_dev = max_dev.max(mass_norm(&diff));
    }

    Ok(HomographicRun {
        reduced,
        full,
        z_samples,
        max_mass_norm_deviation: max_dev,
        truncated_at_collapse,
    })
}

/// Per-sample conservation and shape diagnostics of a trajectory.
#[derive(Debug, Clone)]
pub struct DiagnosticsSeries {
    /// Sample times.
    pub t: Vec<f64>,
    /// Instantaneous energy `|qdot|^2/2 - U`.
    pub energy: Vec<f64>,
    /// Linear momentum.
    pub linear_momentum: Vec<Complex64>,
    /// Angular momentum.
    pub angular_momentum: Vec<f64>,
    /// Moment of inertia `I`.
    pub inertia: Vec<f64>,
    /// Potential `U`.
    pub potential: Vec<f64>,
    /// Homographic invariant `mu = I^{alpha/2} U`.
    pub mu: Vec<f64>,
    /// `|Idotdot - 4 h - (4 - 2 alpha) U|` with `Idotdot` evaluated
    /// analytically as `2 |qdot|^2 + 2 <q, grad U>` and `h` the
    /// trajectory's conserved energy.
    pub lj_residual: Vec<f64>,
    /// Scale-invariant combination `h |C|^{2 alpha / (2 - alpha)}`;
    /// absent when `alpha = 2` where the exponent is undefined.
    pub dziobek: Option<Vec<f64>>,
}

/// Computes the full diagnostics series for a trajectory.
pub fn diagnostics(traj: &Trajectory) -> Result<DiagnosticsSeries> {
    let law = traj.law();
    let alpha = law.alpha();
    let h = law.energy();
    let n = traj.samples().len();
    let mut out = DiagnosticsSeries {
        t: Vec::with_capacity(n),
        energy: Vec::with_capacity(n),
        linear_momentum: Vec::with_capacity(n),
        angular_momentum: Vec::with_capacity(n),
        inertia: Vec::with_capacity(n),
        potential: Vec::with_capacity(n),
        mu: Vec::with_capacity(n),
        lj_residual: Vec::with_capacity(n),
        dziobek: None,
    };
    for s in traj.samples() {
        let cq = s.conserved(law);
        let i = moment_of_inertia(&s.q);
        let u = potential_value(&s.q, law);
        let grad = crate::potential::mass_gradient(&s.q, law);
        let radial = crate::mass_geometry::mass_inner(&grad, &s.q.as_tangent())?;
        let iddot = 2.0 * s.qdot.norm().powi(2) + 2.0 * radial;
        out.t.push(s.t);
        out.energy.push(cq.energy);
        out.linear_momentum.push(cq.linear_momentum);
        out.angular_momentum.push(cq.angular_momentum);
        out.inertia.push(i);
        out.potential.push(u);
        out.mu.push(i.powf(0.5 * alpha) * u);
        out.lj_residual
            .push((iddot - 4.0 * h - (4.0 - 2.0 * alpha) * u).abs());
    }
    if alpha != 2.0 {
        out.dziobek = Some(dziobek_series(traj)?);
    }
    Ok(out)
}

/// The scale-invariant series `h |C|^{2 alpha / (2 - alpha)}`. Errors for
/// `alpha = 2`, where the exponent diverges.
pub fn dziobek_series(traj: &Trajectory) -> Result<Vec<f64>> {
    let law = traj.law();
    let alpha = law.alpha();
    if alpha == 2.0 {
        return Err(Error::UnsupportedExponent {
            alpha,
            reason: "the scale-invariant exponent 2 alpha / (2 - alpha) is undefined".into(),
        });
    }
    let expo = 2.0 * alpha / (2.0 - alpha);
    let h = law.energy();
    Ok(traj
        .samples()
        .iter()
        .map(|s| h * s.conserved(law).angular_momentum.abs().powf(expo))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn law(alpha: f64) -> PotentialLaw {
        PotentialLaw::new(alpha, 0.0).unwrap()
    }

    #[test]
    fn circular_two_body_orbit_returns_to_start() {
        // alpha = 1: U = 1, I = 1/2, Omega^2 = 2.
        let q = fixtures::pair();
        let l = law(1.0);
        let re = relative_equilibrium(&q, &l).unwrap();
        assert_relative_eq!(re.omega_time, 2.0f64.sqrt(), max_relative = 1e-13);
        let initial = relative_equilibrium_state(&q, &l).unwrap();
        let traj = integrate(&initial, &l, re.period_time, 1e-12).unwrap();
        assert_eq!(traj.termination(), Termination::Completed);
        let end = traj.final_state();
        for (a, b) in end.q.positions().iter().zip(q.positions()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-8);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-8);
        }
    }

    #[test]
    fn relative_equilibrium_energy_levels() {
        let q = fixtures::lag();
        // alpha = 2: energy exactly 0; alpha = 3: 1/2 with Omega = sqrt 3;
        // alpha = 1: -3/2.
        assert_abs_diff_eq!(
            relative_equilibrium(&q, &law(2.0)).unwrap().energy,
            0.0,
            epsilon = 1e-13
        );
        let re3 = relative_equilibrium(&q, &law(3.0)).unwrap();
        assert_relative_eq!(re3.energy, 0.5, max_relative = 1e-13);
        assert_relative_eq!(re3.omega_time, 3.0f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(
            relative_equilibrium(&q, &law(1.0)).unwrap().energy,
            -1.5,
            max_relative = 1e-13
        );
    }

    #[test]
    fn non_central_input_is_rejected() {
        let q = fixtures::lag();
        let mut pos = q.positions().to_vec();
        pos[0] += Complex64::new(0.2, 0.0);
        let q = q.with_positions(pos).unwrap();
        assert!(matches!(
            relative_equilibrium(&q, &law(1.0)),
            Err(Error::NonCentral { .. })
        ));
    }

    #[test]
    fn rest_start_collapses_homothetically() {
        // Dropped from rest, the central configuration shrinks without
        // changing shape until the collision guard truncates the run.
        let q = fixtures::lag();
        let l = law(1.0);
        let initial = PhaseState::new(
            q.clone(),
            TangentVector::zeros(Arc::clone(q.system())),
            0.0,
        )
        .unwrap();
        let traj = integrate(&initial, &l, 10.0, 1e-10).unwrap();
        assert!(matches!(
            traj.termination(),
            Termination::CollisionGuard { .. }
        ));
        let d0 = q.mutual_distances();
        for s in traj.samples() {
            let d = s.q.mutual_distances();
            let scale = d[0] / d0[0];
            for (a, b) in d.iter().zip(&d0) {
                assert_relative_eq!(a / b, scale, max_relative = 1e-8);
            }
        }
        // The guard stops well inside the span requested.
        assert!(traj.final_state().t < 10.0);
        assert!(traj.final_state().q.min_pair_distance() < 1e-6);
    }

    #[test]
    fn conserved_quantities_drift_is_tiny() {
        // Perturbed rotating triangle; ten rotation periods.
        let q = fixtures::lag();
        let l = law(1.0);
        let re = relative_equilibrium(&q, &l).unwrap();
        let mut state = relative_equilibrium_state(&q, &l).unwrap();
        let bumped = state
            .qdot
            .add(&TangentVector::new(
                Arc::clone(q.system()),
                vec![
                    Complex64::new(0.03, -0.02),
                    Complex64::new(-0.01, 0.04),
                    Complex64::new(-0.02, -0.02),
                ],
            )
            .unwrap())
            .unwrap();
        state = PhaseState::new(state.q, bumped, 0.0).unwrap();
        let c0 = state.conserved(&l);
        let traj = integrate(&state, &l, 10.0 * re.period_time, 1e-11).unwrap();
        assert!(traj.stats().max_energy_drift < 1e-9);
        for s in traj.samples() {
            let c = s.conserved(&l);
            assert_abs_diff_eq!(
                c.angular_momentum,
                c0.angular_momentum,
                epsilon = 1e-9 * c0.angular_momentum.abs()
            );
            assert!((c.linear_momentum - c0.linear_momentum).norm() < 1e-9);
        }
    }

    #[test]
    fn time_reversal_recovers_initial_state() {
        let q = fixtures::lag();
        let l = law(2.0);
        let initial = relative_equilibrium_state(&q, &l).unwrap();
        let tol = 1e-11;
        let fwd = integrate(&initial, &l, 2.0, tol).unwrap();
        let turn = fwd.final_state().clone();
        let back = integrate(&turn, &l, 0.0, tol).unwrap();
        let recovered = back.final_state();
        for (a, b) in recovered.q.positions().iter().zip(q.positions()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 100.0 * tol);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 100.0 * tol);
        }
    }

    #[test]
    fn trajectory_law_carries_measured_energy() {
        let q = fixtures::lag();
        let l = law(3.0); // declared energy 0; actual RE energy 1/2
        let initial = relative_equilibrium_state(&q, &l).unwrap();
        let traj = integrate(&initial, &l, 1.0, 1e-10).unwrap();
        assert_relative_eq!(traj.law().energy(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn sample_at_interpolates_on_shell() {
        let q = fixtures::pair();
        let l = law(1.0);
        let initial = relative_equilibrium_state(&q, &l).unwrap();
        let traj = integrate(&initial, &l, 3.0, 1e-11).unwrap();
        let h0 = traj.law().energy();
        for t in [0.37, 1.114, 2.718] {
            let s = traj.sample_at(t).unwrap();
            assert_abs_diff_eq!(s.conserved(traj.law()).energy, h0, epsilon = 1e-8);
        }
        assert!(traj.sample_at(5.0).is_err());
    }

    #[test]
    fn homographic_circular_factor_matches_relative_equilibrium() {
        let q = fixtures::lag();
        let l = law(1.0);
        let re = relative_equilibrium(&q, &l).unwrap();
        let z0 = Complex64::new(1.0, 0.0);
        let zdot0 = Complex64::new(0.0, re.omega_time);
        let run = homographic(&q, &l, z0, zdot0, re.period_time, 1e-11).unwrap();
        assert!(!run.truncated_at_collapse);
        assert!(run.max_mass_norm_deviation < 1e-7);
        // |z| stays 1 on the circular solution.
        for &(_, z, _) in &run.z_samples {
            assert_abs_diff_eq!(z.norm(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn homographic_rest_drop_collapses() {
        let q = fixtures::lag();
        let l = law(1.0);
        let run = homographic(
            &q,
            &l,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            10.0,
            1e-10,
        )
        .unwrap();
        assert!(run.truncated_at_collapse);
        let (_, t1) = run.reduced.span();
        assert!(t1 < 10.0);
        // Shape ratios constant along the reduced trajectory.
        let d0 = q.mutual_distances();
        for s in run.reduced.samples() {
            let d = s.q.mutual_distances();
            let scale = d[0] / d0[0];
            for (a, b) in d.iter().zip(&d0) {
                assert_relative_eq!(a / b, scale, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn diagnostics_on_relative_equilibrium() {
        let q = fixtures::eul();
        let l = law(2.0);
        let re = relative_equilibrium(&q, &l).unwrap();
        let initial = relative_equilibrium_state(&q, &l).unwrap();
        let traj = integrate(&initial, &l, re.period_time, 1e-11).unwrap();
        let d = diagnostics(&traj).unwrap();
        let i0 = d.inertia[0];
        let u0 = d.potential[0];
        for k in 0..d.t.len() {
            assert_relative_eq!(d.inertia[k], i0, max_relative = 1e-9);
            assert_relative_eq!(d.potential[k], u0, max_relative = 1e-9);
            assert!(d.lj_residual[k] < 1e-9);
            // alpha = 2 relative equilibrium has exactly zero energy.
            assert_abs_diff_eq!(d.energy[k], 0.0, epsilon = 1e-10);
        }
        assert!(d.dziobek.is_none());
    }

    #[test]
    fn diagnostics_mu_constant_on_elliptic_homographic_orbit() {
        let q = fixtures::lag();
        let l = law(1.0);
        let re = relative_equilibrium(&q, &l).unwrap();
        // Sub-circular tangential speed: an elliptic-type rescaling orbit.
        let run = homographic(
            &q,
            &l,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.8 * re.omega_time),
            2.0 * re.period_time,
            1e-11,
        )
        .unwrap();
        let d = diagnostics(&run.reduced).unwrap();
        let mu0 = d.mu[0];
        for v in &d.mu {
            assert_relative_eq!(*v, mu0, max_relative = 1e-8);
        }
        let dz = d.dziobek.as_ref().unwrap();
        let dz0 = dz[0];
        for v in dz {
            assert_relative_eq!(*v, dz0, max_relative = 1e-7);
        }
    }

    #[test]
    fn dziobek_rejects_exponent_two() {
        let q = fixtures::pair();
        let l = law(2.0);
        let initial = relative_equilibrium_state(&q, &l).unwrap();
        let traj = integrate(&initial, &l, 0.5, 1e-10).unwrap();
        assert!(matches!(
            dziobek_series(&traj),
            Err(Error::UnsupportedExponent { .. })
        ));
    }

    #[test]
    fn from_samples_requires_increasing_times() {
        let q = fixtures::pair();
        let l = law(1.0);
        let zero = TangentVector::zeros(Arc::clone(q.system()));
        let s0 = PhaseState::new(q.clone(), zero.clone(), 0.0).unwrap();
        let s1 = PhaseState::new(q.clone(), zero, 0.0).unwrap();
        assert!(Trajectory::from_samples(l, vec![s0, s1]).is_err());
    }
}
