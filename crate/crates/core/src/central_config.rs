//! Central configurations: shapes where the mass gradient of the
//! potential is parallel to the position vector, `grad U(q) = lambda q`.
//!
//! Contracting the defining equation with `q` and using homogeneity gives
//! `lambda = -alpha U / I`, so `lambda` is determined by the shape; the
//! residual `||grad U - lambda q||` in the mass metric therefore measures
//! centrality without any free parameter. The solver looks for zeros of
//! that residual with a Newton iteration on the gauge-fixed problem:
//! center of mass pinned at the origin, moment of inertia pinned to one,
//! first body pinned to the real axis. The three gauge directions
//! (translation is two-dimensional) plus scaling are exactly the
//! degeneracies of the unconstrained equation, so the bordered system is
//! square and generically nonsingular.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mass_geometry::{mass_inner, moment_of_inertia, Configuration, TangentVector};
use crate::potential::{hessian_apply, mass_gradient, potential_value, PotentialLaw};
use crate::tolerances::{NEWTON_CONSTRAINT_TOL, NEWTON_MAX_BACKTRACKS, NEWTON_MAX_ITERATIONS};

/// The proportionality constant `lambda = -alpha U(q) / I(q)` that a
/// central configuration must satisfy. Defined for every configuration;
/// negative because `U > 0`.
pub fn lambda_for(q: &Configuration, law: &PotentialLaw) -> f64 {
    -law.alpha() * potential_value(q, law) / moment_of_inertia(q)
}

/// Mass-metric norm of `grad U(q) - lambda(q) q`: zero exactly on central
/// configurations.
pub fn central_residual(q: &Configuration, law: &PotentialLaw) -> f64 {
    let grad = mass_gradient(q, law);
    let lambda = lambda_for(q, law);
    let diff = grad
        .sub(&q.as_tangent().scaled(Complex64::new(lambda, 0.0)))
        .expect("same system");
    diff.norm()
}

/// A converged central configuration in normalized gauge: centered,
/// moment of inertia one, first body on the positive real axis.
#[derive(Debug, Clone)]
pub struct CentralConfigResult {
    /// The configuration itself.
    pub configuration: Configuration,
    /// The multiplier `-alpha U / I` at the solution.
    pub lambda: f64,
    /// Recomputed mass-metric residual `||grad U - lambda q||`.
    pub residual: f64,
    /// Newton iterations used.
    pub iterations: usize,
}

/// Projects a seed into the solver gauge: recentered, scaled to `I = 1`,
/// rotated so the first body sits on the positive real axis.
fn project_to_gauge(seed: &Configuration) -> Result<Configuration> {
    let centered = seed.recentered();
    let i = moment_of_inertia(&centered);
    if i <= 0.0 {
        return Err(Error::Degenerate("seed has zero moment of inertia".into()));
    }
    let scaled = centered.scaled(1.0 / i.sqrt())?;
    let q1 = scaled.positions()[0];
    if q1.norm() < 1e-9 * scaled.diameter() {
        return Err(Error::Degenerate(
            "rotation gauge undefined: first body at the center".into(),
        ));
    }
    scaled.rotated(-q1.arg())
}

fn constraint_values(q: &Configuration) -> [f64; 4] {
    let masses = q.system().masses();
    let pos = q.positions();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for (m, z) in masses.iter().zip(pos) {
        cx += m * z.re;
        cy += m * z.im;
    }
    [cx, cy, moment_of_inertia(q) - 1.0, pos[0].im]
}

fn merit(q: &Configuration, law: &PotentialLaw) -> f64 {
    let f = central_residual(q, law);
    let g = constraint_values(q);
    0.5 * (f * f + g.iter().map(|x| x * x).sum::<f64>())
}

/// Finds a central configuration near `seed` by a bordered Newton
/// iteration with backtracking. Returns when the recomputed residual
/// drops to `tol` and the gauge constraints are satisfied; errors with
/// [`Error::NonConvergence`] otherwise.
pub fn solve_central(
    seed: &Configuration,
    law: &PotentialLaw,
    tol: f64,
) -> Result<CentralConfigResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "solver tolerance {tol} must be finite and positive"
        )));
    }
    let mut q = project_to_gauge(seed)?;
    let mut last_residual = central_residual(&q, law);

    for iter in 0..NEWTON_MAX_ITERATIONS {
        let g = constraint_values(&q);
        let g_inf = g.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        last_residual = central_residual(&q, law);
        if last_residual <= tol && g_inf <= NEWTON_CONSTRAINT_TOL {
            return Ok(finish(q, law, iter));
        }

        let kkt = assemble_kkt(&q, law)?;
        let rhs = assemble_rhs(&q, law, &g);
        let delta = match kkt.clone().lu().solve(&rhs) {
            Some(d) if d.iter().all(|x| x.is_finite()) => d,
            _ => kkt
                .full_piv_lu()
                .solve(&rhs)
                .filter(|d| d.iter().all(|x| x.is_finite()))
                .ok_or_else(|| Error::Degenerate("singular Newton system".into()))?,
        };

        // Backtracking on the merit function; trial configurations that
        // collide or leave the valid domain count as rejected.
        let m0 = merit(&q, law);
        let base = q.to_real();
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..NEWTON_MAX_BACKTRACKS {
            let trial_coords: Vec<f64> = base
                .iter()
                .enumerate()
                .map(|(k, x)| x + step * delta[k])
                .collect();
            if let Ok(trial) =
                Configuration::from_real(std::sync::Arc::clone(q.system()), &trial_coords)
            {
                if merit(&trial, law) < m0 {
                    q = trial;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                iterations: iter,
                residual: last_residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: NEWTON_MAX_ITERATIONS,
        residual: last_residual,
    })
}

/// KKT matrix `[[J, G^T], [G, 0]]` where `J` is the Jacobian of
/// `F(q) = grad U - lambda(q) q` and `G` the constraint Jacobian.
fn assemble_kkt(q: &Configuration, law: &PotentialLaw) -> Result<DMatrix<f64>> {
    let n = q.n();
    let n2 = 2 * n;
    let dim = n2 + 4;
    let masses = q.system().masses();
    let pos = q.positions();
    let lambda = lambda_for(q, law);
    let alpha = law.alpha();
    let u = potential_value(q, law);
    let i_q = moment_of_inertia(q);
    let grad = mass_gradient(q, law);
    let qt = q.as_tangent();

    let mut kkt = DMatrix::<f64>::zeros(dim, dim);
    // Column j of J: directional derivative of F along the j-th real
    // coordinate direction. dF(v) = Hess v - lambda v - dlambda(v) q with
    // dlambda(v) = -alpha <grad U, v> / I + 2 alpha U <q, v> / I^2.
    for j in 0..n2 {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        if j % 2 == 0 {
            e[j / 2].re = 1.0;
        } else {
            e[j / 2].im = 1.0;
        }
        let v = TangentVector::new(std::sync::Arc::clone(q.system()), e)?;
        let hv = hessian_apply(q, &v, law)?;
        let dlambda = -alpha * mass_inner(&grad, &v)? / i_q
            + 2.0 * alpha * u * mass_inner(&qt, &v)? / (i_q * i_q);
        for k in 0..n {
            let z = hv.components()[k] - lambda * v.components()[k] - dlambda * pos[k];
            kkt[(2 * k, j)] = z.re;
            kkt[(2 * k + 1, j)] = z.im;
        }
    }
    // Constraint rows and their transposes.
    for k in 0..n {
        kkt[(n2, 2 * k)] = masses[k]; // d(sum m x)/dx_k
        kkt[(n2 + 1, 2 * k + 1)] = masses[k]; // d(sum m y)/dy_k
        kkt[(n2 + 2, 2 * k)] = 2.0 * masses[k] * pos[k].re; // dI/dx_k
        kkt[(n2 + 2, 2 * k + 1)] = 2.0 * masses[k] * pos[k].im; // dI/dy_k
    }
    kkt[(n2 + 3, 1)] = 1.0; // d(Im q_1)/dy_1
    for r in 0..4 {
        for c in 0..n2 {
            kkt[(c, n2 + r)] = kkt[(n2 + r, c)];
        }
    }
    Ok(kkt)
}

fn assemble_rhs(q: &Configuration, law: &PotentialLaw, g: &[f64; 4]) -> DVector<f64> {
    let n = q.n();
    let dim = 2 * n + 4;
    let lambda = lambda_for(q, law);
    let grad = mass_gradient(q, law);
    let mut rhs = DVector::<f64>::zeros(dim);
    for k in 0..n {
        let f = grad.components()[k] - lambda * q.positions()[k];
        rhs[2 * k] = -f.re;
        rhs[2 * k + 1] = -f.im;
    }
    for r in 0..4 {
        rhs[2 * n + r] = -g[r];
    }
    rhs
}

fn finish(q: Configuration, law: &PotentialLaw, iterations: usize) -> CentralConfigResult {
    // Gauge leaves the first body on the real axis with either sign;
    // normalize to the positive side.
    let q = if q.positions()[0].re < 0.0 {
        q.scaled(-1.0).expect("negation preserves validity")
    } else {
        q
    };
    let lambda = lambda_for(&q, law);
    let residual = central_residual(&q, law);
    CentralConfigResult {
        configuration: q,
        lambda,
        residual,
        iterations,
    }
}
