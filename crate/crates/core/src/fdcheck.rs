//! Finite-difference cross-checks: gradients and Hessian actions from
//! potential values alone, and sectional curvature of an arbitrary
//! Riemannian metric from metric values alone.
//!
//! Everything here is deliberately independent of the analytic formulas
//! it is used to check: the curvature path goes through Christoffel
//! symbols and the Riemann tensor computed by nested central differences
//! on a metric callback, never through any closed-form curvature
//! expression. Sign and index conventions are pinned by a self-test
//! against the round sphere (see the tests at the bottom), so an
//! agreement between this module and the analytic formulas elsewhere
//! checks the formulas, not a shared convention choice.
//!
//! The nested differentiation is numerically expensive and only accurate
//! to a few parts in 1e4 to 1e6; this module belongs in tests, not in
//! production paths.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mass_geometry::{Configuration, TangentVector};
use crate::potential::{potential_raw, PotentialLaw};
use crate::tolerances::{
    fd_gradient_step, fd_hessian_step, FD_CHRISTOFFEL_STEP_REL, FD_METRIC_STEP_REL,
};

/// Mass gradient of the potential by central differences of the value.
/// Per-coordinate step `eps^{1/3} max(1, |x|)`; the Euclidean partials
/// are converted to the mass gradient by dividing by each body's mass.
pub fn fd_gradient(q: &Configuration, law: &PotentialLaw) -> TangentVector {
    let masses = q.system().masses();
    let alpha = law.alpha();
    let x0 = q.to_real();
    let n = q.n();
    let mut grad = vec![Complex64::new(0.0, 0.0); n];
    let mut x = x0.clone();
    for idx in 0..2 * n {
        let h = fd_gradient_step(x0[idx].abs().max(1.0));
        x[idx] = x0[idx] + h;
        let up = potential_of_real(masses, &x, alpha);
        x[idx] = x0[idx] - h;
        let um = potential_of_real(masses, &x, alpha);
        x[idx] = x0[idx];
        let d = (up - um) / (2.0 * h);
        let body = idx / 2;
        if idx % 2 == 0 {
            grad[body].re = d / masses[body];
        } else {
            grad[body].im = d / masses[body];
        }
    }
    TangentVector::new(std::sync::Arc::clone(q.system()), grad)
        .expect("finite differences of a finite potential are finite")
}

/// Hessian action by central differences of the analytic gradient:
/// `[grad U(q + h v) - grad U(q - h v)] / (2 h)` with
/// `h = eps^{1/4} scale / |v|`.
pub fn fd_hessian_apply(
    q: &Configuration,
    v: &TangentVector,
    law: &PotentialLaw,
) -> Result<TangentVector> {
    let vnorm = v
        .components()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if vnorm == 0.0 {
        return Ok(TangentVector::zeros(std::sync::Arc::clone(q.system())));
    }
    let scale = q.positions().iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let h = fd_hessian_step(scale) / vnorm;
    let plus: Vec<Complex64> = q
        .positions()
        .iter()
        .zip(v.components())
        .map(|(p, w)| p + h * w)
        .collect();
    let minus: Vec<Complex64> = q
        .positions()
        .iter()
        .zip(v.components())
        .map(|(p, w)| p - h * w)
        .collect();
    let qp = q.with_positions(plus)?;
    let qm = q.with_positions(minus)?;
    let gp = crate::potential::mass_gradient(&qp, law);
    let gm = crate::potential::mass_gradient(&qm, law);
    let out = gp
        .components()
        .iter()
        .zip(gm.components())
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    TangentVector::new(std::sync::Arc::clone(q.system()), out)
}

fn potential_of_real(masses: &[f64], coords: &[f64], alpha: f64) -> f64 {
    let z: Vec<Complex64> = coords
        .chunks_exact(2)
        .map(|xy| Complex64::new(xy[0], xy[1]))
        .collect();
    potential_raw(masses, &z, alpha)
}

/// Step sizes for the two finite-difference levels of the curvature
/// computation.
#[derive(Debug, Clone, Copy)]
pub struct FdRiemann {
    /// Relative step for differentiating the metric (Christoffel level).
    pub metric_step_rel: f64,
    /// Relative step for differentiating the Christoffel symbols
    /// (curvature level). Larger than the metric step because it sits on
    /// top of one differentiation already.
    pub christoffel_step_rel: f64,
}

impl Default for FdRiemann {
    fn default() -> Self {
        FdRiemann {
            metric_step_rel: FD_METRIC_STEP_REL,
            christoffel_step_rel: FD_CHRISTOFFEL_STEP_REL,
        }
    }
}

type MetricFn<'a> = &'a dyn Fn(&[f64]) -> DMatrix<f64>;

/// Christoffel symbols of the second kind at `x`:
/// `Gamma^a_{bc} = (1/2) g^{ad} (d_b g_dc + d_c g_db - d_d g_bc)`,
/// with the metric derivatives taken by central differences.
fn christoffel(metric: MetricFn, x: &[f64], step: f64) -> Result<Vec<DMatrix<f64>>> {
    let dim = x.len();
    let g = metric(x);
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("metric not invertible at base point".into()))?;

    // dg[b] = d g / d x^b as a dim x dim matrix.
    let mut dg = Vec::with_capacity(dim);
    let mut xp = x.to_vec();
    for b in 0..dim {
        let h = step * x[b].abs().max(1.0);
        xp[b] = x[b] + h;
        let gp = metric(&xp);
        xp[b] = x[b] - h;
        let gm = metric(&xp);
        xp[b] = x[b];
        dg.push((gp - gm) / (2.0 * h));
    }

    // gamma[a] indexed by (b, c).
    let mut gamma = vec![DMatrix::<f64>::zeros(dim, dim); dim];
    for b in 0..dim {
        for c in 0..dim {
            for d in 0..dim {
                let lower = 0.5 * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                for a in 0..dim {
                    gamma[a][(b, c)] += g_inv[(a, d)] * lower;
                }
            }
        }
    }
    Ok(gamma)
}

/// Sectional curvature of the plane spanned by `u`, `v` at `x`, for the
/// metric given as a callback, entirely by finite differences.
///
/// The curvature tensor uses the convention
/// `R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
///  + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}`,
/// `(R(u,v)w)^a = R^a_{bcd} w^b u^c v^d`, and
/// `K = g(R(u,v)v, u) / (g(u,u) g(v,v) - g(u,v)^2)`,
/// which yields `K = +1` on the unit sphere (see the self-test below).
pub fn fd_sectional_of_metric(
    metric: MetricFn,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    cfg: FdRiemann,
) -> Result<f64> {
    let dim = x.len();
    if u.len() != dim || v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len().max(v.len()),
        });
    }
    let g = metric(x);
    let gamma0 = christoffel(metric, x, cfg.metric_step_rel)?;

    // dgamma[c][a] indexed by (d, b): d Gamma^a_{db} / d x^c.
    let mut dgamma: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(dim);
    let mut xp = x.to_vec();
    for c in 0..dim {
        let h = cfg.christoffel_step_rel * x[c].abs().max(1.0);
        xp[c] = x[c] + h;
        let gp = christoffel(metric, &xp, cfg.metric_step_rel)?;
        xp[c] = x[c] - h;
        let gm = christoffel(metric, &xp, cfg.metric_step_rel)?;
        xp[c] = x[c];
        dgamma.push(
            gp.into_iter()
                .zip(gm)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect(),
        );
    }

    // riemann_w^a = R^a_{bcd} v^b u^c v^d  (w := v), i.e. R(u, v) v.
    let uv = DVector::from_column_slice(u);
    let vv = DVector::from_column_slice(v);
    let mut rw = DVector::<f64>::zeros(dim);
    for a in 0..dim {
        let mut s = 0.0;
        for b in 0..dim {
            for c in 0..dim {
                for d in 0..dim {
                    let mut r = dgamma[c][a][(d, b)] - dgamma[d][a][(c, b)];
                    for e in 0..dim {
                        r += gamma0[a][(c, e)] * gamma0[e][(d, b)]
                            - gamma0[a][(d, e)] * gamma0[e][(c, b)];
                    }
                    s += r * vv[b] * uv[c] * vv[d];
                }
            }
        }
        rw[a] = s;
    }

    let guu = (&g * &uv).dot(&uv);
    let gvv = (&g * &vv).dot(&vv);
    let guv = (&g * &uv).dot(&vv);
    let denom = guu * gvv - guv * guv;
    if denom.abs() < 1e-14 * guu.abs().max(gvv.abs()).max(1e-300) {
        return Err(Error::Degenerate(
            "plane legs are linearly dependent in the metric".into(),
        ));
    }
    Ok((&g * &rw).dot(&uv) / denom)
}

/// Sectional curvature of the energy-conformal n-body metric
/// `(h + U(q)) <., .>` by finite differences, used as an independent
/// oracle for the analytic curvature formulas. The plane is spanned by
/// two tangent vectors at `q`; they need not be orthonormal.
pub fn fd_sectional_conformal(
    q: &Configuration,
    u: &TangentVector,
    v: &TangentVector,
    law: &PotentialLaw,
    cfg: FdRiemann,
) -> Result<f64> {
    let masses: Vec<f64> = q.system().masses().to_vec();
    let alpha = law.alpha();
    let h = law.energy();
    let metric = move |coords: &[f64]| -> DMatrix<f64> {
        let factor = h + potential_of_real(&masses, coords, alpha);
        let mut g = DMatrix::<f64>::zeros(coords.len(), coords.len());
        for (body, m) in masses.iter().enumerate() {
            g[(2 * body, 2 * body)] = factor * m;
            g[(2 * body + 1, 2 * body + 1)] = factor * m;
        }
        g
    };
    fd_sectional_of_metric(&metric, &q.to_real(), &u.to_real(), &v.to_real(), cfg)
}
