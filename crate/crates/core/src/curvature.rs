//! Sectional and holomorphic sectional curvature of the energy-conformal
//! metric `(h + U) <., .>` on planar configuration space.
//!
//! For a plane spanned by vectors `v_1, v_2` that are orthonormal in the
//! mass metric, the sectional curvature of the conformal metric is
//!
//! ```text
//! (h+U)^3 K = 3/4 ((d_1 U)^2 + (d_2 U)^2) - 1/4 ||grad U||^2
//!             - ((h+U)/2) (d_1^2 U + d_2^2 U),
//! ```
//!
//! with `d_a U` the directional derivative along `v_a` and
//! `d_a^2 U = <Hess v_a, v_a>`. The holomorphic sectional curvature in a
//! complex direction `w` (unit in the Hermitian mass product) is
//!
//! ```text
//! (h+U)^3 H = 2 |dU/dw|^2 - ((h+U)/2) (<Hess w, w> + <Hess iw, iw>),
//! ```
//!
//! where `dU/dw` is the holomorphic derivative of `U` along `w`. The two
//! notions differ by the squared holomorphic derivatives of `U` in the
//! directions Hermitian-orthogonal to `w`:
//!
//! ```text
//! H(v) = K(v, iv) + sum_{j >= 2} |dU/dz_j|^2 / (h+U)^3
//! ```
//!
//! over any unitary frame starting at `v/||v||` — an exact identity that
//! the test suite checks with both sides computed through independent
//! code paths. Specializing to `v = q` collapses the right-hand side to
//! the closed form `H(q) = -h alpha^2 U / (2 I (h+U)^3)` plus a multiple
//! of the squared centrality residual, which turns the sectional
//! curvature of the plane `(q, iq)` into a characterization of central
//! configurations; see [`central_by_curvature`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mass_geometry::{
    complex_orthonormal_completion, hermitian_product, mass_inner, max_gram_deviation,
    moment_of_inertia, orthonormalize, Configuration, TangentVector,
};
use crate::potential::{
    checked_conformal_factor, hessian_apply, mass_gradient, potential_value, PotentialLaw,
};
use crate::tolerances::{LOG_IDENTITY_FD_STEP, ORTHONORMAL_GRAM_TOL};

/// A two-dimensional tangent plane with mass-orthonormal legs.
#[derive(Debug, Clone)]
pub struct TangentPlane {
    u: TangentVector,
    v: TangentVector,
}

impl TangentPlane {
    /// Builds a plane from two independent spanning vectors,
    /// orthonormalizing them in the mass metric.
    pub fn new(u: &TangentVector, v: &TangentVector) -> Result<Self> {
        let mut basis = orthonormalize(&[u.clone(), v.clone()])?;
        let v = basis.pop().expect("two vectors in");
        let u = basis.pop().expect("two vectors in");
        Ok(TangentPlane { u, v })
    }

    /// Accepts legs that are already orthonormal in the mass metric,
    /// rejecting them if their Gram matrix deviates from the identity.
    pub fn from_orthonormal(u: TangentVector, v: TangentVector) -> Result<Self> {
        let dev = max_gram_deviation(&[u.clone(), v.clone()])?;
        if dev > ORTHONORMAL_GRAM_TOL {
            return Err(Error::NonOrthonormalBasis { max_deviation: dev });
        }
        Ok(TangentPlane { u, v })
    }

    /// The plane spanned by the configuration itself and its quarter-turn
    /// `(q/||q||, iq/||q||)`: scaling and rigid rotation.
    pub fn radial_rotational(q: &Configuration) -> Result<Self> {
        let t = q.as_tangent();
        let n = t.norm();
        if n == 0.0 {
            return Err(Error::Degenerate("configuration has zero size".into()));
        }
        let u = t.scaled(Complex64::new(1.0 / n, 0.0));
        let v = u.times_i();
        Ok(TangentPlane { u, v })
    }

    /// First orthonormal leg.
    pub fn u(&self) -> &TangentVector {
        &self.u
    }

    /// Second orthonormal leg.
    pub fn v(&self) -> &TangentVector {
        &self.v
    }
}

/// Sectional curvature of the conformal metric on the given plane.
/// Requires `h + U(q) > 0`.
pub fn sectional_curvature(
    q: &Configuration,
    plane: &TangentPlane,
    law: &PotentialLaw,
) -> Result<f64> {
    let f = checked_conformal_factor(q, law)?;
    let grad = mass_gradient(q, law);
    let grad_sq = mass_inner(&grad, &grad)?;
    let d1 = mass_inner(&grad, plane.u())?;
    let d2 = mass_inner(&grad, plane.v())?;
    let s1 = mass_inner(&hessian_apply(q, plane.u(), law)?, plane.u())?;
    let s2 = mass_inner(&hessian_apply(q, plane.v(), law)?, plane.v())?;
    Ok((0.75 * (d1 * d1 + d2 * d2) - 0.25 * grad_sq - 0.5 * f * (s1 + s2)) / (f * f * f))
}

/// Holomorphic sectional curvature in the complex direction `v`
/// (any nonzero vector; normalized internally). Requires `h + U(q) > 0`.
pub fn holomorphic_sectional(
    q: &Configuration,
    v: &TangentVector,
    law: &PotentialLaw,
) -> Result<f64> {
    let f = checked_conformal_factor(q, law)?;
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::Degenerate(
            "holomorphic curvature direction is zero".into(),
        ));
    }
    let w = v.scaled(Complex64::new(1.0 / n, 0.0));
    let grad = mass_gradient(q, law);
    // Holomorphic derivative of U along w: (1/2) conj(<grad U, w>).
    let dw = 0.5 * hermitian_product(&grad, &w)?.conj();
    let s = mass_inner(&hessian_apply(q, &w, law)?, &w)?
        + mass_inner(&hessian_apply(q, &w.times_i(), law)?, &w.times_i())?;
    Ok((2.0 * dw.norm_sqr() - 0.5 * f * s) / (f * f * f))
}

/// Closed form for the holomorphic sectional curvature in the radial
/// direction: `-h alpha^2 U / (2 I (h+U)^3)`. Zero when `h = 0`,
/// positive when `h < 0`. Requires `h + U(q) > 0`.
pub fn closed_form_hqq(q: &Configuration, law: &PotentialLaw) -> Result<f64> {
    let f = checked_conformal_factor(q, law)?;
    let u = potential_value(q, law);
    let i = moment_of_inertia(q);
    let a = law.alpha();
    Ok(-law.energy() * a * a * u / (2.0 * i * f * f * f))
}

/// Outcome of the curvature characterization of centrality.
///
/// The sectional curvature of the radial plane `(q, iq)` differs from the
/// radial closed form by exactly `rho^2 / (4 (h+U)^3)` where `rho` is the
/// mass-metric centrality residual `||grad U - lambda q||`; the
/// configuration is central precisely when that curvature residual
/// vanishes. A curvature tolerance `tol` therefore corresponds to the
/// gradient tolerance `2 sqrt(tol (h+U)^3)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CentralityCheck {
    /// Whether the curvature residual is within tolerance.
    pub is_central: bool,
    /// `|K(q, iq) - closed_form|`.
    pub curvature_residual: f64,
    /// Curvature tolerance the verdict used.
    pub tol: f64,
    /// Directly computed `||grad U - lambda q||` for cross-reference.
    pub gradient_residual: f64,
    /// Gradient tolerance equivalent to `tol`: `2 sqrt(tol (h+U)^3)`.
    pub matched_gradient_tol: f64,
}

/// Decides centrality from curvature alone: compares the sectional
/// curvature of the plane `(q, iq)` with the radial closed form.
pub fn central_by_curvature(
    q: &Configuration,
    law: &PotentialLaw,
    tol: f64,
) -> Result<CentralityCheck> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "curvature tolerance {tol} must be finite and positive"
        )));
    }
    let f = checked_conformal_factor(q, law)?;
    let k = sectional_curvature(q, &TangentPlane::radial_rotational(q)?, law)?;
    let closed = closed_form_hqq(q, law)?;
    let curvature_residual = (k - closed).abs();
    Ok(CentralityCheck {
        is_central: curvature_residual <= tol,
        curvature_residual,
        tol,
        gradient_residual: crate::central_config::central_residual(q, law),
        matched_gradient_tol: 2.0 * (tol * f * f * f).sqrt(),
    })
}

/// Curvature values at one configuration, as printed by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureReport {
    /// Homogeneity exponent of the potential.
    pub alpha: f64,
    /// Energy level `h` of the conformal metric.
    pub energy: f64,
    /// Conformal factor `h + U(q)`; positive whenever a report exists.
    pub conformal_factor: f64,
    /// Sectional curvature of the requested plane.
    pub sectional: f64,
    /// Holomorphic sectional curvature, present for the radial plane.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holomorphic: Option<f64>,
    /// Radial closed form, present for the radial plane.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    /// Centrality verdict, present for the radial plane.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub central_by_curvature: Option<CentralityCheck>,
}

impl CurvatureReport {
    /// Report for the radial plane `(q, iq)`: sectional curvature plus
    /// the holomorphic value, the closed form, and the centrality check
    /// at the given curvature tolerance.
    pub fn radial(q: &Configuration, law: &PotentialLaw, tol: f64) -> Result<Self> {
        let plane = TangentPlane::radial_rotational(q)?;
        let sectional = sectional_curvature(q, &plane, law)?;
        Ok(CurvatureReport {
            alpha: law.alpha(),
            energy: law.energy(),
            conformal_factor: checked_conformal_factor(q, law)?,
            sectional,
            holomorphic: Some(holomorphic_sectional(q, &q.as_tangent(), law)?),
            closed_form: Some(closed_form_hqq(q, law)?),
            central_by_curvature: Some(central_by_curvature(q, law, tol)?),
        })
    }

    /// Report for an arbitrary plane: sectional curvature only.
    pub fn for_plane(q: &Configuration, plane: &TangentPlane, law: &PotentialLaw) -> Result<Self> {
        Ok(CurvatureReport {
            alpha: law.alpha(),
            energy: law.energy(),
            conformal_factor: checked_conformal_factor(q, law)?,
            sectional: sectional_curvature(q, plane, law)?,
            holomorphic: None,
            closed_form: None,
            central_by_curvature: None,
        })
    }
}

/// Curvatures of the four distinguished planes attached to one random
/// direction `v` Hermitian-orthogonal to `q`, plus the four-plane
/// identity residual `|K(q,iq) + K(v,iv) - K(q,v) - K(iq,iv)|`.
#[derive(Debug, Clone)]
pub struct PlaneScanSample {
    /// Coefficients of `v` over the Hermitian-orthonormal completion
    /// basis `b_2, ..., b_N` of `q/||q||`.
    pub coefficients: Vec<Complex64>,
    /// `K(q, v)`.
    pub k_q_v: f64,
    /// `K(iq, iv)`.
    pub k_iq_iv: f64,
    /// `K(v, iv)`.
    pub k_v_iv: f64,
    /// `K(q, iq)` (independent of `v`; repeated for row completeness).
    pub k_q_iq: f64,
    /// `|K(q,iq) + K(v,iv) - K(q,v) - K(iq,iv)|`.
    pub identity_residual: f64,
}

/// Samples random unit directions `v` Hermitian-orthogonal to `q` and
/// evaluates the four plane curvatures for each. Deterministic for a
/// given seed.
pub fn plane_scan(
    q: &Configuration,
    law: &PotentialLaw,
    samples: usize,
    seed: u64,
) -> Result<Vec<PlaneScanSample>> {
    checked_conformal_factor(q, law)?;
    let qt = q.as_tangent();
    let qn = qt.norm();
    let qhat = qt.scaled(Complex64::new(1.0 / qn, 0.0));
    let basis = complex_orthonormal_completion(&qt)?;
    let tail = &basis[1..];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_q_iq = sectional_curvature(
        q,
        &TangentPlane::from_orthonormal(qhat.clone(), qhat.times_i())?,
        law,
    )?;

    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (v, coefficients) = loop {
            let coeffs: Vec<Complex64> = (0..tail.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut v = TangentVector::zeros(std::sync::Arc::clone(q.system()));
            for (c, b) in coeffs.iter().zip(tail) {
                v = v.add(&b.scaled(*c))?;
            }
            let n = v.norm();
            if n > 1e-3 {
                let unit = v.scaled(Complex64::new(1.0 / n, 0.0));
                let normalized: Vec<Complex64> = coeffs.iter().map(|c| c / n).collect();
                break (unit, normalized);
            }
        };
        let iv = v.times_i();
        let k_q_v = sectional_curvature(
            q,
            &TangentPlane::from_orthonormal(qhat.clone(), v.clone())?,
            law,
        )?;
        let k_iq_iv = sectional_curvature(
            q,
            &TangentPlane::from_orthonormal(qhat.times_i(), iv.clone())?,
            law,
        )?;
        let k_v_iv =
            sectional_curvature(q, &TangentPlane::from_orthonormal(v.clone(), iv)?, law)?;
        let identity_residual = (k_q_iq + k_v_iv - k_q_v - k_iq_iv).abs();
        out.push(PlaneScanSample {
            coefficients,
            k_q_v,
            k_iq_iv,
            k_v_iv,
            k_q_iq,
            identity_residual,
        });
    }
    Ok(out)
}

/// A polynomial map `g : C -> C^m`, stored as ascending coefficient lists
/// per component.
#[derive(Debug, Clone)]
pub struct PolynomialMap {
    components: Vec<Vec<Complex64>>,
}

impl PolynomialMap {
    /// Builds a map from per-component coefficient lists (constant term
    /// first). Every component needs at least one finite coefficient.
    pub fn new(components: Vec<Vec<Complex64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("polynomial map has no components".into()));
        }
        for (k, c) in components.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "polynomial component {k} has no coefficients"
                )));
            }
            for z in c {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "polynomial component {k} has coefficient {z}"
                    )));
                }
            }
        }
        Ok(PolynomialMap { components })
    }

    /// Number of components `m`.
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Evaluates all components at `z` by Horner's rule.
    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.components.iter().map(|c| horner(c, z)).collect()
    }

    /// Evaluates all component derivatives at `z`.
    pub fn derivative_eval(&self, z: Complex64) -> Vec<Complex64> {
        self.components
            .iter()
            .map(|c| {
                let d: Vec<Complex64> = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(j, a)| (j as f64) * a)
                    .collect();
                if d.is_empty() {
                    Complex64::new(0.0, 0.0)
                } else {
                    horner(&d, z)
                }
            })
            .collect()
    }

    /// Evaluates `g(z) - g(0)` componentwise without cancellation, by
    /// dropping the constant coefficient before evaluation.
    fn eval_minus_const(&self, z: Complex64) -> Vec<Complex64> {
        self.components
            .iter()
            .map(|c| {
                if c.len() <= 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z * horner(&c[1..], z)
                }
            })
            .collect()
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Checks, at `z = 0`, the identity
///
/// ```text
/// -dd̄ log(c + ||g||^2)
///   = (|<g, g'>|^2 - ||g||^2 ||g'||^2 - c ||g'||^2) / (c + ||g||^2)^2
/// ```
///
/// for each map, computing the left side by a five-point Laplacian
/// (`dd̄ = Laplacian / 4`) and the right side from the explicit
/// derivative. Returns the largest absolute difference.
///
/// Roundoff control: the Laplacian of `log(c + ||g||^2)` is evaluated as
/// `sum log1p((S(p) - S(0)) / S(0)) / step^2` with `S(p) - S(0)` expanded
/// through `|a|^2 - |b|^2 = Re((a-b) conj(a+b))` and `a - b` taken from
/// the constant-free polynomial, so no large-term cancellation occurs and
/// the residual is dominated by the `O(step^2)` truncation error.
pub fn log_conformal_identity_check(maps: &[PolynomialMap], c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "conformal constant {c} must be finite and positive"
        )));
    }
    let step = LOG_IDENTITY_FD_STEP;
    let neighbors = [
        Complex64::new(step, 0.0),
        Complex64::new(-step, 0.0),
        Complex64::new(0.0, step),
        Complex64::new(0.0, -step),
    ];
    let mut worst: f64 = 0.0;
    for map in maps {
        let g0 = map.eval(Complex64::new(0.0, 0.0));
        let gp = map.derivative_eval(Complex64::new(0.0, 0.0));
        let s0 = c + g0.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let inner: Complex64 = g0.iter().zip(&gp).map(|(a, b)| a * b.conj()).sum();
        let g0_sq: f64 = g0.iter().map(|z| z.norm_sqr()).sum();
        let gp_sq: f64 = gp.iter().map(|z| z.norm_sqr()).sum();
        let rhs = (inner.norm_sqr() - g0_sq * gp_sq - c * gp_sq) / (s0 * s0);

        let mut lap = 0.0;
        for p in neighbors {
            let gpnt = map.eval(p);
            let diff = map.eval_minus_const(p);
            let mut ds = 0.0; // S(p) - S(0), cancellation-free
            for ((a, b), d) in gpnt.iter().zip(&g0).zip(&diff) {
                ds += (d * (a + b).conj()).re;
            }
            lap += (ds / s0).ln_1p();
        }
        lap /= step * step;
        let lhs = -0.25 * lap;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdcheck::{fd_sectional_conformal, FdRiemann};
    use crate::fixtures;
    use crate::mass_geometry::MassSystem;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn law(alpha: f64, h: f64) -> PotentialLaw {
        PotentialLaw::new(alpha, h).unwrap()
    }

    /// Independent route for the holomorphic-vs-sectional identity: the
    /// real-formula sectional curvature plus the explicitly summed
    /// squared holomorphic derivatives over a unitary completion of v.
    fn identity_rhs(q: &Configuration, v: &TangentVector, l: &PotentialLaw) -> f64 {
        let f = checked_conformal_factor(q, l).unwrap();
        let n = v.norm();
        let w = v.scaled(Complex64::new(1.0 / n, 0.0));
        let plane = TangentPlane::from_orthonormal(w.clone(), w.times_i()).unwrap();
        let k = sectional_curvature(q, &plane, l).unwrap();
        let basis = complex_orthonormal_completion(&w).unwrap();
        let dz = crate::potential::wirtinger_derivatives(q, &basis, l).unwrap();
        let tail: f64 = dz.iter().skip(1).map(|z| z.norm_sqr()).sum();
        k + tail / (f * f * f)
    }

    #[test]
    fn triangle_radial_curvature_closed_form() {
        // alpha = 3, h = 1/2: U = I = 1, (h+U)^3 = 27/8,
        // K(q, iq) = closed form = -(1/2 * 9 * 1) / (2 * 27/8) = -2/3.
        let q = fixtures::lag();
        let l = law(3.0, 0.5);
        let plane = TangentPlane::radial_rotational(&q).unwrap();
        assert_relative_eq!(
            sectional_curvature(&q, &plane, &l).unwrap(),
            -2.0 / 3.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            closed_form_hqq(&q, &l).unwrap(),
            -2.0 / 3.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            holomorphic_sectional(&q, &q.as_tangent(), &l).unwrap(),
            -2.0 / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_energy_radial_curvature_vanishes_at_central() {
        let q = fixtures::lag();
        for a in [1.0, 2.0, 3.0] {
            let l = law(a, 0.0);
            let plane = TangentPlane::radial_rotational(&q).unwrap();
            assert_abs_diff_eq!(
                sectional_curvature(&q, &plane, &l).unwrap(),
                0.0,
                epsilon = 1e-13
            );
            assert_abs_diff_eq!(closed_form_hqq(&q, &l).unwrap(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn negative_energy_closed_form_is_positive() {
        let q = fixtures::lag();
        assert!(closed_form_hqq(&q, &law(1.0, -1.0)).unwrap() > 0.0);
    }

    #[test]
    fn outside_hill_region_is_an_error() {
        let q = fixtures::lag();
        let l = law(1.0, -5.0); // U = 3 at alpha = 1; h + U = -2
        let plane = TangentPlane::radial_rotational(&q).unwrap();
        assert!(matches!(
            sectional_curvature(&q, &plane, &l),
            Err(Error::OutsideHillRegion { .. })
        ));
    }

    #[test]
    fn centrality_check_on_central_fixtures() {
        for q in [fixtures::pair(), fixtures::lag(), fixtures::eul()] {
            for (a, h) in [(1.0, -0.5), (2.0, 0.3), (3.0, 0.5)] {
                let out = central_by_curvature(&q, &law(a, h), 1e-8).unwrap();
                assert!(out.is_central, "alpha={a} h={h}");
                assert!(out.curvature_residual < 1e-12);
            }
        }
    }

    #[test]
    fn centrality_check_rejects_displaced_vertex() {
        let q = fixtures::lag();
        let mut pos = q.positions().to_vec();
        pos[0] += Complex64::new(0.1, 0.0);
        let q = q.with_positions(pos).unwrap().recentered();
        let l = law(1.0, -1.0);
        let out = central_by_curvature(&q, &l, 1e-8).unwrap();
        assert!(!out.is_central);
        assert!(out.curvature_residual > 1e-8);
        // The curvature residual equals rho^2 / (4 (h+U)^3) exactly.
        let f = checked_conformal_factor(&q, &l).unwrap();
        let rho = out.gradient_residual;
        assert_relative_eq!(
            out.curvature_residual,
            rho * rho / (4.0 * f * f * f),
            max_relative = 1e-9
        );
        // Consistency of the matched tolerances in both directions.
        assert!(rho > out.matched_gradient_tol);
    }

    #[test]
    fn holomorphic_identity_on_fixed_configurations() {
        let sys = MassSystem::shared(vec![1.0, 2.0, 1.5]).unwrap();
        let q = Configuration::new(
            Arc::clone(&sys),
            vec![
                Complex64::new(0.9, 0.1),
                Complex64::new(-0.4, 0.6),
                Complex64::new(-0.1, -0.8),
            ],
        )
        .unwrap();
        let v = TangentVector::new(
            Arc::clone(&sys),
            vec![
                Complex64::new(0.2, -0.7),
                Complex64::new(0.5, 0.3),
                Complex64::new(-0.6, 0.1),
            ],
        )
        .unwrap();
        for (a, h) in [(1.0, 0.0), (2.0, 0.4), (3.0, -0.1)] {
            let l = law(a, h);
            let lhs = holomorphic_sectional(&q, &v, &l).unwrap();
            let rhs = identity_rhs(&q, &v, &l);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn rotation_invariance_of_sectional_curvature() {
        let q = fixtures::eul();
        let l = law(2.0, 0.2);
        let sys = q.system();
        let u = TangentVector::new(
            Arc::clone(sys),
            vec![
                Complex64::new(0.3, 0.1),
                Complex64::new(-0.2, 0.4),
                Complex64::new(0.5, -0.3),
            ],
        )
        .unwrap();
        let v = TangentVector::new(
            Arc::clone(sys),
            vec![
                Complex64::new(-0.1, 0.6),
                Complex64::new(0.4, 0.2),
                Complex64::new(0.2, -0.5),
            ],
        )
        .unwrap();
        let k0 = sectional_curvature(&q, &TangentPlane::new(&u, &v).unwrap(), &l).unwrap();
        let theta = 0.9;
        let r = Complex64::from_polar(1.0, theta);
        let qr = q.rotated(theta).unwrap();
        let kr = sectional_curvature(
            &qr,
            &TangentPlane::new(&u.scaled(r), &v.scaled(r)).unwrap(),
            &l,
        )
        .unwrap();
        assert_abs_diff_eq!(k0, kr, epsilon = 1e-10);
    }

    #[test]
    fn sectional_curvature_matches_fd_riemann_oracle() {
        let sys = MassSystem::shared(vec![1.0, 1.3, 0.8]).unwrap();
        let q = Configuration::new(
            Arc::clone(&sys),
            vec![
                Complex64::new(0.7, -0.2),
                Complex64::new(-0.5, 0.4),
                Complex64::new(0.1, 0.9),
            ],
        )
        .unwrap();
        let l = law(1.0, 0.3);
        let u = TangentVector::new(
            Arc::clone(&sys),
            vec![
                Complex64::new(0.2, 0.5),
                Complex64::new(-0.3, 0.1),
                Complex64::new(0.4, -0.2),
            ],
        )
        .unwrap();
        let v = TangentVector::new(
            Arc::clone(&sys),
            vec![
                Complex64::new(-0.4, 0.2),
                Complex64::new(0.1, -0.6),
                Complex64::new(0.3, 0.3),
            ],
        )
        .unwrap();
        let plane = TangentPlane::new(&u, &v).unwrap();
        let analytic = sectional_curvature(&q, &plane, &l).unwrap();
        let fd =
            fd_sectional_conformal(&q, plane.u(), plane.v(), &l, FdRiemann::default()).unwrap();
        assert_relative_eq!(analytic, fd, max_relative = 1e-4);
    }

    #[test]
    fn plane_scan_is_deterministic_and_satisfies_identity() {
        let q = fixtures::lag();
        let l = law(1.0, 0.0);
        let a = plane_scan(&q, &l, 8, 42).unwrap();
        let b = plane_scan(&q, &l, 8, 42).unwrap();
        assert_eq!(a.len(), 8);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.k_v_iv.to_bits(), y.k_v_iv.to_bits());
            assert_eq!(x.k_q_v.to_bits(), y.k_q_v.to_bits());
        }
        for s in &a {
            assert!(s.identity_residual < 1e-8);
            // h = 0 at a central configuration: the radial plane is flat
            // and every complex line orthogonal to q curves negatively.
            assert_abs_diff_eq!(s.k_q_iq, 0.0, epsilon = 1e-12);
            assert!(s.k_v_iv < 0.0);
            assert!(s.k_q_v.min(s.k_iq_iv) < 0.0);
        }
    }

    #[test]
    fn log_identity_fixtures() {
        let z = PolynomialMap::new(vec![vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]])
        .unwrap();
        let z_and_one = PolynomialMap::new(vec![
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
        ])
        .unwrap();
        let constant = PolynomialMap::new(vec![vec![Complex64::new(0.7, -0.3)]]).unwrap();
        // Truncated exponential e^{kz}: coefficients k^j / j!.
        let k = 1.3;
        let mut coeffs = Vec::new();
        let mut c = 1.0;
        for j in 0..14 {
            coeffs.push(Complex64::new(c, 0.0));
            c *= k / (j + 1) as f64;
        }
        let exp_map = PolynomialMap::new(vec![coeffs]).unwrap();

        let worst =
            log_conformal_identity_check(&[z, z_and_one.clone(), constant, exp_map], 1.0)
                .unwrap();
        assert!(worst < 1e-7, "identity residual {worst}");

        // Spot values at z = 0: g = z gives -1, g = (z, 1) gives -1/2.
        let g0 = z_and_one.eval(Complex64::new(0.0, 0.0));
        let gp = z_and_one.derivative_eval(Complex64::new(0.0, 0.0));
        let s0 = 1.0 + g0.iter().map(|w| w.norm_sqr()).sum::<f64>();
        let inner: Complex64 = g0.iter().zip(&gp).map(|(a, b)| a * b.conj()).sum();
        let rhs = (inner.norm_sqr()
            - g0.iter().map(|w| w.norm_sqr()).sum::<f64>()
                * gp.iter().map(|w| w.norm_sqr()).sum::<f64>()
            - gp.iter().map(|w| w.norm_sqr()).sum::<f64>())
            / (s0 * s0);
        assert_relative_eq!(rhs, -0.5, max_relative = 1e-14);
    }

    prop_compose! {
        fn arb_components(n: usize)(raw in prop::collection::vec(-1.5f64..1.5, 2 * n)) -> Vec<Complex64> {
            raw.chunks_exact(2).map(|xy| Complex64::new(xy[0], xy[1])).collect()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_holomorphic_identity(
            pa in arb_components(3),
            va in arb_components(3),
            alpha in prop::sample::select(vec![1.0, 2.0, 3.0]),
        ) {
            let sys = MassSystem::shared(vec![1.0, 1.0, 1.0]).unwrap();
            let q = match Configuration::new(Arc::clone(&sys), pa) {
                Ok(q) => q,
                Err(_) => return Ok(()),
            };
            if q.min_pair_distance() < 0.1 {
                return Ok(());
            }
            let v = TangentVector::new(Arc::clone(&sys), va).unwrap();
            if v.norm() < 1e-3 {
                return Ok(());
            }
            let l = law(alpha, 0.2);
            let lhs = holomorphic_sectional(&q, &v, &l).unwrap();
            let rhs = identity_rhs(&q, &v, &l);
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            prop_assert!((lhs - rhs).abs() < 1e-8 * scale);
        }

        #[test]
        fn prop_closed_form_matches_holomorphic_radial(
            pa in arb_components(4),
            alpha in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
            h in -0.3f64..1.0,
        ) {
            // The radial closed form holds at every configuration, not
            // only central ones.
            let sys = MassSystem::shared(vec![1.0, 0.5, 2.0, 1.0]).unwrap();
            let q = match Configuration::new(Arc::clone(&sys), pa) {
                Ok(q) => q,
                Err(_) => return Ok(()),
            };
            if q.min_pair_distance() < 0.1 {
                return Ok(());
            }
            let l = law(alpha, h);
            if crate::potential::conformal_factor(&q, &l) <= 0.1 {
                return Ok(());
            }
            let a = holomorphic_sectional(&q, &q.as_tangent(), &l).unwrap();
            let b = closed_form_hqq(&q, &l).unwrap();
            let scale = 1.0 + a.abs().max(b.abs());
            prop_assert!((a - b).abs() < 1e-9 * scale);
        }
    }
}
