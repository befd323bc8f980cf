//! The homogeneous pairwise potential, its mass gradient, the action of
//! its Hessian, and directional derivatives against orthonormal frames.
//!
//! For exponent `alpha > 0` the potential is
//!
//! ```text
//! U(q) = (1/alpha) sum_{i<j} m_i m_j / r_ij^alpha,     r_ij = |q_i - q_j|,
//! ```
//!
//! a positive, homogeneous function of degree `-alpha`. The equations of
//! motion are `qddot = grad U(q)` where `grad` is the gradient in the mass
//! metric: the plain Euclidean partial derivatives divided componentwise
//! by the masses. With this sign convention the force is attractive and
//! the conserved energy is `H = |qdot|^2/2 - U`.
//!
//! Homogeneity gives exact identities used as test oracles downstream:
//! `<grad U, q> = -alpha U` (and the Hermitian product is real),
//! `Hess(q) q = -(alpha+1) grad U`, and `Hess(q)(iq) = i grad U`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mass_geometry::{check_same_system, hermitian_product, Configuration, TangentVector};
use crate::tolerances::BASIS_GRAM_TOL;

/// Exponent and energy level of the conformal geometry: the pair
/// `(alpha, h)` that fixes both the dynamics and the metric `(h + U) <.,.>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialLaw {
    alpha: f64,
    energy: f64,
}

impl PotentialLaw {
    /// A law with the given exponent (finite, strictly positive) and
    /// energy level.
    pub fn new(alpha: f64, energy: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidAlpha {
                alpha,
                reason: "exponent must be finite and strictly positive".into(),
            });
        }
        if !energy.is_finite() {
            return Err(Error::InvalidInput(format!("energy {energy} is not finite")));
        }
        Ok(PotentialLaw { alpha, energy })
    }

    /// Homogeneity exponent of the potential.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Energy level `h` of the conformal metric.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Same exponent at a different energy level.
    pub fn with_energy(&self, energy: f64) -> Result<Self> {
        PotentialLaw::new(self.alpha, energy)
    }
}

/// Potential on raw complex positions. Hot-loop kernel shared by the
/// safe wrappers and the integrators.
pub(crate) fn potential_raw(masses: &[f64], positions: &[Complex64], alpha: f64) -> f64 {
    let mut u = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let r2 = (positions[i] - positions[j]).norm_sqr();
            u += masses[i] * masses[j] * r2.powf(-0.5 * alpha);
        }
    }
    u / alpha
}

/// Mass gradient on raw complex positions:
/// `(grad U)_i = -sum_{j != i} m_j (q_i - q_j) / r_ij^{alpha+2}`.
pub(crate) fn gradient_raw(
    masses: &[f64],
    positions: &[Complex64],
    alpha: f64,
    out: &mut [Complex64],
) {
    for g in out.iter_mut() {
        *g = Complex64::new(0.0, 0.0);
    }
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = positions[i] - positions[j];
            let w = d.norm_sqr().powf(-0.5 * (alpha + 2.0));
            // Pair term is antisymmetric; each side weighted by the other mass.
            out[i] -= masses[j] * w * d;
            out[j] += masses[i] * w * d;
        }
    }
}

/// Hessian action on raw complex vectors:
/// `(Hess v)_i = -sum_{j != i} m_j [ w_ij / r^{alpha+2}
///               - (alpha+2) d_ij Re(conj(d_ij) w_ij) / r^{alpha+4} ]`
/// with `d_ij = q_i - q_j`, `w_ij = v_i - v_j`.
pub(crate) fn hessian_apply_raw(
    masses: &[f64],
    positions: &[Complex64],
    v: &[Complex64],
    alpha: f64,
    out: &mut [Complex64],
) {
    for g in out.iter_mut() {
        *g = Complex64::new(0.0, 0.0);
    }
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = positions[i] - positions[j];
            let w = v[i] - v[j];
            let r2 = d.norm_sqr();
            let inv_a2 = r2.powf(-0.5 * (alpha + 2.0));
            let radial = (d.re * w.re + d.im * w.im) / r2;
            let term = inv_a2 * (w - (alpha + 2.0) * radial * d);
            out[i] -= masses[j] * term;
            out[j] += masses[i] * term;
        }
    }
}

/// Potential value at a configuration.
pub fn potential_value(q: &Configuration, law: &PotentialLaw) -> f64 {
    potential_raw(q.system().masses(), q.positions(), law.alpha())
}

/// Mass gradient of the potential at a configuration. The equations of
/// motion read `qddot = mass_gradient(q)`.
pub fn mass_gradient(q: &Configuration, law: &PotentialLaw) -> TangentVector {
    let mut out = vec![Complex64::new(0.0, 0.0); q.n()];
    gradient_raw(q.system().masses(), q.positions(), law.alpha(), &mut out);
    TangentVector::new(std::sync::Arc::clone(q.system()), out)
        .expect("gradient of a finite configuration is finite")
}

/// Action of the mass Hessian of `U` at `q` on a tangent vector.
pub fn hessian_apply(
    q: &Configuration,
    v: &TangentVector,
    law: &PotentialLaw,
) -> Result<TangentVector> {
    check_same_system(q.system(), v.system())?;
    let mut out = vec![Complex64::new(0.0, 0.0); q.n()];
    hessian_apply_raw(
        q.system().masses(),
        q.positions(),
        v.components(),
        law.alpha(),
        &mut out,
    );
    TangentVector::new(std::sync::Arc::clone(q.system()), out)
}

/// First directional derivative `<grad U, v>` in the real mass metric.
pub fn directional_derivative(
    q: &Configuration,
    v: &TangentVector,
    law: &PotentialLaw,
) -> Result<f64> {
    Ok(hermitian_product(&mass_gradient(q, law), v)?.re)
}

/// Second directional derivative `<Hess(q) v, v>` in the real mass metric.
pub fn second_directional(
    q: &Configuration,
    v: &TangentVector,
    law: &PotentialLaw,
) -> Result<f64> {
    let hv = hessian_apply(q, v, law)?;
    Ok(hermitian_product(&hv, v)?.re)
}

/// Holomorphic directional derivatives of `U` along a complex-orthonormal
/// frame: entry `j` is `(1/2)(<grad U, v_j> - i <grad U, i v_j>)`, i.e.
/// the derivative of `U` in the complex coordinate attached to `v_j`.
/// The frame must be orthonormal in the Hermitian mass product.
pub fn wirtinger_derivatives(
    q: &Configuration,
    frame: &[TangentVector],
    law: &PotentialLaw,
) -> Result<Vec<Complex64>> {
    let mut worst: f64 = 0.0;
    for i in 0..frame.len() {
        check_same_system(q.system(), frame[i].system())?;
        for j in 0..frame.len() {
            let g = hermitian_product(&frame[i], &frame[j])?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - Complex64::new(target, 0.0)).norm());
        }
    }
    if worst > BASIS_GRAM_TOL {
        return Err(Error::NonOrthonormalBasis {
            max_deviation: worst,
        });
    }
    let grad = mass_gradient(q, law);
    frame
        .iter()
        .map(|v| Ok(0.5 * hermitian_product(&grad, v)?.conj()))
        .collect()
}

/// Conformal factor `h + U(q)` of the energy metric, without the domain
/// check.
pub fn conformal_factor(q: &Configuration, law: &PotentialLaw) -> f64 {
    law.energy() + potential_value(q, law)
}

/// Conformal factor with the domain check: errors when `h + U <= 0`,
/// i.e. when `q` lies outside the region where the energy metric is
/// positive.
pub fn checked_conformal_factor(q: &Configuration, law: &PotentialLaw) -> Result<f64> {
    let f = conformal_factor(q, law);
    if f <= 0.0 || !f.is_finite() {
        return Err(Error::OutsideHillRegion { conformal: f });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mass_geometry::{
        complex_orthonormal_completion, mass_inner, moment_of_inertia, MassSystem, TangentVector,
    };
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn law(alpha: f64) -> PotentialLaw {
        PotentialLaw::new(alpha, 0.0).unwrap()
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(PotentialLaw::new(0.0, 0.0).is_err());
        assert!(PotentialLaw::new(-1.0, 0.0).is_err());
        assert!(PotentialLaw::new(f64::NAN, 0.0).is_err());
        assert!(PotentialLaw::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn pair_potential_value() {
        // Separation 1: U = (1/alpha) * 1 for all alpha.
        for a in [0.5, 1.0, 2.0, 3.0] {
            assert_relative_eq!(
                potential_value(&fixtures::pair(), &law(a)),
                1.0 / a,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn triangle_potential_value() {
        // Unit sides: U = 3/alpha.
        for a in [0.5, 1.0, 2.0, 3.0] {
            assert_relative_eq!(
                potential_value(&fixtures::lag(), &law(a)),
                3.0 / a,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn pair_gradient_closed_form() {
        // Bodies at +-1/2 on the x axis, r = 1: the first body is pulled
        // in -x with (grad U)_1 = -(q_1 - q_2) = (-1, 0).
        let q = fixtures::pair();
        let g = mass_gradient(&q, &law(1.0));
        assert_abs_diff_eq!(g.components()[0].re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.components()[0].im, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.components()[1].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn euler_identity_and_rotational_invariance() {
        // <grad U, q> = -alpha U as a real number; <grad U, iq> = 0.
        for a in [0.5, 1.0, 2.0, 3.0] {
            for q in [fixtures::lag(), fixtures::eul()] {
                let l = law(a);
                let u = potential_value(&q, &l);
                let grad = mass_gradient(&q, &l);
                let radial = hermitian_product(&grad, &q.as_tangent()).unwrap();
                assert_relative_eq!(radial.re, -a * u, max_relative = 1e-13);
                assert_abs_diff_eq!(radial.im, 0.0, epsilon = 1e-13 * u);
            }
        }
    }

    #[test]
    fn hessian_homogeneity_identities() {
        // Hess(q) q = -(alpha+1) grad U and Hess(q)(iq) = i grad U.
        let q = fixtures::lag();
        for a in [0.5, 1.0, 2.0, 3.0] {
            let l = law(a);
            let grad = mass_gradient(&q, &l);
            let hq = hessian_apply(&q, &q.as_tangent(), &l).unwrap();
            let hiq = hessian_apply(&q, &q.as_tangent().times_i(), &l).unwrap();
            let igrad = grad.times_i();
            for k in 0..q.n() {
                let want = -(a + 1.0) * grad.components()[k];
                assert_abs_diff_eq!(hq.components()[k].re, want.re, epsilon = 1e-12);
                assert_abs_diff_eq!(hq.components()[k].im, want.im, epsilon = 1e-12);
                assert_abs_diff_eq!(
                    hiq.components()[k].re,
                    igrad.components()[k].re,
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(
                    hiq.components()[k].im,
                    igrad.components()[k].im,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn hessian_annihilates_translations() {
        let q = fixtures::lag();
        let ones = TangentVector::uniform(Arc::clone(q.system()), Complex64::new(1.0, 1.0));
        let h = hessian_apply(&q, &ones, &law(2.0)).unwrap();
        for z in h.components() {
            assert_abs_diff_eq!(z.norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn wirtinger_radial_entry_closed_form() {
        // At any q with v_1 = q/||q||: dU/dz_1 = -alpha U / (2 ||q||).
        let q = fixtures::lag();
        for a in [1.0, 2.0, 3.0] {
            let l = law(a);
            let u = potential_value(&q, &l);
            let norm = moment_of_inertia(&q).sqrt();
            let basis = complex_orthonormal_completion(&q.as_tangent()).unwrap();
            let dz = wirtinger_derivatives(&q, &basis, &l).unwrap();
            assert_relative_eq!(dz[0].re, -a * u / (2.0 * norm), max_relative = 1e-12);
            assert_abs_diff_eq!(dz[0].im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn wirtinger_rejects_skewed_frame() {
        let q = fixtures::lag();
        let t = q.as_tangent();
        let skew = t.scaled(Complex64::new(1.1, 0.0));
        assert!(matches!(
            wirtinger_derivatives(&q, &[skew], &law(1.0)),
            Err(Error::NonOrthonormalBasis { .. })
        ));
    }

    #[test]
    fn gradient_norm_splits_over_unitary_frame() {
        // sum_j |dU/dz_j|^2 = ||grad U||^2 / 4 for any unitary frame.
        let q = fixtures::eul();
        let l = law(3.0);
        let basis = complex_orthonormal_completion(&q.as_tangent()).unwrap();
        let dz = wirtinger_derivatives(&q, &basis, &l).unwrap();
        let sum: f64 = dz.iter().map(|z| z.norm_sqr()).sum();
        let g = mass_gradient(&q, &l);
        assert_relative_eq!(sum, 0.25 * mass_inner(&g, &g).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn hill_region_check() {
        let q = fixtures::pair();
        let inside = PotentialLaw::new(1.0, 0.0).unwrap();
        assert!(checked_conformal_factor(&q, &inside).is_ok());
        // U = 1 at alpha = 1; h = -2 puts the configuration outside.
        let outside = PotentialLaw::new(1.0, -2.0).unwrap();
        assert!(matches!(
            checked_conformal_factor(&q, &outside),
            Err(Error::OutsideHillRegion { .. })
        ));
    }

    prop_compose! {
        fn arb_planar(n: usize)(raw in prop::collection::vec(-2.0f64..2.0, 2 * n)) -> Vec<Complex64> {
            raw.chunks_exact(2).map(|xy| Complex64::new(xy[0], xy[1])).collect()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn prop_euler_identity_random_configurations(
            raw in arb_planar(4),
            alpha in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
        ) {
            let sys = MassSystem::shared(vec![1.0, 2.0, 0.5, 1.5]).unwrap();
            let q = match crate::mass_geometry::Configuration::new(Arc::clone(&sys), raw) {
                Ok(q) => q,
                Err(_) => return Ok(()),
            };
            if q.min_pair_distance() < 1e-2 {
                return Ok(()); // keep the scale sane for the tolerance below
            }
            let l = law(alpha);
            let u = potential_value(&q, &l);
            let grad = mass_gradient(&q, &l);
            let p = hermitian_product(&grad, &q.as_tangent()).unwrap();
            prop_assert!((p.re + alpha * u).abs() < 1e-9 * (1.0 + u) * (1.0 + alpha));
            prop_assert!(p.im.abs() < 1e-9 * (1.0 + u) * (1.0 + alpha));
        }

        #[test]
        fn prop_homogeneity_of_value_and_gradient(
            raw in arb_planar(3),
            s in 0.5f64..2.0,
            alpha in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
        ) {
            let sys = MassSystem::shared(vec![1.0, 1.0, 1.0]).unwrap();
            let q = match crate::mass_geometry::Configuration::new(Arc::clone(&sys), raw) {
                Ok(q) => q,
                Err(_) => return Ok(()),
            };
            if q.min_pair_distance() < 1e-2 {
                return Ok(());
            }
            let l = law(alpha);
            let qs = q.scaled(s).unwrap();
            // U(s q) = s^{-alpha} U(q); grad U(s q) = s^{-alpha-1} grad U(q).
            let u = potential_value(&q, &l);
            let us = potential_value(&qs, &l);
            prop_assert!((us - s.powf(-alpha) * u).abs() < 1e-9 * (1.0 + us.abs()));
            let g = mass_gradient(&q, &l);
            let gs = mass_gradient(&qs, &l);
            let scale = s.powf(-alpha - 1.0);
            for k in 0..3 {
                let want = scale * g.components()[k];
                let got = gs.components()[k];
                prop_assert!((want - got).norm() < 1e-8 * (1.0 + want.norm()));
            }
        }

        #[test]
        fn prop_hessian_is_symmetric(
            raw in arb_planar(3),
            va in arb_planar(3),
            wa in arb_planar(3),
        ) {
            let sys = MassSystem::shared(vec![1.0, 2.0, 3.0]).unwrap();
            let q = match crate::mass_geometry::Configuration::new(Arc::clone(&sys), raw) {
                Ok(q) => q,
                Err(_) => return Ok(()),
            };
            if q.min_pair_distance() < 1e-2 {
                return Ok(());
            }
            let l = law(2.0);
            let v = TangentVector::new(Arc::clone(&sys), va).unwrap();
            let w = TangentVector::new(Arc::clone(&sys), wa).unwrap();
            let hv = hessian_apply(&q, &v, &l).unwrap();
            let hw = hessian_apply(&q, &w, &l).unwrap();
            let a = mass_inner(&hv, &w).unwrap();
            let b = mass_inner(&v, &hw).unwrap();
            let scale = 1.0 + a.abs().max(b.abs());
            prop_assert!((a - b).abs() < 1e-8 * scale);
        }
    }
}
