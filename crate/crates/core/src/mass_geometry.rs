//! Mass-weighted inner products and conserved-quantity functionals on the
//! planar configuration space of N point masses.
//!
//! A configuration or tangent vector is a complex vector with one
//! coordinate per body: the real part is the x coordinate, the imaginary
//! part the y coordinate. All pairings carry the masses:
//!
//! ```text
//! <u, v> = sum_k m_k u_k conj(v_k)
//! ```
//!
//! The real part of this Hermitian product is the kinetic-energy metric,
//! the imaginary part the canonical symplectic pairing. Whenever vectors
//! cross into real-matrix computations they use the fixed interleaved
//! layout `(x_1, y_1, ..., x_N, y_N)`; [`Configuration::to_real`] and
//! [`TangentVector::to_real`] and their inverses are the only conversion
//! points.
//!
//! All values are immutable after construction and safe to share across
//! threads.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{potential_value, PotentialLaw};
use crate::tolerances::{
    COLLISION_GUARD_FACTOR, ORTHONORMAL_GRAM_TOL, ORTHONORMAL_RANK_TOL,
};

/// The number of bodies and their masses; owner of the mass metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MassSystem {
    masses: Vec<f64>,
    total: f64,
}

impl MassSystem {
    /// Builds a system of at least two strictly positive, finite masses.
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidMasses(format!(
                "need at least 2 bodies, got {}",
                masses.len()
            )));
        }
        for (k, &m) in masses.iter().enumerate() {
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::InvalidMasses(format!(
                    "mass {k} is {m}; masses must be finite and strictly positive"
                )));
            }
        }
        let total = masses.iter().sum();
        Ok(MassSystem { masses, total })
    }

    /// Convenience constructor wrapping the system for shared ownership.
    pub fn shared(masses: Vec<f64>) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(masses)?))
    }

    /// Number of bodies.
    pub fn n(&self) -> usize {
        self.masses.len()
    }

    /// Individual masses, in body order.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Total mass.
    pub fn total_mass(&self) -> f64 {
        self.total
    }
}

/// Errors unless `a` and `b` describe the same mass system. Pointer
/// identity is the fast path; value equality is accepted so that
/// deserialized twins interoperate.
pub fn check_same_system(a: &Arc<MassSystem>, b: &Arc<MassSystem>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::SystemMismatch)
    }
}

fn check_finite(components: &[Complex64], what: &str) -> Result<()> {
    for (k, z) in components.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite(format!("{what} component {k} is {z}")));
        }
    }
    Ok(())
}

/// Positions of all bodies; collision-free by construction.
#[derive(Debug, Clone)]
pub struct Configuration {
    system: Arc<MassSystem>,
    positions: Vec<Complex64>,
}

impl Configuration {
    /// Validates finiteness and the collision guard: the minimum pairwise
    /// distance must exceed [`COLLISION_GUARD_FACTOR`] times the diameter.
    pub fn new(system: Arc<MassSystem>, positions: Vec<Complex64>) -> Result<Self> {
        if positions.len() != system.n() {
            return Err(Error::DimensionMismatch {
                expected: system.n(),
                got: positions.len(),
            });
        }
        check_finite(&positions, "position")?;
        let (min_d, max_d) = pairwise_extremes(&positions);
        let guard = COLLISION_GUARD_FACTOR * max_d;
        if min_d <= guard {
            return Err(Error::CollisionProximity {
                min_distance: min_d,
                guard,
            });
        }
        Ok(Configuration { system, positions })
    }

    /// The mass system the positions are measured against.
    pub fn system(&self) -> &Arc<MassSystem> {
        &self.system
    }

    /// Number of bodies.
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Complex positions, one per body.
    pub fn positions(&self) -> &[Complex64] {
        &self.positions
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        pairwise_extremes(&self.positions).1
    }

    /// Smallest pairwise distance.
    pub fn min_pair_distance(&self) -> f64 {
        pairwise_extremes(&self.positions).0
    }

    /// Absolute collision guard implied by the current diameter.
    pub fn collision_guard(&self) -> f64 {
        COLLISION_GUARD_FACTOR * self.diameter()
    }

    /// Mass-weighted centroid `sum(m_k q_k) / M`.
    pub fn center_of_mass(&self) -> Complex64 {
        let mut c = Complex64::new(0.0, 0.0);
        for (m, q) in self.system.masses().iter().zip(&self.positions) {
            c += m * q;
        }
        c / self.system.total_mass()
    }

    /// Same shape translated so the center of mass sits at the origin.
    pub fn recentered(&self) -> Configuration {
        let c = self.center_of_mass();
        let positions = self.positions.iter().map(|q| q - c).collect();
        Configuration {
            system: Arc::clone(&self.system),
            positions,
        }
    }

    /// Replaces positions, revalidating the result.
    pub fn with_positions(&self, positions: Vec<Complex64>) -> Result<Configuration> {
        Configuration::new(Arc::clone(&self.system), positions)
    }

    /// Uniformly scaled copy `s * q` (s != 0).
    pub fn scaled(&self, s: f64) -> Result<Configuration> {
        self.with_positions(self.positions.iter().map(|q| s * q).collect())
    }

    /// Rigidly rotated copy `e^{i theta} q`.
    pub fn rotated(&self, theta: f64) -> Result<Configuration> {
        let r = Complex64::from_polar(1.0, theta);
        self.with_positions(self.positions.iter().map(|q| r * q).collect())
    }

    /// The positions viewed as a tangent vector at any base point of the
    /// same system (used for radial and rotational directions).
    pub fn as_tangent(&self) -> TangentVector {
        TangentVector {
            system: Arc::clone(&self.system),
            components: self.positions.clone(),
        }
    }

    /// Interleaved real layout `(x_1, y_1, ..., x_N, y_N)`.
    pub fn to_real(&self) -> Vec<f64> {
        flatten(&self.positions)
    }

    /// Rebuilds a configuration from the interleaved real layout.
    pub fn from_real(system: Arc<MassSystem>, coords: &[f64]) -> Result<Configuration> {
        Configuration::new(system, unflatten(coords)?)
    }

    /// Sorted list of all pairwise distances (shape fingerprint).
    pub fn mutual_distances(&self) -> Vec<f64> {
        let n = self.n();
        let mut d = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                d.push((self.positions[i] - self.positions[j]).norm());
            }
        }
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        d
    }
}

/// A velocity or variation vector over a mass system.
#[derive(Debug, Clone)]
pub struct TangentVector {
    system: Arc<MassSystem>,
    components: Vec<Complex64>,
}

impl TangentVector {
    /// Builds a tangent vector with finite components.
    pub fn new(system: Arc<MassSystem>, components: Vec<Complex64>) -> Result<Self> {
        if components.len() != system.n() {
            return Err(Error::DimensionMismatch {
                expected: system.n(),
                got: components.len(),
            });
        }
        check_finite(&components, "tangent")?;
        Ok(TangentVector { system, components })
    }

    /// The zero vector.
    pub fn zeros(system: Arc<MassSystem>) -> Self {
        let n = system.n();
        TangentVector {
            system,
            components: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// The constant vector `(value, ..., value)`.
    pub fn uniform(system: Arc<MassSystem>, value: Complex64) -> Self {
        let n = system.n();
        TangentVector {
            system,
            components: vec![value; n],
        }
    }

    /// The mass system the components are weighed against.
    pub fn system(&self) -> &Arc<MassSystem> {
        &self.system
    }

    /// Number of bodies.
    pub fn n(&self) -> usize {
        self.components.len()
    }

    /// Complex components, one per body.
    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    /// Componentwise multiplication by the imaginary unit (a quarter-turn
    /// of every body's vector).
    pub fn times_i(&self) -> TangentVector {
        TangentVector {
            system: Arc::clone(&self.system),
            components: self
                .components
                .iter()
                .map(|z| Complex64::new(-z.im, z.re))
                .collect(),
        }
    }

    /// Componentwise complex scaling.
    pub fn scaled(&self, s: Complex64) -> TangentVector {
        TangentVector {
            system: Arc::clone(&self.system),
            components: self.components.iter().map(|z| s * z).collect(),
        }
    }

    /// Componentwise sum.
    pub fn add(&self, other: &TangentVector) -> Result<TangentVector> {
        check_same_system(&self.system, &other.system)?;
        Ok(TangentVector {
            system: Arc::clone(&self.system),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &TangentVector) -> Result<TangentVector> {
        check_same_system(&self.system, &other.system)?;
        Ok(TangentVector {
            system: Arc::clone(&self.system),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Mass norm `sqrt(Re <v, v>)`.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for (m, z) in self.system.masses().iter().zip(&self.components) {
            s += m * z.norm_sqr();
        }
        s.sqrt()
    }

    /// Interleaved real layout `(x_1, y_1, ..., x_N, y_N)`.
    pub fn to_real(&self) -> Vec<f64> {
        flatten(&self.components)
    }

    /// Rebuilds a tangent vector from the interleaved real layout.
    pub fn from_real(system: Arc<MassSystem>, coords: &[f64]) -> Result<TangentVector> {
        TangentVector::new(system, unflatten(coords)?)
    }
}

fn flatten(z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * z.len());
    for c in z {
        out.push(c.re);
        out.push(c.im);
    }
    out
}

fn unflatten(coords: &[f64]) -> Result<Vec<Complex64>> {
    if coords.len() % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "real layout length {} is odd",
            coords.len()
        )));
    }
    Ok(coords
        .chunks_exact(2)
        .map(|xy| Complex64::new(xy[0], xy[1]))
        .collect())
}

fn pairwise_extremes(positions: &[Complex64]) -> (f64, f64) {
    let mut min_d = f64::INFINITY;
    let mut max_d: f64 = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = (positions[i] - positions[j]).norm();
            min_d = min_d.min(d);
            max_d = max_d.max(d);
        }
    }
    (min_d, max_d)
}

/// Mass-weighted Hermitian product `sum_k m_k u_k conj(v_k)`. Its real
/// part is the mass metric, its imaginary part the symplectic pairing.
pub fn hermitian_product(u: &TangentVector, v: &TangentVector) -> Result<Complex64> {
    check_same_system(u.system(), v.system())?;
    let mut s = Complex64::new(0.0, 0.0);
    for ((m, a), b) in u
        .system()
        .masses()
        .iter()
        .zip(u.components())
        .zip(v.components())
    {
        s += m * a * b.conj();
    }
    Ok(s)
}

/// Real mass metric `Re <u, v>`.
pub fn mass_inner(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    Ok(hermitian_product(u, v)?.re)
}

/// Symplectic pairing `Im <u, v>`.
pub fn symplectic_form(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    Ok(hermitian_product(u, v)?.im)
}

/// Mass norm of a tangent vector.
pub fn mass_norm(v: &TangentVector) -> f64 {
    v.norm()
}

/// Moment of inertia `I = <q, q> = sum m_k |q_k|^2`: the total squared
/// size of the configuration.
pub fn moment_of_inertia(q: &Configuration) -> f64 {
    let mut s = 0.0;
    for (m, z) in q.system().masses().iter().zip(q.positions()) {
        s += m * z.norm_sqr();
    }
    s
}

/// Moment of inertia via mutual distances,
/// `(1/M) sum_{i<j} m_i m_j r_ij^2`. Agrees with [`moment_of_inertia`]
/// exactly when the center of mass is at the origin.
pub fn moment_of_inertia_pairwise(q: &Configuration) -> f64 {
    let masses = q.system().masses();
    let pos = q.positions();
    let mut s = 0.0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            s += masses[i] * masses[j] * (pos[i] - pos[j]).norm_sqr();
        }
    }
    s / q.system().total_mass()
}

/// Mass-weighted center of mass.
pub fn center_of_mass(q: &Configuration) -> Complex64 {
    q.center_of_mass()
}

/// The classical first integrals at a phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedQuantities {
    /// Total energy `H = |qdot|^2 / 2 - U(q)`.
    pub energy: f64,
    /// Complex linear momentum `sum m_k qdot_k`.
    pub linear_momentum: Complex64,
    /// Angular momentum `Re <qdot, i q>`.
    pub angular_momentum: f64,
}

/// Evaluates energy, linear momentum, and angular momentum at `(q, qdot)`
/// under the given potential law.
pub fn conserved_quantities(
    q: &Configuration,
    qdot: &TangentVector,
    law: &PotentialLaw,
) -> Result<ConservedQuantities> {
    check_same_system(q.system(), qdot.system())?;
    let kinetic = 0.5 * qdot.norm().powi(2);
    let u = potential_value(q, law);
    let mut p = Complex64::new(0.0, 0.0);
    for (m, v) in q.system().masses().iter().zip(qdot.components()) {
        p += m * v;
    }
    let c = mass_inner(qdot, &q.as_tangent().times_i())?;
    Ok(ConservedQuantities {
        energy: kinetic - u,
        linear_momentum: p,
        angular_momentum: c,
    })
}

/// Gram-Schmidt in the real mass metric, with a second pass for numerical
/// reorthogonalization. The output spans the same real subspace, has unit
/// mass norms, and pairwise real inner products at rounding level.
pub fn orthonormalize(vectors: &[TangentVector]) -> Result<Vec<TangentVector>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let system = vectors[0].system();
    for v in vectors.iter().skip(1) {
        check_same_system(system, v.system())?;
    }
    let mut out: Vec<TangentVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original_norm = v.norm();
        if original_norm == 0.0 {
            return Err(Error::Degenerate("zero vector in orthonormalize input".into()));
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for b in &out {
                let c = mass_inner(&w, b)?;
                w = w.sub(&b.scaled(Complex64::new(c, 0.0)))?;
            }
        }
        let n = w.norm();
        if n <= ORTHONORMAL_RANK_TOL * original_norm {
            return Err(Error::Degenerate(format!(
                "rank deficiency: vector reduced to {:.3e} of its norm by projection",
                n / original_norm
            )));
        }
        out.push(w.scaled(Complex64::new(1.0 / n, 0.0)));
    }
    debug_assert!(max_gram_deviation(&out).unwrap_or(f64::INFINITY) < ORTHONORMAL_GRAM_TOL);
    Ok(out)
}

/// Largest deviation of the real Gram matrix from the identity.
pub fn max_gram_deviation(vectors: &[TangentVector]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..vectors.len() {
        for j in 0..vectors.len() {
            let g = mass_inner(&vectors[i], &vectors[j])?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    Ok(worst)
}

/// Completes `first` to a complex-orthonormal basis of the whole space in
/// the Hermitian mass product: the returned list starts with
/// `first / ||first||` and has `<b_i, b_j> = delta_ij` as complex numbers.
pub fn complex_orthonormal_completion(first: &TangentVector) -> Result<Vec<TangentVector>> {
    let n = first.n();
    let norm = first.norm();
    if norm == 0.0 {
        return Err(Error::Degenerate("cannot complete the zero vector".into()));
    }
    let mut basis = vec![first.scaled(Complex64::new(1.0 / norm, 0.0))];
    let system = first.system();
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[k] = Complex64::new(1.0, 0.0);
        let mut w = TangentVector::new(Arc::clone(system), e)?;
        let original = w.norm();
        for _pass in 0..2 {
            for b in &basis {
                let c = hermitian_product(&w, b)?;
                w = w.sub(&b.scaled(c))?;
            }
        }
        let wn = w.norm();
        if wn > 1e-8 * original {
            basis.push(w.scaled(Complex64::new(1.0 / wn, 0.0)));
        }
    }
    if basis.len() != n {
        return Err(Error::Degenerate(
            "complex completion failed to reach full dimension".into(),
        ));
    }
    Ok(basis)
}
