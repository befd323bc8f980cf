//! Small reference configurations used across unit and integration tests
//! and as CLI defaults. All fixtures use unit masses, are centered at the
//! origin, and are normalized to moment of inertia values that make
//! hand-checked quantities exact.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::mass_geometry::{Configuration, MassSystem};

/// Two unit masses at `(+1/2, 0)` and `(-1/2, 0)`: separation 1, moment of
/// inertia 1/2, potential `1/alpha`.
pub fn pair() -> Configuration {
    let sys = MassSystem::shared(vec![1.0, 1.0]).expect("static masses");
    Configuration::new(
        sys,
        vec![Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)],
    )
    .expect("static positions")
}

/// Equilateral triangle of three unit masses on the circle of radius
/// `1/sqrt(3)`, first vertex on the positive real axis: side length 1,
/// moment of inertia 1, potential `3/alpha`. Central for every exponent.
pub fn lag() -> Configuration {
    let sys = MassSystem::shared(vec![1.0, 1.0, 1.0]).expect("static masses");
    let r = 1.0 / 3.0_f64.sqrt();
    let positions = (0..3)
        .map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / 3.0))
        .collect();
    Configuration::new(sys, positions).expect("static positions")
}

/// Three collinear unit masses at `(-d, 0, +d)` with `d = 1/sqrt(2)`:
/// moment of inertia 1. Central for every exponent by symmetry.
pub fn eul() -> Configuration {
    let sys = MassSystem::shared(vec![1.0, 1.0, 1.0]).expect("static masses");
    let d = 1.0 / 2.0_f64.sqrt();
    Configuration::new(
        sys,
        vec![
            Complex64::new(-d, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(d, 0.0),
        ],
    )
    .expect("static positions")
}

/// Regular n-gon of unit masses on a circle of the given radius, first
/// vertex on the positive real axis. Central for every exponent.
pub fn regular_polygon(n: usize, radius: f64) -> Configuration {
    let sys = MassSystem::shared(vec![1.0; n]).expect("polygon masses");
    let positions = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64))
        .collect();
    Configuration::new(sys, positions).expect("polygon positions")
}
