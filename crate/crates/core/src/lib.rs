//! Heat kernel bounds on weighted rotationally symmetric model manifolds.
//!
//! The crate covers the geometry of radial models (volumes, capacities,
//! harmonic weights), lower isoperimetric and Faber-Krahn functions, the
//! resulting on-diagonal heat kernel bounds, and a finite-difference solver
//! for the radial heat equation that serves as a numerical oracle.

pub mod error;
pub mod geometry;
pub mod htransform;
pub mod isoperimetry;
pub mod model;
pub mod monotone;
pub mod pipeline;
pub mod profile;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{Side, Weight, WeightedModel};
pub use profile::{Domain, RadialProfile};

/// Shortest round-trip decimal form of a real, used in rendered configs.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Seventeen significant digits, the CSV number format.
pub fn fmt_csv(x: f64) -> String {
    format!("{x:.16e}")
}
