//! Complex polynomials and root finding, the Wronskian, Mobius and Cayley
//! transport between the line and circle models, normalization to the cube
//! roots, and the realness test for 2-planes of polynomials.

mod mobius;
mod plane;
mod poly;
mod rational;
mod roots;

use serde::{Deserialize, Serialize};

pub use mobius::{circle_reflect, cube_roots, HPoint, Mobius};
pub use plane::{Plane2, D1_TOL};
pub use poly::{wronskian, Poly, COEFF_EPS};
pub use rational::{
    cayley_transport, is_rstar, normalize_to_rstar, rstar_defects, Normalized, Rational,
};
pub use roots::{poly_roots, root_multiplicities, CLUSTER_RADIUS};

/// Numerical tolerances shared by the solver and the tracer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    /// Relative Wronskian residual at the prescribed points.
    pub residual: f64,
    /// Minimum Plucker distance between distinct planes.
    pub plucker_separation: f64,
    /// Singular-value ratio for the realness test.
    pub realness: f64,
    /// Matching of computed and prescribed critical points.
    pub critical_match: f64,
    /// Minimum separation of the prescribed critical points.
    pub point_separation: f64,
    /// Tolerance for the labeling constraints.
    pub labeling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            plucker_separation: 1e-6,
            realness: 1e-8,
            critical_match: 1e-8,
            point_separation: 1e-6,
            labeling: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        let all = [
            self.residual,
            self.plucker_separation,
            self.realness,
            self.critical_match,
            self.point_separation,
            self.labeling,
        ];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(crate::Error::InvalidProblem("tolerances must be positive".into()))
        }
    }
}
