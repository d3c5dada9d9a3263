//! Error types shared across the crate.

use thiserror::Error;

/// A single violation found while validating a fan.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum FanViolation {
    /// A ray whose coordinate gcd is not 1.
    NonPrimitiveRay { ray: usize },
    /// The zero vector listed as a ray.
    ZeroRay { ray: usize },
    /// Two listed rays are equal.
    DuplicateRay { first: usize, second: usize },
    /// A ray with the wrong number of coordinates.
    RayDimensionMismatch { ray: usize, expected: usize, got: usize },
    /// A cone referring to a ray index that does not exist.
    RayIndexOutOfRange { cone: usize, index: usize },
    /// A cone listing the same ray twice.
    RepeatedRayInCone { cone: usize },
    /// A cone whose ray generators are linearly dependent.
    NonSimplicialCone { cone: usize },
    /// Two cones whose intersection is not a common face.
    BadConeIntersection { first: usize, second: usize },
    /// An empty maximal cone.
    EmptyCone { cone: usize },
}

impl std::fmt::Display for FanViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FanViolation::NonPrimitiveRay { ray } => write!(f, "ray {ray} is not primitive"),
            FanViolation::ZeroRay { ray } => write!(f, "ray {ray} is the zero vector"),
            FanViolation::DuplicateRay { first, second } => {
                write!(f, "rays {first} and {second} coincide")
            }
            FanViolation::RayDimensionMismatch { ray, expected, got } => {
                write!(f, "ray {ray} has {got} coordinates, expected {expected}")
            }
            FanViolation::RayIndexOutOfRange { cone, index } => {
                write!(f, "cone {cone} refers to missing ray {index}")
            }
            FanViolation::RepeatedRayInCone { cone } => {
                write!(f, "cone {cone} lists a ray twice")
            }
            FanViolation::NonSimplicialCone { cone } => {
                write!(f, "cone {cone} is not simplicial")
            }
            FanViolation::BadConeIntersection { first, second } => {
                write!(f, "cones {first} and {second} do not meet in a common face")
            }
            FanViolation::EmptyCone { cone } => write!(f, "cone {cone} is empty"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid fan: {}", format_violations(.0))]
    InvalidFan(Vec<FanViolation>),

    #[error("rays do not span the ambient lattice; split the torus factor first (cox::split_torus_factor)")]
    TorusFactor,

    #[error("rays span the whole lattice; there is no torus factor to split")]
    NoTorusFactor,

    #[error("cone {0:?} is not a cone of the fan")]
    ConeNotInFan(Vec<usize>),

    #[error("polyhedron is unbounded; lattice-point enumeration requires a bounded polyhedron")]
    UnboundedPolyhedron,

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("divisor is not Cartier: {0}")]
    NotCartier(String),

    #[error("divisor is not ample")]
    NotAmple,

    #[error("divisor is not very ample")]
    NotVeryAmple,

    #[error("divisors do not generate every local class group: first failure at cone {0:?}")]
    GenerationFails(Vec<usize>),

    #[error("no ample divisor found within the search budget; the fan may not be projective")]
    NoAmpleDivisor,

    #[error("mismatched polynomial rings: {0}")]
    MismatchedRings(String),

    #[error("lattice point {0:?} lies outside the divisor polytope")]
    PointOutsidePolytope(Vec<i64>),

    #[error("Groebner computation exceeded its step budget ({steps} reductions)")]
    Resource { steps: u64 },

    #[error("section search failed after {attempts} attempts: {last_failure}")]
    SearchFailure { attempts: u64, last_failure: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sampling field q={q} rejected: {reason}")]
    BadSampleField { q: u64, reason: String },
}

fn format_violations(violations: &[FanViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
