//! Pointwise curvature toolkit for contact metric structures whose
//! characteristic vector field lies in a (kappa, mu)-nullity
//! distribution, together with checkers for the sharp lower bounds the
//! scalar curvature places on sectional curvature along submanifolds.
//!
//! The crate works at a single point: structures are given by the
//! tensors (phi, xi, h) in g-orthonormal coordinates, submanifolds by
//! an adapted tangent/normal frame plus second fundamental form
//! coefficients. Everything is plain dense linear algebra over f64.

pub mod algebra;
pub mod contact;
pub mod curvature;
pub mod error;
pub mod generators;
pub mod invariants;
pub mod submanifold;
pub mod theorems;

pub use algebra::{complete_basis, orthonormalize, restrict_to_plane, Frame, PlaneSection};
pub use contact::{validate_structure, KMuStructure, ResidualEntry, ValidationReport};
pub use curvature::CurvatureEngine;
pub use error::{KmuError, Result};
pub use generators::{
    adapted_frame, equality_sigma, invariant_submanifold, random_submanifold,
    search_contact_equality, umbilical_sigma, EqualityCandidate, EqualityParams, ShapeVariant,
};
pub use invariants::{
    brute_force_min_sectional, delta, min_sectional, plane_curvature_gradient, scalar_curvature,
    sectional_curvature, BruteForceOutcome, DeltaOptions, DeltaResult, Domain, MinSectional,
};
pub use submanifold::{InducedTensor, SigmaMode, SubmanifoldPoint};
pub use theorems::{
    chen_lemma, check_basic_equality, check_corollary1, check_invariant_delta_bound,
    check_invariant_properties, check_invariant_tau_bound, check_theorem1, check_theorem2,
    check_umbilical, classify_shape_operators, fundamental_identity, InequalityReport,
    ShapeFormDiagnosis, Tolerances,
};
