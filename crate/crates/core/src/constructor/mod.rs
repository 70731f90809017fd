//! Marginally trapped lifts of hypersurfaces into the five Lorentzian ambients.

pub mod ambient;
pub mod lift;
pub mod null;
pub mod palmer;
pub mod polynomial;
pub mod thread;

pub use ambient::{AmbientKind, LorentzAmbient};
pub use lift::{
    explicit_lift, lift_antidesitter, lift_desitter, lift_from_rule, lift_hyperbolic_product, lift_minkowski,
    lift_point, lift_sphere_product, HeightRule, LiftPoint, LiftSource, LiftedImmersion, NullLiftData, ParamFn,
    Provenance, Route,
};
pub use null::{canonical_slice, null_lift, null_projection};
pub use palmer::{lift_palmer, lift_palmer_via_surface, support_surface, ScalarField, SphericalDerivatives, SupportFunction};
pub use polynomial::{
    acot, acoth, curvature_counts, curvature_polynomial, is_degenerate_root, hyperbolic_product_closed_form, minkowski_closed_form,
    solve_roots, sphere_product_closed_form, CurvaturePolynomial, PolyFamily, Root, RootSet,
};
pub use thread::{check_constraints, construct_lifts, thread_roots, Construction, RootThreads};
