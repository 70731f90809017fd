//! Numerical substrate: flat forms, charts, jets, automatic differentiation
//! and small dense eigenproblems.

pub mod chart;
pub mod dual;
pub mod jet;
pub mod linalg;
pub mod signature;

pub use chart::{Chart, Predicate};
pub use dual::{analytic_maps, jet_from_duals, AnalyticMap, Dual, HyperDual, JetMap, Real};
pub use jet::{jet2_of, Jet2, ScalarMap, VecMap};
pub use linalg::{generalized_shape_eigen, shape_eigen, sym_eigen, ShapeEigen, SymEigen};
pub use signature::{bilinear, Signature};
