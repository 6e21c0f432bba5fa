//! Exact calculator for slope stability and Higgs-de Rham flows of nilpotent
//! Higgs bundles on smooth projective curves in characteristic p.
//!
//! All degrees and slopes are exact rationals; no floating point enters any
//! verdict. Bundles are modeled as direct sums of line classes, Higgs fields
//! as degree-lowering arrow diagrams between summands, and flow steps as
//! catalog lookups that only fire when an honest witness (a registered
//! filtration or a named classical rule) is available.

pub mod constructions;
pub mod curve;
pub mod flow;
pub mod frac;
pub mod frobenius;
pub mod higgs;
pub mod oracle;
mod par;
pub mod report;
pub mod scan;
pub mod sheaf;

pub use curve::CurveContext;
pub use higgs::GradedHiggsBundle;
pub use sheaf::{BundleSum, LineClass};
