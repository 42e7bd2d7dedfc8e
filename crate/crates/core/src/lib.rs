//! Robust optimized certainty equivalents, risk measures and option prices
//! when the law of a position is only known up to an optimal-transport
//! neighbourhood of a baseline, penalized by a convex function of the
//! transport cost.
//!
//! Every robust value is computed through the one-dimensional dual
//! `inf_λ (∫ f^{λc} dμ0 + φ*(λ))`; [`transport_oracle`] solves the primal on
//! discrete instances by linear programming and serves as the reference.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod ctransform;
pub mod directed;
pub mod dual_engine;
pub mod ext;
pub mod finite_duality;
pub mod func;
pub mod lp;
pub mod measures;
pub mod penalties;
pub mod pricing;
pub mod quadrature;
pub mod risk;
pub mod scalar;
pub mod table;
pub mod transport_oracle;

pub use ext::ExtReal;
pub use measures::{DiscreteDistribution, Distribution};
pub use penalties::Penalty;
pub use transport_oracle::CostFn;
