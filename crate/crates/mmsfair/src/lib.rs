//! Fair allocation of indivisible items on multigraphs: agents are vertices,
//! items are edges (parallel edges and self-loops allowed), and an item is
//! worthless to everyone except its endpoints.
//!
//! The crate provides constructive solvers for maximin-share (MMS),
//! 1-out-of-d MMS, and pairwise-MMS (PMMS) fairness under additive, XOS, and
//! subadditive valuations, together with exhaustive oracles that compute exact
//! maximin values, verify allocations, and certify tightness on small
//! counterexample instances. All arithmetic is exact rational.

pub mod additive;
pub mod corpus;
pub mod counterexample;
pub mod error;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod subadditive;
pub mod transversal;
pub mod valuation;
pub mod xos;

pub use error::{Error, Result};
pub use instance::{parse_allocation, parse_instance, serialize_allocation, serialize_instance, Instance};
pub use model::{Agent, Allocation, DPartition, Edge, EdgeId, Multigraph};
pub use oracle::{
    best_minmax_ratio, complete_orientation, compute_mms, mms_by_labeled_assignments, mms_on_set,
    pmms_threshold, verify, FairnessReport, MmsResult, Objective, OracleLimits, RatioVal,
    SearchSpace,
};
pub use rational::Q;
pub use valuation::{
    frugal_reduce, normalize_capped, validate_valuation, xos_from_additive_bundles,
    AdditiveValuation, FrugalReduction, SubadditiveForm, SubadditiveValuation, Validity, Valuation,
    XosValuation,
};
