//! Pricing and super-hedging of game options with default risk in markets
//! with nonlinear wealth dynamics, on a recombining lattice.

// `!(x > 0.0)` is used on purpose so that NaN is rejected; index loops
// mirror the lattice layout.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bsde;
pub mod drbsde;
pub mod driver;
pub mod error;
pub mod hedging;
pub mod instances;
pub mod lattice;
pub mod robust;
pub mod validation;

pub use bsde::{buyer_european_price, linear_price_oracle, solve_bsde, BsdeSolution};
pub use drbsde::{
    dynkin_bruteforce, price_at_node, solve_drbsde, solve_with_dividends, Barriers, DrbsdeSolution,
    DynkinResult, PayoffSpec,
};
pub use driver::{
    audit_driver, default_ambiguity_family, make_builtin_driver, sup_driver, AmbiguityFamily,
    AuditReport, Driver, DriverKind, Nu, SampleSpec,
};
pub use error::{AuditKind, AuditViolation, Error, Result};
pub use hedging::{
    buyer_superhedge, extract_strategy, seller_superhedge, StoppingKind, Strategy, WealthReport,
};
pub use lattice::{
    build_lattice, DefaultStatus, Lattice, LatticeParams, MarketParams, Node, NodeContext, NodeId,
    Schedule,
};
pub use robust::{interchange_check, robust_buyer_price, robust_seller_price, RobustResult};
pub use validation::{apriori_check, AprioriReport, EstimateParams};
