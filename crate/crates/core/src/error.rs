use std::fmt;

use crate::lattice::NodeId;

/// Which audited property a driver failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    Lipschitz,
    Royer,
    KDependenceAfterDefault,
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AuditKind::Lipschitz => "lipschitz",
            AuditKind::Royer => "royer",
            AuditKind::KDependenceAfterDefault => "k-dependence-after-default",
        };
        f.write_str(s)
    }
}

/// The probe at which an audit failed.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    pub kind: AuditKind,
    pub node: NodeId,
    pub first: (f64, f64, f64),
    pub second: (f64, f64, f64),
    /// Lipschitz ratio or empirical gamma, depending on `kind`.
    pub value: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("singular inversion of the portfolio map (sigma1 = 0)")]
    SingularInversion,

    #[error("driver audit failed ({}) at node {} with value {}", .0.kind, .0.node.0, .0.value)]
    AuditFailure(Box<AuditViolation>),

    #[error("ambiguity grid is empty")]
    EmptyGrid,

    #[error("no contraction: lambda-constant {c} times dt {dt} is not below 1")]
    NoContraction { c: f64, dt: f64 },

    #[error("picard iteration did not converge at node {}", .node.0)]
    PicardDivergence { node: NodeId },

    #[error("state-price density not positive at node {} (branch factor {factor})", .node.0)]
    DensityNotPositive { node: NodeId, factor: f64 },

    #[error("barrier violation: xi > zeta at node {}", .node.0)]
    BarrierViolation { node: NodeId },

    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),

    #[error("unknown node {}", .0.0)]
    UnknownNode(NodeId),

    #[error("negative dividend increment at node {}", .node.0)]
    NegativeDividend { node: NodeId },

    #[error("nu out of range: {0}")]
    NuOutOfRange(String),

    #[error("invalid estimate parameters: {0}")]
    ParamsInvalid(String),

    #[error("mismatched instances: {0}")]
    MismatchedInstances(String),

    #[error("precondition violated at step {step}: {reason}")]
    PreconditionViolated { step: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
