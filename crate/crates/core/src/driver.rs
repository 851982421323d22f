//! Nonlinear drivers `g(t, y, z, k)`, their builtin market-imperfection
//! forms, numerical admissibility audits and ambiguity families.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AuditKind, AuditViolation, Error, Result};
use crate::lattice::{Lattice, MarketParams, NodeContext, NodeId};

/// Slack on the declared λ-constant.
pub const LIPSCHITZ_TOL: f64 = 1e-9;
/// Margin on the Royer condition `γ > -1`.
pub const ROYER_TOL: f64 = 1e-9;

pub type DriverFn = dyn Fn(&NodeContext, f64, f64, f64) -> f64 + Send + Sync;
pub type FamilyFn = dyn Fn(&NodeContext, f64, f64, f64, f64) -> f64 + Send + Sync;

/// A λ-admissible driver with its declared λ-constant.
#[derive(Clone)]
pub struct Driver {
    name: String,
    f: Arc<DriverFn>,
    lambda_constant: f64,
    zero_at_zero: bool,
}

impl fmt::Debug for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Driver")
            .field("name", &self.name)
            .field("lambda_constant", &self.lambda_constant)
            .field("zero_at_zero", &self.zero_at_zero)
            .finish()
    }
}

impl Driver {
    pub fn new<F>(name: impl Into<String>, lambda_constant: f64, f: F) -> Self
    where
        F: Fn(&NodeContext, f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            f: Arc::new(f),
            lambda_constant,
            zero_at_zero: false,
        }
    }

    pub fn with_zero_at_zero(mut self, flag: bool) -> Self {
        self.zero_at_zero = flag;
        self
    }

    /// `g ≡ 0`.
    pub fn zero() -> Self {
        Driver::new("zero", 0.0, |_, _, _, _| 0.0).with_zero_at_zero(true)
    }

    /// `g(t, y, z, k) = -r y` with a fixed rate.
    pub fn discount(r: f64) -> Self {
        Driver::new("discount", r.abs(), move |_, y, _, _| -r * y).with_zero_at_zero(true)
    }

    #[inline]
    pub fn eval(&self, ctx: &NodeContext, y: f64, z: f64, k: f64) -> f64 {
        (self.f)(ctx, y, z, k)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lambda_constant(&self) -> f64 {
        self.lambda_constant
    }

    pub fn zero_at_zero(&self) -> bool {
        self.zero_at_zero
    }

    /// `g + delta`.
    pub fn shifted(&self, delta: f64) -> Driver {
        let inner = self.f.clone();
        Driver {
            name: format!("{}+{delta}", self.name),
            f: Arc::new(move |c, y, z, k| inner(c, y, z, k) + delta),
            lambda_constant: self.lambda_constant,
            zero_at_zero: self.zero_at_zero && delta == 0.0,
        }
    }

    /// `-g(t, -y, -z, -k)`, the driver of the buyer's pricing system.
    pub fn reflected(&self) -> Driver {
        let inner = self.f.clone();
        Driver {
            name: format!("reflected({})", self.name),
            f: Arc::new(move |c, y, z, k| -inner(c, -y, -z, -k)),
            lambda_constant: self.lambda_constant,
            zero_at_zero: self.zero_at_zero,
        }
    }
}

/// Builtin drivers selectable from a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriverKind {
    Zero,
    Perfect,
    /// Borrowing rate `R >= r`.
    BorrowLend {
        #[serde(rename = "R")]
        borrow_rate: f64,
    },
    /// Tax rate on risky investment profits, in `(0, 1)`.
    Tax {
        rho: f64,
    },
}

/// Portfolio amounts from integrands: `φ² = -k`, `φ¹ = (z + σ² k) / σ¹`.
/// After default `φ² = 0` and `k` is ignored.
pub fn phi_from_zk(mp: &MarketParams, lambda: f64, z: f64, k: f64) -> (f64, f64) {
    if lambda > 0.0 {
        ((z + mp.sigma2 * k) / mp.sigma1, -k)
    } else {
        (z / mp.sigma1, 0.0)
    }
}

fn perfect_value(mp: &MarketParams, ctx: &NodeContext, y: f64, z: f64, k: f64) -> f64 {
    let th1 = mp.theta1(ctx.r);
    let th2l = mp.theta2_lambda(ctx.r, ctx.lambda);
    -ctx.r * y - th1 * z - th2l * k
}

/// Upper bound of `|coef| / √λ` over the positive intensity pieces, or of
/// `fallback` when there are none.
fn over_pieces<F: Fn(f64, f64) -> f64>(mp: &MarketParams, f: F) -> f64 {
    let mut best: f64 = 0.0;
    for &r in mp.r.values() {
        for &l in mp.lambda_bar.values() {
            best = best.max(f(r, l));
        }
    }
    best
}

fn perfect_constant(mp: &MarketParams) -> f64 {
    over_pieces(mp, |r, l| {
        let mut c = r.abs().max(mp.theta1(r).abs());
        if l > 0.0 {
            c = c.max(mp.theta2_lambda(r, l).abs() / l.sqrt());
        }
        c
    })
}

pub fn make_builtin_driver(kind: &DriverKind, mp: &MarketParams) -> Result<Driver> {
    if mp.sigma1 == 0.0 {
        return Err(Error::SingularInversion);
    }
    let mp = mp.clone();
    match *kind {
        DriverKind::Zero => Ok(Driver::zero()),
        DriverKind::Perfect => {
            let c = perfect_constant(&mp);
            Ok(Driver::new("perfect", c, move |ctx, y, z, k| {
                perfect_value(&mp, ctx, y, z, k)
            })
            .with_zero_at_zero(true))
        }
        DriverKind::BorrowLend { borrow_rate } => {
            if !borrow_rate.is_finite() || mp.r.values().iter().any(|&r| borrow_rate < r) {
                return Err(Error::InvalidParams("borrow rate R must be >= r".into()));
            }
            let spread = over_pieces(&mp, |r, l| {
                let mut c = 1.0f64.max(1.0 / mp.sigma1);
                if l > 0.0 {
                    c = c.max((mp.sigma2 / mp.sigma1 - 1.0).abs() / l.sqrt());
                }
                (borrow_rate - r) * c
            });
            let c = perfect_constant(&mp) + spread;
            Ok(Driver::new("borrow_lend", c, move |ctx, y, z, k| {
                let (p1, p2) = phi_from_zk(&mp, ctx.lambda, z, k);
                let cash = y - p1 - p2;
                perfect_value(&mp, ctx, y, z, k) + (borrow_rate - ctx.r) * (-cash).max(0.0)
            })
            .with_zero_at_zero(true))
        }
        DriverKind::Tax { rho } => {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::InvalidParams(
                    "tax rate rho must lie in (0, 1)".into(),
                ));
            }
            let extra = over_pieces(&mp, |_, l| {
                let mut c = 1.0 / mp.sigma1;
                if l > 0.0 {
                    c = c.max((mp.sigma2 / mp.sigma1 - 1.0).abs() / l.sqrt());
                }
                rho * c
            });
            let c = perfect_constant(&mp) + extra;
            Ok(Driver::new("tax", c, move |ctx, y, z, k| {
                let (p1, p2) = phi_from_zk(&mp, ctx.lambda, z, k);
                perfect_value(&mp, ctx, y, z, k) + rho * (p1 + p2).max(0.0)
            })
            .with_zero_at_zero(true))
        }
    }
}

/// Exact lower bound of `γ = ∂g/∂k / λ` for a builtin driver over all
/// pre-default pieces, or `None` when the intensity is identically zero.
///
/// The spread terms of `borrow_lend` and `tax` depend on `k` through
/// `φ¹ + φ² = z/σ¹ + k (σ²/σ¹ - 1)` with a kink, so their slope in `k` lies
/// between zero and `spread · (σ²/σ¹ - 1)`.
pub fn builtin_gamma_bound(kind: &DriverKind, mp: &MarketParams) -> Option<f64> {
    let spread = match *kind {
        DriverKind::Zero => {
            return mp
                .lambda_bar
                .values()
                .iter()
                .any(|&l| l > 0.0)
                .then_some(0.0)
        }
        DriverKind::Perfect => 0.0,
        DriverKind::BorrowLend { borrow_rate } => borrow_rate,
        DriverKind::Tax { rho } => rho,
    };
    let slope = (mp.sigma2 / mp.sigma1 - 1.0).abs();
    let mut best: Option<f64> = None;
    for &r in mp.r.values() {
        for &l in mp.lambda_bar.values().iter().filter(|&&l| l > 0.0) {
            let s = match *kind {
                DriverKind::BorrowLend { .. } => spread - r,
                _ => spread,
            };
            let g = -mp.theta2(r, l) - s * slope / l;
            best = Some(best.map_or(g, |b: f64| b.min(g)));
        }
    }
    best
}

/// Probe ranges for [`audit_driver`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub y: (f64, f64),
    pub z: (f64, f64),
    pub k: (f64, f64),
    pub count: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            y: (-2.0, 2.0),
            z: (-2.0, 2.0),
            k: (-2.0, 2.0),
            count: 5,
        }
    }
}

impl SampleSpec {
    fn grid(range: (f64, f64), count: usize) -> Vec<f64> {
        if count <= 1 {
            return vec![0.5 * (range.0 + range.1)];
        }
        (0..count)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (count - 1) as f64)
            .collect()
    }

    fn points(&self) -> Vec<(f64, f64, f64)> {
        let ys = Self::grid(self.y, self.count);
        let zs = Self::grid(self.z, self.count);
        let ks = Self::grid(self.k, self.count);
        let mut out = Vec::with_capacity(ys.len() * zs.len() * ks.len());
        for &y in &ys {
            for &z in &zs {
                for &k in &ks {
                    out.push((y, z, k));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub driver: String,
    pub declared_c: f64,
    pub max_lipschitz_ratio: f64,
    /// Minimum empirical `γ̂` over probes at nodes with positive intensity.
    pub min_gamma: Option<f64>,
    pub k_independent_after_default: bool,
    pub nodes_probed: usize,
}

impl AuditReport {
    pub fn lipschitz_ok(&self) -> bool {
        self.max_lipschitz_ratio <= self.declared_c * (1.0 + LIPSCHITZ_TOL) + LIPSCHITZ_TOL
    }

    pub fn royer_ok(&self) -> bool {
        self.min_gamma.is_none_or(|g| g > -1.0 + ROYER_TOL)
    }

    pub fn passed(&self) -> bool {
        self.lipschitz_ok() && self.royer_ok() && self.k_independent_after_default
    }
}

#[derive(Debug, Clone)]
struct NodeAudit {
    ratio: f64,
    ratio_probe: Option<AuditViolation>,
    gamma: Option<f64>,
    gamma_probe: Option<AuditViolation>,
    k_violation: Option<AuditViolation>,
}

fn audit_node(d: &Driver, ctx: &NodeContext, pts: &[(f64, f64, f64)]) -> NodeAudit {
    let vals: Vec<f64> = pts.iter().map(|&(y, z, k)| d.eval(ctx, y, z, k)).collect();
    let sl = ctx.lambda.sqrt();
    let mut out = NodeAudit {
        ratio: 0.0,
        ratio_probe: None,
        gamma: None,
        gamma_probe: None,
        k_violation: None,
    };
    let violation = |kind, a: usize, b: usize, value| AuditViolation {
        kind,
        node: ctx.node,
        first: pts[a],
        second: pts[b],
        value,
    };
    for a in 0..pts.len() {
        for b in (a + 1)..pts.len() {
            let (y1, z1, k1) = pts[a];
            let (y2, z2, k2) = pts[b];
            let dg = (vals[a] - vals[b]).abs();
            let denom = (y1 - y2).abs() + (z1 - z2).abs() + sl * (k1 - k2).abs();
            if denom > 0.0 {
                let ratio = dg / denom;
                if ratio > out.ratio {
                    out.ratio = ratio;
                    out.ratio_probe = Some(violation(AuditKind::Lipschitz, a, b, ratio));
                }
            }
            if y1 == y2 && z1 == z2 && k1 != k2 {
                if ctx.lambda > 0.0 {
                    let gamma = (vals[a] - vals[b]) / ((k1 - k2) * ctx.lambda);
                    if out.gamma.is_none_or(|g| gamma < g) {
                        out.gamma = Some(gamma);
                        out.gamma_probe = Some(violation(AuditKind::Royer, a, b, gamma));
                    }
                } else if dg > 1e-12 * (1.0 + vals[a].abs()) && out.k_violation.is_none() {
                    out.k_violation = Some(violation(AuditKind::KDependenceAfterDefault, a, b, dg));
                }
            }
        }
    }
    out
}

/// Probe `d` on a grid at every non-terminal node of the lattice.
///
/// Returns the report when all three checks pass, otherwise
/// [`Error::AuditFailure`] carrying the worst probe.
pub fn audit_driver(d: &Driver, lattice: &Lattice, spec: &SampleSpec) -> Result<AuditReport> {
    let (report, violation) = audit_driver_report(d, lattice, spec);
    match violation {
        Some(v) => Err(Error::AuditFailure(Box::new(v))),
        None => Ok(report),
    }
}

/// Like [`audit_driver`] but always returns the report, together with the
/// first failing probe if any.
pub fn audit_driver_report(
    d: &Driver,
    lattice: &Lattice,
    spec: &SampleSpec,
) -> (AuditReport, Option<AuditViolation>) {
    let pts = spec.points();
    let ids: Vec<NodeId> = lattice
        .ids()
        .filter(|&id| !lattice.is_terminal(id))
        .collect();
    let audits: Vec<NodeAudit> = ids
        .par_iter()
        .map(|&id| audit_node(d, &lattice.context(id), &pts))
        .collect();

    let mut report = AuditReport {
        driver: d.name().to_string(),
        declared_c: d.lambda_constant(),
        max_lipschitz_ratio: 0.0,
        min_gamma: None,
        k_independent_after_default: true,
        nodes_probed: ids.len(),
    };
    let mut worst_ratio = None;
    let mut worst_gamma = None;
    let mut k_violation = None;
    for a in audits {
        if a.ratio > report.max_lipschitz_ratio {
            report.max_lipschitz_ratio = a.ratio;
            worst_ratio = a.ratio_probe;
        }
        if let Some(g) = a.gamma {
            if report.min_gamma.is_none_or(|m| g < m) {
                report.min_gamma = Some(g);
                worst_gamma = a.gamma_probe;
            }
        }
        if a.k_violation.is_some() && k_violation.is_none() {
            report.k_independent_after_default = false;
            k_violation = a.k_violation;
        }
    }
    let violation = if !report.lipschitz_ok() {
        worst_ratio
    } else if !report.royer_ok() {
        worst_gamma
    } else if !report.k_independent_after_default {
        k_violation
    } else {
        None
    };
    (report, violation)
}

/// Result of maximising the family at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgMax {
    pub index: usize,
    pub value: f64,
    /// Another grid point attains the maximum up to rounding.
    pub tied: bool,
}

/// Drivers `g(·, α)` indexed by a finite grid of ambiguity values.
#[derive(Clone)]
pub struct AmbiguityFamily {
    name: String,
    grid: Vec<f64>,
    f: Arc<FamilyFn>,
    lambda_constant: f64,
}

impl fmt::Debug for AmbiguityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmbiguityFamily")
            .field("name", &self.name)
            .field("grid", &self.grid)
            .field("lambda_constant", &self.lambda_constant)
            .finish()
    }
}

impl AmbiguityFamily {
    pub fn new<F>(name: impl Into<String>, grid: Vec<f64>, lambda_constant: f64, f: F) -> Self
    where
        F: Fn(&NodeContext, f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            grid,
            f: Arc::new(f),
            lambda_constant,
        }
    }

    /// A family whose members are given drivers, indexed by position.
    pub fn from_drivers(name: impl Into<String>, drivers: Vec<Driver>) -> Self {
        let c = drivers
            .iter()
            .map(Driver::lambda_constant)
            .fold(0.0, f64::max);
        let grid = (0..drivers.len()).map(|i| i as f64).collect();
        Self::new(name, grid, c, move |ctx, y, z, k, a| {
            drivers[a as usize].eval(ctx, y, z, k)
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn lambda_constant(&self) -> f64 {
        self.lambda_constant
    }

    #[inline]
    pub fn eval(&self, ctx: &NodeContext, y: f64, z: f64, k: f64, alpha: f64) -> f64 {
        (self.f)(ctx, y, z, k, alpha)
    }

    pub fn member(&self, index: usize) -> Driver {
        let alpha = self.grid[index];
        let f = self.f.clone();
        Driver::new(
            format!("{}[{alpha}]", self.name),
            self.lambda_constant,
            move |c, y, z, k| f(c, y, z, k, alpha),
        )
    }

    pub fn members(&self) -> Vec<Driver> {
        (0..self.len()).map(|i| self.member(i)).collect()
    }

    /// Maximising grid index, lowest index on ties.
    pub fn argmax(&self, ctx: &NodeContext, y: f64, z: f64, k: f64) -> ArgMax {
        let vals: Vec<f64> = self
            .grid
            .iter()
            .map(|&a| self.eval(ctx, y, z, k, a))
            .collect();
        let mut index = 0;
        for (i, &v) in vals.iter().enumerate().skip(1) {
            if v > vals[index] {
                index = i;
            }
        }
        let value = vals[index];
        let tol = 1e-13 * (1.0 + value.abs());
        let tied = vals
            .iter()
            .enumerate()
            .any(|(i, &v)| i != index && (value - v).abs() <= tol);
        ArgMax { index, value, tied }
    }

    /// Driver using a node-dependent grid index (a frozen control).
    pub fn frozen(&self, controls: Arc<Vec<usize>>) -> Driver {
        let f = self.f.clone();
        let grid = self.grid.clone();
        Driver::new(
            format!("{}[frozen]", self.name),
            self.lambda_constant,
            move |c, y, z, k| f(c, y, z, k, grid[controls[c.node.0]]),
        )
    }

    /// Audit every member; all must pass with the shared constant.
    pub fn audit(&self, lattice: &Lattice, spec: &SampleSpec) -> Result<Vec<AuditReport>> {
        self.members()
            .iter()
            .map(|d| audit_driver(d, lattice, spec))
            .collect()
    }
}

/// Pointwise maximum over the grid, with the family's λ-constant.
pub fn sup_driver(fam: &AmbiguityFamily) -> Result<Driver> {
    if fam.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let fam2 = fam.clone();
    Ok(Driver::new(
        format!("sup({})", fam.name),
        fam.lambda_constant,
        move |c, y, z, k| {
            fam2.grid
                .iter()
                .map(|&a| fam2.eval(c, y, z, k, a))
                .fold(f64::NEG_INFINITY, f64::max)
        },
    ))
}

/// Intensity-ambiguity coefficient `ν(t, α)` with declared bounds.
#[derive(Clone)]
pub struct Nu {
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub lower: f64,
    pub upper: f64,
}

impl fmt::Debug for Nu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nu")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

impl Nu {
    pub fn new<F>(lower: f64, upper: f64, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            lower,
            upper,
        }
    }

    /// Time-independent `ν` given per grid point.
    pub fn table(grid: &[f64], values: &[f64]) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::NuOutOfRange(
                "nu table must match the grid length".into(),
            ));
        }
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let grid = grid.to_vec();
        let values = values.to_vec();
        Ok(Self::new(lower, upper, move |_, a| {
            let i = grid
                .iter()
                .position(|&g| g == a)
                .expect("alpha on the grid");
            values[i]
        }))
    }

    pub fn eval(&self, t: f64, alpha: f64) -> f64 {
        (self.f)(t, alpha)
    }
}

/// Minimum distance of `ν` above `-1`.
pub const NU_MARGIN: f64 = 1e-6;

/// Family `g(t, y, z, k, α) = λ_t ν(t, α) k + f(t, y, z, k)` modelling
/// ambiguity on the default intensity.
///
/// `lambda_max` bounds the pre-default intensity and enters the family's
/// λ-constant as `C_f + max|ν| √λ_max`.
pub fn default_ambiguity_family(
    base: &Driver,
    nu: Nu,
    grid: Vec<f64>,
    lambda_max: f64,
) -> Result<AmbiguityFamily> {
    if !(nu.lower > -1.0 + NU_MARGIN) || !nu.upper.is_finite() || nu.lower > nu.upper {
        return Err(Error::NuOutOfRange(format!(
            "nu bounds [{}, {}] must lie above -1",
            nu.lower, nu.upper
        )));
    }
    for &a in &grid {
        let v = nu.eval(0.0, a);
        if v < nu.lower || v > nu.upper {
            return Err(Error::NuOutOfRange(format!(
                "nu(0, {a}) = {v} outside declared bounds"
            )));
        }
    }
    let c =
        base.lambda_constant() + nu.lower.abs().max(nu.upper.abs()) * lambda_max.max(0.0).sqrt();
    let base = base.clone();
    Ok(AmbiguityFamily::new(
        format!("intensity({})", base.name()),
        grid,
        c,
        move |ctx, y, z, k, a| ctx.lambda * nu.eval(ctx.t, a) * k + base.eval(ctx, y, z, k),
    ))
}
