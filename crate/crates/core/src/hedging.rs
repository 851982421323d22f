//! Seller and buyer super-hedges: portfolio extraction, stopping rules,
//! forward wealth simulation along every lattice path and the saddle-point
//! check of the stopping game.

use serde::Serialize;

use crate::bsde::check_contraction;
use crate::drbsde::{
    solve_drbsde, stopping_game, Barriers, Control, DrbsdeSolution, PayoffSpec, Player,
};
use crate::driver::{phi_from_zk, Driver};
use crate::error::{Error, Result};
use crate::lattice::{DefaultStatus, Lattice, MarketParams, NodeId};

/// Slack below which a wealth comparison counts as a violation.
pub const HEDGE_TOL: f64 = 1e-12;

/// Amounts invested in the two risky assets, per node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Strategy {
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
}

impl Strategy {
    /// Integrands `(Z, K)` carried by the portfolio at a node:
    /// `Z = φ¹σ¹ + φ²σ²`, `K = -φ²`.
    pub fn integrands(&self, mp: &MarketParams, id: NodeId) -> (f64, f64) {
        let (p1, p2) = (self.phi1[id.0], self.phi2[id.0]);
        (p1 * mp.sigma1 + p2 * mp.sigma2, -p2)
    }
}

/// Portfolio from integrands node by node.
pub fn strategy_from_integrands(lattice: &Lattice, z: &[f64], k: &[f64]) -> Result<Strategy> {
    let mp = lattice.market();
    if !(mp.sigma1 > 0.0) {
        return Err(Error::SingularInversion);
    }
    let mut phi1 = vec![0.0; lattice.len()];
    let mut phi2 = vec![0.0; lattice.len()];
    for id in lattice.ids() {
        let (a, b) = phi_from_zk(mp, lattice.lambda_at(id), z[id.0], k[id.0]);
        phi1[id.0] = a;
        phi2[id.0] = b;
    }
    Ok(Strategy { phi1, phi2 })
}

pub fn extract_strategy(lattice: &Lattice, sol: &DrbsdeSolution) -> Result<Strategy> {
    strategy_from_integrands(lattice, &sol.z, &sol.k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingKind {
    /// First node where the price touches the upper barrier.
    SigmaStar,
    /// First node where the price is within `epsilon` of the upper barrier.
    SigmaEps {
        epsilon: f64,
    },
    /// First node where the price touches the lower barrier.
    TauStar,
    /// First node where the upper reflection is active.
    SigmaBar,
    User,
}

/// Node-indexed stop flags; a path stops at its first flagged node.
/// Maturity is always flagged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingRule {
    pub kind: StoppingKind,
    pub stop: Vec<bool>,
}

impl StoppingRule {
    pub fn user(lattice: &Lattice, mut stop: Vec<bool>) -> Result<Self> {
        if stop.len() != lattice.len() {
            return Err(Error::InvalidParams("one stop flag per node".into()));
        }
        for id in lattice.layer_ids(lattice.n_steps()) {
            stop[id.0] = true;
        }
        Ok(Self {
            kind: StoppingKind::User,
            stop,
        })
    }

    /// Stop step along the path through the given nodes.
    pub fn stop_step(&self, path: &[NodeId]) -> usize {
        path.iter()
            .position(|id| self.stop[id.0])
            .unwrap_or(path.len() - 1)
    }
}

pub fn stopping_time(
    lattice: &Lattice,
    sol: &DrbsdeSolution,
    kind: StoppingKind,
) -> Result<StoppingRule> {
    let flag = |i: usize| -> Result<bool> {
        Ok(match kind {
            StoppingKind::SigmaStar => sol.y[i] == sol.zeta[i],
            StoppingKind::SigmaEps { epsilon } => {
                if !(epsilon > 0.0) {
                    return Err(Error::InvalidParams("epsilon must be > 0".into()));
                }
                sol.y[i] >= sol.zeta[i] - epsilon
            }
            StoppingKind::TauStar => sol.y[i] == sol.xi[i],
            StoppingKind::SigmaBar => sol.da_prime[i] > 0.0,
            StoppingKind::User => {
                return Err(Error::InvalidParams(
                    "user rules are built from flags".into(),
                ))
            }
        })
    };
    let mut stop = Vec::with_capacity(lattice.len());
    for id in lattice.ids() {
        stop.push(lattice.is_terminal(id) || flag(id.0)?);
    }
    Ok(StoppingRule { kind, stop })
}

/// Wealth along one lattice path, up to its stop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub nodes: Vec<NodeId>,
    pub wealth: Vec<f64>,
    pub stop_step: usize,
    /// `min (V - ξ)` over steps strictly before the stop.
    pub pre_stop_slack: f64,
    /// `V - ζ + ε` at the stop.
    pub stop_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WealthReport {
    pub x0: f64,
    pub epsilon: f64,
    pub n_paths: usize,
    pub min_pre_stop_slack: f64,
    pub min_stop_slack: f64,
    /// `min (V - Y)` up to the stop when a reference price was given.
    pub min_gap_to_price: Option<f64>,
    pub violations: usize,
    #[serde(skip)]
    pub paths: Vec<PathRecord>,
}

impl WealthReport {
    pub fn certified(&self) -> bool {
        self.violations == 0
    }
}

/// One forward wealth step: `V' = V - g(V, Z, K) dt + Z dW + K dM`.
#[inline]
pub fn wealth_step(
    lattice: &Lattice,
    d: &Driver,
    id: NodeId,
    v: f64,
    z: f64,
    k: f64,
    branch: usize,
) -> f64 {
    let ctx = lattice.context(id);
    let t = &lattice.transitions(id)[branch];
    v - d.eval(&ctx, v, z, k) * ctx.dt + z * t.dw + k * t.dm
}

/// Simulate wealth from `x0` on every lattice path with the strategy's
/// integrands, stop by `rule`, and compare with the barriers.
///
/// The stop comparison is against `ζ - ε` (pass `0` for the exact
/// super-hedge). If `price` is given the gap `V - Y` is tracked too.
#[allow(clippy::too_many_arguments)]
pub fn simulate_wealth(
    lattice: &Lattice,
    d: &Driver,
    strat: &Strategy,
    rule: &StoppingRule,
    barriers: &Barriers,
    x0: f64,
    epsilon: f64,
    price: Option<&[f64]>,
) -> Result<WealthReport> {
    check_contraction(lattice, d)?;
    let mp = lattice.market();
    let mut report = WealthReport {
        x0,
        epsilon,
        n_paths: 0,
        min_pre_stop_slack: f64::INFINITY,
        min_stop_slack: f64::INFINITY,
        min_gap_to_price: price.map(|_| f64::INFINITY),
        violations: 0,
        paths: Vec::new(),
    };
    let mut nodes = vec![lattice.root()];
    let mut wealth = vec![x0];

    struct Ctx<'a> {
        lattice: &'a Lattice,
        d: &'a Driver,
        strat: &'a Strategy,
        rule: &'a StoppingRule,
        barriers: &'a Barriers,
        mp: &'a MarketParams,
        epsilon: f64,
        price: Option<&'a [f64]>,
    }

    fn walk(c: &Ctx<'_>, nodes: &mut Vec<NodeId>, wealth: &mut Vec<f64>, rep: &mut WealthReport) {
        let id = *nodes.last().expect("non-empty path");
        let v = *wealth.last().expect("non-empty path");
        if let (Some(p), Some(gap)) = (c.price, rep.min_gap_to_price.as_mut()) {
            *gap = gap.min(v - p[id.0]);
        }
        if c.rule.stop[id.0] || c.lattice.is_terminal(id) {
            let stop_slack = v - c.barriers.zeta[id.0] + c.epsilon;
            let pre = nodes[..nodes.len() - 1]
                .iter()
                .zip(wealth.iter())
                .map(|(n, w)| w - c.barriers.xi[n.0])
                .fold(f64::INFINITY, f64::min);
            rep.n_paths += 1;
            rep.min_pre_stop_slack = rep.min_pre_stop_slack.min(pre);
            rep.min_stop_slack = rep.min_stop_slack.min(stop_slack);
            if pre < -HEDGE_TOL || stop_slack < -HEDGE_TOL {
                rep.violations += 1;
            }
            rep.paths.push(PathRecord {
                nodes: nodes.clone(),
                wealth: wealth.clone(),
                stop_step: nodes.len() - 1,
                pre_stop_slack: pre,
                stop_slack,
            });
            return;
        }
        let (z, k) = c.strat.integrands(c.mp, id);
        for (b, t) in c.lattice.transitions(id).iter().enumerate() {
            let next = wealth_step(c.lattice, c.d, id, v, z, k, b);
            nodes.push(t.to);
            wealth.push(next);
            walk(c, nodes, wealth, rep);
            nodes.pop();
            wealth.pop();
        }
    }

    let ctx = Ctx {
        lattice,
        d,
        strat,
        rule,
        barriers,
        mp,
        epsilon,
        price,
    };
    walk(&ctx, &mut nodes, &mut wealth, &mut report);
    Ok(report)
}

/// Seller's super-hedge from a solved DRBSDE: strategy, stopping rule and
/// the wealth report from `x0` (defaults to `Y₀`).
pub fn seller_superhedge(
    lattice: &Lattice,
    d: &Driver,
    sol: &DrbsdeSolution,
    kind: StoppingKind,
    x0: Option<f64>,
) -> Result<(Strategy, StoppingRule, WealthReport)> {
    let strat = extract_strategy(lattice, sol)?;
    let rule = stopping_time(lattice, sol, kind)?;
    let epsilon = match kind {
        StoppingKind::SigmaEps { epsilon } => epsilon,
        _ => 0.0,
    };
    let report = simulate_wealth(
        lattice,
        d,
        &strat,
        &rule,
        &sol.barriers(),
        x0.unwrap_or(sol.y0()),
        epsilon,
        Some(&sol.y),
    )?;
    Ok((strat, rule, report))
}

#[derive(Debug, Clone)]
pub struct BuyerHedge {
    /// `-Ỹ₀`.
    pub price: f64,
    pub strategy: Strategy,
    /// Exercise rule: first node with `-Ỹ = ξ`.
    pub exercise: StoppingRule,
    /// Wealth from `-price` against the reflected barriers `(-ζ, -ξ)`.
    pub report: WealthReport,
    pub solution: DrbsdeSolution,
}

pub fn buyer_superhedge(lattice: &Lattice, d: &Driver, p: &PayoffSpec) -> Result<BuyerHedge> {
    let sol = solve_drbsde(lattice, d, &p.reflected())?;
    let (strategy, exercise, report) =
        seller_superhedge(lattice, d, &sol, StoppingKind::SigmaStar, None)?;
    Ok(BuyerHedge {
        price: -sol.y0(),
        strategy,
        exercise,
        report,
        solution: sol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleReport {
    pub y0: f64,
    /// `max_τ E[I(τ, σ*)]`.
    pub max_against_sigma_star: f64,
    /// `min_σ E[I(τ*, σ)]`.
    pub min_against_tau_star: f64,
}

impl SaddleReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_against_sigma_star <= self.y0 + tol && self.min_against_tau_star >= self.y0 - tol
    }
}

/// Check `E[I(τ, σ*)] <= Y₀ <= E[I(τ*, σ)]` over every enumerated `τ`, `σ`.
pub fn saddle_point_check(
    lattice: &Lattice,
    d: &Driver,
    sol: &DrbsdeSolution,
) -> Result<SaddleReport> {
    let b = sol.barriers();
    let sigma_star = stopping_time(lattice, sol, StoppingKind::SigmaStar)?;
    let tau_star = stopping_time(lattice, sol, StoppingKind::TauStar)?;
    let g1 = stopping_game(
        lattice,
        Control::Fixed(d),
        &b,
        Player::Enumerate,
        Player::Rule(&sigma_star.stop),
    )?;
    let g2 = stopping_game(
        lattice,
        Control::Fixed(d),
        &b,
        Player::Rule(&tau_star.stop),
        Player::Enumerate,
    )?;
    Ok(SaddleReport {
        y0: sol.y0(),
        max_against_sigma_star: g1.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_against_tau_star: g2.values.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Row of a strategy table.
pub fn node_label(lattice: &Lattice, id: NodeId) -> (usize, usize, DefaultStatus) {
    let n = lattice.node(id);
    (n.step, n.j, n.status)
}
