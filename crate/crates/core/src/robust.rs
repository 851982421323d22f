//! Pricing under ambiguity on the driver: the sup-driver equation, the
//! per-model prices, the worst-case control and the interchange check.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::drbsde::{solve_drbsde, stopping_game, Control, DrbsdeSolution, PayoffSpec, Player};
use crate::driver::{sup_driver, AmbiguityFamily, SampleSpec};
use crate::error::Result;
use crate::hedging::{
    extract_strategy, simulate_wealth, stopping_time, StoppingKind, WealthReport,
};
use crate::lattice::Lattice;

#[derive(Debug, Clone)]
pub struct RobustResult {
    /// `Y₀` of the equation driven by the sup-driver.
    pub v0_via_g: f64,
    /// `max_α Y₀^α` over constant controls.
    pub v0_via_grid: f64,
    /// `Y₀^α` per grid point.
    pub per_alpha: Vec<f64>,
    /// Worst-case grid index per node (zero at maturity).
    pub worst_alpha: Vec<usize>,
    /// Nodes where the worst case is attained by more than one grid point.
    pub ties: usize,
    /// `Y₀` re-solved with the worst-case control frozen.
    pub v0_frozen: f64,
    pub solution: DrbsdeSolution,
}

/// Robust seller's price and worst-case control.
pub fn robust_seller_price(
    lattice: &Lattice,
    fam: &AmbiguityFamily,
    p: &PayoffSpec,
) -> Result<RobustResult> {
    fam.audit(lattice, &SampleSpec::default())?;
    robust_seller_price_unaudited(lattice, fam, p)
}

/// As [`robust_seller_price`] without auditing the family first.
pub fn robust_seller_price_unaudited(
    lattice: &Lattice,
    fam: &AmbiguityFamily,
    p: &PayoffSpec,
) -> Result<RobustResult> {
    let big_g = sup_driver(fam)?;
    let solution = solve_drbsde(lattice, &big_g, p)?;
    let per_alpha = (0..fam.len())
        .into_par_iter()
        .map(|i| solve_drbsde(lattice, &fam.member(i), p).map(|s| s.y0()))
        .collect::<Result<Vec<f64>>>()?;
    let v0_via_grid = per_alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // The scheme evaluates the driver at the continuation value, so the
    // worst case is selected there.
    let mut worst_alpha = vec![0; lattice.len()];
    let mut ties = 0;
    for id in lattice.ids().filter(|&id| !lattice.is_terminal(id)) {
        let i = id.0;
        let am = fam.argmax(
            &lattice.context(id),
            solution.c[i],
            solution.z[i],
            solution.k[i],
        );
        worst_alpha[i] = am.index;
        ties += am.tied as usize;
    }
    let frozen = fam.frozen(Arc::new(worst_alpha.clone()));
    let v0_frozen = solve_drbsde(lattice, &frozen, p)?.y0();
    Ok(RobustResult {
        v0_via_g: solution.y0(),
        v0_via_grid,
        per_alpha,
        worst_alpha,
        ties,
        v0_frozen,
        solution,
    })
}

/// Wealth of the sup-driver super-hedge simulated under each grid model.
pub fn robust_certificate(
    lattice: &Lattice,
    fam: &AmbiguityFamily,
    res: &RobustResult,
    kind: StoppingKind,
) -> Result<Vec<WealthReport>> {
    let strat = extract_strategy(lattice, &res.solution)?;
    let rule = stopping_time(lattice, &res.solution, kind)?;
    let epsilon = match kind {
        StoppingKind::SigmaEps { epsilon } => epsilon,
        _ => 0.0,
    };
    let barriers = res.solution.barriers();
    (0..fam.len())
        .into_par_iter()
        .map(|i| {
            let mut rep = simulate_wealth(
                lattice,
                &fam.member(i),
                &strat,
                &rule,
                &barriers,
                res.v0_via_g,
                epsilon,
                None,
            )?;
            rep.paths.clear();
            Ok(rep)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterchangeReport {
    /// `sup_α inf_σ sup_τ`.
    pub sup_inf_sup: f64,
    /// `inf_σ sup_α sup_τ`.
    pub inf_sup_sup: f64,
    pub v0_via_g: f64,
    /// Number of predictable controls enumerated.
    pub n_controls: usize,
    pub n_stopping_times: usize,
}

impl InterchangeReport {
    pub fn gap(&self) -> f64 {
        (self.sup_inf_sup - self.inf_sup_sup).abs()
    }
}

/// Enumerate predictable grid-valued controls and both stopping times.
pub fn interchange_check(
    lattice: &Lattice,
    fam: &AmbiguityFamily,
    p: &PayoffSpec,
) -> Result<InterchangeReport> {
    let members = fam.members();
    let b = p.barriers(lattice)?;
    let g = stopping_game(
        lattice,
        Control::Enumerate(&members),
        &b,
        Player::Enumerate,
        Player::Enumerate,
    )?;
    let best = g.best_tau();
    let (na, ns) = (g.n_alpha, g.n_sigma);
    let sup_inf_sup = (0..na)
        .map(|a| {
            (0..ns)
                .map(|s| best[a * ns + s].0)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let inf_sup_sup = (0..ns)
        .map(|s| {
            (0..na)
                .map(|a| best[a * ns + s].0)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    let v0_via_g = solve_drbsde(lattice, &sup_driver(fam)?, p)?.y0();
    Ok(InterchangeReport {
        sup_inf_sup,
        inf_sup_sup,
        v0_via_g,
        n_controls: na,
        n_stopping_times: ns,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustBuyer {
    /// `-Ỹ₀` under the sup-driver with barriers `(-ζ, -ξ)`.
    pub price: f64,
    /// Buyer's price per grid model.
    pub per_alpha: Vec<f64>,
    /// Buyer's price with the worst-case control of the buyer's problem frozen.
    pub frozen: f64,
}

pub fn robust_buyer_price(
    lattice: &Lattice,
    fam: &AmbiguityFamily,
    p: &PayoffSpec,
) -> Result<RobustBuyer> {
    let res = robust_seller_price(lattice, fam, &p.reflected())?;
    Ok(RobustBuyer {
        price: -res.v0_via_g,
        per_alpha: res.per_alpha.iter().map(|v| -v).collect(),
        frozen: -res.v0_frozen,
    })
}
