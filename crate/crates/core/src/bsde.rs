//! Backward solver for the BSDE with a default jump, the deflator oracle for
//! linear drivers and the buyer's European price.

use crate::driver::Driver;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, NodeContext, NodeId};

/// Stopping threshold on successive Picard iterates.
pub const PICARD_TOL: f64 = 1e-12;
pub const PICARD_MAX_ITER: u32 = 100;
/// Largest step count accepted by [`linear_price_oracle`].
pub const ORACLE_MAX_STEPS: usize = 12;

/// Solve `c = base + g(t, c, z, k) dt` by Picard iteration.
///
/// Returns the fixed point and the number of iterations used.
pub fn implicit_step(
    d: &Driver,
    ctx: &NodeContext,
    base: f64,
    z: f64,
    k: f64,
) -> Result<(f64, u32)> {
    let mut c = base;
    for it in 1..=PICARD_MAX_ITER {
        let next = base + d.eval(ctx, c, z, k) * ctx.dt;
        if (next - c).abs() < PICARD_TOL * next.abs().max(1.0) {
            return Ok((next, it));
        }
        c = next;
    }
    Err(Error::PicardDivergence { node: ctx.node })
}

/// Reject drivers whose λ-constant breaks the contraction `C dt < 1`.
pub fn check_contraction(lattice: &Lattice, d: &Driver) -> Result<()> {
    let c = d.lambda_constant();
    let dt = lattice.dt();
    if !(c * dt < 1.0) {
        return Err(Error::NoContraction { c, dt });
    }
    Ok(())
}

/// Values of `f` on the nodes of one layer, in layer order.
pub fn layer_values(lattice: &Lattice, step: usize, f: impl Fn(NodeId) -> f64) -> Vec<f64> {
    lattice.layer_ids(step).map(f).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsdeSolution {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub k: Vec<f64>,
    /// Picard iterations per node (0 at maturity).
    pub iterations: Vec<u32>,
}

impl BsdeSolution {
    pub fn y0(&self) -> f64 {
        self.y[0]
    }

    pub fn max_iterations(&self) -> u32 {
        self.iterations.iter().copied().max().unwrap_or(0)
    }
}

/// Solve backward from `terminal`, given on the last layer in layer order.
pub fn solve_bsde(lattice: &Lattice, d: &Driver, terminal: &[f64]) -> Result<BsdeSolution> {
    let n = lattice.n_steps();
    let last = lattice.layer(n);
    if terminal.len() != last.len() {
        return Err(Error::InvalidParams(format!(
            "terminal has {} values, the last layer has {}",
            terminal.len(),
            last.len()
        )));
    }
    check_contraction(lattice, d)?;
    let len = lattice.len();
    let mut y = vec![0.0; len];
    let mut z = vec![0.0; len];
    let mut k = vec![0.0; len];
    let mut iterations = vec![0; len];
    y[last.clone()].copy_from_slice(terminal);
    for step in (0..n).rev() {
        for id in lattice.layer_ids(step) {
            let succ = lattice.successor_values(id, &y);
            let reg = lattice.conditional_expectation(id, &succ);
            let ctx = lattice.context(id);
            let (v, it) = implicit_step(d, &ctx, reg.mean, reg.z, reg.k)?;
            y[id.0] = v;
            z[id.0] = reg.z;
            k[id.0] = reg.k;
            iterations[id.0] = it;
        }
    }
    Ok(BsdeSolution {
        y,
        z,
        k,
        iterations,
    })
}

/// Linear price by forward propagation of the state-price deflator along
/// every path of the lattice, for the perfect-market driver.
///
/// Each branch multiplies the density by
/// `1 - θ¹ dt dW / Var(dW) - θ²λ dt dM / Var(dM)` and discounts by
/// `1 / (1 + r dt)`.
pub fn linear_price_oracle(lattice: &Lattice, terminal: &[f64]) -> Result<f64> {
    let n = lattice.n_steps();
    if n > ORACLE_MAX_STEPS {
        return Err(Error::TooLarge(format!(
            "deflator oracle is limited to {ORACLE_MAX_STEPS} steps, got {n}"
        )));
    }
    let last = lattice.layer(n);
    if terminal.len() != last.len() {
        return Err(Error::InvalidParams(
            "terminal must cover the last layer".into(),
        ));
    }
    let mp = lattice.market();
    // Branch factors per node, checked for positivity once.
    let mut factors: Vec<Vec<f64>> = vec![Vec::new(); lattice.len()];
    for id in lattice.ids().filter(|&id| !lattice.is_terminal(id)) {
        let ctx = lattice.context(id);
        let th1 = mp.theta1(ctx.r);
        let th2l = mp.theta2_lambda(ctx.r, ctx.lambda);
        let vw = lattice.var_dw(id);
        let vm = lattice.var_dm(id);
        let disc = 1.0 / (1.0 + ctx.r * ctx.dt);
        let mut fs = Vec::with_capacity(3);
        for t in lattice.transitions(id) {
            let mut f = 1.0;
            if vw > 0.0 {
                f -= th1 * ctx.dt * t.dw / vw;
            }
            if vm > 0.0 {
                f -= th2l * ctx.dt * t.dm / vm;
            }
            if f <= 0.0 {
                return Err(Error::DensityNotPositive {
                    node: id,
                    factor: f,
                });
            }
            fs.push(f * disc);
        }
        factors[id.0] = fs;
    }

    fn walk(
        lattice: &Lattice,
        factors: &[Vec<f64>],
        terminal: &[f64],
        offset: usize,
        id: NodeId,
        weight: f64,
    ) -> f64 {
        if lattice.is_terminal(id) {
            return weight * terminal[id.0 - offset];
        }
        lattice
            .transitions(id)
            .iter()
            .zip(&factors[id.0])
            .map(|(t, f)| walk(lattice, factors, terminal, offset, t.to, weight * t.p * f))
            .sum()
    }

    Ok(walk(
        lattice,
        &factors,
        terminal,
        last.start,
        lattice.root(),
        1.0,
    ))
}

/// Buyer's European price: `-Y₀` of the equation with terminal `-terminal`.
pub fn buyer_european_price(lattice: &Lattice, d: &Driver, terminal: &[f64]) -> Result<f64> {
    let neg: Vec<f64> = terminal.iter().map(|v| -v).collect();
    Ok(-solve_bsde(lattice, d, &neg)?.y0())
}
