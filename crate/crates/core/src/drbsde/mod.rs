//! Doubly reflected backward equations: barriers, the projected backward
//! scheme, dividends and the brute-force stopping game.

pub mod dynkin;

use std::fmt;
use std::sync::Arc;

use crate::bsde::{check_contraction, implicit_step};
use crate::driver::Driver;
use crate::error::{Error, Result};
use crate::lattice::{DefaultStatus, Lattice, NodeId};

pub use dynkin::{
    dynkin_bruteforce, stopping_game, Control, DynkinResult, GameTensor, Player, MAX_DYNKIN_STEPS,
};

type NodeFn = dyn Fn(&Lattice, NodeId) -> f64 + Send + Sync;

/// Lower barrier `ξ` (exercise payoff) and upper barrier `ζ` (cancellation
/// payoff). At maturity `ζ` is replaced by `ξ`.
#[derive(Clone)]
pub struct PayoffSpec {
    xi: Arc<NodeFn>,
    zeta: Arc<NodeFn>,
}

impl fmt::Debug for PayoffSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PayoffSpec")
    }
}

impl PayoffSpec {
    /// Barriers as functions of `(t, S¹, default status)`.
    pub fn new<X, Z>(xi: X, zeta: Z) -> Self
    where
        X: Fn(f64, f64, DefaultStatus) -> f64 + Send + Sync + 'static,
        Z: Fn(f64, f64, DefaultStatus) -> f64 + Send + Sync + 'static,
    {
        Self {
            xi: Arc::new(move |l, id| {
                let c = l.context(id);
                xi(c.t, c.s1, c.status)
            }),
            zeta: Arc::new(move |l, id| {
                let c = l.context(id);
                zeta(c.t, c.s1, c.status)
            }),
        }
    }

    /// Barriers given directly per node id.
    pub fn from_tables(xi: Vec<f64>, zeta: Vec<f64>) -> Self {
        let xi = Arc::new(xi);
        let zeta = Arc::new(zeta);
        Self {
            xi: Arc::new(move |_, id| xi[id.0]),
            zeta: Arc::new(move |_, id| zeta[id.0]),
        }
    }

    /// Constant barriers.
    pub fn constant(xi: f64, zeta: f64) -> Self {
        Self::new(move |_, _, _| xi, move |_, _, _| zeta)
    }

    /// `(-ζ, -ξ)`, the barriers of the buyer's problem. The maturity value
    /// stays `-ξ_T`.
    pub fn reflected(&self) -> Self {
        let xi = self.xi.clone();
        let zeta = self.zeta.clone();
        Self {
            xi: Arc::new(move |l, id| {
                if l.is_terminal(id) {
                    -xi(l, id)
                } else {
                    -zeta(l, id)
                }
            }),
            zeta: Arc::new({
                let xi = self.xi.clone();
                move |l, id| -xi(l, id)
            }),
        }
    }

    /// Evaluate both barriers on the lattice and check `ξ <= ζ`.
    pub fn barriers(&self, lattice: &Lattice) -> Result<Barriers> {
        let mut xi = Vec::with_capacity(lattice.len());
        let mut zeta = Vec::with_capacity(lattice.len());
        for id in lattice.ids() {
            let x = (self.xi)(lattice, id);
            let z = if lattice.is_terminal(id) {
                x
            } else {
                (self.zeta)(lattice, id)
            };
            if !x.is_finite() || !z.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "non-finite barrier at node {}",
                    id.0
                )));
            }
            if x > z {
                return Err(Error::BarrierViolation { node: id });
            }
            xi.push(x);
            zeta.push(z);
        }
        Ok(Barriers { xi, zeta })
    }
}

/// Node-indexed barrier values.
#[derive(Debug, Clone, PartialEq)]
pub struct Barriers {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrbsdeSolution {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub k: Vec<f64>,
    /// Unconstrained continuation value before projection.
    pub c: Vec<f64>,
    pub da: Vec<f64>,
    pub da_prime: Vec<f64>,
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub iterations: Vec<u32>,
}

impl DrbsdeSolution {
    pub fn y0(&self) -> f64 {
        self.y[0]
    }

    /// Seller's price at a node.
    pub fn price_at_node(&self, id: NodeId) -> Result<f64> {
        self.y.get(id.0).copied().ok_or(Error::UnknownNode(id))
    }

    pub fn barriers(&self) -> Barriers {
        Barriers {
            xi: self.xi.clone(),
            zeta: self.zeta.clone(),
        }
    }
}

pub fn price_at_node(sol: &DrbsdeSolution, id: NodeId) -> Result<f64> {
    sol.price_at_node(id)
}

pub fn solve_drbsde(lattice: &Lattice, d: &Driver, p: &PayoffSpec) -> Result<DrbsdeSolution> {
    let b = p.barriers(lattice)?;
    solve_reflected(lattice, d, &b, None)
}

/// As [`solve_drbsde`] with a dividend increment paid over the step leaving
/// each node (node-indexed; entries at maturity are ignored).
pub fn solve_with_dividends(
    lattice: &Lattice,
    d: &Driver,
    p: &PayoffSpec,
    dividends: &[f64],
) -> Result<DrbsdeSolution> {
    if dividends.len() != lattice.len() {
        return Err(Error::InvalidParams(
            "one dividend increment per node".into(),
        ));
    }
    if let Some(i) = dividends.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeDividend { node: NodeId(i) });
    }
    let b = p.barriers(lattice)?;
    solve_reflected(lattice, d, &b, Some(dividends))
}

/// Backward projection scheme on precomputed barriers.
pub fn solve_reflected(
    lattice: &Lattice,
    d: &Driver,
    b: &Barriers,
    dividends: Option<&[f64]>,
) -> Result<DrbsdeSolution> {
    check_contraction(lattice, d)?;
    let len = lattice.len();
    if b.xi.len() != len || b.zeta.len() != len {
        return Err(Error::InvalidParams(
            "barriers must cover every node".into(),
        ));
    }
    if let Some(i) = (0..len).find(|&i| b.xi[i] > b.zeta[i]) {
        return Err(Error::BarrierViolation { node: NodeId(i) });
    }
    let n = lattice.n_steps();
    let mut sol = DrbsdeSolution {
        y: vec![0.0; len],
        z: vec![0.0; len],
        k: vec![0.0; len],
        c: vec![0.0; len],
        da: vec![0.0; len],
        da_prime: vec![0.0; len],
        xi: b.xi.clone(),
        zeta: b.zeta.clone(),
        iterations: vec![0; len],
    };
    for id in lattice.layer_ids(n) {
        sol.y[id.0] = b.xi[id.0];
        sol.c[id.0] = b.xi[id.0];
    }
    for step in (0..n).rev() {
        for id in lattice.layer_ids(step) {
            let i = id.0;
            let succ = lattice.successor_values(id, &sol.y);
            let reg = lattice.conditional_expectation(id, &succ);
            let ctx = lattice.context(id);
            let base = reg.mean + dividends.map_or(0.0, |dd| dd[i]);
            let (c, it) = implicit_step(d, &ctx, base, reg.z, reg.k)?;
            let (y, da, dap) = project(c, b.xi[i], b.zeta[i]);
            sol.y[i] = y;
            sol.z[i] = reg.z;
            sol.k[i] = reg.k;
            sol.c[i] = c;
            sol.da[i] = da;
            sol.da_prime[i] = dap;
            sol.iterations[i] = it;
        }
    }
    Ok(sol)
}

/// Clamp the continuation into `[ξ, ζ]`, returning `(Y, ΔA, ΔA')`.
#[inline]
pub fn project(c: f64, xi: f64, zeta: f64) -> (f64, f64, f64) {
    if c < xi {
        (xi, xi - c, 0.0)
    } else if c > zeta {
        (zeta, 0.0, c - zeta)
    } else {
        (c, 0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsde::{layer_values, solve_bsde};
    use crate::driver::{make_builtin_driver, DriverKind};
    use crate::lattice::{build_lattice, LatticeParams, MarketParams};

    fn market() -> MarketParams {
        MarketParams {
            r: 0.02.into(),
            mu1: 0.06,
            sigma1: 0.25,
            mu2: 0.05,
            sigma2: 0.3,
            lambda_bar: 0.3.into(),
            s1_0: 100.0,
            s2_0: 50.0,
        }
    }

    fn lattice(n: usize) -> Lattice {
        build_lattice(LatticeParams::new(1.0, n), market()).unwrap()
    }

    fn check_structure(lat: &Lattice, d: &Driver, sol: &DrbsdeSolution) {
        for id in lat.ids() {
            let i = id.0;
            assert!(sol.xi[i] <= sol.y[i] && sol.y[i] <= sol.zeta[i]);
            assert_eq!(sol.da[i] * sol.da_prime[i], 0.0);
            if sol.da[i] > 0.0 {
                assert_eq!(sol.y[i], sol.xi[i]);
            }
            if sol.da_prime[i] > 0.0 {
                assert_eq!(sol.y[i], sol.zeta[i]);
            }
            if !lat.is_terminal(id) {
                let reg = lat.conditional_expectation(id, &lat.successor_values(id, &sol.y));
                let ctx = lat.context(id);
                let rhs = reg.mean + d.eval(&ctx, sol.c[i], reg.z, reg.k) * ctx.dt + sol.da[i]
                    - sol.da_prime[i];
                assert!((sol.y[i] - rhs).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn constant_equal_barriers() {
        let lat = lattice(4);
        let sol = solve_drbsde(&lat, &Driver::zero(), &PayoffSpec::constant(1.5, 1.5)).unwrap();
        assert!(sol.y.iter().all(|&v| v == 1.5));
        assert!(sol.da.iter().all(|&v| v.abs() < 1e-14));
        assert!(sol.da_prime.iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn wide_barriers_reduce_to_bsde() {
        let lat = lattice(6);
        let d = make_builtin_driver(&DriverKind::Tax { rho: 0.2 }, lat.market()).unwrap();
        let p = PayoffSpec::new(
            |t, s, _| {
                if t >= 1.0 - 1e-12 {
                    (s - 100.0).max(0.0)
                } else {
                    -1e6
                }
            },
            |_, _, _| 1e6,
        );
        let sol = solve_drbsde(&lat, &d, &p).unwrap();
        let term = layer_values(&lat, 6, |id| (lat.s1(id) - 100.0).max(0.0));
        let bsde = solve_bsde(&lat, &d, &term).unwrap();
        for i in 0..lat.len() {
            assert_eq!(sol.y[i], bsde.y[i]);
        }
        check_structure(&lat, &d, &sol);
    }

    #[test]
    fn skorokhod_and_bounds_on_game_call() {
        let lat = lattice(8);
        let d = make_builtin_driver(&DriverKind::BorrowLend { borrow_rate: 0.06 }, lat.market())
            .unwrap();
        let p = PayoffSpec::new(
            |_, s, _| (s - 100.0).max(0.0),
            |_, s, _| (s - 100.0).max(0.0) + 2.0,
        );
        let sol = solve_drbsde(&lat, &d, &p).unwrap();
        check_structure(&lat, &d, &sol);
        assert!(sol.da.iter().any(|&v| v > 0.0) || sol.da_prime.iter().any(|&v| v > 0.0));
        assert_eq!(sol.price_at_node(NodeId(0)).unwrap(), sol.y0());
        assert!(matches!(
            sol.price_at_node(NodeId(lat.len())),
            Err(Error::UnknownNode(_))
        ));
        for id in lat.layer_ids(8) {
            assert_eq!(price_at_node(&sol, id).unwrap(), sol.xi[id.0]);
        }
    }

    #[test]
    fn barrier_violation_rejected() {
        let lat = lattice(2);
        let p = PayoffSpec::constant(2.0, 1.0);
        assert!(matches!(
            solve_drbsde(&lat, &Driver::zero(), &p),
            Err(Error::BarrierViolation { .. })
        ));
    }

    #[test]
    fn dividends() {
        let lat = lattice(5);
        let wide = PayoffSpec::new(
            |t, _, _| if t >= 1.0 - 1e-12 { 1.0 } else { -1e6 },
            |_, _, _| 1e6,
        );
        let none = solve_drbsde(&lat, &Driver::zero(), &wide).unwrap();
        let zero =
            solve_with_dividends(&lat, &Driver::zero(), &wide, &vec![0.0; lat.len()]).unwrap();
        assert_eq!(none, zero);

        // g = 0, dD = δ per step: Y₀ = terminal mean + n δ.
        let delta = 0.125;
        let sol =
            solve_with_dividends(&lat, &Driver::zero(), &wide, &vec![delta; lat.len()]).unwrap();
        assert!((sol.y0() - (1.0 + 5.0 * delta)).abs() < 1e-13);

        let mut neg = vec![0.0; lat.len()];
        neg[3] = -1e-3;
        assert!(matches!(
            solve_with_dividends(&lat, &Driver::zero(), &wide, &neg),
            Err(Error::NegativeDividend { node: NodeId(3) })
        ));
    }

    #[test]
    fn dividends_act_like_driver_shift() {
        let lat = lattice(4);
        let wide = PayoffSpec::new(
            |t, s, _| if t >= 1.0 - 1e-12 { s / 100.0 } else { -1e6 },
            |_, _, _| 1e6,
        );
        let delta = 0.3;
        let a = solve_with_dividends(
            &lat,
            &Driver::zero(),
            &wide,
            &vec![delta * lat.dt(); lat.len()],
        )
        .unwrap();
        let b = solve_drbsde(&lat, &Driver::zero().shifted(delta), &wide).unwrap();
        for i in 0..lat.len() {
            assert!((a.y[i] - b.y[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn reflected_payoff_swaps_and_negates() {
        let lat = lattice(2);
        let p = PayoffSpec::constant(1.0, 3.0).reflected();
        let b = p.barriers(&lat).unwrap();
        assert_eq!(b.xi[0], -3.0);
        assert_eq!(b.zeta[0], -1.0);
        assert_eq!(b.zeta[lat.len() - 1], -1.0);
    }
}
