//! Executable forms of the a priori estimate between two reflected solutions
//! and of the comparison principle for implicit difference equations.

use serde::Serialize;

use crate::bsde::{PICARD_MAX_ITER, PICARD_TOL};
use crate::drbsde::DrbsdeSolution;
use crate::driver::Driver;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Relative slack on the admissibility inequalities, so that the canonical
/// choice survives rounding.
const PARAM_SLACK: f64 = 1e-12;

/// Weights of the a priori estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateParams {
    pub eta: f64,
    pub beta: f64,
    /// λ-constant of the first driver.
    pub c: f64,
}

impl EstimateParams {
    /// Requires `η > 0`, `β >= 3/η + 2C` and `η <= 1/C²`.
    pub fn new(eta: f64, beta: f64, c: f64) -> Result<Self> {
        if !(eta > 0.0 && beta > 0.0 && c >= 0.0) || !eta.is_finite() || !beta.is_finite() {
            return Err(Error::ParamsInvalid(format!(
                "eta={eta}, beta={beta}, C={c}"
            )));
        }
        let beta_min = 3.0 / eta + 2.0 * c;
        if beta < beta_min * (1.0 - PARAM_SLACK) {
            return Err(Error::ParamsInvalid(format!(
                "beta={beta} below 3/eta + 2C = {beta_min}"
            )));
        }
        if eta * c * c > 1.0 + PARAM_SLACK {
            return Err(Error::ParamsInvalid(format!("eta={eta} above 1/C^2")));
        }
        Ok(Self { eta, beta, c })
    }

    /// `η = 1/C²`, `β = 3C² + 2C` (`η = 1`, `β = 3` when `C = 0`).
    pub fn canonical(c: f64) -> Result<Self> {
        if c > 0.0 {
            Self::new(1.0 / (c * c), 3.0 * c * c + 2.0 * c, c)
        } else {
            Self::new(1.0, 3.0, 0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriReport {
    pub params: EstimateParams,
    /// Set when the estimate does not apply; nothing else is meaningful then.
    pub skipped: Option<String>,
    pub nodes_checked: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` over nodes with a positive right side.
    pub max_ratio: f64,
    /// `‖Ȳ‖²_β`.
    pub y_norm: f64,
    /// `‖f̄‖²_β`.
    pub f_norm: f64,
    pub y_norm_bound_ok: bool,
    /// `‖Z̄‖² + ‖K̄‖²_λ` and whether it satisfies its bound, when `η < 1/C²`.
    pub zk_norm: f64,
    pub zk_norm_bound_ok: Option<bool>,
}

impl AprioriReport {
    pub fn passed(&self) -> bool {
        self.skipped.is_some()
            || (self.violations == 0
                && self.y_norm_bound_ok
                && self.zk_norm_bound_ok.unwrap_or(true))
    }
}

/// Probability of reaching each node from the root.
pub fn node_probabilities(lattice: &Lattice) -> Vec<f64> {
    let mut prob = vec![0.0; lattice.len()];
    prob[0] = 1.0;
    for step in 0..lattice.n_steps() {
        for id in lattice.layer_ids(step) {
            for t in lattice.transitions(id) {
                prob[t.to.0] += prob[id.0] * t.p;
            }
        }
    }
    prob
}

/// Check `e^{βt}(Y¹ - Y²)² <= η E[Σ_{s>=t} e^{βs} f̄_s² dt | node]` at every
/// node, where `f̄ = d1 - d2` evaluated along the second solution at the
/// point where the scheme evaluates its driver.
pub fn apriori_check(
    lattice: &Lattice,
    sol1: &DrbsdeSolution,
    sol2: &DrbsdeSolution,
    d1: &Driver,
    d2: &Driver,
    ep: &EstimateParams,
) -> Result<AprioriReport> {
    let len = lattice.len();
    if sol1.y.len() != len || sol2.y.len() != len {
        return Err(Error::MismatchedInstances(format!(
            "solutions have {} and {} nodes, lattice has {len}",
            sol1.y.len(),
            sol2.y.len()
        )));
    }
    let mut report = AprioriReport {
        params: *ep,
        skipped: None,
        nodes_checked: 0,
        violations: 0,
        max_ratio: 0.0,
        y_norm: 0.0,
        f_norm: 0.0,
        y_norm_bound_ok: true,
        zk_norm: 0.0,
        zk_norm_bound_ok: None,
    };
    if sol1.xi != sol2.xi || sol1.zeta != sol2.zeta {
        report.skipped =
            Some("barriers differ; the estimate only bounds driver perturbations".into());
        return Ok(report);
    }
    let dt = lattice.dt();
    let n = lattice.n_steps();
    let beta = ep.beta;

    // Backward accumulation of the conditional right side.
    let mut rhs = vec![0.0; len];
    let mut fbar = vec![0.0; len];
    for step in (0..n).rev() {
        let w = (beta * lattice.time(step)).exp();
        for id in lattice.layer_ids(step) {
            let i = id.0;
            let ctx = lattice.context(id);
            let f = d1.eval(&ctx, sol2.c[i], sol2.z[i], sol2.k[i])
                - d2.eval(&ctx, sol2.c[i], sol2.z[i], sol2.k[i]);
            fbar[i] = f;
            let cont: f64 = lattice
                .transitions(id)
                .iter()
                .map(|t| t.p * rhs[t.to.0])
                .sum();
            rhs[i] = w * f * f * dt + cont;
        }
    }

    for id in lattice.ids() {
        let i = id.0;
        let step = lattice.node(id).step;
        let dy = sol1.y[i] - sol2.y[i];
        let lhs = (beta * lattice.time(step)).exp() * dy * dy;
        let bound = ep.eta * rhs[i];
        report.nodes_checked += 1;
        if lhs > bound * (1.0 + 1e-12) + 1e-300 {
            report.violations += 1;
        }
        if bound > 0.0 {
            report.max_ratio = report.max_ratio.max(lhs / bound);
        }
    }

    let prob = node_probabilities(lattice);
    for step in 0..n {
        let w = (beta * lattice.time(step)).exp();
        for id in lattice.layer_ids(step) {
            let i = id.0;
            let dy = sol1.y[i] - sol2.y[i];
            let dz = sol1.z[i] - sol2.z[i];
            let dk = sol1.k[i] - sol2.k[i];
            report.y_norm += prob[i] * w * dy * dy * dt;
            report.zk_norm +=
                prob[i] * w * (dz * dz * lattice.var_dw(id) + dk * dk * lattice.var_dm(id));
        }
    }
    report.f_norm = rhs[0];
    let horizon = lattice.params().horizon;
    report.y_norm_bound_ok =
        report.y_norm <= horizon * ep.eta * report.f_norm * (1.0 + 1e-12) + 1e-300;
    let ec2 = ep.eta * ep.c * ep.c;
    if ec2 < 1.0 - PARAM_SLACK {
        let bound = ep.eta / (1.0 - ec2) * report.f_norm;
        report.zk_norm_bound_ok = Some(report.zk_norm <= bound * (1.0 + 1e-12) + 1e-300);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeReport {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub min_gap: f64,
    /// First step with `y¹ < y²`, if any.
    pub first_violation: Option<usize>,
    /// With a strict initial gap, whether it stays strict.
    pub strict_preserved: Option<bool>,
}

fn implicit_ode_step(
    b: &dyn Fn(f64, f64) -> f64,
    t: f64,
    base: f64,
    dt: f64,
    step: usize,
) -> Result<f64> {
    let mut y = base;
    for _ in 0..PICARD_MAX_ITER {
        let next = base + b(t, y) * dt;
        if (next - y).abs() < PICARD_TOL * next.abs().max(1.0) {
            return Ok(next);
        }
        y = next;
    }
    Err(Error::PreconditionViolated {
        step,
        reason: "implicit step did not converge".into(),
    })
}

/// Step `y_{k+1} = y_k + b(t_{k+1}, y_{k+1}) dt + Δf_k` for both equations
/// and compare.
///
/// Preconditions: `x1 >= x2`, `L dt < 1`, `Δf¹_k - Δf²_k >= 0` and
/// `b1(t, y²_t) >= b2(t, y²_t)` along the second solution.
#[allow(clippy::too_many_arguments)]
pub fn ode_compare(
    b1: &dyn Fn(f64, f64) -> f64,
    b2: &dyn Fn(f64, f64) -> f64,
    lipschitz: f64,
    dt: f64,
    x1: f64,
    x2: f64,
    df1: &[f64],
    df2: &[f64],
) -> Result<OdeReport> {
    let violated = |step, reason: &str| Error::PreconditionViolated {
        step,
        reason: reason.into(),
    };
    if !(dt > 0.0) || !(lipschitz * dt < 1.0) {
        return Err(violated(0, "Lipschitz constant times dt must be below 1"));
    }
    if x1 < x2 {
        return Err(violated(0, "x1 must be >= x2"));
    }
    if df1.len() != df2.len() {
        return Err(violated(0, "increment sequences differ in length"));
    }
    if let Some(k) = (0..df1.len()).find(|&k| df1[k] - df2[k] < 0.0) {
        return Err(violated(k, "increment difference is negative"));
    }
    let mut y1 = vec![x1];
    let mut y2 = vec![x2];
    for k in 0..df1.len() {
        let t = (k + 1) as f64 * dt;
        let n2 = implicit_ode_step(b2, t, y2[k] + df2[k], dt, k + 1)?;
        if b1(t, n2) < b2(t, n2) {
            return Err(violated(k + 1, "b1 < b2 along the second solution"));
        }
        let n1 = implicit_ode_step(b1, t, y1[k] + df1[k], dt, k + 1)?;
        y1.push(n1);
        y2.push(n2);
    }
    let gaps: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a - b).collect();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let first_violation = gaps.iter().position(|&g| g < 0.0);
    let strict_preserved = (x1 > x2).then(|| gaps.iter().all(|&g| g > 0.0));
    Ok(OdeReport {
        y1,
        y2,
        min_gap,
        first_violation,
        strict_preserved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drbsde::{solve_drbsde, PayoffSpec};
    use crate::driver::{make_builtin_driver, DriverKind};
    use crate::lattice::{build_lattice, LatticeParams, MarketParams};

    fn market() -> MarketParams {
        MarketParams {
            r: 0.03.into(),
            mu1: 0.07,
            sigma1: 0.25,
            mu2: 0.06,
            sigma2: 0.3,
            lambda_bar: 0.25.into(),
            s1_0: 100.0,
            s2_0: 50.0,
        }
    }

    fn payoff() -> PayoffSpec {
        PayoffSpec::new(
            |_, s, _| (s - 100.0).max(0.0),
            |_, s, _| (s - 100.0).max(0.0) + 1.5,
        )
    }

    #[test]
    fn params_admissibility() {
        assert!(EstimateParams::canonical(0.7).is_ok());
        assert!(EstimateParams::canonical(13.0).is_ok());
        assert!(EstimateParams::canonical(0.0).is_ok());
        assert!(EstimateParams::new(1.0, 1.0, 0.5).is_err());
        assert!(EstimateParams::new(10.0, 100.0, 1.0).is_err());
        assert!(EstimateParams::new(-1.0, 100.0, 1.0).is_err());
    }

    #[test]
    fn identical_drivers_give_zero() {
        let lat = build_lattice(LatticeParams::new(1.0, 5), market()).unwrap();
        let d = make_builtin_driver(&DriverKind::Perfect, lat.market()).unwrap();
        let s = solve_drbsde(&lat, &d, &payoff()).unwrap();
        let ep = EstimateParams::canonical(d.lambda_constant()).unwrap();
        let rep = apriori_check(&lat, &s, &s, &d, &d, &ep).unwrap();
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.f_norm, 0.0);
        assert!(rep.passed());
    }

    #[test]
    fn shifted_driver_within_bound() {
        let lat = build_lattice(LatticeParams::new(1.0, 6), market()).unwrap();
        let d1 = make_builtin_driver(&DriverKind::BorrowLend { borrow_rate: 0.06 }, lat.market())
            .unwrap();
        let d2 = d1.shifted(0.4);
        let s1 = solve_drbsde(&lat, &d1, &payoff()).unwrap();
        let s2 = solve_drbsde(&lat, &d2, &payoff()).unwrap();
        let ep = EstimateParams::canonical(d1.lambda_constant()).unwrap();
        let rep = apriori_check(&lat, &s1, &s2, &d1, &d2, &ep).unwrap();
        assert!(rep.f_norm > 0.0);
        assert_eq!(rep.violations, 0, "{rep:?}");
        assert!(rep.passed());
    }

    #[test]
    fn barrier_perturbation_is_skipped() {
        let lat = build_lattice(LatticeParams::new(1.0, 3), market()).unwrap();
        let d = make_builtin_driver(&DriverKind::Perfect, lat.market()).unwrap();
        let s1 = solve_drbsde(&lat, &d, &payoff()).unwrap();
        let other = PayoffSpec::new(
            |_, s, _| (s - 95.0).max(0.0),
            |_, s, _| (s - 95.0).max(0.0) + 1.5,
        );
        let s2 = solve_drbsde(&lat, &d, &other).unwrap();
        let ep = EstimateParams::canonical(d.lambda_constant()).unwrap();
        let rep = apriori_check(&lat, &s1, &s2, &d, &d, &ep).unwrap();
        assert!(rep.skipped.is_some());
        let small = build_lattice(LatticeParams::new(1.0, 2), market()).unwrap();
        assert!(matches!(
            apriori_check(&small, &s1, &s2, &d, &d, &ep),
            Err(Error::MismatchedInstances(_))
        ));
    }

    #[test]
    fn ode_examples() {
        let b = |_: f64, y: f64| -0.5 * y;
        let df = vec![0.1; 10];
        let rep = ode_compare(&b, &b, 0.5, 0.1, 1.0, 1.0, &df, &df).unwrap();
        assert_eq!(rep.y1, rep.y2);

        let zero = |_: f64, _: f64| 0.0;
        let delta = 0.25;
        let df1 = vec![delta; 8];
        let df2 = vec![0.0; 8];
        let rep = ode_compare(&zero, &zero, 0.0, 0.1, 2.0, 1.5, &df1, &df2).unwrap();
        for k in 0..=8 {
            assert!((rep.y1[k] - rep.y2[k] - (0.5 + k as f64 * delta)).abs() < 1e-14);
        }
        assert_eq!(rep.strict_preserved, Some(true));
    }

    #[test]
    fn ode_preconditions() {
        let b = |_: f64, y: f64| y;
        let df = vec![0.0; 3];
        assert!(matches!(
            ode_compare(&b, &b, 1.0, 0.1, 0.0, 1.0, &df, &df),
            Err(Error::PreconditionViolated { step: 0, .. })
        ));
        assert!(ode_compare(&b, &b, 20.0, 0.1, 1.0, 0.0, &df, &df).is_err());
        let neg = vec![0.0, -1.0, 0.0];
        assert!(matches!(
            ode_compare(&b, &b, 1.0, 0.1, 1.0, 0.0, &neg, &df),
            Err(Error::PreconditionViolated { step: 1, .. })
        ));
    }
}
