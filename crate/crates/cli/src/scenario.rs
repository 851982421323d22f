//! Scenario documents: one JSON object describing a lattice, a market, a
//! driver (or a family of drivers), barrier formulas and run options.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use gamehedge::driver::{builtin_gamma_bound, make_builtin_driver};
use gamehedge::{
    build_lattice, default_ambiguity_family, AmbiguityFamily, DefaultStatus, Driver, DriverKind,
    Error, Lattice, LatticeParams, MarketParams, Nu, PayoffSpec, Result,
};

use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// Maturity in years.
    pub horizon: f64,
    pub n_steps: usize,
}

/// A builtin driver, or intensity ambiguity `g^α = f + λ ν(α) k` around one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverSpec {
    Zero,
    Perfect,
    BorrowLend {
        #[serde(rename = "R")]
        borrow_rate: f64,
    },
    Tax {
        rho: f64,
    },
    Ambiguity {
        base: DriverKind,
        grid: Vec<f64>,
        /// `ν` at each grid point.
        nu: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffFormulas {
    /// Lower barrier (holder's exercise payoff).
    pub xi: String,
    /// Upper barrier (issuer's cancellation payoff).
    pub zeta: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    /// Cancellation slack for the hedge; zero stops at the first touch.
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub x0_override: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_oracle_steps")]
    pub max_oracle_steps: usize,
}

fn default_oracle_steps() -> usize {
    gamehedge::drbsde::MAX_DYNKIN_STEPS
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            x0_override: None,
            seed: 0,
            max_oracle_steps: default_oracle_steps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub lattice: LatticeSpec,
    pub market: MarketParams,
    pub driver: DriverSpec,
    pub payoff: PayoffFormulas,
    #[serde(default)]
    pub options: RunOptions,
}

/// Everything a command needs, built and checked.
pub struct Built {
    pub lattice: Lattice,
    /// The driver itself, or the sup-driver of the family.
    pub driver: Driver,
    pub family: Option<AmbiguityFamily>,
    /// Exact Royer bound of the builtin driver, when known.
    pub gamma_bound: Option<f64>,
    pub payoff: PayoffSpec,
}

impl Scenario {
    /// Parse a document and canonicalise its formulas.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
        s.payoff.xi = s.payoff.xi.parse::<Expr>()?.to_string();
        s.payoff.zeta = s.payoff.zeta.parse::<Expr>()?.to_string();
        Ok(s)
    }

    /// Canonical serialization; parsing it gives back `self`.
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn build(&self) -> Result<Built> {
        let lp = LatticeParams::new(self.lattice.horizon, self.lattice.n_steps);
        let lattice = build_lattice(lp, self.market.clone())?;
        let mp = lattice.market();
        let (driver, family, gamma_bound) = match &self.driver {
            DriverSpec::Ambiguity { base, grid, nu } => {
                let f = make_builtin_driver(base, mp)?;
                let nu_table = Nu::table(grid, nu)?;
                let lambda_max = mp.lambda_bar.values().iter().copied().fold(0.0, f64::max);
                let fam = default_ambiguity_family(&f, nu_table, grid.clone(), lambda_max)?;
                let lo = nu.iter().copied().fold(f64::INFINITY, f64::min);
                let gamma = builtin_gamma_bound(base, mp).map(|g| g + lo);
                (gamehedge::sup_driver(&fam)?, Some(fam), gamma)
            }
            other => {
                let kind = other.builtin().expect("non-ambiguity spec is builtin");
                (
                    make_builtin_driver(&kind, mp)?,
                    None,
                    builtin_gamma_bound(&kind, mp),
                )
            }
        };
        let xi: Arc<Expr> = Arc::new(self.payoff.xi.parse()?);
        let zeta: Arc<Expr> = Arc::new(self.payoff.zeta.parse()?);
        let payoff = PayoffSpec::new(
            move |t, s, st| xi.eval(t, s, st == DefaultStatus::Defaulted),
            move |t, s, st| zeta.eval(t, s, st == DefaultStatus::Defaulted),
        );
        // Surfaces barrier problems before any solve.
        payoff.barriers(&lattice)?;
        Ok(Built {
            lattice,
            driver,
            family,
            gamma_bound,
            payoff,
        })
    }
}

impl DriverSpec {
    pub fn builtin(&self) -> Option<DriverKind> {
        Some(match *self {
            DriverSpec::Zero => DriverKind::Zero,
            DriverSpec::Perfect => DriverKind::Perfect,
            DriverSpec::BorrowLend { borrow_rate } => DriverKind::BorrowLend { borrow_rate },
            DriverSpec::Tax { rho } => DriverKind::Tax { rho },
            DriverSpec::Ambiguity { .. } => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "lattice": {"horizon": 1.0, "n_steps": 3},
        "market": {"r": 0.02, "mu1": 0.06, "sigma1": 0.25, "mu2": 0.05, "sigma2": 0.3,
                   "lambda_bar": {"knots": [0.5], "values": [0.2, 0.4]},
                   "s1_0": 100, "s2_0": 50},
        "driver": {"kind": "ambiguity", "base": {"kind": "borrow_lend", "R": 0.05},
                   "grid": [0, 1], "nu": [-0.2, 0.3]},
        "payoff": {"xi": "pos(S1-100)*(1-0.5*defaulted)", "zeta": "pos(S1 - 100) + 2"}
    }"#;

    #[test]
    fn parse_build_and_round_trip() {
        let s = Scenario::parse(DOC).unwrap();
        assert_eq!(s.payoff.xi, "(pos((S1 - 100)) * (1 - (0.5 * defaulted)))");
        assert_eq!(s.options, RunOptions::default());
        let canon = s.to_canonical();
        let again = Scenario::parse(&canon).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.to_canonical(), canon);
        let b = s.build().unwrap();
        assert_eq!(b.family.as_ref().map(|f| f.len()), Some(2));
        assert_eq!(b.lattice.n_steps(), 3);
    }

    #[test]
    fn rejects_bad_documents() {
        let bad_expr = DOC.replace("pos(S1 - 100) + 2", "exp(S1)");
        assert!(matches!(Scenario::parse(&bad_expr), Err(Error::Parse(_))));
        let unknown = DOC.replace("\"n_steps\": 3", "\"n_steps\": 3, \"extra\": 1");
        assert!(matches!(Scenario::parse(&unknown), Err(Error::Parse(_))));
        let crossed = DOC.replace("pos(S1 - 100) + 2", "pos(S1 - 100) - 1");
        assert!(matches!(
            Scenario::parse(&crossed).unwrap().build(),
            Err(Error::BarrierViolation { .. })
        ));
    }
}
