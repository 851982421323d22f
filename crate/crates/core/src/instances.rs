//! Seeded generator of small admissible instances for property checks.
//!
//! Every generated instance has a driver whose one-step backward map is
//! monotone on its lattice (see [`Lattice::is_monotone_for`]) and satisfies
//! the Royer condition with a margin, so comparison-type statements hold
//! exactly on the lattice.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::drbsde::PayoffSpec;
use crate::driver::{
    builtin_gamma_bound, default_ambiguity_family, make_builtin_driver, AmbiguityFamily, Driver,
    DriverKind, Nu,
};
use crate::lattice::{
    build_lattice, DefaultStatus, Lattice, LatticeParams, MarketParams, Schedule,
};

/// Required distance of `γ` above `-1`.
pub const ROYER_MARGIN: f64 = 0.02;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Affine barriers `ξ = a + b S¹ + c 1{default}`, `ζ = ξ + δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePayoff {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    /// Use the positive part of the affine form.
    pub nonneg: bool,
}

impl AffinePayoff {
    pub fn xi(&self, s1: f64, status: DefaultStatus) -> f64 {
        let d = if status == DefaultStatus::Defaulted {
            1.0
        } else {
            0.0
        };
        let v = self.a + self.b * s1 + self.c * d;
        if self.nonneg {
            v.max(0.0)
        } else {
            v
        }
    }

    pub fn spec(&self) -> PayoffSpec {
        let p = *self;
        PayoffSpec::new(
            move |_, s, st| p.xi(s, st),
            move |_, s, st| p.xi(s, st) + p.delta,
        )
    }

    /// Same barriers shifted by `(dx, dz)`, keeping `ξ <= ζ` when
    /// `dx <= delta + dz`.
    pub fn shifted_spec(&self, dx: f64, dz: f64) -> PayoffSpec {
        let p = *self;
        PayoffSpec::new(
            move |_, s, st| p.xi(s, st) + dx,
            move |_, s, st| p.xi(s, st) + p.delta + dz,
        )
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub lattice: Lattice,
    pub kind: DriverKind,
    pub driver: Driver,
    pub payoff: AffinePayoff,
}

impl Instance {
    pub fn spec(&self) -> PayoffSpec {
        self.payoff.spec()
    }
}

/// Knobs of [`random_instance`].
#[derive(Debug, Clone)]
pub struct InstanceConfig {
    pub min_steps: usize,
    pub max_steps: usize,
    pub kinds: Vec<&'static str>,
    pub nonneg_payoff: bool,
    /// Probability of a zero intensity.
    pub zero_intensity: f64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self {
            min_steps: 1,
            max_steps: 3,
            kinds: vec!["zero", "perfect", "borrow_lend", "tax"],
            nonneg_payoff: false,
            zero_intensity: 0.2,
        }
    }
}

impl InstanceConfig {
    pub fn steps(min_steps: usize, max_steps: usize) -> Self {
        Self {
            min_steps,
            max_steps,
            ..Self::default()
        }
    }

    pub fn kinds(mut self, kinds: &[&'static str]) -> Self {
        self.kinds = kinds.to_vec();
        self
    }

    pub fn nonneg(mut self) -> Self {
        self.nonneg_payoff = true;
        self
    }
}

pub fn random_market<R: Rng>(rng: &mut R, zero_intensity: f64) -> MarketParams {
    let r = rng.gen_range(0.0..0.05);
    let sigma1 = rng.gen_range(0.15..0.4);
    let sigma2 = rng.gen_range(0.15..0.45);
    let theta1 = rng.gen_range(-0.4..0.4);
    let lambda_bar = if rng.gen_bool(zero_intensity) {
        Schedule::Constant(0.0)
    } else if rng.gen_bool(0.25) {
        Schedule::Piecewise {
            knots: vec![0.5],
            values: vec![rng.gen_range(0.05..0.6), rng.gen_range(0.05..0.6)],
        }
    } else {
        Schedule::Constant(rng.gen_range(0.05..0.6))
    };
    let lambda_ref = lambda_bar.values()[0];
    let theta2 = rng.gen_range(-0.6..0.6);
    MarketParams {
        r: Schedule::Constant(r),
        mu1: r + theta1 * sigma1,
        sigma1,
        mu2: sigma2 * theta1 + r - theta2 * lambda_ref,
        sigma2,
        lambda_bar,
        s1_0: 1.0,
        s2_0: 1.0,
    }
}

pub fn random_kind<R: Rng>(rng: &mut R, kinds: &[&str], mp: &MarketParams) -> DriverKind {
    let r = mp.r.values()[0];
    match kinds[rng.gen_range(0..kinds.len())] {
        "zero" => DriverKind::Zero,
        "perfect" => DriverKind::Perfect,
        "borrow_lend" => DriverKind::BorrowLend {
            borrow_rate: r + rng.gen_range(0.0..0.15),
        },
        "tax" => DriverKind::Tax {
            rho: rng.gen_range(0.02..0.4),
        },
        other => panic!("unknown driver kind {other}"),
    }
}

pub fn random_payoff<R: Rng>(rng: &mut R, nonneg: bool) -> AffinePayoff {
    AffinePayoff {
        a: rng.gen_range(-2.0..2.0),
        b: rng.gen_range(-2.0..2.0),
        c: rng.gen_range(-2.0..2.0),
        delta: rng.gen_range(0.1..1.0),
        nonneg,
    }
}

/// Whether a driver with λ-constant `c` and Royer bound `gamma` gives a
/// monotone scheme on `lattice`.
pub fn admissible(lattice: &Lattice, c: f64, gamma: Option<f64>) -> bool {
    lattice.is_monotone_for(c) && gamma.is_none_or(|g| g > -1.0 + ROYER_MARGIN)
}

/// Draw until an admissible instance appears.
pub fn random_instance<R: Rng>(rng: &mut R, cfg: &InstanceConfig) -> Instance {
    loop {
        let n = rng.gen_range(cfg.min_steps..=cfg.max_steps);
        let horizon = rng.gen_range(0.25..1.0);
        let mp = random_market(rng, cfg.zero_intensity);
        let Ok(lattice) = build_lattice(LatticeParams::new(horizon, n), mp) else {
            continue;
        };
        let kind = random_kind(rng, &cfg.kinds, lattice.market());
        let Ok(driver) = make_builtin_driver(&kind, lattice.market()) else {
            continue;
        };
        let gamma = builtin_gamma_bound(&kind, lattice.market());
        if !admissible(&lattice, driver.lambda_constant(), gamma) {
            continue;
        }
        let payoff = random_payoff(rng, cfg.nonneg_payoff);
        return Instance {
            lattice,
            kind,
            driver,
            payoff,
        };
    }
}

/// A random family of 2 to `max_size` admissible members on `lattice`:
/// either intensity ambiguity around a builtin base driver or builtins with
/// different spread parameters.
pub fn random_family<R: Rng>(rng: &mut R, lattice: &Lattice, max_size: usize) -> AmbiguityFamily {
    let mp = lattice.market();
    let lambda_max = mp.lambda_bar.values().iter().copied().fold(0.0, f64::max);
    loop {
        let m = rng.gen_range(2..=max_size.max(2));
        if rng.gen_bool(0.5) && lambda_max > 0.0 {
            let kind = random_kind(rng, &["perfect", "borrow_lend", "tax"], mp);
            let Ok(base) = make_builtin_driver(&kind, mp) else {
                continue;
            };
            let Some(gamma) = builtin_gamma_bound(&kind, mp) else {
                continue;
            };
            let nus: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..0.8)).collect();
            let lo = nus.iter().copied().fold(f64::INFINITY, f64::min);
            let grid: Vec<f64> = (0..m).map(|i| i as f64).collect();
            let Ok(nu) = Nu::table(&grid, &nus) else {
                continue;
            };
            let Ok(fam) = default_ambiguity_family(&base, nu, grid, lambda_max) else {
                continue;
            };
            if admissible(lattice, fam.lambda_constant(), Some(gamma + lo)) {
                return fam;
            }
        } else {
            let kinds: Vec<DriverKind> = (0..m)
                .map(|_| random_kind(rng, &["perfect", "borrow_lend", "tax"], mp))
                .collect();
            let Ok(drivers) = kinds
                .iter()
                .map(|k| make_builtin_driver(k, mp))
                .collect::<crate::Result<Vec<_>>>()
            else {
                continue;
            };
            let c = drivers
                .iter()
                .map(Driver::lambda_constant)
                .fold(0.0, f64::max);
            let gamma = kinds
                .iter()
                .filter_map(|k| builtin_gamma_bound(k, mp))
                .fold(None, |acc: Option<f64>, g| {
                    Some(acc.map_or(g, |a| a.min(g)))
                });
            if admissible(lattice, c, gamma) {
                return AmbiguityFamily::from_drivers("builtins", drivers);
            }
        }
    }
}
