//! Command dispatch, output files and exit codes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use gamehedge::bsde::{layer_values, solve_bsde};
use gamehedge::drbsde::{dynkin_bruteforce, solve_drbsde, DrbsdeSolution, MAX_DYNKIN_STEPS};
use gamehedge::driver::{audit_driver_report, make_builtin_driver, SampleSpec};
use gamehedge::hedging::{buyer_superhedge, node_label, seller_superhedge, StoppingKind, Strategy};
use gamehedge::instances::rng;
use gamehedge::robust::{robust_certificate, robust_seller_price_unaudited};
use gamehedge::validation::{apriori_check, EstimateParams};
use gamehedge::{AmbiguityFamily, DriverKind, Error, Lattice};

use crate::scenario::{Built, Scenario};

/// Root-price agreement required by `oracle`.
pub const ORACLE_TOL: f64 = 1e-10;
/// Slack allowed in the comparison checks of `verify`.
pub const COMPARISON_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Price,
    Hedge,
    Robust,
    Verify,
    Oracle,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::Hedge => "hedge",
            Command::Robust => "robust",
            Command::Verify => "verify",
            Command::Oracle => "oracle",
        }
    }
}

/// Flags that override the scenario's run options.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub out: PathBuf,
    pub epsilon: Option<f64>,
    pub x0_override: Option<f64>,
    pub seed: Option<u64>,
    pub max_oracle_steps: Option<usize>,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Input = 1,
    Solver = 2,
    Verification = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn to_json(&self) -> String {
        json!({ "error": self.kind, "exit_code": self.exit as i32, "message": self.message })
            .to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (exit, kind) = match &e {
            Error::Parse(_) => (Exit::Input, "parse"),
            Error::AuditFailure(_) => (Exit::Input, "audit"),
            Error::InvalidParams(_)
            | Error::SingularInversion
            | Error::EmptyGrid
            | Error::NuOutOfRange(_)
            | Error::ParamsInvalid(_)
            | Error::BarrierViolation { .. }
            | Error::NegativeDividend { .. } => (Exit::Input, "invalid_scenario"),
            _ => (Exit::Solver, "solver"),
        };
        Failure {
            exit,
            kind,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error, exit: Exit) -> Failure {
    Failure {
        exit,
        kind: "io",
        message: format!("{}: {e}", path.display()),
    }
}

/// Read, build and run one command; artifacts go to `flags.out`.
pub fn run(command: Command, scenario: &Path, flags: &Flags) -> Result<Exit, Failure> {
    let text = fs::read_to_string(scenario).map_err(|e| io_failure(scenario, e, Exit::Input))?;
    let mut sc = Scenario::parse(&text)?;
    if let Some(e) = flags.epsilon {
        sc.options.epsilon = e;
    }
    if flags.x0_override.is_some() {
        sc.options.x0_override = flags.x0_override;
    }
    if let Some(s) = flags.seed {
        sc.options.seed = s;
    }
    if let Some(m) = flags.max_oracle_steps {
        sc.options.max_oracle_steps = m;
    }
    let built = sc.build()?;
    let audits = audit(&built)?;

    let mut out = Outputs::new(&flags.out)?;
    let verdict = match command {
        Command::Price => price(&sc, &built, &mut out)?,
        Command::Hedge => hedge(&sc, &built, &mut out)?,
        Command::Robust => robust(&built, &mut out)?,
        Command::Verify => verify(&sc, &built, &mut out)?,
        Command::Oracle => oracle(&sc, &built, &mut out)?,
    };
    let passed = verdict.passed;
    let mut report = json!({
        "command": command.as_str(),
        "scenario": serde_json::to_value(&sc).expect("scenario serializes"),
        "audits": audits,
        "passed": passed,
    });
    report
        .as_object_mut()
        .expect("object")
        .extend(verdict.fields);
    out.write_json("report.json", &report)?;
    Ok(if passed { Exit::Ok } else { Exit::Verification })
}

/// Audit the driver, or every member of the family. A failed audit stops the run.
fn audit(b: &Built) -> Result<Value, Failure> {
    let spec = SampleSpec::default();
    let drivers = match &b.family {
        Some(fam) => fam.members(),
        None => vec![b.driver.clone()],
    };
    let mut reports = Vec::with_capacity(drivers.len());
    for d in &drivers {
        let (rep, violation) = audit_driver_report(d, &b.lattice, &spec);
        if let Some(v) = violation {
            return Err(Error::AuditFailure(Box::new(v)).into());
        }
        reports.push(rep);
    }
    Ok(serde_json::to_value(reports).expect("reports serialize"))
}

struct Verdict {
    passed: bool,
    fields: serde_json::Map<String, Value>,
}

impl Verdict {
    fn new(passed: bool, fields: Value) -> Self {
        match fields {
            Value::Object(fields) => Self { passed, fields },
            _ => unreachable!("verdict fields are an object"),
        }
    }
}

struct Outputs {
    dir: PathBuf,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e, Exit::Solver))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| io_failure(&path, e, Exit::Solver))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(v).expect("report serializes");
        s.push('\n');
        self.write(name, &s)
    }
}

/// Value surface as CSV, one row per node in lattice order.
pub fn price_csv(lattice: &Lattice, sol: &DrbsdeSolution) -> String {
    let mut s = String::from("step,j,default_status,Y,Z,K,dA,dA_prime\n");
    for id in lattice.ids() {
        let (step, j, st) = node_label(lattice, id);
        let i = id.0;
        let _ = writeln!(
            s,
            "{step},{j},{},{},{},{},{},{}",
            st.as_str(),
            sol.y[i],
            sol.z[i],
            sol.k[i],
            sol.da[i],
            sol.da_prime[i]
        );
    }
    s
}

/// Portfolio amounts per non-terminal node.
pub fn strategy_csv(lattice: &Lattice, strat: &Strategy) -> String {
    let mut s = String::from("step,j,default_status,phi1,phi2\n");
    for id in lattice.ids().filter(|&id| !lattice.is_terminal(id)) {
        let (step, j, st) = node_label(lattice, id);
        let _ = writeln!(
            s,
            "{step},{j},{},{},{}",
            st.as_str(),
            strat.phi1[id.0],
            strat.phi2[id.0]
        );
    }
    s
}

fn stopping_csv(lattice: &Lattice, sol: &DrbsdeSolution, stop: &[bool]) -> String {
    let mut s = String::from("step,j,default_status,stop,Y,xi,zeta\n");
    for id in lattice.ids() {
        let (step, j, st) = node_label(lattice, id);
        let i = id.0;
        let _ = writeln!(
            s,
            "{step},{j},{},{},{},{},{}",
            st.as_str(),
            stop[i] as u8,
            sol.y[i],
            sol.xi[i],
            sol.zeta[i]
        );
    }
    s
}

fn price(_sc: &Scenario, b: &Built, out: &mut Outputs) -> Result<Verdict, Failure> {
    let sol = solve_drbsde(&b.lattice, &b.driver, &b.payoff)?;
    let buyer = buyer_superhedge(&b.lattice, &b.driver, &b.payoff)?;
    out.write("price.csv", &price_csv(&b.lattice, &sol))?;
    Ok(Verdict::new(
        true,
        json!({
            "seller_price": sol.y0(),
            "buyer_price": buyer.price,
            "max_picard_iterations": sol.iterations.iter().copied().max().unwrap_or(0),
        }),
    ))
}

fn stopping_kind(epsilon: f64) -> StoppingKind {
    if epsilon > 0.0 {
        StoppingKind::SigmaEps { epsilon }
    } else {
        StoppingKind::SigmaStar
    }
}

fn hedge(sc: &Scenario, b: &Built, out: &mut Outputs) -> Result<Verdict, Failure> {
    let sol = solve_drbsde(&b.lattice, &b.driver, &b.payoff)?;
    let kind = stopping_kind(sc.options.epsilon);
    let (strat, rule, report) =
        seller_superhedge(&b.lattice, &b.driver, &sol, kind, sc.options.x0_override)?;
    out.write("price.csv", &price_csv(&b.lattice, &sol))?;
    out.write("strategy.csv", &strategy_csv(&b.lattice, &strat))?;
    out.write("stopping.csv", &stopping_csv(&b.lattice, &sol, &rule.stop))?;
    Ok(Verdict::new(
        report.certified(),
        json!({ "seller_price": sol.y0(), "stopping": kind, "wealth": report }),
    ))
}

fn robust(b: &Built, out: &mut Outputs) -> Result<Verdict, Failure> {
    let fam = match &b.family {
        Some(f) => f.clone(),
        None => AmbiguityFamily::from_drivers("singleton", vec![b.driver.clone()]),
    };
    let res = robust_seller_price_unaudited(&b.lattice, &fam, &b.payoff)?;
    let certs = robust_certificate(&b.lattice, &fam, &res, StoppingKind::SigmaStar)?;
    out.write("price.csv", &price_csv(&b.lattice, &res.solution))?;
    let strat = gamehedge::hedging::extract_strategy(&b.lattice, &res.solution)?;
    out.write("strategy.csv", &strategy_csv(&b.lattice, &strat))?;

    let mut worst = String::from("step,j,default_status,alpha_index,alpha\n");
    for id in b.lattice.ids().filter(|&id| !b.lattice.is_terminal(id)) {
        let (step, j, st) = node_label(&b.lattice, id);
        let a = res.worst_alpha[id.0];
        let _ = writeln!(worst, "{step},{j},{},{a},{}", st.as_str(), fam.grid()[a]);
    }
    out.write("worst_alpha.csv", &worst)?;

    let dominates = res.v0_via_g >= res.v0_via_grid - COMPARISON_TOL;
    let frozen_ok = (res.v0_via_g - res.v0_frozen).abs() < ORACLE_TOL;
    let certified = certs.iter().all(|r| r.certified());
    let per_alpha: Vec<Value> = fam
        .grid()
        .iter()
        .zip(&res.per_alpha)
        .map(|(a, v)| json!({ "alpha": a, "price": v }))
        .collect();
    let certificates: Vec<Value> = fam
        .grid()
        .iter()
        .zip(&certs)
        .map(|(a, r)| json!({ "alpha": a, "wealth": r }))
        .collect();
    Ok(Verdict::new(
        dominates && frozen_ok && certified,
        json!({
            "v0_via_G": res.v0_via_g,
            "v0_via_grid": res.v0_via_grid,
            "v0_frozen": res.v0_frozen,
            "per_alpha": per_alpha,
            "tied_nodes": res.ties,
            "certificates": certificates,
        }),
    ))
}

fn count_above(lo: &[f64], hi: &[f64]) -> usize {
    lo.iter()
        .zip(hi)
        .filter(|(a, b)| **a > **b + COMPARISON_TOL)
        .count()
}

fn verify(sc: &Scenario, b: &Built, out: &mut Outputs) -> Result<Verdict, Failure> {
    let lat = &b.lattice;
    let d = &b.driver;
    let sol = solve_drbsde(lat, d, &b.payoff)?;
    let bars = sol.barriers();
    let mut r = rng(sc.options.seed);
    let shift = r.gen_range(0.01..0.5);
    let bump = r.gen_range(0.01..0.5);

    // Skorokhod conditions and barrier bounds, exactly.
    let skorokhod = (0..sol.y.len())
        .filter(|&i| {
            sol.da[i] * sol.da_prime[i] != 0.0
                || (sol.da[i] > 0.0 && sol.y[i] != sol.xi[i])
                || (sol.da_prime[i] > 0.0 && sol.y[i] != sol.zeta[i])
                || sol.y[i] < sol.xi[i]
                || sol.y[i] > sol.zeta[i]
        })
        .count();

    // Driver monotonicity against a nonnegative shift.
    let up = d.shifted(shift);
    let sol_up = solve_drbsde(lat, &up, &b.payoff)?;
    let driver_mono = count_above(&sol.y, &sol_up.y);

    // Terminal monotonicity of the non-reflected equation.
    let term = layer_values(lat, lat.n_steps(), |id| bars.xi[id.0]);
    let raised: Vec<f64> = term.iter().map(|v| v + bump).collect();
    let terminal_mono = count_above(
        &solve_bsde(lat, d, &term)?.y,
        &solve_bsde(lat, d, &raised)?.y,
    );

    // Raising the upper barrier cannot lower the price.
    let zeta_up: Vec<f64> = bars.zeta.iter().map(|v| v + bump).collect();
    let wider = gamehedge::drbsde::solve_reflected(
        lat,
        d,
        &gamehedge::Barriers {
            xi: bars.xi.clone(),
            zeta: zeta_up,
        },
        None,
    )?;
    let barrier_mono = count_above(&sol.y, &wider.y);

    // A priori estimate against the perfect-market driver.
    let other = make_builtin_driver(&DriverKind::Perfect, lat.market())?;
    let apriori = if lat.is_monotone_for(other.lambda_constant()) {
        let sol2 = solve_drbsde(lat, &other, &b.payoff)?;
        let ep = EstimateParams::canonical(d.lambda_constant())?;
        Some(apriori_check(lat, &sol, &sol2, d, &other, &ep)?)
    } else {
        None
    };
    let apriori_ok = apriori.as_ref().is_none_or(|a| a.passed());

    // Royer condition from the exact bound, when the driver declares one.
    let royer_ok = b.gamma_bound.is_none_or(|g| g > -1.0);
    let monotone_scheme = lat.is_monotone_for(d.lambda_constant());

    let passed = skorokhod == 0
        && driver_mono == 0
        && terminal_mono == 0
        && barrier_mono == 0
        && apriori_ok
        && royer_ok;
    out.write("price.csv", &price_csv(lat, &sol))?;
    Ok(Verdict::new(
        passed,
        json!({
            "seller_price": sol.y0(),
            "monotone_scheme": monotone_scheme,
            "royer_bound": b.gamma_bound,
            "comparison": {
                "seed": sc.options.seed,
                "driver_shift": shift,
                "barrier_bump": bump,
                "skorokhod_violations": skorokhod,
                "driver_monotonicity_violations": driver_mono,
                "terminal_monotonicity_violations": terminal_mono,
                "barrier_monotonicity_violations": barrier_mono,
            },
            "apriori": apriori,
        }),
    ))
}

fn oracle(sc: &Scenario, b: &Built, out: &mut Outputs) -> Result<Verdict, Failure> {
    let limit = sc.options.max_oracle_steps.min(MAX_DYNKIN_STEPS);
    if b.lattice.n_steps() > limit {
        return Err(Error::TooLarge(format!(
            "{} steps exceed the oracle limit of {limit}",
            b.lattice.n_steps()
        ))
        .into());
    }
    let sol = solve_drbsde(&b.lattice, &b.driver, &b.payoff)?;
    let dyn_res = dynkin_bruteforce(&b.lattice, &b.driver, &b.payoff)?;
    let gap = (dyn_res.sup_inf - dyn_res.inf_sup).abs();
    let err = (dyn_res.inf_sup - sol.y0()).abs();
    out.write("price.csv", &price_csv(&b.lattice, &sol))?;
    Ok(Verdict::new(
        gap < ORACLE_TOL && err < ORACLE_TOL,
        json!({
            "y0": sol.y0(),
            "dynkin": dyn_res,
            "sup_inf_minus_inf_sup": gap,
            "inf_sup_minus_y0": err,
        }),
    ))
}
