//! Acceptance suite over seeded random corpora. Prints one line per check and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use gamehedge::bsde::{layer_values, linear_price_oracle, solve_bsde};
use gamehedge::drbsde::{dynkin_bruteforce, solve_drbsde, DrbsdeSolution};
use gamehedge::driver::{make_builtin_driver, DriverKind};
use gamehedge::hedging::{buyer_superhedge, seller_superhedge, StoppingKind};
use gamehedge::instances::{random_family, random_instance, rng, Instance, InstanceConfig};
use gamehedge::robust::{interchange_check, robust_certificate, robust_seller_price};
use gamehedge::validation::{apriori_check, EstimateParams};
use gamehedge::{Driver, Lattice, Result};
use rand::Rng;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn corpus(seed: u64, count: usize, cfg: &InstanceConfig) -> Vec<Instance> {
    let mut r = rng(seed);
    (0..count).map(|_| random_instance(&mut r, cfg)).collect()
}

fn dynkin_fairness() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst_gap: f64 = 0.0;
    let mut worst_err: f64 = 0.0;
    let insts = corpus(101, 120, &InstanceConfig::steps(1, 3));
    for inst in &insts {
        let p = inst.spec();
        let r = dynkin_bruteforce(&inst.lattice, &inst.driver, &p)?;
        let y0 = solve_drbsde(&inst.lattice, &inst.driver, &p)?.y0();
        worst_gap = worst_gap.max((r.sup_inf - r.inf_sup).abs());
        worst_err = worst_err.max((r.inf_sup - y0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let three = insts.iter().filter(|i| i.lattice.n_steps() == 3).count();
    Ok(Outcome {
        name: "Dynkin fairness",
        pass: worst_gap < 1e-10 && worst_err < 1e-10 && secs < 60.0,
        detail: format!(
            "{} instances ({three} with 3 steps), max |sup_inf - inf_sup| = {worst_gap:.1e}, \
             max |inf_sup - Y0| = {worst_err:.1e}, {secs:.1}s",
            insts.len()
        ),
    })
}

fn linear_oracle() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let insts = corpus(202, 120, &InstanceConfig::steps(1, 8).kinds(&["perfect"]));
    for inst in &insts {
        let lat = &inst.lattice;
        let b = inst.spec().barriers(lat)?;
        let term = layer_values(lat, lat.n_steps(), |id| b.xi[id.0]);
        let y0 = solve_bsde(lat, &inst.driver, &term)?.y0();
        let oracle = linear_price_oracle(lat, &term)?;
        worst = worst.max((y0 - oracle).abs());
    }
    Ok(Outcome {
        name: "Linear deflator oracle",
        pass: worst < 1e-10,
        detail: format!(
            "{} instances up to 8 steps, max |Y0 - oracle| = {worst:.1e}",
            insts.len()
        ),
    })
}

fn super_hedge(eps_mode: bool) -> Result<Outcome> {
    let insts = corpus(303, 80, &InstanceConfig::steps(1, 10));
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    let mut paths = 0;
    for inst in &insts {
        let sol = solve_drbsde(&inst.lattice, &inst.driver, &inst.spec())?;
        let kinds: Vec<StoppingKind> = if eps_mode {
            vec![
                StoppingKind::SigmaEps { epsilon: 0.1 },
                StoppingKind::SigmaEps { epsilon: 0.01 },
            ]
        } else {
            vec![StoppingKind::SigmaStar]
        };
        for kind in kinds {
            let (_, _, rep) = seller_superhedge(&inst.lattice, &inst.driver, &sol, kind, None)?;
            violations += rep.violations;
            min_slack = min_slack
                .min(rep.min_pre_stop_slack)
                .min(rep.min_stop_slack);
            paths += rep.n_paths;
        }
    }
    Ok(Outcome {
        name: if eps_mode { "Epsilon super-hedge" } else { "Super-hedge certificate" },
        pass: violations == 0,
        detail: format!(
            "{} instances up to 10 steps, {paths} paths, {violations} violations, min slack {min_slack:.3e}",
            insts.len()
        ),
    })
}

fn robust_duality() -> Result<Outcome> {
    let mut r = rng(404);
    let mut dominance_fail = 0;
    let mut worst_frozen: f64 = 0.0;
    let mut cert_violations = 0;
    let mut ties = 0;
    let count = 100;
    for _ in 0..count {
        let inst = random_instance(&mut r, &InstanceConfig::steps(2, 3));
        let fam = random_family(&mut r, &inst.lattice, 4);
        let res = robust_seller_price(&inst.lattice, &fam, &inst.spec())?;
        if res.v0_via_g < res.v0_via_grid - 1e-12 {
            dominance_fail += 1;
        }
        worst_frozen = worst_frozen.max(res.v0_via_g - res.v0_frozen);
        ties += res.ties;
        for rep in robust_certificate(&inst.lattice, &fam, &res, StoppingKind::SigmaStar)? {
            cert_violations += rep.violations;
        }
    }
    Ok(Outcome {
        name: "Robust duality",
        pass: dominance_fail == 0 && worst_frozen < 1e-10 && cert_violations == 0,
        detail: format!(
            "{count} instances, 2-3 steps, 2-4 models: {dominance_fail} dominance failures, \
             max v0_G - v0_frozen = {worst_frozen:.1e}, {cert_violations} certificate violations, \
             {ties} tied nodes"
        ),
    })
}

fn interchange() -> Result<Outcome> {
    let mut r = rng(505);
    let mut worst_gap: f64 = 0.0;
    let mut worst_g: f64 = 0.0;
    let count = 60;
    for _ in 0..count {
        let inst = random_instance(&mut r, &InstanceConfig::steps(1, 2));
        let fam = random_family(&mut r, &inst.lattice, 4);
        let rep = interchange_check(&inst.lattice, &fam, &inst.spec())?;
        worst_gap = worst_gap.max(rep.gap());
        worst_g = worst_g.max((rep.sup_inf_sup - rep.v0_via_g).abs());
    }
    Ok(Outcome {
        name: "Interchange of sup and inf",
        pass: worst_gap < 1e-10 && worst_g < 1e-10,
        detail: format!(
            "{count} instances, max gap = {worst_gap:.1e}, max |value - v0_G| = {worst_g:.1e}"
        ),
    })
}

fn buyer_duality() -> Result<Outcome> {
    let insts = corpus(606, 100, &InstanceConfig::steps(1, 8));
    let mut inexact = 0;
    let mut worst_linear: f64 = 0.0;
    let mut buyer_violations = 0;
    for inst in &insts {
        let p = inst.spec();
        let buyer = buyer_superhedge(&inst.lattice, &inst.driver, &p)?;
        let reflected = solve_drbsde(&inst.lattice, &inst.driver, &p.reflected())?.y0();
        if buyer.price != -reflected {
            inexact += 1;
        }
        buyer_violations += buyer.report.violations;
        let perfect = make_builtin_driver(&DriverKind::Perfect, inst.lattice.market())?;
        let seller = solve_drbsde(&inst.lattice, &perfect, &p)?.y0();
        let lin_buyer = buyer_superhedge(&inst.lattice, &perfect, &p)?.price;
        worst_linear = worst_linear.max((seller - lin_buyer).abs());
    }
    Ok(Outcome {
        name: "Buyer duality",
        pass: inexact == 0 && worst_linear < 1e-12 && buyer_violations == 0,
        detail: format!(
            "{} instances: {inexact} inexact reflections, linear |seller - buyer| max {worst_linear:.1e}, \
             {buyer_violations} buyer hedge violations",
            insts.len()
        ),
    })
}

fn apriori() -> Result<Outcome> {
    let mut r = rng(707);
    let mut violations = 0;
    let mut nodes = 0;
    let mut worst_ratio: f64 = 0.0;
    let count = 150;
    for _ in 0..count {
        let inst = random_instance(&mut r, &InstanceConfig::steps(1, 8));
        let lat = &inst.lattice;
        let d1 = inst.driver.clone();
        let d2 = perturbed(&mut r, lat, &d1)?;
        let p = inst.spec();
        let s1 = solve_drbsde(lat, &d1, &p)?;
        let s2 = solve_drbsde(lat, &d2, &p)?;
        let ep = EstimateParams::canonical(d1.lambda_constant())?;
        let rep = apriori_check(lat, &s1, &s2, &d1, &d2, &ep)?;
        violations += rep.violations;
        nodes += rep.nodes_checked;
        worst_ratio = worst_ratio.max(rep.max_ratio);
    }
    Ok(Outcome {
        name: "A priori estimate",
        pass: violations == 0,
        detail: format!(
            "{count} driver pairs, {nodes} nodes, {violations} violations, max lhs/rhs = {worst_ratio:.3}"
        ),
    })
}

/// Another admissible driver on the same market: a shift or a different builtin.
fn perturbed<R: Rng>(r: &mut R, lat: &Lattice, d: &Driver) -> Result<Driver> {
    let mp = lat.market();
    let rate = mp.r.values()[0];
    for _ in 0..50 {
        let cand = match r.gen_range(0..3) {
            0 => d.shifted(r.gen_range(-0.5..0.5)),
            1 => make_builtin_driver(&DriverKind::Perfect, mp)?,
            _ => make_builtin_driver(
                &DriverKind::BorrowLend {
                    borrow_rate: rate + r.gen_range(0.0..0.1),
                },
                mp,
            )?,
        };
        if cand.lambda_constant() * lat.dt() < 1.0 {
            return Ok(cand);
        }
    }
    Ok(d.shifted(0.1))
}

fn comparison_suite() -> Result<Outcome> {
    let mut r = rng(808);
    let mut violations = 0;
    let mut checks = 0;
    let count = 150;
    let tol = 1e-12;
    let below = |a: &[f64], b: &[f64]| a.iter().zip(b).filter(|(x, y)| **x > **y + tol).count();
    for _ in 0..count {
        let inst = random_instance(&mut r, &InstanceConfig::steps(1, 8));
        let lat = &inst.lattice;
        let mp = lat.market();
        let p = inst.spec();
        let base = solve_drbsde(lat, &inst.driver, &p)?;

        // Driver monotonicity: a nonnegative shift, and a spread over perfect.
        let up = solve_drbsde(lat, &inst.driver.shifted(r.gen_range(0.0..0.5)), &p)?;
        violations += below(&base.y, &up.y);
        let perfect = make_builtin_driver(&DriverKind::Perfect, mp)?;
        let spread = make_builtin_driver(
            &DriverKind::BorrowLend {
                borrow_rate: mp.r.values()[0] + r.gen_range(0.0..0.1),
            },
            mp,
        )?;
        if lat.is_monotone_for(spread.lambda_constant()) {
            let lo = solve_drbsde(lat, &perfect, &p)?;
            let hi = solve_drbsde(lat, &spread, &p)?;
            violations += below(&lo.y, &hi.y);
            checks += 1;
        }

        // Terminal monotonicity for the non-reflected equation.
        let term = layer_values(lat, lat.n_steps(), |id| base.xi[id.0]);
        let bump: Vec<f64> = term.iter().map(|v| v + r.gen_range(0.0..0.3)).collect();
        let y1 = solve_bsde(lat, &inst.driver, &term)?;
        let y2 = solve_bsde(lat, &inst.driver, &bump)?;
        violations += below(&y1.y, &y2.y);

        // Barrier monotonicity: raise ξ (within ζ), raise ζ.
        let dx = r.gen_range(0.0..inst.payoff.delta);
        let raised_xi = solve_drbsde(lat, &inst.driver, &inst.payoff.shifted_spec(dx, 0.0))?;
        violations += below(&base.y, &raised_xi.y);
        let raised_zeta = solve_drbsde(
            lat,
            &inst.driver,
            &inst.payoff.shifted_spec(0.0, r.gen_range(0.0..0.5)),
        )?;
        violations += below(&base.y, &raised_zeta.y);

        // Bounds at the root.
        if !(base.xi[0] <= base.y0() && base.y0() <= base.zeta[0]) {
            violations += 1;
        }
        checks += 6;
    }
    // Nonnegative prices for drivers vanishing at zero and nonnegative payoffs.
    let insts = corpus(809, 150, &InstanceConfig::steps(1, 8).nonneg());
    for inst in &insts {
        debug_assert!(inst.driver.zero_at_zero());
        let sol = solve_drbsde(&inst.lattice, &inst.driver, &inst.spec())?;
        violations += sol.y.iter().filter(|&&v| v < -tol).count();
        checks += 1;
    }
    Ok(Outcome {
        name: "Comparison suite",
        pass: violations == 0,
        detail: format!(
            "{} instances, {checks} checks, {violations} violations",
            count + insts.len()
        ),
    })
}

fn skorokhod_violations(sol: &DrbsdeSolution) -> usize {
    (0..sol.y.len())
        .filter(|&i| {
            sol.da[i] * sol.da_prime[i] != 0.0
                || (sol.da[i] > 0.0 && sol.y[i] != sol.xi[i])
                || (sol.da_prime[i] > 0.0 && sol.y[i] != sol.zeta[i])
                || sol.da[i] < 0.0
                || sol.da_prime[i] < 0.0
                || sol.y[i] < sol.xi[i]
                || sol.y[i] > sol.zeta[i]
        })
        .count()
}

fn skorokhod() -> Result<Outcome> {
    let insts = corpus(909, 300, &InstanceConfig::steps(1, 10));
    let mut violations = 0;
    let mut nodes = 0;
    let mut active = 0;
    for inst in &insts {
        for p in [inst.spec(), inst.spec().reflected()] {
            let sol = solve_drbsde(&inst.lattice, &inst.driver, &p)?;
            violations += skorokhod_violations(&sol);
            nodes += sol.y.len();
            active += sol
                .da
                .iter()
                .chain(&sol.da_prime)
                .filter(|&&v| v > 0.0)
                .count();
        }
    }
    Ok(Outcome {
        name: "Skorokhod and mutual singularity",
        pass: violations == 0,
        detail: format!(
            "{} solves, {nodes} nodes, {active} active reflections, {violations} violations",
            2 * insts.len()
        ),
    })
}

type Check = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let checks: Vec<(&str, Check)> = vec![
        ("Dynkin fairness", dynkin_fairness),
        ("Linear deflator oracle", linear_oracle),
        ("Super-hedge certificate", || super_hedge(false)),
        ("Epsilon super-hedge", || super_hedge(true)),
        ("Robust duality", robust_duality),
        ("Interchange of sup and inf", interchange),
        ("Buyer duality", buyer_duality),
        ("A priori estimate", apriori),
        ("Comparison suite", comparison_suite),
        ("Skorokhod and mutual singularity", skorokhod),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(o) => {
                println!(
                    "[{}] {}: {}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.name,
                    o.detail
                );
                failed += (!o.pass) as usize;
            }
            Err(e) => {
                println!("[FAIL] {name}: error {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} of 10 passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
