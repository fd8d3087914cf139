//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.

mod common;

use std::time::Instant;

use l0pen::geometry::{prox_sp, project_abs_epigraph, project_portfolio};
use l0pen::penalty::{check_axioms, make_huber, make_quadratic, make_shifted_quadratic};
use l0pen::problems::{dictionary_problem, gen_dictionary, gen_portfolio, portfolio_problem};
use l0pen::solvers::{
    exact_penalty_solve, exact_penalty_solve_observed, replay_spg_trace, threshold_solve,
    InnerSolver, PenaltyEpigraph, Protocol, ThresholdKind,
};
use l0pen::spo::{y_star_from_x, SolveStatus};
use l0pen::verify::{complementarity, spo_bruteforce, tnlp_stationarity};
use l0pen::PenaltyFamily;
use rand::Rng;

use common::{
    abs_epigraph_oracle, inf_dist, normal, portfolio_kkt_residual, portfolio_qp_oracle,
    prox_grid_min, prox_objective, rng,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn families(rho: f64) -> Vec<PenaltyFamily> {
    vec![
        make_quadratic(rho).unwrap(),
        make_shifted_quadratic(rho).unwrap(),
        make_huber(rho, 0.5).unwrap(),
    ]
}

fn penalty_axioms() -> Outcome {
    let mut failures = Vec::new();
    for rho in [0.1, 1.0, 10.0] {
        for fam in families(rho) {
            let check = check_axioms(&fam, 1001);
            if !check.passed() {
                failures.push(format!("{} rho={rho}: {:?}", fam.name(), check.failures));
            }
            // Independent recomputation of the drop p(0) − p(s) = ρ.
            let drop = fam.value(0.0) - fam.value(fam.minimizer());
            if (drop - rho).abs() > 1e-10 {
                failures.push(format!("{} rho={rho}: p(0) - p(s) = {drop}", fam.name()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "9 family/rho pairs".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn prox_oracle() -> Outcome {
    let mut r = rng(2);
    let params = [0.5, 1.0, 2.0];
    let mut worst = f64::NEG_INFINITY;
    let mut bad = 0;
    for k in 0..1000 {
        let u: f64 = r.random_range(-3.0..3.0);
        let v: f64 = r.random_range(-3.0..3.0);
        let alpha = params[k % 3];
        let gamma = params[(k / 3) % 3];
        let (x, y) = prox_sp(u, v, alpha, gamma);
        let feasible = y >= 0.0 && x * u.signum() >= 0.0;
        let gap = prox_objective(x, y, u, v, alpha, gamma) - prox_grid_min(u, v, alpha, gamma, 2001);
        worst = worst.max(gap);
        if !feasible || gap > 1e-3 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("1000 points, worst gap to grid {worst:.2e}, {bad} violations"))
}

fn projections() -> Outcome {
    let mut r = rng(3);
    let mut cases = [0usize; 4];
    let mut errs = Vec::new();
    let (mut idem, mut vi, mut oracle) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..10_000 {
        let u: f64 = r.random_range(-5.0..5.0);
        let v: f64 = r.random_range(-5.0..5.0);
        let case = if u.abs() <= v {
            0
        } else if u.abs() <= -v {
            1
        } else if u > v.abs() {
            2
        } else {
            3
        };
        cases[case] += 1;
        let (x, s) = project_abs_epigraph(u, v);
        let (ox, os) = abs_epigraph_oracle(u, v);
        oracle = oracle.max((x - ox).abs().max((s - os).abs()));
        let (x2, s2) = project_abs_epigraph(x, s);
        idem = idem.max((x2 - x).abs().max((s2 - s).abs()));
        for _ in 0..10 {
            let ws = r.random_range(0.0..6.0);
            let wx = r.random_range(-ws..=ws);
            vi = vi.max((u - x) * (wx - x) + (v - s) * (ws - s));
        }
    }
    if cases.iter().any(|&c| c == 0) {
        errs.push(format!("case counts {cases:?}"));
    }
    if idem > 1e-12 || vi > 1e-8 || oracle > 1e-12 {
        errs.push(format!("epigraph idem {idem:.1e} vi {vi:.1e} oracle {oracle:.1e}"));
    }

    let (mut budget, mut kkt, mut qp) = (0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 5, 20] {
        for _ in 0..100 {
            let a: Vec<f64> = (0..n).map(|_| 2.0 * normal(&mut r)).collect();
            let b: Vec<f64> = (0..n).map(|_| normal(&mut r)).collect();
            let p = match project_portfolio(&a, &b) {
                Ok(p) => p,
                Err(e) => {
                    errs.push(format!("project_portfolio failed: {e}"));
                    continue;
                }
            };
            budget = budget.max((p.x.iter().sum::<f64>() - 1.0).abs());
            kkt = kkt.max(portfolio_kkt_residual(&a, &b, &p.x, &p.s, p.mu));
            let (ox, os) = portfolio_qp_oracle(&a, &b);
            qp = qp.max(inf_dist(&p.x, &ox).max(inf_dist(&p.s, &os)));
        }
    }
    if budget > 1e-8 || kkt > 1e-6 || qp > 1e-6 {
        errs.push(format!("budget {budget:.1e} kkt {kkt:.1e} qp {qp:.1e}"));
    }
    outcome(
        errs.is_empty(),
        format!(
            "cases {cases:?}, idem {idem:.1e}, vi {vi:.1e}; budget {budget:.1e}, kkt {kkt:.1e}, qp gap {qp:.1e}{}",
            if errs.is_empty() { String::new() } else { format!(" | {}", errs.join("; ")) }
        ),
    )
}

fn global_optimality() -> Outcome {
    let proto = Protocol::portfolio();
    let runs = 50;
    let (mut comp_ok, mut matched, mut converged, mut stat_bad) = (0, 0, 0, 0);
    for seed in 0..runs {
        let inst = gen_portfolio(10, seed).unwrap();
        let problem = portfolio_problem(&inst).unwrap();
        let fam = make_quadratic(inst.rho).unwrap();
        let report = exact_penalty_solve(
            &problem,
            &fam,
            &inst.start_point(),
            InnerSolver::Spg,
            &proto.inner,
            &proto.outer,
        )
        .unwrap();
        if report.complementarity <= 1e-3 {
            comp_ok += 1;
        }
        if report.status == SolveStatus::Converged {
            converged += 1;
            let res = tnlp_stationarity(&problem, report.final_iterate.x(), proto.outer.zero_tol)
                .unwrap();
            if res > 1e-3 {
                stat_bad += 1;
            }
        }
        let oracle = spo_bruteforce(&inst, inst.rho).unwrap();
        if (report.spo_value - oracle.value).abs() <= 1e-4 {
            matched += 1;
        }
    }
    let passed = comp_ok * 100 >= 95 * runs as usize && stat_bad == 0 && matched * 2 >= runs as usize;
    outcome(
        passed,
        format!(
            "comp<=1e-3 {comp_ok}/{runs}, stationarity violations {stat_bad}/{converged} converged, global value {matched}/{runs}"
        ),
    )
}

fn residual_decay() -> Outcome {
    let proto = Protocol::portfolio();
    let mut bad = Vec::new();
    let mut worst_final = 0.0f64;
    for seed in 0..10 {
        let inst = gen_portfolio(20, 1000 + seed).unwrap();
        let problem = portfolio_problem(&inst).unwrap();
        let fam = make_quadratic(inst.rho).unwrap();
        let report = exact_penalty_solve(
            &problem,
            &fam,
            &inst.start_point(),
            InnerSolver::Spg,
            &proto.inner,
            &proto.outer,
        )
        .unwrap();
        let mut running = f64::INFINITY;
        let mut mins = Vec::new();
        for rec in &report.alpha_trace {
            running = running.min(rec.complementarity);
            mins.push(running);
        }
        let monotone = mins.windows(2).all(|w| w[1] <= w[0]);
        let last = report.alpha_trace.last().map_or(f64::INFINITY, |r| r.complementarity);
        worst_final = worst_final.max(last);
        if !monotone || last > 1e-3 {
            bad.push(seed);
        }
    }
    outcome(
        bad.is_empty(),
        format!("10 instances, worst final complementarity {worst_final:.1e}, failing seeds {bad:?}"),
    )
}

fn dictionary_ordering() -> Outcome {
    let proto = Protocol::dictionary();
    let runs = 20;
    let (mut wins, mut comp_ok) = (0, 0);
    let mut notes = Vec::new();
    for seed in 0..runs {
        let inst = gen_dictionary(20, 30, 40, seed).unwrap();
        let problem = dictionary_problem(&inst).unwrap();
        let fam = make_quadratic(inst.rho).unwrap();
        let start = inst.start_point();
        let mut penalty_comp = true;
        let mut prox_value = f64::INFINITY;
        for inner in [InnerSolver::Spg, InnerSolver::Prox] {
            match exact_penalty_solve(&problem, &fam, &start, inner, &proto.inner, &proto.outer) {
                Ok(rep) => {
                    let it = &rep.final_iterate;
                    let sum: f64 = it.x().iter().zip(&it.y).map(|(x, y)| x.abs() * y).sum();
                    penalty_comp &= sum <= 1e-3;
                    if inner == InnerSolver::Prox {
                        prox_value = rep.spo_value;
                    }
                }
                Err(e) => {
                    penalty_comp = false;
                    notes.push(format!("seed {seed} {inner:?}: {e}"));
                }
            }
        }
        let mut beats_all = true;
        for kind in [ThresholdKind::Hard, ThresholdKind::Soft] {
            match threshold_solve(&problem, kind, &start, &proto.baseline, proto.outer.zero_tol) {
                Ok(rep) => beats_all &= prox_value <= rep.spo_value,
                Err(e) => notes.push(format!("seed {seed} {kind:?}: {e}")),
            }
        }
        wins += beats_all as usize;
        comp_ok += penalty_comp as usize;
    }
    let passed = wins * 10 >= 7 * runs as usize && comp_ok == runs as usize;
    outcome(
        passed,
        format!(
            "Pen-Prox <= both baselines on {wins}/{runs}, penalty complementarity ok on {comp_ok}/{runs}{}",
            if notes.is_empty() { String::new() } else { format!(" | {}", notes.join("; ")) }
        ),
    )
}

fn timing() -> Outcome {
    let proto = Protocol::portfolio();
    let inst = gen_portfolio(200, 7).unwrap();
    let clock = Instant::now();
    let problem = portfolio_problem(&inst).unwrap();
    let fam = make_quadratic(inst.rho).unwrap();
    let report = exact_penalty_solve(
        &problem,
        &fam,
        &inst.start_point(),
        InnerSolver::Spg,
        &proto.inner,
        &proto.outer,
    );
    let secs = clock.elapsed().as_secs_f64();
    match report {
        Ok(rep) => outcome(
            secs < 60.0,
            format!(
                "n=200 in {secs:.2}s, status {:?}, l0 {}, comp {:.1e}",
                rep.status, rep.l0, rep.complementarity
            ),
        ),
        Err(e) => outcome(false, format!("solve failed after {secs:.2}s: {e}")),
    }
}

fn spg_fidelity() -> Outcome {
    let mut proto = Protocol::portfolio();
    proto.inner.record_trace = true;
    let mut traces = 0;
    let mut steps = 0;
    let mut errors = Vec::new();
    let mut check = |problem: &l0pen::SpoProblem, fam: &PenaltyFamily, start: &[f64], label: String| {
        let n = problem.sparse_dim();
        let d = problem.dim();
        let result = exact_penalty_solve_observed(
            problem,
            fam,
            start,
            InnerSolver::Spg,
            &proto.inner,
            &proto.outer,
            |alpha, out| {
                let trace = out.trace.as_ref().expect("trace recorded");
                traces += 1;
                steps += trace.steps.len();
                let epi = PenaltyEpigraph::new(problem, fam, alpha);
                let s_is_abs_x = |z: &[f64]| {
                    for i in 0..n {
                        if z[d + i] != z[i].abs() {
                            return Err(format!("s[{i}] = {} but |x[{i}]| = {}", z[d + i], z[i].abs()));
                        }
                    }
                    Ok(())
                };
                if let Err(e) = replay_spg_trace(&epi, trace, &proto.inner, s_is_abs_x) {
                    errors.push(format!("{label} alpha={alpha}: {e}"));
                }
            },
        );
        if let Err(e) = result {
            errors.push(format!("{label}: {e}"));
        }
    };
    for seed in 0..5 {
        let inst = gen_portfolio(10, 500 + seed).unwrap();
        let problem = portfolio_problem(&inst).unwrap();
        for fam in families(inst.rho) {
            check(&problem, &fam, &inst.start_point(), format!("portfolio seed {seed} {}", fam.name()));
        }
    }
    let inst = gen_dictionary(6, 5, 8, 11).unwrap();
    let problem = dictionary_problem(&inst).unwrap();
    let fam = make_quadratic(inst.rho).unwrap();
    check(&problem, &fam, &inst.start_point(), "dictionary".into());
    outcome(
        errors.is_empty() && steps > 0,
        format!(
            "{traces} traces, {steps} accepted steps replayed{}",
            if errors.is_empty() { String::new() } else { format!(" | {}", errors[..errors.len().min(3)].join("; ")) }
        ),
    )
}

fn reformulation_identities() -> Outcome {
    let mut r = rng(9);
    let (mut eq_worst, mut ineq_worst) = (0.0f64, f64::NEG_INFINITY);
    let mut count = 0;
    for k in 0..10_000 {
        let rho = [0.1, 1.0, 10.0][k % 3];
        let fam = families(rho).swap_remove((k / 3) % 3);
        let n = r.random_range(1..=12);
        let x: Vec<f64> = (0..n)
            .map(|_| if r.random_bool(0.5) { 0.0 } else { 3.0 * normal(&mut r) })
            .collect();
        let nnz = x.iter().filter(|&&t| t != 0.0).count() as f64;
        let y = y_star_from_x(&x, &fam, 0.0);
        let m_total = n as f64 * fam.value(fam.minimizer());
        let total = |y: &[f64]| y.iter().map(|&t| fam.value(t)).sum::<f64>();
        eq_worst = eq_worst.max((rho * nnz - (total(&y) - m_total)).abs());

        // Feasible perturbation: y ≥ 0 with y_i = 0 wherever x_i ≠ 0.
        let yp: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(&xi, &yi)| if xi != 0.0 { 0.0 } else { (yi + r.random_range(-2.0..2.0)).max(0.0) })
            .collect();
        if complementarity(&x, &yp) != 0.0 {
            return outcome(false, "perturbed y is not complementary");
        }
        ineq_worst = ineq_worst.max(rho * nnz - (total(&yp) - m_total));
        count += 1;
    }
    outcome(
        eq_worst <= 1e-10 && ineq_worst <= 1e-10,
        format!("{count} pairs, equality error {eq_worst:.1e}, worst inequality slack {ineq_worst:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 9] = [
        ("1 penalty-family axioms", 1.0, penalty_axioms),
        ("2 prox_sp vs grid search", 60.0, prox_oracle),
        ("3 projection correctness", 30.0, projections),
        ("4 desk-scale global optimality", 300.0, global_optimality),
        ("5 complementarity decay", 120.0, residual_decay),
        ("6 dictionary method ordering", 600.0, dictionary_ordering),
        ("7 n=200 timing", 60.0, timing),
        ("8 SPG trace replay", f64::INFINITY, spg_fidelity),
        ("9 reformulation identities", f64::INFINITY, reformulation_identities),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, budget, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let clock = Instant::now();
        let mut out = run();
        let secs = clock.elapsed().as_secs_f64();
        if secs > budget {
            out.passed = false;
            out.detail.push_str(&format!(" | exceeded {budget}s budget"));
        }
        println!(
            "{} criterion {name}: {} ({secs:.2}s)",
            if out.passed { "PASS" } else { "FAIL" },
            out.detail
        );
        failed += !out.passed as usize;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
