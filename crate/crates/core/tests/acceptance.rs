//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::time::{Duration, Instant};

use common::rel_close;
use common::suites::{exact_suites, mixed_sign_suite, suite, Subject, Suite};
use drtsp::flp::{
    cross_validate, crossval_csv, flp_to_drtsp, generate_flp, solve_direct, CrossValReport, DirectForm, FlpParams,
    FlpVariant, CROSSVAL_HEADER,
};
use drtsp::oracle::oracle_drtsp;
use drtsp::{solve_drtsp, Mode, NormP};
use drtsp_lp::{certify, solve_lp, solve_milp, LinearModel, LpStatus, ObjectiveSense, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

const PER_SUITE: usize = 200;
const SUITE_BUDGET: Duration = Duration::from_secs(60);

struct Equivalence {
    exact: usize,
    tried: usize,
    worst: f64,
    elapsed: Duration,
    error: Option<String>,
}

/// Draws until `PER_SUITE` instances run in exact mode and compares each
/// with its oracle.
fn equivalence(s: &Suite, seed: u64) -> Equivalence {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Equivalence { exact: 0, tried: 0, worst: 0.0, elapsed: Duration::ZERO, error: None };
    while r.exact < PER_SUITE && r.tried < 20 * PER_SUITE {
        r.tried += 1;
        let sub = (s.make)(&mut rng);
        let (z, o) = match (sub.eval(), sub.oracle()) {
            (Ok(z), Ok(o)) => (z, o),
            (Err(e), _) | (_, Err(e)) => {
                r.error = Some(format!("instance {}: {}", r.tried, e));
                break;
            }
        };
        if z.mode != Mode::Exact || !o.exact {
            continue;
        }
        r.exact += 1;
        r.worst = r.worst.max(rel_err(z.value, o.value));
    }
    r.elapsed = start.elapsed();
    r
}

fn equivalence_line(names: &[&str], seed: u64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in names {
        let r = equivalence(&suite(name), seed);
        let ok = r.error.is_none() && r.exact >= PER_SUITE && r.worst <= 1e-6 && r.elapsed <= SUITE_BUDGET;
        pass &= ok;
        let mut p = format!("{} {}/{} exact, max rel err {:.1e}, {:.1}s", name, r.exact, r.tried, r.worst, r.elapsed.as_secs_f64());
        if let Some(e) = r.error {
            p.push_str(&format!(" [error: {}]", e));
        }
        parts.push(p);
    }
    outcome(pass, parts.join("; "))
}

fn criterion_1() -> Outcome {
    equivalence_line(&["GeneralLinf"], 101)
}

fn criterion_2() -> Outcome {
    equivalence_line(
        &["ObjectiveOnly", "ConstraintOnlyL1", "BinaryGeneralLinf", "BinaryObjective", "BinaryConstraint", "PiecewiseMax", "BinaryPiecewiseMax"],
        202,
    )
}

fn all_suites() -> Vec<Suite> {
    exact_suites().into_iter().chain([mixed_sign_suite()]).collect()
}

fn subjects(s: &Suite, seed: u64, n: usize) -> Vec<Subject> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (s.make)(&mut rng)).collect()
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut errors = Vec::new();
    for s in all_suites() {
        for sub in subjects(&s, 303, PER_SUITE) {
            match (sub.at(0.0).eval(), sub.saa()) {
                (Ok(z), Ok(saa)) => {
                    worst = worst.max((z.value - saa).abs() / (1.0 + saa.abs()));
                    count += 1;
                }
                (Err(e), _) | (_, Err(e)) => errors.push(format!("{}: {}", s.name, e)),
            }
        }
    }
    outcome(
        errors.is_empty() && worst <= 1e-8,
        format!("{} instances over 9 suites, max |Z(0) - SAA|/(1+|SAA|) = {:.1e}{}", count, worst, fmt_errors(&errors)),
    )
}

fn fmt_errors(e: &[String]) -> String {
    if e.is_empty() {
        String::new()
    } else {
        format!(" [{} errors, first: {}]", e.len(), e[0])
    }
}

fn criterion_4() -> Outcome {
    const GRID: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];
    let mut mono = 0.0f64;
    let mut dom = 0.0f64;
    let mut errors = Vec::new();
    for s in all_suites() {
        for sub in subjects(&s, 404, 100) {
            let saa = match sub.saa() {
                Ok(v) => v,
                Err(e) => {
                    errors.push(format!("{}: {}", s.name, e));
                    continue;
                }
            };
            let mut prev = f64::NEG_INFINITY;
            for th in GRID {
                match sub.at(th).eval() {
                    Ok(z) => {
                        mono = mono.max((prev - z.value) / (1.0 + z.value.abs()));
                        dom = dom.max((saa - z.value) / (1.0 + saa.abs()));
                        prev = z.value;
                    }
                    Err(e) => errors.push(format!("{} θ={}: {}", s.name, th, e)),
                }
            }
        }
    }
    // Upper-bound gaps on the mixed-sign suite, θ = 1 against θ = 1e-4.
    let (mut g_initial, mut g_small, mut worst_ratio, mut counted) = (0.0f64, 0.0f64, 0.0f64, 0);
    for sub in subjects(&mixed_sign_suite(), 405, PER_SUITE) {
        let gap = |th: f64| -> Option<f64> {
            let s = sub.at(th);
            Some(s.eval().ok()?.value - s.oracle().ok()?.value)
        };
        match (gap(1.0), gap(1e-4)) {
            (Some(a), Some(b)) => {
                if a > 1e-9 {
                    g_initial += a;
                    g_small += b.max(0.0);
                    worst_ratio = worst_ratio.max(b / a);
                    counted += 1;
                }
            }
            _ => errors.push("mixed-sign gap evaluation failed".into()),
        }
    }
    let shrink_ok = counted > 0 && g_small <= 1e-4 * g_initial;
    let pass = errors.is_empty() && mono <= 1e-9 && dom <= 1e-9 && shrink_ok;
    outcome(
        pass,
        format!(
            "max decrease {:.1e}, max SAA excess {:.1e} (900 instances x 5 radii); upper-bound gap sum at 1e-4 / at 1 = {:.2e} over {} gapped instances (per-instance max {:.2e}){}",
            mono.max(0.0),
            dom.max(0.0),
            if g_initial > 0.0 { g_small / g_initial } else { f64::NAN },
            counted,
            worst_ratio,
            fmt_errors(&errors)
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut min_count = usize::MAX;
    let mut errors = Vec::new();
    for s in all_suites() {
        let mut n = 0;
        for sub in subjects(&s, 505, 60) {
            match (sub.eval(), sub.builder()) {
                (Ok(z), Ok(b)) => {
                    worst = worst.max(rel_err(b, z.value));
                    pass &= rel_close(b, z.value, 1e-6);
                    n += 1;
                }
                (Err(e), _) | (_, Err(e)) => errors.push(format!("{}: {}", s.name, e)),
            }
        }
        min_count = min_count.min(n);
    }
    pass &= errors.is_empty() && min_count >= 50;
    outcome(pass, format!("at least {} instances per regime, max rel diff {:.1e}{}", min_count, worst, fmt_errors(&errors)))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let variants = [FlpVariant::Box15, FlpVariant::Binary22, FlpVariant::DisruptL1_21, FlpVariant::BinaryL1_29];
    let mut worst = 0.0f64;
    let mut runs = 0;
    let mut errors = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for toy in 0..6 {
        let p = FlpParams {
            n_sites: rng.gen_range(2..=4),
            n_customers: rng.gen_range(2..=4),
            n_samples: rng.gen_range(3..=5),
            disruption_prob: 0.3,
            ..FlpParams::default()
        };
        let (flp, s) = generate_flp(&p, 6000 + toy).unwrap();
        for v in variants {
            for theta in [0.0, 0.5, 1.2] {
                let (inst, amb) = flp_to_drtsp(&flp, &s, v, theta).unwrap();
                match (solve_drtsp(&inst, &amb), oracle_drtsp(&inst, &amb)) {
                    (Ok(a), Ok(b)) => {
                        worst = worst.max(rel_err(a.objective, b.value));
                        runs += 1;
                    }
                    (Err(e), _) | (_, Err(e)) => errors.push(format!("{} θ={}: {}", v, theta, e)),
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(
        errors.is_empty() && worst <= 1e-6 && t <= Duration::from_secs(120),
        format!("{} (toy, variant, θ) runs, max rel diff {:.1e}, {:.1}s{}", runs, worst, t.as_secs_f64(), fmt_errors(&errors)),
    )
}

fn check_rule(r: &CrossValReport) -> bool {
    match r.rows.iter().find(|row| row.opt_val > row.ci_high) {
        Some(row) => r.qualified && r.chosen_theta == row.theta,
        None => !r.qualified && r.chosen_theta == r.rows.last().unwrap().theta,
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let grid = [0.0, 0.01, 0.02, 0.05, 0.1, 0.5];
    let params =
        FlpParams { n_sites: 10, n_customers: 15, n_samples: 50, disruption_prob: 0.1, ..FlpParams::default() };
    // First seed whose training set disrupts every site at least once.
    let (seed, flp, train) = (1..)
        .map(|seed| {
            let (flp, s) = generate_flp(&params, seed).unwrap();
            (seed, flp, s)
        })
        .find(|(_, _, s)| (0..params.n_sites).all(|k| s.delta.iter().any(|d| d[k] == 0.0)))
        .unwrap();
    let run = |v| cross_validate(&flp, &train, v, &grid, seed + 1000, 100);
    let (box15, bin22) = match (run(FlpVariant::Box15), run(FlpVariant::Binary22)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, format!("cross-validation failed: {}", e)),
    };
    let nondecreasing =
        |r: &CrossValReport| r.rows.windows(2).all(|w| w[1].opt_val >= w[0].opt_val - 1e-9 * (1.0 + w[0].opt_val.abs()));
    let a = nondecreasing(&box15) && nondecreasing(&bin22);
    let b = box15.rows.iter().zip(&bin22.rows).filter(|(r, _)| r.theta < 1.0).all(|(r15, r22)| {
        r22.opt_val <= r15.opt_val + 1e-9 * (1.0 + r15.opt_val.abs())
    });
    let c = box15.rows.iter().filter(|r| r.theta > 0.0).all(|r| r.built_facilities.is_empty())
        && bin22.rows.iter().filter(|r| r.theta > 0.0 && r.theta < 1.0).all(|r| !r.built_facilities.is_empty());
    let csv_ok = |r: &CrossValReport| {
        crossval_csv(r).map_or(false, |csv| {
            let mut lines = csv.lines();
            lines.next() == Some(CROSSVAL_HEADER.join(",").as_str()) && lines.count() == grid.len()
        })
    };
    let d = csv_ok(&box15) && csv_ok(&bin22) && check_rule(&box15) && check_rule(&bin22);
    let t = start.elapsed();
    let built = |r: &CrossValReport| {
        r.rows.iter().map(|row| format!("{}", row.built_facilities.len())).collect::<Vec<_>>().join("/")
    };
    outcome(
        a && b && c && d && t <= Duration::from_secs(600),
        format!(
            "seed {}: (a) {} (b) {} (c) {} (d) {}; facilities built per θ Box15 {} Binary22 {}; chosen θ {} / {}; {:.1}s",
            seed,
            a,
            b,
            c,
            d,
            built(&box15),
            built(&bin22),
            box15.chosen_theta,
            bin22.chosen_theta,
            t.as_secs_f64()
        ),
    )
}

fn sparse(
    rng: &mut ChaCha8Rng,
    cols: impl Iterator<Item = usize>,
    density: f64,
    coef: impl Fn(&mut ChaCha8Rng) -> f64,
) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for j in cols {
        if rng.gen_bool(density) {
            out.push((j, coef(rng)));
        }
    }
    out
}

/// Feasible and bounded by construction: box bounds and right-hand sides
/// taken from a random interior point.
fn random_lp(rng: &mut ChaCha8Rng) -> LinearModel {
    let n = rng.gen_range(1..30);
    let m = rng.gen_range(0..25);
    let sense = if rng.gen_bool(0.5) { ObjectiveSense::Minimize } else { ObjectiveSense::Maximize };
    let mut lp = LinearModel::new(sense);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for (j, &v) in x0.iter().enumerate() {
        let lb = if rng.gen_bool(0.1) { f64::NEG_INFINITY } else { v - rng.gen_range(0.0..2.0) };
        let ub = if lb.is_infinite() { v + rng.gen_range(0.5..2.0) } else { v + rng.gen_range(0.0..2.0) };
        lp.add_var(format!("x{}", j), lb, ub, rng.gen_range(-2.0..2.0));
    }
    for i in 0..m {
        let coeffs = sparse(rng, 0..n, 0.4, |r| r.gen_range(-3i32..=3) as f64);
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let (s, rhs) = match rng.gen_range(0..5) {
            0 => (Sense::Eq, act),
            1 | 2 => (Sense::Ge, act - rng.gen_range(0.0..1.0)),
            _ => (Sense::Le, act + rng.gen_range(0.0..1.0)),
        };
        lp.add_row(format!("r{}", i), &coeffs, s, rhs);
    }
    // Unbounded-below free columns would break boundedness for minimization.
    if lp.vars.iter().any(|v| v.lb.is_infinite()) {
        for (j, v) in lp.vars.iter().enumerate() {
            if v.lb.is_infinite() {
                let c = lp.objective[j];
                lp.objective[j] = match lp.sense {
                    ObjectiveSense::Minimize => -c.abs(),
                    ObjectiveSense::Maximize => c.abs(),
                };
            }
        }
    }
    lp
}

fn random_milp(rng: &mut ChaCha8Rng) -> (LinearModel, Vec<usize>) {
    let nb = rng.gen_range(1..=10);
    let nc = rng.gen_range(0..4);
    let mut lp = LinearModel::new(ObjectiveSense::Minimize);
    let bins: Vec<usize> = (0..nb).map(|j| lp.add_binary(format!("b{}", j), rng.gen_range(-5.0..5.0))).collect();
    let conts: Vec<usize> = (0..nc).map(|j| lp.add_var(format!("c{}", j), 0.0, 4.0, rng.gen_range(-2.0..3.0))).collect();
    for i in 0..rng.gen_range(1..6) {
        let mut coeffs = sparse(rng, bins.iter().copied(), 0.5, |r| r.gen_range(-4i32..=4) as f64);
        coeffs.extend(sparse(rng, conts.iter().copied(), 0.5, |r| r.gen_range(-2.0..2.0)));
        let s = if rng.gen_bool(0.5) { Sense::Ge } else { Sense::Le };
        lp.add_row(format!("r{}", i), &coeffs, s, rng.gen_range(-3.0..3.0));
    }
    (lp, bins)
}

fn enumerate_binaries(lp: &LinearModel, bins: &[usize]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut sub = lp.clone();
        for (k, &b) in bins.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            sub.vars[b].binary = false;
            sub.set_bounds(b, v, v);
        }
        let s = solve_lp(&sub).ok()?;
        if s.status == LpStatus::Optimal {
            best = Some(best.map_or(s.objective, |b: f64| b.min(s.objective)));
        }
    }
    best
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut worst_gap, mut worst_comp, mut bad) = (0.0f64, 0.0f64, 0);
    for _ in 0..1000 {
        let lp = random_lp(&mut rng);
        match solve_lp(&lp) {
            Ok(sol) if sol.status == LpStatus::Optimal => {
                let c = certify(&lp, &sol);
                let gap = c.duality_gap / (1.0 + sol.objective.abs());
                worst_gap = worst_gap.max(gap);
                worst_comp = worst_comp.max(c.complementarity);
                if gap > 1e-6 || c.complementarity > 1e-6 || c.dual_residual > 1e-6 {
                    bad += 1;
                }
            }
            _ => bad += 1,
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(809);
    let (mut milp_bad, mut worst_milp, mut feasible) = (0, 0.0f64, 0);
    for _ in 0..100 {
        let (lp, bins) = random_milp(&mut rng);
        let sol = solve_milp(&lp);
        match (sol, enumerate_binaries(&lp, &bins)) {
            (Ok(s), None) => milp_bad += (s.status != LpStatus::Infeasible) as usize,
            (Ok(s), Some(v)) => {
                feasible += 1;
                worst_milp = worst_milp.max(rel_err(s.objective, v));
                milp_bad += (s.status != LpStatus::Optimal || rel_err(s.objective, v) > 1e-6) as usize;
            }
            (Err(_), _) => milp_bad += 1,
        }
    }
    outcome(
        bad == 0 && milp_bad == 0,
        format!(
            "1000 LPs: {} failures, max rel duality gap {:.1e}, max complementarity {:.1e}; 100 MILPs ({} feasible): {} mismatches, max rel diff {:.1e}",
            bad, worst_gap, worst_comp, feasible, milp_bad, worst_milp
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for toy in 0..20 {
        let p = FlpParams {
            n_sites: rng.gen_range(2..=4),
            n_customers: rng.gen_range(2..=4),
            n_samples: rng.gen_range(2..=5),
            disruption_prob: 0.3,
            ..FlpParams::default()
        };
        let theta = rng.gen_range(0.05..1.5);
        let (flp, s) = generate_flp(&p, 9000 + toy).unwrap();
        let (inst, amb) = flp_to_drtsp(&flp, &s, FlpVariant::DisruptL1_21, theta).unwrap();
        match (solve_drtsp(&inst, &amb), solve_direct(&flp, &s, DirectForm::DisruptL1Plus, theta, NormP::Finite(1.0))) {
            (Ok(full), Ok((plus, _))) => worst = worst.max(rel_err(full.objective, plus)),
            (Err(e), _) | (_, Err(e)) => errors.push(e.to_string()),
        }
    }
    outcome(
        errors.is_empty() && worst <= 1e-8,
        format!("20 toys, full (i, r) sweep vs r = +1 model, max rel diff {:.1e}{}", worst, fmt_errors(&errors)),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "oracle equivalence, GeneralLinf", criterion_1),
        (2, "oracle equivalence, remaining regimes", criterion_2),
        (3, "radius-zero collapse", criterion_3),
        (4, "monotonicity, dominance, upper-bound gap", criterion_4),
        (5, "evaluator-builder consistency", criterion_5),
        (6, "end-to-end facility location vs exhaustive x", criterion_6),
        (7, "facility-location structure at 10 sites, 15 customers, N = 50", criterion_7),
        (8, "LP kernel certification", criterion_8),
        (9, "sign shortcut on DisruptL1_21", criterion_9),
    ];
    let mut failed = 0;
    for (k, name, f) in criteria {
        let start = Instant::now();
        let o = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {} ({}) [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            k,
            name,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{} of 9 criteria failed", failed);
        std::process::exit(1);
    }
}
