//! Acceptance suite. Runs every criterion, prints one verdict line each and
//! exits non-zero if the set of failing criteria differs from
//! `EXPECTED_FAILURES`. Pass criterion numbers as arguments to run a subset.
//!
//! Expected failures are claims this code shows to be unattainable; each
//! still prints FAIL.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use boa::cost::{euclidean, project_geo, GeoBoundingBox};
use boa::fixtures::{toy_instance, TOY_C_MAX};
use boa::genbench::{gen_synthetic, InstanceDoc, Provenance, SyntheticConfig};
use boa::harness::{
    random_small_instance, replay_toy, run_real, run_sweep, write_real_csv, Algorithm, ArrivalModel, RealOptions,
    ResultRow, SweepParam, SweepSpec,
};
use boa::model::{Location, EPS};
use boa::offline::{
    brute_force_optima, brute_force_optimal, budget_ssp_optimal, budgeted_flow, build_flow_network, min_cost_max_flow,
};
use boa::online::{extract_ot_threshold, greedy_rt_expectation, kappa_support, run_online, ArrivalStream, ThresholdPolicy};
use rayon::prelude::*;

/// Criterion 1 asks for an expectation of 2.5 from grade sizes 2, 3, 2, 2,
/// whose mean is 2.25. Criterion 5's bound has a counterexample in the
/// fixed instance set.
const EXPECTED_FAILURES: [u32; 2] = [1, 5];

const SMALL_TRIALS: u64 = 500;
const SMALL_MAX_SIZE: usize = 6;

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn toy_criterion() -> Verdict {
    let start = Instant::now();
    let t = replay_toy().expect("toy replay");
    let grades_ok = t.grade_sizes == [2, 3, 2, 2];
    let mean_of_grades = t.grade_sizes.iter().sum::<usize>() as f64 / t.grade_sizes.len() as f64;
    let checks = [
        ("opt 4/9", (t.opt_size, t.opt_cost) == (4, 9.0)),
        ("greedy 2/10", (t.greedy_size, t.greedy_cost) == (2, 10.0)),
        ("grades 2,3,2,2", grades_ok),
        ("grade e^1 budget 4", t.grade_costs[1] == 4.0),
        ("expectation is the grade mean", t.rt_expectation == mean_of_grades),
        ("ot 4/10 at tau 5", (t.ot_threshold, t.ot_size, t.ot_cost) == (5.0, 4, 10.0)),
        ("runtime < 1 s", start.elapsed() < Duration::from_secs(1)),
        ("expectation 2.5", t.rt_expectation == 2.5),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        failed.is_empty(),
        format!(
            "{}/{} checks; expectation {} (mean of reproduced grades {:?}); failed: {:?}",
            checks.len() - failed.len(),
            checks.len(),
            t.rt_expectation,
            t.grade_sizes,
            failed
        ),
    )
}

struct SmallResults {
    exact_mismatch: Vec<u64>,
    convexity_violations: usize,
    solver_calls: usize,
    rt_violations: Vec<u64>,
    ot_violations: Vec<u64>,
    unique: usize,
    elapsed: Duration,
}

/// Criteria 2 to 5 share one instance set, fixed in advance.
fn small_results() -> SmallResults {
    let start = Instant::now();
    struct One {
        seed: u64,
        exact_ok: bool,
        convex: [bool; 2],
        rt_ok: bool,
        ot_ok: Option<bool>,
    }
    let per: Vec<One> = (0..SMALL_TRIALS)
        .into_par_iter()
        .map(|seed| {
            let inst = random_small_instance(seed, SMALL_MAX_SIZE).unwrap();
            let exact = brute_force_optimal(&inst).unwrap();
            let opt = budget_ssp_optimal(&inst);
            let mut net = build_flow_network(&inst);
            let convex = [budgeted_flow(&inst).is_convex(), min_cost_max_flow(&mut net).is_convex()];
            let stream = ArrivalStream::new(inst.workers.clone()).unwrap();
            let grades = kappa_support(inst.c_max).unwrap().count() as f64;
            let e = greedy_rt_expectation(&stream, &inst.batch, inst.metric, inst.c_max).unwrap();
            let ot_ok = (!opt.is_empty() && brute_force_optima(&inst).unwrap().len() == 1).then(|| {
                let tau = extract_ot_threshold(&opt).unwrap();
                let ot = run_online(&stream, &inst.batch, inst.metric, ThresholdPolicy::Fixed { tau }).unwrap();
                ot.matching.size() as f64 >= (opt.total_cost / tau + EPS).floor()
            });
            One {
                seed,
                exact_ok: opt.size() == exact.size(),
                convex,
                rt_ok: e >= opt.size() as f64 / grades - EPS,
                ot_ok,
            }
        })
        .collect();
    SmallResults {
        exact_mismatch: per.iter().filter(|o| !o.exact_ok).map(|o| o.seed).collect(),
        convexity_violations: per.iter().flat_map(|o| o.convex).filter(|c| !c).count(),
        solver_calls: per.len() * 2,
        rt_violations: per.iter().filter(|o| !o.rt_ok).map(|o| o.seed).collect(),
        ot_violations: per.iter().filter(|o| o.ot_ok == Some(false)).map(|o| o.seed).collect(),
        unique: per.iter().filter(|o| o.ot_ok.is_some()).count(),
        elapsed: start.elapsed(),
    }
}

fn convexity_criterion(small: &SmallResults) -> Verdict {
    let toy = toy_instance();
    let mut net = build_flow_network(&toy);
    let mut violations = small.convexity_violations;
    let mut calls = small.solver_calls + 2;
    violations += usize::from(!budgeted_flow(&toy).is_convex()) + usize::from(!min_cost_max_flow(&mut net).is_convex());

    let large: Vec<[bool; 2]> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let cfg = SyntheticConfig {
                n_workers: 200,
                n_tasks: 200,
                budget: 200.0,
                seed,
                ..SyntheticConfig::default()
            };
            let inst = gen_synthetic(&cfg).unwrap();
            let mut net = build_flow_network(&inst);
            [budgeted_flow(&inst).is_convex(), min_cost_max_flow(&mut net).is_convex()]
        })
        .collect();
    calls += large.len() * 2;
    violations += large.iter().flatten().filter(|c| !**c).count();
    verdict(violations == 0, format!("{violations} violations over {calls} solver runs"))
}

fn sweep_means(rows: &[ResultRow], algo: Algorithm) -> f64 {
    let row = rows.iter().find(|r| r.algorithm == algo).expect("row");
    assert_eq!(row.failed, 0, "{row:?}");
    row.mean_size.unwrap()
}

fn ordering_criterion() -> Verdict {
    let start = Instant::now();
    let spec = SweepSpec {
        base: SyntheticConfig {
            n_workers: 1500,
            n_tasks: 1500,
            budget: 750.0,
            ..SyntheticConfig::default()
        },
        param: SweepParam::NWorkers,
        values: vec![1500.0],
        arrival: ArrivalModel::Adversary,
        seeds: 20,
        algorithms: vec![Algorithm::OptExact, Algorithm::Greedy, Algorithm::GreedyRtExp, Algorithm::GreedyOt],
    };
    let rows = run_sweep(&spec).unwrap();
    let [opt, greedy, rt, ot] = [Algorithm::OptExact, Algorithm::Greedy, Algorithm::GreedyRtExp, Algorithm::GreedyOt]
        .map(|a| sweep_means(&rows, a));
    let elapsed = start.elapsed();
    let pass = ot >= rt && rt >= greedy && ot <= opt && rt <= opt && greedy <= opt && ot >= 1.1 * greedy
        && elapsed < Duration::from_secs(300);
    verdict(
        pass,
        format!(
            "means over 20 seeds: opt {opt}, greedy-ot {ot}, greedy-rt-exp {rt}, greedy {greedy}; ot/greedy {:.3}; {:.1} s",
            ot / greedy,
            elapsed.as_secs_f64()
        ),
    )
}

fn adversary_criterion() -> Verdict {
    let sweep = |arrival| {
        let spec = SweepSpec {
            base: SyntheticConfig::default(),
            param: SweepParam::Budget,
            values: vec![3000.0],
            arrival,
            seeds: 20,
            algorithms: vec![Algorithm::Greedy],
        };
        sweep_means(&run_sweep(&spec).unwrap(), Algorithm::Greedy)
    };
    let (adv, rnd) = (sweep(ArrivalModel::Adversary), sweep(ArrivalModel::Random));
    verdict(adv <= rnd, format!("greedy mean size: adversary {adv}, random {rnd} (20 seeds, defaults)"))
}

fn kappa_criterion() -> Verdict {
    let a = kappa_support(TOY_C_MAX).unwrap();
    let b = kappa_support(1000.0).unwrap();
    verdict(
        a == (0..=3) && b.clone().count() == 8,
        format!("support(16) = {a:?}, support(1000) has {} values", b.count()),
    )
}

fn geo_criterion() -> Verdict {
    let bb = GeoBoundingBox::NYC;
    let ne = project_geo(bb.lat_max, bb.lon_max, &bb).unwrap();
    let diag = euclidean(Location { x: 0.0, y: 0.0 }, ne);
    let rel = (diag - 41.7027).abs() / 41.7027;
    verdict(rel <= 0.02, format!("diagonal {diag:.4} km, {:.2}% from 41.7027", rel * 100.0))
}

/// Numbers recomputed independently from the fixture CSVs and the seeded
/// task draw (exhaustive min-cost flow over k, plain greedy loops).
const REAL_GOLDEN: &str = "\
algorithm,size,used_budget,threshold
opt-alg1,17,28.073280068662992,
opt-exact,19,28.261462411517797,
greedy,12,29.87790118408306,
greedy-rt,12,29.87790118408306,20.085536923187668
greedy-rt-exp,11.6,23.709030413042093,
greedy-ot,18,25.855079858569464,2.62520244417927
";

fn real_options() -> RealOptions {
    RealOptions::new(30.0, 40, 7)
}

fn real_criterion() -> Verdict {
    let csv = || {
        let table = run_real(&fixture("pickups_day.csv"), &fixture("pickups_history.csv"), &real_options()).unwrap();
        let mut buf = Vec::new();
        write_real_csv(&mut buf, &table, false).unwrap();
        (table, String::from_utf8(buf).unwrap())
    };
    let (table, first) = csv();
    let (_, second) = csv();
    verdict(
        first == second && first == REAL_GOLDEN && table.target_workers == 42,
        format!(
            "{} workers, {} tasks; deterministic: {}; golden: {}",
            table.target_workers,
            table.tasks,
            first == second,
            first == REAL_GOLDEN
        ),
    )
}

fn run_cli(args: &[String]) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_boa")).args(args).output().ok()?.status.code()
}

fn cli_determinism_criterion() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    fs::write(p("config.json"), r#"{"n_workers": 300, "n_tasks": 300, "budget": 150, "seed": 11}"#).unwrap();
    let history = gen_synthetic(&SyntheticConfig {
        n_workers: 300,
        n_tasks: 300,
        budget: 150.0,
        seed: 12,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let doc = InstanceDoc::new(history, Provenance::Fixture { name: "history".into() });
    fs::write(p("history.json"), doc.to_json().unwrap()).unwrap();
    fs::write(
        p("spec.json"),
        r#"{"base": {"n_workers": 200, "n_tasks": 200}, "param": "budget", "values": [50, 100],
            "arrival": "adversary", "seeds": 3,
            "algorithms": ["opt-alg1", "opt-exact", "greedy", "greedy-rt", "greedy-rt-exp", "greedy-ot"]}"#,
    )
    .unwrap();
    let day = fixture("pickups_day.csv").to_string_lossy().into_owned();
    let hist = fixture("pickups_history.csv").to_string_lossy().into_owned();
    let args = |a: &[&str]| a.iter().map(|s| s.to_string()).collect::<Vec<_>>();

    // (arguments, output files, exit codes that count as a completed run)
    let commands = |round: u32| {
        let o = |name: &str| p(&format!("{round}-{name}"));
        let mut c = vec![
            (args(&["gen", "--config", &p("config.json"), "--out", &o("inst.json")]), vec![o("inst.json")], vec![0]),
            (
                args(&["sweep", "--spec", &p("spec.json"), "--out", &o("sweep.csv")]),
                vec![o("sweep.csv"), o("sweep.spec.json")],
                vec![0],
            ),
            (
                args(&["oracle-check", "--trials", "60", "--max-size", "5", "--seed", "3", "--report", &o("oracle.json")]),
                vec![o("oracle.json")],
                vec![0, 1],
            ),
            (args(&["ingest", "--csv", &day, "--out", &o("workers.json")]), vec![o("workers.json")], vec![0]),
            (
                args(&["real", "--pickups", &day, "--history", &hist, "--budget", "30", "--tasks", "40", "--seed", "7",
                    "--out", &o("real.csv")]),
                vec![o("real.csv")],
                vec![0],
            ),
        ];
        for algo in Algorithm::ALL {
            for order in ["adversary", "random"] {
                let out = o(&format!("run-{algo}-{order}.json"));
                c.push((
                    args(&["run", "--instance", &p("history.json"), "--algo", algo.name(), "--order", order, "--seed",
                        "5", "--ot-history", &p("history.json"), "--out", &out]),
                    vec![out],
                    vec![0],
                ));
            }
        }
        c
    };

    let mut rounds: Vec<Vec<Vec<u8>>> = Vec::new();
    let mut n_commands = 0;
    for round in 0..2 {
        let mut files = Vec::new();
        let cmds = commands(round);
        n_commands = cmds.len();
        for (a, outs, ok_codes) in cmds {
            match run_cli(&a) {
                Some(code) if ok_codes.contains(&code) => {}
                other => return verdict(false, format!("{a:?} exited with {other:?}")),
            }
            for f in outs {
                files.push(fs::read(&f).unwrap_or_default());
            }
        }
        rounds.push(files);
    }
    let differing = rounds[0].iter().zip(&rounds[1]).filter(|(a, b)| a != b).count();
    let empty = rounds[0].iter().filter(|f| f.is_empty()).count();
    verdict(
        differing == 0 && empty == 0,
        format!(
            "{} output files from {n_commands} commands, {differing} differ between runs, {empty} empty",
            rounds[0].len()
        ),
    )
}

fn instance_set_note(small: &SmallResults) -> String {
    format!("{SMALL_TRIALS} instances (seeds 0..{SMALL_TRIALS}, size <= {SMALL_MAX_SIZE})")
        + &format!(", {:.1} s", small.elapsed.as_secs_f64())
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |n: u32| selected.is_empty() || selected.contains(&n);
    let small = (2..=5).any(want).then(small_results);
    let small_ref = || small.as_ref().unwrap();

    let criteria: Vec<Criterion> = vec![
        (1, "toy example reproduction", Box::new(toy_criterion)),
        (
            2,
            "budget ssp equals brute force",
            Box::new(|| {
                let s = small_ref();
                verdict(
                    s.exact_mismatch.is_empty() && s.elapsed < Duration::from_secs(60),
                    format!("{} mismatches over {}", s.exact_mismatch.len(), instance_set_note(s)),
                )
            }),
        ),
        (3, "ssp augmentation costs non-decreasing", Box::new(|| convexity_criterion(small_ref()))),
        (
            4,
            "greedy-rt expectation bound",
            Box::new(|| {
                let s = small_ref();
                verdict(
                    s.rt_violations.is_empty(),
                    format!("violations at seeds {:?} over {}", s.rt_violations, instance_set_note(s)),
                )
            }),
        ),
        (
            5,
            "self-guided greedy-ot size bound",
            Box::new(|| {
                let s = small_ref();
                verdict(
                    s.ot_violations.is_empty(),
                    format!("violations at seeds {:?} over {} unique-optimum instances", s.ot_violations, s.unique),
                )
            }),
        ),
        (6, "adversary ordering of algorithms", Box::new(ordering_criterion)),
        (7, "adversary ordering hurts greedy", Box::new(adversary_criterion)),
        (8, "kappa support", Box::new(kappa_criterion)),
        (9, "projected region diagonal", Box::new(geo_criterion)),
        (10, "real-data pipeline golden output", Box::new(real_criterion)),
        (11, "cli determinism", Box::new(cli_determinism_criterion)),
    ];

    let mut unexpected = Vec::new();
    for (n, name, run) in &criteria {
        if !want(*n) {
            continue;
        }
        let v = run();
        let expected_fail = EXPECTED_FAILURES.contains(n);
        let tag = match (v.pass, expected_fail) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!("criterion {n:>2} {tag:<15} {name}: {}", v.detail);
        if v.pass == expected_fail {
            unexpected.push(*n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
