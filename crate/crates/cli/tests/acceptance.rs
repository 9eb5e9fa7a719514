//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.
//!
//! `cargo test -p budinf-cli --test acceptance -- --nocapture`

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

use budinf::game::{self, PayoffConfig, PayoffOracle};
use budinf::verify::{self, Scale, SuiteReport, VerifyConfig, COMPETITIVE_FLOOR};
use budinf::Exec;

type Verdict = (bool, String);
type Criterion = (&'static str, Box<dyn Fn() -> Verdict>);

fn full() -> VerifyConfig {
    VerifyConfig { seed: 0, scale: Scale::Full, inject_mutant: false, exec: Exec::Parallel }
}

/// All named checks exist, ran at least `min_trials` times and never failed.
fn checks_clean(report: &SuiteReport, names: &[&str], min_trials: u64) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        match report.check(name) {
            Some(c) => {
                ok &= c.failures == 0 && c.trials >= min_trials;
                parts.push(format!("{name}: {}/{} failed", c.failures, c.trials));
            }
            None => {
                ok = false;
                parts.push(format!("{name}: missing"));
            }
        }
    }
    (ok, parts.join(", "))
}

fn metric(report: &SuiteReport, check: &str, key: &str) -> f64 {
    report.check(check).and_then(|c| c.metrics.get(key).copied()).unwrap_or(f64::NAN)
}

fn within(start: Instant, limit: Duration, (ok, detail): Verdict) -> Verdict {
    let took = start.elapsed();
    (ok && took < limit, format!("{detail}; {:.1}s (limit {}s)", took.as_secs_f64(), limit.as_secs()))
}

fn lattice() -> Verdict {
    let start = Instant::now();
    let r = verify::lattice_suite(&full()).unwrap();
    let instances = metric(&r, "monotone", "instances");
    let (ok, detail) = checks_clean(&r, &["monotone", "submodular", "weak diminishing returns", "join bound"], 50 * 200);
    within(start, Duration::from_secs(120), (ok && instances >= 50.0, format!("{instances} instances; {detail}")))
}

fn composition() -> Verdict {
    let r = verify::cascade_suite(&full()).unwrap();
    checks_clean(&r, &["composition", "first stage monotone", "first stage coordinate independent"], 10_000)
}

fn classical_reduction() -> Verdict {
    let r = verify::cascade_suite(&full()).unwrap();
    let instances = metric(&r, "classical reduction", "instances");
    let diff = metric(&r, "classical reduction", "max_abs_diff");
    let (ok, detail) = checks_clean(&r, &["classical thresholds", "classical reduction"], 1);
    (ok && instances >= 20.0, format!("{instances} instances, max |diff| {diff:e}; {detail}"))
}

fn dr_counterexample() -> Verdict {
    match verify::dr_counterexample_search(0, 200).unwrap() {
        Some(w) => {
            let ok = w.confirm().unwrap();
            let [f0, f1, f2] = w.values;
            (ok, format!("agent {} at x = {:?}: gains {:.6} then {:.6}", w.agent, w.x.0, f1 - f0, f2 - f1))
        }
        None => (false, "no witness found".into()),
    }
}

fn offline_ratio() -> Verdict {
    let start = Instant::now();
    let r = verify::solver_suite(&full()).unwrap();
    let enum_ratio = metric(&r, "partial enumeration ratio", "min_ratio");
    let greedy_ratio = metric(&r, "greedy or best single ratio", "min_ratio");
    let (ok, detail) = checks_clean(&r, &["partial enumeration ratio", "greedy or best single ratio", "feasible"], 1);
    within(
        start,
        Duration::from_secs(600),
        (ok, format!("min enum/OPT {enum_ratio:.4}, min max(greedy, single)/OPT {greedy_ratio:.4}; {detail}")),
    )
}

fn online_suite() -> SuiteReport {
    verify::online_suite(&full()).unwrap()
}

fn competitive(r: &SuiteReport) -> Verdict {
    let lower = metric(r, "competitive ratio", "min_lower_bound");
    let (ok, detail) = checks_clean(r, &["competitive ratio", "trial allocations feasible"], 1);
    (ok && lower >= COMPETITIVE_FLOOR, format!("min(mean − 3·SE) {lower:.4} ≥ {COMPETITIVE_FLOOR:.4}; {detail}"))
}

fn secretary() -> Verdict {
    let rate = verify::secretary_success_rate(100, 10_000, 0);
    (rate >= 0.35, format!("success rate {rate:.4} over 10^4 trials"))
}

fn variance(r: &SuiteReport) -> Verdict {
    let worst = metric(r, "variance bound", "max_var_over_bound");
    let (ok, detail) = checks_clean(r, &["variance bound", "mean one half", "weights sum to optimum"], 10);
    (ok, format!("max Var/(β/4) {worst:.4}; {detail}"))
}

fn star_game() -> Verdict {
    let g = game::star_poa_instance(5);
    let oracle = PayoffOracle::new(&g, PayoffConfig { draws: 1000, ..Default::default() });
    let center = game::star_all_on_center(5);
    let nash = game::is_nash(&g, &oracle, &center, 1 << 20).unwrap().is_nash;
    let social = oracle.social(&center);
    let payoffs = oracle.payoffs(&center);
    let opt = game::social_optimum(&g, &oracle, 1 << 24).unwrap().value;
    let poa = opt / social;
    let exact = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let ok = nash
        && exact(social, 6.0)
        && exact(opt, 10.0)
        && exact(poa, 10.0 / 6.0)
        && payoffs.iter().all(|&p| exact(p, 6.0 / 5.0));
    (ok, format!("NE {nash}, F(NE) {social}, F(OPT) {opt}, PoA {poa:.6}, payoffs {payoffs:?}"))
}

fn general_game() -> Verdict {
    let r = verify::game_suite(&full()).unwrap();
    let worst = metric(&r, "price of anarchy at most 2", "max_ratio");
    let with_ne = metric(&r, "equilibria found", "games_with_pure_ne");
    let (ok, detail) = checks_clean(&r, &["U1 holds", "U2 holds", "U3 holds"], 20);
    let poa_ok = r.check("price of anarchy at most 2").is_some_and(|c| c.failures == 0);
    (ok && poa_ok && worst <= 2.0 + 1e-6, format!("{with_ne} games with pure NE, max PoA {worst:.4}; {detail}"))
}

fn run_cli(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_budinf")).args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn strip_timing(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("wall_time_ms");
    }
    v
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let setup: &[&[&str]] = &[
        &["gen", "gnp", "--n", "6", "--p", "0.5", "--seed", "7", "-o", "gnp.json"],
        &["gen", "gnp", "--n", "6", "--p", "0.5", "--support", "3", "--seed", "8", "-o", "mc.json"],
        &["gen", "star_poa", "--players", "5", "-o", "star.json"],
        &["gen", "two_node_demo", "-o", "demo.json"],
        &["gen", "random_game", "--n", "5", "--players", "3", "--budget", "2", "--seed", "3", "-o", "rg.json"],
    ];
    for args in setup {
        assert_eq!(run_cli(args, d).0, 0, "{args:?}");
    }
    let commands: &[&[&str]] = &[
        &["gen", "gnp", "--n", "6", "--p", "0.5", "--seed", "7"],
        &["gen", "random_game", "--players", "3", "--seed", "3"],
        &["solve", "gnp.json", "--mode", "brute"],
        &["solve", "gnp.json", "--mode", "enum", "--seed", "5"],
        &["solve", "mc.json", "--mode", "greedy", "--samples", "500", "--limit", "1", "--seed", "5"],
        &["solve", "demo.json"],
        &["online", "gnp.json", "--trials", "300", "--seed", "2", "--records"],
        &["online", "mc.json", "--trials", "300", "--seed", "2", "--samples", "300", "--limit", "1"],
        &["online", "gnp.json", "--trials", "300", "--seed", "2", "--alpha", "0.3", "--explore-solver", "greedy"],
        &["game", "star.json", "--poa", "--best-response", "--samples", "120", "--seed", "4"],
        &["game", "rg.json", "--poa", "--verify-utility", "--samples", "60", "--seed", "4"],
        &["verify", "lattice", "--quick", "--seed", "9"],
        &["verify", "game", "--quick"],
    ];
    let mut mismatched = Vec::new();
    for args in commands {
        let (code_a, a) = run_cli(args, d);
        let (code_b, b) = run_cli(args, d);
        let same = code_a == 0 && code_b == 0 && if args[0] == "gen" { a == b } else { strip_timing(&a) == strip_timing(&b) };
        if !same {
            mismatched.push(args.join(" "));
        }
    }
    // the execution policy must not change results either
    for args in [&["online", "gnp.json", "--trials", "300", "--seed", "2"][..], &["solve", "mc.json", "--samples", "800", "--limit", "1"]] {
        let par = strip_timing(&run_cli(args, d).1);
        let mut seq_args = args.to_vec();
        seq_args.push("--sequential");
        let seq = strip_timing(&run_cli(&seq_args, d).1);
        if par["body"] != seq["body"] || par["oracle_queries"] != seq["oracle_queries"] {
            mismatched.push(format!("{} (sequential vs parallel)", args.join(" ")));
        }
    }
    let total = commands.len() + 2;
    (mismatched.is_empty(), format!("{}/{total} commands reproducible; mismatched: {mismatched:?}", total - mismatched.len()))
}

#[test]
fn acceptance() {
    let online = catch_unwind(online_suite).ok();
    let online_verdict = |f: fn(&SuiteReport) -> Verdict| {
        let report = online.clone();
        move || match &report {
            Some(r) => f(r),
            None => (false, "online suite panicked".into()),
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("lattice submodularity suite", Box::new(lattice)),
        ("composition and coordinate independence", Box::new(composition)),
        ("classical reduction", Box::new(classical_reduction)),
        ("diminishing returns counterexample", Box::new(dr_counterexample)),
        ("offline ratio", Box::new(offline_ratio)),
        ("online competitive bound", Box::new(online_verdict(competitive))),
        ("secretary subroutine", Box::new(secretary)),
        ("variance bound", Box::new(online_verdict(variance))),
        ("game tight instance", Box::new(star_game)),
        ("game general bounds", Box::new(general_game)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| (false, "panicked".into()));
        let line = format!("{} criterion {:>2} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" }, i + 1);
        std::io::stderr().lock().write_all(line.as_bytes()).unwrap();
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
