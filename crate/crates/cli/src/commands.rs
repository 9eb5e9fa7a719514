use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use budinf::game::{self, GameInstance, PayoffConfig, PayoffOracle, PoaConfig, StrategyProfile};
use budinf::generate::{self, GnpParams, TriggerKind};
use budinf::offline::{self, SolverConfig, SolverMode, DEFAULT_SEARCH_LIMIT};
use budinf::online::{self, ExploreSolver, OnlineConfig};
use budinf::oracle::OracleMode;
use budinf::verify::{self, Scale, Suite, VerifyConfig};
use budinf::{seeds, Exec, InfluenceOracle, Instance, ValueOracle};

use crate::report::{emit, RunReport};
use crate::{Cli, Command, ExploreArg, GameArgs, GenArgs, GenKind, ModeArg, OnlineArgs, SolveArgs, SuiteArg, TriggerArg, VerifyArgs};

const DEFAULT_SCENARIOS: usize = 10_000;
const DEFAULT_GAME_DRAWS: usize = 200;
const DEFAULT_ENUMERATION_LIMIT: u128 = 1 << 20;

/// Runs the parsed command; `Ok(false)` means a verification failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let start = Instant::now();
    let ctx = Ctx::new(cli);
    let mut report = match &cli.command {
        Command::Gen(args) => {
            let text = gen(args, ctx.seed)?;
            emit(&text, ctx.output)?;
            return Ok(true);
        }
        Command::Solve(args) => solve(args, &ctx)?,
        Command::Online(args) => online_cmd(args, &ctx)?,
        Command::Game(args) => game_cmd(args, &ctx)?,
        Command::Verify(args) => verify_cmd(args, &ctx)?,
    };
    report.args = serde_json::to_value(cli)?;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    emit(&serde_json::to_string_pretty(&report)?, ctx.output)?;
    Ok(report.passed)
}

struct Ctx<'a> {
    seed: u64,
    samples: Option<usize>,
    limit: Option<u128>,
    output: Option<&'a Path>,
    exec: Exec,
}

impl<'a> Ctx<'a> {
    fn new(cli: &'a Cli) -> Self {
        let g = &cli.global;
        Ctx {
            seed: g.seed,
            samples: g.samples,
            limit: g.limit,
            output: g.output.as_deref(),
            exec: if g.sequential { Exec::Sequential } else { Exec::Parallel },
        }
    }

    fn enumeration_limit(&self) -> u128 {
        self.limit.unwrap_or(DEFAULT_ENUMERATION_LIMIT)
    }

    fn search_limit(&self) -> u128 {
        self.limit.unwrap_or(DEFAULT_SEARCH_LIMIT)
    }

    fn seeds(&self, streams: &[&str]) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::from([("master".to_string(), self.seed)]);
        for s in streams {
            out.insert((*s).to_string(), seeds::derive(self.seed, s));
        }
        out
    }

    fn report(&self, command: &str, streams: &[&str], digest: Option<String>, body: Value, queries: u64) -> RunReport {
        RunReport {
            command: command.to_string(),
            args: Value::Null,
            seeds: self.seeds(streams),
            instance_digest: digest,
            body,
            oracle_queries: queries,
            passed: true,
            wall_time_ms: 0.0,
        }
    }

    /// Exact when the scenario support fits under the limit, otherwise
    /// Monte Carlo with `--samples` scenarios.
    fn oracle(&self, inst: &Instance) -> InfluenceOracle {
        let m = self.samples.unwrap_or(DEFAULT_SCENARIOS);
        InfluenceOracle::auto(inst, self.enumeration_limit(), m, self.seed).with_exec(self.exec)
    }
}

fn oracle_summary(o: &InfluenceOracle) -> Value {
    json!({ "mode": o.mode(), "scenarios": o.scenarios().len(), "half_width": o.half_width() })
}

fn oracle_streams(o: &InfluenceOracle) -> &'static [&'static str] {
    match o.mode() {
        OracleMode::Exact => &[],
        OracleMode::MonteCarlo => &[seeds::SCENARIO],
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::load(path).with_context(|| format!("loading instance {}", path.display()))
}

fn gen(args: &GenArgs, seed: u64) -> Result<String> {
    Ok(match args.kind {
        GenKind::Gnp => {
            let kind = match args.trigger {
                TriggerArg::EdgeCategorical => TriggerKind::EdgeCategorical,
                TriggerArg::NodeMixture => TriggerKind::NodeMixture,
                TriggerArg::Classical => TriggerKind::Classical,
            };
            let params = GnpParams {
                n: args.n,
                p: args.p,
                support: args.support,
                budget: args.budget,
                capacity: args.capacity,
                kind,
            };
            generate::gnp(&params, seed)?.to_json()
        }
        GenKind::StarPoa => {
            if args.players == 0 {
                bail!("star_poa needs at least one leaf");
            }
            game::star_poa_instance(args.players).to_json()
        }
        GenKind::ClassicalImport => {
            let path = args.edges.as_ref().context("classical_import needs --edges")?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let (n, edges) = generate::parse_edge_list(&text)?;
            generate::classical_import(n.max(args.n), &edges, args.budget)?.to_json()
        }
        GenKind::TwoNodeDemo => generate::two_node_demo().to_json(),
        GenKind::RandomGame => {
            let params = game::RandomGameParams {
                n: args.n,
                players: args.players,
                p: args.p,
                support: args.support,
                max_budget: args.budget,
            };
            game::random_game(&params, seed)?.to_json()
        }
    })
}

fn solve(args: &SolveArgs, ctx: &Ctx) -> Result<RunReport> {
    let inst = load_instance(&args.instance)?;
    let oracle = ctx.oracle(&inst);
    let c = inst.constraints();
    let mode = match args.mode {
        ModeArg::Brute => SolverMode::BruteForce,
        ModeArg::Greedy => SolverMode::Greedy,
        ModeArg::Enum => SolverMode::GreedyPartialEnum,
    };
    let config = SolverConfig { mode, enum_depth: args.enum_depth, search_limit: ctx.search_limit(), exec: ctx.exec };
    let (solution, solved) = offline::solve(&oracle, c, &config)?;
    let hw = oracle.half_width();

    let brute = if c.box_size() <= ctx.search_limit() {
        if mode == SolverMode::BruteForce {
            Some(solution.clone())
        } else {
            Some(offline::brute_force_opt(&oracle, c, ctx.search_limit(), ctx.exec)?)
        }
    } else {
        None
    };
    let ratio = brute.as_ref().map(|b| if b.value > 0.0 { solution.value / b.value } else { 1.0 });
    let body = json!({
        "mode": mode,
        "enum_depth": args.enum_depth,
        "oracle": oracle_summary(&oracle),
        "allocation": solution.allocation,
        "value": solution.value,
        "confidence_interval": [solution.value - hw, solution.value + hw],
        "mode_value": solved.mode_value,
        "best_single_value": solved.best_single_value,
        "used_best_single": solved.used_best_single,
        "brute_force": brute,
        "ratio_vs_brute_force": ratio,
    });
    Ok(ctx.report("solve", oracle_streams(&oracle), Some(inst.digest()), body, oracle.queries()))
}

fn online_cmd(args: &OnlineArgs, ctx: &Ctx) -> Result<RunReport> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        bail!("--alpha must lie in (0, 1)");
    }
    if !(0.0..=1.0).contains(&args.p_secretary) {
        bail!("--p-secretary must lie in [0, 1]");
    }
    if args.trials == 0 {
        bail!("--trials must be positive");
    }
    let inst = load_instance(&args.instance)?;
    let oracle = ctx.oracle(&inst);
    let config = OnlineConfig {
        alpha: args.alpha,
        p_secretary: args.p_secretary,
        explore: match args.explore_solver {
            ExploreArg::Brute => ExploreSolver::Brute,
            ExploreArg::Greedy => ExploreSolver::Greedy,
        },
        exec: ctx.exec,
    };
    let mut summary = online::competitive_trials(&oracle, inst.constraints(), args.trials, ctx.seed, &config)?;
    let records = if args.records { std::mem::take(&mut summary.records) } else { Vec::new() };
    summary.records.clear();
    let body = json!({
        "config": config,
        "oracle": oracle_summary(&oracle),
        "opt_allocation": summary.opt_allocation,
        "opt_value": summary.opt_value,
        "trials": summary.trials,
        "mean_ratio": summary.mean_ratio,
        "standard_error": summary.standard_error,
        "lower_bound": summary.mean_ratio - 3.0 * summary.standard_error,
        "branches": { "secretary": summary.secretary, "light_influence": summary.light_influence },
        "records": records,
    });
    let mut streams = vec![seeds::ARRIVAL, seeds::COINS];
    streams.extend(oracle_streams(&oracle));
    Ok(ctx.report("online", &streams, Some(inst.digest()), body, oracle.queries()))
}

fn load_profile(path: &Path, game: &GameInstance) -> Result<StrategyProfile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let profile: StrategyProfile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if profile.players() != game.player_count() || profile.n() != game.n() {
        bail!(
            "profile is {}x{}, game needs {}x{}",
            profile.players(),
            profile.n(),
            game.player_count(),
            game.n()
        );
    }
    if !game.is_feasible(&profile) {
        bail!("profile violates a player's budget or capacities");
    }
    Ok(profile)
}

fn game_cmd(args: &GameArgs, ctx: &Ctx) -> Result<RunReport> {
    let g = GameInstance::load(&args.game).with_context(|| format!("loading game {}", args.game.display()))?;
    let profile = match &args.profile {
        Some(p) => load_profile(p, &g)?,
        None => StrategyProfile::zeros(g.player_count(), g.n()),
    };
    let config = PayoffConfig {
        draws: ctx.samples.unwrap_or(DEFAULT_GAME_DRAWS),
        enumeration_limit: ctx.enumeration_limit(),
        seed: ctx.seed,
        exec: ctx.exec,
    };
    if config.draws == 0 {
        bail!("--samples must be positive");
    }
    let oracle = PayoffOracle::new(&g, config);
    let limit = ctx.search_limit();

    let mut body = serde_json::Map::new();
    body.insert("oracle".into(), json!({ "mode": oracle.mode(), "draws": oracle.draws() }));
    body.insert("profile".into(), json!(profile));
    body.insert("payoffs".into(), json!(oracle.payoffs(&profile)));
    body.insert("social".into(), json!(oracle.social(&profile)));
    body.insert("nash".into(), json!(game::is_nash(&g, &oracle, &profile, limit)?));

    let mut passed = true;
    let mut streams = vec![seeds::DELAYS, seeds::TIE_BREAK];
    if oracle.mode() == OracleMode::MonteCarlo {
        streams.push(seeds::SCENARIO);
    }
    if args.best_response {
        let responses = (0..g.player_count())
            .map(|i| game::best_response(&g, &oracle, i, &profile, limit))
            .collect::<budinf::Result<Vec<_>>>()?;
        let dynamics = game::best_response_dynamics(&g, &oracle, &profile, args.max_rounds, limit)?;
        body.insert("best_responses".into(), json!(responses));
        body.insert("dynamics".into(), json!(dynamics));
    }
    if args.poa {
        let poa_config = PoaConfig {
            starts: args.starts,
            max_rounds: args.max_rounds,
            seed: ctx.seed,
            limit,
            ..PoaConfig::default()
        };
        let poa = game::empirical_poa(&g, &oracle, &poa_config, std::slice::from_ref(&profile))?;
        body.insert("poa".into(), json!(poa));
        streams.push("poa-starts");
    }
    if args.verify_utility {
        let utility = game::verify_utility_conditions(&g, &oracle, args.utility_samples, ctx.seed);
        passed &= utility.holds();
        body.insert("utility".into(), json!(utility));
    }
    let mut report = ctx.report("game", &streams, Some(g.digest()), Value::Object(body), oracle.queries());
    report.passed = passed;
    Ok(report)
}

fn verify_cmd(args: &VerifyArgs, ctx: &Ctx) -> Result<RunReport> {
    let suite = match args.suite {
        SuiteArg::Lattice => Suite::Lattice,
        SuiteArg::Cascade => Suite::Cascade,
        SuiteArg::Solver => Suite::Solver,
        SuiteArg::Online => Suite::Online,
        SuiteArg::Game => Suite::Game,
        SuiteArg::All => Suite::All,
    };
    let config = VerifyConfig {
        seed: ctx.seed,
        scale: if args.quick { Scale::Quick } else { Scale::Full },
        inject_mutant: args.inject_mutant,
        exec: ctx.exec,
    };
    let reports = verify::run(suite, &config)?;
    let passed = reports.iter().all(|r| r.passed());
    for r in &reports {
        for c in &r.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            log::info!("{status} {} / {} ({} trials, {} failures)", r.suite, c.name, c.trials, c.failures);
        }
    }
    let body = json!({ "passed": passed, "suites": reports });
    let mut report = ctx.report("verify", &[], None, body, 0);
    report.passed = passed;
    Ok(report)
}
