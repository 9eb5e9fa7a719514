//! Property batteries behind `budinf verify` and the acceptance tests.
//!
//! Each suite draws random instances from its own seed stream, runs a set
//! of named checks and records, per check, how many trials ran, how many
//! failed and the first counterexample. Failures are data: nothing here
//! panics on a violated property.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cascade::{self, DEFAULT_ENUMERATION_LIMIT};
use crate::error::Result;
use crate::game::{self, equilibrium, GameInstance, PayoffConfig, PayoffOracle, PoaConfig, RandomGameParams};
use crate::generate::{self, GnpParams, TriggerKind};
use crate::graph::{DirectedGraph, Edge};
use crate::instance::{Instance, InstanceFile};
use crate::lattice::{Allocation, BudgetConstraints};
use crate::offline::{self, DEFAULT_SEARCH_LIMIT};
use crate::online::{self, ExploreSolver, OnlineConfig, RestrictedOracle};
use crate::oracle::{CachedOracle, FnOracle, InfluenceOracle, ValueOracle};
use crate::par::Exec;
use crate::seeds;
use crate::triggering;

/// Slack on every inequality between oracle values.
pub const TOL: f64 = 1e-9;
/// Competitive ratio floor `1 / (15e)`.
pub const COMPETITIVE_FLOOR: f64 = 1.0 / (15.0 * std::f64::consts::E);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub trials: u64,
    pub failures: u64,
    pub counterexample: Option<Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
}

impl Check {
    fn new(name: &str) -> Self {
        Check { name: name.into(), trials: 0, failures: 0, counterexample: None, metrics: BTreeMap::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(witness());
            }
        }
    }

    fn track_min(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.into()).or_insert(v);
        *e = e.min(v);
    }

    fn track_max(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.into()).or_insert(v);
        *e = e.max(v);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.into(), checks: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn check_mut(&mut self, name: &str) -> &mut Check {
        if let Some(k) = self.checks.iter().position(|c| c.name == name) {
            &mut self.checks[k]
        } else {
            self.checks.push(Check::new(name));
            self.checks.last_mut().expect("just pushed")
        }
    }

    fn record(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> Value) {
        self.check_mut(name).record(ok, witness);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Small batteries for smoke runs.
    Quick,
    /// Full sizes.
    #[default]
    Full,
}

impl Scale {
    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            Scale::Quick => quick,
            Scale::Full => full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub scale: Scale,
    /// Replace `f` by `−f` in the lattice battery; the battery must then fail.
    pub inject_mutant: bool,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 0, scale: Scale::Full, inject_mutant: false, exec: Exec::default() }
    }
}

/// `−f`: every marginal negated.
pub struct NegatedOracle<O>(pub O);

impl<O: ValueOracle> ValueOracle for NegatedOracle<O> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn value(&self, b: &[u32]) -> f64 {
        -self.0.value(b)
    }
    fn queries(&self) -> u64 {
        self.0.queries()
    }
}

/// Random instance with `2..=max_n` nodes, budget `1..=max_budget`, at
/// most `max_support` outcomes per node (node mixture or classical laws)
/// and random capacities in `1..=B`.
pub fn suite_instance(seed: u64, index: u64, max_n: usize, max_budget: u32, max_support: usize) -> Result<Instance> {
    let mut rng = seeds::rng(seeds::derive_indexed(seed, "suite-instance", index));
    let n = rng.random_range(2..=max_n);
    let budget = rng.random_range(1..=max_budget);
    let kind = if rng.random_bool(0.7) { TriggerKind::NodeMixture } else { TriggerKind::Classical };
    let params = GnpParams {
        n,
        p: rng.random_range(0.2..0.6),
        support: rng.random_range(1..=max_support),
        budget,
        capacity: None,
        kind,
    };
    let inst = generate::gnp(&params, rng.random())?;
    let caps = (0..n).map(|_| rng.random_range(1..=budget)).collect();
    inst.with_constraints(BudgetConstraints::new(budget, caps)?)
}

fn random_vector<R: Rng + ?Sized>(caps: &[u32], rng: &mut R) -> Allocation {
    Allocation(caps.iter().map(|&c| rng.random_range(0..=c)).collect())
}

/// Monotonicity, lattice submodularity, weak diminishing returns for
/// `x ≤ y` and the bound `f(x∨y) ≤ f(x) + Σ_{y_i > x_i} (f(x ∨ y_iχ_i) − f(x))`
/// on `pairs` random pairs from the box `[0, caps]`.
pub fn lattice_battery<O, R>(oracle: &O, caps: &[u32], pairs: usize, rng: &mut R, report: &mut SuiteReport, prefix: &str)
where
    O: ValueOracle + ?Sized,
    R: Rng + ?Sized,
{
    let name = |s: &str| format!("{prefix}{s}");
    for _ in 0..pairs {
        let x = random_vector(caps, rng);
        let y = random_vector(caps, rng);
        let join = x.join(&y).expect("same length");
        let meet = x.meet(&y).expect("same length");
        let (fx, fy, fj, fm) = (oracle.value(&x), oracle.value(&y), oracle.value(&join), oracle.value(&meet));
        let pair = || json!({"x": x, "y": y, "f_x": fx, "f_y": fy, "f_join": fj, "f_meet": fm});

        let mono = fm <= fx + TOL && fm <= fy + TOL && fx <= fj + TOL && fy <= fj + TOL;
        report.record(&name("monotone"), mono, pair);
        report.record(&name("submodular"), fx + fy + TOL >= fj + fm, pair);

        let i = rng.random_range(0..caps.len());
        if caps[i] > 0 {
            let k = rng.random_range(1..=caps[i]);
            let lo_gain = oracle.value(&meet.add_chi(i, k).expect("in range")) - fm;
            let hi_gain = oracle.value(&y.add_chi(i, k).expect("in range")) - fy;
            report.record(&name("weak diminishing returns"), lo_gain + TOL >= hi_gain, || {
                json!({"x": meet, "y": y, "agent": i, "k": k, "gain_x": lo_gain, "gain_y": hi_gain})
            });
        }

        let bound: f64 = fx
            + (0..caps.len())
                .filter(|&j| y[j] > x[j])
                .map(|j| oracle.value(&x.add_chi(j, y[j]).expect("in range")) - fx)
                .sum::<f64>();
        report.record(&name("join bound"), fj <= bound + TOL, || json!({"x": x, "y": y, "f_join": fj, "bound": bound}));
    }
}

/// Lattice laws of exact `f` on random instances (`n ≤ 6`, `B ≤ 3`, at most
/// three outcomes per node), plus the same battery on Monte Carlo
/// oracles for every tenth instance.
pub fn lattice_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("lattice");
    let instances = config.scale.pick(8, 50);
    let pairs = config.scale.pick(40, 200);
    let mut rng = seeds::rng(seeds::derive(config.seed, "verify-lattice"));
    for k in 0..instances {
        let inst = suite_instance(config.seed, k as u64, 6, 3, 3)?;
        let exact = CachedOracle::new(InfluenceOracle::exact(&inst, DEFAULT_ENUMERATION_LIMIT)?.with_exec(config.exec));
        let caps = &inst.constraints().capacities;
        if config.inject_mutant {
            lattice_battery(&NegatedOracle(&exact), caps, pairs, &mut rng, &mut report, "");
        } else {
            lattice_battery(&exact, caps, pairs, &mut rng, &mut report, "");
        }
        if k % 10 == 0 {
            let mc = CachedOracle::new(InfluenceOracle::monte_carlo(&inst, 500, rng.random()).with_exec(config.exec));
            lattice_battery(&mc, caps, pairs / 2, &mut rng, &mut report, "monte carlo ");
        }
    }
    report.check_mut("monotone").metrics.insert("instances".into(), instances as f64);
    Ok(report)
}

/// Exact influence of an independent-cascade graph by enumerating every
/// live-edge subset. `b` seeds the nodes with a positive entry.
pub fn live_edge_influence(n: usize, edges: &[(usize, usize, f64)], b: &[u32]) -> f64 {
    assert!(edges.len() <= 20, "live-edge enumeration is exponential in the edge count");
    let mut total = 0.0;
    for mask in 0u32..(1 << edges.len()) {
        let mut p = 1.0;
        let mut adj = vec![Vec::new(); n];
        for (k, &(u, v, q)) in edges.iter().enumerate() {
            if mask & (1 << k) != 0 {
                p *= q;
                adj[u].push(v);
            } else {
                p *= 1.0 - q;
            }
        }
        let mut seen: Vec<bool> = b.iter().map(|&x| x > 0).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| seen[v]).collect();
        while let Some(u) = queue.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        total += p * seen.iter().filter(|&&s| s).count() as f64;
    }
    total
}

fn random_ic_graph<R: Rng + ?Sized>(rng: &mut R) -> (usize, Vec<(usize, usize, f64)>) {
    let n = rng.random_range(3..=7);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    pairs.shuffle(rng);
    let m = rng.random_range(1..=pairs.len().min(12));
    let edges = pairs[..m].iter().map(|&(u, v)| (u, v, rng.random_range(0.05..0.95))).collect();
    (n, edges)
}

/// Per-node subset laws of an independent-cascade graph.
fn ic_subset_laws(graph: &DirectedGraph, edges: &[(usize, usize, f64)]) -> Vec<Vec<(f64, Vec<usize>)>> {
    (0..graph.n())
        .map(|v| {
            let incoming: Vec<(usize, f64)> = edges.iter().filter(|e| e.1 == v).map(|e| (e.0, e.2)).collect();
            if incoming.is_empty() {
                return Vec::new();
            }
            (0u32..(1 << incoming.len()))
                .map(|mask| {
                    let mut p = 1.0;
                    let mut set = Vec::new();
                    for (k, &(u, q)) in incoming.iter().enumerate() {
                        if mask & (1 << k) != 0 {
                            p *= q;
                            set.push(u);
                        } else {
                            p *= 1.0 - q;
                        }
                    }
                    (p, set)
                })
                .collect()
        })
        .collect()
}

/// An instance with `f(x + χ_i) − f(x) < f(x + 2χ_i) − f(x + χ_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrWitness {
    pub instance: InstanceFile,
    pub x: Allocation,
    pub agent: usize,
    /// `f(x)`, `f(x + χ_i)`, `f(x + 2χ_i)`.
    pub values: [f64; 3],
}

impl DrWitness {
    /// Recomputes the three values from the stored instance.
    pub fn confirm(&self) -> Result<bool> {
        let inst = Instance::from_file(self.instance.clone())?;
        let o = InfluenceOracle::exact(&inst, DEFAULT_ENUMERATION_LIMIT)?;
        let mut b = self.x.clone();
        let f0 = o.value(&b);
        b[self.agent] += 1;
        let f1 = o.value(&b);
        b[self.agent] += 1;
        let f2 = o.value(&b);
        Ok(f1 - f0 < f2 - f1 - TOL)
    }
}

/// Searches small random edge-threshold instances for a violation of
/// coordinate-wise diminishing returns.
pub fn dr_counterexample_search(seed: u64, attempts: usize) -> Result<Option<DrWitness>> {
    let mut rng = seeds::rng(seeds::derive(seed, "dr-search"));
    for _ in 0..attempts {
        let params = GnpParams {
            n: rng.random_range(2..=4),
            p: 0.5,
            support: 2,
            budget: rng.random_range(2..=3),
            capacity: None,
            kind: TriggerKind::EdgeCategorical,
        };
        let inst = generate::gnp(&params, rng.random())?;
        let o = InfluenceOracle::exact(&inst, DEFAULT_ENUMERATION_LIMIT)?;
        let c = inst.constraints();
        for x in c.feasible_allocations() {
            for i in 0..inst.n() {
                if x[i] + 2 > c.capacities[i] || x.total() + 2 > c.budget as u64 {
                    continue;
                }
                let mut b = x.clone();
                let f0 = o.value(&b);
                b[i] += 1;
                let f1 = o.value(&b);
                b[i] += 1;
                let f2 = o.value(&b);
                if f1 - f0 < f2 - f1 - TOL {
                    return Ok(Some(DrWitness { instance: inst.to_file(), x, agent: i, values: [f0, f1, f2] }));
                }
            }
        }
    }
    Ok(None)
}

/// Step cascade against the two-stage composition, monotonicity and
/// coordinate independence of the first stage, classical "never"
/// thresholds, the classical reduction and the diminishing-returns
/// counterexample.
pub fn cascade_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("cascade");
    let pairs = config.scale.pick(1_000, 10_000);
    let per_instance = 100;
    let mut rng = seeds::rng(seeds::derive(config.seed, "verify-cascade"));
    let kinds = [TriggerKind::EdgeCategorical, TriggerKind::NodeMixture, TriggerKind::Classical];
    let mut inst = None;
    for k in 0..pairs {
        if k % per_instance == 0 {
            let params = GnpParams {
                n: rng.random_range(2..=12),
                p: rng.random_range(0.1..0.4),
                support: 3,
                budget: rng.random_range(1..=3),
                capacity: None,
                kind: kinds[(k / per_instance) % 3],
            };
            inst = Some(generate::gnp(&params, rng.random())?);
        }
        let inst = inst.as_ref().expect("set above");
        let g = inst.graph();
        let caps = &inst.constraints().capacities;
        let s = cascade::sample_scenario_with(inst, &mut rng);
        let b = random_vector(caps, &mut rng);
        let (step, _) = cascade::step_cascade(g, &s, &b);
        let g_b = cascade::first_stage(g, &s, &b);
        let composed = cascade::second_stage(g, &s, &g_b);
        report.record("composition", step == composed, || json!({"thresholds": s.thresholds, "b": b, "edges": g.edges()}));

        let y = b.join(&random_vector(caps, &mut rng)).expect("same length");
        let g_y = cascade::first_stage(g, &s, &y);
        let mono = g_b.iter().zip(&g_y).all(|(&a, &c)| !a || c);
        report.record("first stage monotone", mono, || json!({"thresholds": s.thresholds, "x": b, "y": y}));

        let z = random_vector(caps, &mut rng);
        let g_z = cascade::first_stage(g, &s, &z);
        let g_bz = cascade::first_stage(g, &s, &b.join(&z).expect("same length"));
        let indep = (0..g.n()).all(|v| !g_bz[v] || g_b[v] || g_z[v]);
        report.record("first stage coordinate independent", indep, || json!({"thresholds": s.thresholds, "x": b, "y": z}));

        if matches!(inst.triggering(), triggering::TriggeringDistribution::Classical(_)) {
            let never = inst.budget() + 1;
            let ok = s.thresholds.iter().all(|&t| t == 0 || t == never);
            report.record("classical thresholds", ok, || json!({"thresholds": s.thresholds, "budget": inst.budget()}));
        }
    }

    let reductions = config.scale.pick(5, 25);
    for _ in 0..reductions {
        let (n, edges) = random_ic_graph(&mut rng);
        let list: Vec<Edge> = edges.iter().map(|&(from, to, _)| Edge { from, to }).collect();
        let graph = DirectedGraph::new(n, &list)?;
        let budget = rng.random_range(1..=3);
        let dist = triggering::encode_classical(&graph, ic_subset_laws(&graph, &edges), budget)?;
        let inst = Instance::new(graph, dist, BudgetConstraints::uniform(n, budget, 1)?)?;
        let o = InfluenceOracle::exact(&inst, DEFAULT_ENUMERATION_LIMIT)?;
        let mut worst: f64 = 0.0;
        for b in inst.constraints().feasible_allocations() {
            let ours = o.value(&b);
            let reference = live_edge_influence(n, &edges, &b);
            worst = worst.max((ours - reference).abs());
            report.record("classical reduction", (ours - reference).abs() <= 1e-12, || {
                json!({"n": n, "edges": edges, "b": b, "ours": ours, "reference": reference})
            });
        }
        report.check_mut("classical reduction").track_max("max_abs_diff", worst);
    }
    report.check_mut("classical reduction").metrics.insert("instances".into(), reductions as f64);

    let witness = dr_counterexample_search(config.seed, 200)?;
    let confirmed = match &witness {
        Some(w) => w.confirm()?,
        None => false,
    };
    report.record("diminishing returns fails", confirmed, || json!("no counterexample found"));
    if let Some(w) = witness {
        let c = report.check_mut("diminishing returns fails");
        c.metrics.insert("gain_first".into(), w.values[1] - w.values[0]);
        c.metrics.insert("gain_second".into(), w.values[2] - w.values[1]);
    }
    Ok(report)
}

/// Partial enumeration and greedy ratios against brute force on random
/// instances with `n ≤ 5`, `B ≤ 4`.
pub fn solver_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("solver");
    let instances = config.scale.pick(6, 40);
    let target = 1.0 - (-1.0f64).exp();
    for k in 0..instances {
        let inst = suite_instance(seeds::derive(config.seed, "verify-solver"), k as u64, 5, 4, 3)?;
        let o = CachedOracle::new(InfluenceOracle::exact(&inst, DEFAULT_ENUMERATION_LIMIT)?.with_exec(config.exec));
        let c = inst.constraints();
        let opt = offline::brute_force_opt(&o, c, DEFAULT_SEARCH_LIMIT, config.exec)?;
        let greedy = offline::density_greedy(&o, c);
        let single = offline::best_single(&o, c);
        let enums: Vec<_> = (1..=3)
            .map(|d| offline::greedy_partial_enum(&o, c, d, config.exec))
            .collect::<Result<Vec<_>>>()?;
        let ratio = |v: f64| if opt.value > 0.0 { v / opt.value } else { 1.0 };
        let witness = || json!({"instance": inst.to_file(), "opt": opt, "enum3": enums[2], "greedy": greedy.value, "single": single.value});

        report.record("partial enumeration ratio", ratio(enums[2].value) >= target - TOL, witness);
        report.check_mut("partial enumeration ratio").track_min("min_ratio", ratio(enums[2].value));
        let floor = greedy.value.max(single.value);
        report.record("greedy or best single ratio", ratio(floor) >= 0.3 - TOL, witness);
        report.check_mut("greedy or best single ratio").track_min("min_ratio", ratio(floor));

        let feasible = c.is_feasible(&opt.allocation)
            && c.is_feasible(&greedy.allocation)
            && c.is_feasible(&single.allocation)
            && enums.iter().all(|e| c.is_feasible(&e.allocation));
        report.record("feasible", feasible, witness);
        report.record("greedy trace non-decreasing", greedy.trace.windows(2).all(|w| w[0] <= w[1]), witness);
        let depth_mono = greedy.value <= enums[0].value + TOL
            && enums[0].value <= enums[1].value + TOL
            && enums[1].value <= enums[2].value + TOL;
        report.record("depth monotone", depth_mono, witness);
        report.record("brute force dominates", enums[2].value <= opt.value + TOL && floor <= opt.value + TOL, witness);
    }
    Ok(report)
}

/// Competitive trials, the light-influence selection rule, the secretary
/// subroutine and the variance bound on `Y`.
pub fn online_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("online");
    let instances = config.scale.pick(2, 6);
    let trials = config.scale.pick(300, 2000);
    let online_cfg = OnlineConfig { exec: config.exec, ..Default::default() };
    let base = seeds::derive(config.seed, "verify-online");
    for k in 0..instances {
        let inst = suite_instance(base, k as u64, 5, 4, 3)?;
        let o = InfluenceOracle::exact(&inst, DEFAULT_ENUMERATION_LIMIT)?.with_exec(Exec::Sequential);
        let summary = online::competitive_trials(&o, inst.constraints(), trials, seeds::derive_indexed(base, "trials", k as u64), &online_cfg)?;
        let lower = summary.mean_ratio - 3.0 * summary.standard_error;
        report.record("competitive ratio", lower >= COMPETITIVE_FLOOR, || {
            json!({"instance": k, "mean": summary.mean_ratio, "se": summary.standard_error})
        });
        let c = report.check_mut("competitive ratio");
        c.track_min("min_lower_bound", lower);
        c.track_min("min_mean_ratio", summary.mean_ratio);
        report.record("trial allocations feasible", summary.records.iter().all(|r| inst.constraints().is_feasible(&r.allocation)), || {
            json!({"instance": k})
        });
        audit_light_influence(&inst, &o, base, k as u64, 40, &mut report)?;
    }

    let secretary_trials = 10_000;
    let rate = secretary_success_rate(100, secretary_trials, seeds::derive(base, "secretary"));
    report.record("secretary success", rate >= 0.35, || json!({"rate": rate}));
    report.check_mut("secretary success").metrics.insert("rate".into(), rate);

    let var_instances = config.scale.pick(3, 12);
    for k in 0..var_instances {
        let inst = suite_instance(seeds::derive(base, "variance"), k as u64, 5, 4, 3)?;
        let o = CachedOracle::new(InfluenceOracle::exact(&inst, DEFAULT_ENUMERATION_LIMIT)?.with_exec(config.exec));
        let c = inst.constraints();
        let opt = offline::brute_force_opt(&o, c, DEFAULT_SEARCH_LIMIT, config.exec)?;
        if opt.value <= 0.0 {
            continue;
        }
        let order: Vec<usize> = (0..inst.n()).collect();
        let w = online::analysis_weights(&o, c, &opt.allocation, &order)?;
        let est = online::empirical_var_y(&w, 10_000, seeds::derive_indexed(base, "variance-draws", k as u64));
        let sum_w: f64 = w.w.iter().sum();
        report.record("weights sum to optimum", (sum_w - w.opt_value).abs() <= TOL, || json!({"instance": k, "sum": sum_w, "opt": w.opt_value}));
        report.record("variance bound", est.variance <= est.bound + 3.0 * est.variance_se, || json!({"instance": k, "estimate": est}));
        report.record("mean one half", (est.mean - 0.5).abs() <= 3.0 * est.mean_se, || json!({"instance": k, "estimate": est}));
        report.check_mut("variance bound").track_max("max_var_over_bound", est.variance / est.bound.max(f64::MIN_POSITIVE));
    }
    Ok(report)
}

/// Re-checks every light-influence decision against the oracle: a chosen
/// `k` must qualify with no larger feasible `k` qualifying, and a rejected
/// agent must have no qualifying `k`.
fn audit_light_influence(
    inst: &Instance,
    oracle: &InfluenceOracle,
    base: u64,
    index: u64,
    streams: usize,
    report: &mut SuiteReport,
) -> Result<()> {
    let c = inst.constraints();
    for s in 0..streams {
        let stream = online::gen_stream(inst.n(), seeds::derive_indexed(base, &format!("audit-{index}"), s as u64));
        let mut view = RestrictedOracle::new(oracle);
        let out = online::li_allocate(&stream, &mut view, c, 0.4, ExploreSolver::Brute, Exec::Sequential)?;
        for d in &out.decisions {
            let used: u32 = d.base.iter().enumerate().filter(|&(j, _)| j != d.agent).map(|(_, &x)| x).sum();
            let max_k = c.capacities[d.agent].min(c.budget.saturating_sub(used));
            let base_value = oracle.value(&d.base);
            let qualifying: Vec<u32> = (1..=max_k)
                .filter(|&k| {
                    let m = oracle.value(&d.base.add_chi(d.agent, k).expect("in range")) - base_value;
                    online::li_qualifies(m, k, out.unit_price)
                })
                .collect();
            let ok = d.chosen_k == qualifying.last().copied();
            report.record("light influence rule", ok, || json!({"decision": d, "qualifying": qualifying, "unit_price": out.unit_price}));
        }
        report.record("light influence feasible", c.is_feasible(&out.allocation), || json!({"allocation": out.allocation}));
    }
    Ok(())
}

/// Fraction of random orders in which the secretary rule picks the unique
/// best of `n` agents with distinct modular values.
pub fn secretary_success_rate(n: usize, trials: usize, seed: u64) -> f64 {
    let mut values: Vec<f64> = (1..=n).map(|v| v as f64).collect();
    values.shuffle(&mut seeds::rng(seed));
    let best = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).expect("n >= 1");
    let vals = values.clone();
    let oracle = FnOracle::new(n, move |b: &[u32]| b.iter().zip(&vals).filter(|(&x, _)| x > 0).map(|(_, v)| v).sum());
    let c = BudgetConstraints::uniform(n, 1, 1).expect("valid");
    let hits = (0..trials)
        .filter(|&t| {
            let stream = online::gen_stream(n, seeds::derive_indexed(seed, seeds::ARRIVAL, t as u64));
            online::secretary_allocate(&stream, &mut RestrictedOracle::new(&oracle), &c).chosen == Some(best)
        })
        .count();
    hits as f64 / trials as f64
}

/// The tight star game and random small games: Nash and PoA checks, the
/// utility conditions and per-draw negative externality.
pub fn game_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("game");
    star_checks(config, &mut report)?;

    let games = config.scale.pick(4, 30);
    let base = seeds::derive(config.seed, "verify-game");
    let mut rng = seeds::rng(base);
    for k in 0..games {
        let params = RandomGameParams {
            n: rng.random_range(3..=6),
            players: rng.random_range(2..=3),
            p: 0.35,
            support: 2,
            max_budget: 2,
        };
        let g = game::random_game(&params, seeds::derive_indexed(base, "game", k as u64))?;
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 30, seed: rng.random(), exec: config.exec, ..Default::default() });
        let util = game::verify_utility_conditions(&g, &o, config.scale.pick(10, 30), rng.random());
        for cond in ["U1", "U2", "U3"] {
            let bad: Vec<_> = util.violations.iter().filter(|v| v.condition.starts_with(cond)).collect();
            report.record(&format!("{cond} holds"), bad.is_empty(), || json!({"game": k, "violation": bad[0]}));
        }
        report.check_mut("U2 holds").track_max("max_gap", util.max_u2_gap);

        let poa = game::empirical_poa(&g, &o, &PoaConfig { starts: 3, seed: rng.random(), ..Default::default() }, &[])?;
        if let Some(r) = poa.ratio {
            report.record("price of anarchy at most 2", r <= 2.0 + 1e-6, || json!({"game": k, "ratio": r, "worst": poa.worst}));
            report.check_mut("price of anarchy at most 2").track_max("max_ratio", r);
        }
        let found = report.check_mut("equilibria found");
        let key = if poa.equilibria.is_empty() { "games_without_pure_ne" } else { "games_with_pure_ne" };
        *found.metrics.entry(key.into()).or_insert(0.0) += 1.0;
        if poa.exhaustive {
            *found.metrics.entry("games_scanned_exhaustively".into()).or_insert(0.0) += 1.0;
        }
        negative_externality(&g, &mut rng, config.scale.pick(30, 100), &mut report);
    }
    Ok(report)
}

fn star_checks(config: &VerifyConfig, report: &mut SuiteReport) -> Result<()> {
    let star = game::star_poa_instance(5);
    let o = PayoffOracle::new(&star, PayoffConfig { draws: 1000, seed: config.seed, exec: config.exec, ..Default::default() });
    let center = game::star_all_on_center(5);
    let verdict = game::is_nash(&star, &o, &center, DEFAULT_SEARCH_LIMIT)?;
    report.record("star center is nash", verdict.is_nash, || json!(verdict));
    let payoffs = o.payoffs(&center);
    report.record("star payoff (N+1)/N", payoffs.iter().all(|&p| p == 6.0 / 5.0), || json!(payoffs));
    let f_ne = o.social(&center);
    report.record("star F(NE) = 6", f_ne == 6.0, || json!(f_ne));
    let opt = game::social_optimum(&star, &o, DEFAULT_SEARCH_LIMIT)?;
    report.record("star F(OPT) = 10", opt.value == 10.0, || json!(opt));
    let poa = game::empirical_poa(&star, &o, &PoaConfig { starts: 3, seed: config.seed, ..Default::default() }, &[center])?;
    let ratio = poa.ratio.unwrap_or(f64::NAN);
    report.record("star PoA = 2N/(N+1)", (ratio - 10.0 / 6.0).abs() <= 1e-12, || json!(poa));
    report.check_mut("star PoA = 2N/(N+1)").metrics.insert("ratio".into(), ratio);
    Ok(())
}

/// Raising one player's bid never raises another player's count in a
/// fixed draw.
fn negative_externality<R: Rng + ?Sized>(g: &GameInstance, rng: &mut R, checks: usize, report: &mut SuiteReport) {
    let players = g.player_count();
    for _ in 0..checks {
        let profile = equilibrium::random_profile(g, rng);
        let j = rng.random_range(0..players);
        let v = rng.random_range(0..g.n());
        let mut raised = profile.clone();
        raised.rows[j][v] += rng.random_range(1..=2);
        let seed: u64 = rng.random();
        let draw = game::sim::draw_randomness(g, seed, rng.random_range(0..players * 4));
        let thresholds = cascade::sample_scenario(g.base(), seed);
        let before = game::multiplayer_cascade(g.graph(), &thresholds, &draw, &profile);
        let after = game::multiplayer_cascade(g.graph(), &thresholds, &draw, &raised);
        let ok = (0..players).filter(|&i| i != j).all(|i| after.counts[i] <= before.counts[i]);
        report.record("negative externality", ok, || {
            json!({"profile": profile, "raised": raised, "before": before.counts, "after": after.counts})
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lattice,
    Cascade,
    Solver,
    Online,
    Game,
    All,
}

pub fn run(suite: Suite, config: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    Ok(match suite {
        Suite::Lattice => vec![lattice_suite(config)?],
        Suite::Cascade => vec![cascade_suite(config)?],
        Suite::Solver => vec![solver_suite(config)?],
        Suite::Online => vec![online_suite(config)?],
        Suite::Game => vec![game_suite(config)?],
        Suite::All => vec![
            lattice_suite(config)?,
            cascade_suite(config)?,
            solver_suite(config)?,
            online_suite(config)?,
            game_suite(config)?,
        ],
    })
}
