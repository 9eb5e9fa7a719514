//! Random-order online allocation.
//!
//! Agents arrive one at a time in uniformly random order and every
//! allocation is irrevocable. The combined allocator flips a coin: with
//! probability `p_secretary` (3/8 by default) it runs the classical
//! secretary rule on single-agent values `f(c_i χ_i)`, otherwise the light
//! influence rule, which watches the first half of the arrival window,
//! prices a budget unit at `α f(b^L) / B` from the best offline allocation
//! `b^L` over the watched agents, and later gives each arriving agent the
//! largest feasible budget whose marginal gain clears that price.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{Allocation, BudgetConstraints};
use crate::offline::{self, DEFAULT_SEARCH_LIMIT};
use crate::oracle::{CachedOracle, ValueOracle};
use crate::par::Exec;
use crate::seeds;

/// Slack on the price comparison to absorb float rounding.
pub const PRICE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalStream {
    /// Agents in arrival order.
    pub order: Vec<usize>,
    /// Arrival times in `[0, 1)`, strictly increasing along `order`.
    pub times: Vec<f64>,
}

impl ArrivalStream {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of leading agents with arrival time `≤ 1/2`.
    pub fn first_half(&self) -> usize {
        self.times.partition_point(|&t| t <= 0.5)
    }
}

/// `n` sorted uniforms on `[0, 1)` paired with a uniform permutation.
pub fn gen_stream(n: usize, seed: u64) -> ArrivalStream {
    assert!(n >= 1, "stream needs at least one agent");
    let mut rng = seeds::rng(seed);
    let mut times: Vec<f64> = Vec::with_capacity(n);
    while times.len() < n {
        let t: f64 = rng.random();
        if !times.contains(&t) {
            times.push(t);
        }
    }
    times.sort_by(f64::total_cmp);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    ArrivalStream { order, times }
}

/// Oracle view that only admits allocations supported on revealed agents.
pub struct RestrictedOracle<'a, O: ?Sized> {
    inner: &'a O,
    revealed: Vec<bool>,
}

impl<'a, O: ValueOracle + ?Sized> RestrictedOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        RestrictedOracle { inner, revealed: vec![false; inner.n()] }
    }

    pub fn reveal(&mut self, agent: usize) {
        self.revealed[agent] = true;
    }

    pub fn revealed(&self) -> &[bool] {
        &self.revealed
    }

    pub fn admits(&self, b: &[u32]) -> bool {
        b.iter().zip(&self.revealed).all(|(&x, &r)| x == 0 || r)
    }
}

impl<O: ValueOracle + ?Sized> ValueOracle for RestrictedOracle<'_, O> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn value(&self, b: &[u32]) -> f64 {
        assert!(self.admits(b), "oracle query {b:?} touches an agent that has not arrived");
        self.inner.value(b)
    }

    fn queries(&self) -> u64 {
        self.inner.queries()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExploreSolver {
    /// Exact `b^L`.
    #[default]
    Brute,
    /// Partial-enumeration greedy; the analyzed guarantee assumes an exact `b^L`.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiDecision {
    pub agent: usize,
    /// Allocation just before the agent was considered.
    pub base: Allocation,
    pub chosen_k: Option<u32>,
    /// `f(b ∨ kχ_i) − f(b)` for the chosen `k`.
    pub marginal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiOutcome {
    pub allocation: Allocation,
    /// Agents observed without allocation.
    pub explored: Vec<usize>,
    /// `f(b^L)`.
    pub explore_value: f64,
    /// `α f(b^L) / B`.
    pub unit_price: f64,
    pub decisions: Vec<LiDecision>,
}

/// Selection rule: a positive marginal that pays at least `k · unit_price`.
pub fn li_qualifies(marginal: f64, k: u32, unit_price: f64) -> bool {
    marginal > 0.0 && marginal + PRICE_SLACK >= unit_price * k as f64
}

pub fn li_allocate<O: ValueOracle + ?Sized>(
    stream: &ArrivalStream,
    oracle: &mut RestrictedOracle<'_, O>,
    constraints: &BudgetConstraints,
    alpha: f64,
    explore: ExploreSolver,
    exec: Exec,
) -> Result<LiOutcome> {
    assert!(alpha > 0.0, "alpha must be positive");
    let n = constraints.n();
    let half = stream.first_half();
    let explored: Vec<usize> = stream.order[..half].to_vec();
    let mut in_l = vec![false; n];
    for &a in &explored {
        oracle.reveal(a);
        in_l[a] = true;
    }
    let explore_value = if explored.is_empty() {
        0.0
    } else {
        let sub = constraints.restricted_to(&in_l);
        match explore {
            ExploreSolver::Brute => offline::brute_force_opt(&*oracle, &sub, DEFAULT_SEARCH_LIMIT, exec)?.value,
            ExploreSolver::Greedy => offline::greedy_partial_enum(&*oracle, &sub, 3, exec)?.value,
        }
    };
    let budget = constraints.budget;
    let unit_price = if budget == 0 { 0.0 } else { alpha * explore_value / budget as f64 };

    let mut b = Allocation::zeros(n);
    let mut decisions = Vec::new();
    for &agent in &stream.order[half..] {
        oracle.reveal(agent);
        let used: u32 = b.iter().enumerate().filter(|&(j, _)| j != agent).map(|(_, &x)| x).sum();
        let max_k = constraints.capacities[agent].min(budget.saturating_sub(used));
        let base_value = oracle.value(&b);
        let mut chosen = None;
        for k in 1..=max_k {
            let marginal = oracle.value(&b.add_chi(agent, k)?) - base_value;
            if li_qualifies(marginal, k, unit_price) {
                chosen = Some((k, marginal));
            }
        }
        decisions.push(LiDecision {
            agent,
            base: b.clone(),
            chosen_k: chosen.map(|c| c.0),
            marginal: chosen.map(|c| c.1),
        });
        if let Some((k, _)) = chosen {
            b = b.add_chi(agent, k)?;
        }
    }
    Ok(LiOutcome { allocation: b, explored, explore_value, unit_price, decisions })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecretaryOutcome {
    pub allocation: Allocation,
    pub chosen: Option<usize>,
    pub skipped: usize,
    /// Best single-agent value among the skipped agents.
    pub benchmark: Option<f64>,
}

/// Number of agents the secretary rule observes before it may accept.
pub fn secretary_skip(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        (n as f64 / std::f64::consts::E).floor() as usize
    }
}

pub fn secretary_allocate<O: ValueOracle + ?Sized>(
    stream: &ArrivalStream,
    oracle: &mut RestrictedOracle<'_, O>,
    constraints: &BudgetConstraints,
) -> SecretaryOutcome {
    let n = constraints.n();
    let skip = secretary_skip(stream.len());
    let mut benchmark: Option<f64> = None;
    for (pos, &agent) in stream.order.iter().enumerate() {
        oracle.reveal(agent);
        let full = Allocation::unit(n, agent, constraints.capacities[agent]);
        let v = oracle.value(&full);
        if pos < skip {
            benchmark = Some(benchmark.map_or(v, |m| m.max(v)));
        } else if benchmark.is_none_or(|m| v > m) {
            return SecretaryOutcome { allocation: full, chosen: Some(agent), skipped: skip, benchmark };
        }
    }
    SecretaryOutcome { allocation: Allocation::zeros(n), chosen: None, skipped: skip, benchmark }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Secretary,
    LightInfluence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub alpha: f64,
    pub p_secretary: f64,
    pub explore: ExploreSolver,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        OnlineConfig { alpha: 0.4, p_secretary: 0.375, explore: ExploreSolver::Brute, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineRun {
    pub branch: Branch,
    pub coin: f64,
    pub allocation: Allocation,
    pub li: Option<LiOutcome>,
    pub secretary: Option<SecretaryOutcome>,
}

/// Uniform coin on `[0, 1]`.
pub fn draw_coin(seed: u64) -> f64 {
    seeds::rng(seed).random::<f64>()
}

pub fn combined_allocate<O: ValueOracle + ?Sized>(
    stream: &ArrivalStream,
    oracle: &O,
    constraints: &BudgetConstraints,
    config: &OnlineConfig,
    coin_seed: u64,
) -> Result<OnlineRun> {
    allocate_with_coin(draw_coin(coin_seed), stream, oracle, constraints, config)
}

/// Secretary branch when `coin ≤ p_secretary`, light influence otherwise.
pub fn allocate_with_coin<O: ValueOracle + ?Sized>(
    coin: f64,
    stream: &ArrivalStream,
    oracle: &O,
    constraints: &BudgetConstraints,
    config: &OnlineConfig,
) -> Result<OnlineRun> {
    let mut view = RestrictedOracle::new(oracle);
    if coin <= config.p_secretary {
        let s = secretary_allocate(stream, &mut view, constraints);
        Ok(OnlineRun { branch: Branch::Secretary, coin, allocation: s.allocation.clone(), li: None, secretary: Some(s) })
    } else {
        let li = li_allocate(stream, &mut view, constraints, config.alpha, config.explore, config.exec)?;
        Ok(OnlineRun { branch: Branch::LightInfluence, coin, allocation: li.allocation.clone(), li: Some(li), secretary: None })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub branch: Branch,
    pub allocation: Allocation,
    pub value: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStats {
    pub trials: usize,
    pub mean_ratio: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub opt_allocation: Allocation,
    pub opt_value: f64,
    pub trials: usize,
    pub mean_ratio: f64,
    pub standard_error: f64,
    pub secretary: BranchStats,
    pub light_influence: BranchStats,
    pub records: Vec<TrialRecord>,
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len();
    if m == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// Runs the combined allocator over `trials` independent arrival orders
/// and coins. Trial `t` uses stream `t` of the `arrival` and `coins` seed
/// streams, so results do not depend on scheduling. A zero optimum defines
/// the ratio as 1.
pub fn competitive_trials<O: ValueOracle + ?Sized>(
    oracle: &O,
    constraints: &BudgetConstraints,
    trials: usize,
    seed: u64,
    config: &OnlineConfig,
) -> Result<TrialSummary> {
    let cached = CachedOracle::new(oracle);
    let opt = offline::brute_force_opt(&cached, constraints, DEFAULT_SEARCH_LIMIT, config.exec)?;
    let n = constraints.n();
    let arrival = seeds::derive(seed, seeds::ARRIVAL);
    let coins = seeds::derive(seed, seeds::COINS);
    let inner = OnlineConfig { exec: Exec::Sequential, ..*config };
    let runs = config.exec.map_range(trials, |t| -> Result<TrialRecord> {
        let stream = gen_stream(n, seeds::derive_indexed(arrival, seeds::ARRIVAL, t as u64));
        let run = combined_allocate(&stream, &cached, constraints, &inner, seeds::derive_indexed(coins, seeds::COINS, t as u64))?;
        let value = cached.value(&run.allocation);
        let ratio = if opt.value > 0.0 { value / opt.value } else { 1.0 };
        Ok(TrialRecord { trial: t, branch: run.branch, allocation: run.allocation, value, ratio })
    });
    let records = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    let (mean_ratio, standard_error) = mean_se(&ratios);
    let branch_stats = |b: Branch| {
        let xs: Vec<f64> = records.iter().filter(|r| r.branch == b).map(|r| r.ratio).collect();
        let (mean_ratio, standard_error) = mean_se(&xs);
        BranchStats { trials: xs.len(), mean_ratio, standard_error }
    };
    Ok(TrialSummary {
        opt_allocation: opt.allocation.clone(),
        opt_value: opt.value,
        trials,
        mean_ratio,
        standard_error,
        secretary: branch_stats(Branch::Secretary),
        light_influence: branch_stats(Branch::LightInfluence),
        records,
    })
}

/// Per-agent shares of the optimum along a fixed agent order, and the
/// largest single-agent share of the optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisWeights {
    /// `w[i]` for agent `i`.
    pub w: Vec<f64>,
    pub opt_value: f64,
    /// `max_i f(c_i χ_i) / f(OPT*)`.
    pub beta: f64,
    pub order: Vec<usize>,
}

/// `w_i = f(OPT*_{<i} ∨ OPT*_i χ_i) − f(OPT*_{<i})` where `<i` means
/// "earlier in `order`".
pub fn analysis_weights<O: ValueOracle + ?Sized>(
    oracle: &O,
    constraints: &BudgetConstraints,
    opt: &Allocation,
    order: &[usize],
) -> Result<AnalysisWeights> {
    let n = constraints.n();
    let mut w = vec![0.0; n];
    let mut prefix = Allocation::zeros(n);
    let mut prefix_value = oracle.value(&prefix);
    for &i in order {
        let next = prefix.add_chi(i, opt[i])?;
        let next_value = oracle.value(&next);
        w[i] = next_value - prefix_value;
        prefix = next;
        prefix_value = next_value;
    }
    let opt_value = oracle.value(opt);
    let best_single = offline::best_single(oracle, constraints).value;
    let beta = if opt_value > 0.0 { best_single / opt_value } else { 0.0 };
    Ok(AnalysisWeights { w, opt_value, beta, order: order.to_vec() })
}

/// Batches used for the standard error of the sample variance.
pub const VARIANCE_BATCHES: usize = 100;

fn sample_variance(xs: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub samples: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    /// Standard error from the spread of per-batch variances.
    pub variance_se: f64,
    /// `β / 4`.
    pub bound: f64,
}

/// Samples `Y = Σ w_i X_i / f(OPT*)` with independent fair `X_i ∈ {0, 1}`.
pub fn empirical_var_y(weights: &AnalysisWeights, samples: usize, seed: u64) -> VarianceEstimate {
    assert!(samples >= 4, "need at least four samples");
    let mut rng = seeds::rng(seed);
    let ys: Vec<f64> = (0..samples)
        .map(|_| {
            let w: f64 = weights.w.iter().filter(|_| rng.random_bool(0.5)).sum();
            if weights.opt_value > 0.0 {
                w / weights.opt_value
            } else {
                0.0
            }
        })
        .collect();
    let (mean, mean_err) = mean_se(&ys);
    let variance = sample_variance(&ys);
    let batches = VARIANCE_BATCHES.min(samples / 2);
    let per = samples / batches;
    let batch_vars: Vec<f64> = ys.chunks_exact(per).take(batches).map(sample_variance).collect();
    let (_, variance_se) = mean_se(&batch_vars);
    VarianceEstimate {
        samples,
        mean,
        mean_se: mean_err,
        variance,
        variance_se,
        bound: weights.beta / 4.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::oracle::{FnOracle, InfluenceOracle};

    fn modular(values: Vec<f64>) -> FnOracle<impl Fn(&[u32]) -> f64 + Sync> {
        let n = values.len();
        FnOracle::new(n, move |b: &[u32]| b.iter().zip(&values).map(|(&x, v)| if x > 0 { *v } else { 0.0 }).sum())
    }

    fn stream(order: Vec<usize>, times: Vec<f64>) -> ArrivalStream {
        ArrivalStream { order, times }
    }

    #[test]
    fn gen_stream_examples() {
        let s = gen_stream(1, 3);
        assert_eq!(s.order, vec![0]);
        assert!((0.0..1.0).contains(&s.times[0]));
        assert_eq!(gen_stream(20, 9), gen_stream(20, 9));

        let s = gen_stream(10_000, 77);
        assert!(s.times.windows(2).all(|w| w[0] < w[1]));
        let mut sorted = s.order.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10_000).collect::<Vec<_>>());
        let frac = s.first_half() as f64 / 10_000.0;
        // binomial sd = 0.005; 0.02 is four sd
        assert!((frac - 0.5).abs() <= 0.02, "fraction {frac}");
    }

    #[test]
    fn restricted_oracle_admits_revealed_only() {
        let o = modular(vec![1.0, 2.0]);
        let mut r = RestrictedOracle::new(&o);
        assert!(r.admits(&[0, 0]));
        assert!(!r.admits(&[1, 0]));
        r.reveal(0);
        assert_eq!(r.value(&[1, 0]), 1.0);
        let caught = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| r.value(&[0, 1])));
        assert!(caught.is_err());
    }

    #[test]
    fn li_all_in_first_half_allocates_nothing() {
        let o = modular(vec![1.0, 2.0, 3.0]);
        let c = BudgetConstraints::uniform(3, 2, 1).unwrap();
        let s = stream(vec![2, 0, 1], vec![0.1, 0.2, 0.5]);
        let out = li_allocate(&s, &mut RestrictedOracle::new(&o), &c, 0.4, ExploreSolver::Brute, Exec::Sequential).unwrap();
        assert!(out.allocation.is_zero());
        assert!(out.decisions.is_empty());
    }

    #[test]
    fn li_hand_trace() {
        let inst = generate::two_node_fixed(1, 2, vec![1, 1]).unwrap();
        let o = InfluenceOracle::exact(&inst, 100).unwrap();
        let s = stream(vec![0, 1], vec![0.3, 0.7]);
        let out =
            li_allocate(&s, &mut RestrictedOracle::new(&o), inst.constraints(), 0.4, ExploreSolver::Brute, Exec::Sequential)
                .unwrap();
        assert_eq!(out.explore_value, 2.0);
        assert!((out.unit_price - 0.4).abs() < 1e-15);
        assert_eq!(out.allocation.0, vec![0, 1]);
        assert_eq!(out.decisions[0].marginal, Some(1.0));
    }

    #[test]
    fn li_with_worthless_exploration_takes_max_positive_k() {
        let concave = FnOracle::new(3, |b: &[u32]| b.iter().map(|&x| (x as f64).sqrt()).sum());
        let c = BudgetConstraints::new(4, vec![3, 3, 3]).unwrap();
        let s = stream(vec![0, 1, 2], vec![0.6, 0.7, 0.8]);
        let out = li_allocate(&s, &mut RestrictedOracle::new(&concave), &c, 0.4, ExploreSolver::Brute, Exec::Sequential)
            .unwrap();
        assert_eq!(out.explore_value, 0.0);
        assert_eq!(out.allocation.0, vec![3, 1, 0]);
    }

    #[test]
    fn secretary_examples() {
        let o = modular(vec![4.0]);
        let c = BudgetConstraints::new(2, vec![2]).unwrap();
        let out = secretary_allocate(&stream(vec![0], vec![0.5]), &mut RestrictedOracle::new(&o), &c);
        assert_eq!(out.allocation.0, vec![2]);

        let o = modular(vec![1.0, 2.0, 3.0]);
        let c = BudgetConstraints::uniform(3, 1, 1).unwrap();
        let out = secretary_allocate(&stream(vec![0, 1, 2], vec![0.1, 0.2, 0.3]), &mut RestrictedOracle::new(&o), &c);
        assert_eq!(out.skipped, 1);
        assert_eq!(out.chosen, Some(1));
        assert_eq!(out.allocation.0, vec![0, 1, 0]);

        let out = secretary_allocate(&stream(vec![2, 0, 1], vec![0.1, 0.2, 0.3]), &mut RestrictedOracle::new(&o), &c);
        assert_eq!(out.chosen, None);
        assert!(out.allocation.is_zero());
    }

    #[test]
    fn coin_selects_branch() {
        let o = modular(vec![1.0, 2.0, 3.0]);
        let c = BudgetConstraints::uniform(3, 1, 1).unwrap();
        let s = stream(vec![0, 1, 2], vec![0.1, 0.6, 0.7]);
        let cfg = OnlineConfig::default();
        assert_eq!(allocate_with_coin(0.1, &s, &o, &c, &cfg).unwrap().branch, Branch::Secretary);
        assert_eq!(allocate_with_coin(0.9, &s, &o, &c, &cfg).unwrap().branch, Branch::LightInfluence);
        assert_eq!(allocate_with_coin(0.375, &s, &o, &c, &cfg).unwrap().branch, Branch::Secretary);
    }

    #[test]
    fn secretary_branch_frequency() {
        let hits = (0..10_000u64).filter(|&s| draw_coin(seeds::derive_indexed(1, seeds::COINS, s)) <= 0.375).count();
        let freq = hits as f64 / 10_000.0;
        assert!((freq - 0.375).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn single_agent_trials() {
        let inst = generate::isolated(1, 2);
        let o = InfluenceOracle::exact(&inst, 10).unwrap();
        let summary = competitive_trials(&o, inst.constraints(), 400, 5, &OnlineConfig::default()).unwrap();
        // the secretary branch always takes the only agent
        assert_eq!(summary.secretary.mean_ratio, 1.0);
        assert!(summary.mean_ratio >= 0.375 * summary.secretary.trials as f64 / 400.0);
    }

    #[test]
    fn zero_opt_defines_ratio_one() {
        let inst = generate::isolated(3, 0);
        let o = InfluenceOracle::exact(&inst, 10).unwrap();
        let summary = competitive_trials(&o, inst.constraints(), 50, 1, &OnlineConfig::default()).unwrap();
        assert_eq!(summary.opt_value, 0.0);
        assert!(summary.records.iter().all(|r| r.ratio == 1.0));
    }

    #[test]
    fn trials_do_not_depend_on_exec() {
        let inst = generate::gnp(&generate::GnpParams { n: 5, p: 0.4, support: 2, budget: 3, ..Default::default() }, 2)
            .unwrap();
        let o = InfluenceOracle::exact(&inst, 1 << 20).unwrap();
        let seq = OnlineConfig { exec: Exec::Sequential, ..Default::default() };
        let par = OnlineConfig { exec: Exec::Parallel, ..Default::default() };
        let a = competitive_trials(&o, inst.constraints(), 100, 3, &seq).unwrap();
        let b = competitive_trials(&o, inst.constraints(), 100, 3, &par).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn variance_matches_closed_form() {
        // Var[Y] = Σ w_i² / (4 f(OPT*)²)
        let w = AnalysisWeights { w: vec![1.0, 2.0, 3.0, 4.0], opt_value: 10.0, beta: 0.4, order: vec![0, 1, 2, 3] };
        let est = empirical_var_y(&w, 10_000, 5);
        assert!((est.variance - 30.0 / 400.0).abs() <= 3.0 * est.variance_se);
        assert!((est.mean - 0.5).abs() <= 3.0 * est.mean_se);
        assert!(est.variance <= est.bound + 3.0 * est.variance_se);

        let point = AnalysisWeights { w: vec![7.0, 0.0], opt_value: 7.0, beta: 1.0, order: vec![0, 1] };
        let est = empirical_var_y(&point, 10_000, 6);
        assert!(est.variance_se > 0.0);
        assert!(est.variance <= est.bound + 3.0 * est.variance_se);
    }

    #[test]
    fn weights_telescope() {
        let inst = generate::two_node_demo();
        let o = InfluenceOracle::exact(&inst, 100).unwrap();
        let opt = offline::brute_force_opt(&o, inst.constraints(), 1000, Exec::Sequential).unwrap();
        let w = analysis_weights(&o, inst.constraints(), &opt.allocation, &[0, 1]).unwrap();
        assert!((w.w.iter().sum::<f64>() - opt.value).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&w.beta));
    }
}
