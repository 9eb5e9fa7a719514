//! Offline maximization of a monotone lattice-submodular oracle under
//! per-agent capacities and a total budget.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Allocation, BudgetConstraints};
use crate::oracle::ValueOracle;
use crate::par::Exec;

pub const DEFAULT_SEARCH_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    BruteForce,
    Greedy,
    GreedyPartialEnum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Seed size for partial enumeration, in `1..=3`.
    pub enum_depth: usize,
    /// Cap on `Π (c_i + 1)` for brute force.
    pub search_limit: u128,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolverMode::GreedyPartialEnum,
            enum_depth: 3,
            search_limit: DEFAULT_SEARCH_LIMIT,
            exec: Exec::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: SolverMode) -> Self {
        SolverConfig { mode, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub allocation: Allocation,
    pub value: f64,
}

/// Index of the first maximum; later entries must be strictly larger to win.
fn first_argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(k);
        }
    }
    best
}

/// Exhaustive search over every feasible allocation; ties go to the
/// lexicographically smallest.
pub fn brute_force_opt<O: ValueOracle + ?Sized>(
    oracle: &O,
    constraints: &BudgetConstraints,
    limit: u128,
    exec: Exec,
) -> Result<Solution> {
    let count = constraints.box_size();
    if count > limit {
        return Err(Error::SearchSpaceTooLarge { count, limit });
    }
    let candidates = constraints.feasible_allocations();
    let values = exec.map(&candidates, |b| oracle.value(b));
    let k = first_argmax(&values).expect("zero allocation is always feasible");
    Ok(Solution { allocation: candidates[k].clone(), value: values[k] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyRun {
    pub allocation: Allocation,
    pub value: f64,
    /// Objective after each accepted increment, starting with the start point.
    pub trace: Vec<f64>,
}

/// Density greedy from the zero vector.
pub fn density_greedy<O: ValueOracle + ?Sized>(oracle: &O, constraints: &BudgetConstraints) -> GreedyRun {
    greedy_from(oracle, constraints, Allocation::zeros(constraints.n()))
}

/// Repeatedly adds the increment `(i, k)` with the best gain per unit
/// `(f(b + kχ_i) − f(b)) / k`, trying every admissible `k` at once since
/// lattice marginals need not shrink along a coordinate. Ties go to the
/// lowest agent, then the smallest `k`. Stops when no increment has a
/// positive gain.
pub fn greedy_from<O: ValueOracle + ?Sized>(oracle: &O, constraints: &BudgetConstraints, start: Allocation) -> GreedyRun {
    let mut b = start;
    let mut value = oracle.value(&b);
    let mut trace = vec![value];
    loop {
        let used = b.total() as u32;
        let room = constraints.budget.saturating_sub(used);
        if room == 0 {
            break;
        }
        let mut best: Option<(usize, u32, f64, f64)> = None;
        for i in 0..b.len() {
            let max_k = constraints.capacities[i].saturating_sub(b[i]).min(room);
            for k in 1..=max_k {
                let mut next = b.clone();
                next[i] += k;
                let v = oracle.value(&next);
                let gain = v - value;
                let density = gain / k as f64;
                if gain > 0.0 && best.is_none_or(|(_, _, d, _)| density > d) {
                    best = Some((i, k, density, v));
                }
            }
        }
        match best {
            Some((i, k, _, v)) => {
                b[i] += k;
                value = v;
                trace.push(value);
            }
            None => break,
        }
    }
    GreedyRun { allocation: b, value, trace }
}

/// Feasible seeds of at most `depth` assignments on distinct agents, empty
/// seed first, then by size, each size in lexicographic order.
pub fn partial_seeds(constraints: &BudgetConstraints, depth: usize) -> Vec<Allocation> {
    fn rec(
        c: &BudgetConstraints,
        from: usize,
        left: usize,
        used: u32,
        cur: &mut Allocation,
        out: &mut Vec<Allocation>,
    ) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for i in from..c.n() {
            for k in 1..=c.capacities[i].min(c.budget - used) {
                cur[i] = k;
                rec(c, i + 1, left - 1, used + k, cur, out);
            }
            cur[i] = 0;
        }
    }
    let mut out = Vec::new();
    rec(constraints, 0, depth, 0, &mut Allocation::zeros(constraints.n()), &mut out);
    out.sort_by_key(|s| s.iter().filter(|&&x| x > 0).count());
    out
}

/// Best greedy completion over all seeds of size at most `depth`.
pub fn greedy_partial_enum<O: ValueOracle + ?Sized>(
    oracle: &O,
    constraints: &BudgetConstraints,
    depth: usize,
    exec: Exec,
) -> Result<Solution> {
    if !(1..=3).contains(&depth) {
        return Err(Error::InvalidParameter(format!("enumeration depth {depth} not in 1..=3")));
    }
    let seeds = partial_seeds(constraints, depth);
    let runs = exec.map(&seeds, |s| greedy_from(oracle, constraints, s.clone()));
    let values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let k = first_argmax(&values).expect("empty seed always present");
    Ok(Solution { allocation: runs[k].allocation.clone(), value: runs[k].value })
}

/// `c_i χ_i` maximizing `f`, ties to the lowest index.
pub fn best_single<O: ValueOracle + ?Sized>(oracle: &O, constraints: &BudgetConstraints) -> Solution {
    let n = constraints.n();
    assert!(n >= 1, "best_single needs at least one agent");
    let values: Vec<f64> = (0..n)
        .map(|i| oracle.value(&Allocation::unit(n, i, constraints.capacities[i])))
        .collect();
    let i = first_argmax(&values).expect("n >= 1");
    Solution { allocation: Allocation::unit(n, i, constraints.capacities[i]), value: values[i] }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: SolverMode,
    pub mode_value: f64,
    pub best_single_value: f64,
    pub used_best_single: bool,
    pub oracle_queries: u64,
    pub wall_time_ms: f64,
}

/// Runs the configured mode and keeps the better of its result and
/// [`best_single`].
pub fn solve<O: ValueOracle + ?Sized>(
    oracle: &O,
    constraints: &BudgetConstraints,
    config: &SolverConfig,
) -> Result<(Solution, SolveReport)> {
    let start = Instant::now();
    let q0 = oracle.queries();
    let primary = match config.mode {
        SolverMode::BruteForce => brute_force_opt(oracle, constraints, config.search_limit, config.exec)?,
        SolverMode::Greedy => {
            let run = density_greedy(oracle, constraints);
            Solution { allocation: run.allocation, value: run.value }
        }
        SolverMode::GreedyPartialEnum => greedy_partial_enum(oracle, constraints, config.enum_depth, config.exec)?,
    };
    let single = best_single(oracle, constraints);
    let used_best_single = single.value > primary.value;
    let report = SolveReport {
        mode: config.mode,
        mode_value: primary.value,
        best_single_value: single.value,
        used_best_single,
        oracle_queries: oracle.queries() - q0,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((if used_best_single { single } else { primary }, report))
}
