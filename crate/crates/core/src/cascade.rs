//! Deterministic cascades under a fixed realization of the triggering
//! vectors.
//!
//! Two independent routes compute the influenced set:
//!
//! * [`step_cascade`] follows the round-by-round process directly: budgeted
//!   nodes are active in round 0, and in each later round a node becomes
//!   active if an in-neighbor `u` activated in the previous round has
//!   `b_u ≥ t^v_u`.
//! * [`first_stage`] then [`second_stage`] split it into the budget-driven
//!   seed set (budgeted nodes plus the neighbors they reach directly) and a
//!   classical triggering cascade over the `t = 0` edges.
//!
//! [`cascade_value`] uses the step route; the composition exists to be
//! checked against it.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::instance::Instance;
use crate::seeds;

/// One joint draw of all thresholds, indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub thresholds: Vec<u32>,
    /// Probability mass, set only for enumerated scenarios.
    pub probability: Option<f64>,
}

impl Scenario {
    pub fn threshold(&self, graph: &DirectedGraph, from: usize, to: usize) -> Option<u32> {
        graph.edge_id(from, to).map(|id| self.thresholds[id])
    }
}

pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1_000_000;

pub fn sample_scenario(instance: &Instance, seed: u64) -> Scenario {
    sample_scenario_with(instance, &mut seeds::rng(seed))
}

pub fn sample_scenario_with<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Scenario {
    let mut thresholds = vec![0u32; instance.graph().edge_count()];
    for factor in instance.factors() {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = factor.outcomes.len() - 1;
        for (k, (p, _)) in factor.outcomes.iter().enumerate() {
            acc += p;
            if u < acc {
                pick = k;
                break;
            }
        }
        thresholds[factor.edges.clone()].copy_from_slice(&factor.outcomes[pick].1);
    }
    Scenario { thresholds, probability: None }
}

/// Every joint outcome with its probability, in mixed-radix order over the
/// factors (last factor varies fastest).
pub fn enumerate_scenarios(instance: &Instance, limit: u128) -> Result<Vec<Scenario>> {
    let count = instance.support_size();
    if count > limit {
        return Err(Error::SupportTooLarge { count, limit });
    }
    let factors = instance.factors();
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; factors.len()];
    let mut thresholds = vec![0u32; instance.graph().edge_count()];
    loop {
        let mut p = 1.0;
        for (f, &d) in factors.iter().zip(&digits) {
            let (q, t) = &f.outcomes[d];
            p *= q;
            thresholds[f.edges.clone()].copy_from_slice(t);
        }
        out.push(Scenario { thresholds: thresholds.clone(), probability: Some(p) });

        let mut k = factors.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < factors[k].outcomes.len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// Round-by-round cascade. Returns the influenced set and the number of
/// rounds that activated at least one node.
pub fn step_cascade(graph: &DirectedGraph, scenario: &Scenario, b: &[u32]) -> (Vec<bool>, usize) {
    let n = graph.n();
    let mut active = vec![false; n];
    let mut frontier: Vec<usize> = (0..n).filter(|&v| b[v] > 0).collect();
    for &v in &frontier {
        active[v] = true;
    }
    let mut rounds = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, id) in graph.out_edges(u) {
                if !active[v] && b[u] >= scenario.thresholds[id] {
                    active[v] = true;
                    next.push(v);
                }
            }
        }
        if !next.is_empty() {
            rounds += 1;
            assert!(rounds <= n, "cascade exceeded {n} rounds");
        }
        frontier = next;
    }
    (active, rounds)
}

/// Seed set of the second stage: budgeted nodes and every node with a
/// budgeted in-neighbor whose budget meets the threshold.
pub fn first_stage(graph: &DirectedGraph, scenario: &Scenario, b: &[u32]) -> Vec<bool> {
    (0..graph.n())
        .map(|v| {
            b[v] > 0
                || graph
                    .in_neighbors(v)
                    .iter()
                    .zip(graph.in_edge_ids(v))
                    .any(|(&u, id)| b[u] > 0 && b[u] >= scenario.thresholds[id])
        })
        .collect()
}

/// Closure of `seeds` under the zero-threshold edges.
pub fn second_stage(graph: &DirectedGraph, scenario: &Scenario, seeds: &[bool]) -> Vec<bool> {
    let mut reached = seeds.to_vec();
    let mut stack: Vec<usize> = (0..graph.n()).filter(|&v| seeds[v]).collect();
    while let Some(u) = stack.pop() {
        for &(v, id) in graph.out_edges(u) {
            if !reached[v] && scenario.thresholds[id] == 0 {
                reached[v] = true;
                stack.push(v);
            }
        }
    }
    reached
}

/// Number of influenced nodes, `f_σ(b)`. Any `b` of length `n` is accepted.
pub fn cascade_value(graph: &DirectedGraph, scenario: &Scenario, b: &[u32]) -> u32 {
    step_cascade(graph, scenario, b).0.iter().filter(|&&x| x).count() as u32
}

/// `|h_σ(g_σ(b))|`.
pub fn composed_value(graph: &DirectedGraph, scenario: &Scenario, b: &[u32]) -> u32 {
    let s = first_stage(graph, scenario, b);
    second_stage(graph, scenario, &s).iter().filter(|&&x| x).count() as u32
}
