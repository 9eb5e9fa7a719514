//! Instance generators: random G(n, p) graphs with random threshold laws,
//! classical independent-cascade imports, and the small fixtures used
//! throughout the tests.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge};
use crate::instance::Instance;
use crate::lattice::BudgetConstraints;
use crate::seeds;
use crate::triggering::TriggeringDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerKind {
    EdgeCategorical,
    NodeMixture,
    Classical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GnpParams {
    pub n: usize,
    /// Probability of each ordered pair being an edge.
    pub p: f64,
    /// Maximum support points per edge (edge kinds) or per node (node kinds).
    pub support: usize,
    pub budget: u32,
    /// Capacity of every agent; `None` means `budget`.
    pub capacity: Option<u32>,
    pub kind: TriggerKind,
}

impl Default for GnpParams {
    fn default() -> Self {
        GnpParams { n: 6, p: 0.3, support: 2, budget: 3, capacity: None, kind: TriggerKind::NodeMixture }
    }
}

/// Positive probabilities summing to one; the last entry absorbs rounding.
fn random_probs<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    p
}

pub fn gnp(params: &GnpParams, seed: u64) -> Result<Instance> {
    if params.n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(0.0..=1.0).contains(&params.p) {
        return Err(Error::InvalidParameter(format!("edge probability {} outside [0, 1]", params.p)));
    }
    if params.support == 0 {
        return Err(Error::InvalidParameter("support must be at least 1".into()));
    }
    let mut rng = seeds::rng(seed);
    let n = params.n;
    let mut edges = Vec::new();
    for from in 0..n {
        for to in 0..n {
            if from != to && rng.random_bool(params.p) {
                edges.push(Edge { from, to });
            }
        }
    }
    let graph = DirectedGraph::new(n, &edges)?;
    let never = params.budget + 1;
    let dist = match params.kind {
        TriggerKind::EdgeCategorical => TriggeringDistribution::EdgeCategorical(
            (0..graph.edge_count())
                .map(|_| {
                    let k = rng.random_range(1..=params.support.min(never as usize + 1));
                    let mut values: Vec<u32> = (0..=never).collect();
                    values.shuffle(&mut rng);
                    values.truncate(k);
                    values.into_iter().zip(random_probs(k, &mut rng)).collect()
                })
                .collect(),
        ),
        TriggerKind::NodeMixture => TriggeringDistribution::NodeMixture(
            (0..n)
                .map(|v| {
                    let deg = graph.in_neighbors(v).len();
                    if deg == 0 {
                        return Vec::new();
                    }
                    let k = rng.random_range(1..=params.support);
                    random_probs(k, &mut rng)
                        .into_iter()
                        .map(|p| (p, (0..deg).map(|_| rng.random_range(0..=never)).collect()))
                        .collect()
                })
                .collect(),
        ),
        TriggerKind::Classical => TriggeringDistribution::Classical(
            (0..n)
                .map(|v| {
                    let nbrs = graph.in_neighbors(v);
                    if nbrs.is_empty() {
                        return Vec::new();
                    }
                    let k = rng.random_range(1..=params.support);
                    random_probs(k, &mut rng)
                        .into_iter()
                        .map(|p| (p, nbrs.iter().copied().filter(|_| rng.random_bool(0.5)).collect()))
                        .collect()
                })
                .collect(),
        ),
    };
    let cap = params.capacity.unwrap_or(params.budget).max(1);
    let constraints = BudgetConstraints::uniform(n, params.budget, cap)?;
    Instance::new(graph, dist, constraints)
}

/// Independent-cascade edge list: each in-edge `u → v` joins `T^v`
/// independently with probability `p_uv`. Node degree is limited to 16 so
/// the subset laws stay explicit.
pub fn classical_import(n: usize, edges: &[ProbEdge], budget: u32) -> Result<Instance> {
    let list: Vec<Edge> = edges.iter().map(|&(from, to, _)| Edge { from, to }).collect();
    let graph = DirectedGraph::new(n, &list)?;
    let mut prob = vec![0.0; graph.edge_count()];
    for &(from, to, p) in edges {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("edge {from}→{to}: probability {p}")));
        }
        prob[graph.edge_id(from, to).expect("edge exists")] = p;
    }
    let mut sets = Vec::with_capacity(n);
    for v in 0..n {
        let nbrs = graph.in_neighbors(v);
        let ids: Vec<usize> = graph.in_edge_ids(v).collect();
        if nbrs.len() > 16 {
            return Err(Error::InvalidParameter(format!("node {v} has {} in-neighbors (max 16)", nbrs.len())));
        }
        let mut outcomes = Vec::new();
        if !nbrs.is_empty() {
            for mask in 0u32..(1 << nbrs.len()) {
                let mut p = 1.0;
                let mut set = Vec::new();
                for (k, &u) in nbrs.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        p *= prob[ids[k]];
                        set.push(u);
                    } else {
                        p *= 1.0 - prob[ids[k]];
                    }
                }
                if p > 0.0 {
                    outcomes.push((p, set));
                }
            }
            // absorb rounding so the law sums to one within tolerance
            let total: f64 = outcomes.iter().map(|o| o.0).sum();
            for o in &mut outcomes {
                o.0 /= total;
            }
        }
        sets.push(outcomes);
    }
    let constraints = BudgetConstraints::uniform(n, budget, 1)?;
    Instance::new(graph, TriggeringDistribution::Classical(sets), constraints)
}

/// `(from, to, probability)`.
pub type ProbEdge = (usize, usize, f64);

/// Parses `from to prob` lines; `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<(usize, Vec<ProbEdge>)> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::InvalidParameter(format!("line {}: expected `from to prob`", lineno + 1));
        if parts.len() != 3 {
            return Err(bad());
        }
        let from: usize = parts[0].parse().map_err(|_| bad())?;
        let to: usize = parts[1].parse().map_err(|_| bad())?;
        let p: f64 = parts[2].parse().map_err(|_| bad())?;
        n = n.max(from + 1).max(to + 1);
        edges.push((from, to, p));
    }
    Ok((n, edges))
}

/// Edge `0 → 1` with threshold 1 or 2, each with probability 1/2; `B = 2`,
/// `c = (2, 1)`. `f((1, 0)) = 1.5`.
pub fn two_node_demo() -> Instance {
    let g = DirectedGraph::new(2, &[Edge { from: 0, to: 1 }]).expect("valid graph");
    let dist = TriggeringDistribution::EdgeCategorical(vec![vec![(1, 0.5), (2, 0.5)]]);
    Instance::new(g, dist, BudgetConstraints { budget: 2, capacities: vec![2, 1] }).expect("valid instance")
}

/// Edge `0 → 1` with a deterministic threshold.
pub fn two_node_fixed(threshold: u32, budget: u32, capacities: Vec<u32>) -> Result<Instance> {
    let g = DirectedGraph::new(2, &[Edge { from: 0, to: 1 }])?;
    let dist = TriggeringDistribution::EdgeCategorical(vec![vec![(threshold, 1.0)]]);
    Instance::new(g, dist, BudgetConstraints::new(budget, capacities)?)
}

/// Directed cycle `0 → 1 → … → n−1 → 0` with every threshold fixed.
pub fn deterministic_cycle(n: usize, threshold: u32) -> Instance {
    let edges: Vec<Edge> = (0..n).map(|v| Edge { from: v, to: (v + 1) % n }).collect();
    let g = DirectedGraph::new(n, &edges).expect("valid cycle");
    let dist = TriggeringDistribution::EdgeCategorical(vec![vec![(threshold, 1.0)]; n]);
    Instance::new(g, dist, BudgetConstraints::uniform(n, 2, 2).expect("valid")).expect("valid instance")
}

/// Isolated nodes; `f(b)` counts budgeted agents.
pub fn isolated(n: usize, budget: u32) -> Instance {
    let dist = TriggeringDistribution::EdgeCategorical(Vec::new());
    let cap = budget.max(1);
    Instance::new(DirectedGraph::empty(n), dist, BudgetConstraints::uniform(n, budget, cap).expect("valid"))
        .expect("valid instance")
}

/// Knapsack trap: agent 0 reaches ten leaves but only with its full
/// budget of 4; agent 1 reaches two leaves with a single unit. Unit
/// density prefers agent 1, after which agent 0 can no longer be funded.
pub fn knapsack_trap() -> Instance {
    let budget = 4;
    let mut edges = Vec::new();
    let mut thresholds = Vec::new();
    for leaf in 2..12 {
        edges.push(Edge { from: 0, to: leaf });
        thresholds.push(((0, leaf), 4));
    }
    for leaf in 12..14 {
        edges.push(Edge { from: 1, to: leaf });
        thresholds.push(((1, leaf), 1));
    }
    let g = DirectedGraph::new(14, &edges).expect("valid graph");
    let mut per_edge = vec![Vec::new(); g.edge_count()];
    for ((from, to), t) in thresholds {
        per_edge[g.edge_id(from, to).expect("edge")] = vec![(t, 1.0)];
    }
    Instance::new(
        g,
        TriggeringDistribution::EdgeCategorical(per_edge),
        BudgetConstraints::uniform(14, budget, budget).expect("valid"),
    )
    .expect("valid instance")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnp_is_deterministic() {
        let p = GnpParams { n: 6, p: 0.5, ..Default::default() };
        let a = gnp(&p, 7).unwrap();
        let b = gnp(&p, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), gnp(&p, 8).unwrap().digest());
    }

    #[test]
    fn gnp_all_kinds_load() {
        for kind in [TriggerKind::EdgeCategorical, TriggerKind::NodeMixture, TriggerKind::Classical] {
            let p = GnpParams { n: 7, p: 0.4, support: 3, budget: 2, capacity: Some(2), kind };
            for seed in 0..20 {
                let inst = gnp(&p, seed).unwrap();
                assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
            }
        }
    }

    #[test]
    fn edge_list_import() {
        let (n, edges) = parse_edge_list("# ic\n0 1 0.5\n1 2 1.0\n").unwrap();
        assert_eq!(n, 3);
        let inst = classical_import(n, &edges, 2).unwrap();
        assert_eq!(inst.support_size(), 2);
        assert!(parse_edge_list("0 1").is_err());
    }
}
