//! Distributions over triggering vectors.
//!
//! A threshold `t^v_u` on edge `u → v` is the budget `u` needs to influence
//! `v` directly; `0` means word-of-mouth suffices and `B + 1` means the edge
//! never fires. All three supported families compile down to a list of
//! independent [`Factor`]s, each drawing the thresholds of a contiguous block
//! of edge ids, which is what sampling and enumeration operate on.

use std::ops::Range;

use crate::error::{invalid, Result};
use crate::graph::DirectedGraph;

pub const PROB_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum TriggeringDistribution {
    /// Per edge id: `(threshold, probability)` support; edges independent.
    EdgeCategorical(Vec<Vec<(u32, f64)>>),
    /// Per node: `(probability, thresholds aligned with N(v))` outcomes.
    NodeMixture(Vec<Vec<(f64, Vec<u32>)>>),
    /// Per node: `(probability, triggering set T^v ⊆ N(v))` outcomes.
    Classical(Vec<Vec<(f64, Vec<usize>)>>),
}

/// Independent block of thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub edges: Range<usize>,
    pub outcomes: Vec<(f64, Vec<u32>)>,
}

impl TriggeringDistribution {
    pub fn kind(&self) -> &'static str {
        match self {
            TriggeringDistribution::EdgeCategorical(_) => "edge_categorical",
            TriggeringDistribution::NodeMixture(_) => "node_mixture",
            TriggeringDistribution::Classical(_) => "classical",
        }
    }

    /// Checks shape and probabilities against `graph` and clamps thresholds
    /// above `budget + 1` down to `budget + 1`.
    pub fn normalized(self, graph: &DirectedGraph, budget: u32) -> Result<Self> {
        let never = budget.saturating_add(1);
        match self {
            TriggeringDistribution::EdgeCategorical(mut per_edge) => {
                if per_edge.len() != graph.edge_count() {
                    return Err(invalid(format!(
                        "{} edge distributions for {} edges",
                        per_edge.len(),
                        graph.edge_count()
                    )));
                }
                for (id, support) in per_edge.iter_mut().enumerate() {
                    let e = graph.edge(id);
                    check_probs(support.iter().map(|s| s.1), &format!("edge {}→{}", e.from, e.to))?;
                    for s in support.iter_mut() {
                        s.0 = s.0.min(never);
                    }
                    support.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
                }
                Ok(TriggeringDistribution::EdgeCategorical(per_edge))
            }
            TriggeringDistribution::NodeMixture(mut per_node) => {
                check_node_count(per_node.len(), graph)?;
                for (v, outcomes) in per_node.iter_mut().enumerate() {
                    let deg = graph.in_neighbors(v).len();
                    if deg == 0 {
                        outcomes.clear();
                        continue;
                    }
                    check_probs(outcomes.iter().map(|o| o.0), &format!("node {v}"))?;
                    for (_, t) in outcomes.iter_mut() {
                        if t.len() != deg {
                            return Err(invalid(format!(
                                "node {v}: threshold vector of length {} for {deg} in-neighbors",
                                t.len()
                            )));
                        }
                        for x in t.iter_mut() {
                            *x = (*x).min(never);
                        }
                    }
                    outcomes.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.total_cmp(&b.0)));
                }
                Ok(TriggeringDistribution::NodeMixture(per_node))
            }
            TriggeringDistribution::Classical(mut per_node) => {
                check_node_count(per_node.len(), graph)?;
                for (v, outcomes) in per_node.iter_mut().enumerate() {
                    if graph.in_neighbors(v).is_empty() {
                        if outcomes.iter().any(|(_, s)| !s.is_empty()) {
                            return Err(invalid(format!("node {v} has no in-neighbors but a non-empty triggering set")));
                        }
                        outcomes.clear();
                        continue;
                    }
                    check_probs(outcomes.iter().map(|o| o.0), &format!("node {v}"))?;
                    for (_, set) in outcomes.iter_mut() {
                        set.sort_unstable();
                        set.dedup();
                        if let Some(&u) = set.iter().find(|&&u| graph.edge_id(u, v).is_none()) {
                            return Err(invalid(format!("node {v}: triggering set contains {u}, not an in-neighbor")));
                        }
                    }
                    outcomes.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.total_cmp(&b.0)));
                }
                Ok(TriggeringDistribution::Classical(per_node))
            }
        }
    }

    /// Compiles to independent factors; classical sets use `budget + 1` as
    /// the "never" threshold.
    pub fn factors(&self, graph: &DirectedGraph, budget: u32) -> Vec<Factor> {
        match self {
            TriggeringDistribution::EdgeCategorical(per_edge) => per_edge
                .iter()
                .enumerate()
                .map(|(id, support)| Factor {
                    edges: id..id + 1,
                    outcomes: support.iter().map(|&(t, p)| (p, vec![t])).collect(),
                })
                .collect(),
            TriggeringDistribution::NodeMixture(per_node) => (0..graph.n())
                .filter(|&v| !graph.in_neighbors(v).is_empty())
                .map(|v| Factor { edges: graph.in_edge_ids(v), outcomes: per_node[v].clone() })
                .collect(),
            TriggeringDistribution::Classical(_) => {
                match encode_classical_normalized(self, graph, budget) {
                    TriggeringDistribution::NodeMixture(m) => (0..graph.n())
                        .filter(|&v| !graph.in_neighbors(v).is_empty())
                        .map(|v| Factor { edges: graph.in_edge_ids(v), outcomes: m[v].clone() })
                        .collect(),
                    _ => unreachable!(),
                }
            }
        }
    }
}

/// Encodes classical triggering-set distributions as threshold mixtures:
/// `t^v_u = 0` for `u ∈ T^v`, `B + 1` otherwise, probabilities preserved.
pub fn encode_classical(
    graph: &DirectedGraph,
    sets: Vec<Vec<(f64, Vec<usize>)>>,
    budget: u32,
) -> Result<TriggeringDistribution> {
    let checked = TriggeringDistribution::Classical(sets).normalized(graph, budget)?;
    Ok(encode_classical_normalized(&checked, graph, budget))
}

fn encode_classical_normalized(dist: &TriggeringDistribution, graph: &DirectedGraph, budget: u32) -> TriggeringDistribution {
    let TriggeringDistribution::Classical(per_node) = dist else {
        return dist.clone();
    };
    let never = budget.saturating_add(1);
    let mixture = per_node
        .iter()
        .enumerate()
        .map(|(v, outcomes)| {
            outcomes
                .iter()
                .map(|(p, set)| {
                    let t = graph
                        .in_neighbors(v)
                        .iter()
                        .map(|u| if set.binary_search(u).is_ok() { 0 } else { never })
                        .collect();
                    (*p, t)
                })
                .collect()
        })
        .collect();
    TriggeringDistribution::NodeMixture(mixture)
}

fn check_node_count(len: usize, graph: &DirectedGraph) -> Result<()> {
    if len != graph.n() {
        return Err(invalid(format!("{len} node distributions for {} nodes", graph.n())));
    }
    Ok(())
}

fn check_probs(probs: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut sum = 0.0;
    let mut count = 0;
    for p in probs {
        if p.is_nan() || p <= 0.0 || p.is_infinite() {
            return Err(invalid(format!("{what}: probability {p} is not positive")));
        }
        sum += p;
        count += 1;
    }
    if count == 0 {
        return Err(invalid(format!("{what}: empty distribution")));
    }
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(invalid(format!("{what}: probabilities sum to {sum}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn single_edge() -> DirectedGraph {
        DirectedGraph::new(2, &[Edge { from: 0, to: 1 }]).unwrap()
    }

    fn mixture(d: TriggeringDistribution) -> Vec<Vec<(f64, Vec<u32>)>> {
        match d {
            TriggeringDistribution::NodeMixture(m) => m,
            other => panic!("expected node mixture, got {}", other.kind()),
        }
    }

    #[test]
    fn classical_point_mass() {
        let g = single_edge();
        let m = mixture(encode_classical(&g, vec![vec![], vec![(1.0, vec![0])]], 2).unwrap());
        assert_eq!(m[1], vec![(1.0, vec![0])]);
    }

    #[test]
    fn classical_two_outcomes() {
        let g = single_edge();
        let m = mixture(encode_classical(&g, vec![vec![], vec![(0.3, vec![0]), (0.7, vec![])]], 1).unwrap());
        assert_eq!(m[1], vec![(0.7, vec![2]), (0.3, vec![0])]);
    }

    #[test]
    fn classical_full_set() {
        let g = DirectedGraph::new(3, &[Edge { from: 0, to: 2 }, Edge { from: 1, to: 2 }]).unwrap();
        let m = mixture(encode_classical(&g, vec![vec![], vec![], vec![(1.0, vec![0, 1])]], 3).unwrap());
        assert_eq!(m[2], vec![(1.0, vec![0, 0])]);
    }

    #[test]
    fn classical_rejects_non_neighbor() {
        let g = DirectedGraph::new(3, &[Edge { from: 0, to: 1 }]).unwrap();
        assert!(encode_classical(&g, vec![vec![], vec![(1.0, vec![2])], vec![]], 1).is_err());
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let g = single_edge();
        let bad = TriggeringDistribution::EdgeCategorical(vec![vec![(0, 0.5), (1, 0.4)]]);
        assert!(bad.normalized(&g, 2).is_err());
        let neg = TriggeringDistribution::EdgeCategorical(vec![vec![(0, 1.2), (1, -0.2)]]);
        assert!(neg.normalized(&g, 2).is_err());
        let missing = TriggeringDistribution::EdgeCategorical(vec![]);
        assert!(missing.normalized(&g, 2).is_err());
    }

    #[test]
    fn thresholds_clamped_to_never() {
        let g = single_edge();
        let d = TriggeringDistribution::EdgeCategorical(vec![vec![(9, 1.0)]]).normalized(&g, 2).unwrap();
        assert_eq!(d, TriggeringDistribution::EdgeCategorical(vec![vec![(3, 1.0)]]));
    }
}
