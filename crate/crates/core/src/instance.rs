//! Problem instances and their JSON file format.
//!
//! ```json
//! {
//!   "n": 2,
//!   "edges": [{"from": 0, "to": 1}],
//!   "budget": 2,
//!   "capacities": [2, 1],
//!   "triggering": {
//!     "kind": "edge_categorical",
//!     "edges": [{"from": 0, "to": 1, "support": [{"threshold": 1, "prob": 0.5},
//!                                                {"threshold": 2, "prob": 0.5}]}]
//!   }
//! }
//! ```
//!
//! `node_mixture` lists `nodes: [{node, outcomes: [{prob, thresholds: [{from, threshold}]}]}]`
//! with one threshold per in-neighbor; `classical` lists
//! `nodes: [{node, outcomes: [{prob, set: [..]}]}]`. Every node with
//! in-edges must appear. Unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::graph::{DirectedGraph, Edge};
use crate::lattice::BudgetConstraints;
use crate::triggering::{Factor, TriggeringDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub budget: u32,
    pub capacities: Vec<u32>,
    pub triggering: TriggeringSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TriggeringSpec {
    EdgeCategorical { edges: Vec<EdgeSupport> },
    NodeMixture { nodes: Vec<NodeMixture> },
    Classical { nodes: Vec<NodeClassical> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSupport {
    pub from: usize,
    pub to: usize,
    pub support: Vec<ThresholdMass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdMass {
    pub threshold: u32,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeMixture {
    pub node: usize,
    pub outcomes: Vec<MixtureOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureOutcome {
    pub prob: f64,
    pub thresholds: Vec<NeighborThreshold>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborThreshold {
    pub from: usize,
    pub threshold: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeClassical {
    pub node: usize,
    pub outcomes: Vec<SetOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetOutcome {
    pub prob: f64,
    pub set: Vec<usize>,
}

/// Graph, triggering distribution and budget constraints. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    graph: DirectedGraph,
    triggering: TriggeringDistribution,
    constraints: BudgetConstraints,
    factors: Vec<Factor>,
}

impl Instance {
    pub fn new(graph: DirectedGraph, triggering: TriggeringDistribution, constraints: BudgetConstraints) -> Result<Self> {
        if constraints.n() != graph.n() {
            return Err(invalid(format!("{} capacities for {} nodes", constraints.n(), graph.n())));
        }
        let triggering = triggering.normalized(&graph, constraints.budget)?;
        let factors = triggering.factors(&graph, constraints.budget);
        Ok(Instance { graph, triggering, constraints, factors })
    }

    /// Same graph and distribution under different constraints. Classical
    /// "never" thresholds follow the new budget.
    pub fn with_constraints(&self, constraints: BudgetConstraints) -> Result<Self> {
        Instance::new(self.graph.clone(), self.triggering.clone(), constraints)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn triggering(&self) -> &TriggeringDistribution {
        &self.triggering
    }

    pub fn constraints(&self) -> &BudgetConstraints {
        &self.constraints
    }

    pub fn budget(&self) -> u32 {
        self.constraints.budget
    }

    pub(crate) fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Number of joint threshold outcomes, `Π |support|`, saturating.
    pub fn support_size(&self) -> u128 {
        self.factors.iter().fold(1u128, |acc, f| acc.saturating_mul(f.outcomes.len() as u128))
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        let InstanceFile { n, edges, budget, capacities, triggering } = file;
        let graph = DirectedGraph::new(n, &edges)?;
        if capacities.len() != n {
            return Err(invalid(format!("{} capacities for {n} nodes", capacities.len())));
        }
        let constraints = BudgetConstraints::new(budget, capacities)?;
        let dist = spec_to_distribution(&graph, triggering)?;
        Instance::new(graph, dist, constraints)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n: self.n(),
            edges: self.graph.edges(),
            budget: self.constraints.budget,
            capacities: self.constraints.capacities.clone(),
            triggering: distribution_to_spec(&self.graph, &self.triggering),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Instance::from_file(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        digest_json(&self.to_file())
    }
}

pub(crate) fn digest_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}

pub(crate) fn spec_to_distribution(graph: &DirectedGraph, spec: TriggeringSpec) -> Result<TriggeringDistribution> {
    match spec {
        TriggeringSpec::EdgeCategorical { edges } => {
            let mut per_edge: Vec<Option<Vec<(u32, f64)>>> = vec![None; graph.edge_count()];
            for e in edges {
                let id = graph
                    .edge_id(e.from, e.to)
                    .ok_or_else(|| invalid(format!("threshold spec for missing edge {}→{}", e.from, e.to)))?;
                if per_edge[id].is_some() {
                    return Err(invalid(format!("duplicate threshold spec for edge {}→{}", e.from, e.to)));
                }
                per_edge[id] = Some(e.support.iter().map(|s| (s.threshold, s.prob)).collect());
            }
            let per_edge = per_edge
                .into_iter()
                .enumerate()
                .map(|(id, s)| {
                    s.ok_or_else(|| {
                        let e = graph.edge(id);
                        invalid(format!("edge {}→{} has no threshold spec", e.from, e.to))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TriggeringDistribution::EdgeCategorical(per_edge))
        }
        TriggeringSpec::NodeMixture { nodes } => {
            let mut per_node = vec![None; graph.n()];
            for spec in nodes {
                let v = spec.node;
                if v >= graph.n() {
                    return Err(invalid(format!("mixture for unknown node {v}")));
                }
                if per_node[v].is_some() {
                    return Err(invalid(format!("duplicate mixture for node {v}")));
                }
                let nbrs = graph.in_neighbors(v);
                let mut outcomes = Vec::with_capacity(spec.outcomes.len());
                for o in spec.outcomes {
                    let mut t: Vec<Option<u32>> = vec![None; nbrs.len()];
                    for nt in o.thresholds {
                        let k = nbrs
                            .binary_search(&nt.from)
                            .map_err(|_| invalid(format!("node {v}: threshold for non-neighbor {}", nt.from)))?;
                        if t[k].replace(nt.threshold).is_some() {
                            return Err(invalid(format!("node {v}: duplicate threshold for {}", nt.from)));
                        }
                    }
                    let t = t
                        .into_iter()
                        .zip(nbrs)
                        .map(|(x, u)| x.ok_or_else(|| invalid(format!("edge {u}→{v} has no threshold in an outcome"))))
                        .collect::<Result<Vec<_>>>()?;
                    outcomes.push((o.prob, t));
                }
                per_node[v] = Some(outcomes);
            }
            let per_node = fill_nodes(graph, per_node)?;
            Ok(TriggeringDistribution::NodeMixture(per_node))
        }
        TriggeringSpec::Classical { nodes } => {
            let mut per_node = vec![None; graph.n()];
            for spec in nodes {
                let v = spec.node;
                if v >= graph.n() {
                    return Err(invalid(format!("triggering sets for unknown node {v}")));
                }
                if per_node[v].is_some() {
                    return Err(invalid(format!("duplicate triggering sets for node {v}")));
                }
                per_node[v] = Some(spec.outcomes.into_iter().map(|o| (o.prob, o.set)).collect());
            }
            let per_node = fill_nodes(graph, per_node)?;
            Ok(TriggeringDistribution::Classical(per_node))
        }
    }
}

fn fill_nodes<T>(graph: &DirectedGraph, per_node: Vec<Option<Vec<T>>>) -> Result<Vec<Vec<T>>> {
    per_node
        .into_iter()
        .enumerate()
        .map(|(v, o)| match o {
            Some(x) => Ok(x),
            None if graph.in_neighbors(v).is_empty() => Ok(Vec::new()),
            None => Err(invalid(format!("node {v} has in-edges but no triggering spec"))),
        })
        .collect()
}

pub(crate) fn distribution_to_spec(graph: &DirectedGraph, dist: &TriggeringDistribution) -> TriggeringSpec {
    match dist {
        TriggeringDistribution::EdgeCategorical(per_edge) => TriggeringSpec::EdgeCategorical {
            edges: per_edge
                .iter()
                .enumerate()
                .map(|(id, support)| {
                    let e = graph.edge(id);
                    EdgeSupport {
                        from: e.from,
                        to: e.to,
                        support: support.iter().map(|&(threshold, prob)| ThresholdMass { threshold, prob }).collect(),
                    }
                })
                .collect(),
        },
        TriggeringDistribution::NodeMixture(per_node) => TriggeringSpec::NodeMixture {
            nodes: per_node
                .iter()
                .enumerate()
                .filter(|(v, _)| !graph.in_neighbors(*v).is_empty())
                .map(|(v, outcomes)| NodeMixture {
                    node: v,
                    outcomes: outcomes
                        .iter()
                        .map(|(prob, t)| MixtureOutcome {
                            prob: *prob,
                            thresholds: graph
                                .in_neighbors(v)
                                .iter()
                                .zip(t)
                                .map(|(&from, &threshold)| NeighborThreshold { from, threshold })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        },
        TriggeringDistribution::Classical(per_node) => TriggeringSpec::Classical {
            nodes: per_node
                .iter()
                .enumerate()
                .filter(|(v, _)| !graph.in_neighbors(*v).is_empty())
                .map(|(v, outcomes)| NodeClassical {
                    node: v,
                    outcomes: outcomes.iter().map(|(prob, set)| SetOutcome { prob: *prob, set: set.clone() }).collect(),
                })
                .collect(),
        },
    }
}
