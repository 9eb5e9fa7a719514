use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Directed edge `from → to`, meaning `from ∈ N(to)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

/// Simple directed graph on `0..n`.
///
/// Edges get dense ids grouped by target: the in-edges of `v` are the ids
/// `in_offsets[v]..in_offsets[v + 1]`, sorted by source. Per-edge data
/// (thresholds, delays) is stored in vectors indexed by that id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    in_offsets: Vec<usize>,
    in_src: Vec<usize>,
    /// `(target, edge id)` per source node.
    out: Vec<Vec<(usize, usize)>>,
}

impl DirectedGraph {
    pub fn new(n: usize, edges: &[Edge]) -> Result<Self> {
        let mut sorted = edges.to_vec();
        for e in &sorted {
            if e.from >= n || e.to >= n {
                return Err(invalid(format!("edge {}→{} references a node outside 0..{n}", e.from, e.to)));
            }
            if e.from == e.to {
                return Err(invalid(format!("self-loop on node {}", e.from)));
            }
        }
        sorted.sort_by_key(|e| (e.to, e.from));
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("parallel edge {}→{}", w[0].from, w[0].to)));
        }

        let mut in_offsets = vec![0usize; n + 1];
        for e in &sorted {
            in_offsets[e.to + 1] += 1;
        }
        for v in 0..n {
            in_offsets[v + 1] += in_offsets[v];
        }
        let in_src: Vec<usize> = sorted.iter().map(|e| e.from).collect();
        let mut out = vec![Vec::new(); n];
        for (id, e) in sorted.iter().enumerate() {
            out[e.from].push((e.to, id));
        }
        for list in &mut out {
            list.sort_unstable();
        }
        Ok(DirectedGraph { n, in_offsets, in_src, out })
    }

    pub fn empty(n: usize) -> Self {
        DirectedGraph { n, in_offsets: vec![0; n + 1], in_src: Vec::new(), out: vec![Vec::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.in_src.len()
    }

    /// `N(v)`, sorted.
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_src[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn in_edge_ids(&self, v: usize) -> std::ops::Range<usize> {
        self.in_offsets[v]..self.in_offsets[v + 1]
    }

    /// `(target, edge id)` pairs leaving `u`.
    pub fn out_edges(&self, u: usize) -> &[(usize, usize)] {
        &self.out[u]
    }

    pub fn out_neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[u].iter().map(|&(v, _)| v)
    }

    pub fn edge_id(&self, from: usize, to: usize) -> Option<usize> {
        let r = self.in_edge_ids(to);
        self.in_neighbors(to).binary_search(&from).ok().map(|k| r.start + k)
    }

    pub fn edge(&self, id: usize) -> Edge {
        let to = self.in_offsets.partition_point(|&o| o <= id) - 1;
        Edge { from: self.in_src[id], to }
    }

    /// Edges in id order.
    pub fn edges(&self) -> Vec<Edge> {
        (0..self.n)
            .flat_map(|v| self.in_neighbors(v).iter().map(move |&u| Edge { from: u, to: v }))
            .collect()
    }
}
