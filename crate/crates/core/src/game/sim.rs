//! Colored cascades under frozen randomness.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DelayDistribution, GameInstance, StrategyProfile};
use crate::cascade::{self, Scenario};
use crate::graph::DirectedGraph;
use crate::seeds;

/// Delays and tie-break priorities of one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Randomness {
    /// `T` per edge id; positive and pairwise distinct.
    pub delays: Vec<f64>,
    /// Priority of player `p` at node `v` is `priorities[v * players + p]`;
    /// each node's priorities are a permutation of `0..players`.
    pub priorities: Vec<u32>,
    pub players: usize,
}

impl Randomness {
    /// Among `candidates`, the player with the highest priority at `v`.
    pub fn tie_winner(&self, v: usize, candidates: impl Iterator<Item = usize>) -> Option<usize> {
        candidates.max_by_key(|&p| self.priorities[v * self.players + p])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplayerScenario {
    pub thresholds: Scenario,
    pub randomness: Randomness,
}

/// Positive, pairwise distinct delays, one per edge.
pub fn sample_delays<R: Rng + ?Sized>(edges: usize, delay: &DelayDistribution, rng: &mut R) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(edges);
    while out.len() < edges {
        let x = delay.sample(rng);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Largest player count for which a tie-break block holds every priority
/// permutation.
pub const FULL_BLOCK_PLAYERS: usize = 6;

/// Number of consecutive draws that share one tie-break block: `M!` up to
/// [`FULL_BLOCK_PLAYERS`] players, `M` beyond.
pub fn block_len(players: usize) -> usize {
    if players <= FULL_BLOCK_PLAYERS {
        (1..=players).product()
    } else {
        players
    }
}

fn permutations(players: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for p in 0..players as u32 {
        out = out
            .into_iter()
            .flat_map(|perm| {
                (0..=perm.len()).map(move |k| {
                    let mut next = perm.clone();
                    next.insert(k, p);
                    next
                })
            })
            .collect();
    }
    out.sort();
    out
}

/// Priorities for draw `offset` of a tie-break block. Each node shuffles
/// the block's priority vectors independently and draw `offset` takes
/// entry `offset`, so every single draw sees a uniform permutation per
/// node. With full blocks every subset of tied players splits a block
/// exactly evenly; with rotation blocks only full ties do.
pub fn block_priorities<R: Rng + ?Sized>(n: usize, players: usize, offset: usize, rng: &mut R) -> Vec<u32> {
    let mut out = Vec::with_capacity(n * players);
    if players <= FULL_BLOCK_PLAYERS {
        let all = permutations(players);
        let mut order: Vec<usize> = (0..all.len()).collect();
        for _ in 0..n {
            order.shuffle(rng);
            out.extend_from_slice(&all[order[offset]]);
        }
    } else {
        let mut perm: Vec<u32> = (0..players as u32).collect();
        for _ in 0..n {
            perm.shuffle(rng);
            out.extend((0..players).map(|p| perm[(p + offset) % players]));
        }
    }
    out
}

/// Randomness of draw `index` under `seed`: delays from stream `index` of
/// the `delays` seed stream, priorities from stream `index / block_len` of
/// the `tie-break` seed stream.
pub fn draw_randomness(game: &GameInstance, seed: u64, index: usize) -> Randomness {
    let players = game.player_count();
    let block = block_len(players);
    let mut delay_rng = seeds::stream_rng(seeds::derive(seed, seeds::DELAYS), index as u64);
    let delays = sample_delays(game.graph().edge_count(), &game.delay(), &mut delay_rng);
    let mut tie_rng = seeds::stream_rng(seeds::derive(seed, seeds::TIE_BREAK), (index / block) as u64);
    let priorities = block_priorities(game.n(), players, index % block, &mut tie_rng);
    Randomness { delays, priorities, players }
}

/// One full draw: thresholds from the `scenario` stream, plus draw `0`
/// randomness.
pub fn sample_multiplayer_scenario(game: &GameInstance, seed: u64) -> MultiplayerScenario {
    let mut rng = seeds::stream_rng(seeds::derive(seed, seeds::SCENARIO), 0);
    MultiplayerScenario {
        thresholds: cascade::sample_scenario_with(game.base(), &mut rng),
        randomness: draw_randomness(game, seed, 0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoredCascade {
    pub colors: Vec<Option<usize>>,
    /// Activation time; infinite for uninfluenced nodes.
    pub times: Vec<f64>,
    /// Influenced nodes per player.
    pub counts: Vec<u32>,
}

impl ColoredCascade {
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

struct Event {
    time: f64,
    node: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // min-heap on (time, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.node.cmp(&self.node))
    }
}

impl MultiplayerScenario {
    pub fn cascade(&self, graph: &DirectedGraph, profile: &StrategyProfile) -> ColoredCascade {
        multiplayer_cascade(graph, &self.thresholds, &self.randomness, profile)
    }
}

/// Event-driven colored cascade. Bid nodes start at time 0 with the color
/// of their highest bidder; edge `v → u` is live when `t = 0` or the
/// highest bid on `v` is positive and at least `t`; the first arrival
/// along a live edge fixes a node's time and color.
pub fn multiplayer_cascade(
    graph: &DirectedGraph,
    thresholds: &Scenario,
    randomness: &Randomness,
    profile: &StrategyProfile,
) -> ColoredCascade {
    let n = graph.n();
    let players = profile.players();
    assert_eq!(players, randomness.players, "profile and randomness disagree on players");
    let top = profile.join();
    let mut colors: Vec<Option<usize>> = vec![None; n];
    let mut times = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for v in 0..n {
        if top[v] > 0 {
            let bidders = (0..players).filter(|&p| profile.rows[p][v] == top[v]);
            colors[v] = randomness.tie_winner(v, bidders);
            times[v] = 0.0;
            heap.push(Event { time: 0.0, node: v });
        }
    }
    while let Some(Event { time, node: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(u, id) in graph.out_edges(v) {
            let t = thresholds.thresholds[id];
            let live = t == 0 || (top[v] > 0 && top[v] >= t);
            if !live || done[u] {
                continue;
            }
            let arrival = time + randomness.delays[id];
            if arrival < times[u] {
                times[u] = arrival;
                colors[u] = colors[v];
                heap.push(Event { time: arrival, node: u });
            }
        }
    }
    let mut counts = vec![0u32; players];
    for c in colors.iter().flatten() {
        counts[*c] += 1;
    }
    let total: u32 = counts.iter().sum();
    assert_eq!(total, cascade::cascade_value(graph, thresholds, &top), "colored counts must add up to the joined cascade");
    ColoredCascade { colors, times, counts }
}
