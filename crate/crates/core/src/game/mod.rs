//! Multi-player Budgeted Triggering.
//!
//! Every player spreads its own budget over the nodes. A node bid on by
//! several players takes the color of the highest bidder, ties broken
//! uniformly. Colors then spread along live edges with random positive
//! delays; the first arrival colors a node for good. The social value
//! `F(b)` is the total number of influenced nodes, which equals the
//! single-player influence of the joined allocation `max_i b^i`.
//!
//! ```json
//! {
//!   "n": 3, "edges": [{"from": 0, "to": 1}],
//!   "triggering": {"kind": "edge_categorical", "edges": [...]},
//!   "players": [{"budget": 1, "capacities": [1, 1, 1]}, ...],
//!   "delay": {"kind": "exponential", "rate": 1.0}
//! }
//! ```
//!
//! The optional top-level `budget` (default: the largest player budget)
//! fixes the "never" threshold `B + 1` and must cover every player.

pub mod equilibrium;
pub mod payoff;
pub mod sim;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::generate::{self, GnpParams, TriggerKind};
use crate::graph::{DirectedGraph, Edge};
use crate::instance::{self, Instance, TriggeringSpec};
use crate::lattice::{Allocation, BudgetConstraints};
use crate::seeds;
use crate::triggering::TriggeringDistribution;

pub use equilibrium::{
    best_response, best_response_dynamics, empirical_poa, is_nash, social_optimum, verify_utility_conditions,
    BestResponse, DynamicsOutcome, DynamicsReport, NashVerdict, PoaConfig, PoaReport, SocialOptimum, UtilityReport,
};
pub use payoff::{expected_payoffs, PayoffConfig, PayoffOracle};
pub use sim::{multiplayer_cascade, ColoredCascade, MultiplayerScenario, Randomness};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayDistribution {
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
}

impl Default for DelayDistribution {
    fn default() -> Self {
        DelayDistribution::Exponential { rate: 1.0 }
    }
}

impl DelayDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DelayDistribution::Exponential { rate } if rate.is_finite() && rate > 0.0 => Ok(()),
            DelayDistribution::Uniform { low, high } if low.is_finite() && high.is_finite() && 0.0 <= low && low < high => {
                Ok(())
            }
            other => Err(invalid(format!("invalid delay distribution {other:?}"))),
        }
    }

    /// One strictly positive draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = match *self {
                DelayDistribution::Exponential { rate } => rng.sample(rand_distr::Exp::new(rate).expect("validated rate")),
                DelayDistribution::Uniform { low, high } => rng.random_range(low..high),
            };
            if x > 0.0 {
                return x;
            }
        }
    }
}

/// One allocation row per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile {
    pub rows: Vec<Allocation>,
}

impl StrategyProfile {
    pub fn zeros(players: usize, n: usize) -> Self {
        StrategyProfile { rows: vec![Allocation::zeros(n); players] }
    }

    pub fn from_rows(rows: Vec<Vec<u32>>) -> Self {
        StrategyProfile { rows: rows.into_iter().map(Allocation).collect() }
    }

    pub fn players(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn row(&self, i: usize) -> &Allocation {
        &self.rows[i]
    }

    pub fn with_row(&self, i: usize, row: Allocation) -> Self {
        let mut out = self.clone();
        out.rows[i] = row;
        out
    }

    /// `max_i b^i`, coordinate-wise.
    pub fn join(&self) -> Allocation {
        let mut out = vec![0u32; self.n()];
        for r in &self.rows {
            for (o, &x) in out.iter_mut().zip(r.iter()) {
                *o = (*o).max(x);
            }
        }
        Allocation(out)
    }

    /// Entry-wise maximum of two profiles.
    pub fn profile_join(&self, other: &Self) -> Self {
        self.zip_with(other, u32::max)
    }

    /// Entry-wise minimum of two profiles.
    pub fn profile_meet(&self, other: &Self) -> Self {
        self.zip_with(other, u32::min)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u32, u32) -> u32) -> Self {
        assert_eq!(self.players(), other.players(), "player count");
        StrategyProfile {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| Allocation(a.iter().zip(b.iter()).map(|(&x, &y)| f(x, y)).collect()))
                .collect(),
        }
    }

    pub fn le(&self, other: &Self) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a.le(b))
    }

    pub(crate) fn flat(&self) -> Vec<u32> {
        self.rows.iter().flat_map(|r| r.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    pub budget: u32,
    pub capacities: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub n: usize,
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u32>,
    pub triggering: TriggeringSpec,
    pub players: Vec<PlayerSpec>,
    #[serde(default)]
    pub delay: DelayDistribution,
}

/// Shared graph and threshold law, per-player constraints, delay law.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    base: Instance,
    players: Vec<BudgetConstraints>,
    delay: DelayDistribution,
}

impl GameInstance {
    /// `budget` defaults to the largest player budget.
    pub fn new(
        graph: DirectedGraph,
        triggering: TriggeringDistribution,
        players: Vec<BudgetConstraints>,
        delay: DelayDistribution,
        budget: Option<u32>,
    ) -> Result<Self> {
        if players.is_empty() {
            return Err(invalid("a game needs at least one player"));
        }
        delay.validate()?;
        let n = graph.n();
        for (i, p) in players.iter().enumerate() {
            if p.n() != n {
                return Err(invalid(format!("player {i} has {} capacities for {n} nodes", p.n())));
            }
        }
        let widest = players.iter().map(|p| p.budget).max().unwrap_or(0);
        let budget = budget.unwrap_or(widest);
        if budget < widest {
            return Err(invalid(format!("game budget {budget} is below a player budget {widest}")));
        }
        let base = Instance::new(graph, triggering, BudgetConstraints::uniform(n, budget, budget)?)?;
        Ok(GameInstance { base, players, delay })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[BudgetConstraints] {
        &self.players
    }

    pub fn graph(&self) -> &DirectedGraph {
        self.base.graph()
    }

    /// Single-player view of the shared graph and thresholds.
    pub fn base(&self) -> &Instance {
        &self.base
    }

    pub fn delay(&self) -> DelayDistribution {
        self.delay
    }

    pub fn is_feasible(&self, profile: &StrategyProfile) -> bool {
        profile.players() == self.players.len()
            && profile.rows.iter().zip(&self.players).all(|(r, c)| c.is_feasible(r))
    }

    /// Number of joint pure profiles, saturating.
    pub fn joint_space_size(&self) -> u128 {
        self.players
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.feasible_allocations().len() as u128))
    }

    pub fn from_file(file: GameFile) -> Result<Self> {
        let GameFile { n, edges, budget, triggering, players, delay } = file;
        let graph = DirectedGraph::new(n, &edges)?;
        let dist = instance::spec_to_distribution(&graph, triggering)?;
        let players = players
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                if p.capacities.len() != n {
                    return Err(invalid(format!("player {i} has {} capacities for {n} nodes", p.capacities.len())));
                }
                BudgetConstraints::new(p.budget, p.capacities)
            })
            .collect::<Result<Vec<_>>>()?;
        GameInstance::new(graph, dist, players, delay, budget)
    }

    pub fn to_file(&self) -> GameFile {
        GameFile {
            n: self.n(),
            edges: self.graph().edges(),
            budget: Some(self.base.budget()),
            triggering: instance::distribution_to_spec(self.graph(), self.base.triggering()),
            players: self
                .players
                .iter()
                .map(|p| PlayerSpec { budget: p.budget, capacities: p.capacities.clone() })
                .collect(),
            delay: self.delay,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        GameInstance::from_file(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("game serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        GameInstance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn digest(&self) -> String {
        instance::digest_json(&self.to_file())
    }
}

/// Star with `N` leaves plus `N` isolated nodes, all thresholds zero, `N`
/// players with unit budgets. Node 0 is the center, `1..=N` the leaves.
pub fn star_poa_instance(players: usize) -> GameInstance {
    assert!(players >= 1, "star game needs at least one player");
    let n = 2 * players + 1;
    let edges: Vec<Edge> = (1..=players).map(|leaf| Edge { from: 0, to: leaf }).collect();
    let graph = DirectedGraph::new(n, &edges).expect("valid star");
    let dist = TriggeringDistribution::EdgeCategorical(vec![vec![(0, 1.0)]; players]);
    let constraints = BudgetConstraints::uniform(n, 1, 1).expect("valid");
    GameInstance::new(graph, dist, vec![constraints; players], DelayDistribution::default(), None)
        .expect("valid star game")
}

/// Every player puts its unit on the star center.
pub fn star_all_on_center(players: usize) -> StrategyProfile {
    StrategyProfile { rows: vec![Allocation::unit(2 * players + 1, 0, 1); players] }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomGameParams {
    pub n: usize,
    pub players: usize,
    pub p: f64,
    pub support: usize,
    pub max_budget: u32,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams { n: 5, players: 2, p: 0.35, support: 2, max_budget: 2 }
    }
}

/// G(n, p) graph with node-mixture thresholds; player budgets uniform on
/// `1..=max_budget` and capacities uniform on `1..=budget`.
pub fn random_game(params: &RandomGameParams, seed: u64) -> Result<GameInstance> {
    if params.players == 0 || params.max_budget == 0 {
        return Err(invalid("random games need players and a positive budget"));
    }
    let base = generate::gnp(
        &GnpParams {
            n: params.n,
            p: params.p,
            support: params.support,
            budget: params.max_budget,
            capacity: None,
            kind: TriggerKind::NodeMixture,
        },
        seed,
    )?;
    let mut rng = seeds::rng(seeds::derive(seed, "players"));
    let players = (0..params.players)
        .map(|_| {
            let budget = rng.random_range(1..=params.max_budget);
            let caps = (0..params.n).map(|_| rng.random_range(1..=budget)).collect();
            BudgetConstraints::new(budget, caps)
        })
        .collect::<Result<Vec<_>>>()?;
    GameInstance::new(
        base.graph().clone(),
        base.triggering().clone(),
        players,
        DelayDistribution::default(),
        Some(params.max_budget),
    )
}
