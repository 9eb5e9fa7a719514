//! Expected payoffs under common random numbers.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use super::sim::{self, Randomness};
use super::{GameInstance, StrategyProfile};
use crate::cascade::{self, Scenario, DEFAULT_ENUMERATION_LIMIT};
use crate::graph::DirectedGraph;
use crate::oracle::OracleMode;
use crate::par::Exec;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffConfig {
    /// Delay and tie-break draws; rounded up to a whole number of
    /// tie-break blocks.
    pub draws: usize,
    /// Threshold supports up to this size are enumerated; larger ones are
    /// sampled jointly with the draws.
    pub enumeration_limit: u128,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for PayoffConfig {
    fn default() -> Self {
        PayoffConfig { draws: 200, enumeration_limit: DEFAULT_ENUMERATION_LIMIT, seed: 0, exec: Exec::default() }
    }
}

/// Payoff oracle over a frozen set of draws, so every profile is
/// evaluated against the same thresholds, delays and tie-breaks.
///
/// Enumerated mode pairs each threshold scenario `σ` (weight `Pr(σ)`) with
/// every draw; sampled mode pairs threshold sample `k` with draw `k`.
#[derive(Debug)]
pub struct PayoffOracle {
    graph: DirectedGraph,
    players: usize,
    mode: OracleMode,
    thresholds: Vec<Scenario>,
    draws: Vec<Randomness>,
    config: PayoffConfig,
    payoffs: RwLock<HashMap<Vec<u32>, Vec<f64>>>,
    social: RwLock<HashMap<Vec<u32>, f64>>,
    queries: AtomicU64,
}

impl PayoffOracle {
    pub fn new(game: &GameInstance, config: PayoffConfig) -> Self {
        assert!(config.draws >= 1, "payoff oracle needs at least one draw");
        let players = game.player_count();
        let block = sim::block_len(players);
        let m = config.draws.div_ceil(block) * block;
        let draws: Vec<Randomness> = (0..m).map(|k| sim::draw_randomness(game, config.seed, k)).collect();
        let (mode, thresholds) = if game.base().support_size() <= config.enumeration_limit {
            let all = cascade::enumerate_scenarios(game.base(), config.enumeration_limit).expect("support checked");
            (OracleMode::Exact, all)
        } else {
            let base = seeds::derive(config.seed, seeds::SCENARIO);
            let sampled = (0..m)
                .map(|k| cascade::sample_scenario_with(game.base(), &mut seeds::stream_rng(base, k as u64)))
                .collect();
            (OracleMode::MonteCarlo, sampled)
        };
        PayoffOracle {
            graph: game.graph().clone(),
            players,
            mode,
            thresholds,
            draws,
            config: PayoffConfig { draws: m, ..config },
            payoffs: RwLock::new(HashMap::new()),
            social: RwLock::new(HashMap::new()),
            queries: AtomicU64::new(0),
        }
    }

    /// Threshold enumeration (`Exact`) or joint sampling (`MonteCarlo`).
    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn config(&self) -> &PayoffConfig {
        &self.config
    }

    pub fn draws(&self) -> usize {
        self.draws.len()
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Payoff evaluations requested so far, cached or not.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Expected influenced count per player, `f^i(b)`.
    pub fn payoffs(&self, profile: &StrategyProfile) -> Vec<f64> {
        assert_eq!(profile.players(), self.players, "player count");
        assert_eq!(profile.n(), self.graph.n(), "profile width");
        self.queries.fetch_add(1, Ordering::Relaxed);
        let key = profile.flat();
        if let Some(v) = self.payoffs.read().expect("cache lock").get(&key) {
            return v.clone();
        }
        let v = self.compute_payoffs(profile);
        self.payoffs.write().expect("cache lock").insert(key, v.clone());
        v
    }

    pub fn payoff(&self, profile: &StrategyProfile, player: usize) -> f64 {
        self.payoffs(profile)[player]
    }

    fn compute_payoffs(&self, profile: &StrategyProfile) -> Vec<f64> {
        let m = self.draws.len();
        let exec = self.config.exec;
        let mut out = vec![0.0; self.players];
        match self.mode {
            OracleMode::Exact => {
                let d = self.draws.len();
                let counts = exec.map_range(self.thresholds.len() * d, |k| {
                    sim::multiplayer_cascade(&self.graph, &self.thresholds[k / d], &self.draws[k % d], profile).counts
                });
                for (s, scenario) in self.thresholds.iter().enumerate() {
                    let mut sums = vec![0u64; self.players];
                    for c in &counts[s * d..(s + 1) * d] {
                        for (acc, &x) in sums.iter_mut().zip(c) {
                            *acc += x as u64;
                        }
                    }
                    let p = scenario.probability.unwrap_or(0.0);
                    for (o, s) in out.iter_mut().zip(sums) {
                        *o += p * (s as f64 / m as f64);
                    }
                }
            }
            OracleMode::MonteCarlo => {
                let counts = exec.map_range(m, |k| {
                    sim::multiplayer_cascade(&self.graph, &self.thresholds[k], &self.draws[k], profile).counts
                });
                let mut sums = vec![0u64; self.players];
                for c in &counts {
                    for (acc, &x) in sums.iter_mut().zip(c) {
                        *acc += x as u64;
                    }
                }
                for (o, s) in out.iter_mut().zip(sums) {
                    *o = s as f64 / m as f64;
                }
            }
        }
        out
    }

    /// `F(b)`, computed as the single-player influence of `max_i b^i` over
    /// the same threshold scenarios.
    pub fn social(&self, profile: &StrategyProfile) -> f64 {
        self.social_joined(&profile.join())
    }

    pub fn social_joined(&self, joined: &[u32]) -> f64 {
        if let Some(&v) = self.social.read().expect("cache lock").get(joined) {
            return v;
        }
        let v = match self.mode {
            OracleMode::Exact => self
                .thresholds
                .iter()
                .map(|s| s.probability.unwrap_or(0.0) * cascade::cascade_value(&self.graph, s, joined) as f64)
                .sum(),
            OracleMode::MonteCarlo => {
                let total: u64 =
                    self.thresholds.iter().map(|s| cascade::cascade_value(&self.graph, s, joined) as u64).sum();
                total as f64 / self.thresholds.len() as f64
            }
        };
        self.social.write().expect("cache lock").insert(joined.to_vec(), v);
        v
    }
}

/// Payoffs of `profile` under a fresh oracle with `draws` draws.
pub fn expected_payoffs(game: &GameInstance, profile: &StrategyProfile, draws: usize, seed: u64) -> Vec<f64> {
    PayoffOracle::new(game, PayoffConfig { draws, seed, ..Default::default() }).payoffs(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{random_game, star_all_on_center, star_poa_instance, DelayDistribution, RandomGameParams};
    use crate::generate;
    use crate::lattice::Allocation;
    use crate::oracle::{InfluenceOracle, ValueOracle};

    #[test]
    fn empty_profile_pays_nothing() {
        let g = star_poa_instance(3);
        assert_eq!(expected_payoffs(&g, &StrategyProfile::zeros(3, 7), 30, 1), vec![0.0; 3]);
    }

    #[test]
    fn single_player_matches_influence() {
        let inst = generate::two_node_demo();
        let g = GameInstance::new(
            inst.graph().clone(),
            inst.triggering().clone(),
            vec![inst.constraints().clone()],
            DelayDistribution::default(),
            None,
        )
        .unwrap();
        let exact = InfluenceOracle::exact(&inst, 100).unwrap();
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 5, ..Default::default() });
        for b in inst.constraints().feasible_allocations() {
            let p = StrategyProfile { rows: vec![b.clone()] };
            assert!((o.payoff(&p, 0) - exact.value(&b)).abs() < 1e-12);
            assert!((o.social(&p) - exact.value(&b)).abs() < 1e-12);
        }
    }

    #[test]
    fn star_all_on_center_pays_six_fifths() {
        let g = star_poa_instance(5);
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 1000, seed: 7, ..Default::default() });
        let p = star_all_on_center(5);
        assert_eq!(o.payoffs(&p), vec![6.0 / 5.0; 5]);
        assert_eq!(o.social(&p), 6.0);
        let spread = StrategyProfile {
            rows: (0..5).map(|i| Allocation::unit(11, if i == 0 { 0 } else { 5 + i }, 1)).collect(),
        };
        assert_eq!(o.social(&spread), 10.0);
    }

    #[test]
    fn draws_round_up_to_whole_blocks() {
        let g = star_poa_instance(3);
        assert_eq!(PayoffOracle::new(&g, PayoffConfig { draws: 10, ..Default::default() }).draws(), 12);
        let g = star_poa_instance(5);
        assert_eq!(PayoffOracle::new(&g, PayoffConfig { draws: 1000, ..Default::default() }).draws(), 1080);
    }

    #[test]
    fn payoffs_conserve_social_value() {
        for seed in 0..5 {
            let g = random_game(&RandomGameParams { players: 3, ..Default::default() }, seed).unwrap();
            let o = PayoffOracle::new(&g, PayoffConfig { draws: 30, seed, ..Default::default() });
            let mut rng = seeds::rng(seed);
            for _ in 0..20 {
                let p = crate::game::equilibrium::random_profile(&g, &mut rng);
                let total: f64 = o.payoffs(&p).iter().sum();
                assert!((total - o.social(&p)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampled_mode_is_deterministic_across_exec() {
        let g = random_game(&RandomGameParams { n: 6, players: 2, ..Default::default() }, 3).unwrap();
        let mk = |exec| PayoffOracle::new(&g, PayoffConfig { draws: 64, enumeration_limit: 1, seed: 2, exec });
        let (a, b) = (mk(Exec::Sequential), mk(Exec::Parallel));
        assert_eq!(a.mode(), OracleMode::MonteCarlo);
        let p = StrategyProfile::from_rows(vec![vec![1, 0, 0, 0, 0, 1], vec![0, 1, 0, 1, 0, 0]]);
        assert_eq!(a.payoffs(&p), b.payoffs(&p));
    }
}
