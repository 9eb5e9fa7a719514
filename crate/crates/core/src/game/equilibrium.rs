//! Best responses, Nash checks, social optimum and price of anarchy.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::payoff::PayoffOracle;
use super::{GameInstance, StrategyProfile};
use crate::error::{Error, Result};
use crate::lattice::Allocation;
use crate::offline::DEFAULT_SEARCH_LIMIT;
use crate::seeds;

/// A deviation must gain more than this to count in dynamics.
pub const IMPROVEMENT_TOL: f64 = 1e-12;
/// Slack allowed by the Nash check and the utility conditions.
pub const NASH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub player: usize,
    pub allocation: Allocation,
    pub payoff: f64,
    pub current_payoff: f64,
}

fn player_strategies(game: &GameInstance, player: usize, limit: u128) -> Result<Vec<Allocation>> {
    let c = &game.players()[player];
    let count = c.box_size();
    if count > limit {
        return Err(Error::SearchSpaceTooLarge { count, limit });
    }
    Ok(c.feasible_allocations())
}

/// Exhaustive best response; ties go to the lexicographically smallest
/// allocation.
pub fn best_response(
    game: &GameInstance,
    oracle: &PayoffOracle,
    player: usize,
    profile: &StrategyProfile,
    limit: u128,
) -> Result<BestResponse> {
    if player >= game.player_count() {
        return Err(Error::IndexOutOfRange { index: player, n: game.player_count() });
    }
    let current_payoff = oracle.payoff(profile, player);
    let mut best: Option<(Allocation, f64)> = None;
    for a in player_strategies(game, player, limit)? {
        let v = oracle.payoff(&profile.with_row(player, a.clone()), player);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((a, v));
        }
    }
    let (allocation, payoff) = best.expect("the zero allocation is always feasible");
    Ok(BestResponse { player, allocation, payoff, current_payoff })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsOutcome {
    /// A full round changed nothing.
    Converged,
    /// A profile repeated.
    Cycle,
    /// The round cap was hit first.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub outcome: DynamicsOutcome,
    pub profile: StrategyProfile,
    pub rounds: usize,
    pub switches: usize,
}

/// Round-robin best responses by player index. A player switches only on
/// a strict improvement.
pub fn best_response_dynamics(
    game: &GameInstance,
    oracle: &PayoffOracle,
    initial: &StrategyProfile,
    max_rounds: usize,
    limit: u128,
) -> Result<DynamicsReport> {
    let mut profile = initial.clone();
    let mut seen = HashSet::from([profile.clone()]);
    let mut switches = 0;
    for round in 1..=max_rounds {
        let mut changed = false;
        for i in 0..game.player_count() {
            let br = best_response(game, oracle, i, &profile, limit)?;
            if br.payoff > br.current_payoff + IMPROVEMENT_TOL {
                profile = profile.with_row(i, br.allocation);
                switches += 1;
                changed = true;
                if !seen.insert(profile.clone()) {
                    return Ok(DynamicsReport { outcome: DynamicsOutcome::Cycle, profile, rounds: round, switches });
                }
            }
        }
        if !changed {
            return Ok(DynamicsReport { outcome: DynamicsOutcome::Converged, profile, rounds: round, switches });
        }
    }
    Ok(DynamicsReport { outcome: DynamicsOutcome::Undecided, profile, rounds: max_rounds, switches })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashVerdict {
    pub is_nash: bool,
    /// Best unilateral deviation of every player.
    pub deviations: Vec<BestResponse>,
}

pub fn is_nash(game: &GameInstance, oracle: &PayoffOracle, profile: &StrategyProfile, limit: u128) -> Result<NashVerdict> {
    let deviations = (0..game.player_count())
        .map(|i| best_response(game, oracle, i, profile, limit))
        .collect::<Result<Vec<_>>>()?;
    let is_nash = deviations.iter().all(|d| d.current_payoff >= d.payoff - NASH_TOL);
    Ok(NashVerdict { is_nash, deviations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialOptimum {
    pub profile: StrategyProfile,
    pub value: f64,
}

/// Joint brute force over all pure profiles; ties go to the
/// lexicographically smallest profile (player 0's row first).
pub fn social_optimum(game: &GameInstance, oracle: &PayoffOracle, limit: u128) -> Result<SocialOptimum> {
    let count = game.joint_space_size();
    if count > limit {
        return Err(Error::SearchSpaceTooLarge { count, limit });
    }
    let lists: Vec<Vec<Allocation>> = game.players().iter().map(|c| c.feasible_allocations()).collect();
    let mut digits = vec![0usize; lists.len()];
    let mut best: Option<(Vec<usize>, f64)> = None;
    let n = game.n();
    loop {
        let mut joined = vec![0u32; n];
        for (list, &d) in lists.iter().zip(&digits) {
            for (j, &x) in joined.iter_mut().zip(list[d].iter()) {
                *j = (*j).max(x);
            }
        }
        let v = oracle.social_joined(&joined);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((digits.clone(), v));
        }
        let mut k = lists.len();
        loop {
            if k == 0 {
                let (d, value) = best.expect("at least one profile");
                let rows = lists.iter().zip(&d).map(|(l, &i)| l[i].clone()).collect();
                return Ok(SocialOptimum { profile: StrategyProfile { rows }, value });
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < lists[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// One uniformly random feasible allocation per player.
pub fn random_profile<R: Rng + ?Sized>(game: &GameInstance, rng: &mut R) -> StrategyProfile {
    StrategyProfile {
        rows: game
            .players()
            .iter()
            .map(|c| {
                let all = c.feasible_allocations();
                all[rng.random_range(0..all.len())].clone()
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoaConfig {
    /// Random starting profiles in addition to the zero profile.
    pub starts: usize,
    pub max_rounds: usize,
    pub seed: u64,
    pub limit: u128,
    /// Joint spaces up to this size are also scanned profile by profile.
    pub exhaustive_limit: u128,
}

impl Default for PoaConfig {
    fn default() -> Self {
        PoaConfig { starts: 4, max_rounds: 50, seed: 0, limit: DEFAULT_SEARCH_LIMIT, exhaustive_limit: 50_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub profile: StrategyProfile,
    pub social: f64,
    pub payoffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoaReport {
    pub optimum: SocialOptimum,
    pub equilibria: Vec<Equilibrium>,
    pub worst: Option<Equilibrium>,
    /// `F(OPT) / F(worst NE)`; 1 when both are zero, `None` without an NE.
    pub ratio: Option<f64>,
    pub runs: Vec<DynamicsOutcome>,
    /// Whether every joint profile was checked.
    pub exhaustive: bool,
}

/// Every pure profile, player 0's row most significant, in lexicographic
/// order.
pub fn all_profiles(game: &GameInstance, limit: u128) -> Result<Vec<StrategyProfile>> {
    let count = game.joint_space_size();
    if count > limit {
        return Err(Error::SearchSpaceTooLarge { count, limit });
    }
    let mut out = vec![Vec::new()];
    for c in game.players() {
        let options = c.feasible_allocations();
        out = out
            .into_iter()
            .flat_map(|rows: Vec<Allocation>| {
                options.iter().map(move |a| {
                    let mut r = rows.clone();
                    r.push(a.clone());
                    r
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(|rows| StrategyProfile { rows }).collect())
}

/// Runs dynamics from the zero profile, `starts` random feasible profiles
/// and any `extra` profiles, keeps the end points that pass the Nash
/// check, and compares the worst one with the joint optimum. Joint spaces
/// within `exhaustive_limit` are additionally scanned for every pure
/// equilibrium.
pub fn empirical_poa(
    game: &GameInstance,
    oracle: &PayoffOracle,
    config: &PoaConfig,
    extra: &[StrategyProfile],
) -> Result<PoaReport> {
    let optimum = social_optimum(game, oracle, config.limit)?;
    let mut rng = seeds::rng(seeds::derive(config.seed, "poa-starts"));
    let mut starts = vec![StrategyProfile::zeros(game.player_count(), game.n())];
    starts.extend((0..config.starts).map(|_| random_profile(game, &mut rng)));
    starts.extend(extra.iter().cloned());

    let mut runs = Vec::new();
    let mut equilibria: Vec<Equilibrium> = Vec::new();
    for s in &starts {
        let report = best_response_dynamics(game, oracle, s, config.max_rounds, config.limit)?;
        runs.push(report.outcome);
        if report.outcome != DynamicsOutcome::Converged || equilibria.iter().any(|e| e.profile == report.profile) {
            continue;
        }
        if is_nash(game, oracle, &report.profile, config.limit)?.is_nash {
            equilibria.push(Equilibrium {
                social: oracle.social(&report.profile),
                payoffs: oracle.payoffs(&report.profile),
                profile: report.profile,
            });
        }
    }
    let exhaustive = game.joint_space_size() <= config.exhaustive_limit;
    if exhaustive {
        for p in all_profiles(game, config.exhaustive_limit)? {
            if equilibria.iter().any(|e| e.profile == p) || !is_nash(game, oracle, &p, config.limit)?.is_nash {
                continue;
            }
            equilibria.push(Equilibrium { social: oracle.social(&p), payoffs: oracle.payoffs(&p), profile: p });
        }
    }
    let worst = equilibria.iter().min_by(|a, b| a.social.total_cmp(&b.social)).cloned();
    let ratio = worst.as_ref().map(|w| {
        if w.social == 0.0 && optimum.value == 0.0 {
            1.0
        } else {
            optimum.value / w.social
        }
    });
    Ok(PoaReport { optimum, equilibria, worst, ratio, runs, exhaustive })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityViolation {
    pub condition: String,
    pub x: StrategyProfile,
    pub y: Option<StrategyProfile>,
    pub player: Option<usize>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub samples: usize,
    pub u1_checks: usize,
    pub u2_checks: usize,
    pub u3_checks: usize,
    /// Largest `|F(b) − Σ_i f^i(b)|` seen.
    pub max_u2_gap: f64,
    pub violations: Vec<UtilityViolation>,
}

impl UtilityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks on `samples` random pairs of feasible profiles:
/// U1 monotonicity and submodularity of `F` on the profile lattice,
/// U2 `F(b) = Σ_i f^i(b)`, and U3 `f^i(b) ≥ F(b) − F(0, b^{−i})`.
pub fn verify_utility_conditions(game: &GameInstance, oracle: &PayoffOracle, samples: usize, seed: u64) -> UtilityReport {
    let mut rng = seeds::rng(seeds::derive(seed, "utility"));
    let mut report = UtilityReport { samples, u1_checks: 0, u2_checks: 0, u3_checks: 0, max_u2_gap: 0.0, violations: Vec::new() };
    let n = game.n();
    for _ in 0..samples {
        let x = random_profile(game, &mut rng);
        let y = random_profile(game, &mut rng);
        let (fx, fy) = (oracle.social(&x), oracle.social(&y));
        let (fj, fm) = (oracle.social(&x.profile_join(&y)), oracle.social(&x.profile_meet(&y)));
        let mut u1 = |cond: &str, gap: f64| {
            if gap > NASH_TOL {
                report.violations.push(UtilityViolation {
                    condition: cond.into(),
                    x: x.clone(),
                    y: Some(y.clone()),
                    player: None,
                    gap,
                });
            }
        };
        u1("U1 monotone", fx - fj);
        u1("U1 monotone", fm - fx);
        u1("U1 submodular", fj + fm - fx - fy);
        report.u1_checks += 3;

        for p in [&x, &y] {
            let payoffs = oracle.payoffs(p);
            let social = oracle.social(p);
            let gap = (social - payoffs.iter().sum::<f64>()).abs();
            report.max_u2_gap = report.max_u2_gap.max(gap);
            report.u2_checks += 1;
            if gap > NASH_TOL {
                report.violations.push(UtilityViolation { condition: "U2".into(), x: p.clone(), y: None, player: None, gap });
            }
            for (i, &fi) in payoffs.iter().enumerate() {
                let without = oracle.social(&p.with_row(i, Allocation::zeros(n)));
                let gap = social - without - fi;
                report.u3_checks += 1;
                if gap > NASH_TOL {
                    report.violations.push(UtilityViolation {
                        condition: "U3".into(),
                        x: p.clone(),
                        y: None,
                        player: Some(i),
                        gap,
                    });
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::payoff::PayoffConfig;
    use crate::game::{random_game, star_all_on_center, star_poa_instance, DelayDistribution, RandomGameParams};
    use crate::generate;
    use crate::oracle::InfluenceOracle;
    use crate::par::Exec;

    fn single_player_game() -> (GameInstance, crate::instance::Instance) {
        let inst = generate::gnp(&generate::GnpParams { n: 5, budget: 2, ..Default::default() }, 11).unwrap();
        let g = GameInstance::new(
            inst.graph().clone(),
            inst.triggering().clone(),
            vec![inst.constraints().clone()],
            DelayDistribution::default(),
            None,
        )
        .unwrap();
        (g, inst)
    }

    #[test]
    fn single_player_best_response_is_the_optimum() {
        let (g, inst) = single_player_game();
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 3, ..Default::default() });
        let exact = InfluenceOracle::exact(&inst, 1 << 20).unwrap();
        let opt = crate::offline::brute_force_opt(&exact, inst.constraints(), 1 << 20, Exec::Sequential).unwrap();
        let br = best_response(&g, &o, 0, &StrategyProfile::zeros(1, 5), 1 << 20).unwrap();
        assert_eq!(br.allocation, opt.allocation);
        assert!((br.payoff - opt.value).abs() < 1e-9);

        let dyn_ = best_response_dynamics(&g, &o, &StrategyProfile::zeros(1, 5), 5, 1 << 20).unwrap();
        assert_eq!(dyn_.outcome, DynamicsOutcome::Converged);
        assert_eq!(dyn_.profile.rows[0], opt.allocation);
        assert!(is_nash(&g, &o, &dyn_.profile, 1 << 20).unwrap().is_nash);

        let poa = empirical_poa(&g, &o, &PoaConfig::default(), &[]).unwrap();
        assert_eq!(poa.ratio, Some(1.0));
    }

    #[test]
    fn zero_budget_player_responds_with_zero() {
        let mut file = star_poa_instance(2).to_file();
        file.players[1].budget = 0;
        file.players[1].capacities = vec![0; 5];
        let g = GameInstance::from_file(file).unwrap();
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 4, ..Default::default() });
        let br = best_response(&g, &o, 1, &StrategyProfile::zeros(2, 5), 100).unwrap();
        assert!(br.allocation.is_zero());
    }

    #[test]
    fn star_center_is_nash_and_poa_is_tight() {
        let g = star_poa_instance(5);
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 500, seed: 3, ..Default::default() });
        let center = star_all_on_center(5);
        let verdict = is_nash(&g, &o, &center, 1 << 20).unwrap();
        assert!(verdict.is_nash);
        assert!(verdict.deviations.iter().all(|d| d.current_payoff == 1.2));
        let br = best_response(&g, &o, 2, &center, 1 << 20).unwrap();
        assert_eq!(br.allocation, Allocation::unit(11, 0, 1));

        let d = best_response_dynamics(&g, &o, &center, 3, 1 << 20).unwrap();
        assert_eq!((d.outcome, d.switches), (DynamicsOutcome::Converged, 0));

        let opt = social_optimum(&g, &o, 1 << 20).unwrap();
        assert_eq!(opt.value, 10.0);

        let poa = empirical_poa(&g, &o, &PoaConfig { starts: 2, ..Default::default() }, &[center]).unwrap();
        assert_eq!(poa.worst.as_ref().unwrap().social, 6.0);
        assert_eq!(poa.ratio, Some(10.0 / 6.0));
    }

    #[test]
    fn star_leaf_is_not_nash() {
        let g = star_poa_instance(5);
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 100, ..Default::default() });
        let p = star_all_on_center(5).with_row(0, Allocation::unit(11, 1, 1));
        let v = is_nash(&g, &o, &p, 1 << 20).unwrap();
        assert!(!v.is_nash);
        assert!(v.deviations[0].payoff > v.deviations[0].current_payoff);
    }

    #[test]
    fn exhaustive_scan_finds_every_equilibrium() {
        let g = star_poa_instance(2);
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 20, ..Default::default() });
        let all = all_profiles(&g, 1000).unwrap();
        assert_eq!(all.len(), 36);
        assert_eq!(all[1], StrategyProfile::from_rows(vec![vec![0; 5], vec![0, 0, 0, 0, 1]]));
        let poa = empirical_poa(&g, &o, &PoaConfig { starts: 0, ..Default::default() }, &[]).unwrap();
        assert!(poa.exhaustive);
        let direct = all.iter().filter(|p| is_nash(&g, &o, p, 1000).unwrap().is_nash).count();
        assert_eq!(poa.equilibria.len(), direct);
        // N = 2: both on the center, F = 3, OPT = 4
        assert_eq!(poa.ratio, Some(4.0 / 3.0));
    }

    #[test]
    fn zero_round_cap_is_undecided() {
        let g = star_poa_instance(2);
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 4, ..Default::default() });
        let d = best_response_dynamics(&g, &o, &StrategyProfile::zeros(2, 5), 0, 100).unwrap();
        assert_eq!(d.outcome, DynamicsOutcome::Undecided);
    }

    #[test]
    fn search_limits_are_enforced() {
        let g = star_poa_instance(5);
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 5, ..Default::default() });
        assert!(matches!(social_optimum(&g, &o, 1000), Err(Error::SearchSpaceTooLarge { .. })));
        assert!(matches!(
            best_response(&g, &o, 0, &star_all_on_center(5), 10),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn utility_conditions_hold() {
        let g = star_poa_instance(3);
        let o = PayoffOracle::new(&g, PayoffConfig { draws: 30, ..Default::default() });
        let r = verify_utility_conditions(&g, &o, 50, 1);
        assert!(r.holds(), "{:?}", r.violations.first());

        let (g1, _) = single_player_game();
        let o1 = PayoffOracle::new(&g1, PayoffConfig { draws: 3, ..Default::default() });
        assert!(verify_utility_conditions(&g1, &o1, 30, 2).holds());

        for seed in 0..3 {
            let g = random_game(&RandomGameParams { players: 3, ..Default::default() }, seed).unwrap();
            let o = PayoffOracle::new(&g, PayoffConfig { draws: 15, seed, ..Default::default() });
            let r = verify_utility_conditions(&g, &o, 20, seed);
            assert!(r.holds(), "seed {seed}: {:?}", r.violations.first());
        }
    }
}
