use proptest::prelude::*;
use rand::Rng;

use budinf::cascade::{self, composed_value, first_stage, step_cascade};
use budinf::game::{self, RandomGameParams, StrategyProfile};
use budinf::generate::{self, GnpParams, TriggerKind};
use budinf::lattice::Allocation;
use budinf::offline;
use budinf::online::{self, OnlineConfig};
use budinf::{seeds, Exec, InfluenceOracle, Instance, ValueOracle};

const KINDS: [TriggerKind; 3] = [TriggerKind::EdgeCategorical, TriggerKind::NodeMixture, TriggerKind::Classical];

fn instance(seed: u64, n: usize, p: f64, support: usize, budget: u32, kind: usize) -> Instance {
    let params = GnpParams { n, p, support, budget, capacity: None, kind: KINDS[kind] };
    generate::gnp(&params, seed).unwrap()
}

fn small_instance() -> impl Strategy<Value = Instance> {
    (any::<u64>(), 1usize..=5, 0.0f64..=1.0, 1usize..=3, 0u32..=3, 0usize..3)
        .prop_map(|(seed, n, p, s, b, k)| instance(seed, n, p, s, b, k))
}

fn allocation(rng: &mut impl Rng, caps: &[u32]) -> Vec<u32> {
    caps.iter().map(|&c| rng.random_range(0..=c)).collect()
}

fn join(x: &[u32], y: &[u32]) -> Vec<u32> {
    x.iter().zip(y).map(|(a, b)| *a.max(b)).collect()
}

fn meet(x: &[u32], y: &[u32]) -> Vec<u32> {
    x.iter().zip(y).map(|(a, b)| *a.min(b)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn instance_json_round_trip(inst in small_instance()) {
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.digest(), inst.digest());
    }

    #[test]
    fn cascade_is_composition_and_first_stage_is_independent(inst in small_instance(), seed in any::<u64>()) {
        let g = inst.graph();
        let sigma = cascade::sample_scenario(&inst, seed);
        let mut rng = seeds::rng(seed);
        let caps = &inst.constraints().capacities;
        let (x, y) = (allocation(&mut rng, caps), allocation(&mut rng, caps));
        let (reached, _) = step_cascade(g, &sigma, &x);
        prop_assert_eq!(reached.iter().filter(|&&r| r).count() as u32, composed_value(g, &sigma, &x));

        let gx = first_stage(g, &sigma, &x);
        let gy = first_stage(g, &sigma, &y);
        let gj = first_stage(g, &sigma, &join(&x, &y));
        for v in 0..g.n() {
            prop_assert!(!gx[v] || gj[v], "first stage not monotone at {v}");
            prop_assert!(!gj[v] || gx[v] || gy[v], "coordinate independence fails at {v}");
        }
    }

    #[test]
    fn value_is_monotone_and_lattice_submodular(inst in small_instance(), seed in any::<u64>()) {
        // a frozen sample average is itself an average of f_σ, so the laws hold exactly
        let o = InfluenceOracle::auto(&inst, 1 << 14, 64, seed);
        let mut rng = seeds::rng(seed);
        let caps = &inst.constraints().capacities;
        for _ in 0..8 {
            let (x, y) = (allocation(&mut rng, caps), allocation(&mut rng, caps));
            let (j, m) = (join(&x, &y), meet(&x, &y));
            let (fx, fy, fj, fm) = (o.value(&x), o.value(&y), o.value(&j), o.value(&m));
            prop_assert!(fm <= fx + 1e-9 && fx <= fj + 1e-9);
            prop_assert!(fx + fy + 1e-9 >= fj + fm, "f(x)+f(y)={} < f(x∨y)+f(x∧y)={}", fx + fy, fj + fm);
        }
    }

    #[test]
    fn solvers_are_feasible_and_enum_meets_its_ratio(
        seed in any::<u64>(), n in 1usize..=4, p in 0.0f64..=1.0, b in 0u32..=3, k in 0usize..3,
    ) {
        let inst = instance(seed, n, p, 2, b, k);
        let o = InfluenceOracle::exact(&inst, 1 << 16).unwrap();
        let c = inst.constraints();
        let opt = offline::brute_force_opt(&o, c, 1 << 20, Exec::Sequential).unwrap();
        let en = offline::greedy_partial_enum(&o, c, 3, Exec::Sequential).unwrap();
        let gr = offline::density_greedy(&o, c);
        prop_assert!(c.is_feasible(&en.allocation.0) && c.is_feasible(&gr.allocation.0));
        prop_assert!(en.value <= opt.value + 1e-9);
        prop_assert!(en.value >= (1.0 - (-1.0f64).exp()) * opt.value - 1e-9);
    }

    #[test]
    fn online_runs_stay_within_budget(inst in small_instance(), seed in any::<u64>(), coin in 0.0f64..1.0) {
        let o = InfluenceOracle::auto(&inst, 1 << 14, 64, seed);
        let c = inst.constraints();
        let stream = online::gen_stream(inst.n(), seed);
        let run = online::allocate_with_coin(coin, &stream, &o, c, &OnlineConfig::default()).unwrap();
        prop_assert!(c.is_feasible(&run.allocation.0));
        if let Some(s) = run.secretary {
            prop_assert!(s.allocation.0.iter().filter(|&&x| x > 0).count() <= 1);
        }
    }

    #[test]
    fn profile_join_and_meet_bound_their_arguments(seed in any::<u64>(), players in 1usize..=3) {
        let params = RandomGameParams { players, ..Default::default() };
        let g = game::random_game(&params, seed).unwrap();
        let mut rng = seeds::rng(seed);
        let x = game::equilibrium::random_profile(&g, &mut rng);
        let y = game::equilibrium::random_profile(&g, &mut rng);
        let (j, m) = (x.profile_join(&y), x.profile_meet(&y));
        prop_assert!(x.le(&j) && y.le(&j) && m.le(&x) && m.le(&y));
        prop_assert_eq!(j.join(), Allocation(join(&x.join().0, &y.join().0)));
    }

    #[test]
    fn colored_counts_add_up_and_rivals_only_hurt(seed in any::<u64>(), players in 2usize..=3, bump in 1u32..=2) {
        let params = RandomGameParams { players, ..Default::default() };
        let g = game::random_game(&params, seed).unwrap();
        let mut rng = seeds::rng(seed ^ 1);
        let profile = game::equilibrium::random_profile(&g, &mut rng);
        let j = rng.random_range(0..players);
        let v = rng.random_range(0..g.n());
        let mut rows = profile.rows.iter().map(|r| r.0.clone()).collect::<Vec<_>>();
        rows[j][v] += bump;
        let raised = StrategyProfile::from_rows(rows);

        let draw = game::sim::draw_randomness(&g, seed, 0);
        let sigma = cascade::sample_scenario(g.base(), seed);
        let before = game::multiplayer_cascade(g.graph(), &sigma, &draw, &profile);
        let after = game::multiplayer_cascade(g.graph(), &sigma, &draw, &raised);
        let total: usize = before.counts.iter().map(|&c| c as usize).sum();
        prop_assert_eq!(total, cascade::cascade_value(g.graph(), &sigma, &profile.join().0) as usize);
        for i in (0..players).filter(|&i| i != j) {
            prop_assert!(after.counts[i] <= before.counts[i], "player {i} gained from a rival's raise");
        }
    }
}
