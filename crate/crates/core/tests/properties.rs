//! Property tests over randomly generated worlds.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use redcrawl::classifier::{build_training_set, model_from_weights, FitConfig};
use redcrawl::harness::{simulate, RunParams};
use redcrawl::oracle::{lie_probability, Oracle};
use redcrawl::strategy::pick;
use redcrawl::{load_graph, remove_red_red_edges, save_graph, Color, LyingScenario, NodeId, ObserverState, StrategyKind, WorldGraph};

fn world_strategy() -> impl Strategy<Value = WorldGraph> {
    (2usize..40)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(0.5f64..5.0, n),
                prop::collection::vec((0..n as u32, 0..n as u32), 0..4 * n),
            )
        })
        .prop_map(|(red, hierarchy, edges)| {
            let n = red.len();
            let mut colors: Vec<Color> = red.into_iter().map(|r| if r { Color::Red } else { Color::Blue }).collect();
            colors[0] = Color::Red;
            let labels = (0..n).map(|i| format!("v{i}")).collect();
            let edges = edges.into_iter().map(|(a, b)| (NodeId(a), NodeId(b)));
            WorldGraph::from_edges("prop", colors, hierarchy, labels, edges).expect("valid world").0
        })
}

fn scenario_strategy() -> impl Strategy<Value = LyingScenario> {
    prop_oneof![Just(LyingScenario::Ls1), Just(LyingScenario::Ls2)]
}

fn strategy_kind() -> impl Strategy<Value = StrategyKind> {
    prop::sample::select(StrategyKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn save_then_load_is_identity(world in world_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let (e, n) = (dir.path().join("w.edges"), dir.path().join("w.nodes.csv"));
        save_graph(&world, &e, &n).unwrap();
        let (back, warnings) = load_graph(&e, &n).unwrap();
        prop_assert_eq!(warnings.total(), 0);
        prop_assert_eq!(back.colors(), world.colors());
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), world.edges().collect::<Vec<_>>());
        for v in world.nodes() {
            prop_assert!((back.hierarchy(v) - world.hierarchy(v)).abs() < 1e-9);
        }
    }

    #[test]
    fn removing_red_red_edges_is_idempotent(world in world_strategy()) {
        let once = remove_red_red_edges(&world);
        prop_assert_eq!(once.red_red_edge_count(), 0);
        let twice = remove_red_red_edges(&once);
        prop_assert_eq!(once.edges().collect::<Vec<_>>(), twice.edges().collect::<Vec<_>>());
        let blue_touching = world.edges().filter(|&(a, b)| !(world.color(a).is_red() && world.color(b).is_red())).count();
        prop_assert_eq!(once.edge_count(), blue_touching);
    }

    #[test]
    fn lie_probability_is_a_probability(
        world in world_strategy(),
        honesty in prop::collection::vec(0.0f64..=1.0, 40),
        scenario in scenario_strategy(),
    ) {
        let mut world = world;
        for v in world.nodes().collect::<Vec<_>>() {
            world.set_honesty(v, honesty[v.index()]);
        }
        for (a, b) in world.edges() {
            for (s, u) in [(a, b), (b, a)] {
                let p = lie_probability(s, u, &world, scenario).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                if scenario == LyingScenario::Ls2 && world.color(s) == Color::Blue {
                    prop_assert_eq!(p, if world.color(u).is_red() { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn reports_are_consistent_and_repeatable(world in world_strategy(), scenario in scenario_strategy(), seed in any::<u64>()) {
        let mut oracle = Oracle::new(&world, scenario, seed);
        for v in world.nodes() {
            let r = oracle.place_monitor(v).unwrap();
            prop_assert_eq!(r.true_color, world.color(v));
            prop_assert_eq!(&r.neighbors[..], world.neighbors(v));
            prop_assert_eq!(r.statements.len(), r.neighbors.len());
            prop_assert!(r.statements.iter().zip(&r.neighbors).all(|(s, &u)| s.speaker == v && s.subject == u));
            let again = oracle.place_monitor(v).unwrap();
            prop_assert_eq!(r, again);
        }
    }

    #[test]
    fn every_pick_is_a_legal_candidate(
        world in world_strategy(),
        kind in strategy_kind(),
        scenario in scenario_strategy(),
        seed in any::<u64>(),
        budget in 1usize..30,
    ) {
        let params = RunParams {
            run_id: 0,
            strategy: kind,
            scenario,
            start: NodeId(0),
            seed,
            budget,
            retrain_every: 1,
            fit: FitConfig::default(),
        };
        let outcome = simulate(&world, &params).unwrap();
        let trace = &outcome.trace;
        prop_assert_eq!(trace.steps[0].node, NodeId(0));
        prop_assert!(trace.steps.len() <= budget);
        prop_assert!(trace.exhausted || trace.steps.len() == budget);

        // Replay: each later target was observed and unmonitored at the time.
        let mut state = ObserverState::new(world.node_count());
        let mut reds = 0;
        for (k, (step, report)) in trace.steps.iter().zip(&outcome.reports).enumerate() {
            prop_assert_eq!(step.step, k);
            prop_assert_eq!(step.node, report.target);
            if k > 0 {
                prop_assert!(state.is_candidate(step.node));
            }
            state.ingest(report).unwrap();
            reds += usize::from(world.color(step.node).is_red());
            prop_assert_eq!(step.cum_red, reds);
        }
        if trace.exhausted {
            prop_assert_eq!(state.candidate_count(), 0);
        }
    }

    #[test]
    fn observer_invariants_hold_along_a_run(
        world in world_strategy(),
        scenario in scenario_strategy(),
        seed in any::<u64>(),
    ) {
        let params = RunParams {
            run_id: 0,
            strategy: StrategyKind::SmartRandom,
            scenario,
            start: NodeId(0),
            seed,
            budget: 25,
            retrain_every: 1,
            fit: FitConfig::default(),
        };
        let outcome = simulate(&world, &params).unwrap();
        let mut state = ObserverState::new(world.node_count());
        for report in &outcome.reports {
            state.ingest(report).unwrap();
            let verified = state.verified_counts().total() as usize;
            let about_monitored: usize = state
                .monitored_nodes()
                .iter()
                .map(|&m| state.statements_about(m).len())
                .sum();
            prop_assert_eq!(verified, about_monitored);
            for &m in state.monitored_nodes() {
                prop_assert!(state.is_observed(m));
            }
            for v in state.candidates() {
                let f = state.features(v).unwrap();
                prop_assert!(f.as_slice().iter().all(|x| x.is_finite() && *x >= 0.0));
                prop_assert_eq!(f.red_score(), f.red_say_red() + f.blue_say_red());
                prop_assert_eq!(f.red_neighbors(), f.red_say_red() + f.red_say_blue());
                prop_assert_eq!(f.blue_neighbors(), f.blue_say_red() + f.blue_say_blue());
                let k = f.red_neighbors();
                prop_assert!(f.red_triangles() <= k * (k - 1.0) / 2.0 + 1e-9);
                prop_assert!((0.0..=1.0).contains(&f.inferred_red()));
            }
            let training = build_training_set(&state).unwrap();
            prop_assert_eq!(training.rows.len(), state.monitored_count());
        }
    }

    #[test]
    fn ties_are_broken_only_among_the_best(world in world_strategy(), seed in any::<u64>(), weights in prop::array::uniform9(-2.0f64..2.0)) {
        let mut oracle = Oracle::new(&world, LyingScenario::Ls1, seed);
        let mut state = ObserverState::new(world.node_count());
        state.ingest(&oracle.place_monitor(NodeId(0)).unwrap()).unwrap();
        let model = model_from_weights(weights, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for kind in StrategyKind::ALL {
            match pick(kind, &state, Some(&model), &mut rng) {
                Ok(d) => {
                    prop_assert!(state.is_candidate(d.chosen));
                    let best = d.scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert_eq!(d.scores[&d.chosen], best);
                    prop_assert_eq!(d.scores.len(), state.candidate_count());
                }
                Err(_) => prop_assert_eq!(state.candidate_count(), 0),
            }
        }
    }
}

#[test]
fn feature_recount_agrees_on_a_mixed_world() {
    let world = redcrawl::synthetic::generate_synthetic(80, 0.2, redcrawl::synthetic::SyntheticMode::Homophily, 3).unwrap();
    let start = world.red_nodes().next().unwrap();
    let params = RunParams {
        run_id: 0,
        strategy: StrategyKind::MostRedNeighbors,
        scenario: LyingScenario::Ls1,
        start,
        seed: 12,
        budget: 40,
        retrain_every: 1,
        fit: FitConfig::default(),
    };
    let outcome = simulate(&world, &params).unwrap();
    let state = ObserverState::replay(world.node_count(), &outcome.reports).unwrap();
    let view = common::LogView::new(&outcome.reports);
    for v in state.candidates() {
        assert!(common::close(state.features(v).unwrap().as_slice(), &view.features(v), 1e-12));
    }
}
