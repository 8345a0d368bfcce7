use proptest::prelude::*;
use raps::gen::{gen_erdos_renyi, gen_erdos_renyi_multiparent, gen_named, place_parent, FamilyKind, GraphFamilySpec};
use raps::scm::build_scm;
use raps::search::{
    event_holds, multiparent_search, raps_oracle, raps_permutation, raps_statistical, DetectorConfig, SearchMode,
};
use raps::theory::candidate_family;
use raps::{rng, Dag, ParentSpec};

fn all_ordered_dags(n: usize) -> impl Iterator<Item = Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        let edges = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e);
        Dag::new(n, edges).unwrap()
    })
}

fn placements(n: usize) -> Vec<ParentSpec> {
    std::iter::once(ParentSpec::none(n)).chain((0..n).map(|p| ParentSpec::single(n, p))).collect()
}

#[test]
fn oracle_finds_the_parent_on_every_small_graph() {
    for n in 1..=4 {
        for g in all_ordered_dags(n) {
            for p in placements(n) {
                for seed in 0..20 {
                    let trace = raps_oracle(&g, &p, &mut rng::from_seed(seed)).unwrap();
                    assert_eq!(trace.result, p, "{:?} {:?}", g.edges(), p.nodes());
                    assert!(trace.steps.windows(2).all(|w| w[1].candidates.len() < w[0].candidates.len()));
                }
            }
        }
    }
}

#[test]
fn visited_candidate_sets_lie_in_the_family() {
    for n in 1..=4 {
        for g in all_ordered_dags(n) {
            for p in placements(n) {
                let family = candidate_family(&g, &p).unwrap();
                let mut r = rng::from_seed(n as u64);
                for _ in 0..50 {
                    for step in raps_oracle(&g, &p, &mut r).unwrap().steps {
                        assert!(family.contains(&step.candidates));
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_finds_the_parent_on_random_graphs(n in 1usize..=64, p in 0.0f64..0.5, seed in any::<u64>()) {
        let g = gen_erdos_renyi(n, p, seed).unwrap();
        let parent = place_parent(&g, Default::default(), seed);
        let trace = raps_oracle(&g, &parent, &mut rng::from_seed(seed ^ 1)).unwrap();
        prop_assert!(trace.interventions() >= 1 && trace.interventions() <= n);
        prop_assert_eq!(trace.result, parent);
    }

    #[test]
    fn permutation_form_finds_the_parent(n in 1usize..=16, p in 0.0f64..0.6, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let g = gen_erdos_renyi(n, p, seed).unwrap();
        let parent = place_parent(&g, Default::default(), seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng::from_seed(seed ^ 2));
        let trace = raps_permutation(&g, &parent, &perm).unwrap();
        prop_assert_eq!(trace.result, parent);
    }

    #[test]
    fn multiparent_oracle_recovers_parents_in_reverse_topological_order(
        n in 4usize..=40, m in 1usize..=3, p in 0.0f64..0.3, seed in any::<u64>()
    ) {
        let (g, parents) = gen_erdos_renyi_multiparent(n, p, m, seed).unwrap();
        let out = multiparent_search(&g, &parents, SearchMode::Oracle, &mut rng::from_seed(seed)).unwrap();
        prop_assert_eq!(&out.parents, &parents);
        prop_assert!(out.is_reverse_topological(&g));
        prop_assert_eq!(out.traces.len(), m + 1);
    }
}

#[test]
fn multiparent_chain_is_found_bottom_up() {
    for seed in 0..100 {
        let (g, ps) = gen_named(&GraphFamilySpec {
            num_parents: 3,
            ..GraphFamilySpec::new(FamilyKind::MultiparentChain, 3)
        })
        .unwrap();
        let out = multiparent_search(&g, &ps, SearchMode::Oracle, &mut rng::from_seed(seed)).unwrap();
        assert_eq!(out.discovered, vec![2, 1, 0]);
    }
}

fn fig1() -> (Dag, ParentSpec) {
    (Dag::new(4, [(0, 1), (0, 2), (1, 2), (3, 2)]).unwrap(), ParentSpec::single(4, 1))
}

#[test]
fn statistical_search_declares_descendants_of_x3() {
    let (g, p) = fig1();
    let scm = build_scm(&g, &p, 2, 0.3, 0.3, 11).unwrap();
    let cfg = DetectorConfig::from_bound(4, 2, 0.3, 0.3, 0.1).unwrap();
    let (mut seen, mut right) = (0, 0);
    for seed in 0..100 {
        let (trace, _) = raps_statistical(&scm, &cfg, &mut rng::from_seed(seed)).unwrap();
        for step in trace.steps.iter().filter(|s| s.intervened == 3) {
            seen += 1;
            right += usize::from(step.discovered_descendants.to_vec() == vec![2, 3]);
        }
    }
    assert!(seen > 0);
    assert!(right as f64 >= 0.9 * seen as f64, "{right}/{seen}");
}

#[test]
fn statistical_ledger_matches_the_accounting_identity() {
    let (g, p) = fig1();
    let scm = build_scm(&g, &p, 2, 0.3, 0.3, 11).unwrap();
    for batch in [1, 7, 500] {
        let cfg = DetectorConfig::new(0.3, 0.3, 0.1, batch, 2).unwrap();
        for seed in 0..10 {
            let (trace, ledger) = raps_statistical(&scm, &cfg, &mut rng::from_seed(seed)).unwrap();
            assert_eq!(ledger.total(), batch * (1 + 2 * trace.interventions() as u64));
            assert_eq!(trace.samples_used, Some(ledger.total()));
        }
    }
}

#[test]
fn statistical_search_on_a_line_usually_holds_the_event() {
    let (g, p) = gen_named(&GraphFamilySpec::new(FamilyKind::Line, 6)).unwrap();
    let scm = build_scm(&g, &p, 2, 0.3, 0.3, 2).unwrap();
    let cfg = DetectorConfig::from_bound(6, 2, 0.3, 0.3, 0.1).unwrap();
    let held = (0..40)
        .filter(|&s| {
            let (trace, _) = raps_statistical(&scm, &cfg, &mut rng::from_seed(s)).unwrap();
            event_holds(&scm, &trace) && trace.result == p
        })
        .count();
    assert!(held >= 36, "{held}/40");
}
