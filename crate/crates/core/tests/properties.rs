mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treelike::aa::Simulate;
use treelike::chordal::{is_chordal, tca_from_dependence};
use treelike::distribute::distribute;
use treelike::parity::game::{brute_force_winners, check_solution, solve_parity_game};
use treelike::random::{random_chordal, random_diamond_dfa, random_game, random_tca};
use treelike::views::view;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn word(raw: &[usize], letters: usize) -> Vec<usize> {
    raw.iter().map(|&x| x % letters).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn independence_is_symmetric_and_irreflexive(seed in any::<u64>()) {
        let arch = random_tca(&mut rng(seed), 5, 6);
        let al = &arch.alphabet;
        for a in al.letters() {
            prop_assert!(!al.independent(a, a));
            for b in al.letters() {
                prop_assert_eq!(al.independent(a, b), al.independent(b, a));
                let disjoint = al.domain(a).iter().all(|p| !al.in_domain(b, *p));
                prop_assert_eq!(al.independent(a, b), disjoint);
            }
        }
    }

    #[test]
    fn diamond_runs_agree_on_trace_classes(seed in any::<u64>(), raw in prop::collection::vec(0usize..64, 0..6)) {
        let mut r = rng(seed);
        let arch = random_tca(&mut r, 4, 5);
        let dfa = random_diamond_dfa(&mut r, &arch.alphabet, 5);
        let u = word(&raw, arch.alphabet.num_letters());
        let class = arch.alphabet.trace_closure(&u, u.len()).unwrap();
        prop_assert!(class.contains(&u));
        for v in &class {
            prop_assert_eq!(dfa.run(v).ok(), dfa.run(&u).ok());
        }
    }

    #[test]
    fn distributed_acceptance_matches(seed in any::<u64>(), raw in prop::collection::vec(0usize..64, 0..9)) {
        let mut r = rng(seed);
        let arch = random_tca(&mut r, 5, 6);
        let dfa = random_diamond_dfa(&mut r, &arch.alphabet, 6);
        let da = distribute(&dfa, &arch).unwrap();
        let w = word(&raw, arch.alphabet.num_letters());
        prop_assert_eq!(da.accepts(&w), dfa.accepts(&w));
    }

    #[test]
    fn distributed_globals_commute(seed in any::<u64>(), raw in prop::collection::vec(0usize..64, 0..6)) {
        let mut r = rng(seed);
        let arch = random_tca(&mut r, 4, 5);
        let al = &arch.alphabet;
        let dfa = random_diamond_dfa(&mut r, al, 5);
        let da = distribute(&dfa, &arch).unwrap();
        let w = word(&raw, al.num_letters());
        let mut g = Some(da.initial_global());
        for &a in &w {
            g = g.and_then(|g| da.step(&g, a));
        }
        if let Some(g) = g {
            for a in al.letters() {
                for b in al.letters().filter(|&b| al.independent(a, b)) {
                    let ab = da.step(&g, a).and_then(|h| da.step(&h, b));
                    let ba = da.step(&g, b).and_then(|h| da.step(&h, a));
                    prop_assert_eq!(ab, ba);
                }
            }
        }
    }

    #[test]
    fn views_are_subsequences(seed in any::<u64>(), raw in prop::collection::vec(0usize..64, 0..10), mask in any::<u8>()) {
        let arch = random_tca(&mut rng(seed), 5, 6);
        let al = &arch.alphabet;
        let w = word(&raw, al.num_letters());
        let x: Vec<usize> = al.processes().filter(|&p| mask >> p & 1 == 1).collect();
        let v = view(al, &x, &w);
        let mut it = w.iter();
        prop_assert!(v.iter().all(|a| it.any(|b| b == a)));
        let all: Vec<usize> = al.processes().collect();
        prop_assert_eq!(view(al, &all, &w), w.clone());
        // Letters touching the set are always seen.
        for &a in &w {
            if al.domain(a).iter().any(|p| x.contains(p)) {
                prop_assert!(v.contains(&a));
            }
        }
    }

    #[test]
    fn chordal_graphs_round_trip(seed in any::<u64>()) {
        let g = random_chordal(&mut rng(seed), 7);
        let edges: Vec<(usize, usize)> = g.edges.iter().copied().collect();
        prop_assert!(common::chordal_by_cycles(g.len(), &edges));
        prop_assert!(is_chordal(&g).is_chordal());
        if g.is_connected() {
            let arch = tca_from_dependence(&g).unwrap();
            prop_assert!(arch.is_tree_like());
            prop_assert_eq!(arch.alphabet.dependence_graph().named_edges(), g.named_edges());
        }
    }

    #[test]
    fn parity_solutions_are_sound(seed in any::<u64>()) {
        let game = random_game(&mut rng(seed), 7, 4);
        let sol = solve_parity_game(&game);
        prop_assert!(check_solution(&game, &sol));
        prop_assert_eq!(sol.winner.clone(), brute_force_winners(&game));
    }
}
