mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treelike::control::lshort::make_lshort;
use treelike::control::solve::solve_control;
use treelike::control::{check_controller, verify_winning};
use treelike::random::{random_single_plant, random_two_plant, LeafShape};

#[test]
fn single_process_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..40 {
        let plant = random_single_plant(&mut rng, 5, 3);
        let out = solve_control(&plant).unwrap();
        let brute = common::brute_force_controller(&plant);
        assert_eq!(out.controller.is_some(), brute.is_some(), "instance {i}");
    }
}

#[test]
fn two_process_verdicts_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..20 {
        let plant = random_two_plant(&mut rng, 3, 2, LeafShape::Acyclic);
        match solve_control(&plant).unwrap().controller {
            Some(c) => {
                assert_eq!(check_controller(&plant, &c).unwrap(), None, "instance {i}");
                assert!(verify_winning(&plant, &c).unwrap().is_winning(), "instance {i}");
            }
            None => assert!(common::brute_force_controller(&plant).is_none(), "instance {i}"),
        }
    }
}

#[test]
fn lshort_keeps_single_process_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..20 {
        let plant = random_single_plant(&mut rng, 3, 2);
        let (short, _) = make_lshort(&plant, 0).unwrap();
        let before = common::brute_force_controller(&plant).is_some();
        let after = common::brute_force_controller(&short).is_some();
        assert_eq!(before, after, "instance {i}");
    }
}
