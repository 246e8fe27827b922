//! Small fixed instances used by tests, the CLI and the documentation.

use crate::aa::AsyncAutomaton;
use crate::control::{build_controller, Controller, LocalAcceptance, Plant, DEFAULT_CAP};
use crate::dfa::Dfa;
use crate::model::{Architecture, DistributedAlphabet, LetterSpec, ProcessTree};

fn five_process(a2: &[&str]) -> Architecture {
    let al = DistributedAlphabet::from_domains(
        &["p1", "p2", "p3", "p4", "p5"],
        &[("a1", &["p1", "p2", "p3"]), ("a2", a2), ("a3", &["p3", "p5"])],
    )
    .expect("static alphabet");
    let tree = ProcessTree::from_parents(0, vec![None, Some(0), Some(0), Some(2), Some(2)]).expect("static tree");
    Architecture::new(al, tree).expect("static architecture")
}

/// Five processes, three letters: `p1 → {p2, p3}`, `p3 → {p4, p5}`.
pub fn fig1() -> Architecture {
    five_process(&["p1", "p3", "p4"])
}

/// Same as [`fig1`] with `p3` dropped from the domain of `a2`.
pub fn fig1_perturbed() -> Architecture {
    five_process(&["p1", "p4"])
}

/// Counts letters modulo 3 over the [`fig1`] alphabet; `a2` is blocked in `q2`.
pub fn fig1_counter() -> Dfa {
    Dfa::from_triples(
        fig1().alphabet,
        &["q0", "q1", "q2"],
        "q0",
        &["q0"],
        &[
            ("q0", "a1", "q1"),
            ("q1", "a1", "q2"),
            ("q2", "a1", "q0"),
            ("q0", "a2", "q1"),
            ("q1", "a2", "q2"),
            ("q0", "a3", "q1"),
            ("q1", "a3", "q2"),
            ("q2", "a3", "q0"),
        ],
    )
    .expect("static dfa")
}

const SERVER: [&str; 4] = ["s0", "s1", "s2", "s3"];
const CLIENT: [&str; 5] = ["init", "A1", "A2", "prog", "end"];

/// A server broadcasting one of two tasks to `n` clients, collecting two
/// answers, then resetting everyone. Only the clients' progress actions are
/// controllable. The server must return to `s0` and every client must reach
/// `end` infinitely often; finite runs are rejected.
pub fn server_client(n: usize) -> Plant {
    let mut procs = vec!["s".to_string()];
    procs.extend((1..=n).map(|i| format!("c{i}")));
    let all: Vec<String> = procs.clone();
    let mut letters = vec![
        LetterSpec { id: "t1".into(), domain: all.clone(), controllable: false },
        LetterSpec { id: "t2".into(), domain: all.clone(), controllable: false },
        LetterSpec { id: "r".into(), domain: all.clone(), controllable: false },
    ];
    for i in 1..=n {
        letters.push(LetterSpec { id: format!("e_{i}"), domain: vec![format!("c{i}"), "s".into()], controllable: false });
    }
    for i in 1..=n {
        for k in 1..=2 {
            letters.push(LetterSpec { id: format!("p{k}_{i}"), domain: vec![format!("c{i}")], controllable: true });
        }
    }
    let al = DistributedAlphabet::new(procs, letters).expect("static alphabet");
    let tree = ProcessTree::from_parents(0, (0..=n).map(|i| if i == 0 { None } else { Some(0) }).collect()).expect("star");
    let mut states = vec![SERVER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    states.extend((0..n).map(|_| CLIENT.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
    let mut aa = AsyncAutomaton::new(al, Some(tree), states, vec![0; n + 1]).expect("static automaton");
    for (t, a) in [("t1", "A1"), ("t2", "A2")] {
        let mut from = vec!["s0"];
        let mut to = vec!["s1"];
        from.extend(std::iter::repeat_n("init", n));
        to.extend(std::iter::repeat_n(a, n));
        aa.add(t, &from, &to).expect("static transition");
    }
    // r resets every client from any post-task state.
    let post = ["A1", "A2", "prog", "end"];
    let mut combos: Vec<Vec<&str>> = vec![vec!["s3"]];
    for _ in 0..n {
        combos = combos
            .into_iter()
            .flat_map(|c| post.iter().map(move |&x| [c.clone(), vec![x]].concat()))
            .collect();
    }
    let mut reset = vec!["s0"];
    reset.extend(std::iter::repeat_n("init", n));
    for from in combos {
        aa.add("r", &from, &reset).expect("static transition");
    }
    for i in 1..=n {
        let e = format!("e_{i}");
        // Domain order is (s, c_i) since the server has the smaller index.
        aa.add(&e, &["s1", "prog"], &["s2", "end"]).expect("static transition");
        aa.add(&e, &["s2", "prog"], &["s3", "end"]).expect("static transition");
        aa.add(&format!("p1_{i}"), &["A1"], &["prog"]).expect("static transition");
        aa.add(&format!("p1_{i}"), &["A2"], &["A2"]).expect("static transition");
        aa.add(&format!("p2_{i}"), &["A1"], &["A1"]).expect("static transition");
        aa.add(&format!("p2_{i}"), &["A2"], &["prog"]).expect("static transition");
    }
    let mut finals = vec![vec![false; 4]];
    let mut priorities = vec![vec![vec![2], vec![1], vec![1], vec![1]]];
    for _ in 0..n {
        finals.push(vec![false; 5]);
        priorities.push(vec![vec![1], vec![1], vec![1], vec![1], vec![2]]);
    }
    Plant::new(aa, LocalAcceptance { finals, priorities }).expect("static plant")
}

/// Whether the local letter named `name` is the progress action matching `state`.
fn correct_progress(name: &str, state: usize) -> bool {
    (name.starts_with("p1_") && CLIENT[state] == "A1") || (name.starts_with("p2_") && CLIENT[state] == "A2")
}

/// Each client counts requested tasks modulo `n`; after the `k`-th request only
/// clients `k-1` and `k` (modulo `n`, from zero) enable their progress action.
pub fn round_robin_controller(plant: &Plant, n: usize) -> Controller {
    let al = plant.alphabet().clone();
    build_controller(
        plant,
        vec![(0usize, 0usize); n + 1],
        |a, tuple: &[(usize, usize)]| {
            let dom = al.domain(a);
            let from: Vec<usize> = tuple.iter().map(|l| l.0).collect();
            let Some(to) = plant.aa.delta[a].get(&from) else {
                return Ok(None);
            };
            let name = al.letter_name(a);
            if al.is_controllable(a) {
                let client = dom[0] - 1;
                let k = tuple[0].1;
                let chosen = client == (k + n - 1) % n || client == k % n;
                if !(chosen && correct_progress(name, tuple[0].0)) {
                    return Ok(None);
                }
            }
            let bump = name == "t1" || name == "t2";
            Ok(Some(
                dom.iter()
                    .zip(to)
                    .zip(tuple)
                    .map(|((&p, &s), l)| (s, if bump && p > 0 { (l.1 + 1) % n } else { l.1 }))
                    .collect(),
            ))
        },
        |_, l| l.0,
        |p, l| {
            if p == 0 {
                SERVER[l.0].to_string()
            } else {
                format!("{}#{}", CLIENT[l.0], l.1)
            }
        },
        DEFAULT_CAP,
    )
    .expect("round-robin controller")
}

/// Every client enables its matching progress action.
pub fn naive_controller(plant: &Plant) -> Controller {
    let al = plant.alphabet().clone();
    let mut c = Controller::identity(plant);
    for a in al.letters().filter(|&a| al.is_controllable(a)) {
        let name = al.letter_name(a).to_string();
        c.aa.delta[a].retain(|from, _| correct_progress(&name, from[0]));
    }
    c
}
