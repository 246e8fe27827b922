//! Seeded generators for test instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::aa::AsyncAutomaton;
use crate::control::{LocalAcceptance, Plant};
use crate::dfa::Dfa;
use crate::model::{Architecture, DistributedAlphabet, LetterSpec, ProcessTree};
use crate::parity::{Owner, ParityGame};

/// A random tree-like architecture with `1..=max_procs` processes and at most
/// `max_letters` letters (at least one per tree edge, so possibly more when
/// `max_letters` is too small).
pub fn random_tca<R: Rng + ?Sized>(rng: &mut R, max_procs: usize, max_letters: usize) -> Architecture {
    let n = rng.gen_range(1..=max_procs.max(1));
    let parent: Vec<Option<usize>> = (0..n).map(|i| (i > 0).then(|| rng.gen_range(0..i))).collect();
    let tree = ProcessTree::from_parents(0, parent.clone()).expect("parents precede children");
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (parent[i].unwrap(), i)).collect();
    let k = rng.gen_range(edges.len().max(1)..=max_letters.max(edges.len()).max(1));
    let mut domains: Vec<Vec<usize>> = vec![];
    for i in 0..k {
        let mut dom = if i < edges.len() {
            vec![edges[i].0, edges[i].1]
        } else {
            vec![rng.gen_range(0..n)]
        };
        // Grow along tree edges; the domain stays connected.
        while rng.gen_bool(0.3) {
            let frontier: Vec<usize> = edges
                .iter()
                .filter_map(|&(u, v)| match (dom.contains(&u), dom.contains(&v)) {
                    (true, false) => Some(v),
                    (false, true) => Some(u),
                    _ => None,
                })
                .collect();
            match frontier.choose(rng) {
                Some(&x) => dom.push(x),
                None => break,
            }
        }
        dom.sort_unstable();
        domains.push(dom);
    }
    let procs: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let specs = domains
        .iter()
        .enumerate()
        .map(|(i, d)| LetterSpec {
            id: format!("a{i}"),
            domain: d.iter().map(|&p| procs[p].clone()).collect(),
            controllable: false,
        })
        .collect();
    let al = DistributedAlphabet::new(procs, specs).expect("fresh names");
    Architecture::new(al, tree).expect("sizes match")
}

/// A random partial DFA with `1..=max_states` states, repaired until independent
/// letters commute. Missing squares are first completed, then, if that does not
/// settle, offending transitions are removed.
pub fn random_diamond_dfa<R: Rng + ?Sized>(rng: &mut R, alphabet: &DistributedAlphabet, max_states: usize) -> Dfa {
    let n = rng.gen_range(1..=max_states.max(1));
    let m = alphabet.num_letters();
    let mut delta: Vec<Vec<Option<usize>>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_bool(0.7).then(|| rng.gen_range(0..n))).collect())
        .collect();
    let accepting: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let build = |delta: &Vec<Vec<Option<usize>>>| {
        Dfa::new(alphabet.clone(), names.clone(), 0, accepting.clone(), delta.clone()).expect("well-formed table")
    };
    let mut repairs = 0;
    loop {
        let dfa = build(&delta);
        let Some(v) = dfa.diamond_violation() else { return dfa };
        let (s, a, b) = (v.state, v.a, v.b);
        let sa = delta[s][a];
        let sb = delta[s][b];
        let ab = sa.and_then(|x| delta[x][b]);
        let ba = sb.and_then(|y| delta[y][a]);
        repairs += 1;
        match (ab, ba, sa, sb) {
            (Some(x), None, _, Some(y)) if repairs < 100 => delta[y][a] = Some(x),
            (None, Some(x), Some(y), _) if repairs < 100 => delta[y][b] = Some(x),
            (Some(_), _, Some(y), _) => delta[y][b] = None,
            (_, Some(_), _, Some(y)) => delta[y][a] = None,
            _ => unreachable!("a violation has one defined side"),
        }
    }
}

/// Letters of one process, each either controllable or not.
fn local_letters(prefix: &str, proc: &str, count: usize, rng: &mut (impl Rng + ?Sized)) -> Vec<LetterSpec> {
    (0..count)
        .map(|i| LetterSpec::new(&format!("{prefix}{i}"), &[proc], rng.gen_bool(0.5)))
        .collect()
}

fn random_acceptance<R: Rng + ?Sized>(rng: &mut R, sizes: &[usize], max_priority: usize) -> LocalAcceptance {
    LocalAcceptance {
        finals: sizes.iter().map(|&n| (0..n).map(|_| rng.gen_bool(0.5)).collect()).collect(),
        priorities: sizes
            .iter()
            .map(|&n| (0..n).map(|_| vec![rng.gen_range(0..=max_priority)]).collect())
            .collect(),
    }
}

/// A single-process plant with `1..=max_states` states and up to four letters.
pub fn random_single_plant<R: Rng + ?Sized>(rng: &mut R, max_states: usize, max_priority: usize) -> Plant {
    let n = rng.gen_range(1..=max_states.max(1));
    let k = rng.gen_range(1..=4);
    let al = DistributedAlphabet::new(vec!["p".into()], local_letters("x", "p", k, rng)).expect("fresh names");
    let tree = ProcessTree::from_parents(0, vec![None]).expect("one node");
    let names = (0..n).map(|i| format!("s{i}")).collect();
    let mut aa = AsyncAutomaton::new(al, Some(tree), vec![names], vec![0]).expect("sizes match");
    for a in 0..k {
        for s in 0..n {
            if rng.gen_bool(0.6) {
                aa.add_transition(a, vec![s], vec![rng.gen_range(0..n)]).expect("fresh row");
            }
        }
    }
    let acc = random_acceptance(rng, &[n], max_priority);
    Plant::new(aa, acc).expect("sizes match")
}

/// Shape of the leaf's local transitions in [`random_two_plant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafShape {
    /// Local moves only go to higher-numbered states: the leaf is short.
    Acyclic,
    /// At least one local move closes a cycle.
    Cyclic,
}

/// Root `r` with leaf `l`, `2..=max_states` states each, local letters on both
/// sides and one or two uncontrollable joint letters.
pub fn random_two_plant<R: Rng + ?Sized>(rng: &mut R, max_states: usize, max_priority: usize, shape: LeafShape) -> Plant {
    let nr = rng.gen_range(1..=max_states.max(1));
    let nl = rng.gen_range(2..=max_states.max(2));
    let kr = rng.gen_range(1..=2);
    let kl = rng.gen_range(1..=2);
    let kj = rng.gen_range(1..=2);
    let mut specs = local_letters("x", "r", kr, rng);
    specs.extend(local_letters("y", "l", kl, rng));
    specs.extend((0..kj).map(|i| LetterSpec::new(&format!("j{i}"), &["r", "l"], false)));
    let al = DistributedAlphabet::new(vec!["r".into(), "l".into()], specs).expect("fresh names");
    let tree = ProcessTree::from_parents(0, vec![None, Some(0)]).expect("two nodes");
    let names = |c: &str, n: usize| (0..n).map(|i| format!("{c}{i}")).collect::<Vec<_>>();
    let mut aa = AsyncAutomaton::new(al, Some(tree), vec![names("r", nr), names("l", nl)], vec![0, 0]).expect("sizes");
    for a in 0..kr {
        for s in 0..nr {
            if rng.gen_bool(0.6) {
                aa.add_transition(a, vec![s], vec![rng.gen_range(0..nr)]).expect("fresh row");
            }
        }
    }
    for a in kr..kr + kl {
        for s in 0..nl {
            if rng.gen_bool(0.5) && (shape == LeafShape::Cyclic || s + 1 < nl) {
                let t = match shape {
                    LeafShape::Acyclic => rng.gen_range(s + 1..nl),
                    LeafShape::Cyclic => rng.gen_range(0..nl),
                };
                aa.add_transition(a, vec![s], vec![t]).expect("fresh row");
            }
        }
    }
    if shape == LeafShape::Cyclic {
        // Make sure some local move closes a cycle.
        let a = kr;
        let s = rng.gen_range(0..nl);
        let t = aa.local_step(s, a).unwrap_or(s);
        let back = kr + kl - 1;
        if aa.local_step(t, back).is_none() && t != s {
            aa.add_transition(back, vec![t], vec![s]).expect("fresh row");
        } else if aa.local_step(s, a).is_none() {
            aa.add_transition(a, vec![s], vec![s]).expect("fresh row");
        }
    }
    for a in kr + kl..kr + kl + kj {
        for sr in 0..nr {
            for sl in 0..nl {
                if rng.gen_bool(0.3) {
                    let to = vec![rng.gen_range(0..nr), rng.gen_range(0..nl)];
                    aa.add_transition(a, vec![sr, sl], to).expect("fresh row");
                }
            }
        }
    }
    let acc = random_acceptance(rng, &[nr, nl], max_priority);
    Plant::new(aa, acc).expect("sizes match")
}

/// A random game on `1..=max_positions` positions; some positions are terminal.
pub fn random_game<R: Rng + ?Sized>(rng: &mut R, max_positions: usize, max_priority: usize) -> ParityGame {
    let n = rng.gen_range(1..=max_positions.max(1));
    let mut g = ParityGame {
        names: (0..n).map(|i| format!("v{i}")).collect(),
        owner: vec![],
        priority: vec![],
        succ: vec![],
        terminal: vec![],
        initial: 0,
    };
    for _ in 0..n {
        g.owner.push(if rng.gen_bool(0.5) { Owner::System } else { Owner::Environment });
        g.priority.push(rng.gen_range(0..=max_priority));
        if rng.gen_bool(0.1) {
            g.succ.push(vec![]);
            g.terminal.push(Some(rng.gen_bool(0.5)));
        } else {
            let mut s: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)).collect();
            s.sort_unstable();
            s.dedup();
            g.succ.push(s);
            g.terminal.push(None);
        }
    }
    g
}

/// A random connected chordal graph on `1..=max_vertices` vertices, built by
/// adding each new vertex adjacent to a clique of the current graph.
pub fn random_chordal<R: Rng + ?Sized>(rng: &mut R, max_vertices: usize) -> crate::model::DependenceGraph {
    let n = rng.gen_range(1..=max_vertices.max(1));
    let mut adj: Vec<Vec<bool>> = vec![vec![false; n]; n];
    let mut edges = vec![];
    for v in 1..n {
        // Start from a random earlier vertex and extend to a clique.
        let mut clique = vec![rng.gen_range(0..v)];
        for u in 0..v {
            if !clique.contains(&u) && clique.iter().all(|&c| adj[c][u]) && rng.gen_bool(0.5) {
                clique.push(u);
            }
        }
        for &u in &clique {
            adj[u][v] = true;
            adj[v][u] = true;
            edges.push((u, v));
        }
    }
    crate::model::DependenceGraph::new((0..n).map(|i| format!("v{i}")).collect(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tcas_are_tree_like() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let arch = random_tca(&mut rng, 5, 6);
            assert!(arch.is_tree_like());
        }
    }

    #[test]
    fn dfas_are_diamond() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let arch = random_tca(&mut rng, 5, 6);
            assert!(random_diamond_dfa(&mut rng, &arch.alphabet, 6).is_diamond());
        }
    }

    #[test]
    fn chordal_graphs_are_chordal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_chordal(&mut rng, 7);
            assert!(g.is_connected());
            assert!(crate::chordal::is_chordal(&g).is_chordal());
        }
    }

    #[test]
    fn leaf_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let p = random_two_plant(&mut rng, 4, 2, LeafShape::Acyclic);
            assert!(matches!(crate::control::lshort::lshort_bound(&p, 1).unwrap(), crate::control::lshort::Shortness::Bound(_)));
            let p = random_two_plant(&mut rng, 3, 2, LeafShape::Cyclic);
            assert!(matches!(crate::control::lshort::lshort_bound(&p, 1).unwrap(), crate::control::lshort::Shortness::Cycle(_)));
        }
    }
}
