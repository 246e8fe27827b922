//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use treelike::control::{verify_winning, Controller, Plant};
use treelike::model::{DistributedAlphabet, Letter};

/// Every positional controller that enables at most one controllable letter
/// per local state, as a restriction of the plant.
pub fn positional_controllers(plant: &Plant) -> Vec<Controller> {
    let al = plant.alphabet();
    let mut slots: Vec<(usize, usize, Vec<Option<Letter>>)> = vec![];
    for p in al.processes() {
        for s in 0..plant.aa.num_states(p) {
            let mut opts = vec![None];
            for a in al.local_letters(p) {
                if al.is_controllable(a) && plant.aa.local_step(s, a).is_some() {
                    opts.push(Some(a));
                }
            }
            slots.push((p, s, opts));
        }
    }
    let mut out = vec![];
    let mut idx = vec![0usize; slots.len()];
    loop {
        let mut pick: HashMap<(usize, usize), Option<Letter>> = HashMap::new();
        for (k, (p, s, opts)) in slots.iter().enumerate() {
            pick.insert((*p, *s), opts[idx[k]]);
        }
        let mut c = Controller::identity(plant);
        for a in al.letters().filter(|&a| al.is_controllable(a)) {
            let p = al.domain(a)[0];
            c.aa.delta[a].retain(|from, _| pick[&(p, from[0])] == Some(a));
        }
        out.push(c);
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == slots.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < slots[k].2.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Some winning positional controller, by exhaustive search.
pub fn brute_force_controller(plant: &Plant) -> Option<Controller> {
    positional_controllers(plant)
        .into_iter()
        .find(|c| verify_winning(plant, c).unwrap().is_winning())
}

/// All words over the alphabet of length at most `max_len`.
pub fn all_words(al: &DistributedAlphabet, max_len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        let mut next = vec![];
        for w in &layer {
            for a in al.letters() {
                let mut w2: Vec<Letter> = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Canonical form of a graph on `n` vertices: the least sorted edge list over
/// all vertex permutations.
pub fn canonical_graph(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    loop {
        let mut e: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
        if !next_permutation(&mut perm) {
            return best.unwrap_or_default();
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else { return false };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Chordality by brute force: no induced cycle of length at least four.
pub fn chordal_by_cycles(n: usize, edges: &[(usize, usize)]) -> bool {
    let adj: BTreeSet<(usize, usize)> = edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
    let has = |u: usize, v: usize| adj.contains(&(u, v));
    // Every vertex subset of size >= 4 that induces a cycle is a witness.
    for mask in 0u32..(1 << n) {
        let vs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if vs.len() < 4 {
            continue;
        }
        let degree_two = vs.iter().all(|&u| vs.iter().filter(|&&v| v != u && has(u, v)).count() == 2);
        if degree_two && induced_connected(&vs, &has) {
            return false;
        }
    }
    true
}

fn induced_connected(vs: &[usize], has: &dyn Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![vs[0]];
    let mut stack = vec![vs[0]];
    while let Some(u) = stack.pop() {
        for &v in vs {
            if !seen.contains(&v) && has(u, v) {
                seen.push(v);
                stack.push(v);
            }
        }
    }
    seen.len() == vs.len()
}
