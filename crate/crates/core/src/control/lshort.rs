//! Bounded local behaviour of a leaf, and the transformation making it bounded.
//!
//! A leaf is short when its local transition graph has no cycle. Otherwise its
//! states are replaced by simple local paths started at the initial state or
//! after a communication; a local move that would repeat a state closes the
//! cycle and ends in a terminal state, accepting iff every condition sees an
//! even maximum on that cycle.

use std::collections::{HashMap, VecDeque};

use super::{build_controller, Controller, LocalAcceptance, Plant, DEFAULT_CAP};
use crate::aa::AsyncAutomaton;
use crate::error::{Error, Result};
use crate::model::{Letter, Proc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shortness {
    /// Longest run of local actions.
    Bound(usize),
    /// A local cycle, as a state sequence.
    Cycle(Vec<usize>),
}

pub(crate) fn ensure_leaf(plant: &Plant, leaf: Proc) -> Result<()> {
    if let Some(t) = plant.tree() {
        if !t.is_leaf(leaf) {
            return Err(Error::NotLeaf(plant.alphabet().process_name(leaf).to_string()));
        }
    } else if plant.alphabet().num_processes() != 1 {
        return Err(Error::input("tree", "plant has no process tree"));
    }
    Ok(())
}

/// Local successor lists of a process.
fn local_graph(plant: &Plant, p: Proc) -> Vec<Vec<(Letter, usize)>> {
    let al = plant.alphabet();
    let locals = al.local_letters(p);
    (0..plant.aa.num_states(p))
        .map(|s| locals.iter().filter_map(|&a| plant.aa.local_step(s, a).map(|t| (a, t))).collect())
        .collect()
}

/// Longest local path, or a local cycle.
pub fn lshort_bound(plant: &Plant, leaf: Proc) -> Result<Shortness> {
    ensure_leaf(plant, leaf)?;
    let g = local_graph(plant, leaf);
    let n = g.len();
    // 0 unvisited, 1 on stack, 2 done.
    let mut color = vec![0u8; n];
    let mut longest = vec![0usize; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = 1;
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k < g[v].len() {
                let w = g[v][*k].1;
                *k += 1;
                match color[w] {
                    0 => {
                        color[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => {
                        let from = stack.iter().position(|&(x, _)| x == w).expect("on stack");
                        return Ok(Shortness::Cycle(stack[from..].iter().map(|&(x, _)| x).collect()));
                    }
                    _ => {}
                }
            } else {
                longest[v] = g[v].iter().map(|&(_, w)| longest[w] + 1).max().unwrap_or(0);
                color[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(Shortness::Bound(longest.into_iter().max().unwrap_or(0)))
}

/// A state of the leaf after the transformation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathState {
    /// A simple local path; the leaf is in its last state.
    Path(Vec<usize>),
    /// A local cycle was closed at `target`; no further moves.
    Closed { target: usize, accept: bool },
}

/// Lifting data for one transformation.
#[derive(Debug, Clone)]
pub struct LshortInfo {
    pub leaf: Proc,
    pub states: Vec<PathState>,
}

/// Replaces the leaf's states by simple local paths.
pub fn make_lshort(plant: &Plant, leaf: Proc) -> Result<(Plant, LshortInfo)> {
    ensure_leaf(plant, leaf)?;
    let al = plant.alphabet();
    let old = &plant.aa;
    let locals = al.local_letters(leaf);
    let conds = plant.num_conditions(leaf);

    let mut ids: HashMap<PathState, usize> = HashMap::new();
    let mut states: Vec<PathState> = vec![];
    let mut queue = VecDeque::new();
    let mut intern = |st: PathState, states: &mut Vec<PathState>, queue: &mut VecDeque<usize>| -> usize {
        *ids.entry(st.clone()).or_insert_with(|| {
            states.push(st);
            queue.push_back(states.len() - 1);
            states.len() - 1
        })
    };
    let init = intern(PathState::Path(vec![old.initial[leaf]]), &mut states, &mut queue);
    // Anchors: every leaf target of a communication.
    let mut anchors: Vec<usize> = vec![];
    for a in al.letters().filter(|&a| al.in_domain(a, leaf) && al.domain(a).len() > 1) {
        let k = al.domain_position(a, leaf).expect("in domain");
        anchors.extend(old.delta[a].values().map(|t| t[k]));
    }
    anchors.sort_unstable();
    anchors.dedup();
    for &s in &anchors {
        intern(PathState::Path(vec![s]), &mut states, &mut queue);
    }
    let mut local_rows: Vec<(Letter, usize, usize)> = vec![];
    while let Some(i) = queue.pop_front() {
        let PathState::Path(path) = states[i].clone() else { continue };
        let last = *path.last().expect("nonempty path");
        for &a in &locals {
            let Some(t) = old.local_step(last, a) else { continue };
            let next = match path.iter().position(|&x| x == t) {
                None => PathState::Path([path.clone(), vec![t]].concat()),
                Some(k) => {
                    let accept = (0..conds).all(|c| {
                        path[k..].iter().map(|&x| plant.priority(leaf, x)[c]).max().unwrap_or(0) % 2 == 0
                    });
                    PathState::Closed { target: t, accept }
                }
            };
            let j = intern(next, &mut states, &mut queue);
            local_rows.push((a, i, j));
        }
    }

    let names: Vec<String> = states
        .iter()
        .map(|st| match st {
            PathState::Path(p) => p.iter().map(|&x| old.states[leaf][x].as_str()).collect::<Vec<_>>().join(">"),
            PathState::Closed { target, accept } => {
                format!("{}!{}", old.states[leaf][*target], if *accept { "even" } else { "odd" })
            }
        })
        .collect();
    let mut all_states = old.states.clone();
    all_states[leaf] = names;
    let mut initial = old.initial.clone();
    initial[leaf] = init;
    let mut aa = AsyncAutomaton::new(al.clone(), old.tree.clone(), all_states, initial)?;
    for (a, i, j) in local_rows {
        aa.add_transition(a, vec![i], vec![j])?;
    }
    let anchor_id = |s: usize| ids[&PathState::Path(vec![s])];
    for a in al.letters() {
        if al.is_local_to(a, leaf) {
            continue;
        }
        let Some(k) = al.domain_position(a, leaf) else {
            for (f, t) in &old.delta[a] {
                aa.add_transition(a, f.clone(), t.clone())?;
            }
            continue;
        };
        for (i, st) in states.iter().enumerate() {
            let PathState::Path(path) = st else { continue };
            let last = *path.last().expect("nonempty path");
            for (f, t) in old.delta[a].iter().filter(|(f, _)| f[k] == last) {
                let mut f2 = f.clone();
                let mut t2 = t.clone();
                f2[k] = i;
                t2[k] = anchor_id(t[k]);
                aa.add_transition(a, f2, t2)?;
            }
        }
    }
    let mut acc = plant.acc.clone();
    acc.finals[leaf] = states
        .iter()
        .map(|st| match st {
            PathState::Path(p) => plant.is_final(leaf, *p.last().expect("nonempty")),
            PathState::Closed { accept, .. } => *accept,
        })
        .collect();
    acc.priorities[leaf] = states
        .iter()
        .map(|st| match st {
            PathState::Path(p) => plant.priority(leaf, *p.last().expect("nonempty")).to_vec(),
            PathState::Closed { .. } => vec![0; conds],
        })
        .collect();
    let out = Plant::new(aa, LocalAcceptance { finals: acc.finals, priorities: acc.priorities })?;
    Ok((out, LshortInfo { leaf, states }))
}

/// Lifts a controller of the transformed plant back: the leaf keeps a stack
/// of controller states along its current path and unwinds it when a cycle closes.
pub fn lift_lshort(plant: &Plant, info: &LshortInfo, c: &Controller) -> Result<Controller> {
    let al = plant.alphabet();
    let leaf = info.leaf;
    let path_of = |x: usize| -> Option<&Vec<usize>> {
        match &info.states[c.projection[leaf][x]] {
            PathState::Path(p) => Some(p),
            PathState::Closed { .. } => None,
        }
    };
    let init: Vec<Vec<usize>> = c.aa.initial.iter().map(|&x| vec![x]).collect();
    build_controller(
        plant,
        init,
        |a, tuple: &[Vec<usize>]| {
            let from: Vec<usize> = tuple.iter().map(|st| *st.last().expect("nonempty stack")).collect();
            let Some(to) = c.aa.delta[a].get(&from) else { return Ok(None) };
            let mut out: Vec<Vec<usize>> = to.iter().map(|&x| vec![x]).collect();
            if al.is_local_to(a, leaf) {
                let stack = &tuple[0];
                let next = to[0];
                out[0] = match &info.states[c.projection[leaf][next]] {
                    PathState::Path(_) => [stack.clone(), vec![next]].concat(),
                    PathState::Closed { target, .. } => {
                        let k = stack
                            .iter()
                            .position(|&x| path_of(x).is_some_and(|p| p.last() == Some(target)))
                            .ok_or_else(|| Error::Integrity("cycle target not on the stack".into()))?;
                        stack[..=k].to_vec()
                    }
                };
            }
            Ok(Some(out))
        },
        |p, st| {
            let x = *st.last().expect("nonempty stack");
            if p == leaf {
                *path_of(x).and_then(|p| p.last()).expect("stack tops are paths")
            } else {
                c.projection[p][x]
            }
        },
        |p, st| st.iter().map(|&x| c.aa.states[p][x].as_str()).collect::<Vec<_>>().join("|"),
        DEFAULT_CAP,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{verify_winning, Controller};
    use crate::model::{DistributedAlphabet, LetterSpec, ProcessTree};

    /// One process; `loop` is a local self-loop at `x` with priority `pr`.
    fn single_loop(pr: usize, controllable: bool, exit: bool) -> Plant {
        let mut letters = vec![LetterSpec::new("loop", &["p"], controllable)];
        if exit {
            letters.push(LetterSpec::new("exit", &["p"], true));
        }
        let al = DistributedAlphabet::new(vec!["p".into()], letters).unwrap();
        let tree = ProcessTree::from_parents(0, vec![None]).unwrap();
        let mut aa = AsyncAutomaton::new(al, Some(tree), vec![vec!["x".into(), "y".into()]], vec![0]).unwrap();
        aa.add("loop", &["x"], &["x"]).unwrap();
        if exit {
            aa.add("exit", &["x"], &["y"]).unwrap();
        }
        let acc = LocalAcceptance { finals: vec![vec![false, true]], priorities: vec![vec![vec![pr], vec![0]]] };
        Plant::new(aa, acc).unwrap()
    }

    #[test]
    fn bounds() {
        let plant = crate::examples::server_client(2);
        let c1 = plant.alphabet().process("c1").unwrap();
        assert!(matches!(lshort_bound(&plant, c1).unwrap(), Shortness::Cycle(_)));
        assert!(matches!(lshort_bound(&plant, 0), Err(Error::NotLeaf(_))));
        let chain = single_loop(0, false, true);
        let (short, _) = make_lshort(&chain, 0).unwrap();
        assert!(matches!(lshort_bound(&short, 0).unwrap(), Shortness::Bound(b) if b <= 2));
    }

    #[test]
    fn no_local_actions_bound_zero() {
        let al = DistributedAlphabet::from_domains(&["p", "q"], &[("a", &["p", "q"])]).unwrap();
        let tree = ProcessTree::from_parents(0, vec![None, Some(0)]).unwrap();
        let aa = AsyncAutomaton::new(al, Some(tree), vec![vec!["x".into()], vec!["u".into()]], vec![0, 0]).unwrap();
        let acc = LocalAcceptance { finals: vec![vec![true], vec![true]], priorities: vec![vec![vec![0]], vec![vec![0]]] };
        let plant = Plant::new(aa, acc).unwrap();
        assert_eq!(lshort_bound(&plant, 1).unwrap(), Shortness::Bound(0));
    }

    #[test]
    fn even_loop_closes_accepting() {
        let plant = single_loop(2, false, false);
        assert!(verify_winning(&plant, &Controller::identity(&plant)).unwrap().is_winning());
        let (short, info) = make_lshort(&plant, 0).unwrap();
        assert!(info.states.contains(&PathState::Closed { target: 0, accept: true }));
        assert!(verify_winning(&short, &Controller::identity(&short)).unwrap().is_winning());
    }

    #[test]
    fn odd_forced_loop_stays_losing() {
        let plant = single_loop(1, false, false);
        assert!(!verify_winning(&plant, &Controller::identity(&plant)).unwrap().is_winning());
        let (short, _) = make_lshort(&plant, 0).unwrap();
        assert!(!verify_winning(&short, &Controller::identity(&short)).unwrap().is_winning());
    }

    #[test]
    fn lift_identity_of_short_plant() {
        let plant = single_loop(2, false, false);
        let (short, info) = make_lshort(&plant, 0).unwrap();
        let lifted = lift_lshort(&plant, &info, &Controller::identity(&short)).unwrap();
        assert_eq!(crate::control::check_controller(&plant, &lifted).unwrap(), None);
        assert!(verify_winning(&plant, &lifted).unwrap().is_winning());
    }
}
