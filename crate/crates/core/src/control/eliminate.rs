//! Removing a short leaf by folding its local strategies into the parent.
//!
//! The parent `p` of leaf `l` becomes `p'`. Between two synchronisations of
//! `p` and `l`, `p'` first announces a local strategy for `l` (`ch(f)`), then
//! one controllable local action of its own (`ch(a)`, or `ch()` for none),
//! and after that the environment plays `p`'s and `l`'s local moves. Joint
//! actions with `l` reset the cycle.

use std::collections::{HashMap, VecDeque};

use super::lshort::ensure_leaf;
use super::strategy::{StrategyId, Strategies};
use super::{build_controller, Controller, LocalAcceptance, Plant, DEFAULT_CAP};
use crate::aa::AsyncAutomaton;
use crate::error::{Error, Result};
use crate::model::{DistributedAlphabet, Letter, LetterSpec, Proc, Word};

/// A local state of the merged process `p'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ElimState {
    /// Right after a synchronisation with the leaf.
    Pair { sp: usize, sl: usize },
    /// A leaf strategy was announced.
    Strat { sp: usize, sl: usize, f: StrategyId },
    /// The parent's own action was announced; `moved` records leaf moves.
    Chosen { sp: usize, a: Option<Letter>, sl: usize, f: StrategyId, moved: bool },
}

impl ElimState {
    pub fn sp(&self) -> usize {
        match *self {
            ElimState::Pair { sp, .. } | ElimState::Strat { sp, .. } | ElimState::Chosen { sp, .. } => sp,
        }
    }
    pub fn sl(&self) -> usize {
        match *self {
            ElimState::Pair { sl, .. } | ElimState::Strat { sl, .. } | ElimState::Chosen { sl, .. } => sl,
        }
    }
}

/// Announcement letters of `p'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Announce {
    Action(Letter),
    Idle,
    Strategy(StrategyId),
}

/// Everything needed to lift a controller of the reduced plant.
#[derive(Debug, Clone)]
pub struct RemoveLeafInfo {
    pub leaf: Proc,
    pub parent: Proc,
    /// Old process index to new index; `None` for the leaf.
    pub proc_map: Vec<Option<Proc>>,
    /// Old letter index to new letter index.
    pub letter_map: Vec<Letter>,
    /// States of `p'`, by new local index.
    pub states: Vec<ElimState>,
    pub strategies: Strategies,
}

/// One transition of `p'` found during exploration.
enum Row {
    Local(Announce, usize, usize),
    Old(Letter, usize, usize),
    /// Joint letter, old source and target tuples, `p'` source and target.
    Joint(Letter, Vec<usize>, Vec<usize>, usize, usize),
}

/// Removes the short leaf `leaf`; the result has one process fewer.
pub fn remove_leaf(plant: &Plant, leaf: Proc) -> Result<(Plant, RemoveLeafInfo)> {
    ensure_leaf(plant, leaf)?;
    let al = plant.alphabet();
    let tree = plant
        .tree()
        .ok_or_else(|| Error::input("tree", "plant has no process tree"))?;
    let p = tree
        .parent(leaf)
        .ok_or_else(|| Error::input("leaf", "cannot remove the root"))?;
    let mut strategies = Strategies::new(plant, leaf)?;
    let old = &plant.aa;
    let p_locals = al.local_letters(p);
    let l_locals = al.local_letters(leaf);
    let joints: Vec<Letter> = al
        .letters()
        .filter(|&a| al.in_domain(a, p) && al.domain(a).len() > 1)
        .collect();
    // Joint transitions of p, indexed by p's local state.
    let mut joint_rows: HashMap<(Letter, usize), Vec<(Vec<usize>, Vec<usize>)>> = HashMap::new();
    for (a, f, t) in old.sorted_transitions() {
        if let Some(k) = al.domain_position(a, p) {
            if al.domain(a).len() > 1 {
                joint_rows.entry((a, f[k])).or_default().push((f, t));
            }
        }
    }

    let mut ids: HashMap<ElimState, usize> = HashMap::new();
    let mut states: Vec<ElimState> = vec![];
    let mut queue = VecDeque::new();
    let mut rows: Vec<Row> = vec![];
    let mut intern = |st: ElimState, states: &mut Vec<ElimState>, queue: &mut VecDeque<usize>| -> Result<usize> {
        if let Some(&i) = ids.get(&st) {
            return Ok(i);
        }
        if states.len() >= DEFAULT_CAP {
            return Err(Error::Unsupported(format!("merged process exceeds {DEFAULT_CAP} states")));
        }
        let i = states.len();
        ids.insert(st.clone(), i);
        states.push(st);
        queue.push_back(i);
        Ok(i)
    };
    intern(ElimState::Pair { sp: old.initial[p], sl: old.initial[leaf] }, &mut states, &mut queue)?;
    while let Some(i) = queue.pop_front() {
        match states[i].clone() {
            ElimState::Pair { sp, sl } => {
                for f in strategies.enumerate(plant, sl) {
                    let j = intern(ElimState::Strat { sp, sl, f }, &mut states, &mut queue)?;
                    rows.push(Row::Local(Announce::Strategy(f), i, j));
                }
            }
            ElimState::Strat { sp, sl, f } => {
                let picks = p_locals
                    .iter()
                    .filter(|&&a| al.is_controllable(a) && old.local_step(sp, a).is_some())
                    .map(|&a| (Announce::Action(a), Some(a)));
                for (ann, a) in std::iter::once((Announce::Idle, None)).chain(picks) {
                    let st = ElimState::Chosen { sp, a, sl, f, moved: false };
                    let j = intern(st, &mut states, &mut queue)?;
                    rows.push(Row::Local(ann, i, j));
                }
            }
            ElimState::Chosen { sp, a, sl, f, .. } => {
                for &b in &p_locals {
                    if Some(b) != a && al.is_controllable(b) {
                        continue;
                    }
                    if let Some(t) = old.local_step(sp, b) {
                        let j = intern(ElimState::Strat { sp: t, sl, f }, &mut states, &mut queue)?;
                        rows.push(Row::Old(b, i, j));
                    }
                }
                for &b in &l_locals {
                    if let Some(g) = strategies.after(f, b) {
                        let t = old.local_step(sl, b).expect("allowed move is enabled");
                        let st = ElimState::Chosen { sp, a, sl: t, f: g, moved: true };
                        let j = intern(st, &mut states, &mut queue)?;
                        rows.push(Row::Old(b, i, j));
                    }
                }
                for &b in &joints {
                    let kp = al.domain_position(b, p).expect("joint contains p");
                    let kl = al.domain_position(b, leaf);
                    for (from, to) in joint_rows.get(&(b, sp)).into_iter().flatten() {
                        let target = match kl {
                            None => ElimState::Strat { sp: to[kp], sl, f },
                            Some(k) if from[k] == sl => ElimState::Pair { sp: to[kp], sl: to[k] },
                            Some(_) => continue,
                        };
                        let j = intern(target, &mut states, &mut queue)?;
                        rows.push(Row::Joint(b, from.clone(), to.clone(), i, j));
                    }
                }
            }
        }
    }

    // The new alphabet.
    let (new_tree, proc_map) = tree.without_leaf(leaf);
    let proc_names: Vec<String> = al.processes().filter(|&q| q != leaf).map(|q| al.process_name(q).to_string()).collect();
    let mut specs: Vec<LetterSpec> = vec![];
    for a in al.letters() {
        let folded = al.is_local_to(a, p) || al.is_local_to(a, leaf);
        let dom: Vec<String> = if folded {
            vec![al.process_name(p).to_string()]
        } else {
            al.domain(a).iter().filter(|&&q| q != leaf).map(|&q| al.process_name(q).to_string()).collect()
        };
        specs.push(LetterSpec {
            id: al.letter_name(a).to_string(),
            domain: dom,
            controllable: !folded && al.is_controllable(a),
        });
    }
    let letter_map: Vec<Letter> = al.letters().collect();
    let mut announce: Vec<Announce> = p_locals
        .iter()
        .filter(|&&a| al.is_controllable(a))
        .map(|&a| Announce::Action(a))
        .collect();
    announce.push(Announce::Idle);
    let mut used_strats: Vec<StrategyId> = rows
        .iter()
        .filter_map(|r| match r {
            Row::Local(Announce::Strategy(f), ..) => Some(*f),
            _ => None,
        })
        .collect();
    used_strats.sort_unstable();
    used_strats.dedup();
    announce.extend(used_strats.into_iter().map(Announce::Strategy));
    let mut announce_letter: HashMap<Announce, Letter> = HashMap::new();
    for ann in &announce {
        let name = match *ann {
            Announce::Action(a) => format!("ch({})", al.letter_name(a)),
            Announce::Idle => "ch()".to_string(),
            Announce::Strategy(f) => format!("ch({})", strategies.name(f)),
        };
        // Earlier removals into the same parent may have used the name.
        let name = if specs.iter().any(|s| s.id == name) {
            format!("{name}@{}", al.process_name(leaf))
        } else {
            name
        };
        announce_letter.insert(*ann, specs.len());
        specs.push(LetterSpec { id: name, domain: vec![al.process_name(p).to_string()], controllable: true });
    }
    let new_al = DistributedAlphabet::new(proc_names, specs)?;

    // The new automaton.
    let state_name = |st: &ElimState, strategies: &Strategies| -> String {
        let sp = &old.states[p][st.sp()];
        let sl = &old.states[leaf][st.sl()];
        match *st {
            ElimState::Pair { .. } => format!("({sp},{sl})"),
            ElimState::Strat { f, .. } => format!("({sp},{sl},{})", strategies.name(f)),
            ElimState::Chosen { a, f, moved, .. } => format!(
                "({sp},{sl},{},{}){}",
                strategies.name(f),
                a.map_or("", |a| al.letter_name(a)),
                if moved { "*" } else { "" }
            ),
        }
    };
    let mut new_states: Vec<Vec<String>> = vec![];
    let mut initial = vec![];
    for q in al.processes().filter(|&q| q != leaf) {
        if q == p {
            new_states.push(states.iter().map(|st| state_name(st, &strategies)).collect());
            initial.push(0);
        } else {
            new_states.push(old.states[q].clone());
            initial.push(old.initial[q]);
        }
    }
    let mut aa = AsyncAutomaton::new(new_al, Some(new_tree), new_states, initial)?;
    for (a, f, t) in old.sorted_transitions() {
        if !al.in_domain(a, p) && !al.in_domain(a, leaf) {
            aa.add_transition(letter_map[a], f, t)?;
        }
    }
    let drop_leaf = |a: Letter, tuple: &[usize], pid: usize| -> Vec<usize> {
        al.domain(a)
            .iter()
            .zip(tuple)
            .filter(|&(&q, _)| q != leaf)
            .map(|(&q, &s)| if q == p { pid } else { s })
            .collect()
    };
    for row in &rows {
        match row {
            Row::Local(ann, i, j) => aa.add_transition(announce_letter[ann], vec![*i], vec![*j])?,
            Row::Old(b, i, j) => aa.add_transition(letter_map[*b], vec![*i], vec![*j])?,
            Row::Joint(b, from, to, i, j) => {
                aa.add_transition(letter_map[*b], drop_leaf(*b, from, *i), drop_leaf(*b, to, *j))?
            }
        }
    }

    // Acceptance.
    let l_conds = plant.num_conditions(leaf);
    let mut finals = vec![];
    let mut priorities = vec![];
    for q in al.processes().filter(|&q| q != leaf) {
        if q != p {
            finals.push(plant.acc.finals[q].clone());
            priorities.push(plant.acc.priorities[q].clone());
            continue;
        }
        let mut fs = vec![];
        let mut ps = vec![];
        for st in &states {
            let (sp, sl) = (st.sp(), st.sl());
            let mut tuple = plant.priority(p, sp).to_vec();
            let settled = match *st {
                ElimState::Pair { .. } => None,
                ElimState::Strat { f, .. } | ElimState::Chosen { f, .. } => {
                    Some(strategies.eventually_final(plant, sl, f))
                }
            };
            let leaf_active = matches!(st, ElimState::Pair { .. } | ElimState::Chosen { moved: true, .. });
            for k in 0..l_conds {
                tuple.push(if leaf_active {
                    plant.priority(leaf, sl)[k] + 2
                } else {
                    usize::from(settled != Some(true))
                });
            }
            fs.push(matches!(st, ElimState::Chosen { .. }) && plant.is_final(p, sp) && settled == Some(true));
            ps.push(tuple);
        }
        finals.push(fs);
        priorities.push(ps);
    }
    let reduced = Plant::new(aa, LocalAcceptance { finals, priorities })?;
    Ok((
        reduced,
        RemoveLeafInfo { leaf, parent: p, proc_map, letter_map, states, strategies },
    ))
}

/// Lifted controller labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Label {
    /// A state of the given controller for a process other than `p` and `l`.
    Keep(usize),
    /// The parent's state, always of the `Chosen` kind.
    P(usize),
    /// The leaf: the parent's state at the last synchronisation and the leaf's
    /// local moves since.
    L(usize, Word),
}

/// Turns a controller of the reduced plant into one of `plant`.
pub fn reconstruct_controller(plant: &Plant, info: &RemoveLeafInfo, reduced: &Plant, c: &Controller) -> Result<Controller> {
    let al = plant.alphabet();
    let ral = reduced.alphabet();
    let (p, leaf) = (info.parent, info.leaf);
    let np = info.proc_map[p].expect("parent survives");
    let new_of = |q: Proc| info.proc_map[q].expect("not the leaf");
    let elim = |x: usize| &info.states[c.projection[np][x]];
    let ctrl_letters: Vec<Letter> = ral.local_letters(np).into_iter().filter(|&a| ral.is_controllable(a)).collect();

    // Follows announcements until the parent has chosen its action.
    let ts = |mut x: usize| -> Result<usize> {
        for _ in 0..3 {
            if matches!(elim(x), ElimState::Chosen { .. }) {
                return Ok(x);
            }
            let next = ctrl_letters.iter().find_map(|&a| c.aa.delta[a].get(&vec![x]).map(|t| t[0]));
            match next {
                Some(y) => x = y,
                None => {
                    return Err(Error::Integrity(format!(
                        "controller state `{}` of `{}` announces nothing",
                        c.aa.states[np][x],
                        ral.process_name(np)
                    )))
                }
            }
        }
        Err(Error::Integrity("announcement chain too long".into()))
    };
    let run_local = |x: usize, w: &[Letter]| -> Option<usize> {
        w.iter()
            .try_fold(x, |x, &b| c.aa.delta[info.letter_map[b]].get(&vec![x]).map(|t| t[0]))
    };

    let init: Vec<Label> = al
        .processes()
        .map(|q| {
            if q == p {
                ts(c.aa.initial[np]).map(Label::P)
            } else if q == leaf {
                ts(c.aa.initial[np]).map(|x| Label::L(x, vec![]))
            } else {
                Ok(Label::Keep(c.aa.initial[new_of(q)]))
            }
        })
        .collect::<Result<_>>()?;

    let step = |a: Letter, tuple: &[Label]| -> Result<Option<Vec<Label>>> {
        let dom = al.domain(a);
        let na = info.letter_map[a];
        if al.is_local_to(a, leaf) {
            let Label::L(x, w) = &tuple[0] else { unreachable!() };
            let mut w2 = w.clone();
            w2.push(a);
            return Ok(run_local(*x, &w2).map(|_| vec![Label::L(*x, w2)]));
        }
        // Source tuple of the reduced letter, and the leaf's pending word.
        let mut pending: Option<(usize, Word)> = None;
        let mut src = vec![];
        for (q, l) in dom.iter().zip(tuple) {
            match l {
                Label::Keep(x) | Label::P(x) if *q != leaf => src.push(*x),
                Label::L(x, w) => pending = Some((*x, w.clone())),
                _ => unreachable!(),
            }
        }
        // The leaf's moves are replayed on the parent's current state.
        if let Some((_, w)) = &pending {
            let kp = dom.iter().filter(|&&q| q != leaf).position(|&q| q == p).expect("joint contains p");
            src[kp] = run_local(src[kp], w).ok_or_else(|| {
                Error::Integrity(format!("leaf word {:?} not allowed by the reduced controller", al.word_names(w)))
            })?;
        }
        let Some(dst) = c.aa.delta[na].get(&src) else { return Ok(None) };
        let mut out = vec![];
        let mut it = dst.iter();
        for &q in dom {
            if q == leaf {
                continue;
            }
            let y = *it.next().expect("arity");
            out.push(if q == p { Label::P(ts(y)?) } else { Label::Keep(y) });
        }
        if pending.is_some() {
            let kl = dom.iter().position(|&q| q == leaf).expect("leaf in domain");
            let Label::P(y) = out[dom.iter().filter(|&&q| q != leaf).position(|&q| q == p).unwrap()] else {
                unreachable!()
            };
            out.insert(kl, Label::L(y, vec![]));
        }
        Ok(Some(out))
    };
    let project = |q: Proc, l: &Label| -> usize {
        match l {
            Label::Keep(x) => c.projection[new_of(q)][*x],
            Label::P(x) => elim(*x).sp(),
            Label::L(x, w) => w
                .iter()
                .try_fold(elim(*x).sl(), |s, &b| plant.aa.local_step(s, b))
                .expect("allowed leaf word runs in the plant"),
        }
    };
    let name = |q: Proc, l: &Label| -> String {
        match l {
            Label::Keep(x) => c.aa.states[new_of(q)][*x].clone(),
            Label::P(x) => c.aa.states[np][*x].clone(),
            Label::L(x, w) => format!("{}/{}", c.aa.states[np][*x], al.word_names(w).join(".")),
        }
    };
    build_controller(plant, init, step, project, name, DEFAULT_CAP)
}
