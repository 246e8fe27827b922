//! Plants with local acceptance, covering controllers, and winningness.

pub mod eliminate;
pub mod lshort;
pub mod solve;
pub mod strategy;

use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;

use crate::aa::{AsyncAutomaton, Global, Simulate};
use crate::error::{Error, Result};
use crate::model::{DistributedAlphabet, Letter, Proc, ProcessTree, Word};

/// Default bound on explored global states.
pub const DEFAULT_CAP: usize = 2_000_000;

/// Per-process finals and priorities; a state may carry several priorities,
/// read as a conjunction of max-parity conditions (even wins).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalAcceptance {
    pub finals: Vec<Vec<bool>>,
    pub priorities: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plant {
    pub aa: AsyncAutomaton,
    pub acc: LocalAcceptance,
}

impl Plant {
    pub fn new(aa: AsyncAutomaton, acc: LocalAcceptance) -> Result<Self> {
        for p in aa.alphabet.processes() {
            let name = aa.alphabet.process_name(p);
            let n = aa.num_states(p);
            if acc.finals.get(p).map(Vec::len) != Some(n) || acc.priorities.get(p).map(Vec::len) != Some(n) {
                return Err(Error::input(format!("acceptance.perProcess.{name}"), "one entry per state required"));
            }
            let k = acc.priorities[p].first().map_or(0, Vec::len);
            if acc.priorities[p].iter().any(|t| t.len() != k) {
                return Err(Error::input(format!("acceptance.perProcess.{name}"), "priority tuples must have equal width"));
            }
        }
        Ok(Plant { aa, acc })
    }

    pub fn alphabet(&self) -> &DistributedAlphabet {
        &self.aa.alphabet
    }
    pub fn tree(&self) -> Option<&ProcessTree> {
        self.aa.tree.as_ref()
    }
    pub fn is_final(&self, p: Proc, s: usize) -> bool {
        self.acc.finals[p][s]
    }
    pub fn priority(&self, p: Proc, s: usize) -> &[usize] {
        &self.acc.priorities[p][s]
    }
    pub fn num_conditions(&self, p: Proc) -> usize {
        self.acc.priorities[p].first().map_or(0, Vec::len)
    }
    pub fn max_priority(&self, p: Proc, cond: usize) -> usize {
        self.acc.priorities[p].iter().map(|t| t[cond]).max().unwrap_or(0)
    }

    /// Keeps only local states occurring in some reachable global state.
    /// Returns the pruned plant and, per process, the kept old indices.
    pub fn prune(&self, cap: usize) -> Result<(Plant, Vec<Vec<usize>>)> {
        let used = self.aa.reachable_locals(cap)?;
        let kept: Vec<Vec<usize>> = used
            .iter()
            .map(|u| (0..u.len()).filter(|&s| u[s]).collect())
            .collect();
        let mut new_index: Vec<Vec<Option<usize>>> = used.iter().map(|u| vec![None; u.len()]).collect();
        for (p, ks) in kept.iter().enumerate() {
            for (i, &s) in ks.iter().enumerate() {
                new_index[p][s] = Some(i);
            }
        }
        let states = kept
            .iter()
            .enumerate()
            .map(|(p, ks)| ks.iter().map(|&s| self.aa.states[p][s].clone()).collect())
            .collect();
        let initial = (0..kept.len()).map(|p| new_index[p][self.aa.initial[p]].expect("initial is reachable")).collect();
        let mut aa = AsyncAutomaton::new(self.aa.alphabet.clone(), self.aa.tree.clone(), states, initial)?;
        for (a, f, t) in self.aa.sorted_transitions() {
            let dom = self.aa.alphabet.domain(a);
            let map = |tuple: &[usize]| -> Option<Vec<usize>> {
                dom.iter().zip(tuple).map(|(&p, &s)| new_index[p][s]).collect()
            };
            if let (Some(f2), Some(t2)) = (map(&f), map(&t)) {
                aa.add_transition(a, f2, t2)?;
            }
        }
        let pick = |p: usize| -> (Vec<bool>, Vec<Vec<usize>>) {
            (
                kept[p].iter().map(|&s| self.acc.finals[p][s]).collect(),
                kept[p].iter().map(|&s| self.acc.priorities[p][s].clone()).collect(),
            )
        };
        let (finals, priorities) = (0..kept.len()).map(pick).unzip();
        Ok((Plant::new(aa, LocalAcceptance { finals, priorities })?, kept))
    }

    /// Tree-like architecture of the plant, checked.
    pub fn architecture(&self) -> Result<crate::model::Architecture> {
        let tree = self.tree().cloned().ok_or_else(|| Error::input("tree", "plant has no process tree"))?;
        let arch = crate::model::Architecture::new(self.alphabet().clone(), tree)?;
        arch.ensure_tree_like()?;
        Ok(arch)
    }
}

/// A covering controller: an automaton plus a projection onto plant states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Controller {
    pub aa: AsyncAutomaton,
    pub projection: Vec<Vec<usize>>,
}

impl Controller {
    pub fn project(&self, g: &[usize]) -> Global {
        g.iter().enumerate().map(|(p, &c)| self.projection[p][c]).collect()
    }

    /// The plant itself, seen as a controller that restricts nothing.
    pub fn identity(plant: &Plant) -> Controller {
        Controller {
            aa: plant.aa.clone(),
            projection: plant.aa.states.iter().map(|s| (0..s.len()).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverViolation {
    /// A controller move whose projection is not a plant move.
    Transition { letter: Letter, from: Vec<usize> },
    /// An uncontrollable letter enabled in the plant but blocked by the controller.
    Uncontrollable { letter: Letter, global: Global },
    /// Initial states do not project to the plant's initial states.
    Initial { process: Proc },
}

/// Checks the three covering conditions; the second on reachable states.
pub fn check_controller(plant: &Plant, c: &Controller) -> Result<Option<CoverViolation>> {
    let al = plant.alphabet();
    if al != &c.aa.alphabet {
        return Err(Error::input("controller", "alphabet differs from the plant"));
    }
    for p in al.processes() {
        if c.projection[p].len() != c.aa.num_states(p) || c.projection[p].iter().any(|&s| s >= plant.aa.num_states(p)) {
            return Err(Error::input("projection", format!("bad projection for `{}`", al.process_name(p))));
        }
        if c.projection[p][c.aa.initial[p]] != plant.aa.initial[p] {
            return Ok(Some(CoverViolation::Initial { process: p }));
        }
    }
    for (a, from, to) in c.aa.sorted_transitions() {
        let dom = al.domain(a);
        let pf: Vec<usize> = dom.iter().zip(&from).map(|(&p, &x)| c.projection[p][x]).collect();
        let pt: Vec<usize> = dom.iter().zip(&to).map(|(&p, &x)| c.projection[p][x]).collect();
        if plant.aa.delta[a].get(&pf) != Some(&pt) {
            return Ok(Some(CoverViolation::Transition { letter: a, from }));
        }
    }
    for g in c.aa.reachable_globals(DEFAULT_CAP)? {
        let pg = c.project(&g);
        for a in al.letters() {
            if !al.is_controllable(a) && plant.aa.enabled(&pg, a) && !c.aa.enabled(&g, a) {
                return Ok(Some(CoverViolation::Uncontrollable { letter: a, global: g }));
            }
        }
    }
    Ok(None)
}

/// A losing maximal run: `stem·cycle^ω`, or the finite `stem` when `cycle` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub stem: Word,
    pub cycle: Word,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Winning,
    Losing(Counterexample),
}

impl Verdict {
    pub fn is_winning(&self) -> bool {
        matches!(self, Verdict::Winning)
    }
}

struct Graph {
    states: Vec<Global>,
    succ: Vec<Vec<(Letter, usize)>>,
    pred: Vec<Option<(usize, Letter)>>,
}

fn explore_graph(c: &Controller, cap: usize) -> Result<Graph> {
    let init = c.aa.initial.clone();
    let mut index: HashMap<Global, usize> = HashMap::from([(init.clone(), 0)]);
    let mut states = vec![init];
    let mut succ = vec![];
    let mut pred = vec![None];
    let mut i = 0;
    while i < states.len() {
        let g = states[i].clone();
        let mut out = vec![];
        for a in c.aa.alphabet.letters() {
            if let Some(h) = c.aa.step(&g, a) {
                let j = match index.get(&h) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= cap {
                            return Err(Error::Unsupported(format!("more than {cap} reachable controller states")));
                        }
                        index.insert(h.clone(), states.len());
                        states.push(h);
                        pred.push(Some((i, a)));
                        states.len() - 1
                    }
                };
                out.push((a, j));
            }
        }
        succ.push(out);
        i += 1;
    }
    Ok(Graph { states, succ, pred })
}

impl Graph {
    fn stem(&self, mut v: usize) -> Word {
        let mut w = vec![];
        while let Some((u, a)) = self.pred[v] {
            w.push(a);
            v = u;
        }
        w.reverse();
        w
    }
}

/// Strongly connected components (Tarjan, iterative) of the subgraph on
/// `nodes` using only edges accepted by `edge_ok`; returns node lists.
fn sccs(g: &Graph, nodes: &[bool], edge_ok: &dyn Fn(Letter) -> bool) -> Vec<Vec<usize>> {
    let n = g.states.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = vec![];
    let mut out = vec![];
    let mut counter = 0;
    for root in 0..n {
        if !nodes[root] || index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut k)) = call.last_mut() {
            if *k < g.succ[v].len() {
                let (a, w) = g.succ[v][*k];
                *k += 1;
                if !edge_ok(a) || !nodes[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = vec![];
                    loop {
                        let x = stack.pop().expect("tarjan stack");
                        on_stack[x] = false;
                        comp.push(x);
                        if x == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out.sort();
    out
}

/// Shortest path inside `inside` from `from` to `to` using allowed letters.
fn path_within(g: &Graph, inside: &[bool], edge_ok: &dyn Fn(Letter) -> bool, from: usize, to: usize) -> Option<Word> {
    let mut pred: HashMap<usize, (usize, Letter)> = HashMap::new();
    let mut seen = HashSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut w = vec![];
            let mut v = u;
            while v != from {
                let (x, a) = pred[&v];
                w.push(a);
                v = x;
            }
            w.reverse();
            return Some(w);
        }
        for &(a, v) in &g.succ[u] {
            if edge_ok(a) && inside[v] && seen.insert(v) {
                pred.insert(v, (u, a));
                queue.push_back(v);
            }
        }
    }
    None
}

/// Decides whether every maximal run of `c` is accepting for `plant`.
///
/// Finite maximal runs end in dead global states. An infinite run with active
/// processes `A` is maximal iff no letter living on the frozen processes is
/// enabled where they stopped; such runs eventually stay in a strongly
/// connected part of the graph restricted to `A`-letters whose letters cover `A`.
pub fn verify_winning(plant: &Plant, c: &Controller) -> Result<Verdict> {
    verify_winning_capped(plant, c, DEFAULT_CAP)
}

pub fn verify_winning_capped(plant: &Plant, c: &Controller, cap: usize) -> Result<Verdict> {
    let al = plant.alphabet();
    let np = al.num_processes();
    let g = explore_graph(c, cap)?;
    let proj: Vec<Global> = g.states.iter().map(|s| c.project(s)).collect();

    for (v, pg) in proj.iter().enumerate() {
        if g.succ[v].is_empty() {
            if let Some(p) = (0..np).find(|&p| !plant.is_final(p, pg[p])) {
                return Ok(Verdict::Losing(Counterexample {
                    stem: g.stem(v),
                    cycle: vec![],
                    reason: format!("run stops with `{}` outside its final states", al.process_name(p)),
                }));
            }
        }
    }

    for mask in 1u64..(1u64 << np) {
        let active = |p: Proc| mask >> p & 1 == 1;
        let inside_a = |a: Letter| al.domain(a).iter().all(|&p| active(p));
        let frozen_letter = |a: Letter| al.domain(a).iter().all(|&p| !active(p));
        let nodes: Vec<bool> = (0..g.states.len())
            .map(|v| !g.succ[v].iter().any(|&(a, _)| frozen_letter(a)))
            .collect();
        for comp in sccs(&g, &nodes, &inside_a) {
            if let Some(ce) = bad_cycle(plant, &g, &proj, &comp, mask, &inside_a) {
                return Ok(Verdict::Losing(ce));
            }
        }
    }
    Ok(Verdict::Winning)
}

/// Looks inside one component for a covering cycle that rejects.
fn bad_cycle(
    plant: &Plant,
    g: &Graph,
    proj: &[Global],
    comp: &[usize],
    mask: u64,
    inside_a: &dyn Fn(Letter) -> bool,
) -> Option<Counterexample> {
    let al = plant.alphabet();
    let np = al.num_processes();
    let active = |p: Proc| mask >> p & 1 == 1;
    let mut member = vec![false; g.states.len()];
    for &v in comp {
        member[v] = true;
    }
    let first = comp[0];
    if let Some(p) = (0..np).find(|&p| !active(p) && !plant.is_final(p, proj[first][p])) {
        let cycle = covering_walk(g, &member, inside_a, first, mask, None, al)?;
        return Some(Counterexample {
            stem: g.stem(first),
            cycle,
            reason: format!("`{}` stops outside its final states", al.process_name(p)),
        });
    }
    for p in (0..np).filter(|&p| active(p)) {
        for cond in 0..plant.num_conditions(p) {
            let top = comp.iter().map(|&v| plant.priority(p, proj[v][p])[cond]).max()?;
            for d in (1..=top).rev().filter(|d| d % 2 == 1) {
                let low: Vec<bool> = (0..g.states.len())
                    .map(|v| member[v] && plant.priority(p, proj[v][p])[cond] <= d)
                    .collect();
                for sub in sccs(g, &low, inside_a) {
                    let Some(&hit) = sub.iter().find(|&&v| plant.priority(p, proj[v][p])[cond] == d) else {
                        continue;
                    };
                    let mut in_sub = vec![false; g.states.len()];
                    for &v in &sub {
                        in_sub[v] = true;
                    }
                    if let Some(cycle) = covering_walk(g, &in_sub, inside_a, sub[0], mask, Some(hit), al) {
                        return Some(Counterexample {
                            stem: g.stem(sub[0]),
                            cycle,
                            reason: format!(
                                "`{}` sees odd priority {d} as its maximum infinitely often",
                                al.process_name(p)
                            ),
                        });
                    }
                }
            }
        }
    }
    None
}

/// Closed walk from `start` inside `inside` that moves every active process
/// (and passes `via` if given); `None` if the part cannot cover them.
fn covering_walk(
    g: &Graph,
    inside: &[bool],
    edge_ok: &dyn Fn(Letter) -> bool,
    start: usize,
    mask: u64,
    via: Option<usize>,
    al: &DistributedAlphabet,
) -> Option<Word> {
    let mut edges = vec![];
    let mut covered = 0u64;
    for (u, outs) in g.succ.iter().enumerate() {
        if !inside[u] {
            continue;
        }
        for &(a, v) in outs {
            if !inside[v] || !edge_ok(a) {
                continue;
            }
            let bits = al.domain(a).iter().fold(0u64, |m, &p| m | 1 << p);
            if bits & !covered != 0 {
                covered |= bits;
                edges.push((u, a, v));
            }
        }
    }
    if covered != mask {
        return None;
    }
    let mut walk = vec![];
    let mut at = start;
    if let Some(h) = via {
        walk.extend(path_within(g, inside, edge_ok, at, h)?);
        at = h;
    }
    for (u, a, v) in edges {
        walk.extend(path_within(g, inside, edge_ok, at, u)?);
        walk.push(a);
        at = v;
    }
    walk.extend(path_within(g, inside, edge_ok, at, start)?);
    Some(walk)
}

/// Builds a controller by exploring labels from `init`.
///
/// `step(a, tuple)` gives the successor labels of the participants of `a`
/// (ordered like its domain) or `None` to disable; `project` and `name` map a
/// label of process `p` to a plant state and a display name.
pub fn build_controller<L, S, P, N>(
    plant: &Plant,
    init: Vec<L>,
    step: S,
    project: P,
    name: N,
    cap: usize,
) -> Result<Controller>
where
    L: Clone + Eq + Hash,
    S: Fn(Letter, &[L]) -> Result<Option<Vec<L>>>,
    P: Fn(Proc, &L) -> usize,
    N: Fn(Proc, &L) -> String,
{
    let al = plant.alphabet();
    let np = al.num_processes();
    let mut ids: Vec<HashMap<L, usize>> = vec![HashMap::new(); np];
    let mut labels: Vec<Vec<L>> = vec![vec![]; np];
    let intern = |p: usize, l: &L, ids: &mut Vec<HashMap<L, usize>>, labels: &mut Vec<Vec<L>>| -> usize {
        if let Some(&i) = ids[p].get(l) {
            return i;
        }
        let i = labels[p].len();
        ids[p].insert(l.clone(), i);
        labels[p].push(l.clone());
        i
    };
    let init_ids: Vec<usize> = (0..np).map(|p| intern(p, &init[p], &mut ids, &mut labels)).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([init_ids.clone()]);
    let mut queue = VecDeque::from([init_ids.clone()]);
    let mut rows: HashMap<(Letter, Vec<usize>), Vec<usize>> = HashMap::new();
    while let Some(gid) = queue.pop_front() {
        for a in al.letters() {
            let dom = al.domain(a);
            let key_from: Vec<usize> = dom.iter().map(|&p| gid[p]).collect();
            let to_ids = if let Some(t) = rows.get(&(a, key_from.clone())) {
                Some(t.clone())
            } else {
                let tuple: Vec<L> = dom.iter().map(|&p| labels[p][gid[p]].clone()).collect();
                match step(a, &tuple)? {
                    None => None,
                    Some(next) => {
                        let t: Vec<usize> = dom
                            .iter()
                            .zip(&next)
                            .map(|(&p, l)| intern(p, l, &mut ids, &mut labels))
                            .collect();
                        rows.insert((a, key_from), t.clone());
                        Some(t)
                    }
                }
            };
            if let Some(t) = to_ids {
                let mut h = gid.clone();
                for (k, &p) in dom.iter().enumerate() {
                    h[p] = t[k];
                }
                if seen.insert(h.clone()) {
                    if seen.len() > cap {
                        return Err(Error::Unsupported(format!("controller exceeds {cap} global states")));
                    }
                    queue.push_back(h);
                }
            }
        }
    }
    let states: Vec<Vec<String>> = (0..np).map(|p| labels[p].iter().map(|l| name(p, l)).collect()).collect();
    let projection = (0..np).map(|p| labels[p].iter().map(|l| project(p, l)).collect()).collect();
    let mut aa = AsyncAutomaton::new(al.clone(), plant.aa.tree.clone(), states, init_ids)?;
    let mut sorted: Vec<_> = rows.into_iter().collect();
    sorted.sort();
    for ((a, f), t) in sorted {
        aa.add_transition(a, f, t)?;
    }
    Ok(Controller { aa, projection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{naive_controller, round_robin_controller, server_client};

    #[test]
    fn identity_is_valid() {
        let plant = server_client(2);
        assert_eq!(check_controller(&plant, &Controller::identity(&plant)).unwrap(), None);
    }

    #[test]
    fn dropping_uncontrollable_is_caught() {
        let plant = server_client(2);
        let mut c = Controller::identity(&plant);
        let t1 = plant.alphabet().letter("t1").unwrap();
        c.aa.delta[t1].clear();
        assert!(matches!(
            check_controller(&plant, &c).unwrap(),
            Some(CoverViolation::Uncontrollable { .. })
        ));
    }

    #[test]
    fn server_client_verdicts() {
        let plant = server_client(3);
        let rr = round_robin_controller(&plant, 3);
        assert_eq!(check_controller(&plant, &rr).unwrap(), None);
        assert!(verify_winning(&plant, &rr).unwrap().is_winning());
        let naive = naive_controller(&plant);
        assert_eq!(check_controller(&plant, &naive).unwrap(), None);
        match verify_winning(&plant, &naive).unwrap() {
            Verdict::Losing(ce) => assert!(!ce.cycle.is_empty()),
            Verdict::Winning => panic!("naive controller must lose"),
        }
    }

    #[test]
    fn all_good_plant_wins() {
        let al = DistributedAlphabet::from_domains(&["p"], &[("a", &["p"])]).unwrap();
        let mut aa = AsyncAutomaton::new(al, Some(ProcessTree::from_parents(0, vec![None]).unwrap()), vec![vec!["x".into(), "y".into()]], vec![0]).unwrap();
        aa.add("a", &["x"], &["y"]).unwrap();
        aa.add("a", &["y"], &["x"]).unwrap();
        let acc = LocalAcceptance {
            finals: vec![vec![true, true]],
            priorities: vec![vec![vec![0], vec![2]]],
        };
        let plant = Plant::new(aa, acc).unwrap();
        assert!(verify_winning(&plant, &Controller::identity(&plant)).unwrap().is_winning());
    }

    #[test]
    fn finite_run_outside_finals_loses() {
        let al = DistributedAlphabet::from_domains(&["p"], &[("a", &["p"])]).unwrap();
        let mut aa = AsyncAutomaton::new(al, None, vec![vec!["x".into(), "y".into()]], vec![0]).unwrap();
        aa.add("a", &["x"], &["y"]).unwrap();
        let acc = LocalAcceptance {
            finals: vec![vec![true, false]],
            priorities: vec![vec![vec![0], vec![0]]],
        };
        let plant = Plant::new(aa, acc).unwrap();
        match verify_winning(&plant, &Controller::identity(&plant)).unwrap() {
            Verdict::Losing(ce) => assert_eq!((ce.stem, ce.cycle), (vec![0], vec![])),
            Verdict::Winning => panic!(),
        }
    }

    #[test]
    fn frozen_process_with_enabled_local_is_not_maximal() {
        // q could always move but never does: that run is not maximal, so the
        // rejecting state of q does not matter once q must move to its final.
        let al = DistributedAlphabet::from_domains(&["p", "q"], &[("a", &["p"]), ("b", &["q"])]).unwrap();
        let mut aa = AsyncAutomaton::new(al, None, vec![vec!["x".into()], vec!["u".into(), "v".into()]], vec![0, 0]).unwrap();
        aa.add("a", &["x"], &["x"]).unwrap();
        aa.add("b", &["u"], &["v"]).unwrap();
        let acc = LocalAcceptance {
            finals: vec![vec![true], vec![false, true]],
            priorities: vec![vec![vec![0]], vec![vec![0], vec![0]]],
        };
        let plant = Plant::new(aa, acc).unwrap();
        assert!(verify_winning(&plant, &Controller::identity(&plant)).unwrap().is_winning());
    }
}
