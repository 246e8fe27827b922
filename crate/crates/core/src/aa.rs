//! Explicit asynchronous automata: per-process states and joint transitions.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::model::{DistributedAlphabet, Letter, ProcessTree, Word};

/// One local state per process.
pub type Global = Vec<usize>;

/// Anything that can be stepped letter by letter over global states.
pub trait Simulate {
    fn alphabet(&self) -> &DistributedAlphabet;
    fn initial_global(&self) -> Global;
    fn step(&self, g: &[usize], a: Letter) -> Option<Global>;

    /// Global state after `w`, or the first undefined position.
    fn run(&self, w: &[Letter]) -> std::result::Result<Global, usize> {
        let mut g = self.initial_global();
        for (k, &a) in w.iter().enumerate() {
            g = self.step(&g, a).ok_or(k)?;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsyncAutomaton {
    pub alphabet: DistributedAlphabet,
    pub tree: Option<ProcessTree>,
    /// Local state names per process.
    pub states: Vec<Vec<String>>,
    pub initial: Vec<usize>,
    /// Per letter: participant tuple (ordered like the domain) to successor tuple.
    pub delta: Vec<HashMap<Vec<usize>, Vec<usize>>>,
}

impl AsyncAutomaton {
    pub fn new(
        alphabet: DistributedAlphabet,
        tree: Option<ProcessTree>,
        states: Vec<Vec<String>>,
        initial: Vec<usize>,
    ) -> Result<Self> {
        let n = alphabet.num_processes();
        if states.len() != n || initial.len() != n {
            return Err(Error::input("states", "one state list and initial state per process required"));
        }
        for (p, (ss, &i)) in states.iter().zip(&initial).enumerate() {
            if i >= ss.len() {
                return Err(Error::input(format!("initial.{}", alphabet.process_name(p)), "initial state out of range"));
            }
        }
        if let Some(t) = &tree {
            if t.len() != n {
                return Err(Error::input("tree", "tree nodes must equal the processes"));
            }
        }
        let delta = vec![HashMap::new(); alphabet.num_letters()];
        Ok(AsyncAutomaton {
            alphabet,
            tree,
            states,
            initial,
            delta,
        })
    }

    pub fn num_states(&self, p: usize) -> usize {
        self.states[p].len()
    }

    pub fn state_index(&self, p: usize, name: &str) -> Result<usize> {
        self.states[p]
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownState(format!("{}.{name}", self.alphabet.process_name(p))))
    }

    /// Adds `δ_a(from) = to`; tuples are ordered like `domain(a)`.
    pub fn add_transition(&mut self, a: Letter, from: Vec<usize>, to: Vec<usize>) -> Result<()> {
        let dom = self.alphabet.domain(a);
        if from.len() != dom.len() || to.len() != dom.len() {
            return Err(Error::input(
                format!("transitions.{}", self.alphabet.letter_name(a)),
                "tuple width must equal the domain size",
            ));
        }
        for (k, &p) in dom.iter().enumerate() {
            if from[k] >= self.states[p].len() || to[k] >= self.states[p].len() {
                return Err(Error::input(format!("transitions.{}", self.alphabet.letter_name(a)), "state out of range"));
            }
        }
        if let Some(old) = self.delta[a].get(&from) {
            if *old != to {
                return Err(Error::input(
                    format!("transitions.{}", self.alphabet.letter_name(a)),
                    "two successors for one source tuple",
                ));
            }
        }
        self.delta[a].insert(from, to);
        Ok(())
    }

    /// Name-based variant of [`AsyncAutomaton::add_transition`].
    pub fn add(&mut self, letter: &str, from: &[&str], to: &[&str]) -> Result<()> {
        let a = self.alphabet.letter(letter)?;
        let dom = self.alphabet.domain(a).to_vec();
        if from.len() != dom.len() || to.len() != dom.len() {
            return Err(Error::input(format!("transitions.{letter}"), "tuple width must equal the domain size"));
        }
        let f = dom.iter().zip(from).map(|(&p, s)| self.state_index(p, s)).collect::<Result<Vec<_>>>()?;
        let t = dom.iter().zip(to).map(|(&p, s)| self.state_index(p, s)).collect::<Result<Vec<_>>>()?;
        self.add_transition(a, f, t)
    }

    /// The domain coordinates of `g` for letter `a`.
    pub fn project(&self, g: &[usize], a: Letter) -> Vec<usize> {
        self.alphabet.domain(a).iter().map(|&p| g[p]).collect()
    }

    pub fn enabled(&self, g: &[usize], a: Letter) -> bool {
        self.delta[a].contains_key(&self.project(g, a))
    }

    pub fn enabled_letters(&self, g: &[usize]) -> Vec<Letter> {
        self.alphabet.letters().filter(|&a| self.enabled(g, a)).collect()
    }

    /// Successor of local state `s` on a letter local to `p`.
    pub fn local_step(&self, s: usize, a: Letter) -> Option<usize> {
        self.delta[a].get(&vec![s]).map(|t| t[0])
    }

    /// All global states reachable from the initial one; fails beyond `cap`.
    pub fn reachable_globals(&self, cap: usize) -> Result<Vec<Global>> {
        explore(self, cap)
    }

    /// Per-process local states occurring in some reachable global state.
    pub fn reachable_locals(&self, cap: usize) -> Result<Vec<Vec<bool>>> {
        let mut used: Vec<Vec<bool>> = self.states.iter().map(|s| vec![false; s.len()]).collect();
        for g in self.reachable_globals(cap)? {
            for (p, &s) in g.iter().enumerate() {
                used[p][s] = true;
            }
        }
        Ok(used)
    }

    /// Transitions as `(letter, from, to)` sorted for deterministic output.
    pub fn sorted_transitions(&self) -> Vec<(Letter, Vec<usize>, Vec<usize>)> {
        let mut out = vec![];
        for a in self.alphabet.letters() {
            let mut rows: Vec<_> = self.delta[a].iter().map(|(f, t)| (a, f.clone(), t.clone())).collect();
            rows.sort();
            out.extend(rows);
        }
        out
    }

    pub fn total_states(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }
}

impl Simulate for AsyncAutomaton {
    fn alphabet(&self) -> &DistributedAlphabet {
        &self.alphabet
    }
    fn initial_global(&self) -> Global {
        self.initial.clone()
    }
    fn step(&self, g: &[usize], a: Letter) -> Option<Global> {
        let to = self.delta[a].get(&self.project(g, a))?;
        let mut next = g.to_vec();
        for (k, &p) in self.alphabet.domain(a).iter().enumerate() {
            next[p] = to[k];
        }
        Some(next)
    }
}

/// Breadth-first exploration of the reachable global states of any simulator.
pub fn explore<S: Simulate + ?Sized>(sim: &S, cap: usize) -> Result<Vec<Global>> {
    let init = sim.initial_global();
    let mut seen: HashSet<Global> = HashSet::from([init.clone()]);
    let mut order = vec![init.clone()];
    let mut queue = VecDeque::from([init]);
    while let Some(g) = queue.pop_front() {
        for a in sim.alphabet().letters() {
            if let Some(h) = sim.step(&g, a) {
                if seen.insert(h.clone()) {
                    if seen.len() > cap {
                        return Err(Error::Unsupported(format!("more than {cap} reachable global states")));
                    }
                    order.push(h.clone());
                    queue.push_back(h);
                }
            }
        }
    }
    Ok(order)
}

/// All words of length at most `max_len` (shortlex order).
pub fn words_up_to(num_letters: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = vec![];
        for w in &frontier {
            for a in 0..num_letters {
                let mut v: Word = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_local() -> AsyncAutomaton {
        let al = DistributedAlphabet::from_domains(&["p", "q"], &[("a", &["p"]), ("b", &["q"]), ("c", &["p", "q"])]).unwrap();
        let mut aa = AsyncAutomaton::new(al, None, vec![vec!["0".into(), "1".into()]; 2], vec![0, 0]).unwrap();
        aa.add("a", &["0"], &["1"]).unwrap();
        aa.add("b", &["0"], &["1"]).unwrap();
        aa.add("c", &["1", "1"], &["0", "0"]).unwrap();
        aa
    }

    #[test]
    fn disjoint_letters_commute() {
        let aa = two_local();
        assert_eq!(aa.run(&[0, 1]), aa.run(&[1, 0]));
        assert_eq!(aa.run(&[]), Ok(vec![0, 0]));
        assert_eq!(aa.run(&[2]), Err(0));
        assert_eq!(aa.run(&[0, 1, 2]), Ok(vec![0, 0]));
    }

    #[test]
    fn exploration() {
        assert_eq!(two_local().reachable_globals(100).unwrap().len(), 4);
        assert!(two_local().reachable_globals(2).is_err());
    }

    #[test]
    fn nondeterminism_rejected() {
        let mut aa = two_local();
        assert!(aa.add("a", &["0"], &["0"]).is_err());
    }

    #[test]
    fn words_enumeration() {
        assert_eq!(words_up_to(2, 3).len(), 15);
        assert_eq!(words_up_to(3, 0), vec![Vec::<usize>::new()]);
    }
}
