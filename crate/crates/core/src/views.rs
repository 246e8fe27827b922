//! Views of process sets on words, and the run invariants relating a DFA run
//! to the pair states of its distributed automaton.

use std::collections::{HashSet, VecDeque};

use rand::Rng;

use crate::aa::{Global, Simulate};
use crate::dfa::{Dfa, State};
use crate::distribute::Materialized;
use crate::error::{Error, Result};
use crate::model::{Architecture, DistributedAlphabet, Letter, Proc, Word};

/// The causal past of `x` in `w`, computed backwards as defined.
pub fn view(alphabet: &DistributedAlphabet, x: &[Proc], w: &[Letter]) -> Word {
    let mut set = vec![false; alphabet.num_processes()];
    for &p in x {
        set[p] = true;
    }
    let mut out = vec![];
    for &a in w.iter().rev() {
        let dom = alphabet.domain(a);
        if dom.iter().any(|&p| set[p]) {
            for &p in dom {
                set[p] = true;
            }
            out.push(a);
        }
    }
    out.reverse();
    out
}

/// `Δ(s0, view(x, w))`, or the undefined position inside the view.
pub fn state_view(dfa: &Dfa, x: &[Proc], w: &[Letter]) -> Result<State, usize> {
    dfa.run(&view(dfa.alphabet(), x, w))
}

/// View of `{p}` on the shortest prefix holding every letter shared by `p` and its parent.
pub fn parent_view(arch: &Architecture, p: Proc, w: &[Letter]) -> Word {
    let Some(q) = arch.tree.parent(p) else {
        return vec![];
    };
    let al = &arch.alphabet;
    let cut = w
        .iter()
        .rposition(|&b| al.in_domain(b, p) && al.in_domain(b, q))
        .map_or(0, |i| i + 1);
    view(al, &[p], &w[..cut])
}

pub fn state_parent_view(dfa: &Dfa, arch: &Architecture, p: Proc, w: &[Letter]) -> Result<State, usize> {
    dfa.run(&parent_view(arch, p, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    /// The DFA and the distributed run disagree on definedness.
    Def,
    /// A process's shared component differs from its parent view state.
    S,
    /// A process's known component differs from its own view state.
    T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: InvariantKind,
    /// Length of the offending prefix.
    pub prefix: usize,
    pub process: Option<Proc>,
}

/// A simulator whose local states decode to `(s, t)` pairs.
pub trait PairSimulate: Simulate {
    fn pair_of(&self, p: Proc, local: usize) -> (State, State);
}

impl PairSimulate for crate::distribute::DistributedAutomaton {
    fn pair_of(&self, _p: Proc, local: usize) -> (State, State) {
        self.pair(local)
    }
}

impl Simulate for Materialized {
    fn alphabet(&self) -> &DistributedAlphabet {
        &self.aa.alphabet
    }
    fn initial_global(&self) -> Global {
        self.aa.initial.clone()
    }
    fn step(&self, g: &[usize], a: Letter) -> Option<Global> {
        self.aa.step(g, a)
    }
}

impl PairSimulate for Materialized {
    fn pair_of(&self, p: Proc, local: usize) -> (State, State) {
        self.pairs[p][local]
    }
}

/// Shortest access words of all reachable global states, each extended by
/// every letter enabled there. Running them exercises every reachable transition.
pub fn transition_cover<S: Simulate + ?Sized>(sim: &S, cap: usize) -> Result<Vec<Word>> {
    let init = sim.initial_global();
    let mut seen: HashSet<Global> = HashSet::from([init.clone()]);
    let mut queue = VecDeque::from([(init, vec![])]);
    let mut out = vec![];
    while let Some((g, w)) = queue.pop_front() {
        for a in sim.alphabet().letters() {
            if let Some(h) = sim.step(&g, a) {
                let mut w2: Word = w.clone();
                w2.push(a);
                out.push(w2.clone());
                if seen.insert(h.clone()) {
                    if seen.len() > cap {
                        return Err(Error::Unsupported(format!("more than {cap} global states")));
                    }
                    queue.push_back((h, w2));
                }
            }
        }
    }
    Ok(out)
}

/// A copy of `m` with one transition altered: one target coordinate moved to
/// another local state, or the transition dropped when that process has a
/// single state. `None` if `m` has no transitions.
pub fn mutate_transition<R: Rng + ?Sized>(m: &Materialized, rng: &mut R) -> Option<Materialized> {
    let rows = m.aa.sorted_transitions();
    if rows.is_empty() {
        return None;
    }
    let (a, from, to) = rows[rng.gen_range(0..rows.len())].clone();
    let mut out = m.clone();
    let dom = m.aa.alphabet.domain(a);
    let k = rng.gen_range(0..dom.len());
    let n = m.aa.num_states(dom[k]);
    if n == 1 {
        out.aa.delta[a].remove(&from);
    } else {
        let mut t = to;
        t[k] = (t[k] + rng.gen_range(1..n)) % n;
        out.aa.delta[a].insert(from, t);
    }
    Some(out)
}

/// Checks the three invariants on every prefix of `w`; returns the first violation.
pub fn check_invariants<S: PairSimulate + ?Sized>(dfa: &Dfa, arch: &Architecture, aa: &S, w: &[Letter]) -> Option<Violation> {
    let mut g = Some(aa.initial_global());
    for k in 0..=w.len() {
        if k > 0 {
            g = g.and_then(|g| aa.step(&g, w[k - 1]));
        }
        let prefix = &w[..k];
        let d = dfa.run(prefix).is_ok();
        match (&g, d) {
            (None, false) => return None,
            (Some(_), false) | (None, true) => {
                return Some(Violation {
                    kind: InvariantKind::Def,
                    prefix: k,
                    process: None,
                })
            }
            (Some(g), true) => {
                for p in arch.alphabet.processes() {
                    let (s, t) = aa.pair_of(p, g[p]);
                    if state_parent_view(dfa, arch, p, prefix) != Ok(s) {
                        return Some(Violation {
                            kind: InvariantKind::S,
                            prefix: k,
                            process: Some(p),
                        });
                    }
                    if state_view(dfa, &[p], prefix) != Ok(t) {
                        return Some(Violation {
                            kind: InvariantKind::T,
                            prefix: k,
                            process: Some(p),
                        });
                    }
                }
            }
        }
    }
    None
}
