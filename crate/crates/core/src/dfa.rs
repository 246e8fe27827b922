//! Deterministic automata with partial transitions and the `Diam` combinator.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::model::{DistributedAlphabet, Letter};

pub type State = usize;

/// A DFA over a distributed alphabet; `Δ(s, a)` may be undefined.
#[derive(Debug)]
pub struct Dfa {
    alphabet: DistributedAlphabet,
    names: Vec<String>,
    initial: State,
    accepting: Vec<bool>,
    delta: Vec<Vec<Option<State>>>,
    memo: Mutex<HashMap<(State, State, State, Vec<Letter>), Result<State>>>,
}

impl Clone for Dfa {
    fn clone(&self) -> Self {
        Dfa {
            alphabet: self.alphabet.clone(),
            names: self.names.clone(),
            initial: self.initial,
            accepting: self.accepting.clone(),
            delta: self.delta.clone(),
            memo: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for Dfa {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.names == other.names
            && self.initial == other.initial
            && self.accepting == other.accepting
            && self.delta == other.delta
    }
}

/// A state and two independent letters on which the diamond property fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiamondViolation {
    pub state: State,
    pub a: Letter,
    pub b: Letter,
}

impl Dfa {
    /// `delta[s][a]` is the successor of `s` on `a`.
    pub fn new(
        alphabet: DistributedAlphabet,
        names: Vec<String>,
        initial: State,
        accepting: Vec<bool>,
        delta: Vec<Vec<Option<State>>>,
    ) -> Result<Self> {
        let n = names.len();
        if initial >= n {
            return Err(Error::input("initial", "initial state out of range"));
        }
        if accepting.len() != n || delta.len() != n {
            return Err(Error::input("states", "table sizes do not match the state count"));
        }
        for (s, row) in delta.iter().enumerate() {
            if row.len() != alphabet.num_letters() {
                return Err(Error::input(format!("transitions[{s}]"), "row width must equal the letter count"));
            }
            if row.iter().flatten().any(|&t| t >= n) {
                return Err(Error::input(format!("transitions[{s}]"), "target out of range"));
            }
        }
        Ok(Dfa {
            alphabet,
            names,
            initial,
            accepting,
            delta,
            memo: Mutex::new(HashMap::new()),
        })
    }

    /// Build from `(src, letter, dst)` triples given by name.
    pub fn from_triples(
        alphabet: DistributedAlphabet,
        states: &[&str],
        initial: &str,
        accepting: &[&str],
        transitions: &[(&str, &str, &str)],
    ) -> Result<Self> {
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let ix = |s: &str| names.iter().position(|n| n == s).ok_or_else(|| Error::UnknownState(s.to_string()));
        let mut delta = vec![vec![None; alphabet.num_letters()]; names.len()];
        for (src, a, dst) in transitions {
            let (s, t, a) = (ix(src)?, ix(dst)?, alphabet.letter(a)?);
            if delta[s][a].is_some_and(|x| x != t) {
                return Err(Error::input("transitions", format!("nondeterministic on ({src}, {})", alphabet.letter_name(a))));
            }
            delta[s][a] = Some(t);
        }
        let mut acc = vec![false; names.len()];
        for s in accepting {
            acc[ix(s)?] = true;
        }
        let init = ix(initial)?;
        Dfa::new(alphabet, names, init, acc, delta)
    }

    pub fn alphabet(&self) -> &DistributedAlphabet {
        &self.alphabet
    }
    pub fn num_states(&self) -> usize {
        self.names.len()
    }
    pub fn initial(&self) -> State {
        self.initial
    }
    pub fn state_name(&self, s: State) -> &str {
        &self.names[s]
    }
    pub fn state_names(&self) -> &[String] {
        &self.names
    }
    pub fn is_accepting(&self, s: State) -> bool {
        self.accepting[s]
    }
    pub fn step(&self, s: State, a: Letter) -> Option<State> {
        self.delta[s][a]
    }
    pub fn table(&self) -> &[Vec<Option<State>>] {
        &self.delta
    }

    /// Runs `w` from `s`; `Err(k)` if the step at position `k` is undefined.
    pub fn run_from(&self, s: State, w: &[Letter]) -> std::result::Result<State, usize> {
        w.iter()
            .enumerate()
            .try_fold(s, |s, (k, &a)| self.delta[s][a].ok_or(k))
    }

    pub fn run(&self, w: &[Letter]) -> std::result::Result<State, usize> {
        self.run_from(self.initial, w)
    }

    pub fn accepts(&self, w: &[Letter]) -> bool {
        self.run(w).is_ok_and(|s| self.accepting[s])
    }

    /// First violation of the diamond property, including definedness symmetry.
    pub fn diamond_violation(&self) -> Option<DiamondViolation> {
        let al = &self.alphabet;
        for s in 0..self.num_states() {
            for a in al.letters() {
                for b in a + 1..al.num_letters() {
                    if !al.independent(a, b) {
                        continue;
                    }
                    let ab = self.delta[s][a].and_then(|x| self.delta[x][b]);
                    let ba = self.delta[s][b].and_then(|x| self.delta[x][a]);
                    if ab != ba {
                        return Some(DiamondViolation { state: s, a, b });
                    }
                }
            }
        }
        None
    }

    pub fn is_diamond(&self) -> bool {
        self.diamond_violation().is_none()
    }

    pub(crate) fn ensure_diamond(&self) -> Result<()> {
        match self.diamond_violation() {
            None => Ok(()),
            Some(v) => Err(Error::NotDiamond {
                state: self.names[v.state].clone(),
                a: self.alphabet.letter_name(v.a).to_string(),
                b: self.alphabet.letter_name(v.b).to_string(),
            }),
        }
    }

    /// Shortest word over `letters` leading from `s` to `target`.
    pub fn witness(&self, s: State, target: State, letters: &[Letter]) -> Option<Vec<Letter>> {
        let mut pred: Vec<Option<(State, Letter)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == target {
                let mut w = vec![];
                let mut v = u;
                while let Some((x, a)) = pred[v] {
                    w.push(a);
                    v = x;
                }
                w.reverse();
                return Some(w);
            }
            for &a in letters {
                if let Some(v) = self.delta[u][a] {
                    if !seen[v] {
                        seen[v] = true;
                        pred[v] = Some((u, a));
                        queue.push_back(v);
                    }
                }
            }
        }
        None
    }

    /// `Diam(s, s1, s2, C2)`: the state reached by `w1'·w2'` where `w1'` over the
    /// letters independent of `C2` leads to `s1` and `w2'` over `C2` leads to `s2`.
    pub fn diam(&self, s: State, s1: State, s2: State, c2: &[Letter]) -> Result<State> {
        let mut key_letters = c2.to_vec();
        key_letters.sort_unstable();
        key_letters.dedup();
        let key = (s, s1, s2, key_letters);
        if let Some(r) = self.memo.lock().expect("memo poisoned").get(&key) {
            return r.clone();
        }
        let r = self.diam_uncached(s, s1, s2, &key.3);
        self.memo.lock().expect("memo poisoned").insert(key, r.clone());
        r
    }

    fn diam_uncached(&self, s: State, s1: State, s2: State, c2: &[Letter]) -> Result<State> {
        let c1 = max_independent_letters(&self.alphabet, c2);
        let names = |x: State| self.names[x].clone();
        if self.witness(s, s1, &c1).is_none() {
            return Err(Error::DiamUndefined(format!(
                "no word over independent letters from `{}` to `{}`",
                names(s),
                names(s1)
            )));
        }
        let w2 = self.witness(s, s2, c2).ok_or_else(|| {
            Error::DiamUndefined(format!("no word over C2 from `{}` to `{}`", names(s), names(s2)))
        })?;
        self.run_from(s1, &w2).map_err(|_| {
            Error::TargetUndefined(format!("from `{}` via `{}`", names(s1), self.alphabet.word_names(&w2).join("")))
        })
    }
}

/// Letters whose domain avoids every process touched by `c2`.
pub fn max_independent_letters(alphabet: &DistributedAlphabet, c2: &[Letter]) -> Vec<Letter> {
    let mut touched = vec![false; alphabet.num_processes()];
    for &b in c2 {
        for &p in alphabet.domain(b) {
            touched[p] = true;
        }
    }
    alphabet
        .letters()
        .filter(|&a| alphabet.domain(a).iter().all(|&p| !touched[p]))
        .collect()
}
