//! Distribution of diamond DFAs over tree-like architectures.
//!
//! Every process keeps a pair `(s, t)`: `s` is the last DFA state it shared
//! with its parent, `t` the most recent state it knows about. A letter's
//! participants rebuild the state of their common view with `TDiam` over the
//! tree of the letter, then all advance on the letter.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::aa::{explore, AsyncAutomaton, Global, Simulate};
use crate::chordal::{components, tca_from_dependence};
use crate::dfa::{Dfa, State};
use crate::error::{Error, Result};
use crate::model::{Architecture, DistributedAlphabet, Letter, LetterSpec, Proc};

/// Letters whose whole domain lies in the subtree rooted at `p`.
pub fn down_letters(arch: &Architecture, p: Proc) -> Vec<Letter> {
    let sub = arch.tree.subtree(p);
    arch.alphabet
        .letters()
        .filter(|&a| arch.alphabet.domain(a).iter().all(|q| sub.binary_search(q).is_ok()))
        .collect()
}

/// The tree of a letter: its domain, rooted at the shallowest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetterTree {
    pub root: Proc,
    /// `(parent, child)` edges inside the domain.
    pub edges: Vec<(Proc, Proc)>,
}

pub fn letter_tree(arch: &Architecture, a: Letter) -> Result<LetterTree> {
    let al = &arch.alphabet;
    let dom = al.domain(a);
    let tops: Vec<Proc> = dom
        .iter()
        .copied()
        .filter(|&p| arch.tree.parent(p).is_none_or(|q| !al.in_domain(a, q)))
        .collect();
    if tops.len() != 1 {
        return Err(Error::Integrity(format!("domain of `{}` is not connected", al.letter_name(a))));
    }
    let edges = dom
        .iter()
        .filter_map(|&p| arch.tree.parent(p).filter(|&q| al.in_domain(a, q)).map(|q| (q, p)))
        .collect();
    Ok(LetterTree { root: tops[0], edges })
}

/// A node labelled `(s, t, C↓)`; children in fold order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    pub process: Proc,
    pub s: State,
    pub t: State,
    pub down: Vec<Letter>,
    pub children: Vec<LabeledTree>,
}

/// Folds `Diam` over the children: start from `t` at the root, then merge
/// each child subtree with its shared state `s` and letters `C↓`.
pub fn tdiam(dfa: &Dfa, tree: &LabeledTree) -> Result<State> {
    let mut acc = tree.t;
    for child in &tree.children {
        let below = tdiam(dfa, child)?;
        acc = dfa.diam(child.s, acc, below, &child.down).map_err(|e| match e {
            Error::DiamUndefined(m) => {
                Error::DiamUndefined(format!("at process #{}: {m}", child.process))
            }
            Error::TargetUndefined(m) => {
                Error::TargetUndefined(format!("at process #{}: {m}", child.process))
            }
            other => other,
        })?;
    }
    Ok(acc)
}

/// The distributed automaton, with transitions computed on demand.
#[derive(Debug)]
pub struct DistributedAutomaton {
    dfa: Dfa,
    arch: Architecture,
    down: Vec<Vec<Letter>>,
    trees: Vec<LetterTree>,
    accept_memo: Mutex<HashMap<Global, bool>>,
}

/// Build the distributed automaton; fails unless `dfa` is diamond and `arch` tree-like.
pub fn distribute(dfa: &Dfa, arch: &Architecture) -> Result<DistributedAutomaton> {
    if dfa.alphabet() != &arch.alphabet {
        return Err(Error::input("arch", "alphabet differs from the DFA alphabet"));
    }
    arch.ensure_tree_like()?;
    dfa.ensure_diamond()?;
    let down = arch.alphabet.processes().map(|p| down_letters(arch, p)).collect();
    let trees = arch
        .alphabet
        .letters()
        .map(|a| letter_tree(arch, a))
        .collect::<Result<_>>()?;
    Ok(DistributedAutomaton {
        dfa: dfa.clone(),
        arch: arch.clone(),
        down,
        trees,
        accept_memo: Mutex::new(HashMap::new()),
    })
}

impl DistributedAutomaton {
    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }
    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }
    /// Declared local state count per process, `|S|²`.
    pub fn declared_states(&self) -> usize {
        self.dfa.num_states() * self.dfa.num_states()
    }
    pub fn encode(&self, s: State, t: State) -> usize {
        s * self.dfa.num_states() + t
    }
    pub fn pair(&self, local: usize) -> (State, State) {
        let n = self.dfa.num_states();
        (local / n, local % n)
    }
    pub fn pair_name(&self, local: usize) -> String {
        let (s, t) = self.pair(local);
        format!("({},{})", self.dfa.state_name(s), self.dfa.state_name(t))
    }

    /// Labelled subtree rooted at `root` restricted to nodes accepted by `keep`.
    pub fn labeled(&self, g: &[usize], root: Proc, keep: &dyn Fn(Proc) -> bool) -> LabeledTree {
        let (s, t) = self.pair(g[root]);
        LabeledTree {
            process: root,
            s,
            t,
            down: self.down[root].clone(),
            children: self
                .arch
                .tree
                .children(root)
                .iter()
                .filter(|&&c| keep(c))
                .map(|&c| self.labeled(g, c, keep))
                .collect(),
        }
    }

    /// One step; `Ok(None)` when the DFA has no move on the recombined state.
    /// A partial DFA can leave participants whose combination is undefined
    /// (say `ab` and `ba` both undefined); that is no move as well.
    pub fn try_step(&self, g: &[usize], a: Letter) -> Result<Option<Global>> {
        let al = &self.arch.alphabet;
        let tree = &self.trees[a];
        let keep = |p: Proc| al.in_domain(a, p);
        let sa = match tdiam(&self.dfa, &self.labeled(g, tree.root, &keep)) {
            Ok(s) => s,
            Err(Error::TargetUndefined(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let Some(next) = self.dfa.step(sa, a) else {
            return Ok(None);
        };
        let mut h = g.to_vec();
        for &p in al.domain(a) {
            let (s, _) = self.pair(g[p]);
            let u = if p == tree.root { s } else { next };
            h[p] = self.encode(u, next);
        }
        Ok(Some(h))
    }

    /// DFA state recombined from the whole tree.
    pub fn global_dfa_state(&self, g: &[usize]) -> Result<State> {
        tdiam(&self.dfa, &self.labeled(g, self.arch.tree.root(), &|_| true))
    }

    pub fn accepts_global(&self, g: &[usize]) -> Result<bool> {
        if let Some(&b) = self.accept_memo.lock().expect("memo poisoned").get(g) {
            return Ok(b);
        }
        let b = match self.global_dfa_state(g) {
            Ok(s) => self.dfa.is_accepting(s),
            Err(Error::TargetUndefined(_)) => false,
            Err(e) => return Err(e),
        };
        self.accept_memo.lock().expect("memo poisoned").insert(g.to_vec(), b);
        Ok(b)
    }

    pub fn accepts(&self, w: &[Letter]) -> bool {
        match self.run(w) {
            Ok(g) => self.accepts_global(&g).unwrap_or(false),
            Err(_) => false,
        }
    }

    /// Explicit transition tables over the reachable local states.
    pub fn materialize(&self, cap: usize) -> Result<Materialized> {
        let globals = explore(self, cap)?;
        let al = &self.arch.alphabet;
        let np = al.num_processes();
        let mut ids: Vec<HashMap<usize, usize>> = vec![HashMap::new(); np];
        let mut pairs: Vec<Vec<(State, State)>> = vec![vec![]; np];
        let mut intern = |p: usize, local: usize, ids: &mut Vec<HashMap<usize, usize>>| -> usize {
            let next = ids[p].len();
            *ids[p].entry(local).or_insert_with(|| {
                pairs[p].push(self.pair(local));
                next
            })
        };
        let init = self.initial_global();
        for p in 0..np {
            intern(p, init[p], &mut ids);
        }
        let mut rows = vec![];
        for g in &globals {
            for a in al.letters() {
                if let Some(h) = self.try_step(g, a)? {
                    let dom = al.domain(a);
                    let from: Vec<usize> = dom.iter().map(|&p| intern(p, g[p], &mut ids)).collect();
                    let to: Vec<usize> = dom.iter().map(|&p| intern(p, h[p], &mut ids)).collect();
                    rows.push((a, from, to));
                }
            }
        }
        let states: Vec<Vec<String>> = pairs
            .iter()
            .map(|ps| {
                ps.iter()
                    .map(|&(s, t)| format!("({},{})", self.dfa.state_name(s), self.dfa.state_name(t)))
                    .collect()
            })
            .collect();
        let mut aa = AsyncAutomaton::new(al.clone(), Some(self.arch.tree.clone()), states, vec![0; np])?;
        for (a, f, t) in rows {
            aa.add_transition(a, f, t)?;
        }
        Ok(Materialized { aa, pairs })
    }
}

impl Simulate for DistributedAutomaton {
    fn alphabet(&self) -> &DistributedAlphabet {
        &self.arch.alphabet
    }
    fn initial_global(&self) -> Global {
        let s0 = self.dfa.initial();
        vec![self.encode(s0, s0); self.arch.alphabet.num_processes()]
    }
    fn step(&self, g: &[usize], a: Letter) -> Option<Global> {
        self.try_step(g, a).ok().flatten()
    }
}

/// An explicit automaton plus the `(s, t)` pair behind every local state.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub aa: AsyncAutomaton,
    pub pairs: Vec<Vec<(State, State)>>,
}

/// Parallel composition of automata over pairwise independent sub-alphabets.
#[derive(Debug)]
pub struct ComposedAutomaton {
    dfa: Dfa,
    alphabet: DistributedAlphabet,
    parts: Vec<Part>,
    /// Owning part and its local letter index, per letter.
    letter_home: Vec<(usize, Letter)>,
}

#[derive(Debug)]
struct Part {
    aa: DistributedAutomaton,
    offset: usize,
    /// Letters of this part in the full alphabet.
    letters: Vec<Letter>,
}

/// The DFA restricted to a subset of its letters (same states).
pub fn restrict_dfa(dfa: &Dfa, letters: &[Letter]) -> Result<Dfa> {
    let sub = dfa.alphabet().restrict(letters);
    let delta = (0..dfa.num_states())
        .map(|s| letters.iter().map(|&a| dfa.step(s, a)).collect())
        .collect();
    Dfa::new(
        sub,
        dfa.state_names().to_vec(),
        dfa.initial(),
        (0..dfa.num_states()).map(|s| dfa.is_accepting(s)).collect(),
        delta,
    )
}

/// Composes automata distributed over the parts of `dfa`'s alphabet.
///
/// Each part must use a sub-alphabet of `dfa` (letters by name); the parts must
/// cover every letter, share none, and be pairwise independent.
pub fn parallel_compose(parts: Vec<DistributedAutomaton>, dfa: &Dfa) -> Result<ComposedAutomaton> {
    let full = dfa.alphabet();
    let mut home: Vec<Option<(usize, Letter)>> = vec![None; full.num_letters()];
    let mut procs = vec![];
    let mut built = vec![];
    for (i, part) in parts.into_iter().enumerate() {
        let al = part.arch.alphabet.clone();
        let mut letters = vec![];
        for b in al.letters() {
            let a = full.letter(al.letter_name(b))?;
            if home[a].is_some() {
                return Err(Error::input(format!("parts[{i}]"), format!("letter `{}` shared between parts", al.letter_name(b))));
            }
            home[a] = Some((i, b));
            letters.push(a);
        }
        let offset = procs.len();
        procs.extend(al.process_names().iter().map(|p| format!("{i}.{p}")));
        built.push(Part { aa: part, offset, letters });
    }
    let letter_home: Vec<(usize, Letter)> = home
        .into_iter()
        .enumerate()
        .map(|(a, h)| h.ok_or_else(|| Error::input("parts", format!("letter `{}` not covered", full.letter_name(a)))))
        .collect::<Result<_>>()?;
    for (i, x) in built.iter().enumerate() {
        for y in &built[i + 1..] {
            if x.letters.iter().any(|&a| y.letters.iter().any(|&b| !full.independent(a, b))) {
                return Err(Error::input("parts", "parts are not independent"));
            }
        }
    }
    let specs = full
        .letters()
        .map(|a| {
            let (i, b) = letter_home[a];
            let part = &built[i];
            LetterSpec {
                id: full.letter_name(a).to_string(),
                domain: part
                    .aa
                    .arch
                    .alphabet
                    .domain(b)
                    .iter()
                    .map(|&p| procs[part.offset + p].clone())
                    .collect(),
                controllable: false,
            }
        })
        .collect();
    let alphabet = DistributedAlphabet::new(procs, specs)?;
    Ok(ComposedAutomaton {
        dfa: dfa.clone(),
        alphabet,
        parts: built,
        letter_home,
    })
}

/// Splits the alphabet of `dfa` into dependence components, builds one
/// architecture per component from its dependence graph, and composes.
pub fn distribute_forest(dfa: &Dfa) -> Result<ComposedAutomaton> {
    dfa.ensure_diamond()?;
    let mut parts = vec![];
    for comp in components(dfa.alphabet()) {
        let sub = restrict_dfa(dfa, &comp)?;
        let graph = sub.alphabet().dependence_graph();
        let arch = tca_from_dependence(&graph)?;
        // Reorder the DFA onto the architecture's letter order (identical here).
        let sub = Dfa::new(
            arch.alphabet.clone(),
            sub.state_names().to_vec(),
            sub.initial(),
            (0..sub.num_states()).map(|s| sub.is_accepting(s)).collect(),
            sub.table().to_vec(),
        )?;
        parts.push(distribute(&sub, &arch)?);
    }
    parallel_compose(parts, dfa)
}

impl ComposedAutomaton {
    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    /// Folds the part states left to right with `Diam(s0, acc, s_i, Σ_i)`.
    pub fn accepts_global(&self, g: &[usize]) -> Result<bool> {
        let s0 = self.dfa.initial();
        let mut acc = s0;
        for part in &self.parts {
            let n = part.aa.arch.alphabet.num_processes();
            let si = part.aa.global_dfa_state(&g[part.offset..part.offset + n])?;
            acc = self.dfa.diam(s0, acc, si, &part.letters)?;
        }
        Ok(self.dfa.is_accepting(acc))
    }

    pub fn accepts(&self, w: &[Letter]) -> bool {
        match self.run(w) {
            Ok(g) => self.accepts_global(&g).unwrap_or(false),
            Err(_) => false,
        }
    }
}

impl Simulate for ComposedAutomaton {
    fn alphabet(&self) -> &DistributedAlphabet {
        &self.alphabet
    }
    fn initial_global(&self) -> Global {
        self.parts.iter().flat_map(|p| p.aa.initial_global()).collect()
    }
    fn step(&self, g: &[usize], a: Letter) -> Option<Global> {
        let (i, b) = self.letter_home[a];
        let part = &self.parts[i];
        let n = part.aa.arch.alphabet.num_processes();
        let local = part.aa.step(&g[part.offset..part.offset + n], b)?;
        let mut h = g.to_vec();
        h[part.offset..part.offset + n].copy_from_slice(&local);
        Some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aa::words_up_to;
    use crate::examples::fig1;

    #[test]
    fn down_letters_fig1() {
        let arch = fig1();
        let al = &arch.alphabet;
        let p3 = al.process("p3").unwrap();
        assert_eq!(down_letters(&arch, p3), vec![al.letter("a3").unwrap()]);
        assert_eq!(down_letters(&arch, arch.tree.root()).len(), 3);
        assert!(down_letters(&arch, al.process("p2").unwrap()).is_empty());
    }

    #[test]
    fn letter_trees_fig1() {
        let arch = fig1();
        let al = &arch.alphabet;
        let p = |n: &str| al.process(n).unwrap();
        let t3 = letter_tree(&arch, al.letter("a3").unwrap()).unwrap();
        assert_eq!(t3, LetterTree { root: p("p3"), edges: vec![(p("p3"), p("p5"))] });
        let t1 = letter_tree(&arch, al.letter("a1").unwrap()).unwrap();
        assert_eq!(t1.root, p("p1"));
        assert_eq!(t1.edges, vec![(p("p1"), p("p2")), (p("p1"), p("p3"))]);
    }

    #[test]
    fn tdiam_leaf_and_trivial_child() {
        let dfa = crate::examples::fig1_counter();
        let leaf = LabeledTree { process: 0, s: 0, t: 1, down: vec![], children: vec![] };
        assert_eq!(tdiam(&dfa, &leaf).unwrap(), 1);
        let root = LabeledTree {
            process: 0,
            s: 0,
            t: 1,
            down: vec![],
            children: vec![LabeledTree { process: 1, s: 1, t: 1, down: vec![2], children: vec![] }],
        };
        assert_eq!(tdiam(&dfa, &root).unwrap(), 1);
    }

    #[test]
    fn fig1_language_preserved() {
        let arch = fig1();
        let dfa = crate::examples::fig1_counter();
        let b = distribute(&dfa, &arch).unwrap();
        assert_eq!(b.accepts(&[]), dfa.is_accepting(dfa.initial()));
        for w in words_up_to(3, 5) {
            assert_eq!(b.accepts(&w), dfa.accepts(&w), "{w:?}");
        }
        let m = b.materialize(100_000).unwrap();
        let n = dfa.num_states();
        assert!(m.aa.states.iter().all(|s| s.len() <= n * n));
    }

    #[test]
    fn non_diamond_rejected() {
        let al = DistributedAlphabet::from_domains(&["p", "q"], &[("a", &["p", "q"]), ("b", &["q"]), ("c", &["p"])]).unwrap();
        let tree = crate::model::ProcessTree::from_parents(0, vec![None, Some(0)]).unwrap();
        let arch = Architecture::new(al.clone(), tree).unwrap();
        let dfa = Dfa::from_triples(al, &["x", "y"], "x", &[], &[("x", "b", "y")]).unwrap();
        assert!(distribute(&dfa, &arch).is_ok());
        let bad = Dfa::from_triples(
            arch.alphabet.clone(),
            &["x", "y", "z"],
            "x",
            &[],
            &[("x", "b", "y"), ("y", "c", "z")],
        )
        .unwrap();
        assert!(matches!(distribute(&bad, &arch), Err(Error::NotDiamond { .. })));
    }

    #[test]
    fn two_independent_local_letters() {
        let al = DistributedAlphabet::from_domains(&["p", "q"], &[("a", &["p"]), ("b", &["q"])]).unwrap();
        let dfa = Dfa::from_triples(
            al,
            &["00", "10", "01", "11"],
            "00",
            &["11"],
            &[("00", "a", "10"), ("01", "a", "11"), ("00", "b", "01"), ("10", "b", "11")],
        )
        .unwrap();
        let c = distribute_forest(&dfa).unwrap();
        assert_eq!(c.num_parts(), 2);
        for w in words_up_to(2, 4) {
            assert_eq!(c.accepts(&w), dfa.accepts(&w), "{w:?}");
        }
    }
}
