//! Distributed alphabets, process trees and tree-like architectures.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};

/// Index of a letter inside its [`DistributedAlphabet`].
pub type Letter = usize;
/// Index of a process inside its [`DistributedAlphabet`].
pub type Proc = usize;
/// A finite word over letter indices.
pub type Word = Vec<Letter>;

/// Letters, processes, the domain map and the controllable letters.
///
/// Letters and processes are interned: their position in the declaration
/// order is their identity, and every iteration follows that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributedAlphabet {
    processes: Vec<String>,
    letters: Vec<String>,
    domains: Vec<Vec<Proc>>,
    controllable: Vec<bool>,
    proc_index: HashMap<String, Proc>,
    letter_index: HashMap<String, Letter>,
}

/// Declaration of one letter when building an alphabet.
#[derive(Debug, Clone)]
pub struct LetterSpec {
    pub id: String,
    pub domain: Vec<String>,
    pub controllable: bool,
}

impl LetterSpec {
    pub fn new(id: &str, domain: &[&str], controllable: bool) -> Self {
        LetterSpec {
            id: id.to_string(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
            controllable,
        }
    }
}

impl DistributedAlphabet {
    pub fn new(processes: Vec<String>, letters: Vec<LetterSpec>) -> Result<Self> {
        let mut proc_index = HashMap::new();
        for (i, p) in processes.iter().enumerate() {
            if proc_index.insert(p.clone(), i).is_some() {
                return Err(Error::input(format!("processes[{i}]"), format!("duplicate process `{p}`")));
            }
        }
        let mut letter_index = HashMap::new();
        let mut names = Vec::new();
        let mut domains = Vec::new();
        let mut controllable = Vec::new();
        for (i, spec) in letters.into_iter().enumerate() {
            if letter_index.insert(spec.id.clone(), i).is_some() {
                return Err(Error::input(format!("letters[{i}].id"), format!("duplicate letter `{}`", spec.id)));
            }
            let mut dom = BTreeSet::new();
            for p in &spec.domain {
                let ix = *proc_index
                    .get(p)
                    .ok_or_else(|| Error::input(format!("letters[{i}].domain"), format!("unknown process `{p}`")))?;
                dom.insert(ix);
            }
            if dom.is_empty() {
                return Err(Error::input(format!("letters[{i}].domain"), "domain must be nonempty"));
            }
            if spec.controllable && dom.len() != 1 {
                return Err(Error::input(
                    format!("letters[{i}].controllable"),
                    format!("controllable letter `{}` must be local", spec.id),
                ));
            }
            names.push(spec.id);
            domains.push(dom.into_iter().collect());
            controllable.push(spec.controllable);
        }
        Ok(DistributedAlphabet {
            processes,
            letters: names,
            domains,
            controllable,
            proc_index,
            letter_index,
        })
    }

    /// Convenience constructor used heavily in tests.
    pub fn from_domains(processes: &[&str], letters: &[(&str, &[&str])]) -> Result<Self> {
        DistributedAlphabet::new(
            processes.iter().map(|s| s.to_string()).collect(),
            letters.iter().map(|(id, dom)| LetterSpec::new(id, dom, false)).collect(),
        )
    }

    pub fn num_letters(&self) -> usize {
        self.letters.len()
    }
    pub fn num_processes(&self) -> usize {
        self.processes.len()
    }
    pub fn letters(&self) -> std::ops::Range<Letter> {
        0..self.letters.len()
    }
    pub fn processes(&self) -> std::ops::Range<Proc> {
        0..self.processes.len()
    }
    pub fn letter_name(&self, a: Letter) -> &str {
        &self.letters[a]
    }
    pub fn process_name(&self, p: Proc) -> &str {
        &self.processes[p]
    }
    pub fn process_names(&self) -> &[String] {
        &self.processes
    }
    pub fn letter_names(&self) -> &[String] {
        &self.letters
    }
    /// Domain of a letter, sorted by process index.
    pub fn domain(&self, a: Letter) -> &[Proc] {
        &self.domains[a]
    }
    pub fn is_controllable(&self, a: Letter) -> bool {
        self.controllable[a]
    }
    pub fn letter(&self, name: &str) -> Result<Letter> {
        self.letter_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }
    pub fn process(&self, name: &str) -> Result<Proc> {
        self.proc_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownProcess(name.to_string()))
    }
    pub fn in_domain(&self, a: Letter, p: Proc) -> bool {
        self.domains[a].binary_search(&p).is_ok()
    }
    /// Position of `p` inside the domain tuple of `a`.
    pub fn domain_position(&self, a: Letter, p: Proc) -> Option<usize> {
        self.domains[a].binary_search(&p).ok()
    }
    pub fn is_local_to(&self, a: Letter, p: Proc) -> bool {
        self.domains[a] == [p]
    }

    pub fn parse_word(&self, letters: &[&str]) -> Result<Word> {
        letters.iter().map(|l| self.letter(l)).collect()
    }
    pub fn word_names(&self, w: &[Letter]) -> Vec<String> {
        w.iter().map(|&a| self.letters[a].clone()).collect()
    }

    /// `(a, b)` are independent iff their domains are disjoint.
    pub fn independent(&self, a: Letter, b: Letter) -> bool {
        let (da, db) = (&self.domains[a], &self.domains[b]);
        !da.iter().any(|p| db.binary_search(p).is_ok())
    }

    /// Name-based variant of [`DistributedAlphabet::independent`].
    pub fn independent_by_name(&self, a: &str, b: &str) -> Result<bool> {
        Ok(self.independent(self.letter(a)?, self.letter(b)?))
    }

    /// Letters whose domain is exactly `{p}`.
    pub fn local_letters(&self, p: Proc) -> Vec<Letter> {
        self.letters().filter(|&a| self.is_local_to(a, p)).collect()
    }

    pub fn dependence_graph(&self) -> DependenceGraph {
        let mut edges = BTreeSet::new();
        for a in self.letters() {
            for b in a + 1..self.num_letters() {
                if !self.independent(a, b) {
                    edges.insert((a, b));
                }
            }
        }
        DependenceGraph {
            vertices: self.letters.clone(),
            edges,
        }
    }

    /// The sub-alphabet over `letters`, keeping every process that occurs in one of their domains.
    pub fn restrict(&self, letters: &[Letter]) -> DistributedAlphabet {
        let mut used: BTreeSet<Proc> = BTreeSet::new();
        for &a in letters {
            used.extend(self.domains[a].iter().copied());
        }
        let processes: Vec<String> = used.iter().map(|&p| self.processes[p].clone()).collect();
        let specs = letters
            .iter()
            .map(|&a| LetterSpec {
                id: self.letters[a].clone(),
                domain: self.domains[a].iter().map(|&p| self.processes[p].clone()).collect(),
                controllable: self.controllable[a],
            })
            .collect();
        DistributedAlphabet::new(processes, specs).expect("restriction of a valid alphabet")
    }

    /// Declarations that rebuild this alphabet.
    pub fn letter_specs(&self) -> Vec<LetterSpec> {
        self.letters()
            .map(|a| LetterSpec {
                id: self.letters[a].clone(),
                domain: self.domains[a].iter().map(|&p| self.processes[p].clone()).collect(),
                controllable: self.controllable[a],
            })
            .collect()
    }

    /// The equivalence class of `u` under swapping adjacent independent letters.
    pub fn trace_closure(&self, u: &[Letter], max_len: usize) -> Result<BTreeSet<Word>> {
        const LIMIT: usize = 1_000_000;
        if u.len() > max_len {
            return Err(Error::input("u", format!("word longer than max_len {max_len}")));
        }
        let mut seen: HashSet<Word> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(u.to_vec());
        queue.push_back(u.to_vec());
        while let Some(w) = queue.pop_front() {
            for i in 0..w.len().saturating_sub(1) {
                if self.independent(w[i], w[i + 1]) {
                    let mut v = w.clone();
                    v.swap(i, i + 1);
                    if seen.insert(v.clone()) {
                        if seen.len() > LIMIT {
                            return Err(Error::ClassTooLarge(LIMIT));
                        }
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(seen.into_iter().collect())
    }
}

/// `G_D`: letters as vertices, an edge between distinct dependent letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceGraph {
    pub vertices: Vec<String>,
    /// Pairs `(i, j)` with `i < j`, indices into `vertices`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl DependenceGraph {
    pub fn new(vertices: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        DependenceGraph { vertices, edges }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.vertices.len()];
        for &(u, v) in &self.edges {
            adj[u].insert(v);
            adj[v].insert(u);
        }
        adj
    }
    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Same graph with edges named by vertex, for comparisons across vertex orders.
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (self.vertices[u].clone(), self.vertices[v].clone());
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect()
    }
}

/// Rooted tree over the processes of an alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessTree {
    root: Proc,
    parent: Vec<Option<Proc>>,
    children: Vec<Vec<Proc>>,
    depth: Vec<usize>,
}

impl ProcessTree {
    /// Build from a parent map over `n` nodes.
    pub fn from_parents(root: Proc, parent: Vec<Option<Proc>>) -> Result<Self> {
        let n = parent.len();
        if root >= n || parent[root].is_some() {
            return Err(Error::input("tree.root", "root must exist and have no parent"));
        }
        let mut children = vec![Vec::new(); n];
        for (v, par) in parent.iter().enumerate() {
            match par {
                Some(u) if *u >= n => return Err(Error::input("tree.edges", "parent out of range")),
                Some(u) => children[*u].push(v),
                None if v != root => {
                    return Err(Error::input("tree.edges", format!("node {v} has no parent")));
                }
                None => {}
            }
        }
        for c in children.iter_mut() {
            c.sort_unstable();
        }
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                stack.push(c);
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(Error::input("tree.edges", "parent map is cyclic or disconnected"));
        }
        Ok(ProcessTree {
            root,
            parent,
            children,
            depth,
        })
    }

    /// Build from `(parent, child)` edges given by process name.
    pub fn from_edges(alphabet: &DistributedAlphabet, root: &str, edges: &[(String, String)]) -> Result<Self> {
        let n = alphabet.num_processes();
        let root = alphabet.process(root)?;
        let mut parent = vec![None; n];
        for (i, (u, v)) in edges.iter().enumerate() {
            let (u, v) = (alphabet.process(u)?, alphabet.process(v)?);
            if parent[v].is_some() {
                return Err(Error::input(format!("tree.edges[{i}]"), "node has two parents"));
            }
            parent[v] = Some(u);
        }
        ProcessTree::from_parents(root, parent)
    }

    pub fn root(&self) -> Proc {
        self.root
    }
    pub fn len(&self) -> usize {
        self.parent.len()
    }
    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
    pub fn parent(&self, p: Proc) -> Option<Proc> {
        self.parent[p]
    }
    pub fn children(&self, p: Proc) -> &[Proc] {
        &self.children[p]
    }
    pub fn depth(&self, p: Proc) -> usize {
        self.depth[p]
    }
    pub fn is_leaf(&self, p: Proc) -> bool {
        self.children[p].is_empty()
    }
    pub fn edges(&self) -> Vec<(Proc, Proc)> {
        (0..self.len()).filter_map(|v| self.parent[v].map(|u| (u, v))).collect()
    }
    /// Nodes of the subtree rooted at `p`.
    pub fn subtree(&self, p: Proc) -> Vec<Proc> {
        let mut out = vec![];
        let mut stack = vec![p];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().copied());
        }
        out.sort_unstable();
        out
    }
    pub fn is_ancestor_or_self(&self, anc: Proc, mut v: Proc) -> bool {
        loop {
            if v == anc {
                return true;
            }
            match self.parent[v] {
                Some(u) => v = u,
                None => return false,
            }
        }
    }
    /// Unique tree path from `u` to `v`, both ends included.
    pub fn path(&self, u: Proc, v: Proc) -> Vec<Proc> {
        let (mut a, mut b) = (u, v);
        let mut left = vec![];
        let mut right = vec![];
        while a != b {
            if self.depth[a] >= self.depth[b] {
                left.push(a);
                a = self.parent[a].expect("non-root");
            } else {
                right.push(b);
                b = self.parent[b].expect("non-root");
            }
        }
        left.push(a);
        left.extend(right.into_iter().rev());
        left
    }
    /// Same tree over the given subset of nodes after removing the leaf `leaf`,
    /// re-indexed by `map` (old index to new index).
    pub fn without_leaf(&self, leaf: Proc) -> (ProcessTree, Vec<Option<Proc>>) {
        let map: Vec<Option<Proc>> = {
            let mut next = 0;
            (0..self.len())
                .map(|p| {
                    if p == leaf {
                        None
                    } else {
                        next += 1;
                        Some(next - 1)
                    }
                })
                .collect()
        };
        let parent = (0..self.len())
            .filter(|&p| p != leaf)
            .map(|p| self.parent[p].map(|u| map[u].expect("leaf has no children")))
            .collect();
        let root = map[self.root].expect("leaf is not the root");
        (ProcessTree::from_parents(root, parent).expect("still a tree"), map)
    }
}

/// An alphabet paired with a rooted tree over its processes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub alphabet: DistributedAlphabet,
    pub tree: ProcessTree,
}

/// Per-letter and per-edge outcome of the tree-like check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// For each letter: `None` if its domain is connected, else a broken tree path
    /// between two domain members that leaves the domain.
    pub letters: Vec<(String, Option<Vec<String>>)>,
    /// For each tree edge `(parent, child)`: whether some letter covers it.
    pub edges: Vec<((String, String), bool)>,
}

impl ValidationReport {
    pub fn connectivity_ok(&self) -> bool {
        self.letters.iter().all(|(_, w)| w.is_none())
    }
    pub fn coverage_ok(&self) -> bool {
        self.edges.iter().all(|(_, ok)| *ok)
    }
    pub fn is_valid(&self) -> bool {
        self.connectivity_ok() && self.coverage_ok()
    }
}

impl Architecture {
    pub fn new(alphabet: DistributedAlphabet, tree: ProcessTree) -> Result<Self> {
        if tree.len() != alphabet.num_processes() {
            return Err(Error::input("tree", "tree nodes must equal the alphabet processes"));
        }
        Ok(Architecture { alphabet, tree })
    }

    /// Checks both tree-like conditions.
    ///
    /// A domain is connected iff exactly one of its members has its parent
    /// outside the domain (or is the root).
    pub fn validate(&self) -> ValidationReport {
        let al = &self.alphabet;
        let t = &self.tree;
        let mut letters = vec![];
        for a in al.letters() {
            let dom = al.domain(a);
            let tops: Vec<Proc> = dom
                .iter()
                .copied()
                .filter(|&p| t.parent(p).is_none_or(|q| !al.in_domain(a, q)))
                .collect();
            let witness = if tops.len() <= 1 {
                None
            } else {
                let path = t.path(tops[0], tops[1]);
                Some(path.iter().map(|&p| al.process_name(p).to_string()).collect())
            };
            letters.push((al.letter_name(a).to_string(), witness));
        }
        let edges = t
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let covered = al.letters().any(|a| al.in_domain(a, u) && al.in_domain(a, v));
                (
                    (al.process_name(u).to_string(), al.process_name(v).to_string()),
                    covered,
                )
            })
            .collect();
        ValidationReport { letters, edges }
    }

    pub fn is_tree_like(&self) -> bool {
        self.validate().is_valid()
    }

    pub(crate) fn ensure_tree_like(&self) -> Result<()> {
        let r = self.validate();
        if let Some((l, Some(path))) = r.letters.iter().find(|(_, w)| w.is_some()) {
            return Err(Error::input(
                "letters",
                format!("domain of `{l}` is not connected in the tree (path {})", path.join("-")),
            ));
        }
        if let Some(((u, v), _)) = r.edges.iter().find(|(_, ok)| !ok) {
            return Err(Error::input("tree.edges", format!("edge {u}-{v} is not covered by any letter")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::fig1;

    #[test]
    fn fig1_independence() {
        let arch = fig1();
        let al = &arch.alphabet;
        assert!(!al.independent_by_name("a1", "a3").unwrap());
        for a in al.letters() {
            assert!(!al.independent(a, a));
        }
        let g = al.dependence_graph();
        assert_eq!(g.edges.len(), 3);
        assert!(matches!(al.independent_by_name("a1", "zz"), Err(Error::UnknownLetter(_))));
    }

    #[test]
    fn disjoint_domains_are_independent() {
        let al = DistributedAlphabet::from_domains(&["p1", "p2"], &[("a", &["p1"]), ("b", &["p2"])]).unwrap();
        assert!(al.independent(0, 1));
        assert!(al.dependence_graph().edges.is_empty());
    }

    #[test]
    fn fig1_validates() {
        assert!(fig1().validate().is_valid());
    }

    #[test]
    fn perturbed_fig1_breaks_connectivity() {
        let arch = crate::examples::fig1_perturbed();
        let r = arch.validate();
        assert!(!r.is_valid());
        let (_, w) = r.letters.iter().find(|(l, _)| l == "a2").unwrap();
        assert_eq!(w.as_deref().unwrap(), ["p1", "p3", "p4"]);
    }

    #[test]
    fn single_process_all_local() {
        let al = DistributedAlphabet::from_domains(&["p"], &[("a", &["p"]), ("b", &["p"])]).unwrap();
        let tree = ProcessTree::from_parents(0, vec![None]).unwrap();
        assert!(Architecture::new(al, tree).unwrap().is_tree_like());
    }

    #[test]
    fn uncovered_edge_reported() {
        let al = DistributedAlphabet::from_domains(&["p", "q"], &[("a", &["p"]), ("b", &["q"])]).unwrap();
        let tree = ProcessTree::from_parents(0, vec![None, Some(0)]).unwrap();
        let r = Architecture::new(al, tree).unwrap().validate();
        assert!(r.connectivity_ok());
        assert!(!r.coverage_ok());
    }

    #[test]
    fn mismatched_tree_is_input_error() {
        let al = DistributedAlphabet::from_domains(&["p", "q"], &[("a", &["p", "q"])]).unwrap();
        let tree = ProcessTree::from_parents(0, vec![None]).unwrap();
        assert!(matches!(Architecture::new(al, tree), Err(Error::Input { .. })));
    }

    #[test]
    fn controllable_must_be_local() {
        let r = DistributedAlphabet::new(
            vec!["p".into(), "q".into()],
            vec![LetterSpec::new("a", &["p", "q"], true)],
        );
        assert!(r.is_err());
    }

    #[test]
    fn trace_closure_basic() {
        let al = DistributedAlphabet::from_domains(&["p1", "p2"], &[("a", &["p1"]), ("b", &["p2"])]).unwrap();
        let c = al.trace_closure(&[0, 1], 2).unwrap();
        assert_eq!(c.len(), 2);
        let al = DistributedAlphabet::from_domains(&["p1"], &[("a", &["p1"]), ("b", &["p1"])]).unwrap();
        assert_eq!(al.trace_closure(&[0, 1, 0], 3).unwrap().len(), 1);
        assert!(al.trace_closure(&[0, 1, 0], 2).is_err());
    }

    #[test]
    fn local_letters_of_client() {
        let plant = crate::examples::server_client(3);
        let al = &plant.aa.alphabet;
        let c1 = al.process("c1").unwrap();
        let names: Vec<&str> = al.local_letters(c1).into_iter().map(|a| al.letter_name(a)).collect();
        assert_eq!(names, ["p1_1", "p2_1"]);
        let s = al.process("s").unwrap();
        assert!(al.local_letters(s).is_empty());
    }
}
