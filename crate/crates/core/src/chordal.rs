//! Chordal recognition, clique trees, and the passage from triangulated
//! dependence graphs to tree-like architectures.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::model::{Architecture, DependenceGraph, DistributedAlphabet, LetterSpec, ProcessTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chordality {
    /// A perfect elimination ordering.
    Chordal(Vec<usize>),
    /// A chordless cycle of length at least four.
    ChordlessCycle(Vec<usize>),
}

impl Chordality {
    pub fn is_chordal(&self) -> bool {
        matches!(self, Chordality::Chordal(_))
    }
}

/// Lexicographic BFS; returns vertices in visit order.
pub fn lex_bfs(adj: &[BTreeSet<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut labels: Vec<Vec<usize>> = vec![vec![]; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for step in 0..n {
        // Largest label wins, smallest index on ties.
        let v = (0..n)
            .filter(|&v| !done[v])
            .max_by(|&x, &y| labels[x].cmp(&labels[y]).then(y.cmp(&x)))
            .expect("unvisited vertex");
        done[v] = true;
        order.push(v);
        for &u in &adj[v] {
            if !done[u] {
                labels[u].push(n - step);
            }
        }
    }
    order
}

/// True iff each vertex's later neighbours in `order` are pairwise adjacent.
pub fn is_peo(g: &DependenceGraph, order: &[usize]) -> bool {
    let adj = g.adjacency();
    let mut pos = vec![0; g.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    order.iter().all(|&v| {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        later
            .iter()
            .enumerate()
            .all(|(i, &x)| later[i + 1..].iter().all(|&y| adj[x].contains(&y)))
    })
}

pub fn is_chordal(g: &DependenceGraph) -> Chordality {
    let adj = g.adjacency();
    let mut peo = lex_bfs(&adj);
    peo.reverse();
    if is_peo(g, &peo) {
        return Chordality::Chordal(peo);
    }
    Chordality::ChordlessCycle(chordless_cycle(&adj).expect("non-chordal graph has a chordless cycle"))
}

/// For some `v` with non-adjacent neighbours `u`, `w`, a shortest `u`-`w` path
/// avoiding the rest of `N[v]` closes a chordless cycle through `v`.
fn chordless_cycle(adj: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    for v in 0..n {
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &u) in nb.iter().enumerate() {
            for &w in &nb[i + 1..] {
                if adj[u].contains(&w) {
                    continue;
                }
                let blocked: Vec<bool> = (0..n).map(|x| x == v || (adj[v].contains(&x) && x != u && x != w)).collect();
                if let Some(path) = bfs_path(adj, u, w, &blocked) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn bfs_path(adj: &[BTreeSet<usize>], from: usize, to: usize, blocked: &[bool]) -> Option<Vec<usize>> {
    let mut pred = vec![usize::MAX; adj.len()];
    pred[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            let mut path = vec![x];
            let mut y = x;
            while y != from {
                y = pred[y];
                path.push(y);
            }
            path.reverse();
            return Some(path);
        }
        for &y in &adj[x] {
            if !blocked[y] && pred[y] == usize::MAX {
                pred[y] = x;
                queue.push_back(y);
            }
        }
    }
    None
}

/// Maximal cliques of a chordal graph from its elimination ordering, sorted.
pub fn maximal_cliques(g: &DependenceGraph, peo: &[usize]) -> Vec<Vec<usize>> {
    let adj = g.adjacency();
    let mut pos = vec![0; g.len()];
    for (i, &v) in peo.iter().enumerate() {
        pos[v] = i;
    }
    let candidates: Vec<BTreeSet<usize>> = peo
        .iter()
        .map(|&v| {
            let mut c: BTreeSet<usize> = adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect();
            c.insert(v);
            c
        })
        .collect();
    let mut out: Vec<Vec<usize>> = candidates
        .iter()
        .enumerate()
        .filter(|(i, c)| {
            !candidates
                .iter()
                .enumerate()
                .any(|(j, d)| j != *i && c.is_subset(d) && (c.len() < d.len() || j < *i))
        })
        .map(|(_, c)| c.iter().copied().collect())
        .collect();
    out.sort();
    out
}

/// Cliques plus spanning-tree edges `(i, j)` between clique indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueTree {
    pub cliques: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl CliqueTree {
    /// Every vertex's cliques form a connected subtree.
    pub fn has_junction_property(&self, num_vertices: usize) -> bool {
        (0..num_vertices).all(|v| {
            let holders: Vec<usize> = (0..self.cliques.len()).filter(|&i| self.cliques[i].contains(&v)).collect();
            if holders.is_empty() {
                return true;
            }
            let inner = self
                .edges
                .iter()
                .filter(|(i, j)| holders.contains(i) && holders.contains(j))
                .count();
            inner + 1 == holders.len()
        })
    }
}

/// Maximum-weight spanning tree over clique intersections (Kruskal), ties
/// broken by the lexicographically smallest clique index pair.
pub fn clique_tree(g: &DependenceGraph) -> Result<CliqueTree> {
    let peo = match is_chordal(g) {
        Chordality::Chordal(p) => p,
        Chordality::ChordlessCycle(_) => return Err(Error::NotTriangulated),
    };
    let cliques = maximal_cliques(g, &peo);
    let mut cand = vec![];
    for i in 0..cliques.len() {
        for j in i + 1..cliques.len() {
            let w = cliques[i].iter().filter(|v| cliques[j].contains(v)).count();
            if w > 0 {
                cand.push((w, i, j));
            }
        }
    }
    cand.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut uf = UnionFind::new(cliques.len());
    let edges = cand
        .into_iter()
        .filter(|&(_, i, j)| uf.union(i, j))
        .map(|(_, i, j)| (i, j))
        .collect();
    Ok(CliqueTree { cliques, edges })
}

/// One process per maximal clique; a letter lives on the cliques containing it.
pub fn tca_from_dependence(g: &DependenceGraph) -> Result<Architecture> {
    if g.is_empty() || !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let ct = clique_tree(g)?;
    let k = ct.cliques.len();
    let procs: Vec<String> = (0..k).map(|i| format!("k{i}")).collect();
    let letters = g
        .vertices
        .iter()
        .enumerate()
        .map(|(v, name)| LetterSpec {
            id: name.clone(),
            domain: (0..k).filter(|&i| ct.cliques[i].contains(&v)).map(|i| procs[i].clone()).collect(),
            controllable: false,
        })
        .collect();
    let alphabet = DistributedAlphabet::new(procs, letters)?;
    let mut adj = vec![vec![]; k];
    for &(i, j) in &ct.edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut parent = vec![None; k];
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    Architecture::new(alphabet, ProcessTree::from_parents(0, parent)?)
}

/// Connected components of the dependence graph, each as a sub-alphabet.
pub fn forest_decompose(alphabet: &DistributedAlphabet) -> Vec<DistributedAlphabet> {
    components(alphabet)
        .iter()
        .map(|comp| alphabet.restrict(comp))
        .collect()
}

/// Letter indices of each dependence component, ordered by smallest letter.
pub fn components(alphabet: &DistributedAlphabet) -> Vec<Vec<usize>> {
    let n = alphabet.num_letters();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if !alphabet.independent(a, b) {
                uf.union(a, b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![];
    let mut slot = vec![usize::MAX; n];
    for a in 0..n {
        let r = uf.find(a);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(vec![]);
        }
        groups[slot[r]].push(a);
    }
    groups
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }
    /// Returns false if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DependenceGraph {
        DependenceGraph::new((0..n).map(|i| format!("v{i}")).collect(), edges.iter().copied())
    }

    #[test]
    fn triangle_and_square() {
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(is_chordal(&k3).is_chordal());
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        match is_chordal(&c4) {
            Chordality::ChordlessCycle(c) => {
                let mut s = c.clone();
                s.sort();
                assert_eq!(s, vec![0, 1, 2, 3]);
            }
            _ => panic!("C4 is not chordal"),
        }
    }

    #[test]
    fn fig1_graph_is_one_process() {
        let g = crate::examples::fig1().alphabet.dependence_graph();
        assert!(is_chordal(&g).is_chordal() && g.is_connected());
        let arch = tca_from_dependence(&g).unwrap();
        assert_eq!(arch.alphabet.num_processes(), 1);
        assert_eq!(arch.alphabet.dependence_graph(), g);
    }

    #[test]
    fn path_graph_two_cliques() {
        let g = DependenceGraph::new(vec!["a".into(), "b".into(), "c".into()], [(0, 1), (1, 2)]);
        let arch = tca_from_dependence(&g).unwrap();
        assert_eq!(arch.alphabet.num_processes(), 2);
        assert_eq!(arch.alphabet.domain(1).len(), 2);
        assert!(arch.is_tree_like());
        assert_eq!(arch.alphabet.dependence_graph(), g);
    }

    #[test]
    fn errors() {
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(tca_from_dependence(&c4).unwrap_err(), Error::NotTriangulated);
        let two = graph(2, &[]);
        assert_eq!(tca_from_dependence(&two).unwrap_err(), Error::NotConnected);
    }

    #[test]
    fn forest() {
        let al = DistributedAlphabet::from_domains(&["p", "q", "r"], &[("a", &["p"]), ("b", &["q"]), ("c", &["r"])]).unwrap();
        assert_eq!(forest_decompose(&al).len(), 3);
        let fig = crate::examples::fig1();
        assert_eq!(forest_decompose(&fig.alphabet).len(), 1);
    }

    #[test]
    fn junction_property_on_tree_of_triangles() {
        let g = graph(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (1, 3), (3, 4)]);
        let ct = clique_tree(&g).unwrap();
        assert_eq!(ct.cliques, vec![vec![0, 1, 2], vec![1, 2, 3], vec![3, 4]]);
        assert!(ct.has_junction_property(5));
    }
}
