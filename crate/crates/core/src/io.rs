//! JSON documents for every artifact, with field paths in error messages.
//!
//! Maps are `BTreeMap`s and arrays keep model order, so serialization is
//! deterministic.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::aa::AsyncAutomaton;
use crate::control::{Controller, LocalAcceptance, Plant};
use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::model::{Architecture, DependenceGraph, DistributedAlphabet, LetterSpec, ProcessTree};
use crate::parity::{Owner, ParityGame, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LetterDoc {
    pub id: String,
    pub domain: Vec<String>,
    #[serde(default)]
    pub controllable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub root: String,
    /// `[parent, child]` pairs.
    pub edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchDoc {
    pub processes: Vec<String>,
    pub letters: Vec<LetterDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfaDoc {
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    /// `[source, letter, target]` triples.
    pub transitions: Vec<[String; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub letter: String,
    /// Local states of the letter's domain, in domain order.
    pub from: Vec<String>,
    pub to: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessAcceptanceDoc {
    #[serde(rename = "final", default)]
    pub finals: Vec<String>,
    /// One priority per state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<BTreeMap<String, usize>>,
    /// A tuple per state, read as a conjunction of conditions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priorities: Option<BTreeMap<String, Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceDoc {
    #[serde(rename = "perProcess", default, skip_serializing_if = "Option::is_none")]
    pub per_process: Option<BTreeMap<String, ProcessAcceptanceDoc>>,
    /// Global acceptance of a distributed automaton: the DFA whose state,
    /// recombined over the process tree, must be accepting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdiam: Option<DfaDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AaDoc {
    pub processes: Vec<String>,
    pub letters: Vec<LetterDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeDoc>,
    pub states: BTreeMap<String, Vec<String>>,
    pub initial: BTreeMap<String, String>,
    pub transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<AcceptanceDoc>,
    /// Controller state to plant state, per process.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<BTreeMap<String, BTreeMap<String, String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OwnerDoc {
    System,
    Environment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionDoc {
    pub name: String,
    pub owner: OwnerDoc,
    pub priority: usize,
    /// For dead ends: the winner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<OwnerDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDoc {
    pub positions: Vec<PositionDoc>,
    pub edges: Vec<[String; 2]>,
    pub initial: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub winner: BTreeMap<String, OwnerDoc>,
    pub strategy: BTreeMap<String, String>,
}

/// Parses a JSON document; errors carry the path of the offending field.
pub fn parse<T: DeserializeOwned>(source: &str, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { source.to_string() } else { format!("{source}:{path}") };
        Error::input(path, e.into_inner().to_string())
    })
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(path.display().to_string(), e.to_string()))?;
    parse(&path.display().to_string(), &text)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn letters_doc(al: &DistributedAlphabet) -> Vec<LetterDoc> {
    al.letter_specs()
        .into_iter()
        .map(|s| LetterDoc { id: s.id, domain: s.domain, controllable: s.controllable })
        .collect()
}

fn tree_doc(al: &DistributedAlphabet, t: &ProcessTree) -> TreeDoc {
    TreeDoc {
        root: al.process_name(t.root()).to_string(),
        edges: t
            .edges()
            .into_iter()
            .map(|(u, v)| [al.process_name(u).to_string(), al.process_name(v).to_string()])
            .collect(),
    }
}

fn alphabet_of(processes: &[String], letters: &[LetterDoc]) -> Result<DistributedAlphabet> {
    let specs = letters
        .iter()
        .map(|l| LetterSpec { id: l.id.clone(), domain: l.domain.clone(), controllable: l.controllable })
        .collect();
    DistributedAlphabet::new(processes.to_vec(), specs)
}

fn tree_of(al: &DistributedAlphabet, t: &TreeDoc) -> Result<ProcessTree> {
    let edges: Vec<(String, String)> = t.edges.iter().map(|[u, v]| (u.clone(), v.clone())).collect();
    ProcessTree::from_edges(al, &t.root, &edges)
}

impl ArchDoc {
    pub fn alphabet(&self) -> Result<DistributedAlphabet> {
        alphabet_of(&self.processes, &self.letters)
    }

    /// The architecture; the tree is required.
    pub fn architecture(&self) -> Result<Architecture> {
        let al = self.alphabet()?;
        let t = self.tree.as_ref().ok_or_else(|| Error::input("tree", "missing process tree"))?;
        let tree = tree_of(&al, t)?;
        Architecture::new(al, tree)
    }

    pub fn from_alphabet(al: &DistributedAlphabet, tree: Option<&ProcessTree>) -> Self {
        ArchDoc {
            processes: al.process_names().to_vec(),
            letters: letters_doc(al),
            tree: tree.map(|t| tree_doc(al, t)),
        }
    }

    pub fn from_architecture(arch: &Architecture) -> Self {
        Self::from_alphabet(&arch.alphabet, Some(&arch.tree))
    }
}

impl DfaDoc {
    pub fn from_dfa(dfa: &Dfa) -> Self {
        let al = dfa.alphabet();
        let mut transitions = vec![];
        for s in 0..dfa.num_states() {
            for a in al.letters() {
                if let Some(t) = dfa.step(s, a) {
                    transitions.push([
                        dfa.state_name(s).to_string(),
                        al.letter_name(a).to_string(),
                        dfa.state_name(t).to_string(),
                    ]);
                }
            }
        }
        DfaDoc {
            states: dfa.state_names().to_vec(),
            initial: dfa.state_name(dfa.initial()).to_string(),
            accepting: (0..dfa.num_states())
                .filter(|&s| dfa.is_accepting(s))
                .map(|s| dfa.state_name(s).to_string())
                .collect(),
            transitions,
        }
    }

    pub fn dfa(&self, alphabet: &DistributedAlphabet) -> Result<Dfa> {
        let states: Vec<&str> = self.states.iter().map(String::as_str).collect();
        let accepting: Vec<&str> = self.accepting.iter().map(String::as_str).collect();
        let triples: Vec<(&str, &str, &str)> =
            self.transitions.iter().map(|[s, a, t]| (s.as_str(), a.as_str(), t.as_str())).collect();
        Dfa::from_triples(alphabet.clone(), &states, &self.initial, &accepting, &triples)
    }
}

impl GraphDoc {
    pub fn from_graph(g: &DependenceGraph) -> Self {
        GraphDoc { vertices: g.vertices.clone(), edges: g.named_edges().into_iter().map(|(u, v)| [u, v]).collect() }
    }

    pub fn graph(&self) -> Result<DependenceGraph> {
        let index = |name: &str, path: String| -> Result<usize> {
            self.vertices.iter().position(|v| v == name).ok_or_else(|| Error::input(path, format!("unknown vertex `{name}`")))
        };
        let mut edges = vec![];
        for (i, [u, v]) in self.edges.iter().enumerate() {
            let (a, b) = (index(u, format!("edges[{i}][0]"))?, index(v, format!("edges[{i}][1]"))?);
            if a == b {
                return Err(Error::input(format!("edges[{i}]"), "self-loop"));
            }
            edges.push((a.min(b), a.max(b)));
        }
        Ok(DependenceGraph::new(self.vertices.clone(), edges))
    }
}

fn state_of(aa: &AsyncAutomaton, p: usize, name: &str, path: impl Fn() -> String) -> Result<usize> {
    aa.state_index(p, name).map_err(|_| Error::input(path(), format!("unknown state `{name}`")))
}

impl AaDoc {
    pub fn from_aa(aa: &AsyncAutomaton) -> Self {
        let al = &aa.alphabet;
        let states = al.processes().map(|p| (al.process_name(p).to_string(), aa.states[p].clone())).collect();
        let initial = al
            .processes()
            .map(|p| (al.process_name(p).to_string(), aa.states[p][aa.initial[p]].clone()))
            .collect();
        let transitions = aa
            .sorted_transitions()
            .into_iter()
            .map(|(a, f, t)| {
                let dom = al.domain(a);
                let names = |v: &[usize]| dom.iter().zip(v).map(|(&p, &s)| aa.states[p][s].clone()).collect();
                TransitionDoc { letter: al.letter_name(a).to_string(), from: names(&f), to: names(&t) }
            })
            .collect();
        AaDoc {
            processes: al.process_names().to_vec(),
            letters: letters_doc(al),
            tree: aa.tree.as_ref().map(|t| tree_doc(al, t)),
            states,
            initial,
            transitions,
            acceptance: None,
            projection: None,
        }
    }

    pub fn aa(&self) -> Result<AsyncAutomaton> {
        let al = alphabet_of(&self.processes, &self.letters)?;
        let tree = self.tree.as_ref().map(|t| tree_of(&al, t)).transpose()?;
        let mut states = vec![];
        let mut initial = vec![];
        for p in &self.processes {
            let list = self.states.get(p).ok_or_else(|| Error::input(format!("states.{p}"), "missing"))?;
            if list.is_empty() {
                return Err(Error::input(format!("states.{p}"), "a process needs at least one state"));
            }
            let init = self.initial.get(p).ok_or_else(|| Error::input(format!("initial.{p}"), "missing"))?;
            let i = list
                .iter()
                .position(|s| s == init)
                .ok_or_else(|| Error::input(format!("initial.{p}"), format!("unknown state `{init}`")))?;
            states.push(list.clone());
            initial.push(i);
        }
        let mut aa = AsyncAutomaton::new(al, tree, states, initial)?;
        for (i, t) in self.transitions.iter().enumerate() {
            let a = aa
                .alphabet
                .letter(&t.letter)
                .map_err(|_| Error::input(format!("transitions[{i}].letter"), format!("unknown letter `{}`", t.letter)))?;
            let dom = aa.alphabet.domain(a).to_vec();
            if t.from.len() != dom.len() || t.to.len() != dom.len() {
                return Err(Error::input(format!("transitions[{i}]"), "one state per domain process required"));
            }
            let mut from = vec![];
            let mut to = vec![];
            for (k, &p) in dom.iter().enumerate() {
                from.push(state_of(&aa, p, &t.from[k], || format!("transitions[{i}].from[{k}]"))?);
                to.push(state_of(&aa, p, &t.to[k], || format!("transitions[{i}].to[{k}]"))?);
            }
            aa.add_transition(a, from, to)
                .map_err(|e| Error::input(format!("transitions[{i}]"), e.to_string()))?;
        }
        Ok(aa)
    }

    pub fn from_plant(plant: &Plant) -> Self {
        let mut doc = AaDoc::from_aa(&plant.aa);
        let al = plant.alphabet();
        let mut per = BTreeMap::new();
        for p in al.processes() {
            let names = &plant.aa.states[p];
            let finals = (0..names.len()).filter(|&s| plant.is_final(p, s)).map(|s| names[s].clone()).collect();
            let single = plant.num_conditions(p) == 1;
            let entry = ProcessAcceptanceDoc {
                finals,
                priority: single.then(|| (0..names.len()).map(|s| (names[s].clone(), plant.priority(p, s)[0])).collect()),
                priorities: (!single)
                    .then(|| (0..names.len()).map(|s| (names[s].clone(), plant.priority(p, s).to_vec())).collect()),
            };
            per.insert(al.process_name(p).to_string(), entry);
        }
        doc.acceptance = Some(AcceptanceDoc { per_process: Some(per), tdiam: None });
        doc
    }

    pub fn plant(&self) -> Result<Plant> {
        let aa = self.aa()?;
        let per = self
            .acceptance
            .as_ref()
            .and_then(|a| a.per_process.as_ref())
            .ok_or_else(|| Error::input("acceptance.perProcess", "missing"))?;
        let al = &aa.alphabet;
        let mut finals = vec![];
        let mut priorities = vec![];
        for p in al.processes() {
            let name = al.process_name(p);
            let path = format!("acceptance.perProcess.{name}");
            let doc = per.get(name).ok_or_else(|| Error::input(&path, "missing"))?;
            let n = aa.num_states(p);
            let mut f = vec![false; n];
            for (i, s) in doc.finals.iter().enumerate() {
                f[state_of(&aa, p, s, || format!("{path}.final[{i}]"))?] = true;
            }
            let mut pr: Vec<Option<Vec<usize>>> = vec![None; n];
            match (&doc.priority, &doc.priorities) {
                (Some(m), None) => {
                    for (s, &v) in m {
                        pr[state_of(&aa, p, s, || format!("{path}.priority.{s}"))?] = Some(vec![v]);
                    }
                }
                (None, Some(m)) => {
                    for (s, v) in m {
                        pr[state_of(&aa, p, s, || format!("{path}.priorities.{s}"))?] = Some(v.clone());
                    }
                }
                _ => return Err(Error::input(&path, "exactly one of `priority` and `priorities` required")),
            }
            let pr = pr
                .into_iter()
                .enumerate()
                .map(|(s, v)| v.ok_or_else(|| Error::input(&path, format!("no priority for state `{}`", aa.states[p][s]))))
                .collect::<Result<Vec<_>>>()?;
            finals.push(f);
            priorities.push(pr);
        }
        Plant::new(aa, LocalAcceptance { finals, priorities })
    }

    pub fn from_controller(c: &Controller, plant: &Plant) -> Self {
        let mut doc = AaDoc::from_aa(&c.aa);
        let al = &c.aa.alphabet;
        doc.projection = Some(
            al.processes()
                .map(|p| {
                    let m = (0..c.aa.num_states(p))
                        .map(|x| (c.aa.states[p][x].clone(), plant.aa.states[p][c.projection[p][x]].clone()))
                        .collect();
                    (al.process_name(p).to_string(), m)
                })
                .collect(),
        );
        doc
    }

    pub fn controller(&self, plant: &Plant) -> Result<Controller> {
        let aa = self.aa()?;
        if aa.alphabet != *plant.alphabet() {
            return Err(Error::input("letters", "controller alphabet differs from the plant"));
        }
        let proj = self.projection.as_ref().ok_or_else(|| Error::input("projection", "missing"))?;
        let al = &aa.alphabet;
        let mut projection = vec![];
        for p in al.processes() {
            let name = al.process_name(p);
            let m = proj.get(name).ok_or_else(|| Error::input(format!("projection.{name}"), "missing"))?;
            let mut row = vec![];
            for x in 0..aa.num_states(p) {
                let cx = &aa.states[p][x];
                let path = format!("projection.{name}.{cx}");
                let s = m.get(cx).ok_or_else(|| Error::input(&path, "missing"))?;
                row.push(state_of(&plant.aa, p, s, || path.clone())?);
            }
            projection.push(row);
        }
        Ok(Controller { aa, projection })
    }
}

fn owner_doc(o: Owner) -> OwnerDoc {
    match o {
        Owner::System => OwnerDoc::System,
        Owner::Environment => OwnerDoc::Environment,
    }
}

fn owner_of(o: &OwnerDoc) -> Owner {
    match o {
        OwnerDoc::System => Owner::System,
        OwnerDoc::Environment => Owner::Environment,
    }
}

impl GameDoc {
    pub fn from_game(g: &ParityGame) -> Self {
        GameDoc {
            positions: (0..g.len())
                .map(|v| PositionDoc {
                    name: g.names[v].clone(),
                    owner: owner_doc(g.owner[v]),
                    priority: g.priority[v],
                    terminal: g.terminal[v].map(|w| owner_doc(if w { Owner::System } else { Owner::Environment })),
                })
                .collect(),
            edges: (0..g.len())
                .flat_map(|v| g.succ[v].iter().map(move |&w| [g.names[v].clone(), g.names[w].clone()]))
                .collect(),
            initial: g.names[g.initial].clone(),
        }
    }

    pub fn game(&self) -> Result<ParityGame> {
        let index: BTreeMap<&str, usize> = self.positions.iter().enumerate().map(|(i, p)| (p.name.as_str(), i)).collect();
        if index.len() != self.positions.len() {
            return Err(Error::input("positions", "duplicate position name"));
        }
        let find = |name: &str, path: String| index.get(name).copied().ok_or_else(|| Error::input(path, format!("unknown position `{name}`")));
        let mut succ = vec![vec![]; self.positions.len()];
        for (i, [u, v]) in self.edges.iter().enumerate() {
            let u = find(u, format!("edges[{i}][0]"))?;
            succ[u].push(find(v, format!("edges[{i}][1]"))?);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        let g = ParityGame {
            names: self.positions.iter().map(|p| p.name.clone()).collect(),
            owner: self.positions.iter().map(|p| owner_of(&p.owner)).collect(),
            priority: self.positions.iter().map(|p| p.priority).collect(),
            terminal: self.positions.iter().map(|p| p.terminal.as_ref().map(|w| owner_of(w) == Owner::System)).collect(),
            succ,
            initial: find(&self.initial, "initial".into())?,
        };
        g.validate()?;
        Ok(g)
    }
}

impl SolutionDoc {
    pub fn from_solution(g: &ParityGame, sol: &Solution) -> Self {
        SolutionDoc {
            winner: (0..g.len()).map(|v| (g.names[v].clone(), owner_doc(sol.winner[v]))).collect(),
            strategy: (0..g.len())
                .filter_map(|v| sol.strategy[v].map(|w| (g.names[v].clone(), g.names[w].clone())))
                .collect(),
        }
    }
}
