//! Local strategies of a short leaf, as decision trees.
//!
//! A strategy from `s` picks at most one controllable local action and, for
//! each local action it allows (its pick and every enabled uncontrollable
//! one), a strategy from the successor. Only words reachable under the
//! strategy itself are mapped, which makes the representation canonical.

use std::collections::HashMap;

use super::lshort::{lshort_bound, Shortness};
use super::Plant;
use crate::error::{Error, Result};
use crate::model::{Letter, Proc};

pub type StrategyId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyNode {
    pub choice: Option<Letter>,
    /// Allowed moves in letter order, each with the strategy that follows.
    pub children: Vec<(Letter, StrategyId)>,
}

/// Interned strategy nodes for one leaf of one plant.
#[derive(Debug, Clone)]
pub struct Strategies {
    pub leaf: Proc,
    pub nodes: Vec<StrategyNode>,
    index: HashMap<StrategyNode, StrategyId>,
    by_state: HashMap<usize, Vec<StrategyId>>,
    names: Vec<String>,
    eventually: HashMap<(usize, StrategyId), bool>,
}

impl Strategies {
    pub fn new(plant: &Plant, leaf: Proc) -> Result<Self> {
        if let Shortness::Cycle(c) = lshort_bound(plant, leaf)? {
            let al = plant.alphabet();
            return Err(Error::NotShort(
                al.process_name(leaf).to_string(),
                c.iter().map(|&s| plant.aa.states[leaf][s].clone()).collect(),
            ));
        }
        Ok(Strategies {
            leaf,
            nodes: vec![],
            index: HashMap::new(),
            by_state: HashMap::new(),
            names: vec![],
            eventually: HashMap::new(),
        })
    }

    fn intern(&mut self, plant: &Plant, node: StrategyNode) -> StrategyId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let al = plant.alphabet();
        let mut name = node.choice.map_or("_".to_string(), |a| al.letter_name(a).to_string());
        if !node.children.is_empty() {
            let parts: Vec<String> = node
                .children
                .iter()
                .map(|&(b, c)| format!("{}={}", al.letter_name(b), self.names[c]))
                .collect();
            name = format!("{name}[{}]", parts.join(","));
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.names.push(name);
        self.index.insert(node, id);
        id
    }

    /// Canonical serialization of the decision tree.
    pub fn name(&self, f: StrategyId) -> &str {
        &self.names[f]
    }

    /// Every strategy from `s`, ordered by choice and then by children.
    pub fn enumerate(&mut self, plant: &Plant, s: usize) -> Vec<StrategyId> {
        if let Some(v) = self.by_state.get(&s) {
            return v.clone();
        }
        let al = plant.alphabet();
        let locals = al.local_letters(self.leaf);
        let mut out = vec![];
        let picks = std::iter::once(None).chain(
            locals
                .iter()
                .copied()
                .filter(|&a| al.is_controllable(a) && plant.aa.local_step(s, a).is_some())
                .map(Some),
        );
        for choice in picks {
            let moves: Vec<(Letter, usize)> = locals
                .iter()
                .copied()
                .filter(|&b| !al.is_controllable(b) || Some(b) == choice)
                .filter_map(|b| plant.aa.local_step(s, b).map(|t| (b, t)))
                .collect();
            let options: Vec<Vec<StrategyId>> = moves.iter().map(|&(_, t)| self.enumerate(plant, t)).collect();
            let mut combos: Vec<Vec<StrategyId>> = vec![vec![]];
            for opts in &options {
                combos = combos
                    .into_iter()
                    .flat_map(|c| opts.iter().map(move |&o| [c.clone(), vec![o]].concat()))
                    .collect();
            }
            for combo in combos {
                let children = moves.iter().map(|&(b, _)| b).zip(combo).collect();
                out.push(self.intern(plant, StrategyNode { choice, children }));
            }
        }
        self.by_state.insert(s, out.clone());
        out
    }

    /// The strategy after move `b`, if `f` allows it.
    pub fn after(&self, f: StrategyId, b: Letter) -> Option<StrategyId> {
        self.nodes[f].children.iter().find(|&&(x, _)| x == b).map(|&(_, c)| c)
    }

    /// Every maximal local run from `s` allowed by `f` ends in a final state.
    pub fn eventually_final(&mut self, plant: &Plant, s: usize, f: StrategyId) -> bool {
        if let Some(&b) = self.eventually.get(&(s, f)) {
            return b;
        }
        let children = self.nodes[f].children.clone();
        let r = if children.is_empty() {
            plant.is_final(self.leaf, s)
        } else {
            children.iter().all(|&(b, g)| {
                let t = plant.aa.local_step(s, b).expect("allowed move is enabled");
                self.eventually_final(plant, t, g)
            })
        };
        self.eventually.insert((s, f), r);
        r
    }
}

/// All strategies of `leaf` from state `s`.
pub fn enumerate_local_strategies(plant: &Plant, leaf: Proc, s: usize) -> Result<(Strategies, Vec<StrategyId>)> {
    let mut st = Strategies::new(plant, leaf)?;
    let v = st.enumerate(plant, s);
    Ok((st, v))
}

/// Whether every maximal local run from `s` under `f` ends in a final state.
pub fn f_eventually_final(plant: &Plant, strategies: &mut Strategies, s: usize, f: StrategyId) -> bool {
    strategies.eventually_final(plant, s, f)
}
