//! Conjunctions of max-parity conditions as a single parity condition.
//!
//! Each condition `j` with priorities below `p_j` is the Streett condition
//! with one pair per odd `o < p_j`: seeing `o` infinitely often requires
//! seeing something larger infinitely often. The record is a permutation of
//! all pairs. Reading a tuple moves every pair whose larger side was seen to
//! the end; within a condition pairs stay sorted by decreasing `o`, so the
//! record is a shuffle of per-condition sequences.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A pair `(condition, odd priority)`.
pub type Pair = (usize, usize);

#[derive(Debug, Clone)]
pub struct IarAutomaton {
    /// Number of priorities of each condition.
    pub counts: Vec<usize>,
    /// Records in discovery order; state `0` is initial.
    pub records: Vec<Vec<Pair>>,
    index: HashMap<Vec<Pair>, usize>,
}

impl IarAutomaton {
    pub fn num_pairs(&self) -> usize {
        self.records.first().map_or(0, Vec::len)
    }

    pub fn num_states(&self) -> usize {
        self.records.len()
    }

    /// Largest priority the automaton can emit.
    pub fn max_output(&self) -> usize {
        if self.counts.len() == 1 {
            self.counts[0].saturating_sub(1)
        } else {
            2 * self.num_pairs()
        }
    }

    /// Reads one priority tuple; returns the next state and the emitted priority.
    pub fn step(&mut self, state: usize, tuple: &[usize]) -> (usize, usize) {
        if self.counts.len() == 1 {
            return (0, tuple[0]);
        }
        let (next, out) = transition(&self.records[state], tuple);
        let n = self.records.len();
        let id = *self.index.entry(next.clone()).or_insert(n);
        if id == n {
            self.records.push(next);
        }
        (id, out)
    }

    /// Every reachable record, by exploring all tuples.
    pub fn complete(&mut self) {
        let tuples = all_tuples(&self.counts);
        let mut i = 0;
        while i < self.records.len() {
            for t in &tuples {
                self.step(i, t);
            }
            i += 1;
        }
    }

    /// Emitted priorities along `stem·loop^ω`; true iff the largest one seen
    /// infinitely often is even.
    pub fn accepts_lasso(&mut self, stem: &[Vec<usize>], cycle: &[Vec<usize>]) -> bool {
        let mut q = 0;
        for t in stem {
            q = self.step(q, t).0;
        }
        // Iterate the loop until the state at its start repeats.
        let mut starts: HashMap<usize, usize> = HashMap::new();
        let mut maxima = vec![];
        loop {
            if let Some(&k) = starts.get(&q) {
                let top = maxima[k..].iter().copied().max().unwrap_or(0);
                return top % 2 == 0;
            }
            starts.insert(q, maxima.len());
            let mut top = 0;
            for t in cycle {
                let (next, out) = self.step(q, t);
                top = top.max(out);
                q = next;
            }
            maxima.push(top);
        }
    }

    /// Canonical text of a record: pair list such as `1:3 0:1`.
    pub fn record_name(&self, state: usize) -> String {
        self.records[state]
            .iter()
            .map(|(j, o)| format!("{j}:{o}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One step of the record: `g` is the leftmost moved pair, `r` the leftmost
/// pair whose odd priority was seen. Emits `2(N-r)-1` if `r < g`, else `2(N-g)`.
fn transition(record: &[Pair], tuple: &[usize]) -> (Vec<Pair>, usize) {
    let n = record.len();
    let moved = |&(j, o): &Pair| o < tuple[j];
    let g = record.iter().position(moved).unwrap_or(n);
    let r = record.iter().position(|&(j, o)| tuple[j] == o).unwrap_or(n);
    let out = if r < g { 2 * (n - r) - 1 } else { 2 * (n - g) };
    let mut next: Vec<Pair> = record.iter().copied().filter(|p| !moved(p)).collect();
    next.extend(record.iter().copied().filter(moved));
    (next, out)
}

/// The conjunction automaton of conditions with the given priority counts.
pub fn iar_conjunction(counts: &[usize]) -> Result<IarAutomaton> {
    if counts.is_empty() {
        return Err(Error::input("conds", "at least one condition required"));
    }
    if counts.contains(&0) {
        return Err(Error::input("conds", "every condition needs at least one priority"));
    }
    let mut init = vec![];
    for (j, &c) in counts.iter().enumerate() {
        let mut odd: Vec<usize> = (0..c).filter(|o| o % 2 == 1).collect();
        odd.reverse();
        init.extend(odd.into_iter().map(|o| (j, o)));
    }
    Ok(IarAutomaton {
        counts: counts.to_vec(),
        index: HashMap::from([(init.clone(), 0)]),
        records: vec![init],
    })
}

/// All tuples with `t[j] < counts[j]`.
pub fn all_tuples(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &c in counts {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| (0..c).map(move |x| [t.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

/// The closed form `(p0+p)·p!·(p0+1)^p / ∏_{i>0} p_i!` with `p = Σ_{i>0} p_i`.
pub fn state_bound(counts: &[usize]) -> f64 {
    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    let p0 = counts[0];
    let p: usize = counts[1..].iter().sum();
    let denom: f64 = counts[1..].iter().map(|&c| fact(c)).product();
    (p0 + p) as f64 * fact(p) * ((p0 + 1) as f64).powi(p as i32) / denom
}

/// Max-parity verdict of one condition on a lasso.
pub fn lasso_accepts(cycle: &[Vec<usize>], cond: usize) -> bool {
    cycle.iter().map(|t| t[cond]).max().unwrap_or(0) % 2 == 0
}
