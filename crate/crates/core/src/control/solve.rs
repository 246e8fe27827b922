//! Synthesis for tree-like plants: remove leaves bottom-up, then solve the
//! remaining single-process parity game and lift the strategy back.

use std::collections::{HashMap, VecDeque};

use super::eliminate::{reconstruct_controller, remove_leaf, RemoveLeafInfo};
use super::lshort::{lift_lshort, lshort_bound, make_lshort, LshortInfo, Shortness};
use super::{verify_winning_capped, Controller, LocalAcceptance, Plant, Verdict, DEFAULT_CAP};
use crate::aa::AsyncAutomaton;
use crate::error::{Error, Result};
use crate::model::Proc;
use crate::parity::{iar_conjunction, solve_parity_game, strategy_to_controller, to_parity_game, Owner};

/// Renumbers each condition of `p` onto `0..k`, merging neighbouring used
/// priorities of equal parity. The verdict of every run is unchanged.
pub fn compress_priorities(plant: &Plant, p: Proc) -> Plant {
    let mut out = plant.clone();
    for k in 0..plant.num_conditions(p) {
        let mut used: Vec<usize> = plant.acc.priorities[p].iter().map(|t| t[k]).collect();
        used.sort_unstable();
        used.dedup();
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut rank = 0;
        for (i, &v) in used.iter().enumerate() {
            if i == 0 {
                rank = v % 2;
            } else if v % 2 != used[i - 1] % 2 {
                rank += 1;
            }
            map.insert(v, rank);
        }
        for t in &mut out.acc.priorities[p] {
            t[k] = map[&t[k]];
        }
    }
    out
}

/// Replaces the conditions of `p` by one, through the index appearance record
/// product. Returns the new plant and, per new state of `p`, the old state.
pub fn compile_conditions(plant: &Plant, p: Proc) -> Result<(Plant, Vec<usize>)> {
    let n = plant.aa.num_states(p);
    if plant.num_conditions(p) <= 1 {
        return Ok((plant.clone(), (0..n).collect()));
    }
    let counts: Vec<usize> = (0..plant.num_conditions(p)).map(|k| plant.max_priority(p, k) + 1).collect();
    let mut iar = iar_conjunction(&counts)?;
    let al = plant.alphabet();
    let old = &plant.aa;

    // Transitions of p, indexed by p's state.
    let mut by_state: Vec<Vec<(usize, Vec<usize>, Vec<usize>)>> = vec![vec![]; n];
    for (a, f, t) in old.sorted_transitions() {
        if let Some(k) = al.domain_position(a, p) {
            by_state[f[k]].push((a, f, t));
        }
    }

    let mut ids: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut states: Vec<(usize, usize, usize)> = vec![];
    let mut queue = VecDeque::new();
    let mut rows = vec![];
    let s0 = old.initial[p];
    let (q0, o0) = iar.step(0, plant.priority(p, s0));
    ids.insert((s0, q0, o0), 0);
    states.push((s0, q0, o0));
    queue.push_back(0);
    while let Some(i) = queue.pop_front() {
        let (s, q, _) = states[i];
        for (a, f, t) in &by_state[s] {
            let k = al.domain_position(*a, p).expect("p in domain");
            let (q2, o2) = iar.step(q, plant.priority(p, t[k]));
            let key = (t[k], q2, o2);
            let j = match ids.get(&key) {
                Some(&j) => j,
                None => {
                    if states.len() >= DEFAULT_CAP {
                        return Err(Error::Unsupported(format!("condition product exceeds {DEFAULT_CAP} states")));
                    }
                    let j = states.len();
                    ids.insert(key, j);
                    states.push(key);
                    queue.push_back(j);
                    j
                }
            };
            rows.push((*a, k, f.clone(), t.clone(), i, j));
        }
    }

    let mut names = plant.aa.states.clone();
    names[p] = states
        .iter()
        .map(|&(s, q, o)| format!("{}#{}#{o}", old.states[p][s], iar.record_name(q)))
        .collect();
    let mut initial = old.initial.clone();
    initial[p] = 0;
    let mut aa = AsyncAutomaton::new(al.clone(), old.tree.clone(), names, initial)?;
    for (a, f, t) in old.sorted_transitions() {
        if !al.in_domain(a, p) {
            aa.add_transition(a, f, t)?;
        }
    }
    for (a, k, mut f, mut t, i, j) in rows {
        f[k] = i;
        t[k] = j;
        aa.add_transition(a, f, t)?;
    }
    let mut acc = plant.acc.clone();
    acc.finals[p] = states.iter().map(|&(s, _, _)| plant.is_final(p, s)).collect();
    acc.priorities[p] = states.iter().map(|&(_, _, o)| vec![o]).collect();
    let base = states.iter().map(|&(s, _, _)| s).collect();
    Ok((Plant::new(aa, acc)?, base))
}

/// One reduction applied during synthesis, with what is needed to undo it.
#[derive(Debug, Clone)]
enum Stage {
    Lshort(Plant, LshortInfo),
    Remove(Plant, RemoveLeafInfo, Plant),
    /// Kept old local states per process.
    Prune(Vec<Vec<usize>>),
    /// A state-refined process: old state of each new state.
    Refine(Proc, Vec<usize>),
}

/// Sizes observed while solving.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub leaves_removed: usize,
    pub lshort_applied: usize,
    /// Local states of the last remaining process before the game.
    pub final_states: usize,
    pub game_positions: usize,
    pub controller_states: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// A winning controller, or `None` when none exists.
    pub controller: Option<Controller>,
    pub stats: SolveStats,
}

/// Composes a projection with a per-process map onto older states.
fn refine_projection(c: &mut Controller, p: Proc, base: &[usize]) {
    for x in &mut c.projection[p] {
        *x = base[*x];
    }
}

/// Prunes when the global exploration fits under the cap.
fn try_prune(cur: &mut Plant, stages: &mut Vec<Stage>, cap: usize) -> Result<()> {
    match cur.prune(cap) {
        Ok((pruned, kept)) => {
            *cur = pruned;
            stages.push(Stage::Prune(kept));
            Ok(())
        }
        Err(Error::Unsupported(_)) => Ok(()),
        Err(e) => Err(e),
    }
}

/// Decides whether a winning controller exists and builds one.
pub fn solve_control(plant: &Plant) -> Result<SolveOutcome> {
    solve_control_capped(plant, DEFAULT_CAP)
}

pub fn solve_control_capped(plant: &Plant, cap: usize) -> Result<SolveOutcome> {
    plant.architecture()?.ensure_tree_like()?;
    let al = plant.alphabet();
    if let Some(a) = al.letters().find(|&a| al.is_controllable(a) && al.domain(a).len() != 1) {
        return Err(Error::input(format!("alphabet.letters.{}", al.letter_name(a)), "controllable letters must be local"));
    }
    let mut stats = SolveStats::default();
    let mut stages: Vec<Stage> = vec![];
    let mut cur = plant.clone();
    for p in al.processes() {
        cur = compress_priorities(&cur, p);
    }
    try_prune(&mut cur, &mut stages, cap)?;

    while cur.alphabet().num_processes() > 1 {
        let tree = cur.tree().expect("checked tree-like").clone();
        let cal = cur.alphabet().clone();
        let parent = cal
            .processes()
            .filter(|&q| !tree.is_leaf(q))
            .max_by_key(|&q| (tree.depth(q), std::cmp::Reverse(q)))
            .expect("a non-leaf exists");
        let parent_name = cal.process_name(parent).to_string();
        let leaves: Vec<String> = tree.children(parent).iter().map(|&l| cal.process_name(l).to_string()).collect();
        for name in leaves {
            let l = cur.alphabet().process(&name)?;
            if let Shortness::Cycle(_) = lshort_bound(&cur, l)? {
                let (next, info) = make_lshort(&cur, l)?;
                stages.push(Stage::Lshort(cur, info));
                cur = next;
                stats.lshort_applied += 1;
            }
            let (next, info) = remove_leaf(&cur, l)?;
            let before = std::mem::replace(&mut cur, next);
            stages.push(Stage::Remove(before, info, cur.clone()));
            stats.leaves_removed += 1;
            let p = cur.alphabet().process(&parent_name)?;
            cur = compress_priorities(&cur, p);
            try_prune(&mut cur, &mut stages, cap)?;
        }
        let p = cur.alphabet().process(&parent_name)?;
        if cur.num_conditions(p) > 1 {
            let (next, base) = compile_conditions(&cur, p)?;
            cur = next;
            stages.push(Stage::Refine(p, base));
            try_prune(&mut cur, &mut stages, cap)?;
        }
    }
    if cur.num_conditions(0) != 1 {
        let (next, base) = if cur.num_conditions(0) == 0 {
            let mut next = cur.clone();
            next.acc.priorities[0] = vec![vec![0]; cur.aa.num_states(0)];
            (next, (0..cur.aa.num_states(0)).collect())
        } else {
            compile_conditions(&cur, 0)?
        };
        cur = next;
        stages.push(Stage::Refine(0, base));
    }
    stats.final_states = cur.aa.num_states(0);
    let (game, positions) = to_parity_game(&cur)?;
    stats.game_positions = game.len();
    let sol = solve_parity_game(&game);
    if sol.winner[game.initial] != Owner::System {
        return Ok(SolveOutcome { controller: None, stats });
    }
    let mut c = strategy_to_controller(&game, &sol, &positions, &cur)?;
    // Keep the controller small before lifting.
    c = restrict_controller(&c, cap)?;
    for stage in stages.into_iter().rev() {
        c = match stage {
            Stage::Lshort(before, info) => lift_lshort(&before, &info, &c)?,
            Stage::Remove(before, info, after) => reconstruct_controller(&before, &info, &after, &c)?,
            Stage::Prune(kept) => {
                for (p, ks) in kept.iter().enumerate() {
                    refine_projection(&mut c, p, ks);
                }
                c
            }
            Stage::Refine(p, base) => {
                refine_projection(&mut c, p, &base);
                c
            }
        };
    }
    stats.controller_states = c.aa.total_states();
    match verify_winning_capped(plant, &c, cap)? {
        Verdict::Winning => Ok(SolveOutcome { controller: Some(c), stats }),
        Verdict::Losing(cex) => Err(Error::Integrity(format!(
            "synthesized controller loses: {} (stem {:?}, cycle {:?})",
            cex.reason,
            al.word_names(&cex.stem),
            al.word_names(&cex.cycle)
        ))),
    }
}

/// Drops controller states unreachable in the controller itself.
fn restrict_controller(c: &Controller, cap: usize) -> Result<Controller> {
    let acc = LocalAcceptance {
        finals: c.aa.states.iter().map(|s| vec![false; s.len()]).collect(),
        priorities: c.aa.states.iter().map(|s| vec![vec![]; s.len()]).collect(),
    };
    let (pruned, kept) = Plant::new(c.aa.clone(), acc)?.prune(cap)?;
    let projection = kept
        .iter()
        .enumerate()
        .map(|(p, ks)| ks.iter().map(|&x| c.projection[p][x]).collect())
        .collect();
    Ok(Controller { aa: pruned.aa, projection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{check_controller, verify_winning};
    use crate::examples::server_client;

    #[test]
    fn compression_keeps_parity_order() {
        let mut plant = server_client(1);
        plant.acc.priorities[0] = vec![vec![3], vec![5], vec![8], vec![10]];
        let c = compress_priorities(&plant, 0);
        let got: Vec<usize> = c.acc.priorities[0].iter().map(|t| t[0]).collect();
        assert_eq!(got, vec![1, 1, 2, 2]);
    }

    #[test]
    fn compiled_plant_has_one_condition() {
        let mut plant = server_client(1);
        for t in &mut plant.acc.priorities[0] {
            t.push(t[0] % 2);
        }
        let (c, base) = compile_conditions(&plant, 0).unwrap();
        assert_eq!(c.num_conditions(0), 1);
        assert_eq!(base.len(), c.aa.num_states(0));
        let ctrl = Controller { projection: vec![base, (0..c.aa.num_states(1)).collect()], aa: c.aa.clone() };
        assert_eq!(check_controller(&plant, &ctrl).unwrap(), None);
    }

    #[test]
    fn server_client_solved() {
        // A lone client cannot serve both of the server's requests.
        assert!(solve_control(&server_client(1)).unwrap().controller.is_none());
        for n in 2..=3 {
            let plant = server_client(n);
            let out = solve_control(&plant).unwrap();
            let c = out.controller.expect("winning controller exists");
            assert_eq!(check_controller(&plant, &c).unwrap(), None);
            assert!(verify_winning(&plant, &c).unwrap().is_winning());
        }
    }
}
