//! Max-parity games (even wins for System), solved by the recursive
//! attractor algorithm, and the single-process endgame of synthesis.

use std::collections::VecDeque;

use crate::control::{Controller, Plant};
use crate::error::{Error, Result};
use crate::model::Letter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    System,
    Environment,
}

impl Owner {
    fn of_parity(d: usize) -> Owner {
        if d.is_multiple_of(2) {
            Owner::System
        } else {
            Owner::Environment
        }
    }
    pub fn opponent(self) -> Owner {
        match self {
            Owner::System => Owner::Environment,
            Owner::Environment => Owner::System,
        }
    }
}

/// A game arena; a position without successors must carry a terminal tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGame {
    pub names: Vec<String>,
    pub owner: Vec<Owner>,
    pub priority: Vec<usize>,
    pub succ: Vec<Vec<usize>>,
    /// `Some(true)`: System wins on reaching it; `Some(false)`: it loses.
    pub terminal: Vec<Option<bool>>,
    pub initial: usize,
}

impl ParityGame {
    pub fn len(&self) -> usize {
        self.owner.len()
    }
    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.priority.len() != n || self.succ.len() != n || self.terminal.len() != n || self.names.len() != n {
            return Err(Error::input("positions", "inconsistent position tables"));
        }
        if self.initial >= n {
            return Err(Error::input("initial", "initial position out of range"));
        }
        for v in 0..n {
            if self.succ[v].iter().any(|&w| w >= n) {
                return Err(Error::input(format!("edges[{v}]"), "target out of range"));
            }
            if self.succ[v].is_empty() != self.terminal[v].is_some() {
                return Err(Error::input(format!("positions[{v}]"), "terminal iff no successors"));
            }
        }
        Ok(())
    }

    /// Terminals become self-loops of priority 0 (won) or 1 (lost).
    fn normalized(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut succ = self.succ.clone();
        let mut pr = self.priority.clone();
        for v in 0..self.len() {
            if let Some(win) = self.terminal[v] {
                succ[v] = vec![v];
                pr[v] = if win { 0 } else { 1 };
            }
        }
        (succ, pr)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Owner>,
    /// For each non-terminal position owned by its winner, the chosen successor.
    pub strategy: Vec<Option<usize>>,
}

struct Arena {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    owner: Vec<Owner>,
    priority: Vec<usize>,
}

impl Arena {
    /// Attractor of `target` for `player` inside `live`, with attracting moves.
    fn attractor(&self, live: &[bool], target: &[bool], player: Owner, strat: &mut [Option<usize>]) -> Vec<bool> {
        let n = self.succ.len();
        let mut attr = target.to_vec();
        let mut count: Vec<usize> = (0..n)
            .map(|v| self.succ[v].iter().filter(|&&w| live[w]).count())
            .collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| attr[v]).collect();
        while let Some(w) = queue.pop_front() {
            for &v in &self.pred[w] {
                if !live[v] || attr[v] {
                    continue;
                }
                if self.owner[v] == player {
                    attr[v] = true;
                    strat[v] = Some(w);
                    queue.push_back(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        attr[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        attr
    }

    /// Returns, for each live position, the winner; strategies written to `strat`.
    fn zielonka(&self, live: &[bool], strat: &mut [Option<usize>]) -> Vec<Option<Owner>> {
        let n = self.succ.len();
        let mut out = vec![None; n];
        let Some(d) = (0..n).filter(|&v| live[v]).map(|v| self.priority[v]).max() else {
            return out;
        };
        let me = Owner::of_parity(d);
        let top: Vec<bool> = (0..n).map(|v| live[v] && self.priority[v] == d).collect();
        let a = self.attractor(live, &top, me, strat);
        let rest: Vec<bool> = (0..n).map(|v| live[v] && !a[v]).collect();
        let sub = self.zielonka(&rest, strat);
        let opp_wins: Vec<bool> = (0..n).map(|v| sub[v] == Some(me.opponent())).collect();
        if !opp_wins.iter().any(|&b| b) {
            for v in (0..n).filter(|&v| live[v]) {
                out[v] = Some(me);
                if top[v] && self.owner[v] == me {
                    strat[v] = self.succ[v].iter().copied().find(|&w| live[w]);
                }
            }
            return out;
        }
        let b = self.attractor(live, &opp_wins, me.opponent(), strat);
        let rest2: Vec<bool> = (0..n).map(|v| live[v] && !b[v]).collect();
        let sub2 = self.zielonka(&rest2, strat);
        for v in (0..n).filter(|&v| live[v]) {
            out[v] = if b[v] { Some(me.opponent()) } else { sub2[v] };
        }
        out
    }
}

/// Winning regions and positional strategies.
pub fn solve_parity_game(game: &ParityGame) -> Solution {
    let (succ, priority) = game.normalized();
    let n = game.len();
    let mut pred = vec![vec![]; n];
    for v in 0..n {
        for &w in &succ[v] {
            pred[w].push(v);
        }
    }
    let arena = Arena {
        succ,
        pred,
        owner: game.owner.clone(),
        priority,
    };
    let mut strat = vec![None; n];
    let win = arena.zielonka(&vec![true; n], &mut strat);
    let winner: Vec<Owner> = win.into_iter().map(|w| w.expect("every position decided")).collect();
    let strategy = (0..n)
        .map(|v| {
            if game.terminal[v].is_some() || game.owner[v] != winner[v] {
                None
            } else {
                strat[v]
            }
        })
        .collect();
    Solution { winner, strategy }
}

/// True iff, in the graph where `player` follows `choice` at its positions and
/// the opponent moves freely, every play from `start` stays in positions
/// outside which nothing is reachable and has a maximum of `player`'s parity.
fn one_player_wins(
    succ: &[Vec<usize>],
    priority: &[usize],
    owner: &[Owner],
    player: Owner,
    choice: &dyn Fn(usize) -> Option<usize>,
    start: usize,
) -> bool {
    let n = succ.len();
    let edges = |v: usize| -> Vec<usize> {
        if owner[v] == player {
            choice(v).into_iter().collect()
        } else {
            succ[v].clone()
        }
    };
    let mut reach = vec![false; n];
    reach[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        let es = edges(v);
        if es.is_empty() {
            return false;
        }
        for w in es {
            if !reach[w] {
                reach[w] = true;
                stack.push(w);
            }
        }
    }
    let bad_parity = |d: usize| Owner::of_parity(d) != player;
    for d in (0..n).filter(|&v| reach[v]).map(|v| priority[v]).filter(|&d| bad_parity(d)) {
        let keep: Vec<bool> = (0..n).map(|v| reach[v] && priority[v] <= d).collect();
        for v in (0..n).filter(|&v| keep[v] && priority[v] == d) {
            // v lies on a cycle inside `keep`?
            let mut seen = vec![false; n];
            let mut st: Vec<usize> = edges(v).into_iter().filter(|&w| keep[w]).collect();
            while let Some(x) = st.pop() {
                if x == v {
                    return false;
                }
                if !seen[x] {
                    seen[x] = true;
                    st.extend(edges(x).into_iter().filter(|&w| keep[w]));
                }
            }
        }
    }
    true
}

/// Checks that each player's strategy wins from every position of its region.
pub fn check_solution(game: &ParityGame, sol: &Solution) -> bool {
    let (succ, priority) = game.normalized();
    (0..game.len()).all(|v| {
        let player = sol.winner[v];
        let choice = |x: usize| {
            if game.terminal[x].is_some() {
                Some(x)
            } else {
                sol.strategy[x].filter(|w| succ[x].contains(w))
            }
        };
        one_player_wins(&succ, &priority, &game.owner, player, &choice, v)
    })
}

/// Winner per position by trying every positional System strategy.
pub fn brute_force_winners(game: &ParityGame) -> Vec<Owner> {
    let (succ, priority) = game.normalized();
    let n = game.len();
    let sys: Vec<usize> = (0..n).filter(|&v| game.owner[v] == Owner::System).collect();
    let mut wins = vec![false; n];
    let mut idx = vec![0usize; sys.len()];
    loop {
        let choice = |x: usize| -> Option<usize> {
            let k = sys.iter().position(|&s| s == x)?;
            succ[x].get(idx[k]).copied()
        };
        for (v, w) in wins.iter_mut().enumerate() {
            if !*w {
                *w = one_player_wins(&succ, &priority, &game.owner, Owner::System, &choice, v);
            }
        }
        let mut k = 0;
        loop {
            if k == sys.len() {
                return wins.into_iter().map(|w| if w { Owner::System } else { Owner::Environment }).collect();
            }
            idx[k] += 1;
            if idx[k] < succ[sys[k]].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// The position layout of [`to_parity_game`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    /// System picks a controllable letter, or none.
    Choose(usize),
    /// Environment fires the chosen letter or any enabled uncontrollable one.
    Respond(usize, Option<Letter>),
}

/// Game of a single-process plant with one parity condition.
pub fn to_parity_game(plant: &Plant) -> Result<(ParityGame, Vec<Position>)> {
    let al = plant.alphabet();
    if al.num_processes() != 1 {
        return Err(Error::input("plant", "parity game needs a single process"));
    }
    if plant.num_conditions(0) != 1 {
        return Err(Error::input("plant", "parity game needs exactly one condition"));
    }
    let n = plant.aa.num_states(0);
    let mut positions: Vec<Position> = (0..n).map(Position::Choose).collect();
    let mut sys_succ: Vec<Vec<usize>> = vec![];
    for s in 0..n {
        let mut out = vec![];
        for c in std::iter::once(None).chain(al.letters().filter(|&a| al.is_controllable(a)).map(Some)) {
            if c.is_some_and(|a| plant.aa.local_step(s, a).is_none()) {
                continue;
            }
            out.push(positions.len());
            positions.push(Position::Respond(s, c));
        }
        sys_succ.push(out);
    }
    let mut g = ParityGame {
        names: vec![],
        owner: vec![],
        priority: vec![],
        succ: vec![],
        terminal: vec![],
        initial: plant.aa.initial[0],
    };
    for (v, pos) in positions.iter().enumerate() {
        match *pos {
            Position::Choose(s) => {
                g.names.push(plant.aa.states[0][s].clone());
                g.owner.push(Owner::System);
                g.priority.push(plant.priority(0, s)[0]);
                g.succ.push(sys_succ[s].clone());
                g.terminal.push(None);
            }
            Position::Respond(s, c) => {
                let mut out: Vec<usize> = al
                    .letters()
                    .filter(|&a| !al.is_controllable(a) || Some(a) == c)
                    .filter_map(|a| plant.aa.local_step(s, a))
                    .collect();
                out.sort_unstable();
                out.dedup();
                let label = c.map_or("-".to_string(), |a| al.letter_name(a).to_string());
                g.names.push(format!("{}/{label}", plant.aa.states[0][s]));
                g.owner.push(Owner::Environment);
                g.priority.push(plant.priority(0, s)[0]);
                g.terminal.push(if out.is_empty() { Some(plant.is_final(0, s)) } else { None });
                g.succ.push(out);
            }
        }
        debug_assert_eq!(g.len(), v + 1);
    }
    Ok((g, positions))
}

/// Controllable letter chosen by the strategy at each plant state.
pub fn choices(game: &ParityGame, sol: &Solution, positions: &[Position]) -> Vec<Option<Letter>> {
    positions
        .iter()
        .enumerate()
        .filter_map(|(v, p)| match p {
            Position::Choose(s) => Some((*s, v)),
            _ => None,
        })
        .map(|(_, v)| {
            let target = if sol.winner[v] == Owner::System {
                sol.strategy[v]
            } else {
                game.succ[v].first().copied()
            };
            match target.map(|w| positions[w]) {
                Some(Position::Respond(_, c)) => c,
                _ => None,
            }
        })
        .collect()
}

/// Single-process controller enabling the chosen controllable letter only.
pub fn strategy_to_controller(game: &ParityGame, sol: &Solution, positions: &[Position], plant: &Plant) -> Result<Controller> {
    if sol.winner[game.initial] != Owner::System {
        return Err(Error::Refused("System does not win from the initial position".into()));
    }
    let pick = choices(game, sol, positions);
    let mut c = Controller::identity(plant);
    let al = plant.alphabet();
    for a in al.letters().filter(|&a| al.is_controllable(a)) {
        c.aa.delta[a].retain(|from, _| pick[from[0]] == Some(a));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(owner: &[Owner], priority: &[usize], succ: &[&[usize]]) -> ParityGame {
        ParityGame {
            names: (0..owner.len()).map(|i| i.to_string()).collect(),
            owner: owner.to_vec(),
            priority: priority.to_vec(),
            succ: succ.iter().map(|s| s.to_vec()).collect(),
            terminal: succ.iter().map(|s| if s.is_empty() { Some(false) } else { None }).collect(),
            initial: 0,
        }
    }

    #[test]
    fn self_loops() {
        let g = game(&[Owner::System], &[2], &[&[0]]);
        assert_eq!(solve_parity_game(&g).winner, vec![Owner::System]);
        let g = game(&[Owner::System], &[1], &[&[0]]);
        assert_eq!(solve_parity_game(&g).winner, vec![Owner::Environment]);
    }

    #[test]
    fn choice_matters() {
        use Owner::*;
        let g = game(&[System, Environment, Environment], &[0, 1, 2], &[&[1, 2], &[0], &[0]]);
        let sol = solve_parity_game(&g);
        assert_eq!(sol.winner, vec![System; 3]);
        assert_eq!(sol.strategy[0], Some(2));
        assert!(check_solution(&g, &sol));
        assert_eq!(brute_force_winners(&g), sol.winner);
    }

    #[test]
    fn terminals() {
        use Owner::*;
        let mut g = game(&[Environment, System], &[1, 0], &[&[1], &[]]);
        g.terminal[1] = Some(true);
        assert_eq!(solve_parity_game(&g).winner, vec![System, System]);
        g.terminal[1] = Some(false);
        assert_eq!(solve_parity_game(&g).winner, vec![Environment, Environment]);
    }
}
