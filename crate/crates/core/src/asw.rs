//! Almost-sure winning regions of reachability games.
//!
//! In a deterministic turn-based game the almost-sure winning region coincides
//! with the sure-winning region, which is the least fixed point
//!
//! ```text
//! Z_0     = F
//! Z_{k+1} = Z_k ∪ Pre1(Z_k) ∪ Pre2(Z_k)
//! ```
//!
//! computed here with a backward worklist. Levels record the iteration at
//! which each state joined, so they agree with the set-by-set iteration.
//!
//! Dead ends: a P2 state with no defined transition is *not* attracted. A run
//! stuck outside `F` never visits `F`, so it is won by P2 whoever is stuck.

use std::collections::{BTreeMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::game::{ActionId, GameGraph, Player, StateId};

/// `Win1(X)` and `Win2(X)` of a (possibly restricted) game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinRegions {
    pub win1: FixedBitSet,
    pub win2: FixedBitSet,
    /// Attractor iteration at which a state entered `Win1`; `None` on `Win2`.
    pub attractor_levels: Vec<Option<u32>>,
}

impl WinRegions {
    pub fn level(&self, s: StateId) -> Option<u32> {
        self.attractor_levels[s.index()]
    }

    pub fn is_win1(&self, s: StateId) -> bool {
        self.win1.contains(s.index())
    }

    pub fn is_win2(&self, s: StateId) -> bool {
        self.win2.contains(s.index())
    }

    /// Number of attractor iterations, i.e. the largest level plus one.
    pub fn depth(&self) -> u32 {
        self.attractor_levels.iter().flatten().max().map_or(0, |m| m + 1)
    }
}

/// Solves the reachability game for P1.
pub fn asw(game: &GameGraph) -> WinRegions {
    let n = game.num_states();
    let pred = game.predecessors();
    let mut levels: Vec<Option<u32>> = vec![None; n];
    let mut pending: Vec<usize> = game.states().map(|s| game.succ(s).len()).collect();
    let mut queue = VecDeque::new();

    for s in game.states() {
        if game.is_final(s) {
            levels[s.index()] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(t) = queue.pop_front() {
        let next = levels[t.index()].expect("queued states have a level") + 1;
        for &(_, s) in &pred[t.index()] {
            if levels[s.index()].is_some() {
                continue;
            }
            let joins = match game.owner(s) {
                Player::P1 => true,
                Player::P2 => {
                    pending[s.index()] -= 1;
                    pending[s.index()] == 0
                }
            };
            if joins {
                levels[s.index()] = Some(next);
                queue.push_back(s);
            }
        }
    }

    let mut win1 = FixedBitSet::with_capacity(n);
    for (i, l) in levels.iter().enumerate() {
        win1.set(i, l.is_some());
    }
    let mut win2 = win1.clone();
    win2.toggle_range(..);
    WinRegions { win1, win2, attractor_levels: levels }
}

/// Rank-decreasing memoryless strategy for P1 on `Win1 \ F`: at each P1 state,
/// the lowest-index action whose successor has a strictly smaller level.
pub fn asw_strategy(game: &GameGraph, regions: &WinRegions) -> BTreeMap<StateId, ActionId> {
    let mut strategy = BTreeMap::new();
    for s in game.states() {
        if game.owner(s) != Player::P1 || game.is_final(s) {
            continue;
        }
        let Some(level) = regions.level(s) else { continue };
        let choice = game
            .succ(s)
            .iter()
            .find(|&&(_, t)| regions.level(t).is_some_and(|lt| lt < level));
        if let Some(&(a, _)) = choice {
            strategy.insert(s, a);
        }
    }
    strategy
}
