//! Turn-based deterministic game graphs with reachability objectives.
//!
//! States and actions use dense integer ids. Labels are kept only for I/O and
//! diagnostics. Transitions are stored per state, sorted by action index, so
//! every iteration over a game is deterministic.

use std::collections::HashSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on the size of the combined action alphabet `A1 ∪ A2`.
pub const MAX_ACTIONS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub u32);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::P1 => f.write_str("P1"),
            Player::P2 => f.write_str("P2"),
        }
    }
}

/// A set of actions, stored as a bitmask over action ids.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionSet(u64);

impl ActionSet {
    pub const EMPTY: ActionSet = ActionSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ActionSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(a: ActionId) -> Self {
        ActionSet(1u64 << a.0)
    }

    pub fn contains(self, a: ActionId) -> bool {
        a.index() < MAX_ACTIONS && self.0 & (1u64 << a.0) != 0
    }

    pub fn insert(&mut self, a: ActionId) {
        self.0 |= 1u64 << a.0;
    }

    pub fn remove(&mut self, a: ActionId) {
        self.0 &= !(1u64 << a.0);
    }

    pub fn union(self, other: ActionSet) -> ActionSet {
        ActionSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ActionSet) -> ActionSet {
        ActionSet(self.0 & other.0)
    }

    pub fn difference(self, other: ActionSet) -> ActionSet {
        ActionSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ActionSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Lowest-index member.
    pub fn first(self) -> Option<ActionId> {
        (self.0 != 0).then(|| ActionId(self.0.trailing_zeros()))
    }

    pub fn iter(self) -> ActionSetIter {
        ActionSetIter(self.0)
    }
}

impl fmt::Debug for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|a| a.0)).finish()
    }
}

impl FromIterator<ActionId> for ActionSet {
    fn from_iter<I: IntoIterator<Item = ActionId>>(iter: I) -> Self {
        let mut set = ActionSet::EMPTY;
        for a in iter {
            set.insert(a);
        }
        set
    }
}

impl IntoIterator for ActionSet {
    type Item = ActionId;
    type IntoIter = ActionSetIter;

    fn into_iter(self) -> ActionSetIter {
        self.iter()
    }
}

/// Ascending iterator over an [`ActionSet`].
pub struct ActionSetIter(u64);

impl Iterator for ActionSetIter {
    type Item = ActionId;

    fn next(&mut self) -> Option<ActionId> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(ActionId(bit))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateInfo {
    pub label: Option<String>,
    pub owner: Player,
    pub is_final: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionInfo {
    pub label: Option<String>,
    pub owner: Player,
}

/// A single invariant breach found by [`GameGraph::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// An action of one player labels a transition out of the other player's state.
    OwnerMismatch { state: StateId, action: ActionId },
    /// A transition uses an action outside `A1 ∪ A2`.
    ActionNotInAlphabet { state: StateId, action: ActionId },
    /// A transition starts or ends in a state that does not exist.
    DanglingState { from: StateId, action: ActionId, to: StateId },
    /// More than one successor for the same `(state, action)`.
    Nondeterministic { state: StateId, action: ActionId },
    InitialOutOfRange(StateId),
    TooManyActions(usize),
    DuplicateStateLabel(String),
    DuplicateActionLabel(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OwnerMismatch { state, action } => write!(
                f,
                "partition: action {action} is not owned by the owner of state {state}"
            ),
            Violation::ActionNotInAlphabet { state, action } => {
                write!(f, "state {state}: action {action} is not in A1 or A2")
            }
            Violation::DanglingState { from, action, to } => {
                write!(f, "dangling reference: transition {from} --{action}--> {to}")
            }
            Violation::Nondeterministic { state, action } => {
                write!(f, "nondeterministic: state {state} has several {action} successors")
            }
            Violation::InitialOutOfRange(s) => write!(f, "initial state {s} does not exist"),
            Violation::TooManyActions(n) => {
                write!(f, "{n} actions exceed the limit of {MAX_ACTIONS}")
            }
            Violation::DuplicateStateLabel(l) => write!(f, "duplicate state label {l:?}"),
            Violation::DuplicateActionLabel(l) => write!(f, "duplicate action label {l:?}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("action {0} is not a P1 action of this game")]
    NotPlayerOneAction(ActionId),
    #[error("no state or action labelled {0:?}")]
    UnknownLabel(String),
    #[error("run is not connected at step {step}")]
    DisconnectedRun { step: usize },
    #[error("invalid game: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Explicit turn-based arena `<S, A1 ∪ A2, T, F>` with an optional initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameGraph {
    states: Vec<StateInfo>,
    actions: Vec<ActionInfo>,
    a1: ActionSet,
    a2: ActionSet,
    edges: Vec<Vec<(ActionId, StateId)>>,
    initial: Option<StateId>,
}

impl GameGraph {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn state_info(&self, s: StateId) -> &StateInfo {
        &self.states[s.index()]
    }

    pub fn action_info(&self, a: ActionId) -> &ActionInfo {
        &self.actions[a.index()]
    }

    pub fn owner(&self, s: StateId) -> Player {
        self.states[s.index()].owner
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.states[s.index()].is_final
    }

    pub fn final_states(&self) -> FixedBitSet {
        let mut f = FixedBitSet::with_capacity(self.num_states());
        for (i, st) in self.states.iter().enumerate() {
            f.set(i, st.is_final);
        }
        f
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    /// P1's action alphabet.
    pub fn a1(&self) -> ActionSet {
        self.a1
    }

    /// P2's action alphabet.
    pub fn a2(&self) -> ActionSet {
        self.a2
    }

    pub fn alphabet(&self, who: Player) -> ActionSet {
        match who {
            Player::P1 => self.a1,
            Player::P2 => self.a2,
        }
    }

    pub fn state_label(&self, s: StateId) -> String {
        match self.states.get(s.index()).and_then(|i| i.label.as_ref()) {
            Some(l) => l.clone(),
            None => format!("s{}", s.0),
        }
    }

    pub fn action_label(&self, a: ActionId) -> String {
        match self.actions.get(a.index()).and_then(|i| i.label.as_ref()) {
            Some(l) => l.clone(),
            None => format!("act{}", a.0),
        }
    }

    /// Looks a state up by label, falling back to the `s<id>` form used for
    /// unlabelled states.
    pub fn find_state(&self, label: &str) -> Option<StateId> {
        self.states().find(|&s| self.state_label(s) == label)
    }

    pub fn find_action(&self, label: &str) -> Option<ActionId> {
        (0..self.actions.len() as u32)
            .map(ActionId)
            .find(|&a| self.action_label(a) == label)
    }

    /// Parses a list of action labels into a set.
    pub fn action_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<ActionSet, GameError> {
        labels
            .iter()
            .map(|l| {
                self.find_action(l.as_ref())
                    .ok_or_else(|| GameError::UnknownLabel(l.as_ref().to_owned()))
            })
            .collect()
    }

    pub fn action_labels(&self, set: ActionSet) -> Vec<String> {
        set.iter().map(|a| self.action_label(a)).collect()
    }

    /// Defined transitions out of `s`, in action-index order.
    pub fn successors(&self, s: StateId) -> Result<&[(ActionId, StateId)], GameError> {
        self.edges
            .get(s.index())
            .map(Vec::as_slice)
            .ok_or(GameError::UnknownState(s))
    }

    /// Unchecked variant of [`successors`](Self::successors) for hot loops.
    #[inline]
    pub fn succ(&self, s: StateId) -> &[(ActionId, StateId)] {
        &self.edges[s.index()]
    }

    pub fn transition(&self, s: StateId, a: ActionId) -> Option<StateId> {
        self.edges
            .get(s.index())?
            .iter()
            .find(|(b, _)| *b == a)
            .map(|&(_, t)| t)
    }

    /// Actions with a defined transition at `s`.
    pub fn enabled(&self, s: StateId) -> ActionSet {
        self.succ(s).iter().map(|&(a, _)| a).collect()
    }

    /// Reverse adjacency: for each state, the `(action, predecessor)` pairs
    /// leading into it.
    pub fn predecessors(&self) -> Vec<Vec<(ActionId, StateId)>> {
        let mut pred = vec![Vec::new(); self.num_states()];
        for s in self.states() {
            for &(a, t) in self.succ(s) {
                pred[t.index()].push((a, s));
            }
        }
        pred
    }

    /// The perceptual game `G(X)`: P1's alphabet becomes `x` and every
    /// transition labelled by an action of `A1 \ X` is dropped.
    pub fn restrict(&self, x: ActionSet) -> Result<GameGraph, GameError> {
        if let Some(bad) = x.difference(self.a1).first() {
            return Err(GameError::NotPlayerOneAction(bad));
        }
        let removed = self.a1.difference(x);
        let edges = self
            .edges
            .iter()
            .map(|out| out.iter().copied().filter(|(a, _)| !removed.contains(*a)).collect())
            .collect();
        Ok(GameGraph {
            states: self.states.clone(),
            actions: self.actions.clone(),
            a1: x,
            a2: self.a2,
            edges,
            initial: self.initial,
        })
    }

    /// Checks that consecutive entries of `run` are connected by transitions.
    pub fn check_run(&self, run: &Run) -> Result<(), GameError> {
        if run.actions.len() + 1 != run.states.len() {
            return Err(GameError::DisconnectedRun { step: run.actions.len().min(run.states.len()) });
        }
        for (k, &a) in run.actions.iter().enumerate() {
            let from = run.states[k];
            if from.index() >= self.num_states() {
                return Err(GameError::UnknownState(from));
            }
            if self.transition(from, a) != Some(run.states[k + 1]) {
                return Err(GameError::DisconnectedRun { step: k });
            }
        }
        Ok(())
    }

    /// Every invariant breach of this game. Empty means the game is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.actions.len() > MAX_ACTIONS {
            out.push(Violation::TooManyActions(self.actions.len()));
        }
        if let Some(init) = self.initial {
            if init.index() >= self.num_states() {
                out.push(Violation::InitialOutOfRange(init));
            }
        }
        let alphabet = self.a1.union(self.a2);
        for s in self.states() {
            let owner = self.owner(s);
            let mut seen = ActionSet::EMPTY;
            for &(a, t) in self.succ(s) {
                if a.index() >= self.actions.len() || !alphabet.contains(a) {
                    out.push(Violation::ActionNotInAlphabet { state: s, action: a });
                } else if self.actions[a.index()].owner != owner {
                    out.push(Violation::OwnerMismatch { state: s, action: a });
                }
                if t.index() >= self.num_states() {
                    out.push(Violation::DanglingState { from: s, action: a, to: t });
                }
                if a.index() < MAX_ACTIONS {
                    if seen.contains(a) {
                        out.push(Violation::Nondeterministic { state: s, action: a });
                    }
                    seen.insert(a);
                }
            }
        }
        let mut labels = HashSet::new();
        for st in &self.states {
            if let Some(l) = &st.label {
                if !labels.insert(l.as_str()) {
                    out.push(Violation::DuplicateStateLabel(l.clone()));
                }
            }
        }
        let mut labels = HashSet::new();
        for act in &self.actions {
            if let Some(l) = &act.label {
                if !labels.insert(l.as_str()) {
                    out.push(Violation::DuplicateActionLabel(l.clone()));
                }
            }
        }
        out
    }
}

/// Incremental constructor for [`GameGraph`].
#[derive(Clone, Debug, Default)]
pub struct GameBuilder {
    states: Vec<StateInfo>,
    actions: Vec<ActionInfo>,
    disabled: ActionSet,
    transitions: Vec<(StateId, ActionId, StateId)>,
    initial: Option<StateId>,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&mut self, label: impl Into<String>, owner: Player, is_final: bool) -> StateId {
        self.push_state(Some(label.into()), owner, is_final)
    }

    pub fn push_state(&mut self, label: Option<String>, owner: Player, is_final: bool) -> StateId {
        let id = StateId(self.states.len() as u32);
        self.states.push(StateInfo { label, owner, is_final });
        id
    }

    pub fn action(&mut self, label: impl Into<String>, owner: Player) -> ActionId {
        self.push_action(Some(label.into()), owner)
    }

    pub fn push_action(&mut self, label: Option<String>, owner: Player) -> ActionId {
        let id = ActionId(self.actions.len() as u32);
        self.actions.push(ActionInfo { label, owner });
        id
    }

    /// Keeps the action in the label table but removes it from its player's
    /// alphabet (as in a restricted game).
    pub fn disable(&mut self, a: ActionId) -> &mut Self {
        self.disabled.insert(a);
        self
    }

    pub fn transition(&mut self, from: StateId, action: ActionId, to: StateId) -> &mut Self {
        self.transitions.push((from, action, to));
        self
    }

    pub fn initial(&mut self, s: StateId) -> &mut Self {
        self.initial = Some(s);
        self
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Builds and validates.
    pub fn build(self) -> Result<GameGraph, GameError> {
        let mut dangling = Vec::new();
        let n = self.states.len();
        for &(from, a, to) in &self.transitions {
            if from.index() >= n {
                dangling.push(Violation::DanglingState { from, action: a, to });
            }
        }
        let game = self.build_unchecked();
        dangling.extend(game.validate());
        if dangling.is_empty() {
            Ok(game)
        } else {
            Err(GameError::Invalid(dangling))
        }
    }

    /// Builds without validation. Transitions leaving a nonexistent state are dropped.
    pub fn build_unchecked(self) -> GameGraph {
        let n = self.states.len();
        let mut a1 = ActionSet::EMPTY;
        let mut a2 = ActionSet::EMPTY;
        for (i, act) in self.actions.iter().enumerate().take(MAX_ACTIONS) {
            let id = ActionId(i as u32);
            if self.disabled.contains(id) {
                continue;
            }
            match act.owner {
                Player::P1 => a1.insert(id),
                Player::P2 => a2.insert(id),
            }
        }
        let mut edges = vec![Vec::new(); n];
        for (from, a, to) in self.transitions {
            if from.index() < n {
                edges[from.index()].push((a, to));
            }
        }
        for out in &mut edges {
            out.sort_by_key(|&(a, t)| (a, t));
        }
        GameGraph { states: self.states, actions: self.actions, a1, a2, edges, initial: self.initial }
    }
}

/// A finite run: states visited and the actions taken between them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
}

impl Run {
    pub fn visits(&self, set: &FixedBitSet) -> bool {
        self.states.iter().any(|s| set.contains(s.index()))
    }
}

/// The running example: four states, `A1 = {a1, a2}`, `A2 = {b1, b2}`,
/// final state `s0`, initial state `s2`.
pub fn example_game() -> GameGraph {
    let mut b = GameBuilder::new();
    let s0 = b.state("s0", Player::P2, true);
    let s1 = b.state("s1", Player::P1, false);
    let s2 = b.state("s2", Player::P2, false);
    let s3 = b.state("s3", Player::P1, false);
    let a1 = b.action("a1", Player::P1);
    let a2 = b.action("a2", Player::P1);
    let b1 = b.action("b1", Player::P2);
    let b2 = b.action("b2", Player::P2);
    b.transition(s1, a1, s0)
        .transition(s1, a2, s2)
        .transition(s2, b1, s1)
        .transition(s2, b2, s3)
        .transition(s3, a1, s2)
        .transition(s3, a2, s2)
        .initial(s2);
    b.build().expect("example game is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(g: &GameGraph) -> (ActionId, ActionId, ActionId, ActionId) {
        (
            g.find_action("a1").unwrap(),
            g.find_action("a2").unwrap(),
            g.find_action("b1").unwrap(),
            g.find_action("b2").unwrap(),
        )
    }

    #[test]
    fn example_game_is_valid() {
        let g = example_game();
        assert!(g.validate().is_empty());
        assert_eq!(g.num_states(), 4);
        assert_eq!(g.a1().len(), 2);
        assert_eq!(g.a2().len(), 2);
        assert!(g.is_final(StateId(0)));
    }

    #[test]
    fn p1_action_at_p2_state_is_one_partition_violation() {
        let mut b = GameBuilder::new();
        let s = b.state("x", Player::P2, false);
        let t = b.state("y", Player::P1, true);
        let a = b.action("a", Player::P1);
        b.transition(s, a, t);
        let v = b.build_unchecked().validate();
        assert_eq!(v, vec![Violation::OwnerMismatch { state: s, action: a }]);
    }

    #[test]
    fn transition_to_missing_state_is_one_dangling_violation() {
        let mut b = GameBuilder::new();
        let s = b.state("x", Player::P1, false);
        let a = b.action("a", Player::P1);
        b.transition(s, a, StateId(7));
        let v = b.build_unchecked().validate();
        assert_eq!(v, vec![Violation::DanglingState { from: s, action: a, to: StateId(7) }]);

        let mut b = GameBuilder::new();
        let s = b.state("x", Player::P1, false);
        let a = b.action("a", Player::P1);
        b.transition(StateId(3), a, s);
        match b.build() {
            Err(GameError::Invalid(v)) => assert_eq!(v.len(), 1),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_successor_is_nondeterministic() {
        let mut b = GameBuilder::new();
        let s = b.state("x", Player::P1, false);
        let t = b.state("y", Player::P1, false);
        let a = b.action("a", Player::P1);
        b.transition(s, a, s).transition(s, a, t);
        let v = b.build_unchecked().validate();
        assert_eq!(v, vec![Violation::Nondeterministic { state: s, action: a }]);
    }

    #[test]
    fn restrict_to_a2_gives_perceptual_game() {
        let g = example_game();
        let (a1, a2, b1, b2) = ids(&g);
        let r = g.restrict(ActionSet::singleton(a2)).unwrap();
        assert!(r.validate().is_empty());
        assert_eq!(r.a1(), ActionSet::singleton(a2));
        assert_eq!(r.num_transitions(), 4);
        assert_eq!(r.transition(StateId(1), a1), None);
        assert_eq!(r.transition(StateId(3), a1), None);
        assert_eq!(r.succ(StateId(2)), &[(b1, StateId(1)), (b2, StateId(3))]);
        assert_eq!(r.succ(StateId(1)), &[(a2, StateId(2))]);
    }

    #[test]
    fn restrict_identity_and_empty() {
        let g = example_game();
        assert_eq!(g.restrict(g.a1()).unwrap(), g);
        let e = g.restrict(ActionSet::EMPTY).unwrap();
        for s in e.states() {
            if e.owner(s) == Player::P1 {
                assert!(e.succ(s).is_empty());
            }
        }
        assert_eq!(e.succ(StateId(2)), g.succ(StateId(2)));
    }

    #[test]
    fn restrict_rejects_foreign_actions() {
        let g = example_game();
        let (_, _, b1, _) = ids(&g);
        assert!(matches!(
            g.restrict(ActionSet::singleton(b1)),
            Err(GameError::NotPlayerOneAction(a)) if a == b1
        ));
    }

    #[test]
    fn successors_in_action_order() {
        let g = example_game();
        let (_, _, b1, b2) = ids(&g);
        assert_eq!(g.successors(StateId(2)).unwrap(), &[(b1, StateId(1)), (b2, StateId(3))]);
        assert!(g.successors(StateId(0)).unwrap().is_empty());
        assert!(matches!(g.successors(StateId(9)), Err(GameError::UnknownState(_))));
    }

    #[test]
    fn run_connectivity() {
        let g = example_game();
        let (a1, _, b1, _) = ids(&g);
        let run = Run { states: vec![StateId(2), StateId(1), StateId(0)], actions: vec![b1, a1] };
        g.check_run(&run).unwrap();
        assert!(run.visits(&g.final_states()));
        let bad = Run { states: vec![StateId(2), StateId(0)], actions: vec![b1] };
        assert!(g.check_run(&bad).is_err());
    }

    #[test]
    fn action_set_ops() {
        let s: ActionSet = [ActionId(3), ActionId(0), ActionId(5)].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![ActionId(0), ActionId(3), ActionId(5)]);
        assert_eq!(s.first(), Some(ActionId(0)));
        assert_eq!(s.len(), 3);
        assert!(ActionSet::singleton(ActionId(3)).is_subset(s));
        assert!(!s.is_subset(ActionSet::singleton(ActionId(3))));
        assert_eq!(s.difference(ActionSet::singleton(ActionId(0))).first(), Some(ActionId(3)));
    }
}
