//! Dynamic hypergames: the product of game states with P2's evolving
//! perception of P1's action set.
//!
//! A vertex `(s, i)` pairs a game state with a perception index `i`, where
//! `γ(i) ⊆ A1` is what P2 currently believes P1 can do. A P1 move `a` leads to
//! `(T(s, a), η(γ(i), a))`; a P2 move leaves the perception unchanged.
//!
//! Perception indices are allocated in discovery order, so the initial
//! perception is always index 0.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{ActionId, ActionSet, GameGraph, Player, Run, StateId};
use crate::inference::{InferenceError, InferenceMechanism};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PerceptionId(pub u32);

impl PerceptionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub state: StateId,
    pub perception: PerceptionId,
}

/// Bijection between perception indices and the perceived subsets of `A1`
/// actually materialized.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PerceptionTable {
    sets: Vec<ActionSet>,
    index: HashMap<ActionSet, PerceptionId>,
}

impl PerceptionTable {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, i: PerceptionId) -> ActionSet {
        self.sets[i.index()]
    }

    pub fn lookup(&self, set: ActionSet) -> Option<PerceptionId> {
        self.index.get(&set).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PerceptionId, ActionSet)> + '_ {
        self.sets.iter().enumerate().map(|(i, &s)| (PerceptionId(i as u32), s))
    }

    fn intern(&mut self, set: ActionSet) -> PerceptionId {
        if let Some(&id) = self.index.get(&set) {
            return id;
        }
        let id = PerceptionId(self.sets.len() as u32);
        self.sets.push(set);
        self.index.insert(set, id);
        id
    }
}

#[derive(Debug, Error)]
pub enum HypergameError {
    #[error("the game has no initial state")]
    MissingInitial,
    #[error("initial perception contains actions outside A1")]
    PerceptionOutsideAlphabet,
    #[error("inference mechanism is defined over a different alphabet than the game's A1")]
    MechanismMismatch,
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("hypergame run is not connected at step {step}")]
    DisconnectedRun { step: usize },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
}

/// Which vertices of `S × Γ` to materialize.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exploration {
    /// Only vertices reachable from `(initial, x0)`.
    #[default]
    Reachable,
    /// Every state paired with every perception set that `η` can produce from
    /// `x0`. Vertex `(s, i)` gets id `i * |S| + s`.
    FullProduct,
}

#[derive(Clone, Debug)]
pub struct Hypergame<'g> {
    base: &'g GameGraph,
    mechanism: InferenceMechanism,
    x0: ActionSet,
    ptable: PerceptionTable,
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, VertexId>,
    edges: Vec<Vec<(ActionId, VertexId)>>,
    finals: FixedBitSet,
    initial: Option<VertexId>,
}

/// Builds the reachable hypergame from `(initial, x0)` by breadth-first search.
pub fn build<'g>(
    game: &'g GameGraph,
    x0: ActionSet,
    mechanism: &InferenceMechanism,
) -> Result<Hypergame<'g>, HypergameError> {
    Hypergame::build(game, x0, mechanism, Exploration::Reachable)
}

impl<'g> Hypergame<'g> {
    pub fn build(
        game: &'g GameGraph,
        x0: ActionSet,
        mechanism: &InferenceMechanism,
        mode: Exploration,
    ) -> Result<Self, HypergameError> {
        if !x0.is_subset(game.a1()) {
            return Err(HypergameError::PerceptionOutsideAlphabet);
        }
        if mechanism.alphabet() != game.a1() {
            return Err(HypergameError::MechanismMismatch);
        }
        let mut h = Hypergame {
            base: game,
            mechanism: mechanism.clone(),
            x0,
            ptable: PerceptionTable::default(),
            vertices: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            finals: FixedBitSet::new(),
            initial: None,
        };
        let p0 = h.ptable.intern(x0);
        match mode {
            Exploration::Reachable => {
                let init = game.initial().ok_or(HypergameError::MissingInitial)?;
                h.initial = Some(h.intern(Vertex { state: init, perception: p0 }));
                // Vertices are numbered in discovery order, so expanding them
                // by increasing id is a breadth-first traversal.
                while h.edges.len() < h.vertices.len() {
                    let v = VertexId(h.edges.len() as u32);
                    let out = h.expand(v)?;
                    h.edges.push(out);
                }
            }
            Exploration::FullProduct => {
                // Close the perception table under single observations.
                let mut next = 0;
                while next < h.ptable.len() {
                    let x = h.ptable.set(PerceptionId(next as u32));
                    for a in game.a1() {
                        let y = mechanism.infer_step(x, a)?;
                        h.ptable.intern(y);
                    }
                    next += 1;
                }
                for (p, _) in h.ptable.clone().iter() {
                    for s in game.states() {
                        h.intern(Vertex { state: s, perception: p });
                    }
                }
                for v in 0..h.vertices.len() {
                    let out = h.expand(VertexId(v as u32))?;
                    h.edges.push(out);
                }
                if let Some(init) = game.initial() {
                    h.initial = h.find(init, p0);
                }
            }
        }
        Ok(h)
    }

    fn intern(&mut self, v: Vertex) -> VertexId {
        if let Some(&id) = self.index.get(&v) {
            return id;
        }
        let id = VertexId(self.vertices.len() as u32);
        self.vertices.push(v);
        self.index.insert(v, id);
        self.finals.grow(self.vertices.len());
        self.finals.set(id.index(), self.base.is_final(v.state));
        id
    }

    fn expand(&mut self, v: VertexId) -> Result<Vec<(ActionId, VertexId)>, HypergameError> {
        let Vertex { state, perception } = self.vertices[v.index()];
        let base = self.base;
        let mut out = Vec::with_capacity(base.succ(state).len());
        for &(a, t) in base.succ(state) {
            let p = if base.a1().contains(a) {
                let y = self.mechanism.infer_step(self.ptable.set(perception), a)?;
                self.ptable.intern(y)
            } else {
                perception
            };
            out.push((a, self.intern(Vertex { state: t, perception: p })));
        }
        Ok(out)
    }

    pub fn base(&self) -> &'g GameGraph {
        self.base
    }

    pub fn mechanism(&self) -> &InferenceMechanism {
        &self.mechanism
    }

    pub fn x0(&self) -> ActionSet {
        self.x0
    }

    pub fn perceptions(&self) -> &PerceptionTable {
        &self.ptable
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn vertex(&self, v: VertexId) -> Vertex {
        self.vertices[v.index()]
    }

    pub fn find(&self, state: StateId, perception: PerceptionId) -> Option<VertexId> {
        self.index.get(&Vertex { state, perception }).copied()
    }

    pub fn state(&self, v: VertexId) -> StateId {
        self.vertices[v.index()].state
    }

    /// `γ(i)` of the vertex.
    pub fn perceived(&self, v: VertexId) -> ActionSet {
        self.ptable.set(self.vertices[v.index()].perception)
    }

    pub fn owner(&self, v: VertexId) -> Player {
        self.base.owner(self.state(v))
    }

    pub fn is_final(&self, v: VertexId) -> bool {
        self.finals.contains(v.index())
    }

    pub fn final_vertices(&self) -> &FixedBitSet {
        &self.finals
    }

    pub fn initial(&self) -> Option<VertexId> {
        self.initial
    }

    #[inline]
    pub fn succ(&self, v: VertexId) -> &[(ActionId, VertexId)] {
        &self.edges[v.index()]
    }

    pub fn delta(&self, v: VertexId, a: ActionId) -> Option<VertexId> {
        self.succ(v).iter().find(|(b, _)| *b == a).map(|&(_, w)| w)
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn predecessors(&self) -> Vec<Vec<(ActionId, VertexId)>> {
        let mut pred = vec![Vec::new(); self.num_vertices()];
        for v in self.vertex_ids() {
            for &(a, w) in self.succ(v) {
                pred[w.index()].push((a, v));
            }
        }
        pred
    }

    /// Game states that occur in some vertex of `set`.
    pub fn project(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.base.num_states());
        for i in set.ones() {
            out.insert(self.vertices[i].state.index());
        }
        out
    }

    /// Game states that occur in some materialized vertex.
    pub fn covered_states(&self) -> FixedBitSet {
        let mut all = FixedBitSet::with_capacity(self.num_vertices());
        all.insert_range(..);
        self.project(&all)
    }

    /// Projects a hypergame run onto the game. Between two vertices the
    /// lowest-index connecting action is reported.
    pub fn project_run(&self, hrun: &[VertexId]) -> Result<Run, HypergameError> {
        if let Some(&bad) = hrun.iter().find(|v| v.index() >= self.num_vertices()) {
            return Err(HypergameError::UnknownVertex(bad));
        }
        let mut run = Run::default();
        for (k, pair) in hrun.windows(2).enumerate() {
            let a = self
                .succ(pair[0])
                .iter()
                .find(|&&(_, w)| w == pair[1])
                .map(|&(a, _)| a)
                .ok_or(HypergameError::DisconnectedRun { step: k })?;
            run.actions.push(a);
        }
        run.states = hrun.iter().map(|&v| self.state(v)).collect();
        Ok(run)
    }

    pub fn vertex_label(&self, v: VertexId) -> String {
        let Vertex { state, perception } = self.vertex(v);
        format!("({}, {})", self.base.state_label(state), perception.0)
    }

    pub fn perception_label(&self, p: PerceptionId) -> String {
        format!("{{{}}}", self.base.action_labels(self.ptable.set(p)).join(","))
    }
}
