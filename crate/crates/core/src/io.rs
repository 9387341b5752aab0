//! JSON file formats: games, inference sidecars, hypergame exports and
//! solver results.
//!
//! Game files list states, actions and transitions by dense id:
//!
//! ```json
//! {
//!   "states": [{ "id": 0, "label": "s0", "owner": "P2", "final": true }],
//!   "actions": [{ "id": 0, "label": "a1", "owner": "P1" }],
//!   "transitions": [{ "from": 1, "action": 0, "to": 0 }],
//!   "initial": 2
//! }
//! ```
//!
//! An action present in the table but outside its player's alphabet (as after
//! a restriction) carries `"enabled": false`. Saving is canonical: states and
//! actions by id, transitions by `(from, action)`, two-space indentation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asw::WinRegions;
use crate::dasw::{DaswResult, PermissiveTable, StrategyMap};
use crate::game::{ActionId, ActionSet, GameBuilder, GameError, GameGraph, Player, StateId};
use crate::hypergame::{Hypergame, VertexId};
use crate::inference::{InferenceError, InferenceMechanism, MechanismKind};
use crate::simulator::{Episode, Outcome};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error(transparent)]
    Invalid(#[from] GameError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

impl LoadError {
    fn field(field: &'static str, message: impl Into<String>) -> Self {
        LoadError::Field { field, message: message.into() }
    }

    /// True when the input parsed but describes an invalid game.
    pub fn is_validation(&self) -> bool {
        matches!(self, LoadError::Invalid(_))
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_owned(), source })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file formats serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    fs::write(path, to_json(value))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, LoadError> {
    Ok(serde_json::from_str(&read(path)?)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateEntry {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub owner: Player,
    #[serde(rename = "final")]
    pub is_final: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub owner: Player,
    #[serde(default = "enabled_default", skip_serializing_if = "is_true")]
    pub enabled: bool,
}

fn enabled_default() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionEntry {
    pub from: u32,
    pub action: u32,
    pub to: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub states: Vec<StateEntry>,
    pub actions: Vec<ActionEntry>,
    pub transitions: Vec<TransitionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<u32>,
}

impl GameFile {
    pub fn from_game(game: &GameGraph) -> Self {
        let states = game
            .states()
            .map(|s| {
                let info = game.state_info(s);
                StateEntry { id: s.0, label: info.label.clone(), owner: info.owner, is_final: info.is_final }
            })
            .collect();
        let alphabet = game.a1().union(game.a2());
        let actions = (0..game.num_actions() as u32)
            .map(|i| {
                let info = game.action_info(ActionId(i));
                ActionEntry {
                    id: i,
                    label: info.label.clone(),
                    owner: info.owner,
                    enabled: alphabet.contains(ActionId(i)),
                }
            })
            .collect();
        let transitions = game
            .states()
            .flat_map(|s| game.succ(s).iter().map(move |&(a, t)| TransitionEntry { from: s.0, action: a.0, to: t.0 }))
            .collect();
        GameFile { states, actions, transitions, initial: game.initial().map(|s| s.0) }
    }

    pub fn into_game(self) -> Result<GameGraph, LoadError> {
        let mut states = self.states;
        states.sort_by_key(|s| s.id);
        for (i, s) in states.iter().enumerate() {
            if s.id as usize != i {
                return Err(LoadError::field("states", format!("ids must be 0..{} without gaps; missing {i}", states.len())));
            }
        }
        let mut actions = self.actions;
        actions.sort_by_key(|a| a.id);
        for (i, a) in actions.iter().enumerate() {
            if a.id as usize != i {
                return Err(LoadError::field("actions", format!("ids must be 0..{} without gaps; missing {i}", actions.len())));
            }
        }
        let mut b = GameBuilder::new();
        for s in states {
            b.push_state(s.label, s.owner, s.is_final);
        }
        for a in actions {
            let id = b.push_action(a.label, a.owner);
            if !a.enabled {
                b.disable(id);
            }
        }
        for t in self.transitions {
            b.transition(StateId(t.from), ActionId(t.action), StateId(t.to));
        }
        if let Some(i) = self.initial {
            b.initial(StateId(i));
        }
        Ok(b.build()?)
    }
}

pub fn game_from_str(s: &str) -> Result<GameGraph, LoadError> {
    serde_json::from_str::<GameFile>(s)?.into_game()
}

pub fn game_to_string(game: &GameGraph) -> String {
    to_json(&GameFile::from_game(game))
}

pub fn load_game(path: &Path) -> Result<GameGraph, LoadError> {
    game_from_str(&read(path)?)
}

pub fn save_game(game: &GameGraph, path: &Path) -> std::io::Result<()> {
    fs::write(path, game_to_string(game))
}

/// Inference sidecar: `{"kind": "union", "x0": [...]}` or
/// `{"kind": "closure", "map": {"a": ["a", "b"]}, "x0": [...]}`, all by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceFile {
    #[serde(flatten)]
    pub kind: KindEntry,
    pub x0: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KindEntry {
    Union,
    Closure { map: BTreeMap<String, Vec<String>> },
}

impl InferenceFile {
    pub fn new(game: &GameGraph, mechanism: &InferenceMechanism, x0: ActionSet) -> Self {
        let kind = match mechanism.kind() {
            MechanismKind::Union => KindEntry::Union,
            MechanismKind::Closure(_) => KindEntry::Closure {
                map: mechanism
                    .alphabet()
                    .iter()
                    .filter(|&a| mechanism.implied(a) != ActionSet::singleton(a))
                    .map(|a| (game.action_label(a), game.action_labels(mechanism.implied(a))))
                    .collect(),
            },
        };
        InferenceFile { kind, x0: game.action_labels(x0) }
    }

    pub fn resolve(&self, game: &GameGraph) -> Result<(InferenceMechanism, ActionSet), LoadError> {
        let p1_action = |field: &'static str, label: &str| -> Result<ActionId, LoadError> {
            game.find_action(label)
                .filter(|&a| game.a1().contains(a))
                .ok_or_else(|| LoadError::field(field, format!("{label:?} is not a P1 action")))
        };
        let x0 = self.x0.iter().map(|l| p1_action("x0", l)).collect::<Result<ActionSet, _>>()?;
        let mechanism = match &self.kind {
            KindEntry::Union => InferenceMechanism::union(game.a1()),
            KindEntry::Closure { map } => {
                let mut entries = Vec::with_capacity(map.len());
                for (k, v) in map {
                    let implied = v.iter().map(|l| p1_action("map", l)).collect::<Result<ActionSet, _>>()?;
                    entries.push((p1_action("map", k)?, implied));
                }
                InferenceMechanism::closure(game.a1(), entries)?
            }
        };
        Ok((mechanism, x0))
    }
}

pub fn inference_from_str(s: &str, game: &GameGraph) -> Result<(InferenceMechanism, ActionSet), LoadError> {
    serde_json::from_str::<InferenceFile>(s)?.resolve(game)
}

pub fn load_inference(path: &Path, game: &GameGraph) -> Result<(InferenceMechanism, ActionSet), LoadError> {
    inference_from_str(&read(path)?, game)
}

/// A hypergame vertex by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: u32,
    pub state: String,
    pub perception: Vec<String>,
}

impl VertexEntry {
    pub fn new(h: &Hypergame<'_>, v: VertexId) -> Self {
        let g = h.base();
        VertexEntry { id: v.0, state: g.state_label(h.state(v)), perception: g.action_labels(h.perceived(v)) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergameVertex {
    #[serde(flatten)]
    pub vertex: VertexEntry,
    pub owner: Player,
    #[serde(rename = "final")]
    pub is_final: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledTransition {
    pub from: u32,
    pub action: String,
    pub to: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergameFile {
    pub perceptions: Vec<Vec<String>>,
    pub vertices: Vec<HypergameVertex>,
    pub transitions: Vec<LabelledTransition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<u32>,
}

impl HypergameFile {
    pub fn new(h: &Hypergame<'_>) -> Self {
        let g = h.base();
        HypergameFile {
            perceptions: h.perceptions().iter().map(|(_, x)| g.action_labels(x)).collect(),
            vertices: h
                .vertex_ids()
                .map(|v| HypergameVertex { vertex: VertexEntry::new(h, v), owner: h.owner(v), is_final: h.is_final(v) })
                .collect(),
            transitions: h
                .vertex_ids()
                .flat_map(|v| {
                    h.succ(v).iter().map(move |&(a, w)| LabelledTransition { from: v.0, action: g.action_label(a), to: w.0 })
                })
                .collect(),
            initial: h.initial().map(|v| v.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub state: String,
    pub level: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveEntry {
    pub state: String,
    pub action: String,
}

/// Output of the `asw` command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionsFile {
    pub win1: Vec<String>,
    pub win2: Vec<String>,
    pub levels: Vec<LevelEntry>,
    pub strategy: Vec<MoveEntry>,
}

impl RegionsFile {
    pub fn new(game: &GameGraph, regions: &WinRegions, strategy: &BTreeMap<StateId, ActionId>) -> Self {
        let labels = |set: &fixedbitset::FixedBitSet| set.ones().map(|i| game.state_label(StateId(i as u32))).collect();
        RegionsFile {
            win1: labels(&regions.win1),
            win2: labels(&regions.win2),
            levels: game
                .states()
                .filter_map(|s| regions.level(s).map(|level| LevelEntry { state: game.state_label(s), level }))
                .collect(),
            strategy: strategy
                .iter()
                .map(|(&s, &a)| MoveEntry { state: game.state_label(s), action: game.action_label(a) })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedVertex {
    #[serde(flatten)]
    pub vertex: VertexEntry,
    pub level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixpointEntry {
    pub size: usize,
    pub passes: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyEntry {
    #[serde(flatten)]
    pub vertex: VertexEntry,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissiveEntry {
    #[serde(flatten)]
    pub vertex: VertexEntry,
    pub allowed: Vec<String>,
}

/// Output of the `dasw` command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaswFile {
    pub region: Vec<RankedVertex>,
    pub level_sizes: Vec<usize>,
    pub safe2: Vec<FixpointEntry>,
    pub safe1: Vec<FixpointEntry>,
    pub outer_iterations: u32,
    pub permissive: Vec<PermissiveEntry>,
    pub strategy: Vec<StrategyEntry>,
    pub oracle_agrees: bool,
}

impl DaswFile {
    pub fn new(
        h: &Hypergame<'_>,
        perm: &PermissiveTable,
        result: &DaswResult,
        strategy: &StrategyMap,
        oracle_agrees: bool,
    ) -> Self {
        let g = h.base();
        let fix = |runs: &[crate::dasw::SafeRun]| {
            runs.iter().map(|r| FixpointEntry { size: r.set.count_ones(..), passes: r.passes() }).collect()
        };
        DaswFile {
            region: result
                .region()
                .ones()
                .map(|i| {
                    let v = VertexId(i as u32);
                    RankedVertex {
                        vertex: VertexEntry::new(h, v),
                        level: result.level(v).expect("region vertices have a level"),
                        rank: result.rank(v),
                    }
                })
                .collect(),
            level_sizes: result.levels.iter().map(|z| z.count_ones(..)).collect(),
            safe2: fix(&result.safe2_trace),
            safe1: fix(&result.safe1_trace),
            outer_iterations: result.outer_iterations(),
            permissive: h
                .vertex_ids()
                .filter(|&v| h.owner(v) == Player::P2)
                .map(|v| PermissiveEntry { vertex: VertexEntry::new(h, v), allowed: g.action_labels(perm.allowed(v)) })
                .collect(),
            strategy: strategy
                .p1
                .iter()
                .map(|(&v, &acts)| StrategyEntry { vertex: VertexEntry::new(h, v), actions: g.action_labels(acts) })
                .collect(),
            oracle_agrees,
        }
    }
}

/// An episode with every vertex and action spelled out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub seed: u64,
    pub outcome: Outcome,
    pub steps: u32,
    pub vertices: Vec<VertexEntry>,
    pub actions: Vec<String>,
}

impl TraceFile {
    pub fn new(h: &Hypergame<'_>, episode: &Episode) -> Self {
        TraceFile {
            seed: episode.seed,
            outcome: episode.outcome,
            steps: episode.steps,
            vertices: episode.hrun.iter().map(|&v| VertexEntry::new(h, v)).collect(),
            actions: episode.actions.iter().map(|&a| h.base().action_label(a)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::example_game;

    #[test]
    fn example_round_trip_is_canonical() {
        let g = example_game();
        let text = game_to_string(&g);
        let back = game_from_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(game_to_string(&back), text);
    }

    #[test]
    fn restricted_game_keeps_disabled_actions() {
        let g = example_game();
        let r = g.restrict(ActionSet::singleton(g.find_action("a2").unwrap())).unwrap();
        let text = game_to_string(&r);
        assert!(text.contains("\"enabled\": false"));
        assert_eq!(game_from_str(&text).unwrap(), r);
    }

    #[test]
    fn missing_final_field_is_named() {
        let text = r#"{"states":[{"id":0,"owner":"P1"}],"actions":[],"transitions":[]}"#;
        let err = game_from_str(text).unwrap_err();
        assert!(err.to_string().contains("final"), "{err}");
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn invalid_game_is_a_validation_error() {
        let text = r#"{"states":[{"id":0,"owner":"P2","final":false}],
            "actions":[{"id":0,"owner":"P1"}],
            "transitions":[{"from":0,"action":0,"to":3}]}"#;
        let err = game_from_str(text).unwrap_err();
        assert!(err.is_validation());
        let msg = err.to_string();
        assert!(msg.contains("partition") && msg.contains("dangling"), "{msg}");
    }

    #[test]
    fn gapped_ids_are_rejected() {
        let text = r#"{"states":[{"id":1,"owner":"P2","final":false}],"actions":[],"transitions":[]}"#;
        assert!(matches!(game_from_str(text), Err(LoadError::Field { field: "states", .. })));
    }

    #[test]
    fn inference_sidecars() {
        let g = example_game();
        let (m, x0) = inference_from_str(r#"{"kind":"union","x0":["a2"]}"#, &g).unwrap();
        assert_eq!(m, InferenceMechanism::union(g.a1()));
        assert_eq!(x0, ActionSet::singleton(g.find_action("a2").unwrap()));
        let file = InferenceFile::new(&g, &m, x0);
        assert_eq!(to_json(&file).replace([' ', '\n'], ""), r#"{"kind":"union","x0":["a2"]}"#);

        let text = r#"{"kind":"closure","map":{"a1":["a1","a2"]},"x0":[]}"#;
        let (m, x0) = inference_from_str(text, &g).unwrap();
        assert_eq!(x0, ActionSet::EMPTY);
        assert_eq!(m.infer_step(ActionSet::EMPTY, g.find_action("a1").unwrap()).unwrap(), g.a1());
        let again = InferenceFile::new(&g, &m, x0);
        assert_eq!(again.resolve(&g).unwrap(), (m, x0));

        assert!(inference_from_str(r#"{"kind":"union","x0":["b1"]}"#, &g).is_err());
        assert!(inference_from_str(r#"{"kind":"telepathy","x0":[]}"#, &g).is_err());
    }
}
