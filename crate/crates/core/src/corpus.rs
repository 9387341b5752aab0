//! Seeded random reachability games and deception instances.
//!
//! Used by the property suites, the acceptance suite and the examples. The
//! same seed always yields the same instance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{ActionId, ActionSet, GameBuilder, GameGraph, Player, StateId};
use crate::inference::InferenceMechanism;

/// Size ranges for generated games. Bounds are inclusive.
#[derive(Clone, Debug)]
pub struct CorpusShape {
    pub states: (usize, usize),
    pub actions_per_player: (usize, usize),
    /// Probability that a state's owner defines a transition for a given action.
    pub edge_probability: f64,
    /// Probability that a state left without transitions gets one anyway.
    pub rescue_dead_end: f64,
    pub max_final: usize,
}

impl Default for CorpusShape {
    fn default() -> Self {
        Self {
            states: (4, 12),
            actions_per_player: (2, 4),
            edge_probability: 0.6,
            rescue_dead_end: 0.85,
            max_final: 2,
        }
    }
}

/// A game together with P2's initial misperception and inference mechanism.
#[derive(Clone, Debug)]
pub struct Instance {
    pub game: GameGraph,
    pub x0: ActionSet,
    pub mechanism: InferenceMechanism,
}

pub fn random_game(seed: u64, shape: &CorpusShape) -> GameGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_random_game(&mut rng, shape)
}

fn build_random_game(rng: &mut ChaCha8Rng, shape: &CorpusShape) -> GameGraph {
    let n = rng.gen_range(shape.states.0..=shape.states.1);
    let k1 = rng.gen_range(shape.actions_per_player.0..=shape.actions_per_player.1);
    let k2 = rng.gen_range(shape.actions_per_player.0..=shape.actions_per_player.1);

    let mut b = GameBuilder::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let n_final = rng.gen_range(1..=shape.max_final.max(1));
    let finals = &order[..n_final];
    let mut owners = Vec::with_capacity(n);
    let states: Vec<StateId> = (0..n)
        .map(|i| {
            let owner = if rng.gen_bool(0.5) { Player::P1 } else { Player::P2 };
            owners.push(owner);
            b.state(format!("s{i}"), owner, finals.contains(&i))
        })
        .collect();
    let p1: Vec<ActionId> = (0..k1).map(|i| b.action(format!("a{}", i + 1), Player::P1)).collect();
    let p2: Vec<ActionId> = (0..k2).map(|i| b.action(format!("b{}", i + 1), Player::P2)).collect();
    for (i, &s) in states.iter().enumerate() {
        let acts = match owners[i] {
            Player::P1 => &p1,
            Player::P2 => &p2,
        };
        let mut any = false;
        for &a in acts {
            if rng.gen_bool(shape.edge_probability) {
                b.transition(s, a, states[rng.gen_range(0..n)]);
                any = true;
            }
        }
        if !any && rng.gen_bool(shape.rescue_dead_end) {
            let a = acts[rng.gen_range(0..acts.len())];
            b.transition(s, a, states[rng.gen_range(0..n)]);
        }
    }
    b.initial(states[rng.gen_range(0..n)]);
    b.build().expect("generated games are valid")
}

/// A random game with a random initial misperception `x0 ⊊ A1` and a
/// mechanism that is `Union` about two thirds of the time and a random
/// `Closure` otherwise.
pub fn random_instance(seed: u64, shape: &CorpusShape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let game = build_random_game(&mut rng, shape);
    let a1: Vec<ActionId> = game.a1().iter().collect();
    let mut x0 = ActionSet::EMPTY;
    loop {
        for &a in &a1 {
            if rng.gen_bool(0.5) {
                x0.insert(a);
            }
        }
        if x0 != game.a1() {
            break;
        }
        x0 = ActionSet::EMPTY;
    }
    let mechanism = if rng.gen_bool(0.67) {
        InferenceMechanism::union(game.a1())
    } else {
        let map: Vec<(ActionId, ActionSet)> = a1
            .iter()
            .map(|&a| {
                let mut implied = ActionSet::singleton(a);
                for &c in &a1 {
                    if rng.gen_bool(0.3) {
                        implied.insert(c);
                    }
                }
                (a, implied)
            })
            .collect();
        InferenceMechanism::closure(game.a1(), map).expect("closure map is well formed")
    };
    Instance { game, x0, mechanism }
}
