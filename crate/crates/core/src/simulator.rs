//! Monte-Carlo play of P1's deceptive strategy against randomized P2 policies
//! whose support is exactly the permissive set.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dasw::StrategyMap;
use crate::game::{ActionId, Player};
use crate::hypergame::{Hypergame, VertexId};

/// Bounds for `RandomWeights`. Keeping weights away from zero keeps every
/// support action's probability visible at realistic episode counts.
pub const WEIGHT_RANGE: (f64, f64) = (0.2, 1.0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Uniform over the support.
    #[default]
    Uniform,
    /// Per-episode weights drawn from [`WEIGHT_RANGE`] the first time a vertex
    /// is visited.
    RandomWeights,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Uniform => "uniform",
            PolicyKind::RandomWeights => "random",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    ReachedF,
    StepCap,
    DeadEnd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Episode {
    pub seed: u64,
    pub start: VertexId,
    pub hrun: Vec<VertexId>,
    pub actions: Vec<ActionId>,
    pub outcome: Outcome,
    pub steps: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("start vertex {0} does not exist")]
    UnknownStart(VertexId),
    #[error("start vertex {0} belongs to P1 but the strategy does not cover it")]
    StartOutsideStrategy(VertexId),
    #[error("step cap must be at least 1")]
    ZeroCap,
    #[error("episode count must be at least 1")]
    NoEpisodes,
}

/// Per-vertex move tables, precomputed once per batch.
struct Engine<'a, 'g> {
    h: &'a Hypergame<'g>,
    /// P1: the strategy's move, or the lowest defined action off-strategy.
    p1_move: Vec<Option<(ActionId, VertexId)>>,
    /// P2: support moves, flattened; `p2_range[v]` indexes into `p2_moves`.
    p2_moves: Vec<(ActionId, VertexId)>,
    p2_range: Vec<(u32, u32)>,
}

impl<'a, 'g> Engine<'a, 'g> {
    fn new(h: &'a Hypergame<'g>, strat: &StrategyMap) -> Self {
        let n = h.num_vertices();
        let mut p1_move = vec![None; n];
        let mut p2_moves = Vec::new();
        let mut p2_range = vec![(0, 0); n];
        for v in h.vertex_ids() {
            match h.owner(v) {
                Player::P1 => {
                    p1_move[v.index()] = match strat.choose(v) {
                        Some(a) => h.delta(v, a).map(|w| (a, w)),
                        None => h.succ(v).first().copied(),
                    };
                }
                Player::P2 => {
                    let lo = p2_moves.len() as u32;
                    let support = strat
                        .p2_support
                        .get(&v)
                        .copied()
                        .unwrap_or_else(|| h.succ(v).iter().map(|&(b, _)| b).collect());
                    p2_moves.extend(h.succ(v).iter().filter(|(b, _)| support.contains(*b)));
                    p2_range[v.index()] = (lo, p2_moves.len() as u32);
                }
            }
        }
        Engine { h, p1_move, p2_moves, p2_range }
    }

    /// Plays one episode. `trace` receives every move when present.
    fn play(
        &self,
        start: VertexId,
        seed: u64,
        cap: u32,
        kind: PolicyKind,
        weights: &mut WeightCache,
        mut trace: Option<&mut Vec<(ActionId, VertexId)>>,
    ) -> (Outcome, u32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        weights.next_episode();
        let mut v = start;
        let mut steps = 0;
        loop {
            if self.h.is_final(v) {
                return (Outcome::ReachedF, steps);
            }
            if steps >= cap {
                return (Outcome::StepCap, steps);
            }
            let mv = match self.h.owner(v) {
                Player::P1 => self.p1_move[v.index()],
                Player::P2 => {
                    let (lo, hi) = self.p2_range[v.index()];
                    let moves = &self.p2_moves[lo as usize..hi as usize];
                    match (moves.len(), kind) {
                        (0, _) => None,
                        (1, _) => Some(moves[0]),
                        (len, PolicyKind::Uniform) => Some(moves[rng.gen_range(0..len)]),
                        (_, PolicyKind::RandomWeights) => {
                            let w = weights.get(v, lo as usize, moves.len(), &mut rng);
                            let mut x = rng.gen::<f64>() * w.iter().sum::<f64>();
                            let mut pick = moves.len() - 1;
                            for (i, wi) in w.iter().enumerate() {
                                if x < *wi {
                                    pick = i;
                                    break;
                                }
                                x -= wi;
                            }
                            Some(moves[pick])
                        }
                    }
                }
            };
            let Some((a, w)) = mv else {
                return (Outcome::DeadEnd, steps);
            };
            if let Some(t) = trace.as_deref_mut() {
                t.push((a, w));
            }
            v = w;
            steps += 1;
        }
    }
}

/// Lazily drawn per-episode weights, invalidated by bumping an epoch counter.
struct WeightCache {
    epoch: u32,
    stamp: Vec<u32>,
    values: Vec<f64>,
}

impl WeightCache {
    fn new(engine: &Engine<'_, '_>) -> Self {
        WeightCache {
            epoch: 0,
            stamp: vec![0; engine.h.num_vertices()],
            values: vec![0.0; engine.p2_moves.len()],
        }
    }

    fn next_episode(&mut self) {
        self.epoch += 1;
    }

    fn get(&mut self, v: VertexId, offset: usize, len: usize, rng: &mut ChaCha8Rng) -> &[f64] {
        if self.stamp[v.index()] != self.epoch {
            self.stamp[v.index()] = self.epoch;
            for w in &mut self.values[offset..offset + len] {
                *w = rng.gen_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1);
            }
        }
        &self.values[offset..offset + len]
    }
}

/// Plays P1's strategy (lowest action of `p1(v)`) from `start` until a final
/// vertex, a dead end, or `cap` moves.
pub fn run_episode(
    h: &Hypergame<'_>,
    strat: &StrategyMap,
    policy: PolicyKind,
    start: VertexId,
    seed: u64,
    cap: u32,
) -> Result<Episode, SimError> {
    check_start(h, strat, start)?;
    if cap == 0 {
        return Err(SimError::ZeroCap);
    }
    let engine = Engine::new(h, strat);
    let mut weights = WeightCache::new(&engine);
    Ok(traced(&engine, &mut weights, policy, start, seed, cap))
}

fn traced(
    engine: &Engine<'_, '_>,
    weights: &mut WeightCache,
    policy: PolicyKind,
    start: VertexId,
    seed: u64,
    cap: u32,
) -> Episode {
    let mut moves = Vec::new();
    let (outcome, steps) = engine.play(start, seed, cap, policy, weights, Some(&mut moves));
    let mut hrun = vec![start];
    hrun.extend(moves.iter().map(|&(_, w)| w));
    Episode { seed, start, hrun, actions: moves.into_iter().map(|(a, _)| a).collect(), outcome, steps }
}

fn check_start(h: &Hypergame<'_>, strat: &StrategyMap, start: VertexId) -> Result<(), SimError> {
    if start.index() >= h.num_vertices() {
        return Err(SimError::UnknownStart(start));
    }
    if h.owner(start) == Player::P1 && !h.is_final(start) && strat.choose(start).is_none() {
        return Err(SimError::StartOutsideStrategy(start));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartStats {
    pub start: VertexId,
    pub episodes: u32,
    pub reached: u32,
    pub reach_rate: f64,
    pub mean_steps: f64,
    pub max_steps: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub policy: PolicyKind,
    pub cap: u32,
    pub base_seed: u64,
    pub per_start: Vec<StartStats>,
    /// First episode, in start order then seed order, that missed `hfinal`.
    pub counterexample: Option<Episode>,
}

impl BatchStats {
    pub fn all_reached(&self) -> bool {
        self.per_start.iter().all(|s| s.reached == s.episodes)
    }

    pub fn total_episodes(&self) -> u64 {
        self.per_start.iter().map(|s| s.episodes as u64).sum()
    }
}

/// Runs `n` episodes from every start; episode `i` uses seed `base_seed + i`.
pub fn run_batch(
    h: &Hypergame<'_>,
    strat: &StrategyMap,
    policy: PolicyKind,
    starts: &[VertexId],
    n: u32,
    cap: u32,
    base_seed: u64,
) -> Result<BatchStats, SimError> {
    if n == 0 {
        return Err(SimError::NoEpisodes);
    }
    if cap == 0 {
        return Err(SimError::ZeroCap);
    }
    for &s in starts {
        check_start(h, strat, s)?;
    }
    let engine = Engine::new(h, strat);
    let mut weights = WeightCache::new(&engine);
    let mut per_start = Vec::with_capacity(starts.len());
    let mut counterexample = None;
    for &start in starts {
        let (mut reached, mut total_steps, mut max_steps) = (0u32, 0u64, 0u32);
        for i in 0..n {
            let seed = base_seed.wrapping_add(i as u64);
            let (outcome, steps) = engine.play(start, seed, cap, policy, &mut weights, None);
            if outcome == Outcome::ReachedF {
                reached += 1;
            } else if counterexample.is_none() {
                counterexample = Some(traced(&engine, &mut weights, policy, start, seed, cap));
            }
            total_steps += steps as u64;
            max_steps = max_steps.max(steps);
        }
        per_start.push(StartStats {
            start,
            episodes: n,
            reached,
            reach_rate: reached as f64 / n as f64,
            mean_steps: total_steps as f64 / n as f64,
            max_steps,
        });
    }
    Ok(BatchStats { policy, cap, base_seed, per_start, counterexample })
}
