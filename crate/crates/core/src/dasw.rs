//! Deceptive almost-sure winning (DASW) regions and strategies.
//!
//! P2 plays only *perceptually permissive* actions: at `(s, i)` the moves whose
//! successor lies in `Win2` of the game P2 believes in, `G(γ(i))`. P1 knows
//! this and exploits the gap between `γ(i)` and her real alphabet.
//!
//! The region is the limit of the nested fixed point
//!
//! ```text
//! Z_0     = Win1(A1) lifted to every materialized perception
//! C_k     = Safe-2(V \ Z_k)
//! Z_{k+1} = Safe-1(V \ C_k)
//! ```
//!
//! where `Safe-i(U)` is the greatest subset of `U` that player `i` can stay in
//! under the permissive-move semantics. Final vertices are absorbing and always
//! satisfy the stay condition.
//!
//! [`Safe1Mode::Literal`] takes `Safe-1` exactly as written. That set can hold
//! vertices from which P1 can stay forever without ever making progress to
//! `Z_k`, so the default [`Safe1Mode::ProgressCoupled`] alternates `Safe-1`
//! with a positive-reachability cut until both agree.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::asw::{asw, WinRegions};
use crate::game::{ActionId, ActionSet, Player};
use crate::hypergame::{Hypergame, PerceptionId, VertexId};

/// `M(v)` for every P2 vertex plus one solved perceptual game per perception.
#[derive(Clone, Debug)]
pub struct PermissiveTable {
    allowed: Vec<ActionSet>,
    win2: Vec<FixedBitSet>,
}

impl PermissiveTable {
    /// `M(v)`. Always empty on P1 vertices.
    pub fn allowed(&self, v: VertexId) -> ActionSet {
        self.allowed[v.index()]
    }

    /// `Win2(γ(i))` over base game states.
    pub fn win2(&self, p: PerceptionId) -> &FixedBitSet {
        &self.win2[p.index()]
    }

    /// Actions a P2 policy randomizes over at `v`: `M(v)`, or every defined
    /// action when P2 believes all of them lose.
    pub fn support(&self, h: &Hypergame<'_>, v: VertexId) -> ActionSet {
        let m = self.allowed(v);
        if m.is_empty() {
            h.succ(v).iter().map(|&(b, _)| b).collect()
        } else {
            m
        }
    }
}

pub fn permissive(h: &Hypergame<'_>) -> PermissiveTable {
    let base = h.base();
    let win2: Vec<FixedBitSet> = h
        .perceptions()
        .iter()
        .map(|(_, x)| {
            let g = base.restrict(x).expect("perceptions are subsets of A1");
            asw(&g).win2
        })
        .collect();
    let allowed = h
        .vertex_ids()
        .map(|v| {
            if h.owner(v) != Player::P2 {
                return ActionSet::EMPTY;
            }
            let w2 = &win2[h.vertex(v).perception.index()];
            h.succ(v)
                .iter()
                .filter(|&&(_, w)| w2.contains(h.state(w).index()))
                .map(|&(b, _)| b)
                .collect()
        })
        .collect();
    PermissiveTable { allowed, win2 }
}

/// Range of P1's universal quantifier in `Safe-2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Safe2Quantifier {
    /// Every defined action of `A1`.
    #[default]
    Full,
    /// Only actions in P2's current perception `γ(i)`.
    Perceived,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Safe1Mode {
    /// `Safe-1(V \ C_k)` alone.
    Literal,
    /// Greatest `Y ⊆ V \ C_k` closed under `Safe-1` from which every vertex
    /// reaches `Z_k` with positive probability inside `Y`.
    #[default]
    ProgressCoupled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DaswOptions {
    pub safe2_quantifier: Safe2Quantifier,
    pub safe1_mode: Safe1Mode,
}

/// Result of one inner greatest fixed point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafeRun {
    pub set: FixedBitSet,
    /// Number of rounds in which at least one vertex was dropped.
    pub shrink_rounds: u32,
}

impl SafeRun {
    /// Iterations of `Y_{k+1} = Y_k ∩ Pre(Y_k)` up to and including the one
    /// that confirms the fixed point. The seed counts as the first iterate, so
    /// even an immediately stable input reports two.
    pub fn passes(&self) -> u32 {
        iteration_count(self.shrink_rounds)
    }
}

fn iteration_count(changes: u32) -> u32 {
    (changes + 1).max(2)
}

#[derive(Clone, Debug)]
pub struct DaswResult {
    /// `Z_0 ⊊ Z_1 ⊊ … ⊊ Z_K`; the last entry is the region.
    pub levels: Vec<FixedBitSet>,
    /// `C_k` for every outer iteration, including the one that confirmed the
    /// fixed point.
    pub safe2_trace: Vec<SafeRun>,
    pub safe1_trace: Vec<SafeRun>,
    /// Rank that P1's strategy decreases; `None` outside the region, or on
    /// vertices of a literal `Safe-1` set that cannot make progress.
    pub rank: Vec<Option<u32>>,
    pub options: DaswOptions,
    base_regions: WinRegions,
}

impl DaswResult {
    pub fn region(&self) -> &FixedBitSet {
        self.levels.last().expect("Z_0 always exists")
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.region().contains(v.index())
    }

    /// Smallest `k` with `v ∈ Z_k`.
    pub fn level(&self, v: VertexId) -> Option<usize> {
        self.levels.iter().position(|z| z.contains(v.index()))
    }

    pub fn rank(&self, v: VertexId) -> Option<u32> {
        self.rank[v.index()]
    }

    /// Outer iterations up to the one that repeats the previous level, with
    /// the same counting as [`SafeRun::passes`].
    pub fn outer_iterations(&self) -> u32 {
        iteration_count(self.levels.len() as u32 - 1)
    }

    /// `Win1(A1)` of the base game.
    pub fn base_regions(&self) -> &WinRegions {
        &self.base_regions
    }
}

struct Ctx<'a, 'g> {
    h: &'a Hypergame<'g>,
    perm: &'a PermissiveTable,
    pred: Vec<Vec<(ActionId, VertexId)>>,
    opts: DaswOptions,
}

impl Ctx<'_, '_> {
    fn stays(&self, who: Player, v: VertexId, y: &FixedBitSet) -> bool {
        let h = self.h;
        if h.is_final(v) {
            return true;
        }
        let inside = |&(_, w): &(ActionId, VertexId)| y.contains(w.index());
        match (who, h.owner(v)) {
            (Player::P1, Player::P1) => h.succ(v).iter().any(inside),
            (Player::P2, Player::P1) => {
                let scope = match self.opts.safe2_quantifier {
                    Safe2Quantifier::Full => h.base().a1(),
                    Safe2Quantifier::Perceived => h.perceived(v),
                };
                h.succ(v).iter().filter(|(a, _)| scope.contains(*a)).all(inside)
            }
            (_, Player::P2) => {
                let m = self.perm.allowed(v);
                h.succ(v).iter().filter(|(b, _)| m.contains(*b)).all(inside)
            }
        }
    }

    /// Round-based worklist for the greatest fixed point of `who`'s stay
    /// condition inside `within`. Every round drops all violators at once.
    fn safe(&self, who: Player, within: &FixedBitSet) -> SafeRun {
        let n = self.h.num_vertices();
        let mut y = within.clone();
        let mut candidates: Vec<VertexId> = y.ones().map(|i| VertexId(i as u32)).collect();
        let mut shrink_rounds = 0;
        let mut queued = FixedBitSet::with_capacity(n);
        loop {
            let dropped: Vec<VertexId> = candidates
                .iter()
                .copied()
                .filter(|&v| y.contains(v.index()) && !self.stays(who, v, &y))
                .collect();
            if dropped.is_empty() {
                break;
            }
            shrink_rounds += 1;
            for v in &dropped {
                y.set(v.index(), false);
            }
            candidates.clear();
            queued.clear();
            for v in dropped {
                for &(_, u) in &self.pred[v.index()] {
                    if y.contains(u.index()) && !queued.put(u.index()) {
                        candidates.push(u);
                    }
                }
            }
        }
        SafeRun { set: y, shrink_rounds }
    }

    /// Positive-reachability layers toward `target` inside `within`: P1 needs
    /// one action into a lower layer, P2 one permissive action.
    fn progress_layers(&self, within: &FixedBitSet, target: &FixedBitSet) -> Vec<Option<u32>> {
        let h = self.h;
        let mut layer = vec![None; h.num_vertices()];
        let mut frontier: Vec<VertexId> = Vec::new();
        for i in target.ones() {
            if within.contains(i) {
                layer[i] = Some(0);
                frontier.push(VertexId(i as u32));
            }
        }
        let mut depth = 0;
        while !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            for w in frontier {
                for &(a, v) in &self.pred[w.index()] {
                    if layer[v.index()].is_some() || !within.contains(v.index()) {
                        continue;
                    }
                    let counts = match h.owner(v) {
                        Player::P1 => true,
                        Player::P2 => self.perm.allowed(v).contains(a),
                    };
                    if counts {
                        layer[v.index()] = Some(depth);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        layer
    }

    fn safe1(&self, within: &FixedBitSet, target: &FixedBitSet) -> SafeRun {
        let mut run = self.safe(Player::P1, within);
        if self.opts.safe1_mode == Safe1Mode::Literal {
            return run;
        }
        loop {
            let layers = self.progress_layers(&run.set, target);
            let mut reach = FixedBitSet::with_capacity(self.h.num_vertices());
            for (i, l) in layers.iter().enumerate() {
                reach.set(i, l.is_some());
            }
            if reach == run.set {
                return run;
            }
            let next = self.safe(Player::P1, &reach);
            run = SafeRun { set: next.set, shrink_rounds: run.shrink_rounds + 1 + next.shrink_rounds };
        }
    }
}

/// Solves with the default options.
pub fn dasw(h: &Hypergame<'_>, perm: &PermissiveTable) -> DaswResult {
    dasw_with(h, perm, DaswOptions::default())
}

pub fn dasw_with(h: &Hypergame<'_>, perm: &PermissiveTable, opts: DaswOptions) -> DaswResult {
    let ctx = Ctx { h, perm, pred: h.predecessors(), opts };
    let n = h.num_vertices();
    let base_regions = asw(h.base());

    let mut z0 = FixedBitSet::with_capacity(n);
    let mut rank = vec![None; n];
    for v in h.vertex_ids() {
        if let Some(l) = base_regions.level(h.state(v)) {
            z0.insert(v.index());
            rank[v.index()] = Some(l);
        }
    }
    let mut offset = rank.iter().flatten().max().map_or(0, |m| m + 1);

    let mut levels = vec![z0];
    let mut safe2_trace = Vec::new();
    let mut safe1_trace = Vec::new();
    loop {
        let z = levels.last().unwrap();
        let mut outside = z.clone();
        outside.toggle_range(..);
        let c = ctx.safe(Player::P2, &outside);
        let mut keep = c.set.clone();
        keep.toggle_range(..);
        let next = ctx.safe1(&keep, z);
        safe2_trace.push(c);
        safe1_trace.push(next.clone());
        if next.set == *z {
            break;
        }
        debug_assert!(z.is_subset(&next.set));
        let layers = ctx.progress_layers(&next.set, z);
        let mut top = offset;
        for v in next.set.difference(z) {
            if let Some(l) = layers[v] {
                rank[v] = Some(offset + l - 1);
                top = top.max(offset + l);
            }
        }
        offset = top;
        levels.push(next.set);
    }

    DaswResult { levels, safe2_trace, safe1_trace, rank, options: opts, base_regions }
}

/// P1's deceptive strategy plus the P2 supports it was synthesized against.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyMap {
    /// Rank-decreasing actions at every P1 vertex of the region outside `hfinal`.
    pub p1: BTreeMap<VertexId, ActionSet>,
    /// Support of P2's randomized policy at every P2 vertex.
    pub p2_support: BTreeMap<VertexId, ActionSet>,
}

impl StrategyMap {
    /// The action P1 actually plays: lowest index of `p1(v)`.
    pub fn choose(&self, v: VertexId) -> Option<ActionId> {
        self.p1.get(&v).and_then(|s| s.first())
    }
}

pub fn extract_strategy(h: &Hypergame<'_>, perm: &PermissiveTable, result: &DaswResult) -> StrategyMap {
    let mut out = StrategyMap::default();
    for v in h.vertex_ids() {
        match h.owner(v) {
            Player::P2 => {
                out.p2_support.insert(v, perm.support(h, v));
            }
            Player::P1 => {
                if h.is_final(v) || !result.contains(v) {
                    continue;
                }
                let actions: ActionSet = match result.rank(v) {
                    Some(r) => h
                        .succ(v)
                        .iter()
                        .filter(|&&(_, w)| result.rank(w).is_some_and(|rw| rw < r))
                        .map(|&(a, _)| a)
                        .collect(),
                    // Literal Safe-1 leftovers: stay in the region at least.
                    None => h
                        .succ(v)
                        .iter()
                        .filter(|&&(_, w)| result.contains(w))
                        .map(|&(a, _)| a)
                        .collect(),
                };
                out.p1.insert(v, actions);
            }
        }
    }
    out
}

/// Violations of the per-level closure and progress properties.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantReport {
    /// `(k, v)`: `v ∈ Z_k` can be forced out of `Z_k` (P2 vertex) or has no
    /// action staying in `Z_k` (P1 vertex).
    pub closure: Vec<(usize, VertexId)>,
    /// `(k, v)`: `v ∈ Z_{k+1} \ Z_k` cannot reach `Z_k` inside `Z_{k+1}`.
    pub progress: Vec<(usize, VertexId)>,
    /// `(k, v)`: `v ∈ Z_{k+1} \ Z_k` has no single move into `Z_k`. Not a
    /// violation; listed because such vertices need more than one step.
    pub one_step_gaps: Vec<(usize, VertexId)>,
}

impl InvariantReport {
    pub fn holds(&self) -> bool {
        self.closure.is_empty() && self.progress.is_empty()
    }
}

pub fn check_invariants(h: &Hypergame<'_>, perm: &PermissiveTable, result: &DaswResult) -> InvariantReport {
    let ctx = Ctx { h, perm, pred: h.predecessors(), opts: result.options };
    let mut report = InvariantReport::default();
    for (k, z) in result.levels.iter().enumerate() {
        for i in z.ones() {
            let v = VertexId(i as u32);
            if h.is_final(v) {
                continue;
            }
            let ok = match h.owner(v) {
                Player::P1 => h.succ(v).iter().any(|&(_, w)| z.contains(w.index())),
                Player::P2 => {
                    let m = perm.allowed(v);
                    h.succ(v).iter().filter(|(b, _)| m.contains(*b)).all(|&(_, w)| z.contains(w.index()))
                }
            };
            if !ok {
                report.closure.push((k, v));
            }
        }
    }
    for (k, pair) in result.levels.windows(2).enumerate() {
        let (z, next) = (&pair[0], &pair[1]);
        let layers = ctx.progress_layers(next, z);
        for i in next.difference(z) {
            let v = VertexId(i as u32);
            if layers[i].is_none() {
                report.progress.push((k, v));
            }
            let m = match h.owner(v) {
                Player::P1 => h.base().a1(),
                Player::P2 => perm.allowed(v),
            };
            if !h.succ(v).iter().any(|&(a, w)| m.contains(a) && z.contains(w.index())) {
                report.one_step_gaps.push((k, v));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{example_game, GameBuilder, GameGraph};
    use crate::hypergame::build;
    use crate::inference::InferenceMechanism;
    use std::collections::BTreeSet;

    fn example() -> (GameGraph, ActionSet, InferenceMechanism) {
        let g = example_game();
        let x0 = ActionSet::singleton(g.find_action("a2").unwrap());
        let m = InferenceMechanism::union(g.a1());
        (g, x0, m)
    }

    fn ids(h: &Hypergame<'_>, pairs: &[(&str, bool)]) -> BTreeSet<usize> {
        // `true` means the perception is still the initial {a2}.
        pairs
            .iter()
            .map(|&(s, deceived)| {
                let p = PerceptionId(if deceived { 0 } else { 1 });
                h.find(h.base().find_state(s).unwrap(), p).unwrap().index()
            })
            .collect()
    }

    fn set(b: &FixedBitSet) -> BTreeSet<usize> {
        b.ones().collect()
    }

    #[test]
    fn permissive_actions_of_example() {
        let (g, x0, m) = example();
        let h = build(&g, x0, &m).unwrap();
        let perm = permissive(&h);
        let b = |l| g.find_action(l).unwrap();
        let v = |s, p| h.find(g.find_state(s).unwrap(), PerceptionId(p)).unwrap();
        assert_eq!(perm.allowed(v("s2", 0)), [b("b1"), b("b2")].into_iter().collect());
        assert_eq!(perm.allowed(v("s2", 1)), ActionSet::singleton(b("b2")));
        assert_eq!(perm.allowed(v("s0", 1)), ActionSet::EMPTY);
        assert_eq!(perm.allowed(v("s1", 0)), ActionSet::EMPTY);
    }

    #[test]
    fn example_fixed_point_trace() {
        let (g, x0, m) = example();
        let h = build(&g, x0, &m).unwrap();
        let perm = permissive(&h);
        for mode in [Safe1Mode::Literal, Safe1Mode::ProgressCoupled] {
            let r = dasw_with(&h, &perm, DaswOptions { safe1_mode: mode, ..Default::default() });
            assert_eq!(set(&r.levels[0]), ids(&h, &[("s0", false), ("s1", false), ("s1", true)]));
            assert_eq!(set(&r.safe2_trace[0].set), ids(&h, &[("s2", false), ("s3", false)]));
            assert_eq!(r.safe2_trace[0].passes(), 3);
            assert_eq!(r.safe1_trace[0].passes(), 2);
            assert_eq!(r.outer_iterations(), 2);
            assert_eq!(
                set(r.region()),
                ids(&h, &[("s0", false), ("s1", false), ("s1", true), ("s2", true), ("s3", true)])
            );
        }
    }

    #[test]
    fn example_strategy_avoids_revealing_a1_at_s3() {
        let (g, x0, m) = example();
        let h = build(&g, x0, &m).unwrap();
        let perm = permissive(&h);
        let r = dasw(&h, &perm);
        let st = extract_strategy(&h, &perm, &r);
        let v = |s, p| h.find(g.find_state(s).unwrap(), PerceptionId(p)).unwrap();
        let a = |l| g.find_action(l).unwrap();
        assert_eq!(st.p1[&v("s3", 0)], ActionSet::singleton(a("a2")));
        assert_eq!(st.choose(v("s1", 0)), Some(a("a1")));
        assert_eq!(st.choose(v("s1", 1)), Some(a("a1")));
        assert!(!st.p1.contains_key(&v("s0", 1)));
        assert!(!st.p1.contains_key(&v("s3", 1)));
        for (&u, acts) in &st.p1 {
            let ru = r.rank(u).unwrap();
            for a in *acts {
                assert!(r.rank(h.delta(u, a).unwrap()).unwrap() < ru);
            }
        }
    }

    #[test]
    fn example_invariants_and_one_step_gap() {
        let (g, x0, m) = example();
        let h = build(&g, x0, &m).unwrap();
        let perm = permissive(&h);
        let r = dasw(&h, &perm);
        let report = check_invariants(&h, &perm, &r);
        assert!(report.holds(), "{report:?}");
        // (s3,{a2}) enters Z_1 although neither of its moves lands in Z_0.
        let s3 = h.find(g.find_state("s3").unwrap(), PerceptionId(0)).unwrap();
        assert_eq!(report.one_step_gaps, vec![(0, s3)]);
    }

    #[test]
    fn full_knowledge_adds_nothing() {
        let g = example_game();
        let m = InferenceMechanism::union(g.a1());
        let h = build(&g, g.a1(), &m).unwrap();
        let perm = permissive(&h);
        let r = dasw(&h, &perm);
        assert_eq!(r.levels.len(), 1);
        assert_eq!(set(&h.project(r.region())), set(&asw(&g).win1).intersection(&set(&h.covered_states())).copied().collect());
    }

    #[test]
    fn safe_on_empty_set_is_empty() {
        let (g, x0, m) = example();
        let h = build(&g, x0, &m).unwrap();
        let perm = permissive(&h);
        let ctx = Ctx { h: &h, perm: &perm, pred: h.predecessors(), opts: DaswOptions::default() };
        let empty = FixedBitSet::with_capacity(h.num_vertices());
        assert_eq!(ctx.safe(Player::P1, &empty).set, empty);
        assert_eq!(ctx.safe(Player::P2, &empty).set, empty);
    }

    /// P1 can loop at `v` forever or step into `w`. P2 believes both of its
    /// moves at `w` are safe: `u` only wins through a hidden action, and `trap`
    /// is P2's own sink.
    #[test]
    fn literal_safe1_keeps_a_vertex_without_progress() {
        let mut b = GameBuilder::new();
        let v = b.state("v", Player::P1, false);
        let w = b.state("w", Player::P2, false);
        let u = b.state("u", Player::P1, false);
        let goal = b.state("goal", Player::P2, true);
        let trap = b.state("trap", Player::P2, false);
        let stay = b.action("stay", Player::P1);
        let go = b.action("go", Player::P1);
        let hidden = b.action("hidden", Player::P1);
        let win = b.action("win", Player::P2);
        let lose = b.action("lose", Player::P2);
        b.transition(v, stay, v).transition(v, go, w);
        b.transition(w, win, u).transition(w, lose, trap);
        b.transition(u, hidden, goal);
        b.transition(trap, lose, trap);
        b.initial(v);
        let g = b.build().unwrap();
        let x0: ActionSet = [stay, go].into_iter().collect();
        let m = InferenceMechanism::union(g.a1());
        let h = build(&g, x0, &m).unwrap();
        let perm = permissive(&h);
        let literal = dasw_with(&h, &perm, DaswOptions { safe1_mode: Safe1Mode::Literal, ..Default::default() });
        let coupled = dasw(&h, &perm);
        let hv = h.find(v, PerceptionId(0)).unwrap();
        assert!(literal.contains(hv));
        assert_eq!(literal.rank(hv), None);
        assert!(!coupled.contains(hv));
        assert!(!check_invariants(&h, &perm, &literal).holds());
        assert!(check_invariants(&h, &perm, &coupled).holds());
    }

    /// Whole-set transcription of the nested fixed point, kept deliberately
    /// naive as a reference for the worklist implementation.
    fn literal_nested(h: &Hypergame<'_>, perm: &PermissiveTable, q: Safe2Quantifier) -> (Vec<BTreeSet<usize>>, Vec<(u32, u32)>) {
        let all: BTreeSet<usize> = (0..h.num_vertices()).collect();
        let stays = |who: Player, v: usize, y: &BTreeSet<usize>| {
            let vid = VertexId(v as u32);
            if h.is_final(vid) {
                return true;
            }
            let succ = h.succ(vid);
            match (who, h.owner(vid)) {
                (Player::P1, Player::P1) => succ.iter().any(|(_, w)| y.contains(&w.index())),
                (Player::P2, Player::P1) => {
                    let scope = if q == Safe2Quantifier::Full { h.base().a1() } else { h.perceived(vid) };
                    succ.iter().filter(|(a, _)| scope.contains(*a)).all(|(_, w)| y.contains(&w.index()))
                }
                (_, Player::P2) => succ
                    .iter()
                    .filter(|(b, _)| perm.allowed(vid).contains(*b))
                    .all(|(_, w)| y.contains(&w.index())),
            }
        };
        let safe = |who: Player, u: BTreeSet<usize>| {
            let mut y = u;
            let mut distinct = 1;
            loop {
                let next: BTreeSet<usize> = y.iter().copied().filter(|&v| stays(who, v, &y)).collect();
                if next == y {
                    return (y, distinct.max(2));
                }
                distinct += 1;
                y = next;
            }
        };
        let z0: BTreeSet<usize> = {
            let r = asw(h.base());
            all.iter().copied().filter(|&v| r.is_win1(h.state(VertexId(v as u32)))).collect()
        };
        let mut levels = vec![z0];
        let mut passes = Vec::new();
        loop {
            let z = levels.last().unwrap().clone();
            let (c, p2) = safe(Player::P2, all.difference(&z).copied().collect());
            let (next, p1) = safe(Player::P1, all.difference(&c).copied().collect());
            passes.push((p2, p1));
            if next == z {
                return (levels, passes);
            }
            levels.push(next);
        }
    }

    #[test]
    fn literal_mode_matches_set_algebra_on_random_instances() {
        for seed in 0..300 {
            let inst = crate::corpus::random_instance(seed, &Default::default());
            let h = build(&inst.game, inst.x0, &inst.mechanism).unwrap();
            let perm = permissive(&h);
            for q in [Safe2Quantifier::Full, Safe2Quantifier::Perceived] {
                let opts = DaswOptions { safe2_quantifier: q, safe1_mode: Safe1Mode::Literal };
                let r = dasw_with(&h, &perm, opts);
                let (levels, passes) = literal_nested(&h, &perm, q);
                let got: Vec<BTreeSet<usize>> = r.levels.iter().map(set).collect();
                assert_eq!(got, levels, "seed {seed}");
                let got_passes: Vec<(u32, u32)> = r
                    .safe2_trace
                    .iter()
                    .zip(&r.safe1_trace)
                    .map(|(a, b)| (a.passes(), b.passes()))
                    .collect();
                assert_eq!(got_passes, passes, "seed {seed}");
            }
        }
    }
}
