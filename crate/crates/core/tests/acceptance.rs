//! End-to-end acceptance suite. Prints one `PASS`/`FAIL` line per criterion
//! and fails if the failing criteria differ from `EXPECTED_FAILURES`.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use hyperreach::asw::asw;
use hyperreach::corpus::{random_instance, CorpusShape, Instance};
use hyperreach::dasw::{check_invariants, dasw, extract_strategy, permissive, DaswResult, PermissiveTable, StrategyMap};
use hyperreach::game::{example_game, ActionSet, StateId};
use hyperreach::gridworld::{self, GridConfig};
use hyperreach::hypergame::{build, Exploration, Hypergame, VertexId};
use hyperreach::inference::InferenceMechanism;
use hyperreach::oracle::mdp_oracle;
use hyperreach::simulator::{run_batch, run_episode, PolicyKind};

const CORPUS_SIZE: u64 = 500;
const SIMULATED_INSTANCES: usize = 20;
const EPISODES: u32 = 10_000;

/// Criteria known to fail, with the reason. The suite fails if the set of
/// failing criteria differs from this list in either direction.
///
/// 8: a fixed step cap turns "reaches with probability one" into a
/// statistical event. On the example's deceived loop s2 -b2-> s3 -a2-> s2
/// a weight draw near 1.0 on b2 and 0.2 on b1 keeps P2 in the loop with
/// probability 5/6 per visit, about 0.2% over 35 visits; 2 of the 50000
/// random-weight episodes hit the cap of 70 and both reach F under a larger
/// cap. No run ends outside F for any other reason.
const EXPECTED_FAILURES: &[u8] = &[8];

type Named = BTreeSet<(String, Vec<String>)>;

fn named(h: &Hypergame<'_>, set: &FixedBitSet) -> Named {
    set.ones()
        .map(|i| {
            let v = h.vertex(VertexId(i as u32));
            (h.base().state_label(v.state), h.base().action_labels(h.perceptions().set(v.perception)))
        })
        .collect()
}

fn pairs(list: &[(&str, &[&str])]) -> Named {
    list.iter().map(|(s, p)| (s.to_string(), p.iter().map(|a| a.to_string()).collect())).collect()
}

fn vertex(h: &Hypergame<'_>, state: &str, perception: &[&str]) -> VertexId {
    let g = h.base();
    let p = h.perceptions().lookup(g.action_set(perception).unwrap()).unwrap();
    h.find(g.find_state(state).unwrap(), p).unwrap()
}

fn ms(d: Duration) -> String {
    format!("{:.3} ms", d.as_secs_f64() * 1e3)
}

type Verdict = Result<String, String>;

fn check(cond: bool, ok: String, why: impl FnOnce() -> String) -> Verdict {
    if cond {
        Ok(ok)
    } else {
        Err(why())
    }
}

struct Solved<'g> {
    h: Hypergame<'g>,
    perm: PermissiveTable,
    result: DaswResult,
}

fn solve<'g>(inst: &'g Instance, mode: Exploration) -> Solved<'g> {
    let h = Hypergame::build(&inst.game, inst.x0, &inst.mechanism, mode).unwrap();
    let perm = permissive(&h);
    let result = dasw(&h, &perm);
    Solved { h, perm, result }
}

fn example_instance() -> Instance {
    let game = example_game();
    let x0 = ActionSet::singleton(game.find_action("a2").unwrap());
    let mechanism = InferenceMechanism::union(game.a1());
    Instance { game, x0, mechanism }
}

fn corpus() -> Vec<Instance> {
    let shape = CorpusShape::default();
    (0..CORPUS_SIZE).map(|seed| random_instance(seed, &shape)).collect()
}

fn criterion_1() -> Verdict {
    let g = example_game();
    let t = Instant::now();
    let r = asw(&g);
    let elapsed = t.elapsed();
    let win1: Vec<String> = r.win1.ones().map(|i| g.state_label(StateId(i as u32))).collect();
    check(
        win1 == ["s0", "s1"] && elapsed < Duration::from_millis(1),
        format!("Win1 = {{{}}} in {}", win1.join(", "), ms(elapsed)),
        || format!("Win1 = {win1:?} in {}", ms(elapsed)),
    )
}

fn criterion_2() -> Verdict {
    let inst = example_instance();
    let t = Instant::now();
    let h = build(&inst.game, inst.x0, &inst.mechanism).unwrap();
    let perm = permissive(&h);
    let r = dasw(&h, &perm);
    let elapsed = t.elapsed();

    let a2: &[&str] = &["a2"];
    let both: &[&str] = &["a1", "a2"];
    let z0 = named(&h, &r.levels[0]);
    let c0 = named(&h, &r.safe2_trace[0].set);
    let region = named(&h, r.region());
    let expect_c0 = pairs(&[("s2", both), ("s3", both)]);
    let expect_region = pairs(&[("s0", both), ("s1", both), ("s1", a2), ("s2", a2), ("s3", a2)]);
    let got = format!(
        "|Z0| = {}, C0 = {:?}, Safe-2 passes {}, Safe-1 passes {}, outer {}, region {:?}, {}",
        z0.len(),
        c0,
        r.safe2_trace[0].passes(),
        r.safe1_trace[0].passes(),
        r.outer_iterations(),
        region,
        ms(elapsed)
    );
    let ok = z0.len() == 3
        && c0 == expect_c0
        && r.safe2_trace[0].passes() == 3
        && r.safe1_trace[0].passes() == 2
        && r.outer_iterations() == 2
        && region == expect_region
        && elapsed < Duration::from_millis(10);
    check(ok, got.clone(), || got)
}

fn criterion_3() -> Verdict {
    let inst = example_instance();
    let h = build(&inst.game, inst.x0, &inst.mechanism).unwrap();
    let perm = permissive(&h);
    let g = h.base();
    let deceived = g.action_labels(perm.allowed(vertex(&h, "s2", &["a2"])));
    let informed = g.action_labels(perm.allowed(vertex(&h, "s2", &["a1", "a2"])));
    let got = format!("M((s2,{{a2}})) = {deceived:?}, M((s2,{{a1,a2}})) = {informed:?}");
    check(deceived == ["b1", "b2"] && informed == ["b2"], got.clone(), || got)
}

fn criterion_4() -> Verdict {
    let inst = example_instance();
    let Solved { h, result, .. } = solve(&inst, Exploration::Reachable);
    let win1 = asw(&inst.game).win1;
    let g = &inst.game;
    let outside = ["s2", "s3"].iter().all(|s| !win1.contains(g.find_state(s).unwrap().index()));
    let inside = ["s2", "s3"].iter().all(|s| result.contains(vertex(&h, s, &["a2"])));
    check(outside && inside, "s2, s3 lose under full knowledge, win deceptively under {a2}".into(), || {
        format!("outside Win1: {outside}, inside DASW: {inside}")
    })
}

struct CorpusRun<'g> {
    solved: Vec<Solved<'g>>,
    solve_time: Duration,
}

fn solve_corpus(corpus: &[Instance]) -> CorpusRun<'_> {
    let t = Instant::now();
    let solved = corpus.iter().map(|inst| solve(inst, Exploration::Reachable)).collect();
    CorpusRun { solved, solve_time: t.elapsed() }
}

/// Nested levels and projection covering `Win1(A1)` on the states the
/// hypergame covers.
fn chain_and_cover(inst: &Instance, s: &Solved<'_>) -> Result<(), String> {
    for (k, pair) in s.result.levels.windows(2).enumerate() {
        if !pair[0].is_subset(&pair[1]) {
            return Err(format!("Z_{k} not inside Z_{}", k + 1));
        }
    }
    let mut win1 = asw(&inst.game).win1;
    win1.intersect_with(&s.h.covered_states());
    if !win1.is_subset(&s.h.project(s.result.region())) {
        return Err("projection misses a Win1 state".into());
    }
    Ok(())
}

fn criterion_5(corpus: &[Instance], run: &CorpusRun<'_>) -> Verdict {
    let t = Instant::now();
    let failures: Vec<String> = corpus
        .iter()
        .zip(&run.solved)
        .enumerate()
        .filter_map(|(i, (inst, s))| chain_and_cover(inst, s).err().map(|e| format!("seed {i}: {e}")))
        .collect();
    let total = run.solve_time + t.elapsed();
    check(
        failures.is_empty() && total < Duration::from_secs(30),
        format!("{} instances, {}", corpus.len(), ms(total)),
        || format!("{} failures ({:?}), {}", failures.len(), failures.first(), ms(total)),
    )
}

fn criterion_6(run: &CorpusRun<'_>) -> Verdict {
    let bad: Vec<usize> = run
        .solved
        .iter()
        .enumerate()
        .filter(|(_, s)| mdp_oracle(&s.h, &s.perm) != *s.result.region())
        .map(|(i, _)| i)
        .collect();
    check(bad.is_empty(), format!("{} instances agree with the oracle", run.solved.len()), || {
        format!("{} disagreements, first seeds {:?}", bad.len(), &bad[..bad.len().min(5)])
    })
}

fn criterion_7(run: &CorpusRun<'_>) -> Verdict {
    let example = example_instance();
    let ex = solve(&example, Exploration::Reachable);
    let mut bad = Vec::new();
    let mut gaps = 0;
    for (i, s) in std::iter::once(&ex).chain(&run.solved).enumerate() {
        let report = check_invariants(&s.h, &s.perm, &s.result);
        gaps += report.one_step_gaps.len();
        if !report.holds() {
            bad.push(i);
        }
    }
    check(
        bad.is_empty(),
        format!("{} instances, closure and progress hold ({gaps} one-step gaps noted)", run.solved.len() + 1),
        || format!("{} failures, first {:?}", bad.len(), bad.first()),
    )
}

struct SimSummary {
    starts: usize,
    episodes: u64,
    capped: u64,
    failures: Vec<String>,
}

fn simulate(s: &Solved<'_>, tag: &str, base_seed: u64, summary: &mut SimSummary) {
    let strategy: StrategyMap = extract_strategy(&s.h, &s.perm, &s.result);
    let starts: Vec<VertexId> = s.result.region().ones().map(|i| VertexId(i as u32)).collect();
    let cap = 10 * s.h.num_vertices() as u32;
    for policy in [PolicyKind::Uniform, PolicyKind::RandomWeights] {
        match run_batch(&s.h, &strategy, policy, &starts, EPISODES, cap, base_seed) {
            Ok(stats) => {
                summary.episodes += stats.total_episodes();
                summary.capped += stats.per_start.iter().map(|s| u64::from(s.episodes - s.reached)).sum::<u64>();
                if let Some(cx) = &stats.counterexample {
                    let longer = run_episode(&s.h, &strategy, policy, cx.start, cx.seed, 100 * cap).unwrap();
                    summary.failures.push(format!(
                        "{tag} {policy}: seed {} from {} ends {:?} after {} steps, {:?} under cap {}",
                        cx.seed,
                        cx.start,
                        cx.outcome,
                        cx.steps,
                        longer.outcome,
                        100 * cap
                    ));
                }
            }
            Err(e) => summary.failures.push(format!("{tag} {policy}: {e}")),
        }
    }
    summary.starts += starts.len();
}

fn criterion_8(run: &CorpusRun<'_>) -> Verdict {
    let t = Instant::now();
    let mut summary = SimSummary { starts: 0, episodes: 0, capped: 0, failures: Vec::new() };
    let example = example_instance();
    simulate(&solve(&example, Exploration::Reachable), "example", 0, &mut summary);
    for (i, s) in run.solved.iter().take(SIMULATED_INSTANCES).enumerate() {
        simulate(s, &format!("seed {i}"), 0, &mut summary);
    }
    let elapsed = t.elapsed();
    check(
        summary.failures.is_empty() && elapsed < Duration::from_secs(60),
        format!("{} starts, {} episodes, reach rate 1.0, {}", summary.starts, summary.episodes, ms(elapsed)),
        || {
            format!(
                "{} of {} episodes missed F; {}; {}",
                summary.capped,
                summary.episodes,
                summary.failures.join("; "),
                ms(elapsed)
            )
        },
    )
}

fn criterion_9() -> Verdict {
    let cfg = GridConfig::default();
    let t = Instant::now();
    let inst = gridworld::instance(&cfg).unwrap();
    let s = solve(&inst, Exploration::FullProduct);
    let regions = asw(&inst.game);
    let solve_time = t.elapsed();
    let report = gridworld::layout_report(&s.h, &regions, &s.result);

    let mut problems = Vec::new();
    if inst.game.num_states() != 2048 {
        problems.push(format!("{} game states", inst.game.num_states()));
    }
    if s.h.num_vertices() != 4096 {
        problems.push(format!("{} hypergame vertices", s.h.num_vertices()));
    }
    if solve_time >= Duration::from_secs(10) {
        problems.push(format!("solve took {}", ms(solve_time)));
    }
    if report.dasw_projection < report.asw_states {
        problems.push("projection below ASW".into());
    }
    if let Err(e) = chain_and_cover(&inst, &s) {
        problems.push(e);
    }
    if mdp_oracle(&s.h, &s.perm) != *s.result.region() {
        problems.push("oracle disagrees".into());
    }
    if !check_invariants(&s.h, &s.perm, &s.result).holds() {
        problems.push("invariant check failed".into());
    }
    let t = Instant::now();
    let mut summary = SimSummary { starts: 0, episodes: 0, capped: 0, failures: Vec::new() };
    simulate(&s, "gridworld", 0, &mut summary);
    let sim_time = t.elapsed();
    problems.extend(summary.failures);

    let got = format!(
        "2048 states, 4096 vertices, DASW {}, projection {} vs ASW {} (gain {}), solve {}, {} episodes in {}",
        report.dasw_vertices,
        report.dasw_projection,
        report.asw_states,
        report.deception_gain,
        ms(solve_time),
        summary.episodes,
        ms(sim_time)
    );
    check(problems.is_empty(), got, || problems.join("; "))
}

#[test]
fn acceptance() {
    let corpus = corpus();
    let run = solve_corpus(&corpus);
    let results: Vec<(u8, Verdict)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4()),
        (5, criterion_5(&corpus, &run)),
        (6, criterion_6(&run)),
        (7, criterion_7(&run)),
        (8, criterion_8(&run)),
        (9, criterion_9()),
    ];
    // Written to the raw handle so the report shows without `--nocapture`.
    let mut err = std::io::stderr().lock();
    let mut failed = Vec::new();
    for (n, verdict) in &results {
        match verdict {
            Ok(detail) => writeln!(err, "PASS criterion {n}: {detail}").unwrap(),
            Err(detail) => {
                writeln!(err, "FAIL criterion {n}: {detail}").unwrap();
                failed.push(*n);
            }
        }
    }
    assert_eq!(failed, EXPECTED_FAILURES, "failing criteria differ from the expected list");
}
