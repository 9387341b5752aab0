//! Monte Carlo check of the deceptive strategy: every region start should
//! reach the goal under both P2 policies.

use hyperreach::dasw::{dasw, extract_strategy, permissive};
use hyperreach::game::{example_game, ActionSet};
use hyperreach::hypergame::{build, VertexId};
use hyperreach::inference::InferenceMechanism;
use hyperreach::simulator::{run_batch, PolicyKind};

fn main() {
    let game = example_game();
    let x0 = ActionSet::singleton(game.find_action("a2").unwrap());
    let h = build(&game, x0, &InferenceMechanism::union(game.a1())).unwrap();
    let perm = permissive(&h);
    let r = dasw(&h, &perm);
    let strategy = extract_strategy(&h, &perm, &r);
    let starts: Vec<VertexId> = r.region().ones().map(|i| VertexId(i as u32)).collect();
    let cap = 10 * h.num_vertices() as u32;
    for policy in [PolicyKind::Uniform, PolicyKind::RandomWeights] {
        let stats = run_batch(&h, &strategy, policy, &starts, 10_000, cap, 0).unwrap();
        println!("policy {policy}, cap {cap}");
        for s in &stats.per_start {
            println!(
                "  {:<14} reach {:.4}  mean {:.2}  max {}",
                h.vertex_label(s.start),
                s.reach_rate,
                s.mean_steps,
                s.max_steps
            );
        }
        if let Some(cx) = &stats.counterexample {
            println!("  missed F: seed {} from {} ({:?} after {} steps)", cx.seed, h.vertex_label(cx.start), cx.outcome, cx.steps);
        }
    }
}
