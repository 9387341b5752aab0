//! Compares the fixed-point solver with the naive MDP oracle on a batch of
//! random instances, in every solver mode.

use hyperreach::corpus::{random_instance, CorpusShape};
use hyperreach::dasw::{check_invariants, dasw_with, permissive, DaswOptions, Safe1Mode, Safe2Quantifier};
use hyperreach::hypergame::build;
use hyperreach::oracle::mdp_oracle;

fn main() {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let shape = CorpusShape::default();
    for safe1_mode in [Safe1Mode::ProgressCoupled, Safe1Mode::Literal] {
        for safe2_quantifier in [Safe2Quantifier::Full, Safe2Quantifier::Perceived] {
            let opts = DaswOptions { safe1_mode, safe2_quantifier };
            let (mut disagree, mut invariant, mut first) = (0, 0, None);
            for seed in 0..n {
                let inst = random_instance(seed, &shape);
                let h = build(&inst.game, inst.x0, &inst.mechanism).unwrap();
                let perm = permissive(&h);
                let r = dasw_with(&h, &perm, opts);
                if mdp_oracle(&h, &perm) != *r.region() {
                    disagree += 1;
                    first.get_or_insert(seed);
                }
                if !check_invariants(&h, &perm, &r).holds() {
                    invariant += 1;
                }
            }
            println!("{opts:?}: {disagree} oracle disagreements (first seed {first:?}), {invariant} invariant failures over {n}");
        }
    }
}
