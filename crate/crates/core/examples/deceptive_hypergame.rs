//! Builds the hypergame where P2 initially believes P1 can only play `a2`,
//! then solves for the deceptive almost-sure winning region.

use hyperreach::asw::asw;
use hyperreach::dasw::{check_invariants, dasw, extract_strategy, permissive};
use hyperreach::game::{example_game, ActionSet, Player};
use hyperreach::hypergame::build;
use hyperreach::inference::InferenceMechanism;

fn main() {
    let game = example_game();
    let x0 = ActionSet::singleton(game.find_action("a2").unwrap());
    let mech = InferenceMechanism::union(game.a1());
    let h = build(&game, x0, &mech).unwrap();
    let perm = permissive(&h);
    let r = dasw(&h, &perm);
    let strategy = extract_strategy(&h, &perm, &r);

    println!("{} vertices, {} transitions", h.num_vertices(), h.num_transitions());
    for v in h.vertex_ids() {
        let status = match r.level(v) {
            Some(k) => format!("level {k}, rank {}", r.rank(v).unwrap()),
            None => "losing".into(),
        };
        let moves = match (h.owner(v), strategy.p1.get(&v)) {
            (_, _) if h.is_final(v) => "goal".to_string(),
            (Player::P1, Some(acts)) => format!("P1 plays {:?}", game.action_labels(*acts)),
            (Player::P1, None) => "P1 has no winning move".to_string(),
            (Player::P2, _) => format!("P2 may play {:?}", game.action_labels(perm.allowed(v))),
        };
        println!("{v} {:<16} {status:<18} {moves}", h.vertex_label(v));
    }

    let win1 = asw(&game).win1;
    let projected = h.project(r.region());
    println!("Win1 states: {}, states won with deception: {}", win1.count_ones(..), projected.count_ones(..));
    println!("{:?}", check_invariants(&h, &perm, &r));
}
