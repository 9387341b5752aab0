//! Sure-winning regions of the four-state example, with and without P1's
//! action `a1`.

use hyperreach::asw::{asw, asw_strategy};
use hyperreach::game::{example_game, StateId};

fn main() {
    let game = example_game();
    for labels in [vec!["a1", "a2"], vec!["a2"]] {
        let x = game.action_set(&labels).unwrap();
        let g = game.restrict(x).unwrap();
        let r = asw(&g);
        let win1: Vec<String> = r.win1.ones().map(|i| g.state_label(StateId(i as u32))).collect();
        println!("P1 may use {{{}}}: Win1 = {{{}}}", labels.join(","), win1.join(", "));
        for (s, a) in asw_strategy(&g, &r) {
            println!("  at {} play {} (level {})", g.state_label(s), g.action_label(a), r.level(s).unwrap());
        }
    }
}
