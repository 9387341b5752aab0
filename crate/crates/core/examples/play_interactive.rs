//! Play P2 against the deceptive strategy from the terminal. Type a move
//! label per turn; `q` quits.

use hyperreach::cli::play_session;
use hyperreach::game::{example_game, ActionSet};
use hyperreach::hypergame::build;
use hyperreach::inference::InferenceMechanism;

fn main() {
    let game = example_game();
    let x0 = ActionSet::singleton(game.find_action("a2").unwrap());
    let h = build(&game, x0, &InferenceMechanism::union(game.a1())).unwrap();
    let stdin = std::io::stdin();
    let episode = play_session(&h, 100, 0, &mut stdin.lock(), &mut std::io::stdout()).expect("session");
    println!("{:?} after {} steps", episode.outcome, episode.steps);
}
