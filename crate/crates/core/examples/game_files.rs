//! Loads a game and an inference sidecar from JSON, solves and writes the
//! hypergame export next to a temporary copy of the game.

use std::path::Path;

use hyperreach::dasw::{dasw, permissive};
use hyperreach::hypergame::build;
use hyperreach::io::{self, HypergameFile};

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let game = io::load_game(&data.join("example.game.json")).unwrap();
    let (mech, x0) = io::load_inference(&data.join("example.inference.json"), &game).unwrap();
    let h = build(&game, x0, &mech).unwrap();
    let r = dasw(&h, &permissive(&h));
    println!("initial perception {:?}, region size {}", game.action_labels(x0), r.region().count_ones(..));

    let out = std::env::temp_dir().join("hyperreach-example");
    std::fs::create_dir_all(&out).unwrap();
    io::save_game(&game, &out.join("game.json")).unwrap();
    io::write_json(&out.join("hypergame.json"), &HypergameFile::new(&h)).unwrap();
    println!("wrote {}", out.display());
}
