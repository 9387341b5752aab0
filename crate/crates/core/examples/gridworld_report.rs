//! Generates the default two-flag gridworld, solves it on the full product
//! and prints the layout report.

use std::time::Instant;

use hyperreach::asw::asw;
use hyperreach::dasw::{dasw, permissive};
use hyperreach::gridworld::{instance, layout_report, GridConfig};
use hyperreach::hypergame::{Exploration, Hypergame};

fn main() {
    let cfg = GridConfig::default();
    let t = Instant::now();
    let inst = instance(&cfg).unwrap();
    let h = Hypergame::build(&inst.game, inst.x0, &inst.mechanism, Exploration::FullProduct).unwrap();
    let perm = permissive(&h);
    let r = dasw(&h, &perm);
    let report = layout_report(&h, &asw(&inst.game), &r);
    println!("{report}");
    println!("levels: {}, solved in {:?}", r.levels.len(), t.elapsed());
}
