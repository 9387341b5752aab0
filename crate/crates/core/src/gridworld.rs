//! Robot-versus-adversary gridworld benchmark.
//!
//! P1 (the robot) must visit both flag cells. P2 (the adversary) moves on the
//! same grid and tries to prevent it. Moves alternate. The game state is
//! `(x1, y1, x2, y2, turn, q)` where `q` tracks which flags P1 has visited:
//!
//! ```text
//! q0 --G1--> q1 --G2--> q3
//! q0 --G2--> q2 --G1--> q3      (q3 accepting and absorbing)
//! ```
//!
//! Only P1's moves advance `q`. Moves leaving the grid, entering an obstacle
//! or entering the other agent's cell are omitted. Tuples that place an agent
//! on an obstacle or both agents on one cell are kept so that the state count
//! is always `(w·h)² · 2 · 4`; they have no moves and are never final.
//!
//! Coordinates: `x` grows to the east, `y` grows to the north.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asw::WinRegions;
use crate::corpus::Instance;
use crate::dasw::DaswResult;
use crate::game::{ActionSet, GameBuilder, GameGraph, Player, StateId};
use crate::hypergame::Hypergame;
use crate::inference::InferenceMechanism;

pub type Cell = (u32, u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    N,
    E,
    S,
    W,
    NE,
    NW,
    SW,
    SE,
}

impl Dir {
    pub const ALL: [Dir; 8] = [Dir::N, Dir::E, Dir::S, Dir::W, Dir::NE, Dir::NW, Dir::SW, Dir::SE];
    pub const CARDINAL: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Dir::N => (0, 1),
            Dir::E => (1, 0),
            Dir::S => (0, -1),
            Dir::W => (-1, 0),
            Dir::NE => (1, 1),
            Dir::NW => (-1, 1),
            Dir::SW => (-1, -1),
            Dir::SE => (1, -1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        !Self::CARDINAL.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            Dir::N => "N",
            Dir::E => "E",
            Dir::S => "S",
            Dir::W => "W",
            Dir::NE => "NE",
            Dir::NW => "NW",
            Dir::SW => "SW",
            Dir::SE => "SE",
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dir {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        Dir::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GridError::Parse(format!("unknown direction {s:?}")))
    }
}

/// Label of P2's move in direction `d`; kept distinct from P1's labels.
pub fn adversary_label(d: Dir) -> String {
    format!("adv-{d}")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid {0}x{1} is too small for two agents")]
    Degenerate(u32, u32),
    #[error("{what} {cell:?} lies outside the grid")]
    OutOfBounds { what: &'static str, cell: Cell },
    #[error("{what} {cell:?} is an obstacle")]
    Blocked { what: &'static str, cell: Cell },
    #[error("both agents start on {0:?}")]
    SharedStart(Cell),
    #[error("both flags are on {0:?}")]
    SharedFlag(Cell),
    #[error("initial perception mentions {0}, which P1 cannot play")]
    PerceptionOutsideAlphabet(Dir),
    #[error("{0} has no actions")]
    EmptyAlphabet(Player),
    #[error("{0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub width: u32,
    pub height: u32,
    pub flags: [Cell; 2],
    pub obstacles: Vec<Cell>,
    pub p1_actions: Vec<Dir>,
    pub p2_actions: Vec<Dir>,
    pub p1_start: Cell,
    pub p2_start: Cell,
    pub x0: Vec<Dir>,
}

impl Default for GridConfig {
    /// 4×4 layout used throughout the examples and tests.
    ///
    /// ```text
    /// y=3  . . # G2
    /// y=2  . . # .
    /// y=1  . . . G1
    /// y=0  R . . A
    ///      x=0 ... 3
    /// ```
    fn default() -> Self {
        GridConfig {
            width: 4,
            height: 4,
            flags: [(3, 1), (3, 3)],
            obstacles: vec![(2, 2), (2, 3)],
            p1_actions: vec![Dir::N, Dir::E, Dir::S, Dir::W, Dir::NE, Dir::NW, Dir::SW],
            p2_actions: Dir::CARDINAL.to_vec(),
            p1_start: (0, 0),
            p2_start: (3, 0),
            x0: Dir::CARDINAL.to_vec(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.width * self.height < 2 {
            return Err(GridError::Degenerate(self.width, self.height));
        }
        let inside = |what, c: Cell| {
            if c.0 < self.width && c.1 < self.height {
                Ok(())
            } else {
                Err(GridError::OutOfBounds { what, cell: c })
            }
        };
        for &o in &self.obstacles {
            inside("obstacle", o)?;
        }
        for (what, c) in [
            ("flag", self.flags[0]),
            ("flag", self.flags[1]),
            ("P1 start", self.p1_start),
            ("P2 start", self.p2_start),
        ] {
            inside(what, c)?;
            if self.obstacles.contains(&c) {
                return Err(GridError::Blocked { what, cell: c });
            }
        }
        if self.p1_start == self.p2_start {
            return Err(GridError::SharedStart(self.p1_start));
        }
        if self.flags[0] == self.flags[1] {
            return Err(GridError::SharedFlag(self.flags[0]));
        }
        if self.p1_actions.is_empty() {
            return Err(GridError::EmptyAlphabet(Player::P1));
        }
        if self.p2_actions.is_empty() {
            return Err(GridError::EmptyAlphabet(Player::P2));
        }
        if let Some(&d) = self.x0.iter().find(|d| !self.p1_actions.contains(d)) {
            return Err(GridError::PerceptionOutsideAlphabet(d));
        }
        Ok(())
    }

    pub fn num_cells(&self) -> u32 {
        self.width * self.height
    }

    fn cell_index(&self, c: Cell) -> u32 {
        c.1 * self.width + c.0
    }

    fn step(&self, c: Cell, d: Dir) -> Option<Cell> {
        let (dx, dy) = d.delta();
        let x = c.0 as i64 + dx;
        let y = c.1 as i64 + dy;
        (x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64).then_some((x as u32, y as u32))
    }

    fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| (x, y)))
    }
}

/// The four-state automaton for "visit both flags".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObjectiveDfa {
    pub flags: [Cell; 2],
}

impl ObjectiveDfa {
    pub const ACCEPTING: u8 = 3;
    pub const STATES: u8 = 4;

    /// Bit 0 records G1, bit 1 records G2.
    pub fn step(&self, q: u8, cell: Cell) -> u8 {
        let mut q = q;
        if cell == self.flags[0] {
            q |= 1;
        }
        if cell == self.flags[1] {
            q |= 2;
        }
        q
    }
}

/// Decoded grid state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridState {
    pub p1: Cell,
    pub p2: Cell,
    pub turn: Player,
    pub q: u8,
}

/// Dense state numbering: `((c1 · cells + c2) · 2 + turn) · 4 + q` with cells
/// numbered row-major.
pub fn state_id(cfg: &GridConfig, s: GridState) -> StateId {
    let cells = cfg.num_cells();
    let turn = match s.turn {
        Player::P1 => 0,
        Player::P2 => 1,
    };
    StateId(((cfg.cell_index(s.p1) * cells + cfg.cell_index(s.p2)) * 2 + turn) * 4 + s.q as u32)
}

pub fn decode(cfg: &GridConfig, id: StateId) -> GridState {
    let cells = cfg.num_cells();
    let q = (id.0 % 4) as u8;
    let rest = id.0 / 4;
    let turn = if rest.is_multiple_of(2) { Player::P1 } else { Player::P2 };
    let rest = rest / 2;
    let c2 = rest % cells;
    let c1 = rest / cells;
    let cell = |i: u32| (i % cfg.width, i / cfg.width);
    GridState { p1: cell(c1), p2: cell(c2), turn, q }
}

/// Builds the product game. The initial state has P1 to move.
pub fn generate(cfg: &GridConfig) -> Result<GameGraph, GridError> {
    cfg.validate()?;
    let dfa = ObjectiveDfa { flags: cfg.flags };
    let mut b = GameBuilder::new();
    let p1_actions: Vec<_> = cfg.p1_actions.iter().map(|&d| (d, b.action(d.name(), Player::P1))).collect();
    let p2_actions: Vec<_> = cfg.p2_actions.iter().map(|&d| (d, b.action(adversary_label(d), Player::P2))).collect();

    let blocked = |c: &Cell| cfg.obstacles.contains(c);
    let mut all = Vec::new();
    for c1 in cfg.cells() {
        for c2 in cfg.cells() {
            for turn in [Player::P1, Player::P2] {
                for q in 0..ObjectiveDfa::STATES {
                    all.push(GridState { p1: c1, p2: c2, turn, q });
                }
            }
        }
    }
    for s in &all {
        let sink = s.p1 == s.p2 || blocked(&s.p1) || blocked(&s.p2);
        let label = format!(
            "({},{},{},{},{},q{})",
            s.p1.0,
            s.p1.1,
            s.p2.0,
            s.p2.1,
            if s.turn == Player::P1 { 1 } else { 2 },
            s.q
        );
        let id = b.state(label, s.turn, !sink && s.q == ObjectiveDfa::ACCEPTING);
        debug_assert_eq!(id, state_id(cfg, *s));
    }
    for s in &all {
        if s.p1 == s.p2 || blocked(&s.p1) || blocked(&s.p2) {
            continue;
        }
        let from = state_id(cfg, *s);
        match s.turn {
            Player::P1 => {
                for &(d, a) in &p1_actions {
                    let Some(c) = cfg.step(s.p1, d) else { continue };
                    if blocked(&c) || c == s.p2 {
                        continue;
                    }
                    let to = GridState { p1: c, p2: s.p2, turn: Player::P2, q: dfa.step(s.q, c) };
                    b.transition(from, a, state_id(cfg, to));
                }
            }
            Player::P2 => {
                for &(d, a) in &p2_actions {
                    let Some(c) = cfg.step(s.p2, d) else { continue };
                    if blocked(&c) || c == s.p1 {
                        continue;
                    }
                    let to = GridState { p2: c, turn: Player::P1, ..*s };
                    b.transition(from, a, state_id(cfg, to));
                }
            }
        }
    }
    let start = GridState { p1: cfg.p1_start, p2: cfg.p2_start, turn: Player::P1, q: dfa.step(0, cfg.p1_start) };
    b.initial(state_id(cfg, start));
    Ok(b.build().expect("generated grid games are valid"))
}

/// Observing a diagonal move reveals every P1 action; a cardinal move reveals
/// only itself.
pub fn mechanism(cfg: &GridConfig, game: &GameGraph) -> InferenceMechanism {
    let diagonals: ActionSet = cfg
        .p1_actions
        .iter()
        .filter(|d| d.is_diagonal())
        .filter_map(|d| game.find_action(d.name()))
        .collect();
    InferenceMechanism::reveal_all_on(game.a1(), diagonals).expect("diagonals are P1 actions")
}

pub fn initial_perception(cfg: &GridConfig, game: &GameGraph) -> ActionSet {
    cfg.x0.iter().filter_map(|d| game.find_action(d.name())).collect()
}

/// Game, inference mechanism and initial perception in one go.
pub fn instance(cfg: &GridConfig) -> Result<Instance, GridError> {
    let game = generate(cfg)?;
    let mechanism = mechanism(cfg, &game);
    let x0 = initial_perception(cfg, &game);
    Ok(Instance { game, x0, mechanism })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutReport {
    pub game_states: usize,
    pub hypergame_vertices: usize,
    pub dasw_vertices: usize,
    /// Game states that occur in some DASW vertex.
    pub dasw_projection: usize,
    /// `|Win1(A1)|` restricted to the states the hypergame covers.
    pub asw_states: usize,
    /// States P1 wins only by deception: `dasw_projection - asw_states`.
    pub deception_gain: usize,
}

impl fmt::Display for LayoutReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "game states:          {}", self.game_states)?;
        writeln!(f, "hypergame vertices:   {}", self.hypergame_vertices)?;
        writeln!(
            f,
            "DASW vertices:        {} out of {}",
            self.dasw_vertices, self.hypergame_vertices
        )?;
        writeln!(f, "DASW game states:     {}", self.dasw_projection)?;
        writeln!(f, "ASW game states:      {}", self.asw_states)?;
        write!(
            f,
            "deception gain:       {} - {} = {} game states",
            self.dasw_projection, self.asw_states, self.deception_gain
        )
    }
}

pub fn layout_report(h: &Hypergame<'_>, asw_regions: &WinRegions, result: &DaswResult) -> LayoutReport {
    let covered = h.covered_states();
    let projection = h.project(result.region()).count_ones(..);
    let asw_states = asw_regions.win1.intersection(&covered).count();
    LayoutReport {
        game_states: h.base().num_states(),
        hypergame_vertices: h.num_vertices(),
        dasw_vertices: result.region().count_ones(..),
        dasw_projection: projection,
        asw_states,
        deception_gain: projection.saturating_sub(asw_states),
    }
}

/// Parses `x,y`.
pub fn parse_cell(s: &str) -> Result<Cell, GridError> {
    let bad = || GridError::Parse(format!("expected a cell as x,y but got {s:?}"));
    let (x, y) = s.trim().split_once(',').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

/// Parses `x,y;x,y;...`. The empty string is the empty list.
pub fn parse_cells(s: &str) -> Result<Vec<Cell>, GridError> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_cell).collect()
}

/// Parses `WxH`.
pub fn parse_size(s: &str) -> Result<(u32, u32), GridError> {
    let bad = || GridError::Parse(format!("expected a size as WxH but got {s:?}"));
    let (w, h) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?))
}

/// Parses `N,E,S,W`.
pub fn parse_dirs(s: &str) -> Result<Vec<Dir>, GridError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}
