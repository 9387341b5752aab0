//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 invalid input game or
//! configuration, 3 internal failure (including an oracle disagreement).

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asw::{asw, asw_strategy};
use crate::dasw::{self, DaswOptions, Safe1Mode, Safe2Quantifier};
use crate::game::{ActionSet, GameError, GameGraph, Player};
use crate::gridworld::{self, GridConfig, GridError};
use crate::hypergame::{Exploration, Hypergame, HypergameError, VertexId};
use crate::io::{self, DaswFile, HypergameFile, InferenceFile, LoadError, RegionsFile, TraceFile};
use crate::oracle::mdp_oracle;
use crate::simulator::{self, Episode, Outcome, PolicyKind, SimError};

#[derive(Debug, Parser)]
#[command(name = "hyperreach", version, about = "Deceptive almost-sure winning strategies for reachability games")]
pub struct Cli {
    /// Directory for output files. Without it the main result goes to stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, global = true, env = "HYPERREACH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a game file and list every violation.
    Validate { game: PathBuf },
    /// Solve the reachability game.
    Asw {
        game: PathBuf,
        /// Comma-separated P1 action labels to keep.
        #[arg(long)]
        restrict: Option<String>,
    },
    /// Build the hypergame for a game and inference sidecar.
    Hypergame {
        #[command(flatten)]
        input: HyperInput,
    },
    /// Compute the deceptive region and strategy, checked against the oracle.
    Dasw {
        #[command(flatten)]
        input: HyperInput,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Monte-Carlo play of the deceptive strategy.
    Simulate {
        #[command(flatten)]
        input: HyperInput,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1000)]
        episodes: u32,
        /// Step cap per episode; defaults to 10 times the vertex count.
        #[arg(long)]
        cap: Option<u32>,
        #[arg(long, value_enum, default_value_t = PolicyArg::Uniform)]
        policy: PolicyArg,
        /// `region`, `all`, or comma-separated vertex ids.
        #[arg(long, default_value = "region")]
        starts: String,
    },
    /// Generate the robot-versus-adversary gridworld.
    Gridworld {
        #[command(flatten)]
        grid: GridArgs,
        /// Also solve the instance and print the layout report.
        #[arg(long)]
        report: bool,
    },
    /// Play P2 by hand against the deceptive strategy.
    Play {
        #[command(flatten)]
        input: HyperInput,
        #[arg(long, default_value_t = 100)]
        cap: u32,
    },
}

#[derive(Debug, Args)]
pub struct HyperInput {
    pub game: PathBuf,
    pub inference: PathBuf,
    /// Pair every state with every perception instead of exploring from the
    /// initial vertex.
    #[arg(long)]
    pub full_product: bool,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Safe2Arg::Full)]
    pub safe2: Safe2Arg,
    #[arg(long, value_enum, default_value_t = Safe1Arg::ProgressCoupled)]
    pub safe1: Safe1Arg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Safe2Arg {
    Full,
    Perceived,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Safe1Arg {
    Literal,
    ProgressCoupled,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PolicyArg {
    Uniform,
    Random,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value = "4x4")]
    pub size: String,
    #[arg(long, default_value = "3,1;3,3")]
    pub flags: String,
    #[arg(long, default_value = "2,2;2,3")]
    pub obstacles: String,
    #[arg(long, default_value = "0,0")]
    pub p1_start: String,
    #[arg(long, default_value = "3,0")]
    pub p2_start: String,
    #[arg(long, default_value = "N,E,S,W")]
    pub x0: String,
}

impl GridArgs {
    pub fn config(&self) -> Result<GridConfig, GridError> {
        let (width, height) = gridworld::parse_size(&self.size)?;
        let flags = gridworld::parse_cells(&self.flags)?;
        let [g1, g2] = flags[..] else {
            return Err(GridError::Parse(format!("expected two flags but got {}", flags.len())));
        };
        Ok(GridConfig {
            width,
            height,
            flags: [g1, g2],
            obstacles: gridworld::parse_cells(&self.obstacles)?,
            p1_start: gridworld::parse_cell(&self.p1_start)?,
            p2_start: gridworld::parse_cell(&self.p2_start)?,
            x0: gridworld::parse_dirs(&self.x0)?,
            ..GridConfig::default()
        })
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Invalid(_) | LoadError::Inference(_) => Failure::Validation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<HypergameError> for Failure {
    fn from(e: HypergameError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<GridError> for Failure {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, stdin, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cli: &Cli, stdin: &mut dyn BufRead, out: &mut dyn Write) -> CmdResult {
    let mut ctx = Ctx { output: cli.output.as_deref(), format: cli.format, out };
    match &cli.command {
        Command::Validate { game } => cmd_validate(&mut ctx, game),
        Command::Asw { game, restrict } => cmd_asw(&mut ctx, game, restrict.as_deref()),
        Command::Hypergame { input } => cmd_hypergame(&mut ctx, input),
        Command::Dasw { input, solver } => cmd_dasw(&mut ctx, input, solver),
        Command::Simulate { input, solver, episodes, cap, policy, starts } => {
            let policy = match policy {
                PolicyArg::Uniform => PolicyKind::Uniform,
                PolicyArg::Random => PolicyKind::RandomWeights,
            };
            cmd_simulate(&mut ctx, input, solver, *episodes, *cap, policy, starts, cli.seed)
        }
        Command::Gridworld { grid, report } => cmd_gridworld(&mut ctx, grid, *report),
        Command::Play { input, cap } => cmd_play(&mut ctx, input, *cap, cli.seed, stdin),
    }
}

struct Ctx<'a> {
    output: Option<&'a Path>,
    format: Format,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    /// Writes `value` to `<output>/<name>` when an output directory is set,
    /// otherwise prints it (as JSON, or as `text` in text mode).
    fn emit<T: Serialize>(&mut self, name: &str, value: &T, text: &str) -> CmdResult {
        match self.output {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                io::write_json(&dir.join(name), value)?;
                if self.format == Format::Text {
                    writeln!(self.out, "{text}")?;
                }
            }
            None => match self.format {
                Format::Json => write!(self.out, "{}", io::to_json(value))?,
                Format::Text => writeln!(self.out, "{text}")?,
            },
        }
        Ok(())
    }
}

fn cmd_validate(ctx: &mut Ctx<'_>, path: &Path) -> CmdResult {
    match io::load_game(path) {
        Ok(g) => {
            let text = format!(
                "valid: {} states, {} actions, {} transitions",
                g.num_states(),
                g.num_actions(),
                g.num_transitions()
            );
            ctx.emit("validation.json", &Vec::<String>::new(), &text)
        }
        Err(LoadError::Invalid(GameError::Invalid(violations))) => {
            for v in &violations {
                writeln!(ctx.out, "{v}")?;
            }
            Err(Failure::Validation(format!("{} violation(s)", violations.len())))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_asw(ctx: &mut Ctx<'_>, path: &Path, restrict: Option<&str>) -> CmdResult {
    let mut game = io::load_game(path)?;
    if let Some(list) = restrict {
        let labels: Vec<&str> = list.split(',').map(str::trim).filter(|l| !l.is_empty()).collect();
        let x = game.action_set(&labels)?;
        game = game.restrict(x)?;
    }
    let regions = asw(&game);
    let strategy = asw_strategy(&game, &regions);
    let file = RegionsFile::new(&game, &regions, &strategy);
    let mut text = format!("Win1 = {{{}}}\nWin2 = {{{}}}", file.win1.join(", "), file.win2.join(", "));
    for m in &file.strategy {
        text.push_str(&format!("\n{} -> {}", m.state, m.action));
    }
    ctx.emit("regions.json", &file, &text)
}

fn load_pair(input: &HyperInput) -> Result<(GameGraph, crate::inference::InferenceMechanism, ActionSet), Failure> {
    let game = io::load_game(&input.game)?;
    let (mech, x0) = io::load_inference(&input.inference, &game)?;
    Ok((game, mech, x0))
}

fn exploration(input: &HyperInput) -> Exploration {
    if input.full_product {
        Exploration::FullProduct
    } else {
        Exploration::Reachable
    }
}

fn cmd_hypergame(ctx: &mut Ctx<'_>, input: &HyperInput) -> CmdResult {
    let (game, mech, x0) = load_pair(input)?;
    let h = Hypergame::build(&game, x0, &mech, exploration(input))?;
    let text = format!(
        "{} vertices, {} transitions, {} perceptions",
        h.num_vertices(),
        h.num_transitions(),
        h.perceptions().len()
    );
    ctx.emit("hypergame.json", &HypergameFile::new(&h), &text)
}

fn solver_options(s: &SolverArgs) -> DaswOptions {
    DaswOptions {
        safe2_quantifier: match s.safe2 {
            Safe2Arg::Full => Safe2Quantifier::Full,
            Safe2Arg::Perceived => Safe2Quantifier::Perceived,
        },
        safe1_mode: match s.safe1 {
            Safe1Arg::Literal => Safe1Mode::Literal,
            Safe1Arg::ProgressCoupled => Safe1Mode::ProgressCoupled,
        },
    }
}

fn cmd_dasw(ctx: &mut Ctx<'_>, input: &HyperInput, solver: &SolverArgs) -> CmdResult {
    let (game, mech, x0) = load_pair(input)?;
    let h = Hypergame::build(&game, x0, &mech, exploration(input))?;
    let perm = dasw::permissive(&h);
    let result = dasw::dasw_with(&h, &perm, solver_options(solver));
    let strategy = dasw::extract_strategy(&h, &perm, &result);
    let agrees = mdp_oracle(&h, &perm) == *result.region();
    let file = DaswFile::new(&h, &perm, &result, &strategy, agrees);
    let names: Vec<String> = file
        .region
        .iter()
        .map(|r| format!("({}, {{{}}})", r.vertex.state, r.vertex.perception.join(",")))
        .collect();
    let text = format!(
        "region ({} of {} vertices): {}\nlevel sizes: {:?}\noracle agrees: {}",
        names.len(),
        h.num_vertices(),
        names.join(" "),
        file.level_sizes,
        agrees
    );
    ctx.emit("dasw.json", &file, &text)?;
    if agrees {
        Ok(())
    } else {
        Err(Failure::Internal("fixed point and oracle disagree".into()))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    ctx: &mut Ctx<'_>,
    input: &HyperInput,
    solver: &SolverArgs,
    episodes: u32,
    cap: Option<u32>,
    policy: PolicyKind,
    starts: &str,
    seed: u64,
) -> CmdResult {
    let (game, mech, x0) = load_pair(input)?;
    let h = Hypergame::build(&game, x0, &mech, exploration(input))?;
    let perm = dasw::permissive(&h);
    let result = dasw::dasw_with(&h, &perm, solver_options(solver));
    let strategy = dasw::extract_strategy(&h, &perm, &result);
    let starts: Vec<VertexId> = match starts {
        "region" => result.region().ones().map(|i| VertexId(i as u32)).collect(),
        "all" => h
            .vertex_ids()
            .filter(|&v| h.owner(v) == Player::P2 || h.is_final(v) || strategy.choose(v).is_some())
            .collect(),
        list => list
            .split(',')
            .map(|s| s.trim().parse::<u32>().map(VertexId))
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("bad --starts value {list:?}")))?,
    };
    let cap = cap.unwrap_or(10 * h.num_vertices() as u32);
    let stats = simulator::run_batch(&h, &strategy, policy, &starts, episodes, cap, seed)?;
    let mut text = format!(
        "{} starts x {} episodes, policy {}, cap {}\n",
        starts.len(),
        episodes,
        policy,
        cap
    );
    for s in &stats.per_start {
        text.push_str(&format!(
            "{:>6} {:<28} reach {:.4}  mean steps {:.2}  max {}\n",
            s.start.to_string(),
            h.vertex_label(s.start),
            s.reach_rate,
            s.mean_steps,
            s.max_steps
        ));
    }
    text.push_str(&format!("all reached: {}", stats.all_reached()));
    if let (Some(dir), Some(cx)) = (ctx.output, &stats.counterexample) {
        std::fs::create_dir_all(dir)?;
        io::write_json(&dir.join("counterexample.json"), &TraceFile::new(&h, cx))?;
    }
    ctx.emit("simulation.json", &stats, &text)
}

fn cmd_gridworld(ctx: &mut Ctx<'_>, grid: &GridArgs, report: bool) -> CmdResult {
    let cfg = grid.config()?;
    let inst = gridworld::instance(&cfg)?;
    let sidecar = InferenceFile::new(&inst.game, &inst.mechanism, inst.x0);
    let dir = ctx.output.unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    io::save_game(&inst.game, &dir.join("gridworld.game.json"))?;
    io::write_json(&dir.join("gridworld.inference.json"), &sidecar)?;
    let mut text = format!(
        "wrote {} ({} states) and {}",
        dir.join("gridworld.game.json").display(),
        inst.game.num_states(),
        dir.join("gridworld.inference.json").display()
    );
    if report {
        let h = Hypergame::build(&inst.game, inst.x0, &inst.mechanism, Exploration::FullProduct)?;
        let perm = dasw::permissive(&h);
        let result = dasw::dasw(&h, &perm);
        let rep = gridworld::layout_report(&h, &asw(&inst.game), &result);
        text = format!("{text}\n{rep}");
        match (ctx.output, ctx.format) {
            (Some(dir), _) => io::write_json(&dir.join("layout_report.json"), &rep)?,
            (None, Format::Json) => {
                write!(ctx.out, "{}", io::to_json(&rep))?;
                return Ok(());
            }
            (None, Format::Text) => {}
        }
    }
    writeln!(ctx.out, "{text}")?;
    Ok(())
}

fn cmd_play(ctx: &mut Ctx<'_>, input: &HyperInput, cap: u32, seed: u64, stdin: &mut dyn BufRead) -> CmdResult {
    let (game, mech, x0) = load_pair(input)?;
    let h = Hypergame::build(&game, x0, &mech, exploration(input))?;
    let episode = play_session(&h, cap, seed, stdin, ctx.out)?;
    if let Some(dir) = ctx.output {
        std::fs::create_dir_all(dir)?;
        io::write_json(&dir.join("session.json"), &TraceFile::new(&h, &episode))?;
    }
    Ok(())
}

/// Interactive game with a human as P2. Reads one move label per line;
/// `quit`, `q` or end of input stop the session.
pub fn play_session(
    h: &Hypergame<'_>,
    cap: u32,
    seed: u64,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<Episode, Failure> {
    let g = h.base();
    let perm = dasw::permissive(h);
    let result = dasw::dasw(h, &perm);
    let strategy = dasw::extract_strategy(h, &perm, &result);
    let start = h.initial().ok_or_else(|| Failure::Validation("the game has no initial state".into()))?;
    let set = |x: ActionSet| format!("{{{}}}", g.action_labels(x).join(", "));

    writeln!(out, "You are P2. P1 may be hiding actions from you.")?;
    writeln!(
        out,
        "Start: {} (P1 {} from here)",
        g.state_label(h.state(start)),
        if result.contains(start) { "wins by deception" } else { "has no deceptive guarantee" }
    )?;
    let initial_perception = h.perceived(start);
    let mut episode = Episode { seed, start, hrun: vec![start], actions: vec![], outcome: Outcome::StepCap, steps: 0 };
    let mut v = start;
    let mut line = String::new();
    loop {
        if h.is_final(v) {
            episode.outcome = Outcome::ReachedF;
            writeln!(out, "P1 reached {} after {} moves.", g.state_label(h.state(v)), episode.steps)?;
            break;
        }
        if episode.steps >= cap {
            writeln!(out, "Step cap {cap} reached without a final state.")?;
            if h.perceived(v) == initial_perception {
                writeln!(out, "P1 never played outside your initial perception {}.", set(initial_perception))?;
            }
            break;
        }
        let (a, w) = match h.owner(v) {
            Player::P1 => {
                let mv = strategy
                    .choose(v)
                    .and_then(|a| h.delta(v, a).map(|w| (a, w)))
                    .or_else(|| h.succ(v).first().copied());
                let Some((a, w)) = mv else {
                    episode.outcome = Outcome::DeadEnd;
                    writeln!(out, "P1 is stuck at {}.", g.state_label(h.state(v)))?;
                    break;
                };
                writeln!(out, "P1 plays {} -> {}", g.action_label(a), g.state_label(h.state(w)))?;
                if h.perceived(w) != h.perceived(v) {
                    writeln!(out, "Your perception of P1's actions is now {}", set(h.perceived(w)))?;
                }
                (a, w)
            }
            Player::P2 => {
                let all: ActionSet = h.succ(v).iter().map(|&(b, _)| b).collect();
                if all.is_empty() {
                    episode.outcome = Outcome::DeadEnd;
                    writeln!(out, "You are stuck at {}.", g.state_label(h.state(v)))?;
                    break;
                }
                writeln!(
                    out,
                    "State {}. You believe P1 can play {}. Safe-looking moves {}; all moves {}",
                    g.state_label(h.state(v)),
                    set(h.perceived(v)),
                    set(perm.allowed(v)),
                    set(all)
                )?;
                loop {
                    write!(out, "> ")?;
                    out.flush()?;
                    line.clear();
                    if input.read_line(&mut line)? == 0 {
                        writeln!(out)?;
                        return Ok(quit(out, episode)?);
                    }
                    let word = line.trim();
                    if word == "quit" || word == "q" {
                        return Ok(quit(out, episode)?);
                    }
                    match g.find_action(word).filter(|&b| all.contains(b)) {
                        Some(b) => break (b, h.delta(v, b).expect("enabled move")),
                        None => writeln!(out, "Not a move here: {word:?}. Choose one of {}", set(all))?,
                    }
                }
            }
        };
        episode.actions.push(a);
        episode.hrun.push(w);
        episode.steps += 1;
        v = w;
    }
    Ok(episode)
}

fn quit(out: &mut dyn Write, episode: Episode) -> std::io::Result<Episode> {
    writeln!(out, "Session ended after {} moves.", episode.steps)?;
    Ok(episode)
}
