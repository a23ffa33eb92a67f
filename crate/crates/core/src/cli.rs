//! The `posmine` command line.
//!
//! Every output starts with comment lines holding the crate version and the
//! full parsed configuration, so a file can be regenerated from its header.
//! Exit codes: 0 success, 1 a simulation error or a violated property, 2 a
//! usage or parse error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    self, mc_revenue_liminf, mc_revenue_renewal, rev_frontier, rev_nsm_closed, rev_sm_closed,
    ruin_probability, simulate_ruin, simulate_walks, stake_dynamics, walk_stats, AnalysisError,
    RevenuePoint, DEFAULT_COINS, DEFAULT_CYCLE_CAP,
};
use crate::blocktree::{parse_statefile, to_dot, write_statefile, GameState, Miner};
use crate::strategies::{Game, SimError, Strategy, StrategySpec, Trace};
use crate::structure::{
    checkpoint_override_check, checkpoints, classify_trace, fork_ownership_check, Verdict,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "posmine", version, about = "Longest-chain proof-of-stake mining game experiments")]
pub struct Cli {
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Revenue per alpha, closed form or Monte Carlo.
    Revenue(RevenueArgs),
    /// Play one game and print its trace.
    Simulate(SimulateArgs),
    /// Classify traces against the structural properties.
    Verify(VerifyArgs),
    /// Run a strategy and its reduction on coupled randomness.
    Reduce(ReduceArgs),
    /// Print the checkpoints of a statefile.
    Checkpoints(CheckpointsArgs),
    /// Stake fraction over time when finalized blocks mint coins.
    Stake(StakeArgs),
    /// Random-walk and ruin facts for a given alpha.
    Walk(WalkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl AlphaGrid {
    /// Inclusive of both ends. When `step` does not divide the interval the
    /// last point is clamped to `hi`.
    pub fn points(&self) -> Vec<f64> {
        let span = (self.hi - self.lo) / self.step;
        let n = (span + 1e-9).floor() as u64;
        let mut out: Vec<f64> = (0..=n).map(|k| tidy(self.lo + k as f64 * self.step)).collect();
        if (self.lo + n as f64 * self.step - self.hi).abs() > 1e-12 {
            out.push(self.hi);
        }
        out
    }
}

impl FromStr for AlphaGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(format!("expected lo:hi:step, got `{s}`"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}`"));
        let g = AlphaGrid {
            lo: num(lo)?,
            hi: num(hi)?,
            step: num(step)?,
        };
        if !(g.step > 0.0) || g.hi < g.lo {
            return Err(format!("need lo ≤ hi and step > 0 in `{s}`"));
        }
        Ok(g)
    }
}

impl std::fmt::Display for AlphaGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    ClosedForm,
    /// Renewal-cycle estimator.
    Simulate,
    Liminf,
    /// Closed form, liminf and renewal.
    All,
}

#[derive(Debug, Args)]
pub struct RevenueArgs {
    #[arg(long)]
    pub strategy: StrategySpec,
    #[arg(long, conflicts_with = "alpha_grid", required_unless_present = "alpha_grid")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_grid: Option<AlphaGrid>,
    #[arg(long, value_enum, default_value = "closed-form")]
    pub mode: Mode,
    #[arg(long, default_value_t = 100_000)]
    pub cycles: u64,
    #[arg(long, default_value_t = 10_000)]
    pub rounds: u64,
    #[arg(long, default_value_t = 100)]
    pub games: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Longest renewal cycle tolerated before giving up.
    #[arg(long, default_value_t = DEFAULT_CYCLE_CAP)]
    pub cycle_cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Dot,
    Statefile,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub strategy: StrategySpec,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub rounds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// What goes to the main output: the trace, or the final state.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Also write the final block tree as DOT.
    #[arg(long)]
    pub emit_tree: Option<PathBuf>,
    /// Also write the final state as a statefile.
    #[arg(long)]
    pub emit_state: Option<PathBuf>,
}

const PROPERTIES: [&str; 8] = [
    "timeserving",
    "orderly",
    "lcm",
    "trimmed",
    "opportunistic",
    "checkpoint_recurrent",
    "fork_ownership",
    "checkpoint_override",
];

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub strategy: StrategySpec,
    /// Comma-separated; `all` for every property and monitor.
    #[arg(long, default_value = "all")]
    pub properties: String,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.35,0.45")]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub games: u64,
    #[arg(long, default_value_t = 10_000)]
    pub rounds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reduction {
    Orderly,
    Lcm,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub strategy: StrategySpec,
    #[arg(long, value_enum)]
    pub reduction: Reduction,
    #[arg(long, default_value_t = 0.35)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    pub rounds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CheckpointsArgs {
    #[arg(long)]
    pub state: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StakeStrategy {
    Frontier,
    Nsm,
}

#[derive(Debug, Args)]
pub struct StakeArgs {
    #[arg(long, value_enum)]
    pub strategy: StakeStrategy,
    #[arg(long)]
    pub alpha0: f64,
    #[arg(long, default_value_t = DEFAULT_COINS)]
    pub coins: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub rounds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Lead i for the ruin probability.
    #[arg(long, default_value_t = 1)]
    pub lead: u32,
    /// Add Monte Carlo estimates over this many walks.
    #[arg(long)]
    pub simulate: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Sim(_) => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Failure(e.to_string())
    }
}

/// What a command produced: the text and whether its checks held.
pub struct Output {
    pub text: String,
    pub ok: bool,
}

fn header(comment: &str, command: &str, config: &[(&str, String)]) -> String {
    let mut h = format!("{comment} posmine {VERSION}\n{comment} command: {command}\n");
    for (k, v) in config {
        let _ = writeln!(h, "{comment} {k}: {v}");
    }
    h
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".into(), T::to_string)
}

fn build(spec: &StrategySpec) -> Result<Box<dyn Strategy>, CliError> {
    spec.build().map_err(|e| CliError::Usage(e.to_string()))
}

/// A fixed creator sequence, when the strategy is (or wraps) a script that
/// names one.
fn script_creators(spec: &StrategySpec) -> Result<Option<Vec<Miner>>, CliError> {
    match spec {
        StrategySpec::Scripted(path) => Ok(StrategySpec::load_script(path)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .creators),
        StrategySpec::Orderly(inner) | StrategySpec::Lcm(inner) => script_creators(inner),
        _ => Ok(None),
    }
}

fn play(spec: &StrategySpec, alpha: f64, rounds: u64, seed: u64, stream: u64) -> Result<Trace, CliError> {
    let strategy = build(spec)?;
    let mut game = match script_creators(spec)? {
        Some(c) => Game::with_creators(strategy, c),
        None => Game::from_state(GameState::new(), strategy, alpha, seed, stream),
    };
    Ok(game.run(rounds)?)
}

fn closed_form(spec: &StrategySpec, alpha: f64) -> Result<f64, CliError> {
    let f = match spec {
        StrategySpec::Frontier => rev_frontier,
        StrategySpec::Selfish => rev_sm_closed,
        StrategySpec::NothingAtStake => rev_nsm_closed,
        _ => return Err(CliError::Usage(format!("no closed form for `{spec}`"))),
    };
    Ok(f(alpha)?)
}

fn cmd_revenue(a: &RevenueArgs) -> Result<Output, CliError> {
    let alphas = match (a.alpha, a.alpha_grid) {
        (Some(x), _) => vec![x],
        (None, Some(g)) => g.points(),
        (None, None) => return Err(CliError::Usage("need --alpha or --alpha-grid".into())),
    };
    let mut text = header(
        "#",
        "revenue",
        &[
            ("strategy", a.strategy.to_string()),
            ("alpha", opt(&a.alpha)),
            ("alpha_grid", opt(&a.alpha_grid)),
            ("mode", format!("{:?}", a.mode)),
            ("cycles", a.cycles.to_string()),
            ("rounds", a.rounds.to_string()),
            ("games", a.games.to_string()),
            ("seed", a.seed.to_string()),
            ("cycle_cap", a.cycle_cap.to_string()),
        ],
    );
    text.push_str(RevenuePoint::CSV_HEADER);
    text.push('\n');
    let spec = &a.strategy;
    build(spec)?;
    let factory = || spec.build().expect("built once already");
    let name = spec.to_string();
    for &alpha in &alphas {
        let mut rows = Vec::new();
        if matches!(a.mode, Mode::ClosedForm | Mode::All) {
            rows.push(RevenuePoint::closed_form(alpha, &name, closed_form(spec, alpha)?));
        }
        if matches!(a.mode, Mode::Liminf | Mode::All) {
            rows.push(mc_revenue_liminf(&factory, alpha, a.rounds, a.games, a.seed)?);
        }
        if matches!(a.mode, Mode::Simulate | Mode::All) {
            rows.push(mc_revenue_renewal(&factory, alpha, a.cycles, a.seed, a.cycle_cap)?);
        }
        for r in rows {
            text.push_str(&r.csv_row());
            text.push('\n');
        }
    }
    Ok(Output { text, ok: true })
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Output, CliError> {
    let trace = play(&a.strategy, a.alpha, a.rounds, a.seed, 0)?;
    let config = [
        ("strategy", a.strategy.to_string()),
        ("alpha", a.alpha.to_string()),
        ("rounds", a.rounds.to_string()),
        ("seed", a.seed.to_string()),
        ("format", format!("{:?}", a.format)),
    ];
    let final_state = trace.replay(&mut NoVisit)?;
    let dot = || header("//", "simulate", &config) + &to_dot(&final_state);
    let state = || header("#", "simulate", &config) + &write_statefile(&final_state);
    if let Some(p) = &a.emit_tree {
        write_file(p, &dot())?;
    }
    if let Some(p) = &a.emit_state {
        write_file(p, &state())?;
    }
    let text = match a.format {
        Format::Csv => header("#", "simulate", &config) + &trace.to_csv(),
        Format::Dot => dot(),
        Format::Statefile => state(),
    };
    Ok(Output { text, ok: true })
}

struct NoVisit;
impl crate::strategies::ReplayVisitor for NoVisit {}

fn parse_properties(s: &str) -> Result<Vec<&'static str>, CliError> {
    let mut out = Vec::new();
    for p in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if p == "all" {
            return Ok(PROPERTIES.to_vec());
        }
        let known = PROPERTIES
            .iter()
            .find(|&&k| k == p)
            .ok_or_else(|| CliError::Usage(format!("unknown property `{p}`; known: all, {}", PROPERTIES.join(", "))))?;
        if !out.contains(known) {
            out.push(*known);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no properties requested".into()));
    }
    Ok(out)
}

fn merge(into: &mut Verdict, from: Verdict, game: u64, alpha: f64) {
    into.checked += from.checked;
    into.violations += from.violations;
    if into.first.is_none() {
        into.first = from.first.map(|mut w| {
            w.detail = format!("{} [alpha {alpha}, game {game}]", w.detail);
            w
        });
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<Output, CliError> {
    let props = parse_properties(&a.properties)?;
    build(&a.strategy)?;
    let fixed = script_creators(&a.strategy)?.is_some();
    let games = if fixed { 1 } else { a.games };
    let mut totals: Vec<Verdict> = vec![Verdict::default(); props.len()];
    let mut capitulations = 0u64;
    let mut rounds = 0u64;
    for &alpha in &a.alpha {
        if !fixed {
            analysis::check_alpha(alpha)?;
        }
        let per_game = analysis::par_units(games, |g| -> Result<_, CliError> {
            let trace = play(&a.strategy, alpha, a.rounds, a.seed, g)?;
            let report = classify_trace(&trace)?;
            let fork = fork_ownership_check(&trace)?.verdict;
            let over = checkpoint_override_check(&trace)?.verdict;
            let verdicts: Vec<Verdict> = props
                .iter()
                .map(|&p| match p {
                    "fork_ownership" => fork.clone(),
                    "checkpoint_override" => over.clone(),
                    _ => report
                        .entries()
                        .iter()
                        .find(|(n, _)| *n == p)
                        .map(|(_, v)| (*v).clone())
                        .expect("known property"),
                })
                .collect();
            Ok((verdicts, report.capitulations, report.rounds))
        });
        for (g, r) in per_game.into_iter().enumerate() {
            let (verdicts, caps, n) = r?;
            capitulations += caps;
            rounds += n;
            for (t, v) in totals.iter_mut().zip(verdicts) {
                merge(t, v, g as u64, alpha);
            }
        }
        if fixed {
            break;
        }
    }
    let mut text = header(
        "#",
        "verify",
        &[
            ("strategy", a.strategy.to_string()),
            ("properties", props.join(",")),
            ("alpha", a.alpha.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
            ("games", games.to_string()),
            ("rounds", a.rounds.to_string()),
            ("seed", a.seed.to_string()),
        ],
    );
    let _ = writeln!(text, "rounds {rounds}, capitulations {capitulations}");
    let mut ok = true;
    for (p, v) in props.iter().zip(&totals) {
        ok &= v.holds();
        let _ = writeln!(text, "{p}: {v}");
    }
    Ok(Output { text, ok })
}

fn cmd_reduce(a: &ReduceArgs) -> Result<Output, CliError> {
    let reduced_spec = match a.reduction {
        Reduction::Orderly => StrategySpec::Orderly(Box::new(a.strategy.clone())),
        Reduction::Lcm => StrategySpec::Lcm(Box::new(a.strategy.clone())),
    };
    let inner = play(&a.strategy, a.alpha, a.rounds, a.seed, 0)?;
    let reduced = play(&reduced_spec, a.alpha, a.rounds, a.seed, 0)?;
    let report = classify_trace(&reduced)?;
    let mut text = header(
        "#",
        "reduce",
        &[
            ("strategy", a.strategy.to_string()),
            ("reduction", format!("{:?}", a.reduction)),
            ("alpha", a.alpha.to_string()),
            ("rounds", a.rounds.to_string()),
            ("seed", a.seed.to_string()),
        ],
    );
    let mut worst = f64::INFINITY;
    let mut unequal = 0u64;
    text.push_str("round,rev_inner,rev_reduced\n");
    for (x, y) in inner.records.iter().zip(&reduced.records) {
        let (ri, rr) = (x.revenue(), y.revenue());
        worst = worst.min(rr - ri);
        unequal += u64::from(ri != rr);
        let _ = writeln!(text, "{},{ri:.8},{rr:.8}", x.round);
    }
    let (theorem, verdict) = match a.reduction {
        Reduction::Orderly => (unequal == 0, &report.orderly),
        Reduction::Lcm => (worst >= 0.0, &report.lcm),
    };
    let _ = writeln!(
        text,
        "# reduced strategy: {}\n# rounds differing in revenue: {unequal}\n# min rev_reduced - rev_inner: {worst:.8}\n# reduced {}: {verdict}",
        reduced.strategy,
        match a.reduction {
            Reduction::Orderly => "orderly",
            Reduction::Lcm => "lcm",
        }
    );
    Ok(Output {
        text,
        ok: theorem && verdict.holds() && inner.records.len() == reduced.records.len(),
    })
}

fn cmd_checkpoints(a: &CheckpointsArgs) -> Result<Output, CliError> {
    let raw = std::fs::read_to_string(&a.state)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.state.display())))?;
    let state = parse_statefile(&raw).map_err(|e| CliError::Usage(format!("{}: {e}", a.state.display())))?;
    let list: Vec<String> = checkpoints(&state).iter().map(u64::to_string).collect();
    let text = header("#", "checkpoints", &[("state", a.state.display().to_string())]) + &list.join(" ") + "\n";
    Ok(Output { text, ok: true })
}

fn cmd_stake(a: &StakeArgs) -> Result<Output, CliError> {
    let factory = || -> Box<dyn Strategy> {
        match a.strategy {
            StakeStrategy::Frontier => Box::new(crate::strategies::Frontier::new(Miner::One)),
            StakeStrategy::Nsm => Box::new(crate::strategies::NothingAtStake::new()),
        }
    };
    let series = stake_dynamics(&factory, a.alpha0, a.coins, a.rounds, a.seed)?;
    let mut text = header(
        "#",
        "stake",
        &[
            ("strategy", format!("{:?}", a.strategy).to_lowercase()),
            ("alpha0", a.alpha0.to_string()),
            ("coins", a.coins.to_string()),
            ("rounds", a.rounds.to_string()),
            ("seed", a.seed.to_string()),
        ],
    );
    text.push_str(&series.to_csv());
    Ok(Output { text, ok: true })
}

fn cmd_walk(a: &WalkArgs) -> Result<Output, CliError> {
    let w = walk_stats(a.alpha)?;
    let ruin = ruin_probability(a.alpha, a.lead)?;
    let mut text = header(
        "#",
        "walk",
        &[
            ("alpha", a.alpha.to_string()),
            ("lead", a.lead.to_string()),
            ("simulate", opt(&a.simulate)),
            ("seed", a.seed.to_string()),
        ],
    );
    let _ = writeln!(text, "E[X] {:.6}\nE[Y] {:.6}\nE[tau] {:.6}\nruin {ruin:.6}", w.ex, w.ey, w.etau);
    if let Some(n) = a.simulate {
        let s = simulate_walks(a.alpha, n, a.seed)?;
        let (p, se) = simulate_ruin(a.alpha, a.lead, n, a.seed)?;
        let _ = writeln!(
            text,
            "mc E[X] {:.6} ± {:.6}\nmc E[tau] {:.6} ± {:.6}\nmc ruin {p:.6} ± {se:.6}",
            s.mean_x, s.stderr_x, s.mean_tau, s.stderr_tau
        );
    }
    Ok(Output { text, ok: true })
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Revenue(a) => cmd_revenue(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Checkpoints(a) => cmd_checkpoints(a),
        Command::Stake(a) => cmd_stake(a),
        Command::Walk(a) => cmd_walk(a),
    }
}

/// Parses `args`, runs, writes the output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let written = match &cli.output {
                Some(p) => write_file(p, &out.text),
                None => std::io::stdout()
                    .write_all(out.text.as_bytes())
                    .map_err(|e| CliError::Failure(e.to_string())),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return e.exit_code();
            }
            i32::from(!out.ok)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
