use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use nash_gadgets::bayesian::{
    build_setcover_game, find_pure_bne, solve_set_cover_bruteforce, BayesianError, SetCoverInstance,
};
use nash_gadgets::cnf::{self, CnfError};
use nash_gadgets::enumeration::{enumerate_equilibria, EnumError};
use nash_gadgets::game::{GameError, GameJson, MixedProfile};
use nash_gadgets::gphi::{
    build_g_phi, count_connected_sets, count_equilibria, query_equilibria, GphiError, GphiJson,
    Query,
};
use nash_gadgets::markov::{
    assignment_to_strategies, build_periodic_game, build_periodic_game_finite,
    check_deviation_discounted, default_finite_horizon, evaluate_discounted, find_pure_ne_finite,
    periodic_sat_oracle, MarkovError, PeriodicFormula,
};
use nash_gadgets::rational::Rational;
use nash_gadgets::report::ReportBuilder;

#[derive(Parser)]
#[command(
    name = "nash-gadgets",
    version,
    about = "Exact gadget games and equilibrium solvers"
)]
struct Cli {
    /// Worker threads (default: all cores). Results are identical for
    /// any value.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Omit the timing field, making reports byte-reproducible.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CNF-to-game compilation and equilibrium queries
    Gphi {
        #[command(subcommand)]
        action: GphiAction,
    },
    /// Complete equilibrium enumeration of a 2-player game
    Enumerate {
        #[arg(long)]
        game: PathBuf,
    },
    /// Verify a mixed profile as a Nash equilibrium
    Verify {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        profile: PathBuf,
    },
    /// Bayesian set-cover game construction and pure-BNE search
    Bne {
        #[command(subcommand)]
        action: BneAction,
    },
    /// Independent set-cover oracle
    Setcover {
        #[command(subcommand)]
        action: SetcoverAction,
    },
    /// Stochastic-game construction and analysis
    Markov {
        #[command(subcommand)]
        action: MarkovAction,
    },
}

#[derive(Subcommand)]
enum GphiAction {
    /// Compile a DIMACS CNF into its game, printed as JSON
    Build(CnfInput),
    /// Enumerate equilibria and answer a query
    Analyze {
        #[command(flatten)]
        input: CnfInput,
        /// count | connected_sets | more_than_one | exists_pareto_optimal |
        /// welfare_at_least | all_utilities_at_least |
        /// player1_utility_at_least | sometimes_plays | never_plays
        #[arg(long)]
        query: String,
        /// Threshold for *_at_least queries, as p/q
        #[arg(long)]
        k: Option<String>,
        /// Strategy label for sometimes_plays / never_plays
        #[arg(long)]
        strategy: Option<String>,
    },
}

#[derive(Args)]
struct CnfInput {
    #[arg(long)]
    cnf: PathBuf,
}

#[derive(Subcommand)]
enum BneAction {
    Build {
        #[arg(long)]
        instance: PathBuf,
    },
    Solve {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Subcommand)]
enum SetcoverAction {
    Solve {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Subcommand)]
enum MarkovAction {
    /// Build the discounted game, or the finite variant when --horizon
    /// is given
    Build {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Search for a bounded-period satisfying assignment and certify the
    /// induced profile of the discounted game
    Check {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_period: usize,
    },
    /// Finite-horizon pure-equilibrium search on the finite variant
    Solve {
        #[arg(long)]
        formula: PathBuf,
        /// Defaults to a formula-dependent horizon covering every block
        #[arg(long)]
        horizon: Option<usize>,
    },
}

/// Exit 2: malformed input. Exit 3: over a capacity bound.
enum AppError {
    Input(String),
    Capacity(String),
}

impl AppError {
    fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Input(_) => ExitCode::from(2),
            AppError::Capacity(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Input(m) | AppError::Capacity(m) => m,
        }
    }
}

macro_rules! capacity_aware {
    ($err_ty:ty, $pat:pat) => {
        impl From<$err_ty> for AppError {
            fn from(e: $err_ty) -> Self {
                if matches!(&e, $pat) {
                    AppError::Capacity(e.to_string())
                } else {
                    AppError::Input(e.to_string())
                }
            }
        }
    };
}

capacity_aware!(CnfError, CnfError::Capacity { .. });
capacity_aware!(EnumError, EnumError::Capacity { .. });
capacity_aware!(BayesianError, BayesianError::Capacity { .. });
capacity_aware!(MarkovError, MarkovError::Capacity { .. });

impl From<GameError> for AppError {
    fn from(e: GameError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<GphiError> for AppError {
    fn from(e: GphiError) -> Self {
        match e {
            GphiError::Cnf(inner) => inner.into(),
            other => AppError::Input(other.to_string()),
        }
    }
}

fn read_input(builder: &mut ReportBuilder, path: &PathBuf) -> Result<String, AppError> {
    let bytes = std::fs::read(path)
        .map_err(|e| AppError::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| AppError::Input(format!("{} is not UTF-8", path.display())))?;
    builder.record_input(&path.display().to_string(), text.as_bytes());
    Ok(text)
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, AppError> {
    serde_json::from_str(text).map_err(|e| AppError::Input(format!("invalid {what} JSON: {e}")))
}

fn parse_rational(text: &str) -> Result<Rational, AppError> {
    text.parse()
        .map_err(|_| AppError::Input(format!("invalid rational {text:?}, expected p/q")))
}

fn build_query(name: &str, k: Option<String>, strategy: Option<String>) -> Result<Query, AppError> {
    let need_k = || {
        k.as_deref()
            .ok_or_else(|| AppError::Input(format!("query {name} requires --k")))
            .and_then(parse_rational)
    };
    let need_strategy = || {
        strategy
            .clone()
            .ok_or_else(|| AppError::Input(format!("query {name} requires --strategy")))
    };
    Ok(match name {
        "welfare_at_least" => Query::WelfareAtLeast(need_k()?),
        "all_utilities_at_least" => Query::AllUtilitiesAtLeast(need_k()?),
        "player1_utility_at_least" => Query::Player1UtilityAtLeast(need_k()?),
        "exists_pareto_optimal" => Query::ExistsParetoOptimal,
        "more_than_one" => Query::MoreThanOne,
        "sometimes_plays" => Query::SometimesPlays(need_strategy()?),
        "never_plays" => Query::NeverPlays(need_strategy()?),
        other => return Err(AppError::Input(format!("unknown query {other:?}"))),
    })
}

/// Largest horizon (a multiple of n, at least 2n so both block indices
/// appear) whose per-player sequence count stays under the brute-force
/// bound; preferred is the horizon aligned with the discounted
/// construction.
fn default_search_horizon(formula: &PeriodicFormula) -> usize {
    let n = formula.n.max(1);
    let base = (2 + formula.clauses.len()) as u64;
    let fits = |t: usize| {
        let mut count: u64 = 1;
        for _ in 0..t {
            count = count.saturating_mul(base);
            if count > nash_gadgets::markov::DEFAULT_SEQUENCE_BOUND {
                return false;
            }
        }
        true
    };
    let mut t = default_finite_horizon(n);
    while t > 2 * n && !fits(t) {
        t -= n;
    }
    t
}

fn run(cli: Cli, command_echo: String) -> Result<(), AppError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(AppError::Input("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| AppError::Input(format!("cannot configure worker pool: {e}")))?;
    }
    let mut builder = ReportBuilder::new(command_echo, !cli.no_timing);

    let result: Value = match cli.command {
        Command::Gphi { action } => match action {
            GphiAction::Build(input) => {
                let text = read_input(&mut builder, &input.cnf)?;
                let parsed = cnf::parse_dimacs(&text)?;
                let g = build_g_phi(parsed.formula)?;
                json!({
                    "game": GphiJson::from_gphi(&g)?,
                    "warnings": parsed.warnings,
                })
            }
            GphiAction::Analyze {
                input,
                query,
                k,
                strategy,
            } => {
                let text = read_input(&mut builder, &input.cnf)?;
                let parsed = cnf::parse_dimacs(&text)?;
                let g = build_g_phi(parsed.formula)?;
                let enumeration = enumerate_equilibria(&g.game)?;
                let mut payload = json!({
                    "query": query,
                    "complete": enumeration.complete,
                    "degenerate": enumeration.degenerate,
                });
                let obj = payload.as_object_mut().expect("object literal");
                match query.as_str() {
                    "count" => {
                        obj.insert("count".into(), json!(count_equilibria(&enumeration)?));
                    }
                    "connected_sets" => {
                        obj.insert(
                            "connected_sets".into(),
                            json!(count_connected_sets(&enumeration)?),
                        );
                    }
                    name => {
                        let q = build_query(name, k, strategy)?;
                        obj.insert(
                            "answer".into(),
                            json!(query_equilibria(&g, &enumeration, &q)?),
                        );
                    }
                }
                payload
            }
        },
        Command::Enumerate { game } => {
            let text = read_input(&mut builder, &game)?;
            let game = parse_json::<GameJson>(&text, "game")?.into_game()?;
            let result = enumerate_equilibria(&game)?;
            serde_json::to_value(&result).expect("serializable result")
        }
        Command::Verify { game, profile } => {
            let game_text = read_input(&mut builder, &game)?;
            let profile_text = read_input(&mut builder, &profile)?;
            let game = parse_json::<GameJson>(&game_text, "game")?.into_game()?;
            let profile: MixedProfile = parse_json(&profile_text, "profile")?;
            let certificate = game.verify_nash(&profile)?;
            serde_json::to_value(&certificate).expect("serializable certificate")
        }
        Command::Bne { action } => match action {
            BneAction::Build { instance } => {
                let text = read_input(&mut builder, &instance)?;
                let instance: SetCoverInstance = parse_json(&text, "set-cover instance")?;
                let game = build_setcover_game(&instance)?;
                json!({
                    "actions": game.actions[0],
                    "types_per_player": [game.num_types(0), game.num_types(1)],
                    "prior": game.prior,
                    "utilities_type_independent": true,
                    "player1_utilities": game.utilities[0][0],
                })
            }
            BneAction::Solve { instance } => {
                let text = read_input(&mut builder, &instance)?;
                let instance: SetCoverInstance = parse_json(&text, "set-cover instance")?;
                let game = build_setcover_game(&instance)?;
                let bne = find_pure_bne(&game)?;
                match bne {
                    Some(profile) => {
                        let labels: Vec<Vec<&str>> = profile
                            .actions
                            .iter()
                            .enumerate()
                            .map(|(p, map)| {
                                map.iter().map(|&a| game.actions[p][a].as_str()).collect()
                            })
                            .collect();
                        json!({ "bne": profile, "action_labels": labels })
                    }
                    None => json!({ "bne": null }),
                }
            }
        },
        Command::Setcover { action } => match action {
            SetcoverAction::Solve { instance } => {
                let text = read_input(&mut builder, &instance)?;
                let instance: SetCoverInstance = parse_json(&text, "set-cover instance")?;
                json!({ "cover": solve_set_cover_bruteforce(&instance)? })
            }
        },
        Command::Markov { action } => match action {
            MarkovAction::Build { formula, horizon } => {
                let text = read_input(&mut builder, &formula)?;
                let formula: PeriodicFormula = parse_json(&text, "periodic formula")?;
                let game = match horizon {
                    Some(t) => build_periodic_game_finite(&formula, t)?,
                    None => build_periodic_game(&formula)?,
                };
                game.to_json()
            }
            MarkovAction::Check {
                formula,
                max_period,
            } => {
                let text = read_input(&mut builder, &formula)?;
                let formula: PeriodicFormula = parse_json(&text, "periodic formula")?;
                let game = build_periodic_game(&formula)?;
                match periodic_sat_oracle(&formula, max_period)? {
                    Some(cycle) => {
                        let seq = assignment_to_strategies(&formula, &cycle)?;
                        let profile = [seq.clone(), seq.clone()];
                        let realized = evaluate_discounted(&game, &profile, 0)?;
                        let gains: Vec<String> = (0..2)
                            .map(|d| {
                                check_deviation_discounted(&game, &profile, d, 0)
                                    .map(|g| g.to_string())
                            })
                            .collect::<Result<_, _>>()?;
                        json!({
                            "assignment_cycle": cycle,
                            "strategy": seq,
                            "realized": [realized[0].to_string(), realized[1].to_string()],
                            "deviation_gains": gains,
                            "equilibrium": (0..2).all(|d| {
                                check_deviation_discounted(&game, &profile, d, 0)
                                    .map(|g| !g.is_positive())
                                    .unwrap_or(false)
                            }),
                        })
                    }
                    None => json!({ "assignment_cycle": null }),
                }
            }
            MarkovAction::Solve { formula, horizon } => {
                let text = read_input(&mut builder, &formula)?;
                let formula: PeriodicFormula = parse_json(&text, "periodic formula")?;
                let horizon = horizon.unwrap_or_else(|| default_search_horizon(&formula));
                let game = build_periodic_game_finite(&formula, horizon)?;
                let witness = find_pure_ne_finite(&game, horizon)?;
                json!({
                    "horizon": horizon,
                    "equilibrium": witness.map(|(p1, p2)| json!([p1, p2])),
                })
            }
        },
    };

    use std::io::Write;
    // tolerate a closed pipe (e.g. piped into head)
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        builder.finish(result).to_json_string()
    );
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let command_echo = argv[1..].join(" ");
    let cli = Cli::parse();
    match run(cli, command_echo) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
