//! `arena`: train, evaluate and serve doubles agents.

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use arena::agents::Policy;
use arena::config::{load_agent, load_teams, write_run_manifest, ConfigError, RunConfig};
use arena::evalsuite::{exploitability, generalization_test, performance_test, EvalAgent, EvalError, ExploitConfig};
use arena::game::{teams, GameOptions, TeamConfig};
use arena::learn::paradigm::run_paradigm_with;
use arena::learn::{Hyperparameters, LearnError};
use arena::metagame::alpharank::DEFAULT_ALPHAS;
use arena::metagame::{alpha_rank, alpha_sweep, estimate_crossplay, solve_zero_sum_nash, AlphaRankParams, CrossplaySpec, MetaError, PayoffMatrix, Ranking};
use arena::replay::{parse_log_bytes, Filters, ReplayError};
use arena::service::server::SessionFactory;
use arena::service::{play_remote, ServiceError, Session, SessionConfig};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Parser)]
#[command(name = "arena", version, about = "Doubles battle arena: training, evaluation and match service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent from a run file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override `hyper.total_timesteps`.
        #[arg(long)]
        timesteps: Option<u64>,
    },
    /// Run a performance or generalization test.
    Evaluate {
        /// Baseline name, checkpoint file or run directory; repeat per agent.
        #[arg(long = "agent", required = true)]
        agents: Vec<String>,
        #[arg(long, value_enum, default_value = "performance")]
        protocol: ProtocolArg,
        /// Teams for agents without a training set (baselines, bare checkpoints).
        #[arg(long = "team")]
        teams: Vec<String>,
        /// Number of generated held-out teams (generalization).
        #[arg(long, default_value_t = 24)]
        held_out: usize,
        #[arg(long, default_value_t = 99)]
        held_out_seed: u64,
        #[arg(long, default_value_t = 1000)]
        games: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Estimate the win-rate matrix of a pool of agents.
    Crossplay {
        #[arg(long = "agent", required = true)]
        agents: Vec<String>,
        /// Bundled team name or team file; defaults to every bundled team.
        #[arg(long = "team")]
        teams: Vec<String>,
        #[arg(long, default_value_t = 200)]
        games: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the matrix in text form.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank strategies of a win-rate matrix with Alpha-Rank and Nash.
    Alpharank {
        #[arg(long)]
        matrix: PathBuf,
        /// Selection intensity; omit to sweep the default intensities.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 50)]
        population: usize,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Train a best response against a frozen agent.
    Exploit {
        #[arg(long)]
        target: String,
        #[arg(long = "team")]
        teams: Vec<String>,
        #[arg(long, default_value_t = 20)]
        updates: u64,
        #[arg(long, default_value_t = 5)]
        eval_every: u64,
        #[arg(long, default_value_t = 200)]
        eval_games: u64,
        #[arg(long, default_value_t = 3e-4)]
        learning_rate: f64,
        #[arg(long, default_value_t = 3072)]
        steps_per_update: usize,
        #[arg(long, default_value_t = 4)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the state-space and decision-size analysis.
    Analyze {
        /// Print only the key figures, one per line.
        #[arg(long)]
        figures: bool,
    },
    /// Validate battle logs and optionally export a cloning dataset.
    ParseLogs {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        min_rating: Option<u32>,
        #[arg(long)]
        winner_only: bool,
        /// Write the selected trajectories as a JSON dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Host sessions against an agent over WebSocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: String,
        #[arg(long, default_value = "heuristic")]
        agent: String,
        #[arg(long, default_value = "sunrise")]
        client_team: String,
        #[arg(long, default_value = "sunrise")]
        agent_team: String,
        #[arg(long, default_value_t = 5)]
        games: u32,
        #[arg(long)]
        transcripts: Option<PathBuf>,
        #[arg(long)]
        deadline_ms: Option<u64>,
        /// Stop after this many sessions finish.
        #[arg(long)]
        sessions: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play a session against a server with a local agent.
    PlayBot {
        #[arg(long, default_value = "ws://127.0.0.1:8765")]
        url: String,
        #[arg(long, default_value = "max-power")]
        agent: String,
        #[arg(long, default_value = "bot")]
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Performance,
    Generalization,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Train { config, out, timesteps } => train(&config, out, timesteps),
        Command::Evaluate { agents, protocol, teams, held_out, held_out_seed, games, seed, json } => {
            evaluate(&agents, protocol, &teams, held_out, held_out_seed, games, seed, json.as_deref())
        }
        Command::Crossplay { agents, teams, games, seed, out } => crossplay(&agents, &teams, games, seed, out.as_deref()),
        Command::Alpharank { matrix, alpha, population, epsilon } => alpharank(&matrix, alpha, population, epsilon),
        Command::Exploit { target, teams, updates, eval_every, eval_games, learning_rate, steps_per_update, epochs, seed } => {
            let hyper = Hyperparameters { learning_rate, steps_per_update, n_epochs: epochs, ..Hyperparameters::default() };
            let cfg = ExploitConfig { hyper, updates, eval_every, eval_games, seed, ..ExploitConfig::default() };
            exploit(&target, &teams, &cfg)
        }
        Command::Analyze { figures } => {
            if figures {
                for f in arena::analysis::report::key_figures() {
                    println!("{:<24} {}", f.label, f.value);
                }
            } else {
                print!("{}", arena::analysis::full_report());
            }
            Ok(())
        }
        Command::ParseLogs { files, min_rating, winner_only, dataset } => parse_logs(&files, Filters { min_rating, winner_only }, dataset.as_deref()),
        Command::Serve { addr, agent, client_team, agent_team, games, transcripts, deadline_ms, sessions, seed } => {
            let agent = load_agent(&agent)?.policy;
            let t = load_teams(&[client_team, agent_team])?;
            let mut cfg = SessionConfig::new(t[0].clone(), t[1].clone());
            cfg.games = games;
            cfg.seed = seed;
            cfg.transcript_dir = transcripts;
            cfg.deadline_ms = deadline_ms;
            let factory: SessionFactory = Arc::new(move |token| Session::new(cfg.clone(), agent.clone(), token));
            let listener = TcpListener::bind(&addr).map_err(|e| CliError::Usage(format!("cannot bind {addr}: {e}")))?;
            println!("serving on ws://{}", listener.local_addr().map_err(|e| CliError::Usage(e.to_string()))?);
            arena::service::server::serve(listener, factory, seed, sessions)?;
            Ok(())
        }
        Command::PlayBot { url, agent, name, seed } => {
            let agent = load_agent(&agent)?;
            let out = play_remote(&url, agent.policy.as_ref(), &name, GameOptions::default().n_frames, seed)?;
            println!("games {} wins {} losses {} draws {} errors {}", out.games, out.wins, out.losses, out.draws, out.errors);
            Ok(())
        }
    }
}

fn train(config: &Path, out: Option<PathBuf>, timesteps: Option<u64>) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(o) = out {
        cfg.out = std::env::current_dir().map_err(io_err(Path::new(".")))?.join(o);
    }
    if let Some(t) = timesteps {
        cfg.hyper.total_timesteps = t;
    }
    let spec = cfg.run_spec()?;
    let dir = spec.run_dir.clone().expect("run_spec sets the run directory");
    eprintln!("training {:?} on {} team(s) into {}", spec.paradigm, spec.teams.len(), dir.display());
    let start = Instant::now();
    let result = run_paradigm_with(&spec, |m, _| {
        eprintln!(
            "update {:>4} step {:>8} win {:.3} entropy {:.3} kl {:.4} ({:.0?})",
            m.update,
            m.step,
            m.win_rate,
            m.diagnostics.entropy,
            m.diagnostics.approx_kl,
            start.elapsed()
        );
    })?;
    let steps = result.pool.members.last().map(|m| m.step).unwrap_or(0);
    write_run_manifest(&dir, &spec, steps)?;
    println!("{} steps in {:.1?}; output {}", steps, start.elapsed(), dir.join("output.ckpt").display());
    Ok(())
}

/// Agents without a training set are treated as trained on `fallback`.
fn eval_agents(specs: &[String], fallback: &[Arc<TeamConfig>]) -> Result<Vec<EvalAgent>, CliError> {
    let mut agents: Vec<EvalAgent> = specs.iter().map(|s| load_agent(s)).collect::<Result<_, _>>()?;
    let union: Vec<Arc<TeamConfig>> = if fallback.is_empty() {
        let mut u: Vec<Arc<TeamConfig>> = Vec::new();
        for t in agents.iter().flat_map(|a| a.train_teams.iter()) {
            if !u.iter().any(|x| x.id() == t.id()) {
                u.push(t.clone());
            }
        }
        u
    } else {
        fallback.to_vec()
    };
    for a in agents.iter_mut().filter(|a| a.train_teams.is_empty()) {
        if union.is_empty() {
            return Err(CliError::Usage(format!("agent {} has no training teams; pass --team", a.info.id)));
        }
        a.train_teams = union.clone();
        a.info.team_set_size = union.len();
    }
    Ok(agents)
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    specs: &[String],
    protocol: ProtocolArg,
    team_specs: &[String],
    held_out: usize,
    held_out_seed: u64,
    games: u64,
    seed: u64,
    json: Option<&Path>,
) -> Result<(), CliError> {
    let fallback = load_teams(team_specs)?;
    let agents = eval_agents(specs, &fallback)?;
    let opts = GameOptions::default();
    let report = match protocol {
        ProtocolArg::Performance => performance_test(&agents, games, seed, &opts)?,
        ProtocolArg::Generalization => {
            let seen: Vec<TeamConfig> = agents.iter().flat_map(|a| a.train_teams.iter().map(|t| (**t).clone())).collect();
            let held: Vec<Arc<TeamConfig>> = teams::held_out(held_out, held_out_seed, &seen).into_iter().map(Arc::new).collect();
            generalization_test(&agents, &held, games, seed, &opts)?
        }
    };
    print!("{}", report.to_table());
    if let Some(p) = json {
        std::fs::write(p, report.to_json()?).map_err(io_err(p))?;
    }
    Ok(())
}

fn crossplay(specs: &[String], team_specs: &[String], games: u64, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let agents: Vec<EvalAgent> = specs.iter().map(|s| load_agent(s)).collect::<Result<_, _>>()?;
    let teams = if team_specs.is_empty() { teams::bundled().iter().cloned().map(Arc::new).collect() } else { load_teams(team_specs)? };
    let pool: Vec<&dyn Policy> = agents.iter().map(|a| a.policy.as_ref()).collect();
    let spec = CrossplaySpec { teams, n_games: games, seed, options: GameOptions::default() };
    let cp = estimate_crossplay(&pool, &spec)?;
    let mut m = cp.matrix;
    m.ids = agents.iter().map(|a| a.info.id.clone()).collect();
    print!("{}", m.to_text());
    if let Some(p) = out {
        std::fs::write(p, m.to_text()).map_err(io_err(p))?;
    }
    Ok(())
}

fn alpharank(path: &Path, alpha: Option<f64>, population: usize, epsilon: Option<f64>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let m = PayoffMatrix::from_text(&text)?;
    match alpha {
        Some(alpha) => {
            let r = alpha_rank(&m, AlphaRankParams { alpha, population, epsilon })?;
            print!("{}", r.ranking.to_table(&format!("Alpha-Rank (alpha {alpha}, m {population})")));
            println!("residual {:.2e}", r.residual);
        }
        None => {
            let (results, primary) = alpha_sweep(&m, population, epsilon, &DEFAULT_ALPHAS);
            for (a, r) in DEFAULT_ALPHAS.iter().zip(&results) {
                match r {
                    Ok(r) => print!("{}", r.ranking.to_table(&format!("Alpha-Rank (alpha {a}, m {population})"))),
                    Err(e) => println!("alpha {a}: {e}"),
                }
            }
            if let Some(i) = primary {
                println!("reported intensity: alpha {}", DEFAULT_ALPHAS[i]);
            }
        }
    }
    let nash = solve_zero_sum_nash(&m.zero_sum(), 1e-9)?;
    print!("{}", Ranking::from_scores(&m.ids, &nash.row.probs).to_table("Nash mixture"));
    println!("value {:.6} gap {:.2e}", nash.value, nash.gap);
    Ok(())
}

fn exploit(target: &str, team_specs: &[String], cfg: &ExploitConfig) -> Result<(), CliError> {
    let target = load_agent(target)?;
    let teams = if !team_specs.is_empty() {
        load_teams(team_specs)?
    } else if !target.train_teams.is_empty() {
        target.train_teams.clone()
    } else {
        vec![Arc::new(teams::bundled()[0].clone())]
    };
    let curve = exploitability(target.policy.clone(), &teams, None, cfg)?;
    print!("{}", curve.to_table(&format!("Exploiter vs {}", target.info.id)));
    println!("exploitability {:.3} ± {:.3}", curve.exploitability(), curve.halfwidth());
    Ok(())
}

fn parse_logs(files: &[PathBuf], filters: Filters, dataset: Option<&Path>) -> Result<(), CliError> {
    let mut parsed = Vec::new();
    let mut failed = 0usize;
    for f in files {
        let bytes = std::fs::read(f).map_err(io_err(f))?;
        match parse_log_bytes(&bytes) {
            Ok(log) => {
                println!(
                    "{}: ok, {} turns, winner {}, {} decisions",
                    f.display(),
                    log.turns,
                    log.winner.map(|w| format!("{w:?}")).unwrap_or_else(|| "none".into()),
                    log.actions.len()
                );
                parsed.push(log);
            }
            Err(e) => {
                failed += 1;
                println!("{}: {e}", f.display());
            }
        }
    }
    if let Some(p) = dataset {
        let ds = arena::replay::reader::to_dataset(&parsed, &filters);
        std::fs::write(p, serde_json::to_string(&ds).expect("datasets serialize")).map_err(io_err(p))?;
        println!("dataset: {} samples from {} logs", ds.len(), parsed.len());
    }
    if failed > 0 {
        return Err(CliError::Usage(format!("{failed} of {} logs failed to parse", files.len())));
    }
    Ok(())
}
