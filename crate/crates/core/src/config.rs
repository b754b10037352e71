//! Run configuration files, agent specifiers and run directories.
//!
//! A run file is TOML:
//!
//! ```toml
//! seed = 7
//! out = "runs/sp"
//!
//! [teams]
//! bundled = ["sunrise"]
//! files = ["teams/mine.toml"]
//! generated = 0
//!
//! [train]
//! paradigm = "sp"
//!
//! [hyper]
//! learning_rate = 3e-4
//! total_timesteps = 200000
//! ```
//!
//! Relative paths resolve against the file's directory. Every error names
//! the offending key path.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Checkpoint, MaxBasePowerPlayer, NetworkPolicy, Policy, RandomPlayer, SimpleHeuristicsPlayer};
use crate::evalsuite::{AgentInfo, EvalAgent};
use crate::game::{teams, GameOptions, TeamConfig};
use crate::learn::paradigm::Widths;
use crate::learn::{Hyperparameters, Paradigm, RunSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    /// The file does not match the schema; `path` is the key path.
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("agent `{spec}`: {message}")]
    Agent { spec: String, message: String },
}

impl ConfigError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError::Schema { path: path.into(), message: message.into() }
    }
}

/// Where the training teams come from. Sources are concatenated in the order
/// bundled, files, generated.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeamSource {
    /// Names of bundled teams.
    pub bundled: Vec<String>,
    /// Team files.
    pub files: Vec<PathBuf>,
    /// Number of randomly generated teams.
    pub generated: usize,
    pub generated_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub paradigm: Paradigm,
    /// Checkpoint to start the actor from.
    pub init: Option<PathBuf>,
    pub pool_cap: usize,
    pub eval_games: u64,
    pub snapshot_every: Option<u64>,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection { paradigm: Paradigm::Sp, init: None, pool_cap: 32, eval_games: 100, snapshot_every: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Run directory.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub teams: TeamSource,
    #[serde(default)]
    pub options: GameOptions,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub hyper: Hyperparameters,
    #[serde(default)]
    pub widths: Widths,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("runs/train")
}

impl RunConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
        let de = toml::Deserializer::new(text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::schema(if path == "." { String::new() } else { path }, e.into_inner().message().trim().to_string())
        })?;
        cfg.base = base.to_path_buf();
        cfg.hyper.validate().map_err(|e| ConfigError::schema("hyper", e.to_string()))?;
        if cfg.options.n_frames == 0 {
            return Err(ConfigError::schema("options.n_frames", "must be at least 1"));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        RunConfig::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Load and validate every configured team.
    pub fn teams(&self) -> Result<Vec<Arc<TeamConfig>>, ConfigError> {
        let src = &self.teams;
        let mut out = Vec::new();
        let names: Vec<&str> = teams::bundled_names().collect();
        for (i, name) in src.bundled.iter().enumerate() {
            let Some(k) = names.iter().position(|n| n == name) else {
                return Err(ConfigError::schema(
                    format!("teams.bundled[{i}]"),
                    format!("unknown bundled team {name:?}; known: {}", names.join(", ")),
                ));
            };
            out.push(Arc::new(teams::bundled()[k].clone()));
        }
        for (i, f) in src.files.iter().enumerate() {
            let key = format!("teams.files[{i}]");
            let path = self.resolve(f);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ConfigError::schema(&key, format!("cannot read team file {}: {e}", path.display())))?;
            let team = TeamConfig::from_text(&text).map_err(|e| ConfigError::schema(&key, e.to_string()))?;
            out.push(Arc::new(team));
        }
        out.extend(teams::pool(src.generated, src.generated_seed).into_iter().map(Arc::new));
        if out.is_empty() {
            return Err(ConfigError::schema("teams", "no teams configured"));
        }
        Ok(out)
    }

    /// Training spec with teams resolved and the run directory set.
    pub fn run_spec(&self) -> Result<RunSpec, ConfigError> {
        let teams = self.teams()?;
        let mut spec = RunSpec::new(self.train.paradigm, teams, self.hyper.clone(), self.seed);
        spec.widths = self.widths;
        spec.options = self.options.clone();
        spec.pool_cap = self.train.pool_cap;
        spec.eval_games = self.train.eval_games;
        spec.snapshot_every = self.train.snapshot_every;
        spec.team_set = format!("{}team", spec.teams.len());
        spec.run_dir = Some(self.resolve(&self.out));
        if let Some(init) = &self.train.init {
            let path = self.resolve(init);
            let ck = Checkpoint::load(&path, None).map_err(|e| ConfigError::schema("train.init", e.to_string()))?;
            spec.init = Some(ck.network);
        }
        Ok(spec)
    }
}

/// Written to `run.json` so evaluation knows which teams an agent saw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub paradigm: String,
    pub seed: u64,
    pub steps: u64,
    /// File names under `teams/`.
    pub teams: Vec<String>,
}

/// Store the training teams and the manifest in `dir`.
pub fn write_run_manifest(dir: &Path, spec: &RunSpec, steps: u64) -> Result<(), ConfigError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ConfigError::Io { path, source }
    };
    let tdir = dir.join("teams");
    std::fs::create_dir_all(&tdir).map_err(io(&tdir))?;
    let mut names = Vec::new();
    for t in &spec.teams {
        let name = format!("{}.toml", t.id());
        let p = tdir.join(&name);
        std::fs::write(&p, t.to_text()).map_err(io(&p))?;
        names.push(name);
    }
    let m = RunManifest { paradigm: format!("{:?}", spec.paradigm).to_lowercase(), seed: spec.seed, steps, teams: names };
    let p = dir.join("run.json");
    std::fs::write(&p, serde_json::to_string_pretty(&m).expect("manifest serializes")).map_err(io(&p))
}

/// Parse an agent specifier:
///
/// | spec | agent |
/// |------|-------|
/// | `random`, `max-power`, `heuristic` | scripted baseline |
/// | `path/to/file.ckpt` | network policy |
/// | `path/to/run_dir` | the run's `output.ckpt`, with its training teams |
///
/// Baselines and bare checkpoints carry no training teams.
pub fn load_agent(spec: &str) -> Result<EvalAgent, ConfigError> {
    let err = |m: String| ConfigError::Agent { spec: spec.to_string(), message: m };
    let baseline = |policy: Arc<dyn Policy>, id: &str| EvalAgent {
        info: AgentInfo { id: id.into(), paradigm: "scripted".into(), team_set_size: 0, seed: 0 },
        policy,
        train_teams: Vec::new(),
    };
    match spec {
        "random" => return Ok(baseline(Arc::new(RandomPlayer), "random")),
        "max-power" | "mbp" => return Ok(baseline(Arc::new(MaxBasePowerPlayer), "max-power")),
        "heuristic" | "sh" => return Ok(baseline(Arc::new(SimpleHeuristicsPlayer::default()), "heuristic")),
        _ => {}
    }
    let path = Path::new(spec);
    if path.is_dir() {
        let mtext = std::fs::read_to_string(path.join("run.json")).map_err(|e| err(format!("run.json: {e}")))?;
        let m: RunManifest = serde_json::from_str(&mtext).map_err(|e| err(format!("run.json: {e}")))?;
        let ck = Checkpoint::load(&path.join("output.ckpt"), None).map_err(|e| err(e.to_string()))?;
        let mut train_teams = Vec::new();
        for name in &m.teams {
            let p = path.join("teams").join(name);
            let text = std::fs::read_to_string(&p).map_err(|e| err(format!("{}: {e}", p.display())))?;
            train_teams.push(Arc::new(TeamConfig::from_text(&text).map_err(|e| err(format!("{name}: {e}")))?));
        }
        let id = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.to_string());
        return Ok(EvalAgent {
            info: AgentInfo { id: id.clone(), paradigm: m.paradigm, team_set_size: train_teams.len(), seed: m.seed },
            policy: Arc::new(NetworkPolicy::new(ck.network, id)),
            train_teams,
        });
    }
    if path.is_file() {
        let ck = Checkpoint::load(path, None).map_err(|e| err(e.to_string()))?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.to_string());
        return Ok(EvalAgent {
            info: AgentInfo { id: id.clone(), paradigm: "checkpoint".into(), team_set_size: 0, seed: 0 },
            policy: Arc::new(NetworkPolicy::new(ck.network, id)),
            train_teams: Vec::new(),
        });
    }
    Err(err("not a baseline name, checkpoint file or run directory".into()))
}

/// Read team files, or the named bundled teams.
pub fn load_teams(specs: &[String]) -> Result<Vec<Arc<TeamConfig>>, ConfigError> {
    let names: Vec<&str> = teams::bundled_names().collect();
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if let Some(k) = names.iter().position(|n| n == s) {
                return Ok(Arc::new(teams::bundled()[k].clone()));
            }
            let text = std::fs::read_to_string(s)
                .map_err(|e| ConfigError::schema(format!("teams[{i}]"), format!("cannot read team file {s}: {e}")))?;
            TeamConfig::from_text(&text).map(Arc::new).map_err(|e| ConfigError::schema(format!("teams[{i}]"), e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let name = teams::bundled_names().next().unwrap();
        let cfg = RunConfig::from_toml(&format!("[teams]\nbundled = [{name:?}]\n"), Path::new(".")).unwrap();
        assert_eq!(cfg.train.paradigm, Paradigm::Sp);
        assert_eq!(cfg.hyper, Hyperparameters::default());
        assert_eq!(cfg.teams().unwrap().len(), 1);
    }

    #[test]
    fn unknown_key_names_its_path() {
        let e = RunConfig::from_toml("[teams]\n[hyper]\nlearning_rat = 1.0\n", Path::new(".")).unwrap_err();
        match e {
            ConfigError::Schema { path, message } => {
                assert_eq!(path, "hyper.learning_rat");
                assert!(message.contains("learning_rat"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn wrong_type_names_its_path() {
        let e = RunConfig::from_toml("[teams]\ngenerated = \"four\"\n", Path::new(".")).unwrap_err();
        assert!(matches!(e, ConfigError::Schema { ref path, .. } if path == "teams.generated"), "{e}");
    }

    #[test]
    fn missing_team_file_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::from_toml("[teams]\nfiles = [\"nope.toml\"]\n", dir.path()).unwrap();
        let e = cfg.teams().unwrap_err();
        assert!(matches!(e, ConfigError::Schema { ref path, .. } if path == "teams.files[0]"), "{e}");
    }

    #[test]
    fn missing_teams_table_is_reported() {
        let e = RunConfig::from_toml("seed = 1\n", Path::new(".")).unwrap_err();
        assert!(matches!(e, ConfigError::Schema { ref message, .. } if message.contains("teams")), "{e}");
    }

    #[test]
    fn baseline_specs_resolve() {
        for s in ["random", "max-power", "heuristic"] {
            assert_eq!(load_agent(s).unwrap().info.id, s);
        }
        assert!(matches!(load_agent("/no/such/agent"), Err(ConfigError::Agent { .. })));
    }
}
