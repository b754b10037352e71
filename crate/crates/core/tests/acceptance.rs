//! Acceptance runner: one PASS/FAIL line per primary criterion.
//!
//! Run with `cargo test -p doubles-arena --test acceptance`. The learning
//! criteria train real agents and take several minutes on one core.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use arena::agents::{
    play_game, Arch, GameRecord, MaxBasePowerPlayer, Network, NetworkPolicy, Policy, RandomPlayer, SimpleHeuristicsPlayer,
};
use arena::analysis::bounded_compositions;
use arena::analysis::report::key_figures;
use arena::evalsuite::{exploitability, generalization_test, performance_test, AgentInfo, EvalAgent, ExploitConfig};
use arena::game::{start_battle, teams, GameOptions, Player, TeamConfig};
use arena::learn::bc::match_rate;
use arena::learn::{bc_train, run_paradigm, BcConfig, Dataset, Hyperparameters, Paradigm, RunSpec, TeamSampler};
use arena::metagame::crossplay::head_to_head;
use arena::metagame::{alpha_rank, halfwidth, solve_zero_sum_nash, AlphaRankParams, PayoffMatrix};
use arena::replay::fuzz::fuzz_logs;
use arena::replay::{parse_log, write_log, PlayerInfo};

use common::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    check(elapsed < limit, format!("{detail}; {elapsed:.2?} (limit {limit:.0?})"))
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

fn reference_figures() -> Outcome {
    let want = [
        "246774528", "1922", "962", "3.419e12", "21", "1.937e58", "1.162e59", "5.166e20", "4.604e138", "90", "81", "4.85e16",
    ];
    let start = Instant::now();
    let got = key_figures();
    let elapsed = start.elapsed();
    let values: Vec<&str> = got.iter().map(|f| f.value.as_str()).collect();
    if values != want {
        return Err(format!("got {values:?}"));
    }
    within(elapsed, Duration::from_secs(1), format!("{} figures exact", want.len()))
}

fn compositions() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for t in 0..=30u64 {
        for p in 0..=4u64 {
            for c in 0..=10u64 {
                let want = dp_compositions(t as usize, p as usize, c as usize);
                if bounded_compositions(t, p, c) != BigUint::from(want) {
                    return Err(format!("t {t} p {p} c {c}: expected {want}"));
                }
                cases += 1;
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(10), format!("{cases} cases match DP"))
}

fn nash() -> Outcome {
    let start = Instant::now();
    let rps = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
    let s = solve_zero_sum_nash(&rps, 1e-9).map_err(|e| e.to_string())?;
    let dev = s.row.probs.iter().chain(&s.col).map(|p| (p - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    if dev >= 1e-6 || s.value.abs() >= 1e-9 {
        return Err(format!("RPS deviation {dev:.2e}, value {:.2e}", s.value));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_gap, mut worst_diff) = (0.0f64, 0.0f64);
    for t in 0..200 {
        let a = random_antisymmetric(5, &mut rng);
        let s = solve_zero_sum_nash(&a, 1e-9).map_err(|e| format!("trial {t}: {e}"))?;
        let v = support_enumeration_value(&a).ok_or(format!("trial {t}: oracle found no equilibrium"))?;
        worst_gap = worst_gap.max(s.gap);
        worst_diff = worst_diff.max((s.value - v).abs());
    }
    let detail = format!("RPS dev {dev:.1e}; 200 matrices: max gap {worst_gap:.1e}, max |v - oracle| {worst_diff:.1e}");
    if worst_gap > 1e-6 || worst_diff >= 1e-4 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(30), detail)
}

fn alpharank() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_res, mut worst_sum, mut worst_direct) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..100 {
        let m = PayoffMatrix::from_rows(ids(4), random_win_matrix(4, &mut rng)).map_err(|e| e.to_string())?;
        let r = alpha_rank(&m, AlphaRankParams::default()).map_err(|e| format!("trial {t}: {e}"))?;
        let pi = &r.stationary.probs;
        worst_res = worst_res.max(r.residual);
        worst_sum = worst_sum.max((pi.iter().sum::<f64>() - 1.0).abs());
        let direct = direct_stationary(&r.transition);
        worst_direct = worst_direct.max(pi.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let mut first = 0;
    for _ in 0..100 {
        let n = rng.random_range(3..=6);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut w = vec![vec![0.5; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let v = rng.random_range(0.55..0.95);
                w[order[a]][order[b]] = v;
                w[order[b]][order[a]] = 1.0 - v;
            }
        }
        let m = PayoffMatrix::from_rows(ids(n), w).map_err(|e| e.to_string())?;
        let r = alpha_rank(&m, AlphaRankParams::default()).map_err(|e| e.to_string())?;
        first += usize::from(r.ranking.entries[0].id == format!("s{}", order[0]));
    }
    check(
        worst_res < 1e-9 && worst_sum <= 1e-12 && worst_direct < 1e-9 && first == 100,
        format!(
            "max residual {worst_res:.1e}, max |Σπ-1| {worst_sum:.1e}, max |π - direct| {worst_direct:.1e}; dominant first {first}/100"
        ),
    )
}

fn gradients() -> Outcome {
    let worst = (0..5u64).map(|seed| ppo_gradient_check(seed, 10)).fold(0.0, f64::max);
    check(worst < 1e-4, format!("5 seeds x 10 batches, max relative error {worst:.2e}"))
}

fn confidence() -> Outcome {
    let (a, b) = (halfwidth(1000, 0.5), halfwidth(100, 0.5));
    check((a - 0.031).abs() <= 0.0005 && (b - 0.098).abs() <= 0.0005, format!("halfwidth(1000) {a:.4}, halfwidth(100) {b:.4}"))
}

fn engine_pair(seed: u64) -> [Arc<TeamConfig>; 2] {
    let t = teams::bundled();
    [Arc::new(t[seed as usize % 4].clone()), Arc::new(t[(seed as usize / 4) % 4].clone())]
}

fn engine_options(seed: u64) -> GameOptions {
    GameOptions { skip_team_preview: seed % 3 == 0, ..GameOptions::default() }
}

fn engine_game(seed: u64) -> GameRecord {
    play_game(&RandomPlayer, &RandomPlayer, engine_pair(seed), engine_options(seed), seed).expect("legal agents finish")
}

/// Re-step a record, checking every applied pair against the oracle and the
/// events against the record.
fn transitions_legal(r: &GameRecord) -> Result<(), String> {
    let mut s = start_battle(engine_pair(r.seed), engine_options(r.seed), arena::seeds::derive(r.seed, 0)).map_err(|e| e.to_string())?;
    let mut events = s.opening_events().to_vec();
    for (k, pair) in r.actions.iter().enumerate() {
        for p in Player::BOTH {
            let j = pair[p.index()];
            if !legality::oracle_pairs(&s, p).contains(&(j.a.0, j.b.0)) {
                return Err(format!("seed {} step {k}: {p:?} applied illegal {j:?}", r.seed));
            }
        }
        events.extend(s.step(pair[0], pair[1]).map_err(|e| format!("seed {} step {k}: {e}", r.seed))?.events);
    }
    check(s.is_terminal() && events == r.events, format!("seed {}: replay diverged", r.seed)).map(|_| ())
}

fn engine() -> Outcome {
    let records: Vec<GameRecord> = (0..10_000u64).into_par_iter().map(engine_game).collect();
    let unbalanced = records.iter().filter(|r| r.reward(Player::P1) + r.reward(Player::P2) != 0.0 || r.reason.is_none()).count();
    if unbalanced > 0 {
        return Err(format!("{unbalanced} battles not zero-sum"));
    }
    let illegal: Vec<String> = records.par_iter().filter_map(|r| transitions_legal(r).err()).collect();
    if let Some(e) = illegal.first() {
        return Err(format!("{} illegal or divergent battles, first: {e}", illegal.len()));
    }
    let run = |threads: usize| -> Vec<GameRecord> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("pool builds");
        pool.install(|| (0..400u64).into_par_iter().map(engine_game).collect())
    };
    let (one, eight) = (run(1), run(8));
    let same = one.iter().zip(&eight).all(|(a, b)| a.events == b.events && a.actions == b.actions);
    if !same {
        return Err("event lists differ between 1 and 8 threads".into());
    }
    let nodes = legality::two_battler_trees(21);
    let steps: usize = records.iter().map(|r| r.actions.len()).sum();
    Ok(format!(
        "10000 battles zero-sum, {steps} transitions oracle-legal, 400 battles identical on 1/8 threads, {nodes} depth-3 tree nodes match the oracle"
    ))
}

fn battle_log(seed: u64) -> (GameRecord, String) {
    let pair = engine_pair(seed);
    let opts = GameOptions { skip_team_preview: seed % 5 == 0, ..GameOptions::default() };
    let sh = SimpleHeuristicsPlayer::default();
    let agents: [&dyn Policy; 3] = [&RandomPlayer, &MaxBasePowerPlayer, &sh];
    let (a, b) = (agents[seed as usize % 3], agents[(seed as usize / 3) % 3]);
    let rec = play_game(a, b, pair.clone(), opts.clone(), seed).expect("legal agents finish");
    let players = [PlayerInfo::new(a.name(), Some(1000 + seed as u32)), PlayerInfo::new(b.name(), None)];
    let text = write_log(&rec, &pair, &opts, &players, true).expect("record serializes");
    (rec, text)
}

fn replay() -> Outcome {
    let logs: Vec<(GameRecord, String)> = (0..500u64).into_par_iter().map(battle_log).collect();
    let mismatched = logs
        .iter()
        .filter(|(rec, text)| match parse_log(text) {
            Ok(log) => log.actions != rec.actions || log.winner != rec.winner || log.turns != rec.turns,
            Err(_) => true,
        })
        .count();
    if mismatched > 0 {
        return Err(format!("{mismatched}/500 logs failed the round trip"));
    }
    let texts: Vec<String> = logs.into_iter().map(|l| l.1).collect();
    let report = fuzz_logs(&texts, 0.05, 1, 5);
    check(
        report.all_diagnosed(),
        format!(
            "500/500 exact round trips; fuzz at 5%: {} cases, {} crashes, {} undetected, {} diagnosed",
            report.cases, report.crashes, report.undetected, report.diagnosed
        ),
    )
}

fn hyper(total: u64) -> Hyperparameters {
    Hyperparameters { learning_rate: 3e-4, total_timesteps: total, n_epochs: 4, ..Hyperparameters::default() }
}

fn learning() -> Outcome {
    let team = Arc::new(teams::bundled()[0].clone());
    let opts = GameOptions::default();
    let mut parts = Vec::new();
    let mut ok = true;

    let start = Instant::now();
    let out = run_paradigm(&RunSpec::new(Paradigm::Sp, vec![team.clone()], hyper(200_000), 0)).map_err(|e| e.to_string())?;
    let sp = NetworkPolicy::new(out.actor, "sp");
    let draw = |_| Ok([team.clone(), team.clone()]);
    let vs_random = head_to_head(&sp, &RandomPlayer, draw, 1000, 77, &opts).map_err(|e| e.to_string())? / 1000.0;
    let vs_mbp = head_to_head(&sp, &MaxBasePowerPlayer, draw, 1000, 78, &opts).map_err(|e| e.to_string())? / 1000.0;
    ok &= vs_random >= 0.9 && vs_mbp >= 0.6;
    parts.push(format!("SP vs random {vs_random:.3}, vs MBP {vs_mbp:.3} ({:.0?})", start.elapsed()));

    let start = Instant::now();
    let ts = TeamSampler::new(vec![team.clone()], opts.clone());
    let teacher = SimpleHeuristicsPlayer::default();
    let train = Dataset::from_games(&teacher, &teacher, &ts, 200, 1, true).map_err(|e| e.to_string())?;
    let held = Dataset::from_games(&teacher, &teacher, &ts, 50, 2, true).map_err(|e| e.to_string())?;
    let cfg = BcConfig { epochs: 8, ..BcConfig::default() };
    let (net, _) = bc_train(&train, Network::init(Arch::actor(1, 32, 64), 0), &cfg).map_err(|e| e.to_string())?;
    let held_match = match_rate(&net, &held.samples).map_err(|e| e.to_string())?;
    ok &= held_match >= 0.9;
    parts.push(format!("BC held-out match {held_match:.3} ({:.0?})", start.elapsed()));

    let start = Instant::now();
    let cfg = ExploitConfig {
        hyper: Hyperparameters { learning_rate: 3e-4, n_epochs: 4, ..Hyperparameters::default() },
        updates: 50,
        eval_every: 50,
        eval_games: 1000,
        ..ExploitConfig::default()
    };
    let curve = exploitability(Arc::new(RandomPlayer), &[team], None, &cfg).map_err(|e| e.to_string())?;
    let last = curve.points.last().map_or(0.0, |p| p.1);
    ok &= last >= 0.95;
    parts.push(format!("exploiter vs random {last:.3} ({:.0?})", start.elapsed()));
    check(ok, parts.join("; "))
}

fn trained(teams: &[Arc<TeamConfig>]) -> Result<EvalAgent, String> {
    let out = run_paradigm(&RunSpec::new(Paradigm::Sp, teams.to_vec(), hyper(200_000), 0)).map_err(|e| e.to_string())?;
    let id = format!("sp-{}team", teams.len());
    let policy: Arc<dyn Policy> = Arc::new(NetworkPolicy::new(out.actor, id.clone()));
    Ok(EvalAgent {
        info: AgentInfo { id, paradigm: "sp".into(), team_set_size: teams.len(), seed: 0 },
        policy,
        train_teams: teams.to_vec(),
    })
}

fn protocols() -> Outcome {
    let pool: Vec<Arc<TeamConfig>> = teams::pool(8, 0).into_iter().map(Arc::new).collect();
    let one = trained(&pool[..1])?;
    let four = trained(&pool[..4])?;
    let eight = trained(&pool[..8])?;
    let opts = GameOptions::default();
    let perf = performance_test(&[one.clone(), four], 1000, 11, &opts).map_err(|e| e.to_string())?;
    let (p, ph) = perf.entry(0, 1);
    let seen: Vec<TeamConfig> = pool.iter().map(|t| (**t).clone()).collect();
    let held: Vec<Arc<TeamConfig>> = teams::held_out(24, 99, &seen).into_iter().map(Arc::new).collect();
    let gen = generalization_test(&[eight, one], &held, 1000, 12, &opts).map_err(|e| e.to_string())?;
    let (g, gh) = gen.entry(0, 1);
    check(
        p > 0.5 + ph && g > 0.5 + gh,
        format!("performance {{1}} vs {{1..4}}: {p:.3} ± {ph:.3}; generalization 8 vs 1 teams on 24 held-out: {g:.3} ± {gh:.3}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("reference figures exact", reference_figures),
        ("bounded compositions vs DP", compositions),
        ("Nash solver", nash),
        ("Alpha-Rank", alpharank),
        ("PPO gradient check", gradients),
        ("confidence halfwidths", confidence),
        ("engine invariants", engine),
        ("replay round trip and fuzz", replay),
        ("learning smoke", learning),
        ("evaluation protocols", protocols),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{:>2}] {name}: {detail} [{:.1?}]", i + 1, start.elapsed());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
