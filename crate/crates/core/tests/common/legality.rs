//! Legality oracle: slot and joint legality derived from the rules, with no
//! use of the engine's mask code.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arena::game::data::MoveTarget;
use arena::game::{start_position, teams, BattleState, GameOptions, JointAction, MonRef, Phase, Player, Ruleset, SlotAction, TeamConfig, NUM_ACTIONS};

/// Decoded slot action, written independently of the engine's codec.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Act {
    Pass,
    Switch(u8),
    Move { slot: usize, gimmick: i16, target: i16 },
}

pub fn decode(i: i16) -> Option<Act> {
    match i {
        0 => Some(Act::Pass),
        1..=6 => Some(Act::Switch(i as u8 - 1)),
        7..=106 => {
            let k = i - 7;
            Some(Act::Move { slot: ((k % 20) / 5) as usize, gimmick: k / 20, target: k % 5 })
        }
        _ => None,
    }
}

/// Legal indices for one slot, from the rules.
pub fn oracle_slot(state: &BattleState, player: Player, slot: usize) -> BTreeSet<i16> {
    let side = state.side(player);
    let foe = state.side(player.other());
    let bench: Vec<u8> =
        side.chosen.iter().copied().filter(|m| !side.active.contains(&Some(*m)) && !side.mons[*m as usize].fainted).collect();
    let mut out = BTreeSet::new();
    match state.phase() {
        Phase::Terminal => {}
        Phase::TeamPreview1 | Phase::TeamPreview2 => {
            for m in 0..6u8 {
                if !side.chosen.contains(&m) {
                    out.insert(m as i16 + 1);
                }
            }
        }
        Phase::Turn => {
            let empty: Vec<usize> = (0..2).filter(|&s| side.active[s].is_none()).collect();
            let someone_replaces = [player, player.other()].iter().any(|&p| {
                let s = state.side(p);
                let b = s.chosen.iter().filter(|m| !s.active.contains(&Some(**m)) && !s.mons[**m as usize].fainted).count();
                b > 0 && s.active.iter().any(|a| a.is_none())
            });
            if someone_replaces {
                if side.active[slot].is_some() || bench.is_empty() {
                    out.insert(0);
                } else {
                    out.extend(bench.iter().map(|&m| m as i16 + 1));
                    if bench.len() < empty.len() {
                        out.insert(0);
                    }
                }
                return out;
            }
            let Some(member) = side.active[slot] else {
                out.insert(0);
                return out;
            };
            out.extend(bench.iter().map(|&m| m as i16 + 1));
            let rs = Ruleset::bundled();
            let cfg = state.team(player).member(member as usize);
            for (k, &id) in cfg.moves.iter().enumerate() {
                let targets: Vec<i16> = match rs.move_data(id).target {
                    MoveTarget::Single => {
                        let mut t = Vec::new();
                        if side.active[1 - slot].is_some() {
                            t.push(1 - slot as i16);
                        }
                        for f in 0..2 {
                            if foe.active[f].is_some() {
                                t.push(3 + f as i16);
                            }
                        }
                        t
                    }
                    _ => vec![2],
                };
                for t in targets {
                    for g in [0i16, 4] {
                        if g == 4 && side.tera_used {
                            continue;
                        }
                        out.insert(7 + 20 * g + 5 * k as i16 + t);
                    }
                }
            }
        }
    }
    out
}

/// Every legal pair for `player`, from the rules.
pub fn oracle_pairs(state: &BattleState, player: Player) -> BTreeSet<(i16, i16)> {
    let a = oracle_slot(state, player, 0);
    let b = oracle_slot(state, player, 1);
    let side = state.side(player);
    let empty = (0..2).filter(|&s| side.active[s].is_none()).count();
    let bench =
        side.chosen.iter().filter(|m| !side.active.contains(&Some(**m)) && !side.mons[**m as usize].fainted).count();
    let replacing = state.phase() == Phase::Turn && empty > 0 && bench > 0;
    let mut out = BTreeSet::new();
    for &x in &a {
        for &y in &b {
            let (dx, dy) = (decode(x).unwrap(), decode(y).unwrap());
            if let (Act::Switch(p), Act::Switch(q)) = (dx, dy) {
                if p == q {
                    continue;
                }
            }
            if matches!(dx, Act::Move { gimmick: 4, .. }) && matches!(dy, Act::Move { gimmick: 4, .. }) {
                continue;
            }
            if replacing {
                let fills = [(0usize, dx), (1, dy)]
                    .iter()
                    .filter(|(s, d)| side.active[*s].is_none() && matches!(d, Act::Switch(_)))
                    .count();
                if fills != bench.min(empty) {
                    continue;
                }
            }
            out.insert((x, y));
        }
    }
    out
}

pub fn check_node(state: &BattleState) -> usize {
    let mut checked = 0;
    for player in Player::BOTH {
        let want = oracle_pairs(state, player);
        let got: BTreeSet<(i16, i16)> = state.legal_joint_actions(player).iter().map(|j| (j.a.0, j.b.0)).collect();
        assert_eq!(got, want, "{player:?} at turn {} phase {:?}", state.turn(), state.phase());
        for x in 0..NUM_ACTIONS as i16 {
            for y in 0..NUM_ACTIONS as i16 {
                let ja = JointAction::new(SlotAction(x), SlotAction(y));
                assert_eq!(state.joint_legal(player, ja), want.contains(&(x, y)), "{player:?} pair ({x}, {y})");
                checked += 1;
            }
        }
    }
    checked
}

/// Walk a depth-3 tree, branching on sampled legal pairs and probing that
/// oracle-illegal pairs are refused.
pub fn walk(state: &BattleState, depth: usize, rng: &mut ChaCha8Rng, nodes: &mut usize) {
    check_node(state);
    *nodes += 1;
    if depth == 0 || state.is_terminal() {
        return;
    }
    let l1 = state.legal_joint_actions(Player::P1);
    let l2 = state.legal_joint_actions(Player::P2);
    let illegal = JointAction::new(SlotAction(rng.random_range(0..NUM_ACTIONS as i16)), SlotAction(rng.random_range(0..NUM_ACTIONS as i16)));
    if !state.joint_legal(Player::P1, illegal) {
        let mut probe = state.clone();
        assert!(probe.step(illegal, l2[0]).is_err(), "illegal pair {illegal:?} accepted");
        assert_eq!(probe.turn(), state.turn(), "a refused step changed the state");
    }
    for _ in 0..3 {
        let mut child = state.clone();
        let a = *l1.choose(rng).unwrap();
        let b = *l2.choose(rng).unwrap();
        child.step(a, b).expect("legal pairs step");
        walk(&child, depth - 1, rng, nodes);
    }
}

/// Depth-3 trees from positions with two battlers per side (both active,
/// or one active and one in reserve). Returns the number of nodes checked.
pub fn two_battler_trees(seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = 0;
    for k in 0..6u64 {
        let t = teams::bundled();
        let teams: [Arc<TeamConfig>; 2] = [Arc::new(t[(k as usize) % 4].clone()), Arc::new(t[(k as usize + 1) % 4].clone())];
        // Leads 0,1 and back 2,3; knocking out the back pair leaves two battlers.
        let picks = [[0, 1, 2, 3], [1, 0, 3, 2]];
        let ko: Vec<MonRef> = [Player::P1, Player::P2]
            .iter()
            .flat_map(|&p| {
                let back = if p == Player::P1 { [2, 3] } else { [3, 2] };
                back.map(|m| MonRef { player: p, member: m })
            })
            .collect();
        let state = start_position(teams.clone(), GameOptions::default(), k, picks, &ko).unwrap();
        walk(&state, 3, &mut rng, &mut nodes);
        // One lead down leaves one active battler and one on the bench.
        let ko = [MonRef { player: Player::P1, member: 1 }, MonRef { player: Player::P1, member: 3 }, MonRef { player: Player::P2, member: 2 }, MonRef { player: Player::P2, member: 3 }];
        let state = start_position(teams, GameOptions::default(), k + 100, picks, &ko).unwrap();
        walk(&state, 3, &mut rng, &mut nodes);
    }
    nodes
}
