//! Scripted client: plays a served session with any policy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tungstenite::{connect, Message};

use super::protocol::{parse_server, ClientMessage, ServerMessage, Wire};
use super::ServiceError;
use crate::agents::Policy;
use crate::game::{JointAction, Observation, ObservationStack, Player, PlayerView, SlotAction};

#[derive(Clone, Debug, Default)]
pub struct RemoteOutcome {
    pub games: u32,
    pub wins: u32,
    pub losses: u32,
    pub draws: u32,
    /// `error` messages received.
    pub errors: usize,
    /// Every server message in arrival order.
    pub transcript: Vec<ServerMessage>,
}

/// Connect to `url`, play the whole session with `policy`, and tally results.
pub fn play_remote(url: &str, policy: &dyn Policy, name: &str, n_frames: usize, seed: u64) -> Result<RemoteOutcome, ServiceError> {
    let (mut ws, _) = connect(url)?;
    let hello = ClientMessage::Hello { token: None, name: Some(name.to_string()) };
    ws.send(Message::text(Wire::new(hello).to_json()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RemoteOutcome::default();
    let mut stack = ObservationStack::new(n_frames);
    let mut view: Option<(Player, PlayerView)> = None;
    loop {
        let text = match ws.read() {
            Ok(Message::Text(t)) => t.to_string(),
            Ok(Message::Close(_)) | Err(tungstenite::Error::ConnectionClosed) => break,
            Ok(_) => continue,
            Err(e) => return Err(e.into()),
        };
        let msg = parse_server(&text)?;
        out.transcript.push(msg.clone());
        match msg {
            ServerMessage::State { seat, snapshot, .. } => view = Some((seat, snapshot)),
            ServerMessage::Request { game, seq, phase, masks, legal, .. } => {
                let (seat, v) = view.clone().ok_or_else(|| ServiceError::Protocol("request before state".into()))?;
                stack.push(&v);
                let obs = Observation {
                    player: seat,
                    phase,
                    view: v,
                    tensor: stack.tensor(),
                    masks,
                    legal: legal.iter().map(|p| JointAction::new(SlotAction(p[0]), SlotAction(p[1]))).collect(),
                };
                let a = policy.act(&obs, &mut rng);
                let choose = ClientMessage::Choose { game, seq, actions: [a.a.0, a.b.0] };
                ws.send(Message::text(Wire::new(choose).to_json()))?;
            }
            ServerMessage::End { winner, seat, session_over, .. } => {
                out.games += 1;
                match winner {
                    Some(w) if w == seat => out.wins += 1,
                    Some(_) => out.losses += 1,
                    None => out.draws += 1,
                }
                stack = ObservationStack::new(n_frames);
                if session_over {
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    break;
                }
            }
            ServerMessage::Error { .. } => out.errors += 1,
            _ => {}
        }
    }
    Ok(out)
}
