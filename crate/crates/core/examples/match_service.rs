//! Host a five-game session on a local port and play it with a scripted bot
//! over WebSocket.

use std::net::TcpListener;
use std::sync::Arc;

use arena::agents::{MaxBasePowerPlayer, SimpleHeuristicsPlayer};
use arena::game::teams;
use arena::service::server::{spawn, SessionFactory};
use arena::service::{play_remote, Session, SessionConfig};

fn main() {
    let t = teams::bundled();
    let cfg = SessionConfig::new(Arc::new(t[0].clone()), Arc::new(t[1].clone()));
    let factory: SessionFactory =
        Arc::new(move |token| Session::new(cfg.clone(), Arc::new(SimpleHeuristicsPlayer::default()), token));
    let server = spawn(TcpListener::bind("127.0.0.1:0").expect("binds"), factory, 1, Some(1)).expect("spawns");
    let url = format!("ws://{}", server.addr);
    let out = play_remote(&url, &MaxBasePowerPlayer, "bot", 1, 9).expect("session completes");
    server.join().expect("server stops");
    println!("{url}: {} games, bot won {}, lost {}, {} messages", out.games, out.wins, out.losses, out.transcript.len());
}
