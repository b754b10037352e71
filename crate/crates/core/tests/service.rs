use std::net::TcpListener;
use std::sync::Arc;

use arena::agents::{MaxBasePowerPlayer, RandomPlayer};
use arena::game::teams;
use arena::replay::parse_log;
use arena::service::server::{spawn, SessionFactory};
use arena::service::{play_remote, ServerMessage, Session, SessionConfig};

#[test]
fn scripted_max_power_client_beats_random_agent_over_websocket() {
    let dir = tempfile::tempdir().unwrap();
    let t = teams::bundled();
    let mut cfg = SessionConfig::new(Arc::new(t[0].clone()), Arc::new(t[0].clone()));
    cfg.seed = 5;
    cfg.transcript_dir = Some(dir.path().to_path_buf());
    let factory: SessionFactory = Arc::new(move |token| Session::new(cfg.clone(), Arc::new(RandomPlayer), token));
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let server = spawn(listener, factory, 1, Some(1)).unwrap();
    let url = format!("ws://{}", server.addr);
    let out = play_remote(&url, &MaxBasePowerPlayer, "mbp", 1, 3).unwrap();
    server.join().unwrap();

    assert_eq!(out.games, 5);
    assert!(out.wins >= 4, "client won {} of 5", out.wins);
    assert_eq!(out.errors, 0);
    assert!(matches!(out.transcript[0], ServerMessage::Hello { games: 5, .. }));
    let logs: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(logs.len(), 5);
    for p in logs {
        parse_log(&std::fs::read_to_string(p).unwrap()).unwrap();
    }
}

#[test]
fn dropped_client_resumes_by_token() {
    use arena::service::{ClientMessage, Wire};
    use tungstenite::{connect, Message};

    let t = teams::bundled();
    let cfg = SessionConfig::new(Arc::new(t[0].clone()), Arc::new(t[1].clone()));
    let factory: SessionFactory = Arc::new(move |token| Session::new(cfg.clone(), Arc::new(RandomPlayer), token));
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let server = spawn(listener, factory, 2, None).unwrap();
    let url = format!("ws://{}", server.addr);

    let read = |ws: &mut tungstenite::WebSocket<_>| -> ServerMessage {
        loop {
            if let Message::Text(t) = ws.read().unwrap() {
                return arena::service::protocol::parse_server(&t).unwrap();
            }
        }
    };
    let (mut ws, _) = connect(&url).unwrap();
    ws.send(Message::text(Wire::new(ClientMessage::Hello { token: None, name: None }).to_json())).unwrap();
    let ServerMessage::Hello { session, .. } = read(&mut ws) else { panic!("expected hello") };
    let first_request = loop {
        if let m @ ServerMessage::Request { .. } = read(&mut ws) {
            break m;
        }
    };
    drop(ws);

    let (mut ws, _) = connect(&url).unwrap();
    ws.send(Message::text(Wire::new(ClientMessage::Hello { token: Some(session), name: None }).to_json())).unwrap();
    assert!(matches!(read(&mut ws), ServerMessage::Hello { resumed: true, .. }));
    assert!(matches!(read(&mut ws), ServerMessage::State { .. }));
    assert_eq!(read(&mut ws), first_request);
    drop(ws);

    let (mut ws, _) = connect(&url).unwrap();
    ws.send(Message::text(Wire::new(ClientMessage::Hello { token: Some("nope".into()), name: None }).to_json())).unwrap();
    assert!(matches!(read(&mut ws), ServerMessage::Error { code: arena::service::ErrorCode::UnknownSession, .. }));
}

#[test]
fn shipped_fixtures_match_the_server_and_parse() {
    use arena::service::protocol::{parse_client, parse_server};
    use arena::service::{fixture_transcripts, transcript_jsonl};
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/fixtures/match");
    for (name, lines) in fixture_transcripts() {
        let shipped = std::fs::read_to_string(dir.join(format!("{name}.jsonl"))).unwrap();
        assert_eq!(shipped, transcript_jsonl(&lines), "{name}.jsonl is stale; rerun the match_fixtures example");
        for l in &lines {
            let text = l.message.to_string();
            match l.from.as_str() {
                "server" => {
                    parse_server(&text).unwrap();
                }
                "client" if name == "session" => {
                    parse_client(&text).unwrap();
                }
                "client" => {}
                other => panic!("unknown sender {other}"),
            }
        }
    }
}
