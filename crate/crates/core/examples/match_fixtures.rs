//! Regenerate the match-protocol fixtures under `docs/fixtures/match`.

use std::path::PathBuf;

use arena::service::{fixture_transcripts, transcript_jsonl};

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/fixtures/match")
    });
    std::fs::create_dir_all(&dir)?;
    for (name, lines) in fixture_transcripts() {
        let path = dir.join(format!("{name}.jsonl"));
        std::fs::write(&path, transcript_jsonl(&lines))?;
        println!("{} ({} messages)", path.display(), lines.len());
    }
    Ok(())
}
