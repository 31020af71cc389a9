//! Regenerate the bundled datasets: `cargo run --example gen_fixtures -- fixtures`.

use std::fs;
use std::path::PathBuf;

use abduce_core::qa::{templates, Example};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn jsonl(examples: &[Example]) -> String {
    examples.iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect()
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("birds1.jsonl"), jsonl(&templates::birds(40, &mut ChaCha8Rng::seed_from_u64(1))))?;
    fs::write(dir.join("electricity1.jsonl"), jsonl(&templates::electricity(40, 3, &mut ChaCha8Rng::seed_from_u64(1))))?;
    Ok(())
}
