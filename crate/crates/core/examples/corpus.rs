//! Verifies the bundled benchmark directories as corpora and prints the tables.
//!
//! `cargo run --release --example corpus`

use std::path::PathBuf;
use std::time::Duration;

use redver::cegar::Options;

fn main() -> redver::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks");
    let opts = Options { timeout: Duration::from_secs(60), ..Options::default() };
    for dir in [root.clone(), root.join("unsafe")] {
        println!("{}", dir.display());
        print!("{}", redver::cli::run_corpus(&dir, &opts)?.to_text());
    }
    Ok(())
}
