//! Runs the refinement loop on a program in every reduction mode.
//!
//! `cargo run --release --example verify [file.imp]`

use std::path::PathBuf;
use std::time::Duration;

use redver::cegar::{self, Options};
use redver::proofcheck::Mode;

fn main() -> redver::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/fig6.imp"));
    let p = redver::frontend::load_file(&path)?;
    for mode in Mode::ALL {
        let opts = Options { timeout: Duration::from_secs(30), ..Options::default() }.with_mode(mode);
        let o = cegar::verify(&p, &opts)?;
        print!("{}", redver::cli::render_stats_text(&o));
        if let cegar::Verdict::Safe { proof, .. } = &o.verdict {
            for t in proof {
                println!("    {t}");
            }
        }
    }
    Ok(())
}
