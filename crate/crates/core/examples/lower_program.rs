//! Parses a program, lowers it to its product automaton and prints the alphabet.
//!
//! `cargo run --example lower_program [file.imp]`

use std::path::PathBuf;

fn main() -> redver::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/fig6.imp"));
    let p = redver::frontend::load_file(&path)?;
    let a = &p.alphabet;
    println!("{}: {} threads, {} program letters, {} markers", p.name, a.threads, a.program_letters, a.len() - a.program_letters);
    for id in 0..a.program_letters {
        let thread = a.thread(id).map_or("-".to_string(), |t| t.to_string());
        println!("  {id:>2}  thread {thread}  {}", a.statements[id].display);
    }
    let aut = &p.automaton;
    println!("product: {} states ({} live), sink {}", aut.dfa.states, aut.live_states(), aut.sink);
    println!("{}", aut.dfa.to_dot(&p.name, &|i| a.name(i), Some(aut.sink)));
    Ok(())
}
