//! Maximal contextual and static independence of a program, before and after the
//! soundness filter.
//!
//! `cargo run --example independence`

use std::path::PathBuf;

use redver::independence::{dump_static, filter_sound_static, maximal_contextual, maximal_static, soundness};
use redver::logic::smt::SolverConfig;
use redver::logic::Logic;

fn main() -> redver::Result<()> {
    let p = redver::frontend::load_file(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/fig6.imp"))?;
    let a = &p.alphabet;
    let dfa = &p.automaton.dfa;
    let ci = maximal_contextual(dfa);
    let st = maximal_static(dfa, &ci);
    let logic = Logic::new(a, SolverConfig::from_env());
    let sound = filter_sound_static(&logic, &st)?;
    let name = |i: usize| a.name(i);
    println!("language-preserving static pairs: {}", st.len());
    print!("{}", dump_static(&st, &name));
    println!("semantically sound: {}", sound.len());
    print!("{}", dump_static(&sound, &name));
    for (x, y) in st.pairs().filter(|&(x, y)| !sound.contains(x, y)) {
        println!("{} / {}: {:?}", name(x), name(y), soundness(&logic, a.program_letters, x, y, &[])?);
    }
    Ok(())
}
