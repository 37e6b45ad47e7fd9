//! Sleep-set reductions of an explicit language: the recursion, the set formula, and how
//! the choice of exploration order changes the representatives.
//!
//! `cargo run --example reductions`

use redver::independence::Relation;
use redver::oracle::{self, ExplorationOrder, FiniteLanguage, Indep};

fn main() -> redver::Result<()> {
    // every interleaving of `a` with `b c d`, letters 0 to 3
    let words = [[0, 1, 2, 3], [1, 0, 2, 3], [1, 2, 0, 3], [1, 2, 3, 0]];
    let l = FiniteLanguage::new(4, 4, words.iter().map(|w| w.to_vec()))?;
    let indep = Indep::Static(Relation::from_pairs(4, [(1, 0), (0, 1), (3, 0), (0, 3)]));
    for order in [vec![0, 1, 2, 3], vec![3, 2, 1, 0]] {
        let o = ExplorationOrder::uniform(order.clone())?;
        let rec = oracle::enumerate_reduction(&l, &indep, &o)?;
        let set = oracle::reduction_by_formula(&l, &indep, &o)?;
        assert_eq!(rec, set);
        println!("order {order:?}: kept {:?}", rec.words());
    }
    Ok(())
}
