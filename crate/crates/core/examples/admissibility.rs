//! Exact admissibility classification of a two-block symbol.
//!
//! Run with `cargo run --example admissibility`.

use anisoscat::admissibility::{classify, DecayIndex, SetName};
use anisoscat::rational;
use anisoscat::symbol::{BlockKind, BlockSpec, DispersionSymbol};

fn main() -> anisoscat::Result<()> {
    let sym = DispersionSymbol::from_blocks(vec![
        BlockSpec::new(2, 2.0, BlockKind::Positive),
        BlockSpec::new(1, 1.5, BlockKind::Negative),
    ])?;

    for eps in [["1", "3/5"], ["1/2", "1/2"], ["3/10", "2"]] {
        let eps = DecayIndex::parse(&eps)?;
        let report = classify(&sym, &eps, Some(&rational::q(3, 2)))?;
        println!("{}", report.render());
        let short: Vec<String> = [SetName::EPlus, SetName::EMinus, SetName::EO, SetName::KPlus]
            .iter()
            .map(|s| format!("{s}={:?}", report.verdict(*s)))
            .collect();
        println!("summary: {}\n", short.join("  "));
    }
    Ok(())
}
