//! Outgoing/incoming split of a packet and the weighted decay of its outgoing part.
//!
//! The block map diagonalizes a single `|k|^a` block; `T^+ + T^- = I` by construction,
//! and `||<x>^{-eps} e^{-ith} T^+ psi||` decays like a power of `t`.

use anisoscat::enss::{build_block_map, decay_fit, dyadic_times, DecayOptions, Sign};
use anisoscat::field::{gaussian_packet, Lattice};
use anisoscat::symbol::{BlockKind, BlockSpec, DispersionSymbol};

fn main() -> anisoscat::Result<()> {
    let sym = DispersionSymbol::from_blocks(vec![BlockSpec::new(1, 2.0, BlockKind::Positive)])?;
    let lat = Lattice::uniform(&sym, 2048, 400.0)?;
    let map = build_block_map(&sym, &lat, 0)?;
    println!("sheets {:?}, kernel norm {:.6}", map.sheet_sizes(), map.kernel_norm());

    let psi = gaussian_packet(&lat, &[0.0], &[1.0], &[3.0])?;
    let plus = map.apply_t(&psi, Sign::Plus)?;
    let minus = map.apply_t(&psi, Sign::Minus)?;
    let mut sum = plus.clone();
    sum.axpy(1.0.into(), &minus);
    println!(
        "|T+ psi| = {:.4}, |T- psi| = {:.4}, |T+ psi + T- psi - psi| = {:.2e}",
        plus.norm(),
        minus.norm(),
        sum.distance(&psi)
    );

    for eps in [0.4, 1.0] {
        let fit = decay_fit(&sym, &map, eps, Sign::Plus, None, &dyadic_times(2.0, 6), &DecayOptions::default())?;
        println!("eps = {eps}: slope {:.3}, target {:.3}", fit.slope, fit.target);
    }
    Ok(())
}
