//! Weighted time integrals `int (1+|t|)^{-2 gamma} ||<x>^{-eps} e^{-itH_o} psi||^2 dt`.
//!
//! For `gamma + eps` large enough the ratio to `||psi||^2` settles as the horizon doubles.

use anisoscat::field::{gaussian_packet, Lattice, WaveFunction};
use anisoscat::propagate::{PropagationPlan, DEFAULT_DT};
use anisoscat::scatter::smoothness_integral;
use anisoscat::symbol::DispersionSymbol;

fn main() -> anisoscat::Result<()> {
    let sym = DispersionSymbol::laplacian(1);
    let lat = Lattice::uniform(&sym, 8192, 1600.0)?;
    let plan = PropagationPlan::new(&sym, &lat, DEFAULT_DT)?;
    let ensemble: Vec<WaveFunction> = [2.0, -2.5, 3.0, -3.5]
        .iter()
        .map(|&k| gaussian_packet(&lat, &[0.0], &[k], &[2.0]))
        .collect::<anisoscat::Result<_>>()?;
    for gamma in [0.2, 0.4] {
        let r = smoothness_integral(&plan, &[0.4], gamma, &ensemble, 64.0)?;
        let line: Vec<String> = r
            .checkpoints
            .iter()
            .zip(&r.ratios)
            .map(|(t, v)| format!("T={t}: {v:.4}"))
            .collect();
        println!("gamma = {gamma}: {}", line.join("  "));
    }
    Ok(())
}
