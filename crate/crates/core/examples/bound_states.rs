//! Negative eigenvalues of `-d^2/dx^2 - c <x>^{-eps}` and their accumulation at zero.
//!
//! Slowly decaying wells (eps < 2) keep producing eigenvalues near zero as the box grows;
//! fast decay leaves a fixed finite count.

use anisoscat::field::Lattice;
use anisoscat::propagate::{PropagationPlan, DEFAULT_DT};
use anisoscat::spectrum::{accumulation_study, discrete_spectrum, SolverOptions};
use anisoscat::symbol::DispersionSymbol;

fn main() -> anisoscat::Result<()> {
    let sym = DispersionSymbol::laplacian(1);
    let lat = Lattice::uniform(&sym, 512, 102.4)?;
    let plan = PropagationPlan::new(&sym, &lat, DEFAULT_DT)?;
    let v = lat.position_values(|x| -5.0 * (1.0 + x[0] * x[0]).powf(-0.5));
    let rep = discrete_spectrum(&plan, &v, (-6.0, 0.0), 64, &SolverOptions::default())?;
    println!("{} eigenvalues below 0; lowest {:.6}", rep.eigenvalues.len(), rep.eigenvalues[0]);
    println!("dyadic shells {:?}", rep.shells);

    let ladder = [(128, 25.6), (256, 51.2), (512, 102.4)];
    let study = accumulation_study(&sym, &[1.0, 3.0], 5.0, &ladder, 0.25, &SolverOptions::default())?;
    for row in &study.rows {
        println!("eps = {}, L = {}: {} in (-0.25, 0)", row.eps, row.half_length, row.count);
    }
    for (eps, v) in &study.verdicts {
        println!("eps = {eps}: {v}");
    }
    Ok(())
}
