//! Time-periodic potential: one-period monodromy and the wave operator along integer times.

use anisoscat::admissibility::DecayIndex;
use anisoscat::field::{gaussian_packet, Lattice};
use anisoscat::potential::{build_static, PotentialSpec, TimeDependentPotential, TimeEnvelope};
use anisoscat::propagate::{monodromy_apply, PropagationPlan, DEFAULT_DT};
use anisoscat::scatter::monodromy_wave_operator;
use anisoscat::symbol::DispersionSymbol;

fn main() -> anisoscat::Result<()> {
    let sym = DispersionSymbol::laplacian(1);
    let lat = Lattice::uniform(&sym, 2048, 400.0)?;
    let plan = PropagationPlan::new(&sym, &lat, DEFAULT_DT)?;
    let shape = build_static(&lat, &PotentialSpec::aniso(0.5, DecayIndex::parse(&["2"])?))?;
    let envelope = TimeEnvelope::Periodic {
        a0: 1.0,
        cos: vec![0.5],
        sin: vec![],
    };
    let pot = TimeDependentPotential::new(shape, envelope)?;
    let psi = gaussian_packet(&lat, &[0.0], &[1.5], &[4.0])?;

    let m = monodromy_apply(&plan, &pot, &psi)?;
    println!("| ||M psi|| - ||psi|| | = {:.3e}", (m.norm() - psi.norm()).abs());
    let w = monodromy_wave_operator(&plan, &pot, &psi, &[4, 8, 16, 32])?;
    for (n, inc) in w.horizons.iter().skip(1).zip(&w.increments) {
        println!("n = {n}: increment {inc:.3e}");
    }
    Ok(())
}
