//! Free and perturbed evolution of a Gaussian packet in one dimension.
//!
//! Prints the packet width against time for `|k|^a` with a = 1.5, 2, 3 and the norm drift
//! of the split-step propagator with a decaying potential switched on.

use anisoscat::field::{gaussian_packet, Lattice};
use anisoscat::potential::{build_static, PotentialSpec};
use anisoscat::admissibility::DecayIndex;
use anisoscat::propagate::{evolve_static, free_evolve, PropagationPlan, DEFAULT_DT};
use anisoscat::symbol::{BlockKind, BlockSpec, DispersionSymbol};

fn width(wf: &anisoscat::field::WaveFunction) -> f64 {
    let x = wf.lattice().x_axis(0);
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (xi, s) in x.iter().zip(wf.samples()) {
        let p = s.norm_sqr();
        m0 += p;
        m1 += p * xi;
        m2 += p * xi * xi;
    }
    (m2 / m0 - (m1 / m0).powi(2)).sqrt()
}

fn main() -> anisoscat::Result<()> {
    for a in [1.5, 2.0, 3.0] {
        let sym = DispersionSymbol::from_blocks(vec![BlockSpec::new(1, a, BlockKind::Positive)])?;
        let lat = Lattice::uniform(&sym, 8192, 800.0)?;
        let plan = PropagationPlan::new(&sym, &lat, DEFAULT_DT)?;
        let psi = gaussian_packet(&lat, &[0.0], &[0.5], &[2.0])?;
        print!("a = {a}: width");
        for t in [0.0, 5.0, 10.0, 20.0] {
            print!("  t={t}: {:.3}", width(&free_evolve(&plan, &psi, t)?));
        }
        println!();
    }

    let sym = DispersionSymbol::laplacian(1);
    let lat = Lattice::uniform(&sym, 2048, 400.0)?;
    let plan = PropagationPlan::new(&sym, &lat, DEFAULT_DT)?;
    let v = build_static(&lat, &PotentialSpec::aniso(0.5, DecayIndex::parse(&["1"])?))?;
    let psi = gaussian_packet(&lat, &[-40.0], &[1.0], &[4.0])?;
    let out = evolve_static(&plan, &v.values, &psi, 40.0)?;
    println!("with potential: norm drift {:.3e}", (out.norm() - psi.norm()).abs());
    Ok(())
}
