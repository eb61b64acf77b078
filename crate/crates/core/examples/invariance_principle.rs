//! Compares `e^{iT(f(H_o)+V)} e^{-iT f(H_o)}` with `e^{iTH} e^{-iTH_o}` on a packet
//! localized in an energy window where `f` is increasing.

use anisoscat::admissibility::DecayIndex;
use anisoscat::field::{gaussian_packet, Lattice};
use anisoscat::potential::{build_static, PotentialSpec};
use anisoscat::propagate::{PropagationPlan, SpectralFunction, DEFAULT_DT};
use anisoscat::scatter::invariance_compare;
use anisoscat::symbol::{DispersionSymbol, EnergyWindow};

fn main() -> anisoscat::Result<()> {
    let sym = DispersionSymbol::laplacian(1);
    let lat = Lattice::uniform(&sym, 4096, 700.0)?;
    let plan = PropagationPlan::new(&sym, &lat, DEFAULT_DT)?;
    let v = build_static(&lat, &PotentialSpec::aniso(0.2, DecayIndex::parse(&["41/20"])?))?;
    let psi = gaussian_packet(&lat, &[0.0], &[1.7], &[1.0 / 0.24])?;
    let window = EnergyWindow::new(1.0, 1.2, 4.5, 5.0)?;
    let f = SpectralFunction::Quarticpower { r: 0.25 };
    for t in [8.0, 16.0, 32.0] {
        let r = invariance_compare(&plan, f, &v.values, &psi, &window, t)?;
        println!("T = {t}: defect {:.4e} (min f' = {:.3})", r.defect, r.monotonicity.min_derivative);
    }
    Ok(())
}
