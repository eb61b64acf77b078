//! Wave operator `W_+ psi` by Cook's method for a short-range potential in one dimension.

use anisoscat::admissibility::DecayIndex;
use anisoscat::enss::Sign;
use anisoscat::field::{gaussian_packet, Lattice};
use anisoscat::potential::{build_static, PotentialSpec};
use anisoscat::propagate::{PropagationPlan, DEFAULT_DT};
use anisoscat::scatter::{cook_until_converged, scattering_apply, CookOptions};
use anisoscat::symbol::DispersionSymbol;

fn main() -> anisoscat::Result<()> {
    let sym = DispersionSymbol::laplacian(1);
    let lat = Lattice::uniform(&sym, 4096, 600.0)?;
    let plan = PropagationPlan::new(&sym, &lat, DEFAULT_DT)?;
    let v = build_static(&lat, &PotentialSpec::aniso(0.5, DecayIndex::parse(&["2"])?))?;
    let psi = gaussian_packet(&lat, &[0.0], &[2.5], &[8.0])?;

    let opts = CookOptions {
        tol: 1e-3,
        intertwining_tau: Some(1.0),
    };
    for sign in [Sign::Plus, Sign::Minus] {
        let r = cook_until_converged(&plan, &v.values, &psi, sign, 4.0, 32.0, None, &opts)?;
        println!(
            "W_{sign}: T = {}, tail {:.3e}, isometry defect {:.3e}, intertwining defect {:.3e}",
            r.horizon,
            r.tail,
            r.isometry_defect,
            r.intertwining_defect.unwrap_or(f64::NAN)
        );
    }
    let s = scattering_apply(&plan, &v.values, &psi, 32.0)?;
    println!("S psi: norm defect {:.3e}, <psi, S psi> = {:.4}", (s.norm() - psi.norm()).abs(), psi.inner(&s));
    Ok(())
}
