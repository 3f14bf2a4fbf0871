// temporary debug: print amplitude convergence over grids
use equiweyl::asymptotics::gutzwiller::{gutzwiller_terms, ManifoldGrid};
use equiweyl::dynamics::orbits::{find_relative_periodic_orbits, OrbitSearchConfig};
use equiweyl::group::ChiLabel;
use equiweyl::models;

fn main() {
    let model = models::aniso_ho_so2();
    let e = models::aniso_reference_energy();
    let cfg = OrbitSearchConfig::new(e, 2.0);
    let orbits = find_relative_periodic_orbits(&model, &cfg).unwrap();
    for g in [4usize, 8, 12, 16, 24] {
        let grid = ManifoldGrid { along_flow: g, along_group: g };
        let terms = gutzwiller_terms(&model, &ChiLabel::Weight(0), &orbits, (1.3, 1.5), e, grid).unwrap();
        let t = &terms[0];
        println!("grid {g:>2}: amp = {:+.8e} {:+.8e}i  |amp| = {:.8e}  qerr = {:.2e}", t.amplitude.re, t.amplitude.im, t.amplitude.norm(), t.quadrature_error);
    }
    // planar term too
    for g in [4usize, 8, 12, 16] {
        let grid = ManifoldGrid { along_flow: g, along_group: g };
        let terms = gutzwiller_terms(&model, &ChiLabel::Weight(0), &orbits, (0.4, 0.6), e, grid).unwrap();
        let t = &terms[0];
        println!("planar grid {g:>2}: amp = {:+.8e} {:+.8e}i  qerr = {:.2e}", t.amplitude.re, t.amplitude.im, t.quadrature_error);
    }
}
