// temporary debug: density profile along the stabilizer coordinate
use equiweyl::asymptotics::gutzwiller::debug_density_at_axis_node;
use equiweyl::dynamics::orbits::{find_relative_periodic_orbits, OrbitSearchConfig};
use equiweyl::models;

fn main() {
    let model = models::aniso_ho_so2();
    let e = models::aniso_reference_energy();
    let cfg = OrbitSearchConfig::new(e, 2.0);
    let orbits = find_relative_periodic_orbits(&model, &cfg).unwrap();
    let axis = &orbits[1];
    for it in 0..16 {
        let theta_tilde = it as f64 / 16.0;
        match debug_density_at_axis_node(&model, axis, theta_tilde, e) {
            Ok(d) => println!("theta_tilde {theta_tilde:.4}: density = {:+.6e} {:+.6e}i |d| = {:.6e}", d.re, d.im, d.norm()),
            Err(err) => println!("theta_tilde {theta_tilde:.4}: ERROR {err}"),
        }
    }
}
