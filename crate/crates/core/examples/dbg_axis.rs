// temporary debug: density along the axis critical manifold
use equiweyl::asymptotics::phase::{det_star, phase_value};
use equiweyl::dynamics::orbits::{find_relative_periodic_orbits, GroupCoord, OrbitSearchConfig};
use equiweyl::models;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn main() {
    let model = models::aniso_ho_so2();
    let e = models::aniso_reference_energy();
    let cfg = OrbitSearchConfig::new(e, 2.0);
    let orbits = find_relative_periodic_orbits(&model, &cfg).unwrap();
    let axis = &orbits[1];
    println!("axis z0 = {:?} t_gamma = {}", axis.z0.coords().as_slice(), axis.t_gamma);
    let t_star = axis.t_gamma;
    let n = model.n();

    for is in 0..6 {
        let s = is as f64 * t_star / 6.0;
        let zs = model.evolve_point(axis.z0.coords(), s).unwrap();
        // phase at the node with theta = 0.3 arbitrary (stabilizer direction)
        let v = phase_value(&model, &zs, t_star, GroupCoord::Torus(0.3), e).unwrap();
        // second det factor
        let (_, m) = model.evolve(&zs, t_star).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let to_c = |mm: nalgebra::DMatrixView<f64>| DMatrix::from_fn(mm.nrows(), mm.ncols(), |r, c| Complex64::new(mm[(r, c)], 0.0));
        let a = to_c(m.view((0, 0), (n, n)));
        let b = to_c(m.view((0, n), (n, n)));
        let c = to_c(m.view((n, 0), (n, n)));
        let dd = to_c(m.view((n, n), (n, n)));
        let mat = (&a + &b * i - (&c + &dd * i) * i) / i;
        let eigs = mat.clone().schur().unpack().1.diagonal().into_owned();
        let amp = det_star(&mat);
        println!("s={s:.3}: phase at node = {:+.3e}{:+.3e}i  eigs(A+iB-i(C+iD))/i = {:?}  det_star = {:?}",
            v.re, v.im, eigs.as_slice(), amp.map(|x| (x.re, x.im)));
    }
}
