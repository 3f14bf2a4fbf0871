// temporary debug: transversal Hessian eigenvalues at axis manifold nodes
use equiweyl::asymptotics::phase::phase_value;
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
    let t_star = axis.t_gamma;
    let d = 6;
    let dim = 8;

    for (label, theta_tilde) in [("th=0.0", 0.0f64), ("th=0.21", 0.21)] {
        let zs = axis.z0.coords().clone();
        let eval = |u: &DVector<f64>| -> Complex64 {
            let zz = u.rows(0, d).into_owned();
            let tt = u[d];
            phase_value(&model, &zz, tt, GroupCoord::Torus(2.0 * std::f64::consts::PI * u[d + 1]), e).unwrap()
        };
        let mut u0 = DVector::zeros(dim);
        u0.rows_mut(0, d).copy_from(&zs);
        u0[d] = t_star;
        u0[d + 1] = theta_tilde;
        let h = 1e-4;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        let f0 = eval(&u0);
        for i in 0..dim {
            let mut up = u0.clone(); up[i] += h;
            let mut um = u0.clone(); um[i] -= h;
            m[(i, i)] = (eval(&up) - f0 * 2.0 + eval(&um)) / Complex64::new(h * h, 0.0);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let mut upp = u0.clone(); upp[i] += h; upp[j] += h;
                let mut upm = u0.clone(); upm[i] += h; upm[j] -= h;
                let mut ump = u0.clone(); ump[i] -= h; ump[j] += h;
                let mut umm = u0.clone(); umm[i] -= h; umm[j] -= h;
                let v = (eval(&upp) - eval(&upm) - eval(&ump) + eval(&umm)) / Complex64::new(4.0 * h * h, 0.0);
                m[(i, j)] = v; m[(j, i)] = v;
            }
        }
        // tangents: flow dir and theta-tilde dir
        let zdot = model.vector_field(&zs);
        let mut t1 = DVector::zeros(dim); t1.rows_mut(0, d).copy_from(&zdot);
        let t1 = t1.clone() / t1.norm();
        let mut t2 = DVector::zeros(dim); t2[d + 1] = 1.0;
        let mut proj = DMatrix::<f64>::identity(dim, dim);
        proj -= &t1 * t1.transpose();
        proj -= &t2 * t2.transpose();
        let svd = proj.svd(true, false);
        let u = svd.u.as_ref().unwrap();
        let mut ncols = Vec::new();
        for j in 0..dim {
            if svd.singular_values[j] > 0.5 { ncols.push(u.column(j).into_owned()); }
        }
        let nb = DMatrix::from_columns(&ncols);
        let nbc = DMatrix::from_fn(nb.nrows(), nb.ncols(), |r, c| Complex64::new(nb[(r, c)], 0.0));
        let hn = nbc.adjoint() * &m * &nbc;
        let hn = (&hn + hn.transpose()) * Complex64::new(0.5, 0.0);
        let i_c = Complex64::new(0.0, 1.0);
        let hni = hn.clone() / i_c;
        let eigs = hni.clone().schur().unpack().1.diagonal().into_owned();
        println!("{label}: eigs(H_N/i):");
        for ev in eigs.iter() { println!("   {:+.6e} {:+.6e}i", ev.re, ev.im); }
    }
}
