//! The complex phase of the spectral-distribution integral, its coherent-state
//! width matrix, and regularized determinant powers.
//!
//! The phase at (z, t, g) combines the real line integral along the trajectory
//! with a positive-semidefinite imaginary part built from the squeezing matrix
//! W_t of the linearized flow; its critical set consists exactly of the
//! relative periodic configurations on the zero level at energy E.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::orbits::GroupCoord;
use crate::dynamics::HamiltonianModel;
use crate::error::{EquiweylError, Result};
use crate::group::GroupKind;
use crate::quad;

/// Product of reciprocal square roots of the eigenvalues of a complex matrix,
/// every branch chosen with positive real part.
///
/// An eigenvalue on the negative real axis has both square roots purely
/// imaginary; that branch ambiguity is surfaced as an error.
pub fn det_star(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if m.nrows() == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if m.nrows() != m.ncols() {
        return Err(EquiweylError::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let schur = m
        .clone()
        .try_schur(1e-14, 10_000)
        .ok_or_else(|| EquiweylError::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut out = Complex64::new(1.0, 0.0);
    let scale = t.norm().max(1e-300);
    for lam in t.diagonal().iter() {
        if lam.re < 0.0 && lam.im.abs() <= 1e-12 * scale {
            return Err(EquiweylError::BranchAmbiguity {
                re: lam.re,
                im: lam.im,
            });
        }
        let s = lam.sqrt();
        // principal square root has nonnegative real part; the negative real
        // axis was excluded above
        out /= s;
    }
    Ok(out)
}

/// The evaluated complex phase with its ingredients.
#[derive(Debug, Clone)]
pub struct PhaseEvaluation {
    /// Real part of the phase.
    pub phi1: f64,
    /// Imaginary part; nonnegative up to roundoff.
    pub phi2: f64,
    pub value: Complex64,
    /// The n x n squeezing matrix W_t at (z, t).
    pub w_t: DMatrix<Complex64>,
    /// Central-difference gradient over (z, t, group angle).
    pub gradient: DVector<Complex64>,
}

/// Flow data needed by the phase: endpoint, linearization blocks, and the
/// line integral of <z_s, J zdot_s>.
struct PhaseFlowData {
    zt: DVector<f64>,
    m: DMatrix<f64>,
    path: f64,
}

fn phase_flow_data(model: &HamiltonianModel, z: &DVector<f64>, t: f64) -> Result<PhaseFlowData> {
    let n = model.n();
    let integrand = move |zs: &DVector<f64>, zdot: &DVector<f64>| -> f64 {
        // <z, J zdot> = x . xidot - xi . xdot
        let mut acc = 0.0;
        for i in 0..n {
            acc += zs[i] * zdot[n + i] - zs[n + i] * zdot[i];
        }
        acc
    };
    if model.has_flow_oracle() {
        let (zt, m) = model.evolve(z, t)?;
        let path = if t == 0.0 {
            0.0
        } else {
            quad::integrate(
                |s| {
                    let zs = model.evolve_point(z, s).expect("oracle flow");
                    let zdot = model.vector_field(&zs);
                    integrand(&zs, &zdot)
                },
                0.0,
                t,
                64,
            )
        };
        Ok(PhaseFlowData { zt, m, path })
    } else {
        let res = crate::dynamics::flow_with_functionals(
            model,
            &crate::dynamics::PhasePoint::from_vector(z.clone())?,
            t,
            1e-12,
            &[&integrand],
        )?;
        Ok(PhaseFlowData {
            zt: res.z_t.coords().clone(),
            path: res.accumulators[0],
            m: res.m_t,
        })
    }
}

/// The squeezing matrix W_t from the linearized-flow blocks at (z, t),
/// conjugated by the spatial part of g.
pub fn w_matrix(
    m_t: &DMatrix<f64>,
    g_spatial: &DMatrix<f64>,
    n: usize,
) -> Result<DMatrix<Complex64>> {
    let to_c = |m: nalgebra::DMatrixView<f64>| -> DMatrix<Complex64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| Complex64::new(m[(r, c)], 0.0))
    };
    let a = to_c(m_t.view((0, 0), (n, n)));
    let b = to_c(m_t.view((0, n), (n, n)));
    let c = to_c(m_t.view((n, 0), (n, n)));
    let d = to_c(m_t.view((n, n), (n, n)));
    let i = Complex64::new(0.0, 1.0);
    let apib = &a + &b * i;
    let apib_inv = apib.clone().try_inverse().ok_or_else(|| {
        EquiweylError::Caustic("A + iB is singular at this configuration".into())
    })?;
    let gamma = (&c + &d * i) * apib_inv;
    let gc = DMatrix::from_fn(n, n, |r, cc| Complex64::new(g_spatial[(r, cc)], 0.0));
    let gamma_g = &gc * gamma * gc.transpose();
    let id = DMatrix::from_diagonal_element(n, n, Complex64::new(1.0, 0.0));
    let inner = &id - gamma_g * i;
    let inner_inv = inner.try_inverse().ok_or_else(|| {
        EquiweylError::Caustic("1 - i g Gamma g^T is singular at this configuration".into())
    })?;
    Ok(inner_inv * Complex64::new(2.0, 0.0) - id)
}

/// Phase value at (z, t, g).
///
/// phi = (E - H(z)) t + <g^{-1} z, J z>/2 - (1/2) int_0^t <z_s - g^{-1} z, J zdot_s> ds
///       + (i/4) <(1 - What_t)(g z_t - z), (g z_t - z)>,
/// with the bilinear pairing and What assembled from W_t.
pub fn phase_value(
    model: &HamiltonianModel,
    z: &DVector<f64>,
    t: f64,
    coord: GroupCoord,
    energy: f64,
) -> Result<Complex64> {
    let (value, _w) = phase_value_with_w(model, z, t, coord, energy)?;
    Ok(value)
}

fn group_element_of(model: &HamiltonianModel, coord: GroupCoord) -> Result<crate::group::GroupElement> {
    match coord {
        GroupCoord::Torus(theta) => model.group().torus_element(theta),
        GroupCoord::Finite(i) => model.group().element_from_coords(&[i as f64]),
    }
}

fn phase_value_with_w(
    model: &HamiltonianModel,
    z: &DVector<f64>,
    t: f64,
    coord: GroupCoord,
    energy: f64,
) -> Result<(Complex64, DMatrix<Complex64>)> {
    let n = model.n();
    let g = group_element_of(model, coord)?;
    let data = phase_flow_data(model, z, t)?;
    let p = crate::dynamics::PhasePoint::from_vector(z.clone())?;

    let ginv_z = g.inverse().apply_phase(z);
    let jz = crate::group::apply_j(z);
    let half_gz_jz = 0.5 * ginv_z.dot(&jz);

    // int <z_s - g^{-1}z, J zdot_s> ds = path - <g^{-1}z, J (z_t - z)>
    let jdiff = crate::group::apply_j(&(&data.zt - z));
    let line = data.path - ginv_z.dot(&jdiff);

    let phi1 = (energy - model.energy(&p)) * t + half_gz_jz - 0.5 * line;

    let w = w_matrix(&data.m, g.matrix(), n)?;
    let v = g.apply_phase(&data.zt) - z;
    // (1 - What) v with What = [[W, -iW], [-iW, -W]]:
    // top = v_x - W w, bottom = v_xi + i W w, with w = v_x - i v_xi
    let i = Complex64::new(0.0, 1.0);
    let wvec = DVector::from_fn(n, |k, _| Complex64::new(v[k], 0.0) - Complex64::new(v[n + k], 0.0) * i);
    let w_w = &w * &wvec;
    // bilinear pairing <(1-What)v, v> = |v|^2 - <W w, w>
    let mut q = Complex64::new(v.dot(&v), 0.0);
    for k in 0..n {
        q -= w_w[k] * wvec[k];
    }
    let value = Complex64::new(phi1, 0.0) + i * q / 4.0;
    Ok((value, w))
}

/// Full evaluation with gradient by central finite differences
/// (step 1e-5, coordinate-scaled).
pub fn phase_function(
    model: &HamiltonianModel,
    z: &DVector<f64>,
    t: f64,
    coord: GroupCoord,
    energy: f64,
) -> Result<PhaseEvaluation> {
    let (value, w_t) = phase_value_with_w(model, z, t, coord, energy)?;
    let torus = matches!(model.group().kind(), GroupKind::Torus { .. });
    let r = if torus { model.group().dim() } else { 0 };
    let d = 2 * model.n();
    let mut gradient = DVector::from_element(d + 1 + r, Complex64::new(0.0, 0.0));

    let eval = |z: &DVector<f64>, t: f64, theta: f64| -> Result<Complex64> {
        let c = match coord {
            GroupCoord::Torus(_) => GroupCoord::Torus(theta),
            GroupCoord::Finite(i) => GroupCoord::Finite(i),
        };
        phase_value(model, z, t, c, energy)
    };
    let theta0 = match coord {
        GroupCoord::Torus(a) => a,
        GroupCoord::Finite(_) => 0.0,
    };

    // fourth-order central stencil: (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h
    let stencil = |fm2: Complex64, fm1: Complex64, fp1: Complex64, fp2: Complex64, h: f64| {
        (fm2 - fm1 * 8.0 + fp1 * 8.0 - fp2) / (12.0 * h)
    };
    for k in 0..d {
        let step = 1e-5 * (1.0 + z[k].abs());
        let at = |s: f64| -> Result<Complex64> {
            let mut zz = z.clone();
            zz[k] += s;
            eval(&zz, t, theta0)
        };
        gradient[k] = stencil(at(-2.0 * step)?, at(-step)?, at(step)?, at(2.0 * step)?, step);
    }
    let step_t = 1e-5 * (1.0 + t.abs());
    gradient[d] = stencil(
        eval(z, t - 2.0 * step_t, theta0)?,
        eval(z, t - step_t, theta0)?,
        eval(z, t + step_t, theta0)?,
        eval(z, t + 2.0 * step_t, theta0)?,
        step_t,
    );
    if r > 0 {
        let step = 1e-5 * (1.0 + theta0.abs());
        gradient[d + 1] = stencil(
            eval(z, t, theta0 - 2.0 * step)?,
            eval(z, t, theta0 - step)?,
            eval(z, t, theta0 + step)?,
            eval(z, t, theta0 + 2.0 * step)?,
            step,
        );
    }

    Ok(PhaseEvaluation {
        phi1: value.re,
        phi2: value.im,
        value,
        w_t,
        gradient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::orbits::{find_relative_periodic_orbits, OrbitSearchConfig};
    use crate::models;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn det_star_values() {
        let id = DMatrix::from_diagonal_element(3, 3, Complex64::new(1.0, 0.0));
        assert!((det_star(&id).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);

        let m = DMatrix::from_diagonal_element(2, 2, Complex64::new(4.0, 0.0));
        assert!((det_star(&m).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-14);

        // sqrt(2i) = 1 + i, so det_star(diag(2i)) = 1/(1+i)
        let m = DMatrix::from_diagonal_element(1, 1, Complex64::new(0.0, 2.0));
        let expect = Complex64::new(1.0, 0.0) / Complex64::new(1.0, 1.0);
        assert!((det_star(&m).unwrap() - expect).norm() < 1e-14);

        // negative real eigenvalue: ambiguous branch
        let m = DMatrix::from_diagonal_element(1, 1, Complex64::new(-3.0, 0.0));
        assert!(matches!(
            det_star(&m),
            Err(EquiweylError::BranchAmbiguity { .. })
        ));

        // empty matrix
        let m = DMatrix::from_element(0, 0, Complex64::new(0.0, 0.0));
        assert!((det_star(&m).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn det_star_block_multiplicativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let mut draw = |k: usize| {
                DMatrix::from_fn(k, k, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                }) + DMatrix::from_diagonal_element(k, k, Complex64::new(3.0, 0.0))
            };
            let a = draw(2);
            let b = draw(3);
            let mut blk = DMatrix::from_element(5, 5, Complex64::new(0.0, 0.0));
            blk.view_mut((0, 0), (2, 2)).copy_from(&a);
            blk.view_mut((2, 2), (3, 3)).copy_from(&b);
            let lhs = det_star(&blk).unwrap();
            let rhs = det_star(&a).unwrap() * det_star(&b).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn phase_vanishes_at_time_zero_with_identity() {
        let model = models::aniso_ho_so2();
        let z = DVector::from_vec(vec![0.4, 0.1, 0.7, 0.2, -0.3, 0.5]);
        let e = models::aniso_reference_energy();
        let v = phase_value(&model, &z, 0.0, GroupCoord::Torus(0.0), e).unwrap();
        // at t = 0, g = e: phases from the closing mismatch vanish; only (E - H) t = 0
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn phase_on_critical_configurations() {
        let model = models::aniso_ho_so2();
        let e = models::aniso_reference_energy();
        let cfg = OrbitSearchConfig::new(e, 2.0);
        let orbits = find_relative_periodic_orbits(&model, &cfg).unwrap();
        assert_eq!(orbits.len(), 2);

        for orbit in &orbits {
            for k in 1..=2usize {
                let theta = match orbit.g_coord {
                    GroupCoord::Torus(a) => a * k as f64,
                    GroupCoord::Finite(_) => 0.0,
                };
                let ev = phase_function(
                    &model,
                    orbit.z0.coords(),
                    k as f64 * orbit.t_gamma,
                    GroupCoord::Torus(theta),
                    e,
                )
                .unwrap();
                assert!(
                    ev.phi2.abs() < 1e-8,
                    "imaginary part {:.3e} at family {} k={k}",
                    ev.phi2,
                    orbit.family_id
                );
                assert!(
                    ev.gradient.norm() < 1e-6,
                    "gradient {:.3e} at family {} k={k}",
                    ev.gradient.norm(),
                    orbit.family_id
                );
                // the real phase equals the action integral on the critical set
                let action =
                    crate::dynamics::orbits::action_integral(&model, orbit, k).unwrap();
                assert_relative_eq!(ev.phi1, action, epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn planar_action_value_is_pi_squared() {
        let model = models::aniso_ho_so2();
        let e = models::aniso_reference_energy();
        let z0 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let ev = phase_function(&model, &z0, 0.5, GroupCoord::Torus(PI), e).unwrap();
        assert_relative_eq!(ev.phi1, PI * PI, epsilon = 1e-9);
        assert!(ev.phi2.abs() < 1e-10);
    }

    #[test]
    fn imaginary_part_nonnegative_on_random_samples() {
        let model = models::aniso_ho_so2();
        let e = models::aniso_reference_energy();
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let bx = model.sample_box(1.3 * e);
        for _ in 0..1000 {
            let z = DVector::from_fn(6, |i, _| {
                let (lo, hi) = bx[i];
                rng.random_range(lo..hi)
            });
            let t = rng.random_range(0.05..2.0);
            let theta = rng.random_range(0.0..2.0 * PI);
            let v = phase_value(&model, &z, t, GroupCoord::Torus(theta), e).unwrap();
            assert!(
                v.im > -1e-10,
                "negative imaginary part {:.3e} at t={t}",
                v.im
            );
        }
    }

    #[test]
    fn noncritical_samples_have_phase_or_gradient_margin() {
        let model = models::aniso_ho_so2();
        let e = models::aniso_reference_energy();
        let mut rng = ChaCha8Rng::seed_from_u64(90210);
        let bx = model.sample_box(1.3 * e);
        let mut checked = 0;
        while checked < 200 {
            let z = DVector::from_fn(6, |i, _| {
                let (lo, hi) = bx[i];
                rng.random_range(lo..hi)
            });
            let t = rng.random_range(0.05..2.0);
            let theta = rng.random_range(0.0..2.0 * PI);
            let ev = phase_function(&model, &z, t, GroupCoord::Torus(theta), e).unwrap();
            assert!(
                ev.phi2 > 1e-10 || ev.gradient.norm() > 1e-3,
                "random configuration looks critical: phi2 {:.3e}, grad {:.3e}",
                ev.phi2,
                ev.gradient.norm()
            );
            checked += 1;
        }
    }
}
