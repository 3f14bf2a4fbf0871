//! Peak predictions of the spectral distribution: for each relative periodic
//! family and repetition, the critical manifold is sampled, the transversal
//! Hessian of the complex phase is formed in Haar-normalized coordinates, and
//! the character-weighted density is integrated with the induced measure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::asymptotics::phase::{det_star, phase_value, w_matrix};
use crate::dynamics::orbits::{is_g_nondegenerate, monodromy_blocks, GroupCoord, RelativePeriodicOrbit};
use crate::dynamics::HamiltonianModel;
use crate::error::{EquiweylError, Result};
use crate::group::{ChiLabel, GroupKind};

/// One term of the peak expansion.
#[derive(Debug, Clone)]
pub struct GutzwillerTerm {
    pub family_id: usize,
    pub k: i64,
    /// The peak location k * T_gamma.
    pub t_star: f64,
    /// Action integral over k repetitions of the primitive period.
    pub phase: f64,
    /// Integral of conj(chi(g)) times the stationary-phase density over the
    /// critical manifold.
    pub amplitude: Complex64,
    /// Half-grid refinement difference, as a quadrature error estimate.
    pub quadrature_error: f64,
}

/// Grid resolution for the manifold quadrature.
#[derive(Debug, Clone, Copy)]
pub struct ManifoldGrid {
    pub along_flow: usize,
    pub along_group: usize,
}

impl Default for ManifoldGrid {
    fn default() -> Self {
        Self {
            along_flow: 12,
            along_group: 12,
        }
    }
}

struct ManifoldNode {
    z: DVector<f64>,
    /// Torus angle of the group component of the critical point.
    g_theta: f64,
    /// Quadrature weight including the induced-measure density.
    weight: f64,
    /// Tangent directions of the manifold in (z, t, theta-tilde) coordinates.
    tangent: Vec<DVector<f64>>,
}

/// Sample the critical manifold of one (family, k) pair.
///
/// For an abelian symmetry the manifold is the product of the family's
/// F-orbit with the stabilizer component: points g_theta Phi_s(z0) carry the
/// fixed closing element when the group acts freely along the orbit, and a
/// free group coordinate when the representative is stabilized.
fn sample_manifold(
    model: &HamiltonianModel,
    orbit: &RelativePeriodicOrbit,
    k: i64,
    grid: ManifoldGrid,
) -> Result<Vec<ManifoldNode>> {
    let n = model.n();
    let d = 2 * n;
    let torus = matches!(model.group().kind(), GroupKind::Torus { .. });
    let r = if torus { 1 } else { 0 };
    let q_z = orbit.orbit_dim;
    let stab_dim = model.group().dim() - q_z;

    let g_k_theta = match orbit.g_coord {
        GroupCoord::Torus(theta) => (theta * k as f64).rem_euclid(2.0 * std::f64::consts::PI),
        GroupCoord::Finite(_) => 0.0,
    };

    let mut nodes = Vec::new();
    let ds = orbit.t_gamma / grid.along_flow as f64;
    let lift = |a: &DMatrix<f64>, v: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(d);
        out.rows_mut(0, n).copy_from(&(a * v.rows(0, n)));
        out.rows_mut(n, n).copy_from(&(a * v.rows(n, n)));
        out
    };

    for is in 0..grid.along_flow {
        let s = is as f64 * ds;
        let zs = model.evolve_point(orbit.z0.coords(), s)?;
        if q_z == 1 {
            // free orbit direction: nodes g_theta Phi_s(z0), fixed closing element
            let dth = 2.0 * std::f64::consts::PI / grid.along_group as f64;
            for it in 0..grid.along_group {
                let theta = it as f64 * dth;
                let g = model.group().torus_element(theta)?;
                let z = g.apply_phase(&zs);
                let zdot = model.vector_field(&z);
                let a = &model.group().lie_basis()[0];
                let az = lift(a, &z);
                // tangent vectors in (z, t, theta-tilde) space
                let mut t1 = DVector::zeros(d + 1 + r);
                t1.rows_mut(0, d).copy_from(&zdot);
                let mut t2 = DVector::zeros(d + 1 + r);
                t2.rows_mut(0, d).copy_from(&az);
                // induced measure of the (s, theta) parametrization
                let g11 = zdot.dot(&zdot);
                let g12 = zdot.dot(&az);
                let g22 = az.dot(&az);
                let gram = (g11 * g22 - g12 * g12).max(0.0).sqrt();
                nodes.push(ManifoldNode {
                    z,
                    g_theta: g_k_theta,
                    weight: gram * ds * dth,
                    tangent: vec![t1, t2],
                });
            }
        } else if stab_dim == 1 {
            // stabilized representative: the group coordinate of the critical
            // point is free; theta-tilde = theta / 2pi is the Haar-normalized
            // coordinate with unit fiber volume
            let dth_tilde = 1.0 / grid.along_group as f64;
            for it in 0..grid.along_group {
                let theta_tilde = it as f64 * dth_tilde;
                let zdot = model.vector_field(&zs);
                let mut t1 = DVector::zeros(d + 1 + r);
                t1.rows_mut(0, d).copy_from(&zdot);
                let mut t2 = DVector::zeros(d + 1 + r);
                t2[d + 1] = 1.0;
                nodes.push(ManifoldNode {
                    z: zs.clone(),
                    g_theta: 2.0 * std::f64::consts::PI * theta_tilde,
                    weight: zdot.norm() * ds * dth_tilde,
                    tangent: vec![t1, t2],
                });
            }
        } else {
            // finite group or trivial stabilizer structure: one-dimensional manifold
            let zdot = model.vector_field(&zs);
            let mut t1 = DVector::zeros(d + 1 + r);
            t1.rows_mut(0, d).copy_from(&zdot);
            nodes.push(ManifoldNode {
                z: zs.clone(),
                g_theta: g_k_theta,
                weight: zdot.norm() * ds,
                tangent: vec![t1],
            });
        }
    }
    Ok(nodes)
}

/// Complex symmetric Hessian of the phase in (z, t, theta-tilde) coordinates
/// by central differences with Richardson refinement.
fn phase_hessian(
    model: &HamiltonianModel,
    z: &DVector<f64>,
    t: f64,
    g_theta: f64,
    energy: f64,
    step0: f64,
) -> Result<DMatrix<Complex64>> {
    let torus = matches!(model.group().kind(), GroupKind::Torus { .. });
    let r = if torus { 1 } else { 0 };
    let d = 2 * model.n();
    let dim = d + 1 + r;

    let eval = |u: &DVector<f64>| -> Result<Complex64> {
        let zz = u.rows(0, d).into_owned();
        let tt = u[d];
        let coord = if torus {
            GroupCoord::Torus(2.0 * std::f64::consts::PI * u[d + 1])
        } else {
            GroupCoord::Finite(0)
        };
        phase_value(model, &zz, tt, coord, energy)
    };

    let mut u0 = DVector::zeros(dim);
    u0.rows_mut(0, d).copy_from(z);
    u0[d] = t;
    if torus {
        u0[d + 1] = g_theta / (2.0 * std::f64::consts::PI);
    }

    let hess_at = |h: f64| -> Result<DMatrix<Complex64>> {
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        let f0 = eval(&u0)?;
        for i in 0..dim {
            let mut up = u0.clone();
            let mut um = u0.clone();
            up[i] += h;
            um[i] -= h;
            m[(i, i)] = (eval(&up)? - f0 * 2.0 + eval(&um)?) / (h * h);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let mut upp = u0.clone();
                let mut upm = u0.clone();
                let mut ump = u0.clone();
                let mut umm = u0.clone();
                upp[i] += h;
                upp[j] += h;
                upm[i] += h;
                upm[j] -= h;
                ump[i] -= h;
                ump[j] += h;
                umm[i] -= h;
                umm[j] -= h;
                let v = (eval(&upp)? - eval(&upm)? - eval(&ump)? + eval(&umm)?) / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    };

    // Richardson: central differences have O(h^2) error
    let h1 = hess_at(step0)?;
    let h2 = hess_at(0.5 * step0)?;
    Ok((h2 * Complex64::new(4.0, 0.0) - h1) / Complex64::new(3.0, 0.0))
}

/// The stationary-phase density at one critical point.
///
/// `guard_nondegeneracy` enforces the transversal-Hessian bound; it is applied
/// at term base points, while interior quadrature nodes may approach the
/// isolated singular group elements of a stabilized family.
fn density_at(
    model: &HamiltonianModel,
    node: &ManifoldNode,
    t_star: f64,
    energy: f64,
    guard_nondegeneracy: bool,
) -> Result<Complex64> {
    let n = model.n();
    let hess = phase_hessian(model, &node.z, t_star, node.g_theta, energy, 1e-4)?;
    let dim = hess.nrows();

    // orthonormal basis of the normal space of the manifold
    let mut tan_cols: Vec<DVector<f64>> = Vec::new();
    for t in &node.tangent {
        let mut v = t.clone();
        for done in &tan_cols {
            let p = done.dot(&v);
            v -= done * p;
        }
        let nv = v.norm();
        if nv > 1e-12 {
            tan_cols.push(v / nv);
        }
    }
    let mut proj = DMatrix::identity(dim, dim);
    for t in &tan_cols {
        proj -= t * t.transpose();
    }
    let svd = proj.svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let mut ncols = Vec::new();
    for j in 0..dim {
        if svd.singular_values[j] > 0.5 {
            ncols.push(u.column(j).into_owned());
        }
    }
    if ncols.len() != dim - tan_cols.len() {
        return Err(EquiweylError::Numerical(
            "normal-space dimension mismatch at a critical point".into(),
        ));
    }
    let nb = DMatrix::from_columns(&ncols);
    let nbc = DMatrix::from_fn(nb.nrows(), nb.ncols(), |r, c| {
        Complex64::new(nb[(r, c)], 0.0)
    });
    let restricted = nbc.adjoint() * &hess * &nbc;
    // enforce complex symmetry lost to roundoff
    let restricted = (&restricted + restricted.transpose()) * Complex64::new(0.5, 0.0);

    if guard_nondegeneracy {
        let sv = restricted.clone().svd(false, false);
        let smin = sv.singular_values.min();
        if smin < 1e-6 {
            return Err(EquiweylError::HypothesisViolation {
                hypothesis: "H3'".into(),
                detail: format!("transversal Hessian nearly singular (sigma_min = {smin:.3e})"),
            });
        }
    }

    let i = Complex64::new(0.0, 1.0);
    let lead = det_star(&(restricted / i))?;

    // second factor: (A + iB - i(C + iD)) / i at (z, t_star)
    let (_, m) = model.evolve(&node.z, t_star)?;
    let to_c = |mm: nalgebra::DMatrixView<f64>| {
        DMatrix::from_fn(mm.nrows(), mm.ncols(), |r, c| Complex64::new(mm[(r, c)], 0.0))
    };
    let a = to_c(m.view((0, 0), (n, n)));
    let b = to_c(m.view((0, n), (n, n)));
    let c = to_c(m.view((n, 0), (n, n)));
    let dd = to_c(m.view((n, n), (n, n)));
    let mat = (&a + &b * i - (&c + &dd * i) * i) / i;
    let amp = det_star(&mat)?;

    let _ = w_matrix(&m, model.group().identity().matrix(), n); // caustic guard
    Ok(lead * amp)
}

/// Group angles theta at which the closing pair (t_star, g_theta) of a
/// stabilized representative has a unit eigenvalue on the reduced transversal.
/// These are isolated points where the transversal Hessian of the phase
/// degenerates along the stabilizer circle.
fn stabilizer_singular_angles(
    model: &HamiltonianModel,
    z0: &DVector<f64>,
    t_star: f64,
) -> Result<Vec<f64>> {
    let (_, m) = model.evolve(z0, t_star)?;
    let margin_at = |theta: f64| -> f64 {
        let g = model
            .group()
            .torus_element(theta)
            .expect("torus element");
        let full = g.phase_matrix() * &m;
        full.complex_eigenvalues()
            .iter()
            .map(|l| (l - Complex64::new(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let grid = 512usize;
    let two_pi = 2.0 * std::f64::consts::PI;
    let vals: Vec<f64> = (0..grid)
        .map(|i| margin_at(two_pi * i as f64 / grid as f64))
        .collect();
    let mut out = Vec::new();
    for i in 0..grid {
        let prev = vals[(i + grid - 1) % grid];
        let next = vals[(i + 1) % grid];
        if vals[i] < prev && vals[i] <= next && vals[i] < 0.1 {
            // golden-section refinement of the margin minimum
            let mut lo = two_pi * (i as f64 - 1.0) / grid as f64;
            let mut hi = two_pi * (i as f64 + 1.0) / grid as f64;
            for _ in 0..60 {
                let m1 = lo + (hi - lo) * 0.381966;
                let m2 = hi - (hi - lo) * 0.381966;
                if margin_at(m1) < margin_at(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let theta = 0.5 * (lo + hi);
            if margin_at(theta) < 1e-5 {
                out.push(theta.rem_euclid(two_pi));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    Ok(out)
}

/// Debug helper: density at an axis-family node with the given stabilizer
/// coordinate (kept public for numeric inspection in examples).
pub fn debug_density_at_axis_node(
    model: &HamiltonianModel,
    orbit: &RelativePeriodicOrbit,
    theta_tilde: f64,
    energy: f64,
) -> Result<Complex64> {
    let d = 2 * model.n();
    let zdot = model.vector_field(orbit.z0.coords());
    let mut t1 = DVector::zeros(d + 2);
    t1.rows_mut(0, d).copy_from(&zdot);
    let mut t2 = DVector::zeros(d + 2);
    t2[d + 1] = 1.0;
    let node = ManifoldNode {
        z: orbit.z0.coords().clone(),
        g_theta: 2.0 * std::f64::consts::PI * theta_tilde,
        weight: 1.0,
        tangent: vec![t1, t2],
    };
    density_at(model, &node, orbit.t_gamma, energy, false)
}

fn amplitude_on_grid(
    model: &HamiltonianModel,
    orbit: &RelativePeriodicOrbit,
    chi: &ChiLabel,
    k: i64,
    energy: f64,
    grid: ManifoldGrid,
) -> Result<Complex64> {
    let t_star = k as f64 * orbit.t_gamma;
    let torus = matches!(model.group().kind(), GroupKind::Torus { .. });
    let stab_dim = model.group().dim() - orbit.orbit_dim;

    if !(torus && stab_dim == 1) {
        // smooth manifold quadrature: free orbit direction or finite group
        let nodes = sample_manifold(model, orbit, k, grid)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for node in &nodes {
            let g = match model.group().kind() {
                GroupKind::Torus { .. } => model.group().torus_element(node.g_theta)?,
                GroupKind::Finite { .. } => orbit.element_pow(model, k)?,
            };
            let chi_g = model.group().character(chi, &g)?;
            let dens = density_at(model, node, t_star, energy, false)?;
            acc += chi_g.conj() * dens * Complex64::new(node.weight, 0.0);
        }
        return Ok(acc);
    }

    // Stabilized representative: the group coordinate of the critical points
    // is free, and the transversal Hessian degenerates at the isolated angles
    // where (g_theta Phi_{t_star})_* has a unit eigenvalue. The density then
    // has integrable inverse-square-root spikes; the circle is split there
    // and each segment is mapped by a smoothstep whose vanishing endpoint
    // derivative absorbs the singularity.
    let n = model.n();
    let d = 2 * n;
    let two_pi = 2.0 * std::f64::consts::PI;
    let singular = stabilizer_singular_angles(model, orbit.z0.coords(), t_star)?;
    let mut cuts: Vec<f64> = singular.clone();
    if cuts.is_empty() {
        cuts.push(0.0);
    }
    let segments: Vec<(f64, f64)> = (0..cuts.len())
        .map(|i| {
            let a = cuts[i];
            let b = if i + 1 < cuts.len() {
                cuts[i + 1]
            } else {
                cuts[0] + two_pi
            };
            (a, b)
        })
        .collect();

    let ds = orbit.t_gamma / grid.along_flow as f64;
    let (us, ws) = crate::quad::gauss_legendre(2 * grid.along_group.max(8));
    let mut acc = Complex64::new(0.0, 0.0);

    for is in 0..grid.along_flow {
        let s = is as f64 * ds;
        let zs = model.evolve_point(orbit.z0.coords(), s)?;
        let zdot = model.vector_field(&zs);
        let mut t1 = DVector::zeros(d + 2);
        t1.rows_mut(0, d).copy_from(&zdot);
        let mut t2 = DVector::zeros(d + 2);
        t2[d + 1] = 1.0;
        let flow_weight = zdot.norm() * ds;

        for (a, b) in &segments {
            let len = b - a;
            for (u01, wq) in us.iter().zip(&ws) {
                // smoothstep u^2 (3 - 2u) on [0, 1]; derivative 6u(1-u)
                let u = 0.5 * (u01 + 1.0);
                let theta = a + len * u * u * (3.0 - 2.0 * u);
                let jac = len * 6.0 * u * (1.0 - u) * 0.5 * wq;
                let node = ManifoldNode {
                    z: zs.clone(),
                    g_theta: theta.rem_euclid(two_pi),
                    weight: flow_weight * jac / two_pi,
                    tangent: vec![t1.clone(), t2.clone()],
                };
                let g = model.group().torus_element(node.g_theta)?;
                let chi_g = model.group().character(chi, &g)?;
                let dens = match density_at(model, &node, t_star, energy, false) {
                    Ok(v) => v,
                    Err(EquiweylError::BranchAmbiguity { .. }) => {
                        // measure-zero branch coincidence: nudge the node
                        let node2 = ManifoldNode {
                            z: node.z.clone(),
                            g_theta: (node.g_theta + 1e-9).rem_euclid(two_pi),
                            weight: node.weight,
                            tangent: node.tangent.clone(),
                        };
                        density_at(model, &node2, t_star, energy, false)?
                    }
                    Err(e) => return Err(e),
                };
                acc += chi_g.conj() * dens * Complex64::new(node.weight, 0.0);
            }
        }
    }
    Ok(acc)
}

/// Terms contributed by census families with k T_gamma inside the Fourier
/// support. Degenerate families inside the window abort with the offender.
pub fn gutzwiller_terms(
    model: &HamiltonianModel,
    chi: &ChiLabel,
    census: &[RelativePeriodicOrbit],
    fhat_support: (f64, f64),
    energy: f64,
    grid: ManifoldGrid,
) -> Result<Vec<GutzwillerTerm>> {
    let mut out = Vec::new();
    for orbit in census {
        // peaks on the open support; the window vanishes at its endpoints
        let mut ks: Vec<i64> = Vec::new();
        let mut k = 1i64;
        while (k as f64) * orbit.t_gamma < fhat_support.1 {
            if (k as f64) * orbit.t_gamma > fhat_support.0 {
                ks.push(k);
            }
            k += 1;
        }
        if fhat_support.0 < 0.0 {
            let mut k = -1i64;
            while (k as f64) * orbit.t_gamma > fhat_support.0 {
                if (k as f64) * orbit.t_gamma < fhat_support.1 {
                    ks.push(k);
                }
                k -= 1;
            }
        }
        for k in ks {
            let blocks = monodromy_blocks(model, orbit, k.unsigned_abs() as usize)?;
            let rep = is_g_nondegenerate(&blocks, 1e-6);
            if !rep.nondegenerate {
                return Err(EquiweylError::HypothesisViolation {
                    hypothesis: "H3'".into(),
                    detail: format!(
                        "family {} at repetition {k} has unit-margin {:.3e}",
                        orbit.family_id, rep.margin
                    ),
                });
            }
            // transversal nondegeneracy at the term's base point
            let base_nodes = sample_manifold(
                model,
                orbit,
                k,
                ManifoldGrid {
                    along_flow: 1,
                    along_group: 1,
                },
            )?;
            if let Some(base) = base_nodes.first() {
                density_at(model, base, k as f64 * orbit.t_gamma, energy, true)?;
            }
            let amplitude = amplitude_on_grid(model, orbit, chi, k, energy, grid)?;
            let coarse = amplitude_on_grid(
                model,
                orbit,
                chi,
                k,
                energy,
                ManifoldGrid {
                    along_flow: grid.along_flow / 2,
                    along_group: (grid.along_group / 2).max(1),
                },
            )?;
            let phase = crate::dynamics::orbits::action_integral(
                model,
                orbit,
                k.unsigned_abs() as usize,
            )? * k.signum() as f64;
            out.push(GutzwillerTerm {
                family_id: orbit.family_id,
                k,
                t_star: k as f64 * orbit.t_gamma,
                phase,
                amplitude,
                quadrature_error: (amplitude - coarse).norm(),
            });
        }
    }
    out.sort_by(|a, b| a.t_star.total_cmp(&b.t_star));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::orbits::{find_relative_periodic_orbits, OrbitSearchConfig};
    use crate::models;

    fn census() -> (HamiltonianModel, Vec<RelativePeriodicOrbit>) {
        let model = models::aniso_ho_so2();
        let cfg = OrbitSearchConfig::new(models::aniso_reference_energy(), 2.0);
        let orbits = find_relative_periodic_orbits(&model, &cfg).unwrap();
        (model, orbits)
    }

    #[test]
    fn window_at_sqrt2_selects_single_axis_term() {
        let (model, orbits) = census();
        let e = models::aniso_reference_energy();
        let terms = gutzwiller_terms(
            &model,
            &ChiLabel::Weight(0),
            &orbits,
            (1.3, 1.5),
            e,
            ManifoldGrid::default(),
        )
        .unwrap();
        assert_eq!(terms.len(), 1);
        let t = &terms[0];
        assert_eq!(t.k, 1);
        assert!((t.t_star - 2.0f64.sqrt()).abs() < 1e-6);
        assert!(t.amplitude.norm() > 0.0);
        assert!(t.quadrature_error < 0.05 * t.amplitude.norm());
    }

    #[test]
    fn wide_window_collects_planar_repetitions() {
        let (model, orbits) = census();
        let e = models::aniso_reference_energy();
        let terms = gutzwiller_terms(
            &model,
            &ChiLabel::Weight(0),
            &orbits,
            (0.4, 1.1),
            e,
            ManifoldGrid::default(),
        )
        .unwrap();
        let stars: Vec<f64> = terms.iter().map(|t| t.t_star).collect();
        assert_eq!(terms.len(), 2);
        assert!((stars[0] - 0.5).abs() < 1e-8);
        assert!((stars[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn manifold_dimensions_are_two_for_both_families() {
        let (model, orbits) = census();
        for orbit in &orbits {
            let nodes = sample_manifold(&model, orbit, 1, ManifoldGrid::default()).unwrap();
            for node in nodes.iter().take(3) {
                assert_eq!(node.tangent.len(), 2);
                // tangent vectors are linearly independent
                let t0 = &node.tangent[0];
                let t1 = &node.tangent[1];
                let g11 = t0.dot(t0);
                let g22 = t1.dot(t1);
                let g12 = t0.dot(t1);
                assert!(g11 * g22 - g12 * g12 > 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_family_is_rejected_with_offender() {
        // the resonant isotropic oscillator at its full period violates the
        // non-degeneracy hypothesis
        let model = models::iso_2d();
        let cfg = OrbitSearchConfig::new(0.5, 7.0);
        let z0 = nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let p = crate::dynamics::orbits::polish_candidate(
            &model,
            &z0,
            2.0 * std::f64::consts::PI,
            GroupCoord::Finite(0),
            &cfg,
        )
        .unwrap();
        let orbit = RelativePeriodicOrbit {
            family_id: 0,
            z0: p.z.clone(),
            t: p.t,
            g_coord: p.coord,
            residual: p.residual,
            t_gamma: p.t,
            energy: 0.5,
            orbit_dim: 0,
            nondegenerate: false,
            nondeg_margin: 0.0,
            degenerate_jacobian: false,
        };
        let r = gutzwiller_terms(
            &model,
            &ChiLabel::Named("triv".into()),
            &[orbit],
            (6.0, 6.6),
            0.5,
            ManifoldGrid::default(),
        );
        assert!(matches!(r, Err(EquiweylError::HypothesisViolation { .. })));
    }
}
