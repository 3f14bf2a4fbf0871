//! Group action on the Galerkin basis: representation matrices, isotypic
//! projectors, and a direct angular-sector construction for planar rotations.
//!
//! For a rotation in the (i, j) plane the degree-d block of the 2D oscillator
//! splits into circular states built by the ladder recursion
//! |n+, n-> = (a_i* +- i a_j*)-monomials; the representation matrix is then
//! U diag(exp(-i (n+ - n-) theta)) U*.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{EquiweylError, Result};
use crate::group::{ChiLabel, CompactGroupAction, GroupElement, GroupKind, RotationPlane};
use crate::quantization::basis::{axis_operators, GalerkinBasis};
use crate::symbol::PolynomialSymbol;

/// Circular states of the planar oscillator at total degree d: columns are
/// coefficient vectors over k_i (k_j = d - k_i implied), one per pair
/// (n_plus, n_minus) with n_plus + n_minus = d, ordered by n_plus descending.
/// The isotypic label of column (n_plus, n_minus) is m = n_minus - n_plus.
pub fn circular_states(d: u32) -> DMatrix<Complex64> {
    let dim = (d + 1) as usize;
    let mut u = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (col, n_plus) in (0..=d).rev().enumerate() {
        let n_minus = d - n_plus;
        let mut v: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
        // raise with a_plus* n_plus times, then a_minus* n_minus times
        for step in 0..n_plus {
            v = raise(&v, step, 1.0);
        }
        for step in 0..n_minus {
            v = raise(&v, n_plus + step, -1.0);
        }
        for (k, c) in v.iter().enumerate() {
            u[(k, col)] = *c;
        }
    }
    u
}

/// Apply the raw raising operator a_i* + sign * i a_j* (over sqrt 2) to a
/// coefficient vector of planar degree `deg`; factorial normalization is
/// applied once at the end by [`circular_norms`].
fn raise(v: &[Complex64], deg: u32, sign: f64) -> Vec<Complex64> {
    let new_len = v.len() + 1;
    let mut out = vec![Complex64::new(0.0, 0.0); new_len];
    let inv = 1.0 / (2.0f64).sqrt();
    for (k, c) in v.iter().enumerate() {
        let ki = k as f64;
        let kj = (deg as usize - k) as f64;
        out[k + 1] += c * Complex64::new(inv * (ki + 1.0).sqrt(), 0.0);
        out[k] += c * Complex64::new(0.0, sign * inv * (kj + 1.0).sqrt());
    }
    out
}

/// Normalization of the ladder recursion: |n+, n-> needs 1/sqrt(n+! n-!).
fn circular_norms(d: u32) -> Vec<f64> {
    (0..=d)
        .rev()
        .map(|n_plus| {
            let n_minus = d - n_plus;
            let mut f = 1.0f64;
            for k in 1..=n_plus {
                f *= k as f64;
            }
            for k in 1..=n_minus {
                f *= k as f64;
            }
            1.0 / f.sqrt()
        })
        .collect()
}

/// Circular transform with ladder normalization applied; unitary.
pub fn circular_transform(d: u32) -> DMatrix<Complex64> {
    let mut u = circular_states(d);
    let norms = circular_norms(d);
    for (col, s) in norms.iter().enumerate() {
        for r in 0..u.nrows() {
            u[(r, col)] *= Complex64::new(*s, 0.0);
        }
    }
    u
}

/// Labels m = n_minus - n_plus per column of [`circular_transform`].
pub fn circular_labels(d: u32) -> Vec<i32> {
    (0..=d)
        .rev()
        .map(|n_plus| (d - n_plus) as i32 - n_plus as i32)
        .collect()
}

fn plane_rotation_rep(
    basis: &GalerkinBasis,
    plane: &RotationPlane,
    theta: f64,
) -> Result<DMatrix<Complex64>> {
    let (i, j) = (plane.i, plane.j);
    if (basis.ref_freq()[i] - basis.ref_freq()[j]).abs()
        > 1e-12 * basis.ref_freq()[i].abs().max(1.0)
    {
        return Err(EquiweylError::RejectedConfiguration(format!(
            "reference frequencies differ on rotated axes {i}, {j}"
        )));
    }
    let angle = plane.winding as f64 * theta;
    let size = basis.size();
    let mut m = DMatrix::from_element(size, size, Complex64::new(0.0, 0.0));

    // per planar degree, R_d = U_d diag(e^{-i m_ang angle}) U_d^*
    let mut rot_blocks: Vec<DMatrix<Complex64>> = Vec::new();
    for d in 0..=basis.n_max() {
        let u = circular_transform(d);
        let mut diag = DMatrix::from_element(
            u.ncols(),
            u.ncols(),
            Complex64::new(0.0, 0.0),
        );
        for (c, n_plus) in (0..=d).rev().enumerate() {
            let n_minus = d - n_plus;
            let m_ang = n_plus as f64 - n_minus as f64;
            diag[(c, c)] = Complex64::from_polar(1.0, -m_ang * angle);
        }
        rot_blocks.push(&u * diag * u.adjoint());
    }

    // connect basis entries that agree outside the plane
    let mut groups: HashMap<(Vec<u32>, u32), Vec<usize>> = HashMap::new();
    for (idx, multi) in basis.indices().iter().enumerate() {
        let mut spectator = multi.clone();
        let d = spectator[i] + spectator[j];
        spectator[i] = 0;
        spectator[j] = 0;
        groups.entry((spectator, d)).or_default().push(idx);
    }
    for ((_, d), members) in groups {
        let block = &rot_blocks[d as usize];
        for &r in &members {
            for &c in &members {
                let ki_r = basis.indices()[r][i] as usize;
                let ki_c = basis.indices()[c][i] as usize;
                m[(r, c)] = block[(ki_r, ki_c)];
            }
        }
    }
    Ok(m)
}

/// Diagonal parity representation for elements acting as per-axis signs.
fn parity_rep(basis: &GalerkinBasis, signs: &[f64]) -> DMatrix<Complex64> {
    let size = basis.size();
    let mut m = DMatrix::from_element(size, size, Complex64::new(0.0, 0.0));
    for (idx, multi) in basis.indices().iter().enumerate() {
        let mut v = 1.0;
        for (j, s) in signs.iter().enumerate() {
            if *s < 0.0 && multi[j] % 2 == 1 {
                v = -v;
            }
        }
        m[(idx, idx)] = Complex64::new(v, 0.0);
    }
    m
}

/// Unitary representation (M(g) psi)(x) = psi(g^{-1} x) on the Galerkin basis.
///
/// Supported element structures: torus elements of the group's rotation
/// planes, diagonal +-1 matrices, and plane rotations of a finite subgroup;
/// axes mixed by g must share a reference frequency.
pub fn representation_matrix(
    group: &CompactGroupAction,
    g: &GroupElement,
    basis: &Arc<GalerkinBasis>,
) -> Result<DMatrix<Complex64>> {
    let n = basis.n();
    if g.n() != n {
        return Err(EquiweylError::DimensionMismatch { expected: n, got: g.n() });
    }
    let size = basis.size();
    let id = DMatrix::from_diagonal_element(size, size, Complex64::new(1.0, 0.0));
    if (g.matrix() - DMatrix::identity(n, n)).norm() < 1e-14 {
        return Ok(id);
    }

    if let GroupKind::Torus { planes } = group.kind() {
        if let Some(coords) = g.coords() {
            let theta = coords[0];
            let mut m = id;
            for p in planes {
                m = plane_rotation_rep(basis, p, theta)? * m;
            }
            return Ok(m);
        }
    }

    // finite elements: diagonal signs?
    let gm = g.matrix();
    let mut is_diag_sign = true;
    for r in 0..n {
        for c in 0..n {
            let v = gm[(r, c)];
            if r == c {
                if (v.abs() - 1.0).abs() > 1e-12 {
                    is_diag_sign = false;
                }
            } else if v.abs() > 1e-12 {
                is_diag_sign = false;
            }
        }
    }
    if is_diag_sign {
        let signs: Vec<f64> = (0..n).map(|i| gm[(i, i)]).collect();
        return Ok(parity_rep(basis, &signs));
    }

    // single-plane rotation embedded in the identity?
    let mut off_axes = Vec::new();
    for r in 0..n {
        let mut diff = 0.0;
        for c in 0..n {
            let idv = if r == c { 1.0 } else { 0.0 };
            diff += (gm[(r, c)] - idv).abs();
        }
        if diff > 1e-12 {
            off_axes.push(r);
        }
    }
    if off_axes.len() == 2 {
        let (i, j) = (off_axes[0], off_axes[1]);
        let (c, s) = (gm[(i, i)], gm[(j, i)]);
        if (gm[(j, j)] - c).abs() < 1e-12
            && (gm[(i, j)] + s).abs() < 1e-12
            && (c * c + s * s - 1.0).abs() < 1e-12
        {
            let theta = s.atan2(c);
            return plane_rotation_rep(basis, &RotationPlane { i, j, winding: 1 }, theta);
        }
    }

    Err(EquiweylError::RejectedConfiguration(
        "unsupported group element structure for the Hermite basis".into(),
    ))
}

/// Peter-Weyl projector P_chi = d_chi * average over g of conj(chi(g)) M(g).
///
/// For torus groups the quadrature node count is raised automatically beyond
/// the alias limit of the basis cutoff; idempotence is verified.
pub fn isotypic_projector(
    group: &CompactGroupAction,
    chi: &ChiLabel,
    basis: &Arc<GalerkinBasis>,
) -> Result<DMatrix<Complex64>> {
    let size = basis.size();
    let d_chi = group.character_dim(chi)? as f64;
    let mut p = DMatrix::from_element(size, size, Complex64::new(0.0, 0.0));

    match group.kind() {
        GroupKind::Finite { elements } => {
            let w = 1.0 / elements.len() as f64;
            for g in elements {
                let chi_g = group.character(chi, g)?;
                let m = representation_matrix(group, g, basis)?;
                p += m * (chi_g.conj() * w);
            }
        }
        GroupKind::Torus { planes } => {
            let m_label = match chi {
                ChiLabel::Weight(m) => *m,
                _ => return Err(EquiweylError::UnknownCharacter(chi.to_string())),
            };
            let w_max = planes.iter().map(|p| p.winding.unsigned_abs()).max().unwrap_or(1);
            let min_nodes = 2 * (w_max * basis.n_max() + m_label.unsigned_abs()) as usize + 1;
            let nodes = group.haar_node_count().max(min_nodes);
            let w = 1.0 / nodes as f64;
            for k in 0..nodes {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
                let g = group.torus_element(theta)?;
                let chi_g = Complex64::from_polar(1.0, m_label as f64 * theta);
                let m = representation_matrix(group, &g, basis)?;
                p += m * (chi_g.conj() * w);
            }
        }
    }
    p *= Complex64::new(d_chi, 0.0);

    let idem = (&p * &p - &p).norm();
    if idem > 1e-10 * (1.0 + p.norm()) {
        let suggested = 2 * (basis.n_max() as usize + 8) + 1;
        return Err(EquiweylError::InsufficientHaarNodes {
            defect: idem,
            suggested_nodes: suggested,
        });
    }
    Ok(p)
}

/// Basis labels of one SO(2) angular sector: (planar degree, spectator index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorState {
    pub planar_degree: u32,
    pub axial: u32,
}

/// Hermitian matrix of a G-invariant symbol restricted to the angular-momentum
/// sector m, built directly in the circular basis. This is the scalable path
/// for large cutoffs where dense projectors are out of reach.
///
/// Supports n = 3 with the rotation plane on axes (0, 1); axis 2 is the
/// spectator. The sector basis is {(d2, k3): d2 >= |m|, d2 = |m| mod 2,
/// d2 + k3 <= n_max}.
pub fn so2_sector_hamiltonian(
    symbol: &PolynomialSymbol,
    n_max: u32,
    ref_freq: &[f64],
    h: f64,
    m: i32,
) -> Result<(Vec<SectorState>, DMatrix<Complex64>)> {
    if symbol.n() != 3 {
        return Err(EquiweylError::RejectedConfiguration(
            "angular-sector path supports n = 3 with the plane on axes (0, 1)".into(),
        ));
    }
    if (ref_freq[0] - ref_freq[1]).abs() > 1e-12 * ref_freq[0].abs().max(1.0) {
        return Err(EquiweylError::RejectedConfiguration(
            "planar reference frequencies must agree".into(),
        ));
    }

    // sector basis
    let mabs = m.unsigned_abs();
    let mut states = Vec::new();
    let mut d2 = mabs;
    while d2 <= n_max {
        for k3 in 0..=(n_max - d2) {
            states.push(SectorState {
                planar_degree: d2,
                axial: k3,
            });
        }
        d2 += 2;
    }
    let dim = states.len();

    // circular coefficient vectors u_{d2} over k1 for the label m
    // (m = n_minus - n_plus, so n_plus = (d2 - m)/2 when valid)
    let mut circ: HashMap<u32, DVector<Complex64>> = HashMap::new();
    let mut d = mabs;
    while d <= n_max {
        let u = circular_transform(d);
        let labels = circular_labels(d);
        let col = labels
            .iter()
            .position(|l| *l == m)
            .ok_or_else(|| EquiweylError::Numerical("sector label missing".into()))?;
        circ.insert(d, u.column(col).into_owned());
        d += 2;
    }

    // per-axis operator matrices at padded working dimension
    let deg = symbol.total_degree() as usize;
    let work = n_max as usize + 1 + deg;
    let ops: Vec<_> = (0..3).map(|j| axis_operators(work, ref_freq[j], h)).collect();

    let mut out = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for term in symbol.terms() {
        let mats: Vec<DMatrix<Complex64>> = (0..3)
            .map(|j| {
                super::basis::ordered_axis_matrix(
                    &ops[j],
                    term.x_pow[j],
                    term.xi_pow[j],
                    super::basis::Ordering::Weyl,
                )
            })
            .collect();
        let band: Vec<u32> = (0..3).map(|j| term.x_pow[j] + term.xi_pow[j]).collect();
        let band12 = band[0] + band[1];
        for (r, sr) in states.iter().enumerate() {
            let ur = &circ[&sr.planar_degree];
            for (c, sc) in states.iter().enumerate() {
                if sr.planar_degree.abs_diff(sc.planar_degree) > band12
                    || sr.axial.abs_diff(sc.axial) > band[2]
                {
                    continue;
                }
                let m3 = mats[2][(sr.axial as usize, sc.axial as usize)];
                if m3.norm_sqr() == 0.0 {
                    continue;
                }
                let uc = &circ[&sc.planar_degree];
                // S12 = sum_{k1', k1} conj(ur[k1']) uc[k1] m1[k1',k1] m2[d2'-k1', d2-k1]
                let mut s12 = Complex64::new(0.0, 0.0);
                for k1r in 0..=sr.planar_degree {
                    let urv = ur[k1r as usize];
                    if urv.norm_sqr() == 0.0 {
                        continue;
                    }
                    let k2r = sr.planar_degree - k1r;
                    for k1c in 0..=sc.planar_degree {
                        if k1r.abs_diff(k1c) > band[0] {
                            continue;
                        }
                        let k2c = sc.planar_degree - k1c;
                        if k2r.abs_diff(k2c) > band[1] {
                            continue;
                        }
                        let ucv = uc[k1c as usize];
                        if ucv.norm_sqr() == 0.0 {
                            continue;
                        }
                        s12 += urv.conj()
                            * ucv
                            * mats[0][(k1r as usize, k1c as usize)]
                            * mats[1][(k2r as usize, k2c as usize)];
                    }
                }
                out[(r, c)] += s12 * m3 * Complex64::new(term.coeff, 0.0);
            }
        }
    }
    Ok((states, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::quantization::basis::{quantize, Ordering};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn circular_transform_is_unitary() {
        for d in [0u32, 1, 2, 5, 9] {
            let u = circular_transform(d);
            let defect = (u.adjoint() * &u
                - DMatrix::from_diagonal_element(
                    (d + 1) as usize,
                    (d + 1) as usize,
                    Complex64::new(1.0, 0.0),
                ))
            .norm();
            assert!(defect < 1e-12, "degree {d}: defect {defect:.3e}");
        }
    }

    #[test]
    fn identity_representation() {
        let g = CompactGroupAction::so2_plane(3, 0, 1).unwrap();
        let basis = Arc::new(GalerkinBasis::new(3, 4, vec![1.0, 1.0, 2.0]).unwrap());
        let m = representation_matrix(&g, &g.identity(), &basis).unwrap();
        let defect = (&m
            - DMatrix::from_diagonal_element(
                basis.size(),
                basis.size(),
                Complex64::new(1.0, 0.0),
            ))
        .norm();
        assert!(defect < 1e-12);
    }

    #[test]
    fn pi_rotation_is_parity_diagonal() {
        let g = CompactGroupAction::so2_plane(2, 0, 1).unwrap();
        let basis = Arc::new(GalerkinBasis::new(2, 6, vec![1.3, 1.3]).unwrap());
        let el = g.torus_element(PI).unwrap();
        let m = representation_matrix(&g, &el, &basis).unwrap();
        for (idx, multi) in basis.indices().iter().enumerate() {
            let expect = if (multi[0] + multi[1]) % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (m[(idx, idx)] - Complex64::new(expect, 0.0)).norm() < 1e-10,
                "diagonal at {multi:?}"
            );
        }
        // off-diagonal must vanish
        let mut diag = DMatrix::from_element(m.nrows(), m.ncols(), Complex64::new(0.0, 0.0));
        for i in 0..m.nrows() {
            diag[(i, i)] = m[(i, i)];
        }
        assert!((m - diag).norm() < 1e-10);
    }

    #[test]
    fn representation_is_unitary_at_random_angles() {
        let g = CompactGroupAction::so2_plane(2, 0, 1).unwrap();
        let basis = Arc::new(GalerkinBasis::new(2, 8, vec![0.7, 0.7]).unwrap());
        for theta in [0.3, 1.234, 4.0] {
            let el = g.torus_element(theta).unwrap();
            let m = representation_matrix(&g, &el, &basis).unwrap();
            let defect = (m.adjoint() * &m
                - DMatrix::from_diagonal_element(
                    basis.size(),
                    basis.size(),
                    Complex64::new(1.0, 0.0),
                ))
            .norm();
            assert!(defect < 1e-10, "theta {theta}: defect {defect:.3e}");
        }
    }

    #[test]
    fn frequency_mismatch_is_rejected() {
        let g = CompactGroupAction::so2_plane(2, 0, 1).unwrap();
        let basis = Arc::new(GalerkinBasis::new(2, 4, vec![1.0, 2.0]).unwrap());
        let el = g.torus_element(0.5).unwrap();
        assert!(matches!(
            representation_matrix(&g, &el, &basis),
            Err(EquiweylError::RejectedConfiguration(_))
        ));
    }

    #[test]
    fn projector_ranks_match_angular_content() {
        // on the 2D oscillator block of degree d, the rank of P_m is 1 when
        // |m| <= d and m = d mod 2, else 0
        let g = CompactGroupAction::so2_plane(2, 0, 1).unwrap();
        let n_max = 6;
        let basis = Arc::new(GalerkinBasis::new(2, n_max, vec![1.0, 1.0]).unwrap());
        for m in [-3i32, 0, 2, 5] {
            let p = isotypic_projector(&g, &ChiLabel::Weight(m), &basis).unwrap();
            // restrict to a degree block and compute its trace (= rank)
            for d in 0..=n_max {
                let members: Vec<usize> = basis
                    .indices()
                    .iter()
                    .enumerate()
                    .filter(|(_, idx)| idx[0] + idx[1] == d)
                    .map(|(i, _)| i)
                    .collect();
                let tr: Complex64 = members.iter().map(|&i| p[(i, i)]).sum();
                let expect = if m.unsigned_abs() <= d && (m.rem_euclid(2) as u32) == d % 2 {
                    1.0
                } else {
                    0.0
                };
                assert!(
                    (tr - Complex64::new(expect, 0.0)).norm() < 1e-9,
                    "m={m}, d={d}, trace {tr}"
                );
            }
        }
    }

    #[test]
    fn projector_completeness_on_finite_block() {
        let g = CompactGroupAction::so2_plane(2, 0, 1).unwrap();
        let n_max = 5;
        let basis = Arc::new(GalerkinBasis::new(2, n_max, vec![1.0, 1.0]).unwrap());
        let mut acc = DMatrix::from_element(basis.size(), basis.size(), Complex64::new(0.0, 0.0));
        for m in -(n_max as i32)..=(n_max as i32) {
            acc += isotypic_projector(&g, &ChiLabel::Weight(m), &basis).unwrap();
        }
        let defect = (&acc
            - DMatrix::from_diagonal_element(
                basis.size(),
                basis.size(),
                Complex64::new(1.0, 0.0),
            ))
        .norm();
        assert!(defect < 1e-9, "completeness defect {defect:.3e}");
    }

    #[test]
    fn sector_hamiltonian_matches_analytic_spectrum() {
        let model = models::aniso_ho_so2();
        let h = 0.125;
        let n_max = 14;
        let freqs = [models::ANISO_OMEGA1, models::ANISO_OMEGA1, models::ANISO_OMEGA2];
        for m in [-1i32, 0, 2] {
            let (states, hm) =
                so2_sector_hamiltonian(model.symbol(), n_max, &freqs, h, m).unwrap();
            assert_eq!(states.len(), hm.nrows());
            assert!((hm.adjoint() - &hm).norm() < 1e-10 * (1.0 + hm.norm()));
            let eig = hm.symmetric_eigen();
            let mut got: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            got.sort_by(f64::total_cmp);
            // matched basis: eigenvalues are exactly h(w1(2k+|m|+1) + w2(n3+1/2))
            let mut expect: Vec<f64> = states
                .iter()
                .map(|s| {
                    let k = (s.planar_degree - m.unsigned_abs()) / 2;
                    h * (models::ANISO_OMEGA1 * (2.0 * k as f64 + m.unsigned_abs() as f64 + 1.0)
                        + models::ANISO_OMEGA2 * (s.axial as f64 + 0.5))
                })
                .collect();
            expect.sort_by(f64::total_cmp);
            for (g, e) in got.iter().zip(&expect) {
                assert_relative_eq!(g, e, epsilon = 1e-10, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sector_matches_dense_projected_spectrum_for_mixed_symbol() {
        // non-matched reference frequencies exercise the off-diagonal machinery
        let model = models::aniso_ho_so2();
        let h = 0.5;
        let n_max = 10;
        let freqs = [7.0, 7.0, 5.0];
        let basis = Arc::new(GalerkinBasis::new(3, n_max, freqs.to_vec()).unwrap());
        let hm = quantize(model.symbol(), Ordering::Weyl, &basis, h).unwrap();
        let g = model.group();
        let m_label = 1i32;
        let p = isotypic_projector(g, &ChiLabel::Weight(m_label), &basis).unwrap();

        // dense reduced eigenvalues
        let pe = p.clone().symmetric_eigen();
        let mut cols = Vec::new();
        for (i, v) in pe.eigenvalues.iter().enumerate() {
            if *v > 0.5 {
                cols.push(pe.eigenvectors.column(i).into_owned());
            }
        }
        let q = DMatrix::from_columns(&cols);
        let reduced = q.adjoint() * &hm.entries * &q;
        let mut dense: Vec<f64> = reduced.symmetric_eigen().eigenvalues.iter().copied().collect();
        dense.sort_by(f64::total_cmp);

        let (_, sm) = so2_sector_hamiltonian(model.symbol(), n_max, &freqs, h, m_label).unwrap();
        let mut sector: Vec<f64> = sm.symmetric_eigen().eigenvalues.iter().copied().collect();
        sector.sort_by(f64::total_cmp);

        assert_eq!(dense.len(), sector.len());
        for (a, b) in dense.iter().zip(&sector) {
            assert_relative_eq!(a, b, epsilon = 1e-9, max_relative = 1e-9);
        }
    }
}
