//! Orthonormal splitting of the tangent space at points of the reduced
//! constraint set, and the non-stationarity certificate built on it.
//!
//! At a point z of {mu = 0, H = E} the tangent space splits into three
//! mutually orthogonal pieces: f_z spanned by the flow direction J grad H
//! together with the group directions A_i z, its image J f_z, and the
//! orthogonal remainder R carrying the reduced return map.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{HamiltonianModel, PhasePoint};
use crate::error::{EquiweylError, Result};
use crate::group::apply_j;

/// Orthonormal frames for (J f_z, f_z, R).
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub basis_jf: DMatrix<f64>,
    pub basis_f: DMatrix<f64>,
    pub basis_r: DMatrix<f64>,
}

impl TangentFrame {
    /// Columns [Jf | f | R] as one orthogonal 2n x 2n matrix.
    pub fn full(&self) -> DMatrix<f64> {
        let n2 = self.basis_jf.nrows();
        let total = self.basis_jf.ncols() + self.basis_f.ncols() + self.basis_r.ncols();
        let mut q = DMatrix::zeros(n2, total);
        let mut c = 0;
        for blk in [&self.basis_jf, &self.basis_f, &self.basis_r] {
            q.view_mut((0, c), (n2, blk.ncols())).copy_from(blk);
            c += blk.ncols();
        }
        q
    }

    pub fn f_dim(&self) -> usize {
        self.basis_f.ncols()
    }

    pub fn r_dim(&self) -> usize {
        self.basis_r.ncols()
    }

    /// || Q^T Q - I || over the assembled frame.
    pub fn orthonormality_defect(&self) -> f64 {
        let q = self.full();
        (q.transpose() * &q - DMatrix::identity(q.ncols(), q.ncols())).norm()
    }
}

/// Modified Gram-Schmidt with rank detection; returns orthonormal columns.
fn orthonormalize(cols: &[DVector<f64>], against: Option<&DMatrix<f64>>, tol: f64) -> DMatrix<f64> {
    let dim = cols.first().map(|c| c.len()).unwrap_or(0);
    let mut q: Vec<DVector<f64>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        if let Some(a) = against {
            for j in 0..a.ncols() {
                let col = a.column(j);
                let proj = col.dot(&v);
                v -= proj * DVector::from_column_slice(col.as_slice());
            }
        }
        for done in &q {
            let proj = done.dot(&v);
            v -= proj * done;
        }
        // second pass for numerical orthogonality
        if let Some(a) = against {
            for j in 0..a.ncols() {
                let col = a.column(j);
                let proj = col.dot(&v);
                v -= proj * DVector::from_column_slice(col.as_slice());
            }
        }
        for done in &q {
            let proj = done.dot(&v);
            v -= proj * done;
        }
        let norm = v.norm();
        if norm > tol {
            q.push(v / norm);
        }
    }
    if q.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&q)
    }
}

/// Certificate that the flow direction is not tangent to the group orbit.
#[derive(Debug, Clone, Copy)]
pub struct NonstationaryReport {
    pub nonstationary: bool,
    /// Norm of J grad H(z) after removing its projection onto the group directions.
    pub margin: f64,
}

/// Residual of J grad H(z) after orthogonal projection onto span{A_i z}.
pub fn is_g_nonstationary(model: &HamiltonianModel, z: &PhasePoint, tol: f64) -> NonstationaryReport {
    let xh = apply_j(&model.grad(z.coords()));
    let group = model.group();
    let gcols: Vec<DVector<f64>> = (0..group.dim())
        .map(|i| group.infinitesimal_action(i, z).expect("lie basis index"))
        .collect();
    let gq = orthonormalize(&gcols, None, 1e-12);
    let mut resid = xh.clone();
    for j in 0..gq.ncols() {
        let col = gq.column(j);
        let proj = col.dot(&resid);
        resid -= proj * DVector::from_column_slice(col.as_slice());
    }
    let margin = resid.norm();
    NonstationaryReport {
        nonstationary: margin > tol,
        margin,
    }
}

/// Build the orthonormal frame (J f_z, f_z, R) at z.
///
/// Preconditions: z lies on {mu = 0, H = E} within `tol` and the dynamics is
/// non-stationary there; a flow direction (numerically) inside the group span
/// is reported as a hypothesis violation.
pub fn tangent_frame(model: &HamiltonianModel, z: &PhasePoint, tol: f64) -> Result<TangentFrame> {
    let group = model.group();
    let mu = group.momentum_map(z).norm();
    let scale = 1.0 + z.coords().norm();
    if mu > tol * scale {
        return Err(EquiweylError::InvalidInput(format!(
            "point is not on the zero momentum level (|mu| = {mu:.3e})"
        )));
    }

    let orbit_dim = group.orbit_type(z, None).orbit_dim;
    let xh = apply_j(&model.grad(z.coords()));
    if xh.norm() < tol {
        return Err(EquiweylError::HypothesisViolation {
            hypothesis: "H2'".into(),
            detail: "stationary point of the flow".into(),
        });
    }

    let mut fcols = vec![xh.clone()];
    for i in 0..group.dim() {
        fcols.push(group.infinitesimal_action(i, z)?);
    }
    let rank_tol = 1e-9 * xh.norm().max(1.0);
    let basis_f = orthonormalize(&fcols, None, rank_tol);
    if basis_f.ncols() != 1 + orbit_dim {
        return Err(EquiweylError::HypothesisViolation {
            hypothesis: "H2'".into(),
            detail: format!(
                "flow direction lies in the group span (frame rank {} < {})",
                basis_f.ncols(),
                1 + orbit_dim
            ),
        });
    }

    let jf_cols: Vec<DVector<f64>> = (0..basis_f.ncols())
        .map(|j| apply_j(&basis_f.column(j).into_owned()))
        .collect();
    let basis_jf = orthonormalize(&jf_cols, Some(&basis_f), rank_tol);
    if basis_jf.ncols() != basis_f.ncols() {
        return Err(EquiweylError::HypothesisViolation {
            hypothesis: "H2'".into(),
            detail: "J-image of the frame is degenerate".into(),
        });
    }

    // remainder: orthogonal complement via SVD of the projector complement
    let n2 = 2 * model.n();
    let mut proj = DMatrix::identity(n2, n2);
    for blk in [&basis_f, &basis_jf] {
        proj -= blk * blk.transpose();
    }
    let svd = proj.svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let mut rcols = Vec::new();
    for j in 0..n2 {
        if svd.singular_values[j] > 0.5 {
            rcols.push(u.column(j).into_owned());
        }
    }
    let expected_r = n2 - 2 * basis_f.ncols();
    if rcols.len() != expected_r {
        return Err(EquiweylError::Numerical(format!(
            "remainder space has dimension {} (expected {expected_r})",
            rcols.len()
        )));
    }
    let basis_r = orthonormalize(&rcols, None, 1e-12);

    Ok(TangentFrame {
        basis_jf,
        basis_f,
        basis_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn span_contains(basis: &DMatrix<f64>, v: &DVector<f64>) -> bool {
        let mut r = v.clone();
        for j in 0..basis.ncols() {
            let col = basis.column(j);
            let proj = col.dot(&r);
            r -= proj * DVector::from_column_slice(col.as_slice());
        }
        r.norm() < 1e-9 * v.norm().max(1.0)
    }

    #[test]
    fn frame_at_planar_reference_point() {
        let model = models::aniso_ho_so2();
        let z0 = PhasePoint::from_parts(&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        let f = tangent_frame(&model, &z0, 1e-9).unwrap();
        assert_eq!(f.f_dim(), 2);
        assert_eq!(f.r_dim(), 2);
        assert!(f.orthonormality_defect() < 1e-12);

        let e = |i: usize| {
            let mut v = DVector::zeros(6);
            v[i] = 1.0;
            v
        };
        // f_z = span{e2, e4}, J f_z = span{e1, e5}, R = span{e3, e6}
        assert!(span_contains(&f.basis_f, &e(1)));
        assert!(span_contains(&f.basis_f, &e(3)));
        assert!(span_contains(&f.basis_jf, &e(0)));
        assert!(span_contains(&f.basis_jf, &e(4)));
        assert!(span_contains(&f.basis_r, &e(2)));
        assert!(span_contains(&f.basis_r, &e(5)));
    }

    #[test]
    fn frame_for_trivial_group_oscillator() {
        let model = models::iso_2d();
        let z = PhasePoint::from_parts(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        let f = tangent_frame(&model, &z, 1e-9).unwrap();
        assert_eq!(f.f_dim(), 1);
        assert_eq!(f.r_dim(), 2);
        assert!(span_contains(&f.basis_f, &apply_j(&model.grad(z.coords()))));
    }

    #[test]
    fn nonstationary_margins() {
        let model = models::aniso_ho_so2();
        // reference planar point is non-stationary
        let z0 = PhasePoint::from_parts(&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        let rep = is_g_nonstationary(&model, &z0, 1e-6);
        assert!(rep.nonstationary);
        assert!(rep.margin > 1.0);

        // the circular planar trajectory off the zero level has J grad H inside g z:
        // z* = (1/sqrt2, 0, 0, 0, pi sqrt2, 0)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zstar =
            PhasePoint::from_parts(&[s, 0.0, 0.0], &[0.0, std::f64::consts::PI * 2.0 * s, 0.0])
                .unwrap();
        assert!((model.energy(&zstar) - models::aniso_reference_energy()).abs() < 1e-10);
        assert!(model.group().momentum_map(&zstar).norm() > 0.1);
        let rep = is_g_nonstationary(&model, &zstar, 1e-6);
        assert!(!rep.nonstationary, "margin was {}", rep.margin);
        assert!(rep.margin < 1e-9);

        // frame construction at such a point must signal the violation
        // (zstar is not on Omega_0, so force the check through a stationary configuration)
        let err = tangent_frame(&model, &zstar, 1e-6);
        assert!(err.is_err());
    }
}
