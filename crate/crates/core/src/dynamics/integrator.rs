//! Embedded Dormand-Prince 5(4) integrator with adaptive step control.
//!
//! Integrates the Hamilton flow jointly with the variational equation
//! dM/dt = J Hess H(z) M and optional path functionals d a_k/dt = f_k(z, zdot).

use nalgebra::{DMatrix, DVector};

use crate::error::{EquiweylError, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fourth-order weights for the error estimate
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// Integration statistics.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlowStats {
    pub steps: usize,
    pub rejected: usize,
    pub max_local_error: f64,
}

/// Integrate dy/dt = rhs(y) from 0 to t with local error control.
///
/// Returns the final state and statistics. `tol` is used as both absolute
/// and relative tolerance in a mixed RMS error norm.
pub fn integrate_adaptive<F>(rhs: F, y0: DVector<f64>, t_end: f64, tol: f64) -> Result<(DVector<f64>, FlowStats)>
where
    F: Fn(&DVector<f64>, &mut DVector<f64>),
{
    if !(tol > 0.0) {
        return Err(EquiweylError::InvalidInput("tolerance must be positive".into()));
    }
    if !t_end.is_finite() {
        return Err(EquiweylError::InvalidInput("integration time must be finite".into()));
    }
    let dim = y0.len();
    let mut y = y0;
    let mut t = 0.0_f64;
    let mut stats = FlowStats::default();
    if t_end == 0.0 {
        return Ok((y, stats));
    }
    let dir = t_end.signum();
    let mut h = (0.01 * t_end.abs()).min(0.1).max(1e-6) * dir;

    let mut k1 = DVector::zeros(dim);
    let mut k2 = DVector::zeros(dim);
    let mut k3 = DVector::zeros(dim);
    let mut k4 = DVector::zeros(dim);
    let mut k5 = DVector::zeros(dim);
    let mut k6 = DVector::zeros(dim);
    let mut k7 = DVector::zeros(dim);
    let mut ytmp = DVector::zeros(dim);

    rhs(&y, &mut k1);
    let max_steps = 2_000_000usize;

    while (t_end - t) * dir > 0.0 {
        if stats.steps + stats.rejected > max_steps {
            return Err(EquiweylError::IntegrationFailure(format!(
                "step budget exceeded at t={t}"
            )));
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * t_end.abs().max(1.0) {
            return Err(EquiweylError::IntegrationFailure(format!(
                "step size underflow at t={t}"
            )));
        }

        ytmp.copy_from(&y);
        ytmp.axpy(h * A21, &k1, 1.0);
        rhs(&ytmp, &mut k2);

        ytmp.copy_from(&y);
        ytmp.axpy(h * A31, &k1, 1.0);
        ytmp.axpy(h * A32, &k2, 1.0);
        rhs(&ytmp, &mut k3);

        ytmp.copy_from(&y);
        ytmp.axpy(h * A41, &k1, 1.0);
        ytmp.axpy(h * A42, &k2, 1.0);
        ytmp.axpy(h * A43, &k3, 1.0);
        rhs(&ytmp, &mut k4);

        ytmp.copy_from(&y);
        ytmp.axpy(h * A51, &k1, 1.0);
        ytmp.axpy(h * A52, &k2, 1.0);
        ytmp.axpy(h * A53, &k3, 1.0);
        ytmp.axpy(h * A54, &k4, 1.0);
        rhs(&ytmp, &mut k5);

        ytmp.copy_from(&y);
        ytmp.axpy(h * A61, &k1, 1.0);
        ytmp.axpy(h * A62, &k2, 1.0);
        ytmp.axpy(h * A63, &k3, 1.0);
        ytmp.axpy(h * A64, &k4, 1.0);
        ytmp.axpy(h * A65, &k5, 1.0);
        rhs(&ytmp, &mut k6);

        // fifth-order solution (k7 = rhs at the new point, FSAL)
        ytmp.copy_from(&y);
        ytmp.axpy(h * B1, &k1, 1.0);
        ytmp.axpy(h * B3, &k3, 1.0);
        ytmp.axpy(h * B4, &k4, 1.0);
        ytmp.axpy(h * B5, &k5, 1.0);
        ytmp.axpy(h * B6, &k6, 1.0);
        rhs(&ytmp, &mut k7);

        // error = y5 - y4
        let mut err_rms = 0.0;
        for i in 0..dim {
            let y4_i = y[i]
                + h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let e = ytmp[i] - y4_i;
            let scale = tol + tol * y[i].abs().max(ytmp[i].abs());
            let r = e / scale;
            err_rms += r * r;
        }
        err_rms = (err_rms / dim as f64).sqrt();

        if err_rms <= 1.0 {
            t += h;
            y.copy_from(&ytmp);
            k1.copy_from(&k7);
            stats.steps += 1;
            stats.max_local_error = stats.max_local_error.max(err_rms * tol);
        } else {
            stats.rejected += 1;
        }
        let factor = if err_rms > 0.0 {
            (0.9 * err_rms.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok((y, stats))
}

/// Pack (z, M, accumulators) into one flat state vector, column-major M.
pub fn pack_state(z: &DVector<f64>, m: &DMatrix<f64>, acc: &[f64]) -> DVector<f64> {
    let d = z.len();
    let mut y = DVector::zeros(d + d * d + acc.len());
    y.rows_mut(0, d).copy_from(z);
    for c in 0..d {
        for r in 0..d {
            y[d + c * d + r] = m[(r, c)];
        }
    }
    for (i, a) in acc.iter().enumerate() {
        y[d + d * d + i] = *a;
    }
    y
}

/// Inverse of [`pack_state`].
pub fn unpack_state(y: &DVector<f64>, d: usize, n_acc: usize) -> (DVector<f64>, DMatrix<f64>, Vec<f64>) {
    let z = y.rows(0, d).into_owned();
    let mut m = DMatrix::zeros(d, d);
    for c in 0..d {
        for r in 0..d {
            m[(r, c)] = y[d + c * d + r];
        }
    }
    let acc = (0..n_acc).map(|i| y[d + d * d + i]).collect();
    (z, m, acc)
}
