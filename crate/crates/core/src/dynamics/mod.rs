//! Classical dynamics: Hamilton flow with variational equations, tangent
//! frames on the reduced constraint set, and relative periodic orbits.

pub mod frame;
pub mod integrator;
pub mod orbits;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{EquiweylError, Result};
use crate::group::{apply_j, j_matrix, ChiLabel, CompactGroupAction, Subgroup};
use crate::symbol::PolynomialSymbol;

pub use frame::{is_g_nonstationary, tangent_frame, NonstationaryReport, TangentFrame};
pub use integrator::FlowStats;
pub use orbits::{
    action_integral, find_relative_periodic_orbits, is_g_nondegenerate, monodromy_blocks,
    quadrature_along_flow, MonodromyBlocks, NondegeneracyReport, OrbitSearchConfig,
    RelativePeriodicOrbit,
};

/// A point z = (x, xi) in phase space R^{2n}.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    z: DVector<f64>,
}

impl PhasePoint {
    pub fn from_vector(z: DVector<f64>) -> Result<Self> {
        if z.len() % 2 != 0 {
            return Err(EquiweylError::DimensionMismatch {
                expected: z.len() + 1,
                got: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(EquiweylError::InvalidInput("phase point has non-finite entries".into()));
        }
        Ok(Self { z })
    }

    pub fn from_parts(x: &[f64], xi: &[f64]) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(EquiweylError::DimensionMismatch {
                expected: x.len(),
                got: xi.len(),
            });
        }
        let mut v = Vec::with_capacity(2 * x.len());
        v.extend_from_slice(x);
        v.extend_from_slice(xi);
        Self::from_vector(DVector::from_vec(v))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            z: DVector::zeros(2 * n),
        }
    }

    /// Spatial dimension n.
    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.z
    }

    pub fn x(&self) -> DVector<f64> {
        self.z.rows(0, self.n()).into_owned()
    }

    pub fn xi(&self) -> DVector<f64> {
        self.z.rows(self.n(), self.n()).into_owned()
    }
}

/// Closed-form flow oracle: (z, t) -> (z_t, M_t).
pub type FlowOracle = Arc<dyn Fn(&DVector<f64>, f64) -> (DVector<f64>, DMatrix<f64>) + Send + Sync>;

/// Eigenvalue generator: (h, window, chi) -> (eigenvalue, multiplicity) pairs,
/// or None when the label is not supported by the oracle.
pub type SpectrumOracle =
    Arc<dyn Fn(f64, (f64, f64), &ChiLabel) -> Option<Vec<(f64, usize)>> + Send + Sync>;

/// Explicit parametrization of the regular part of the zero momentum level,
/// with its metric volume factor.
#[derive(Clone)]
pub struct Omega0Chart {
    pub dim: usize,
    /// Integration box as a function of the largest energy of interest.
    pub domain: Arc<dyn Fn(f64) -> Vec<(f64, f64)> + Send + Sync>,
    /// Chart map u -> z in R^{2n}.
    pub map: Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>,
    /// Metric factor sqrt(det(Dpsi^T Dpsi)), including any folded-out fiber volume.
    pub jacobian: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

/// A polynomial Hamiltonian with its invariance group and optional oracles.
#[derive(Clone)]
pub struct HamiltonianModel {
    name: String,
    symbol: PolynomialSymbol,
    group: CompactGroupAction,
    flow_oracle: Option<FlowOracle>,
    spectrum_oracle: Option<SpectrumOracle>,
    chart: Option<Omega0Chart>,
    principal_stabilizer: Subgroup,
    sample_box: Arc<dyn Fn(f64) -> Vec<(f64, f64)> + Send + Sync>,
}

impl HamiltonianModel {
    pub fn new(
        name: impl Into<String>,
        symbol: PolynomialSymbol,
        group: CompactGroupAction,
        principal_stabilizer: Subgroup,
        sample_box: Arc<dyn Fn(f64) -> Vec<(f64, f64)> + Send + Sync>,
    ) -> Result<Self> {
        if symbol.n() != group.n() {
            return Err(EquiweylError::DimensionMismatch {
                expected: group.n(),
                got: symbol.n(),
            });
        }
        Ok(Self {
            name: name.into(),
            symbol,
            group,
            flow_oracle: None,
            spectrum_oracle: None,
            chart: None,
            principal_stabilizer,
            sample_box,
        })
    }

    pub fn with_flow_oracle(mut self, oracle: FlowOracle) -> Self {
        self.flow_oracle = Some(oracle);
        self
    }

    pub fn with_spectrum_oracle(mut self, oracle: SpectrumOracle) -> Self {
        self.spectrum_oracle = Some(oracle);
        self
    }

    pub fn with_chart(mut self, chart: Omega0Chart) -> Self {
        self.chart = Some(chart);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.symbol.n()
    }

    pub fn symbol(&self) -> &PolynomialSymbol {
        &self.symbol
    }

    pub fn group(&self) -> &CompactGroupAction {
        &self.group
    }

    pub fn chart(&self) -> Option<&Omega0Chart> {
        self.chart.as_ref()
    }

    pub fn spectrum_oracle(&self) -> Option<&SpectrumOracle> {
        self.spectrum_oracle.as_ref()
    }

    pub fn has_flow_oracle(&self) -> bool {
        self.flow_oracle.is_some()
    }

    pub fn principal_stabilizer(&self) -> &Subgroup {
        &self.principal_stabilizer
    }

    /// Sampling box covering H <= e_max, as (lo, hi) per phase coordinate.
    pub fn sample_box(&self, e_max: f64) -> Vec<(f64, f64)> {
        (self.sample_box)(e_max)
    }

    pub fn energy(&self, z: &PhasePoint) -> f64 {
        self.symbol.eval(z.coords())
    }

    pub fn grad(&self, z: &DVector<f64>) -> DVector<f64> {
        self.symbol.grad(z)
    }

    /// The Hamilton vector field J grad H.
    pub fn vector_field(&self, z: &DVector<f64>) -> DVector<f64> {
        apply_j(&self.symbol.grad(z))
    }

    /// Fast evolution used by inner loops: analytic oracle when present,
    /// otherwise the adaptive integrator at a tight tolerance.
    pub fn evolve(&self, z: &DVector<f64>, t: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        if let Some(oracle) = &self.flow_oracle {
            return Ok(oracle(z, t));
        }
        let res = flow(
            self,
            &PhasePoint::from_vector(z.clone())?,
            t,
            1e-12,
        )?;
        Ok((res.z_t.coords().clone(), res.m_t))
    }

    /// Evolve the point alone, without the variational matrix.
    pub fn evolve_point(&self, z: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        if let Some(oracle) = &self.flow_oracle {
            return Ok(oracle(z, t).0);
        }
        let rhs = |y: &DVector<f64>, dy: &mut DVector<f64>| {
            let v = self.vector_field(y);
            dy.copy_from(&v);
        };
        let (y, _) = integrator::integrate_adaptive(rhs, z.clone(), t, 1e-12)?;
        Ok(y)
    }

    /// Check G-invariance of the symbol on random samples.
    pub fn validate_invariance(&self, rng: &mut impl Rng, samples: usize, tol: f64) -> Result<()> {
        for _ in 0..samples {
            let z = PhasePoint::from_vector(DVector::from_fn(2 * self.n(), |_, _| {
                rng.random_range(-1.0..1.0)
            }))?;
            let g = self.group.random_element(rng);
            let gz = self.group.act(&g, &z)?;
            let d = (self.energy(&gz) - self.energy(&z)).abs();
            if d > tol * (1.0 + self.energy(&z).abs()) {
                return Err(EquiweylError::InvalidInput(format!(
                    "symbol is not G-invariant (defect {d:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// Check that H^{-1}([e1 - eps, e2 + eps]) stays inside the sampling box:
    /// the symbol must exceed e2 + eps on the box boundary.
    pub fn validate_window_compactness(&self, window: (f64, f64), eps: f64) -> Result<()> {
        let bx = self.sample_box(window.1 + eps);
        let dim = 2 * self.n();
        let steps = 6usize;
        for face in 0..dim {
            for side in 0..2 {
                // sample a grid on this face
                let mut idx = vec![0usize; dim];
                loop {
                    let mut z = DVector::zeros(dim);
                    for d in 0..dim {
                        let (lo, hi) = bx[d];
                        z[d] = if d == face {
                            if side == 0 {
                                lo
                            } else {
                                hi
                            }
                        } else {
                            lo + (hi - lo) * idx[d] as f64 / (steps - 1) as f64
                        };
                    }
                    if self.symbol.eval(&z) <= window.1 + eps {
                        return Err(EquiweylError::InvalidInput(format!(
                            "sublevel set H <= {} touches the sampling box boundary",
                            window.1 + eps
                        )));
                    }
                    // advance the mixed-radix counter, skipping the fixed face
                    let mut d = 0;
                    loop {
                        if d == face {
                            d += 1;
                            if d >= dim {
                                break;
                            }
                        }
                        if d >= dim {
                            break;
                        }
                        idx[d] += 1;
                        if idx[d] < steps {
                            break;
                        }
                        idx[d] = 0;
                        d += 1;
                    }
                    if d >= dim {
                        break;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Result of integrating the Hamilton flow with its linearization.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub z_t: PhasePoint,
    pub m_t: DMatrix<f64>,
    pub stats: FlowStats,
    pub accumulators: Vec<f64>,
}

impl FlowResult {
    /// The n x n blocks of M_t = [[A, B], [C, D]].
    pub fn blocks(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let n = self.z_t.n();
        (
            self.m_t.view((0, 0), (n, n)).into_owned(),
            self.m_t.view((0, n), (n, n)).into_owned(),
            self.m_t.view((n, 0), (n, n)).into_owned(),
            self.m_t.view((n, n), (n, n)).into_owned(),
        )
    }

    /// || M^T J M - J ||.
    pub fn symplectic_defect(&self) -> f64 {
        let n = self.z_t.n();
        let j = j_matrix(n);
        (self.m_t.transpose() * &j * &self.m_t - j).norm()
    }
}

/// Integrate the Hamilton flow z' = J grad H together with the variational
/// equation M' = J Hess H(z) M from time 0 to t.
pub fn flow(model: &HamiltonianModel, z0: &PhasePoint, t: f64, tol: f64) -> Result<FlowResult> {
    flow_with_functionals(model, z0, t, tol, &[])
}

/// Path functional integrated along the trajectory: f(z, zdot) -> scalar rate.
pub type PathFunctional<'a> = &'a (dyn Fn(&DVector<f64>, &DVector<f64>) -> f64 + Sync);

/// [`flow`] with extra quadrature accumulators along the trajectory.
pub fn flow_with_functionals(
    model: &HamiltonianModel,
    z0: &PhasePoint,
    t: f64,
    tol: f64,
    functionals: &[PathFunctional<'_>],
) -> Result<FlowResult> {
    if z0.n() != model.n() {
        return Err(EquiweylError::DimensionMismatch {
            expected: model.n(),
            got: z0.n(),
        });
    }
    let d = 2 * model.n();
    let n = model.n();
    let n_acc = functionals.len();
    let y0 = integrator::pack_state(
        z0.coords(),
        &DMatrix::identity(d, d),
        &vec![0.0; n_acc],
    );

    let rhs = |y: &DVector<f64>, dy: &mut DVector<f64>| {
        let z = y.rows(0, d).into_owned();
        let grad = model.symbol.grad(&z);
        let zdot = apply_j(&grad);
        for i in 0..d {
            dy[i] = zdot[i];
        }
        // M' = (J Hess) M, with J Hess applied row-blockwise:
        // (J B) rows 0..n are B rows n..2n; rows n..2n are -B rows 0..n
        let hess = model.symbol.hess(&z);
        for c in 0..d {
            let mcol = y.rows(d + c * d, d);
            for r in 0..n {
                let mut acc_top = 0.0;
                let mut acc_bot = 0.0;
                for k in 0..d {
                    acc_top += hess[(n + r, k)] * mcol[k];
                    acc_bot -= hess[(r, k)] * mcol[k];
                }
                dy[d + c * d + r] = acc_top;
                dy[d + c * d + n + r] = acc_bot;
            }
        }
        for (i, f) in functionals.iter().enumerate() {
            dy[d + d * d + i] = f(&z, &zdot);
        }
    };

    let (y_end, stats) = integrator::integrate_adaptive(rhs, y0, t, tol)?;
    let (z_end, m_end, acc) = integrator::unpack_state(&y_end, d, n_acc);
    let z_t = PhasePoint::from_vector(z_end)
        .map_err(|_| EquiweylError::IntegrationFailure("non-finite state at end of flow".into()))?;

    // local errors of size ~tol can accumulate linearly in the step count
    let drift = (model.energy(&z_t) - model.energy(z0)).abs();
    let scale = (1.0 + model.energy(z0).abs()) * (1.0 + stats.steps as f64);
    if drift > 10.0 * tol * scale {
        return Err(EquiweylError::EnergyDrift {
            drift,
            tol: tol * scale,
            t,
        });
    }

    Ok(FlowResult {
        z_t,
        m_t: m_end,
        stats,
        accumulators: acc,
    })
}
