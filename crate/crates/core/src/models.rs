//! Built-in model registry.
//!
//! `aniso-ho-so2` is the reference system used throughout the test suite: a
//! 3D harmonic oscillator with planar frequency 2*pi, axial frequency
//! 2*pi/sqrt(2), and SO(2) acting in the x1-x2 plane.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{HamiltonianModel, Omega0Chart};
use crate::error::{EquiweylError, Result};
use crate::group::{ChiLabel, CompactGroupAction, Subgroup};
use crate::symbol::{PolynomialSymbol, Term};

/// Planar frequency of the reference model.
pub const ANISO_OMEGA1: f64 = 2.0 * PI;
/// Axial frequency of the reference model.
pub const ANISO_OMEGA2: f64 = SQRT2_PI;
const SQRT2_PI: f64 = 4.442882938158366; // 2*pi/sqrt(2)

/// The energy used by the reference experiments, 2*pi^2.
pub fn aniso_reference_energy() -> f64 {
    2.0 * PI * PI
}

/// Registry ids of the built-in models.
pub fn registry_ids() -> Vec<&'static str> {
    vec!["aniso-ho-so2", "aniso-ho-trivial", "iso-2d"]
}

/// Documentation string per registry id.
pub fn describe(id: &str) -> Option<&'static str> {
    match id {
        "aniso-ho-so2" => Some(
            "3D harmonic oscillator, frequencies (2pi, 2pi, 2pi/sqrt2), SO(2) rotating the x1-x2 plane",
        ),
        "aniso-ho-trivial" => Some(
            "same oscillator with the trivial symmetry group; full-spectrum control",
        ),
        "iso-2d" => Some(
            "isotropic 2D oscillator with trivial group; resonant control whose orbits are degenerate",
        ),
        _ => None,
    }
}

/// Build a registry model by id.
pub fn build(id: &str) -> Result<HamiltonianModel> {
    match id {
        "aniso-ho-so2" => Ok(aniso_ho_so2()),
        "aniso-ho-trivial" => Ok(aniso_ho_trivial()),
        "iso-2d" => Ok(iso_2d()),
        _ => Err(EquiweylError::InvalidInput(format!("unknown model id {id}"))),
    }
}

fn ho_symbol(freqs: &[f64]) -> PolynomialSymbol {
    let n = freqs.len();
    let mut terms = Vec::new();
    for (i, w) in freqs.iter().enumerate() {
        let mut xp = vec![0u32; n];
        xp[i] = 2;
        terms.push(Term {
            coeff: 0.5 * w * w,
            x_pow: xp,
            xi_pow: vec![0; n],
        });
        let mut pp = vec![0u32; n];
        pp[i] = 2;
        terms.push(Term {
            coeff: 0.5,
            x_pow: vec![0; n],
            xi_pow: pp,
        });
    }
    PolynomialSymbol::new(n, terms).expect("harmonic symbol")
}

fn ho_box(freqs: &[f64]) -> Arc<dyn Fn(f64) -> Vec<(f64, f64)> + Send + Sync> {
    let freqs = freqs.to_vec();
    Arc::new(move |e: f64| {
        let r = (2.0 * e.max(0.0)).sqrt() * 1.1;
        let mut b: Vec<(f64, f64)> = freqs.iter().map(|w| (-r / w, r / w)).collect();
        b.extend(freqs.iter().map(|_| (-r, r)));
        b
    })
}

/// Closed-form flow of a diagonal harmonic oscillator: per-axis rotation with
/// frequency w_i in the (x_i, xi_i) plane; the linearization equals the flow.
fn ho_flow_oracle(freqs: &[f64]) -> crate::dynamics::FlowOracle {
    let freqs = freqs.to_vec();
    Arc::new(move |z: &DVector<f64>, t: f64| {
        let n = freqs.len();
        let mut zt = DVector::zeros(2 * n);
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (i, w) in freqs.iter().enumerate() {
            let (s, c) = (w * t).sin_cos();
            let (x, xi) = (z[i], z[n + i]);
            zt[i] = x * c + xi * s / w;
            zt[n + i] = xi * c - w * x * s;
            m[(i, i)] = c;
            m[(i, n + i)] = s / w;
            m[(n + i, i)] = -w * s;
            m[(n + i, n + i)] = c;
        }
        (zt, m)
    })
}

/// The reference model: two planar axes at frequency 2*pi, one axial axis at
/// 2*pi/sqrt(2), SO(2) rotating the plane. Its reduced eigenvalues are
/// h * (w1 (2k + |m| + 1) + w2 (n3 + 1/2)).
pub fn aniso_ho_so2() -> HamiltonianModel {
    let freqs = [ANISO_OMEGA1, ANISO_OMEGA1, ANISO_OMEGA2];
    let group = CompactGroupAction::so2_plane(3, 0, 1).expect("so2 group");
    let symbol = ho_symbol(&freqs);
    let model = HamiltonianModel::new(
        "aniso-ho-so2",
        symbol,
        group,
        Subgroup::Trivial,
        ho_box(&freqs),
    )
    .expect("model construction");

    let spectrum = Arc::new(
        move |h: f64, window: (f64, f64), chi: &ChiLabel| -> Option<Vec<(f64, usize)>> {
            let m = match chi {
                ChiLabel::Weight(m) => *m,
                ChiLabel::Named(_) => return None,
            };
            let (lo, hi) = window;
            let (w1, w2) = (ANISO_OMEGA1, ANISO_OMEGA2);
            let mut out = Vec::new();
            let mut k = 0u64;
            loop {
                let a = w1 * (2.0 * k as f64 + m.unsigned_abs() as f64 + 1.0);
                if h * (a + 0.5 * w2) > hi {
                    break;
                }
                // lo <= h (a + w2 (n3 + 1/2)) <= hi
                let nlo = ((lo / h - a) / w2 - 0.5).ceil().max(0.0) as u64;
                let nhi_f = (hi / h - a) / w2 - 0.5;
                if nhi_f >= 0.0 {
                    let nhi = nhi_f.floor() as u64;
                    for n3 in nlo..=nhi {
                        let lam = h * (a + w2 * (n3 as f64 + 0.5));
                        if lam >= lo && lam <= hi {
                            out.push((lam, 1usize));
                        }
                    }
                }
                k += 1;
            }
            out.sort_by(|x, y| x.0.total_cmp(&y.0));
            Some(out)
        },
    );

    // Energy-adapted chart of the zero level {(x1, x2, x3, l x1, l x2, xi3)}:
    // coordinates (rho, psi, a3) with planar radius r = rho cos(psi) / w1,
    // radial momentum u = rho sin(psi), and axial action a3; the rotation
    // angle and the axial phase are folded into the jacobian (2 pi each).
    // The measure on the level is sqrt(r^2 + u^2) dr dphi dx3 du dxi3.
    let chart = Omega0Chart {
        dim: 3,
        domain: Arc::new(|e: f64| {
            let rho_max = (2.0 * e.max(0.0)).sqrt();
            vec![
                (0.0, rho_max),
                (-0.5 * PI, 0.5 * PI),
                (0.0, e.max(0.0) / ANISO_OMEGA2),
            ]
        }),
        map: Arc::new(|u: &[f64]| {
            let (rho, psi, a3) = (u[0], u[1], u[2]);
            let r = rho * psi.cos() / ANISO_OMEGA1;
            let mom = rho * psi.sin();
            let x3 = (2.0 * a3 / ANISO_OMEGA2).sqrt();
            DVector::from_vec(vec![r, 0.0, x3, mom, 0.0, 0.0])
        }),
        jacobian: Arc::new(|u: &[f64]| {
            let (rho, psi) = (u[0], u[1]);
            let r = rho * psi.cos() / ANISO_OMEGA1;
            let mom = rho * psi.sin();
            4.0 * PI * PI * rho * (r * r + mom * mom).sqrt() / ANISO_OMEGA1
        }),
    };

    model
        .with_flow_oracle(ho_flow_oracle(&freqs))
        .with_spectrum_oracle(spectrum)
        .with_chart(chart)
}

/// Control model: the same oscillator with no symmetry imposed. The full
/// spectrum h (w1 (n1 + n2 + 1) + w2 (n3 + 1/2)) is enumerated with the planar
/// degeneracy s + 1 aggregated into multiplicities.
pub fn aniso_ho_trivial() -> HamiltonianModel {
    let freqs = [ANISO_OMEGA1, ANISO_OMEGA1, ANISO_OMEGA2];
    let group = CompactGroupAction::trivial(3);
    let model = HamiltonianModel::new(
        "aniso-ho-trivial",
        ho_symbol(&freqs),
        group,
        Subgroup::Full,
        ho_box(&freqs),
    )
    .expect("model construction");

    let spectrum = Arc::new(
        move |h: f64, window: (f64, f64), chi: &ChiLabel| -> Option<Vec<(f64, usize)>> {
            match chi {
                ChiLabel::Named(name) if name == "triv" => {}
                _ => return None,
            }
            let (lo, hi) = window;
            let (w1, w2) = (ANISO_OMEGA1, ANISO_OMEGA2);
            let mut out = Vec::new();
            let mut s = 0u64;
            loop {
                let a = w1 * (s as f64 + 1.0);
                if h * (a + 0.5 * w2) > hi {
                    break;
                }
                let nlo = ((lo / h - a) / w2 - 0.5).ceil().max(0.0) as u64;
                let nhi_f = (hi / h - a) / w2 - 0.5;
                if nhi_f >= 0.0 {
                    let nhi = nhi_f.floor() as u64;
                    for n3 in nlo..=nhi {
                        let lam = h * (a + w2 * (n3 as f64 + 0.5));
                        if lam >= lo && lam <= hi {
                            out.push((lam, (s + 1) as usize));
                        }
                    }
                }
                s += 1;
            }
            out.sort_by(|x, y| x.0.total_cmp(&y.0));
            Some(out)
        },
    );

    // Reg Omega_0 is all of phase space; per-axis action-angle coordinates
    // with the three angles folded into the jacobian (2 pi)^3.
    let chart = Omega0Chart {
        dim: 3,
        domain: Arc::new(|e: f64| {
            let em = e.max(0.0);
            vec![
                (0.0, em / ANISO_OMEGA1),
                (0.0, em / ANISO_OMEGA1),
                (0.0, em / ANISO_OMEGA2),
            ]
        }),
        map: Arc::new(|u: &[f64]| {
            let x1 = (2.0 * u[0] / ANISO_OMEGA1).sqrt();
            let x2 = (2.0 * u[1] / ANISO_OMEGA1).sqrt();
            let x3 = (2.0 * u[2] / ANISO_OMEGA2).sqrt();
            DVector::from_vec(vec![x1, x2, x3, 0.0, 0.0, 0.0])
        }),
        jacobian: Arc::new(|_| (2.0 * PI).powi(3)),
    };

    model
        .with_flow_oracle(ho_flow_oracle(&freqs))
        .with_spectrum_oracle(spectrum)
        .with_chart(chart)
}

/// Degenerate control: the 1:1 resonant 2D oscillator. Every orbit at the full
/// period has a unit-eigenvalue transversal block.
pub fn iso_2d() -> HamiltonianModel {
    let freqs = [1.0, 1.0];
    let group = CompactGroupAction::trivial(2);
    HamiltonianModel::new(
        "iso-2d",
        ho_symbol(&freqs),
        group,
        Subgroup::Full,
        ho_box(&freqs),
    )
    .expect("model construction")
    .with_flow_oracle(ho_flow_oracle(&freqs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn reference_model_is_invariant_and_bounded() {
        let m = aniso_ho_so2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        m.validate_invariance(&mut rng, 64, 1e-10).unwrap();
        m.validate_window_compactness((10.0, 30.0), 1.0).unwrap();
    }

    #[test]
    fn reference_spectrum_oracle_small_h() {
        let m = aniso_ho_so2();
        let oracle = m.spectrum_oracle().unwrap();
        // ground state of the m = 0 sector: h (w1 + w2 / 2)
        let h = 0.25;
        let eigs = oracle(h, (0.0, 10.0), &ChiLabel::Weight(0)).unwrap();
        let expect = h * (ANISO_OMEGA1 + 0.5 * ANISO_OMEGA2);
        assert!((eigs[0].0 - expect).abs() < 1e-12);
        // all listed eigenvalues fall inside the window and are sorted
        for w in eigs.windows(2) {
            assert!(w[0].0 <= w[1].0);
        }
        // unsupported label
        assert!(oracle(h, (0.0, 10.0), &ChiLabel::Named("x".into())).is_none());
    }

    #[test]
    fn trivial_spectrum_counts_degeneracy() {
        let m = aniso_ho_trivial();
        let oracle = m.spectrum_oracle().unwrap();
        let h = 1.0;
        // states with planar quantum number s have multiplicity s + 1
        let eigs = oracle(h, (0.0, 40.0), &ChiLabel::Named("triv".into())).unwrap();
        let first = eigs
            .iter()
            .find(|(lam, _)| (lam - (ANISO_OMEGA1 * 2.0 + ANISO_OMEGA2 * 0.5)).abs() < 1e-9)
            .expect("s=1 state present");
        assert_eq!(first.1, 2);
    }

    #[test]
    fn chart_points_lie_on_zero_level() {
        let m = aniso_ho_so2();
        let chart = m.chart().unwrap().clone();
        let dom = (chart.domain)(25.0);
        assert_eq!(dom.len(), 3);
        let u = [2.4, -0.3, 1.7];
        let z = (chart.map)(&u);
        let p = crate::dynamics::PhasePoint::from_vector(z).unwrap();
        assert!(m.group().momentum_map(&p).norm() < 1e-12);
        // energy in chart coordinates: rho^2/2 + w2 a3
        let expect = 0.5 * u[0] * u[0] + ANISO_OMEGA2 * u[2];
        assert!((m.energy(&p) - expect).abs() < 1e-10);
    }
}
