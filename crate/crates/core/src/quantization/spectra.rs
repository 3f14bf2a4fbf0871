//! Reduced spectra, truncation-trust marking, and spectral trace sums.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{EquiweylError, Result};
use crate::group::ChiLabel;
use crate::quantization::basis::OperatorMatrix;

/// One spectral line.
#[derive(Debug, Clone)]
pub struct SpectralLine {
    pub value: f64,
    pub multiplicity: usize,
    pub trusted: bool,
}

/// Eigenvalues of a reduced operator inside a window, with trust flags
/// marking stability under basis-cutoff increase.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub h: f64,
    pub chi: ChiLabel,
    pub window: (f64, f64),
    pub lines: Vec<SpectralLine>,
    pub truncation_warning: bool,
}

impl SpectralData {
    /// Flat eigenvalue list with multiplicities expanded, ascending.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.lines {
            for _ in 0..l.multiplicity {
                out.push(l.value);
            }
        }
        out
    }

    /// Upper edge of the contiguous trusted range starting at the window bottom.
    pub fn trusted_upper_edge(&self) -> f64 {
        let mut edge = self.window.0;
        for l in &self.lines {
            if l.trusted {
                edge = l.value;
            } else {
                break;
            }
        }
        edge
    }

    /// Build from an analytic eigenvalue list; everything is trusted.
    pub fn from_oracle(
        h: f64,
        chi: ChiLabel,
        window: (f64, f64),
        eigs: Vec<(f64, usize)>,
    ) -> Self {
        SpectralData {
            h,
            chi,
            window,
            lines: eigs
                .into_iter()
                .map(|(value, multiplicity)| SpectralLine {
                    value,
                    multiplicity,
                    trusted: true,
                })
                .collect(),
            truncation_warning: false,
        }
    }
}

/// Cluster a sorted eigenvalue list into lines with multiplicities.
pub fn cluster_eigenvalues(sorted: &[f64], tol: f64) -> Vec<SpectralLine> {
    let mut lines: Vec<SpectralLine> = Vec::new();
    for &v in sorted {
        match lines.last_mut() {
            Some(last) if (v - last.value).abs() <= tol * (1.0 + v.abs()) => {
                // running mean keeps the cluster centered
                last.value =
                    (last.value * last.multiplicity as f64 + v) / (last.multiplicity + 1) as f64;
                last.multiplicity += 1;
            }
            _ => lines.push(SpectralLine {
                value: v,
                multiplicity: 1,
                trusted: false,
            }),
        }
    }
    lines
}

/// Eigenvalues of the operator restricted to the range of the projector,
/// inside the window. The operator must commute with the projector.
pub fn reduced_spectrum(
    hmat: &OperatorMatrix,
    projector: &DMatrix<Complex64>,
    window: (f64, f64),
    chi: ChiLabel,
) -> Result<SpectralData> {
    let comm = (&hmat.entries * projector - projector * &hmat.entries).norm();
    let scale = 1.0 + hmat.norm();
    if comm > 1e-8 * scale {
        return Err(EquiweylError::CommutatorViolation(format!(
            "|| [H, P] || = {comm:.3e}; symbol not invariant or basis not G-stable"
        )));
    }

    // orthonormal basis of range(P) from the Hermitian eigendecomposition
    let pe = projector.clone().symmetric_eigen();
    let mut cols = Vec::new();
    for (i, v) in pe.eigenvalues.iter().enumerate() {
        if *v > 0.5 {
            cols.push(pe.eigenvectors.column(i).into_owned());
        }
    }
    if cols.is_empty() {
        return Ok(SpectralData {
            h: hmat.h,
            chi,
            window,
            lines: Vec::new(),
            truncation_warning: false,
        });
    }
    let q = DMatrix::from_columns(&cols);
    let reduced = q.adjoint() * &hmat.entries * &q;
    let mut eigs: Vec<f64> = reduced.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    let in_window: Vec<f64> = eigs
        .into_iter()
        .filter(|v| *v >= window.0 && *v <= window.1)
        .collect();
    Ok(SpectralData {
        h: hmat.h,
        chi,
        window,
        lines: cluster_eigenvalues(&in_window, 1e-9),
        truncation_warning: false,
    })
}

/// Mark lines of `primary` trusted when a refined-cutoff computation
/// reproduces them to `rel_tol` relative accuracy.
pub fn mark_trusted(primary: &mut SpectralData, refined: &SpectralData, rel_tol: f64) {
    let a = primary.flat();
    let b = refined.flat();
    let mut flat_trust = vec![false; a.len()];
    for (i, v) in a.iter().enumerate() {
        if let Some(w) = b.get(i) {
            if (v - w).abs() <= rel_tol * (1.0 + v.abs()) {
                flat_trust[i] = true;
            }
        }
    }
    let mut pos = 0usize;
    let mut warn = false;
    for line in &mut primary.lines {
        let all = (0..line.multiplicity).all(|k| flat_trust.get(pos + k).copied().unwrap_or(false));
        line.trusted = all;
        if !all {
            warn = true;
        }
        pos += line.multiplicity;
    }
    primary.truncation_warning = warn;
}

/// Spectral trace sum_{trusted lines} multiplicity * f(lambda) for a test
/// function supported in `f_support`, which must stay inside the trusted window.
pub fn trace_f(
    spec: &SpectralData,
    f: &dyn Fn(f64) -> f64,
    f_support: (f64, f64),
) -> Result<f64> {
    let edge = spec.trusted_upper_edge();
    if f_support.0 < spec.window.0 || f_support.1 > edge {
        return Err(EquiweylError::TruncationBias {
            lo: f_support.0,
            hi: f_support.1,
            win_lo: spec.window.0,
            win_hi: edge,
        });
    }
    let mut acc = 0.0;
    let mut comp = 0.0;
    for l in &spec.lines {
        if !l.trusted {
            continue;
        }
        let y = l.multiplicity as f64 * f(l.value) - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CompactGroupAction;
    use crate::models;
    use crate::quantization::basis::{quantize, GalerkinBasis, Ordering};
    use crate::quantization::symmetry::isotypic_projector;
    use std::sync::Arc;

    #[test]
    fn clustering_merges_close_values() {
        let lines = cluster_eigenvalues(&[1.0, 1.0 + 1e-12, 2.0], 1e-9);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].multiplicity, 2);
    }

    #[test]
    fn reduced_spectrum_of_reference_sector() {
        let model = models::aniso_ho_so2();
        let h = 0.25;
        let n_max = 10;
        let basis = Arc::new(
            GalerkinBasis::adapted(model.symbol(), n_max).unwrap(),
        );
        let hm = quantize(model.symbol(), Ordering::Weyl, &basis, h).unwrap();
        let p = isotypic_projector(model.group(), &ChiLabel::Weight(0), &basis).unwrap();
        let window = (0.0, h * 60.0);
        let spec = reduced_spectrum(&hm, &p, window, ChiLabel::Weight(0)).unwrap();
        // compare the lowest few lines against the analytic oracle
        let oracle = model.spectrum_oracle().unwrap()(h, window, &ChiLabel::Weight(0)).unwrap();
        assert!(spec.lines.len() >= 4);
        for (line, (ev, mult)) in spec.lines.iter().take(4).zip(oracle.iter()) {
            assert!((line.value - ev).abs() < 1e-10 * (1.0 + ev.abs()));
            assert_eq!(line.multiplicity, *mult);
        }
    }

    #[test]
    fn union_of_sectors_is_full_spectrum() {
        let model = models::aniso_ho_so2();
        let h = 0.5;
        let n_max = 8;
        let basis = Arc::new(GalerkinBasis::adapted(model.symbol(), n_max).unwrap());
        let hm = quantize(model.symbol(), Ordering::Weyl, &basis, h).unwrap();
        // trusted window: stay well below the cutoff scale
        let window = (0.0, h * (models::ANISO_OMEGA1 * 4.0));
        let mut union: Vec<f64> = Vec::new();
        for m in -(n_max as i32)..=(n_max as i32) {
            let p = isotypic_projector(model.group(), &ChiLabel::Weight(m), &basis).unwrap();
            let spec = reduced_spectrum(&hm, &p, window, ChiLabel::Weight(m)).unwrap();
            union.extend(spec.flat());
        }
        union.sort_by(f64::total_cmp);
        let mut full: Vec<f64> = hm
            .entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .filter(|v| *v >= window.0 && *v <= window.1)
            .collect();
        full.sort_by(f64::total_cmp);
        assert_eq!(union.len(), full.len());
        for (a, b) in union.iter().zip(&full) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn commutator_violation_detected() {
        // a symbol that is not SO(2)-invariant must be rejected
        let g = CompactGroupAction::so2_plane(2, 0, 1).unwrap();
        let basis = Arc::new(GalerkinBasis::new(2, 6, vec![1.0, 1.0]).unwrap());
        let bad = crate::symbol::PolynomialSymbol::monomial(2, 1.0, &[1, 0], &[0, 0]).unwrap();
        let hm = quantize(&bad, Ordering::Weyl, &basis, 0.3).unwrap();
        let p = isotypic_projector(&g, &ChiLabel::Weight(0), &basis).unwrap();
        let r = reduced_spectrum(&hm, &p, (0.0, 10.0), ChiLabel::Weight(0));
        assert!(matches!(r, Err(EquiweylError::CommutatorViolation(_))));
    }

    #[test]
    fn trust_marking_and_trace() {
        let mut primary = SpectralData {
            h: 0.1,
            chi: ChiLabel::Weight(0),
            window: (0.0, 10.0),
            lines: cluster_eigenvalues(&[1.0, 2.0, 3.0, 9.0], 1e-9),
            truncation_warning: false,
        };
        let refined = SpectralData {
            h: 0.1,
            chi: ChiLabel::Weight(0),
            window: (0.0, 10.0),
            lines: cluster_eigenvalues(&[1.0, 2.0, 3.0 + 1e-3, 8.5], 1e-9),
            truncation_warning: false,
        };
        mark_trusted(&mut primary, &refined, 1e-8);
        assert!(primary.lines[0].trusted);
        assert!(primary.lines[1].trusted);
        assert!(!primary.lines[2].trusted);
        assert!(primary.truncation_warning);
        assert_eq!(primary.trusted_upper_edge(), 2.0);

        // trace over a bump supported in the trusted range
        let f = |x: f64| if (x - 1.0).abs() < 0.5 { 1.0 } else { 0.0 };
        let v = trace_f(&primary, &f, (0.5, 1.5)).unwrap();
        assert_eq!(v, 1.0);
        // support escaping the trusted window errors out
        assert!(matches!(
            trace_f(&primary, &f, (0.5, 5.0)),
            Err(EquiweylError::TruncationBias { .. })
        ));
        // zero function gives zero, additivity is linear in f
        let z = trace_f(&primary, &|_| 0.0, (0.5, 1.5)).unwrap();
        assert_eq!(z, 0.0);
    }
}
