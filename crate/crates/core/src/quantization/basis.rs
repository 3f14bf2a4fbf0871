//! Tensor Hermite Galerkin basis and exact ladder-operator quantization of
//! polynomial symbols.
//!
//! Basis functions are eigenfunctions of the reference oscillator
//! sum_j nu_j^2 x_j^2 + xi_j^2 at the working h. Position and momentum act as
//! x = sqrt(h/2nu)(a + a*), xi = i sqrt(h nu / 2)(a* - a), so matrix elements
//! of any monomial are exact up to floating roundoff.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{EquiweylError, Result};
use crate::symbol::{ComplexPolynomial, PolynomialSymbol};

/// Quantization orderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// Symmetric ordering: real symbols give Hermitian matrices.
    Weyl,
    /// All position factors to the left of all momentum factors.
    Standard,
}

/// Truncated tensor Hermite basis with total degree <= n_max.
#[derive(Debug, Clone)]
pub struct GalerkinBasis {
    n: usize,
    n_max: u32,
    ref_freq: Vec<f64>,
    indices: Vec<Vec<u32>>,
}

fn enumerate_graded(n: usize, n_max: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    for total in 0..=n_max {
        fn rec(cur: &mut Vec<u32>, axis: usize, left: u32, out: &mut Vec<Vec<u32>>) {
            if axis + 1 == cur.len() {
                cur[axis] = left;
                out.push(cur.clone());
                return;
            }
            for k in (0..=left).rev() {
                cur[axis] = k;
                rec(cur, axis + 1, left - k, out);
            }
        }
        rec(&mut cur, 0, total, &mut out);
    }
    out
}

impl GalerkinBasis {
    pub fn new(n: usize, n_max: u32, ref_freq: Vec<f64>) -> Result<Self> {
        if ref_freq.len() != n {
            return Err(EquiweylError::DimensionMismatch {
                expected: n,
                got: ref_freq.len(),
            });
        }
        if ref_freq.iter().any(|v| !(*v > 0.0)) {
            return Err(EquiweylError::InvalidInput(
                "reference frequencies must be positive".into(),
            ));
        }
        Ok(Self {
            n,
            n_max,
            ref_freq,
            indices: enumerate_graded(n, n_max),
        })
    }

    /// Reference frequencies from the positive-definite quadratic part of a
    /// symbol: nu_j = sqrt(c_{x_j^2} / c_{xi_j^2}).
    pub fn adapted(symbol: &PolynomialSymbol, n_max: u32) -> Result<Self> {
        let n = symbol.n();
        let mut cx = vec![0.0; n];
        let mut cp = vec![0.0; n];
        for t in symbol.terms() {
            let deg: u32 = t.x_pow.iter().sum::<u32>() + t.xi_pow.iter().sum::<u32>();
            if deg != 2 {
                continue;
            }
            for j in 0..n {
                if t.x_pow[j] == 2 {
                    cx[j] += t.coeff;
                }
                if t.xi_pow[j] == 2 {
                    cp[j] += t.coeff;
                }
            }
        }
        let mut freq = Vec::with_capacity(n);
        for j in 0..n {
            if cx[j] > 0.0 && cp[j] > 0.0 {
                freq.push((cx[j] / cp[j]).sqrt());
            } else {
                return Err(EquiweylError::InvalidInput(
                    "quadratic part is not positive definite; supply reference frequencies".into(),
                ));
            }
        }
        Self::new(n, n_max, freq)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn ref_freq(&self) -> &[f64] {
        &self.ref_freq
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn index_of(&self, multi: &[u32]) -> Option<usize> {
        self.indices.iter().position(|i| i == multi)
    }
}

/// 1D ladder matrices for one axis at working dimension `dim`.
pub struct AxisOperators {
    pub x: DMatrix<Complex64>,
    pub xi: DMatrix<Complex64>,
}

pub fn axis_operators(dim: usize, nu: f64, h: f64) -> AxisOperators {
    let zero = Complex64::new(0.0, 0.0);
    let mut a = DMatrix::from_element(dim, dim, zero);
    for k in 1..dim {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    let cx = Complex64::new((h / (2.0 * nu)).sqrt(), 0.0);
    let cp = Complex64::new(0.0, (h * nu / 2.0).sqrt());
    AxisOperators {
        x: (&a + &adag) * cx,
        xi: (&adag - &a) * cp,
    }
}

/// Ordered operator for the monomial x^alpha xi^beta on one axis.
///
/// Weyl ordering uses the symmetrization
/// 2^{-alpha} sum_r C(alpha, r) x^r xi^beta x^{alpha - r}.
pub fn ordered_axis_matrix(
    ops: &AxisOperators,
    alpha: u32,
    beta: u32,
    ordering: Ordering,
) -> DMatrix<Complex64> {
    let dim = ops.x.nrows();
    let id = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0, 0.0));
    let mut x_pows = vec![id.clone()];
    for _ in 0..alpha {
        let last = x_pows.last().unwrap() * &ops.x;
        x_pows.push(last);
    }
    let mut xi_pow = id.clone();
    for _ in 0..beta {
        xi_pow = &xi_pow * &ops.xi;
    }
    match ordering {
        Ordering::Standard => &x_pows[alpha as usize] * &xi_pow,
        Ordering::Weyl => {
            let mut acc = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
            let mut binom = 1.0f64;
            for r in 0..=alpha {
                if r > 0 {
                    binom = binom * (alpha - r + 1) as f64 / r as f64;
                }
                acc += (&x_pows[r as usize] * &xi_pow * &x_pows[(alpha - r) as usize])
                    * Complex64::new(binom, 0.0);
            }
            acc * Complex64::new(0.5f64.powi(alpha as i32), 0.0)
        }
    }
}

/// A quantized operator in a Galerkin basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub h: f64,
    pub entries: DMatrix<Complex64>,
    pub basis: Arc<GalerkinBasis>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// || M - M* ||.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).norm()
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Quantize a complex-coefficient polynomial (the general entry point; real
/// symbols delegate here).
pub fn quantize_complex(
    symbol: &ComplexPolynomial,
    ordering: Ordering,
    basis: &Arc<GalerkinBasis>,
    h: f64,
) -> Result<OperatorMatrix> {
    if !(h > 0.0) {
        return Err(EquiweylError::InvalidInput("h must be positive".into()));
    }
    if symbol.n != basis.n() {
        return Err(EquiweylError::DimensionMismatch {
            expected: basis.n(),
            got: symbol.n,
        });
    }
    let n = basis.n();
    let size = basis.size();
    let d_target = basis.n_max() as usize + 1;
    let mut acc = DMatrix::from_element(size, size, Complex64::new(0.0, 0.0));

    for (coeff, x_pow, xi_pow) in &symbol.terms {
        // per-axis ordered matrices, exact in a padded working dimension
        let mut axis_mats: Vec<Option<DMatrix<Complex64>>> = Vec::with_capacity(n);
        for j in 0..n {
            let (a, b) = (x_pow[j], xi_pow[j]);
            if a == 0 && b == 0 {
                axis_mats.push(None);
                continue;
            }
            let work = d_target + (a + b) as usize;
            let ops = axis_operators(work, basis.ref_freq()[j], h);
            let full = ordered_axis_matrix(&ops, a, b, ordering);
            axis_mats.push(Some(full.view((0, 0), (d_target, d_target)).into_owned()));
        }
        for (r, ri) in basis.indices().iter().enumerate() {
            for (c, ci) in basis.indices().iter().enumerate() {
                let mut v = Complex64::new(1.0, 0.0);
                let mut nonzero = true;
                for j in 0..n {
                    match &axis_mats[j] {
                        Some(m) => {
                            let e = m[(ri[j] as usize, ci[j] as usize)];
                            if e.norm_sqr() == 0.0 {
                                nonzero = false;
                                break;
                            }
                            v *= e;
                        }
                        None => {
                            if ri[j] != ci[j] {
                                nonzero = false;
                                break;
                            }
                        }
                    }
                }
                if nonzero {
                    acc[(r, c)] += coeff * v;
                }
            }
        }
    }

    Ok(OperatorMatrix {
        h,
        entries: acc,
        basis: Arc::clone(basis),
    })
}

/// Quantize a real polynomial symbol.
pub fn quantize(
    symbol: &PolynomialSymbol,
    ordering: Ordering,
    basis: &Arc<GalerkinBasis>,
    h: f64,
) -> Result<OperatorMatrix> {
    quantize_complex(&symbol.to_complex(), ordering, basis, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Term;
    use approx::assert_relative_eq;

    fn basis_1d(n_max: u32, nu: f64) -> Arc<GalerkinBasis> {
        Arc::new(GalerkinBasis::new(1, n_max, vec![nu]).unwrap())
    }

    #[test]
    fn graded_enumeration_size() {
        let b = GalerkinBasis::new(3, 12, vec![1.0, 1.0, 1.0]).unwrap();
        // C(15, 3)
        assert_eq!(b.size(), 455);
        assert_eq!(b.indices()[0], vec![0, 0, 0]);
        // graded: total degree never decreases
        let mut prev = 0;
        for idx in b.indices() {
            let tot: u32 = idx.iter().sum();
            assert!(tot >= prev);
            prev = tot;
        }
    }

    #[test]
    fn constant_symbol_gives_identity() {
        let b = basis_1d(8, 1.0);
        let s = PolynomialSymbol::monomial(1, 1.0, &[0], &[0]).unwrap();
        let m = quantize(&s, Ordering::Weyl, &b, 0.25).unwrap();
        let id = DMatrix::from_diagonal_element(9, 9, Complex64::new(1.0, 0.0));
        assert!((m.entries - id).norm() < 1e-14);
    }

    #[test]
    fn matched_oscillator_is_diagonal() {
        // symbol xi^2 + omega^2 x^2 with matched reference frequency:
        // diagonal entries h omega (2k + 1)
        let omega = 3.0;
        let h = 0.125;
        let b = basis_1d(10, omega);
        let s = PolynomialSymbol::new(
            1,
            vec![
                Term {
                    coeff: omega * omega,
                    x_pow: vec![2],
                    xi_pow: vec![0],
                },
                Term {
                    coeff: 1.0,
                    x_pow: vec![0],
                    xi_pow: vec![2],
                },
            ],
        )
        .unwrap();
        let m = quantize(&s, Ordering::Weyl, &b, h).unwrap();
        for r in 0..m.dim() {
            for c in 0..m.dim() {
                let expect = if r == c {
                    Complex64::new(h * omega * (2.0 * r as f64 + 1.0), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!(
                    (m.entries[(r, c)] - expect).norm() < 1e-12,
                    "entry ({r},{c}) = {}",
                    m.entries[(r, c)]
                );
            }
        }
        assert!(m.hermiticity_defect() < 1e-13);
    }

    #[test]
    fn weyl_vs_standard_for_x_xi() {
        // Op_std(x xi) = Op_w(x xi) + (i h / 2) Id
        let h = 0.3;
        let b = basis_1d(9, 1.3);
        let s = PolynomialSymbol::monomial(1, 1.0, &[1], &[1]).unwrap();
        let w = quantize(&s, Ordering::Weyl, &b, h).unwrap();
        let st = quantize(&s, Ordering::Standard, &b, h).unwrap();
        let id = DMatrix::from_diagonal_element(w.dim(), w.dim(), Complex64::new(1.0, 0.0));
        let diff = &st.entries - &w.entries - id * Complex64::new(0.0, 0.5 * h);
        assert!(diff.norm() < 1e-13);
        assert!(w.hermiticity_defect() < 1e-13);
    }

    #[test]
    fn hermiticity_of_real_weyl_symbols() {
        let b = Arc::new(GalerkinBasis::new(2, 6, vec![1.0, 2.0]).unwrap());
        let s = PolynomialSymbol::new(
            2,
            vec![
                Term {
                    coeff: 0.7,
                    x_pow: vec![2, 1],
                    xi_pow: vec![1, 0],
                },
                Term {
                    coeff: -1.1,
                    x_pow: vec![0, 0],
                    xi_pow: vec![2, 2],
                },
            ],
        )
        .unwrap();
        let m = quantize(&s, Ordering::Weyl, &b, 0.5).unwrap();
        assert!(m.hermiticity_defect() < 1e-12 * (1.0 + m.norm()));
    }

    #[test]
    fn adapted_frequencies_from_quadratic_part() {
        let model = crate::models::aniso_ho_so2();
        let b = GalerkinBasis::adapted(model.symbol(), 4).unwrap();
        assert_relative_eq!(b.ref_freq()[0], crate::models::ANISO_OMEGA1, epsilon = 1e-12);
        assert_relative_eq!(b.ref_freq()[2], crate::models::ANISO_OMEGA2, epsilon = 1e-12);
    }
}
