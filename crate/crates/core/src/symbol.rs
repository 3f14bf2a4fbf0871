//! Polynomial phase-space symbols H(x, xi) with exact derivatives.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{EquiweylError, Result};

/// Default cap on the total degree of a symbol.
pub const MAX_SYMBOL_DEGREE: u32 = 6;

/// One monomial `coeff * x^x_pow * xi^xi_pow`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub x_pow: Vec<u32>,
    pub xi_pow: Vec<u32>,
}

impl Term {
    pub fn total_degree(&self) -> u32 {
        self.x_pow.iter().sum::<u32>() + self.xi_pow.iter().sum::<u32>()
    }
}

/// A real polynomial in (x, xi) on R^{2n}.
#[derive(Debug, Clone)]
pub struct PolynomialSymbol {
    n: usize,
    terms: Vec<Term>,
}

impl PolynomialSymbol {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.x_pow.len() != n || t.xi_pow.len() != n {
                return Err(EquiweylError::DimensionMismatch {
                    expected: n,
                    got: t.x_pow.len().max(t.xi_pow.len()),
                });
            }
            if t.total_degree() > MAX_SYMBOL_DEGREE {
                return Err(EquiweylError::DegreeOverflow {
                    degree: t.total_degree(),
                    max: MAX_SYMBOL_DEGREE,
                });
            }
        }
        Ok(Self { n, terms })
    }

    /// Convenience constructor for a single monomial.
    pub fn monomial(n: usize, coeff: f64, x_pow: &[u32], xi_pow: &[u32]) -> Result<Self> {
        Self::new(
            n,
            vec![Term {
                coeff,
                x_pow: x_pow.to_vec(),
                xi_pow: xi_pow.to_vec(),
            }],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(Term::total_degree).max().unwrap_or(0)
    }

    /// Evaluate at z = (x, xi), a 2n-vector.
    pub fn eval(&self, z: &DVector<f64>) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coeff;
            for (j, &p) in t.x_pow.iter().enumerate() {
                v *= z[j].powi(p as i32);
            }
            for (j, &p) in t.xi_pow.iter().enumerate() {
                v *= z[n + j].powi(p as i32);
            }
            acc += v;
        }
        acc
    }

    /// Partial derivative with respect to x_axis or xi_axis.
    fn diff(&self, axis: usize, wrt_xi: bool) -> PolynomialSymbol {
        let mut terms = Vec::new();
        for t in &self.terms {
            let pow = if wrt_xi {
                t.xi_pow[axis]
            } else {
                t.x_pow[axis]
            };
            if pow == 0 {
                continue;
            }
            let mut nt = t.clone();
            nt.coeff *= pow as f64;
            if wrt_xi {
                nt.xi_pow[axis] -= 1;
            } else {
                nt.x_pow[axis] -= 1;
            }
            terms.push(nt);
        }
        PolynomialSymbol { n: self.n, terms }
    }

    pub fn d_dx(&self, axis: usize) -> PolynomialSymbol {
        self.diff(axis, false)
    }

    pub fn d_dxi(&self, axis: usize) -> PolynomialSymbol {
        self.diff(axis, true)
    }

    /// Mixed Laplacian sum_k d/dx_k d/dxi_k, the generator of quantization changes.
    pub fn mixed_laplacian(&self) -> PolynomialSymbol {
        let mut terms = Vec::new();
        for k in 0..self.n {
            terms.extend(self.d_dx(k).d_dxi(k).terms);
        }
        PolynomialSymbol { n: self.n, terms }.compacted()
    }

    /// Merge equal monomials and drop zero coefficients.
    pub fn compacted(&self) -> PolynomialSymbol {
        let mut map: std::collections::BTreeMap<(Vec<u32>, Vec<u32>), f64> =
            std::collections::BTreeMap::new();
        for t in &self.terms {
            *map.entry((t.x_pow.clone(), t.xi_pow.clone())).or_insert(0.0) += t.coeff;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|((x_pow, xi_pow), coeff)| Term {
                coeff,
                x_pow,
                xi_pow,
            })
            .collect();
        PolynomialSymbol { n: self.n, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.compacted().terms.is_empty()
    }

    /// Gradient in R^{2n}, ordered (d/dx, d/dxi).
    pub fn grad(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut g = DVector::zeros(2 * n);
        for j in 0..n {
            g[j] = self.d_dx(j).eval(z);
            g[n + j] = self.d_dxi(j).eval(z);
        }
        g
    }

    /// Hessian in R^{2n}.
    pub fn hess(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        let mut firsts: Vec<PolynomialSymbol> = Vec::with_capacity(2 * n);
        for j in 0..n {
            firsts.push(self.d_dx(j));
        }
        for j in 0..n {
            firsts.push(self.d_dxi(j));
        }
        for (i, fi) in firsts.iter().enumerate() {
            for j in 0..n {
                h[(i, j)] = fi.d_dx(j).eval(z);
                h[(i, n + j)] = fi.d_dxi(j).eval(z);
            }
        }
        h
    }

    pub fn scale(&self, s: f64) -> PolynomialSymbol {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * s,
                ..t.clone()
            })
            .collect();
        PolynomialSymbol { n: self.n, terms }
    }

    pub fn to_complex(&self) -> ComplexPolynomial {
        ComplexPolynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| (Complex64::new(t.coeff, 0.0), t.x_pow.clone(), t.xi_pow.clone()))
                .collect(),
        }
    }
}

/// A polynomial with complex coefficients; appears in quantization-change expansions.
#[derive(Debug, Clone)]
pub struct ComplexPolynomial {
    pub n: usize,
    pub terms: Vec<(Complex64, Vec<u32>, Vec<u32>)>,
}

impl ComplexPolynomial {
    pub fn scale(&self, s: Complex64) -> ComplexPolynomial {
        ComplexPolynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(c, a, b)| (c * s, a.clone(), b.clone()))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _, _)| c.norm() == 0.0)
    }
}
